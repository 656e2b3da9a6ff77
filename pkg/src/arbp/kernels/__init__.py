"""Backend selection for the message-passing hot kernels.

The compiled Cython extension is used when available; otherwise a NumPy
fallback with identical semantics. `BACKEND` reports which one was picked,
and `benchmarks/kernel_bench.py` compares the two.
"""
import numpy as np

from . import numpy_backend

EPS_CLIP = numpy_backend.EPS_CLIP

try:
    from . import _fast

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build
    _fast = None
    BACKEND = "numpy"


def _batched(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def variable_step(llr, x_prev, graph, backend=None):
    """Variable-node update for a batch of frames; accepts (n,)/(E,) single
    frames as well."""
    llr2, squeeze = _batched(llr)
    x2, _ = _batched(x_prev)
    if (backend or BACKEND) == "cython":
        out = _fast.variable_step(llr2, x2, graph.vv, graph.var_edges, graph.var_ptr)
    else:
        out = numpy_backend.variable_step(
            llr2, x2, graph.vv, graph.var_edges, graph.var_ptr
        )
    return out[0] if squeeze else out


def check_step_exact(x_prev, graph, backend=None):
    x2, squeeze = _batched(x_prev)
    if (backend or BACKEND) == "cython":
        out = _fast.check_step_exact(x2, graph.check_ptr, graph.dc_max)
    else:
        out = numpy_backend.check_step_exact(
            x2, graph.check_pad, graph.check_mask, graph.check_mask.reshape(-1)
        )
    return out[0] if squeeze else out


def check_step_taylor(x_prev, graph, q, backend=None):
    if q < 1 or q % 2 == 0:
        raise ValueError("q must be an odd integer >= 1")
    x2, squeeze = _batched(x_prev)
    if (backend or BACKEND) == "cython":
        out = _fast.check_step_taylor(x2, graph.check_ptr, graph.dc_max, int(q))
    else:
        out = numpy_backend.check_step_taylor(
            x2, graph.check_pad, graph.check_mask, graph.check_mask.reshape(-1), q
        )
    return out[0] if squeeze else out


def check_exclusion(x_prev, graph):
    """Leave-one-out products per check (NumPy path; used by training)."""
    x2, squeeze = _batched(x_prev)
    out = numpy_backend.check_exclusion(
        x2, graph.check_pad, graph.check_mask, graph.check_mask.reshape(-1)
    )
    return out[0] if squeeze else out


def check_exclusion_backward(g_t, x_prev, graph):
    g2, squeeze = _batched(g_t)
    x2, _ = _batched(x_prev)
    out = numpy_backend.check_exclusion_backward(
        g2, x2, graph.check_pad, graph.check_mask, graph.check_mask.reshape(-1)
    )
    return out[0] if squeeze else out


taylor_sum = numpy_backend.taylor_sum
taylor_deriv = numpy_backend.taylor_deriv
