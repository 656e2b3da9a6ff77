"""Classical sum-product belief propagation on an EdgeGraph.

The decode loop alternates a variable step and a check step L times from
all-zero messages; after each check step the marginalization is recorded.
Message values after a variable step live in tanh space, check-step outputs
are LLR-domain.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import marginalize_sum


@dataclass
class MessageState:
    x: np.ndarray
    iteration: int = 0
    o_history: list = field(default_factory=list)


@dataclass
class BpResult:
    bits: np.ndarray
    o_history: list
    x_history: list | None = None   # per-iteration check-step outputs
    iterations_used: np.ndarray | None = None


def variable_step(llr, x_prev, graph):
    """x[e=(c,v)] = tanh(0.5 * (llr_v + exclusion sum over N(v)))."""
    return kernels.variable_step(llr, x_prev, graph)


def check_step_exact(x_prev, graph):
    """x[e=(c,v)] = 2*arctanh of the leave-one-out product over N(c)."""
    return kernels.check_step_exact(x_prev, graph)


def check_step_taylor(x_prev, graph, q):
    """Check step with 2*arctanh replaced by its odd Taylor series of order q."""
    return kernels.check_step_taylor(x_prev, graph, q)


def marginalize(llr, x, graph, weights=None):
    """u_v = llr_v + sum over N(v) of w_e * x_e; o = sigmoid(u).

    All-ones weights recover classical BP marginalization.
    """
    llr = np.asarray(llr, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    wx = x if weights is None else weights * x
    u = llr + marginalize_sum(wx, graph)
    return u, _sigmoid(u)


def _sigmoid(u):
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    ex = np.exp(u[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def hard_decision(o):
    """Threshold soft outputs: o > 0.5 maps to symbol +1 / bit 1, ties to -1."""
    o = np.asarray(o)
    s = np.where(o > 0.5, 1.0, -1.0)
    bits = ((s + 1) / 2).astype(np.uint8)
    return s, bits


def decode_bp(llr, graph, L, mode="exact", q=None, early_exit_H=None,
              record_messages=False):
    """Run L iterations of sum-product BP and return the hard decision plus
    all L marginalization snapshots.

    mode is "exact" or "taylor" (requires odd q). With `early_exit_H` set,
    frames whose hard decision satisfies H stop updating (used by the
    "at convergence" evaluation mode).
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    llr = np.asarray(llr, dtype=np.float64)
    single = llr.ndim == 1
    llr2 = llr[None, :] if single else llr
    B = llr2.shape[0]
    x = np.zeros((B, graph.E))
    o_history = []
    x_history = [] if record_messages else None
    active = np.ones(B, dtype=bool)
    iters_used = np.full(B, L, dtype=np.int64)

    def one_iteration(llr_part, x_part):
        xv = variable_step(llr_part, x_part, graph)
        if mode == "exact":
            return check_step_exact(xv, graph)
        if mode == "taylor":
            return check_step_taylor(xv, graph, q)
        raise ValueError(f"unknown mode {mode!r}")

    o = None
    for it in range(L):
        if early_exit_H is None:
            x = one_iteration(llr2, x)
        else:
            x[active] = one_iteration(llr2[active], x[active])
        _, o = marginalize(llr2, x, graph)
        o_history.append(o)
        if record_messages:
            x_history.append(x.copy())
        if early_exit_H is not None:
            _, bits = hard_decision(o)
            ok = ((bits @ early_exit_H.T) % 2 == 0).all(axis=1)
            newly = active & ok
            iters_used[newly] = np.minimum(iters_used[newly], it + 1)
            active = active & ~ok
            if not active.any():
                break

    _, bits = hard_decision(o)
    if single:
        return BpResult(
            bits=bits[0],
            o_history=[h[0] for h in o_history],
            x_history=None if x_history is None else [h[0] for h in x_history],
            iterations_used=iters_used[:1],
        )
    return BpResult(bits=bits, o_history=o_history, x_history=x_history,
                    iterations_used=iters_used)
