"""Minimal numeric substrate for the learned decoder: bias-free tanh MLPs
with hand-written reverse-mode gradients, the Adam optimizer, and checkpoint
persistence.

No bias terms anywhere: the decoder's symmetry test-suite relies on
bias-free tanh networks being odd functions of their input.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MlpArch:
    layer_widths: tuple          # input width first, output width last
    output_activation: str = "tanh"   # "tanh" | "linear"

    def __post_init__(self):
        if len(self.layer_widths) < 2 or any(w < 1 for w in self.layer_widths):
            raise ValueError("need >= 2 positive layer widths")
        if self.output_activation not in ("tanh", "linear"):
            raise ValueError("output_activation must be 'tanh' or 'linear'")
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))

    @property
    def num_params(self):
        w = self.layer_widths
        return sum(w[i] * w[i + 1] for i in range(len(w) - 1))

    def layer_slices(self):
        """(offset, (in, out)) for each layer in the flat parameter vector;
        matrices are stored row-major with rows = inputs."""
        out = []
        off = 0
        w = self.layer_widths
        for i in range(len(w) - 1):
            out.append((off, (w[i], w[i + 1])))
            off += w[i] * w[i + 1]
        return out


@dataclass
class ParamVector:
    values: np.ndarray
    arch: MlpArch

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.arch.num_params,):
            raise ValueError(
                f"parameter vector length {self.values.size} != {self.arch.num_params}"
            )

    def matrices(self):
        return [
            self.values[off : off + r * c].reshape(r, c)
            for off, (r, c) in self.arch.layer_slices()
        ]


def init_params(arch, rng):
    """Per-layer uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    vals = np.empty(arch.num_params)
    for off, (r, c) in arch.layer_slices():
        lim = np.sqrt(6.0 / (r + c))
        vals[off : off + r * c] = rng.uniform(-lim, lim, r * c)
    return ParamVector(vals, arch)


def mlp_forward(params, x):
    """Forward pass; x is (din,) or (B, din). Returns (output, tape).

    h_0 = x, h_i = act(h_{i-1} @ W_i); the tape keeps every h_i for backward.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.arch.layer_widths[0]:
        raise ValueError("input width mismatch")
    mats = params.matrices()
    h = x
    tape = [h]
    for i, W in enumerate(mats):
        z = h @ W
        last = i == len(mats) - 1
        h = z if (last and params.arch.output_activation == "linear") else np.tanh(z)
        tape.append(h)
    return h, tape


def mlp_backward(params, tape, upstream_grad):
    """Exact reverse-mode gradients of mlp_forward.

    Returns (flat parameter gradient, gradient w.r.t. the input).
    """
    mats = params.matrices()
    if len(tape) != len(mats) + 1:
        raise ValueError("tape does not match the architecture")
    g = np.asarray(upstream_grad, dtype=np.float64)
    grad = np.zeros_like(params.values)
    slices = params.arch.layer_slices()
    for i in range(len(mats) - 1, -1, -1):
        h_out = tape[i + 1]
        last = i == len(mats) - 1
        if not (last and params.arch.output_activation == "linear"):
            g = g * (1.0 - h_out * h_out)   # through tanh
        h_in = tape[i]
        off, (r, c) = slices[i]
        if h_in.ndim == 1:
            gW = np.outer(h_in, g)
        else:
            gW = h_in.T @ g
        grad[off : off + r * c] = gW.reshape(-1)
        g = g @ mats[i].T
    return grad, g


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(size, lr=1e-4):
    return AdamState(m=np.zeros(size), v=np.zeros(size), lr=lr)


def adam_step(params, grads, state):
    """One Adam update with bias correction; mutates state, returns params."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError("parameter/gradient/state length mismatch")
    state.t += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1 - state.beta2) * grads**2
    m_hat = state.m / (1 - state.beta1**state.t)
    v_hat = state.v / (1 - state.beta2**state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# ---------------------------------------------------------------------------
# Checkpoints

CHECKPOINT_VERSION = 1


def save_checkpoint(path, *, arrays, meta):
    """Versioned .npz checkpoint: named float arrays plus a JSON metadata
    blob (arch descriptors, code fingerprint, training config)."""
    meta = dict(meta)
    meta["version"] = CHECKPOINT_VERSION
    np.savez(path, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
             **arrays)


def load_checkpoint(path):
    with np.load(path) as z:
        meta = json.loads(z["__meta__"].tobytes().decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        arrays = {k: z[k] for k in z.files if k != "__meta__"}
    return arrays, meta
