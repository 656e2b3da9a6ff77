"""Autoregressive hypernetwork BP decoder.

Per iteration, a hypernetwork f maps [a | e | z | p | |x|] to the weights of
a small per-variable network g that replaces the classical variable step:

  a  - scaled BPSK projection of the previous iteration's hard decision,
  e  - syndrome of that decision under the pairwise-extended parity matrix,
  z  - mismatch between its parity section and re-encoded parity bits,
  p  - learned embedding of the blindly estimated SNR (one lookup per frame),
  |x| - magnitudes of the previous check-layer messages.

Hard decisions and the SNR index are treated as constants in backward;
gradients reach a only through its scale c_j, p only through the selected
look-up-table column, and |x| through the absolute-value subgradient with
sign(0) = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bp import _sigmoid, hard_decision
from .channel import estimate_snr_batch
from .graph import lift, marginalize_sum
from .neural import (
    AdamState,
    MlpArch,
    ParamVector,
    adam_init,
    adam_step,
    init_params,
    mlp_backward,
    mlp_forward,
)

VARIANTS = ("Full", "NoA", "NoE", "NoZ", "NoP", "ZeroCodeword")

SNR_EMBED_DIM = 64


@dataclass
class DecoderParams:
    """All learnable state of the decoder, tied to one code's edge ordering."""

    theta_f: ParamVector
    lut_snr: np.ndarray            # (64, I); column i-1 embeds SNR index i
    c: np.ndarray                  # (L,) per-iteration scales
    w_bar: np.ndarray              # (E,) marginalization weights
    g_arch: MlpArch
    L: int
    q: int
    snr_levels: int                # I
    fingerprint: str

    def groups(self):
        return {
            "theta_f": self.theta_f.values,
            "lut_snr": self.lut_snr,
            "c": self.c,
            "w_bar": self.w_bar,
        }


@dataclass
class ArFeatures:
    a: np.ndarray
    e: np.ndarray
    z: np.ndarray
    p: np.ndarray


@dataclass
class ArResult:
    bits: np.ndarray
    o_history: list
    feature_history: list
    snr_index: np.ndarray


def feature_input_width(code, graph):
    d = code.H_ext.shape[0]
    return 2 * graph.E + d + (code.n - code.k) + SNR_EMBED_DIM


def g_architecture(graph, hidden=16):
    return MlpArch((graph.d_max, hidden, hidden, 1), output_activation="tanh")


def f_architecture(code, graph, hidden=128, g_hidden=16):
    g_arch = g_architecture(graph, g_hidden)
    return MlpArch(
        (feature_input_width(code, graph), hidden, hidden, hidden, hidden,
         g_arch.num_params),
        output_activation="linear",
    )


def init_decoder_params(code, graph, rng, L=5, q=1005, snr_levels=8,
                        f_hidden=128, g_hidden=16):
    theta_f = init_params(f_architecture(code, graph, f_hidden, g_hidden), rng)
    return DecoderParams(
        theta_f=theta_f,
        lut_snr=rng.normal(0.0, 0.1, (SNR_EMBED_DIM, snr_levels)),
        c=np.ones(L),
        w_bar=np.ones(graph.E),
        g_arch=g_architecture(graph, g_hidden),
        L=L,
        q=q,
        snr_levels=snr_levels,
        fingerprint=graph.fingerprint(),
    )


# ---------------------------------------------------------------------------
# Feature operators

def compute_a(s, c_j, graph):
    """Per-edge broadcast of the hard-decision symbols, scaled by c_j."""
    return c_j * lift(np.asarray(s, dtype=np.float64), graph)


def compute_e(s, H_ext):
    """Extended-parity syndrome of the hard decision (bits, mod 2)."""
    b = ((np.asarray(s) + 1) // 2).astype(np.uint8)
    return (b @ H_ext.T) % 2


def compute_z(s, code):
    """Mismatch between the decision's parity bits and the parity section of
    the codeword re-encoded from its own information bits."""
    b = ((np.asarray(s) + 1) // 2).astype(np.uint8)
    b_info = b[..., : code.k]
    reenc = (b_info @ code.G_std) % 2
    return b[..., code.k :] ^ reenc[..., code.k :]


def embed_snr(index, lut_snr):
    """Column lookup (1-based index; the channel clamps into range)."""
    index = np.asarray(index)
    if np.any(index < 1) or np.any(index > lut_snr.shape[1]):
        raise ValueError("SNR index out of range")
    return lut_snr[:, index - 1].T if index.ndim else lut_snr[:, index - 1]


def hyper_weights(theta_f, features, x_abs):
    """Run f on the concatenated feature vector and return g's weights."""
    fin = np.concatenate(
        [features.a, features.e, features.z, features.p, x_abs], axis=-1
    )
    out, _ = mlp_forward(theta_f, fin)
    return out


# ---------------------------------------------------------------------------
# Forward decode

@dataclass
class _IterTape:
    s_edge: np.ndarray
    x_prev: np.ndarray
    f_tape: list
    W: tuple
    Xg: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    xv: np.ndarray
    t: np.ndarray
    xc: np.ndarray
    o: np.ndarray
    features: ArFeatures


def _split_g_weights(theta_g, g_arch):
    B = theta_g.shape[0]
    mats = []
    off = 0
    for _, (r, c) in g_arch.layer_slices():
        mats.append(theta_g[:, off : off + r * c].reshape(B, r, c))
        off += r * c
    return tuple(mats)


def _g_input(llr2, x_prev, graph):
    """(B, E, d_max) inputs of g: slot 0 the channel LLR of the edge's
    variable, slots 1.. the excluded-edge messages in edge-id order,
    zero padding up to d_max."""
    B = llr2.shape[0]
    Xg = np.zeros((B, graph.E, graph.d_max))
    Xg[:, :, 0] = llr2[:, graph.vv]
    if graph.d_max > 1:
        Xg[:, :, 1:] = x_prev[:, graph.excl_idx] * graph.excl_mask
    return Xg


def _forward(llr2, code, graph, params, mode, variant, keep_tape):
    B, n = llr2.shape
    E = graph.E
    _, snr_idx, _ = estimate_snr_batch(llr2, code.rate, params.snr_levels)
    p = embed_snr(snr_idx, params.lut_snr)
    if variant == "NoP":
        p = np.zeros_like(p)

    x_prev = np.zeros((B, E))
    o_prev = _sigmoid(llr2)
    tapes = []
    o_history = []
    feats_history = []
    W1 = W2 = W3 = None
    for j in range(params.L):
        s, _ = hard_decision(o_prev)
        a = (
            np.zeros((B, E))
            if variant == "NoA"
            else compute_a(s, params.c[j], graph)
        )
        e = compute_e(s, code.H_ext).astype(np.float64)
        if variant == "NoE":
            e = np.zeros_like(e)
        z = compute_z(s, code).astype(np.float64)
        if variant == "NoZ":
            z = np.zeros_like(z)
        feats = ArFeatures(a=a, e=e, z=z, p=p)
        absx = np.abs(x_prev)
        fin = np.concatenate([a, e, z, p, absx], axis=1)
        theta_g, f_tape = mlp_forward(params.theta_f, fin)
        W1, W2, W3 = _split_g_weights(theta_g, params.g_arch)

        Xg = _g_input(llr2, x_prev, graph)
        H1 = np.tanh(Xg @ W1)
        H2 = np.tanh(H1 @ W2)
        xv = np.tanh((H2 @ W3)[:, :, 0])

        t = kernels.check_exclusion(xv, graph)
        if mode == "taylor":
            xc = kernels.taylor_sum(t, params.q)
        elif mode == "exact":
            lim = 1.0 - kernels.EPS_CLIP
            xc = 2.0 * np.arctanh(np.clip(t, -lim, lim))
        else:
            raise ValueError(f"unknown mode {mode!r}")

        u = llr2 + marginalize_sum(params.w_bar * xc, graph)
        o = _sigmoid(u)
        o_history.append(o)
        feats_history.append(feats)
        if keep_tape:
            tapes.append(
                _IterTape(
                    s_edge=lift(s, graph),
                    x_prev=x_prev,
                    f_tape=f_tape,
                    W=(W1, W2, W3),
                    Xg=Xg,
                    H1=H1,
                    H2=H2,
                    xv=xv,
                    t=t,
                    xc=xc,
                    o=o,
                    features=feats,
                )
            )
        x_prev = xc
        o_prev = o
    return o_history, feats_history, snr_idx, tapes


def decode_ar(llr, code, graph, params, mode="exact", variant="Full"):
    """Full autoregressive decode; returns hard bits plus the per-iteration
    marginalization and feature snapshots."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if params.fingerprint != graph.fingerprint():
        raise ValueError("checkpoint/code mismatch: edge-ordering fingerprints differ")
    llr = np.asarray(llr, dtype=np.float64)
    single = llr.ndim == 1
    llr2 = llr[None, :] if single else llr
    o_hist, feats, snr_idx, _ = _forward(
        llr2, code, graph, params, mode, variant, keep_tape=False
    )
    _, bits = hard_decision(o_hist[-1])
    if single:
        return ArResult(
            bits=bits[0],
            o_history=[o[0] for o in o_hist],
            feature_history=feats,
            snr_index=snr_idx,
        )
    return ArResult(bits=bits, o_history=o_hist, feature_history=feats,
                    snr_index=snr_idx)


# ---------------------------------------------------------------------------
# Loss and training

O_CLIP = 1e-12


def loss(o_history, truth_bits):
    """Multiloss: cross-entropy of every iteration's marginalization against
    the transmitted bits, averaged over bits (and frames, if batched)."""
    truth = np.asarray(truth_bits, dtype=np.float64)
    n = truth.shape[-1]
    total = 0.0
    for o in o_history:
        oc = np.clip(o, O_CLIP, 1.0 - O_CLIP)
        total += -(truth * np.log(oc) + (1 - truth) * np.log(1 - oc)).sum(axis=-1)
    total = total / n
    return float(np.mean(total))


def _backward(tapes, llr2, truth_bits, code, graph, params, snr_idx, variant):
    """Gradients of `loss` over the unrolled decode, by reverse sweep."""
    B, n = llr2.shape
    E = graph.E
    truth = np.asarray(truth_bits, dtype=np.float64)
    g_theta_f = np.zeros_like(params.theta_f.values)
    g_lut = np.zeros_like(params.lut_snr)
    g_c = np.zeros_like(params.c)
    g_wbar = np.zeros_like(params.w_bar)
    g_p = np.zeros((B, SNR_EMBED_DIM))
    g_x_carry = np.zeros((B, E))
    d = code.H_ext.shape[0]
    m = code.n - code.k

    for j in range(params.L - 1, -1, -1):
        tp = tapes[j]
        gu = (tp.o - truth) / (n * B)
        gu_edge = gu[:, graph.vv]
        g_wbar += np.sum(gu_edge * tp.xc, axis=0)
        g_xc = gu_edge * params.w_bar + g_x_carry
        g_t = g_xc * kernels.taylor_deriv(tp.t, params.q)
        g_xv = kernels.check_exclusion_backward(g_t, tp.xv, graph)

        W1, W2, W3 = tp.W
        dZ3 = (g_xv * (1.0 - tp.xv**2))[:, :, None]
        gW3 = tp.H2.transpose(0, 2, 1) @ dZ3
        gH2 = dZ3 @ W3.transpose(0, 2, 1)
        dZ2 = gH2 * (1.0 - tp.H2**2)
        gW2 = tp.H1.transpose(0, 2, 1) @ dZ2
        gH1 = dZ2 @ W2.transpose(0, 2, 1)
        dZ1 = gH1 * (1.0 - tp.H1**2)
        gW1 = tp.Xg.transpose(0, 2, 1) @ dZ1
        gXg = dZ1 @ W1.transpose(0, 2, 1)
        B_ = B
        g_theta_g = np.concatenate(
            [gW1.reshape(B_, -1), gW2.reshape(B_, -1), gW3.reshape(B_, -1)], axis=1
        )

        g_x_prev = np.zeros((B, E))
        if graph.d_max > 1:
            contrib = (gXg[:, :, 1:] * graph.excl_mask).reshape(B, -1)
            np.add.at(g_x_prev.T, graph.excl_idx.reshape(-1), contrib.T)

        gflat, g_in = mlp_backward(params.theta_f, tp.f_tape, g_theta_g)
        g_theta_f += gflat
        ga = g_in[:, :E]
        gp = g_in[:, E + d + m : E + d + m + SNR_EMBED_DIM]
        gabs = g_in[:, E + d + m + SNR_EMBED_DIM :]
        if variant != "NoA":
            g_c[j] += float(np.sum(ga * tp.s_edge))
        if variant != "NoP":
            g_p += gp
        g_x_prev += gabs * np.sign(tp.x_prev)
        g_x_carry = g_x_prev

    if variant != "NoP":
        np.add.at(g_lut.T, snr_idx - 1, g_p)
    return {"theta_f": g_theta_f, "lut_snr": g_lut, "c": g_c, "w_bar": g_wbar}


def decode_ar_with_grads(llr2, truth_bits, code, graph, params, variant="Full"):
    """Taylor-mode forward plus gradients of the multiloss; used by training
    and by the finite-difference oracle tests."""
    llr2 = np.atleast_2d(np.asarray(llr2, dtype=np.float64))
    truth2 = np.atleast_2d(truth_bits)
    o_hist, _, snr_idx, tapes = _forward(
        llr2, code, graph, params, "taylor", variant, keep_tape=True
    )
    value = loss(o_hist, truth2)
    grads = _backward(tapes, llr2, truth2, code, graph, params, snr_idx, variant)
    return value, grads


def init_adam(params, lr=1e-4):
    return {name: adam_init(np.asarray(g).size, lr=lr)
            for name, g in params.groups().items()}


def make_batch(code, rng, per_snr=15, snr_values=range(1, 9), zero_codeword=False):
    """Training batch: per_snr random-codeword frames at each SNR value."""
    from .channel import transmit

    llrs = []
    truths = []
    for snr in snr_values:
        if zero_codeword:
            bits = np.zeros((per_snr, code.n), dtype=np.uint8)
        else:
            info = rng.integers(0, 2, (per_snr, code.k))
            bits = (info @ code.G_std) % 2
        frame = transmit(bits, snr, code.rate, rng)
        llrs.append(frame.llr)
        truths.append(bits)
    return np.vstack(llrs), np.vstack(truths).astype(np.uint8)


def save_decoder(path, params, adam_states=None, meta=None):
    """Persist decoder parameters (and optionally optimizer state) as a
    versioned checkpoint."""
    from .neural import save_checkpoint

    arrays = {
        "theta_f": params.theta_f.values,
        "lut_snr": params.lut_snr,
        "c": params.c,
        "w_bar": params.w_bar,
    }
    if adam_states is not None:
        for name, st in adam_states.items():
            arrays[f"adam_m_{name}"] = st.m
            arrays[f"adam_v_{name}"] = st.v
    info = {
        "f_arch": list(params.theta_f.arch.layer_widths),
        "f_out_act": params.theta_f.arch.output_activation,
        "g_arch": list(params.g_arch.layer_widths),
        "L": params.L,
        "q": params.q,
        "snr_levels": params.snr_levels,
        "fingerprint": params.fingerprint,
    }
    if adam_states is not None:
        info["adam"] = {
            name: {"t": st.t, "lr": st.lr} for name, st in adam_states.items()
        }
    if meta:
        info.update(meta)
    save_checkpoint(path, arrays=arrays, meta=info)


def load_decoder(path):
    """Load a decoder checkpoint; returns (params, adam_states or None, meta)."""
    from .neural import load_checkpoint

    arrays, meta = load_checkpoint(path)
    f_arch = MlpArch(tuple(meta["f_arch"]), output_activation=meta["f_out_act"])
    params = DecoderParams(
        theta_f=ParamVector(arrays["theta_f"], f_arch),
        lut_snr=arrays["lut_snr"],
        c=arrays["c"],
        w_bar=arrays["w_bar"],
        g_arch=MlpArch(tuple(meta["g_arch"]), output_activation="tanh"),
        L=int(meta["L"]),
        q=int(meta["q"]),
        snr_levels=int(meta["snr_levels"]),
        fingerprint=meta["fingerprint"],
    )
    adam_states = None
    if "adam" in meta:
        adam_states = {}
        for name, cfg in meta["adam"].items():
            st = AdamState(
                m=arrays[f"adam_m_{name}"], v=arrays[f"adam_v_{name}"],
                t=int(cfg["t"]), lr=float(cfg["lr"]),
            )
            adam_states[name] = st
    return params, adam_states, meta


def train_step(llr2, truth2, code, graph, params, adam_states, variant="Full"):
    """One optimization step over a batch; returns the batch mean loss."""
    value, grads = decode_ar_with_grads(llr2, truth2, code, graph, params, variant)
    params.theta_f.values = adam_step(
        params.theta_f.values, grads["theta_f"], adam_states["theta_f"]
    )
    params.lut_snr = adam_step(
        params.lut_snr.ravel(), grads["lut_snr"].ravel(), adam_states["lut_snr"]
    ).reshape(params.lut_snr.shape)
    params.c = adam_step(params.c, grads["c"], adam_states["c"])
    params.w_bar = adam_step(params.w_bar, grads["w_bar"], adam_states["w_bar"])
    return value
