"""BPSK over AWGN, LLR formation, and blind per-frame SNR estimation.

Sign convention used throughout the package: bit 1 maps to symbol +1 and
llr_v = log P(c_v = 1 | y_v) / P(c_v = 0 | y_v), so positive LLR means
"probably a one". The channel emits LLRs directly; the 2/sigma^2 scaling is
already folded into the output.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LlrFrame:
    """One received frame (or a batch of frames stacked on the first axis)."""

    llr: np.ndarray
    truth_bits: np.ndarray | None = None
    true_snr_db: float | None = None


@dataclass(frozen=True)
class SnrEstimate:
    raw: float                  # dB, may be -inf for degenerate frames
    clamped_index: int          # in [1, I]
    low_confidence: bool = False


def noise_sigma(snr_db, rate):
    """Noise standard deviation for BPSK at the given SNR (dB) and code rate."""
    return 1.0 / np.sqrt(2.0 * rate * 10.0 ** (snr_db / 10.0))


def bpsk(bits):
    """bit 0 -> -1, bit 1 -> +1."""
    return 2.0 * np.asarray(bits, dtype=np.float64) - 1.0


def transmit(bits, snr_db, rate, rng):
    """Modulate, add white Gaussian noise, and emit the LLR frame.

    `bits` may be a single frame (n,) or a batch (B, n); the LLR output has
    the same shape.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    sigma = noise_sigma(snr_db, rate)
    s = bpsk(bits)
    y = (2.0 / sigma**2) * (s + sigma * rng.standard_normal(bits.shape))
    return LlrFrame(llr=y, truth_bits=bits, true_snr_db=float(snr_db))


def _masked_var(llr2, mask):
    """Sample variance (ddof=1) per row over masked entries; 0 when a row
    has fewer than 2 selected entries."""
    cnt = mask.sum(axis=1)
    safe = np.maximum(cnt, 1)
    mean = np.where(mask, llr2, 0.0).sum(axis=1) / safe
    sq = np.where(mask, (llr2 - mean[:, None]) ** 2, 0.0).sum(axis=1)
    var = np.where(cnt >= 2, sq / np.maximum(cnt - 1, 1), 0.0)
    return var, cnt


def estimate_snr_batch(llr2, rate, max_snr=8):
    """Vectorized blind SNR estimate for a (B, n) LLR batch.

    Returns (raw dB array, clamped index array, low-confidence mask).
    """
    llr2 = np.atleast_2d(np.asarray(llr2, dtype=np.float64))
    pos = llr2 > 0
    var_p, cnt_p = _masked_var(llr2, pos)
    var_m, cnt_m = _masked_var(llr2, ~pos)
    var_pm = 0.5 * (var_p + var_m)
    with np.errstate(divide="ignore"):
        raw = 10.0 * np.log10(var_pm / (8.0 * rate))
    idx = np.clip(np.round(raw), 1, max_snr)
    idx = np.where(np.isfinite(raw), idx, 1).astype(np.int64)
    low_conf = (cnt_p < 2) | (cnt_m < 2)
    return raw, idx, low_conf


def estimate_snr(llr, rate, max_snr=8):
    """Blind SNR estimate for one frame: split the LLRs by sign, average the
    two sample variances, convert to dB, then round and clamp to [1, I]."""
    raw, idx, low_conf = estimate_snr_batch(np.asarray(llr)[None, :], rate, max_snr)
    return SnrEstimate(
        raw=float(raw[0]), clamped_index=int(idx[0]), low_confidence=bool(low_conf[0])
    )
