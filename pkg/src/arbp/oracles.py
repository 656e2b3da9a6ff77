"""Brute-force references for verification: exhaustive codebooks, exact
posterior marginals, and MAP decoding. Only usable for small k."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import encode

K_LIMIT = 20


@dataclass(frozen=True)
class Codebook:
    words: np.ndarray    # (2^k, n) bits

    def __len__(self):
        return self.words.shape[0]


def enumerate_codebook(code):
    """Encode every information word (guarded to k <= 20)."""
    if code.k > K_LIMIT:
        raise ValueError(f"k={code.k} too large for exhaustive enumeration")
    k = code.k
    count = 1 << k
    info = ((np.arange(count)[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)
    words = encode(info, code)
    assert not ((words @ code.H.T) % 2).any()
    return Codebook(words=words)


def exact_marginals(llr, codebook):
    """Posterior P(c_v = 1 | llr) by summation over the codebook.

    P(c | llr) is proportional to exp(sum_v c_v * llr_v) under the package's
    sign convention; log-sum-exp keeps it stable for any finite LLR.
    """
    llr = np.asarray(llr, dtype=np.float64)
    logits = codebook.words @ llr          # (2^k,)
    mx = logits.max()
    w = np.exp(logits - mx)
    total = w.sum()
    num = w @ codebook.words               # (n,)
    return num / total


def exact_map(llr, codebook):
    """Most likely codeword: argmax of sum_v c_v * llr_v, ties broken by the
    lowest codeword index."""
    llr = np.asarray(llr, dtype=np.float64)
    logits = codebook.words @ llr
    return codebook.words[int(np.argmax(logits))]
