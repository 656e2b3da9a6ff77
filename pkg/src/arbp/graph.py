"""Edge-indexed message-passing structure derived from a parity-check matrix.

Edges are enumerated by a row-major scan of H; every per-edge parameter
vector in the package is indexed by this ordering, so it is part of the
persisted-model contract.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EdgeGraph:
    n: int
    m: int
    E: int
    cc: np.ndarray          # (E,) check index of each edge
    vv: np.ndarray          # (E,) variable index of each edge
    check_ptr: np.ndarray   # (m+1,) CSR offsets; edges of a check are contiguous
    var_edges: np.ndarray   # (E,) edge ids sorted by variable
    var_ptr: np.ndarray     # (n+1,) CSR offsets into var_edges
    d_max: int              # maximum variable degree
    dc_max: int             # maximum check degree
    # (m, dc_max) padded edge ids per check plus validity mask, for the
    # vectorized exclusion-product kernels.
    check_pad: np.ndarray
    check_mask: np.ndarray
    # (E, d_max-1) edge ids of the other edges at the same variable, in
    # edge-id order, plus validity mask; feeds the per-variable networks.
    excl_idx: np.ndarray
    excl_mask: np.ndarray

    @property
    def edges(self):
        return list(zip(self.cc.tolist(), self.vv.tolist()))

    @property
    def var_neighbors(self):
        return [
            self.var_edges[self.var_ptr[v] : self.var_ptr[v + 1]].tolist()
            for v in range(self.n)
        ]

    @property
    def check_neighbors(self):
        return [
            list(range(self.check_ptr[c], self.check_ptr[c + 1]))
            for c in range(self.m)
        ]

    def fingerprint(self):
        """Stable identifier of the edge ordering, for checkpoint matching."""
        import hashlib

        h = hashlib.sha256()
        h.update(np.int64([self.m, self.n]).tobytes())
        h.update(self.cc.astype(np.int64).tobytes())
        h.update(self.vv.astype(np.int64).tobytes())
        return h.hexdigest()[:16]


def build(H):
    """Enumerate the Tanner graph edges of H (row-major scan)."""
    H = np.asarray(H)
    m, n = H.shape
    if (H.sum(axis=1) == 0).any() or (H.sum(axis=0) == 0).any():
        raise ValueError("degenerate node: H has an all-zero row or column")
    cc, vv = np.nonzero(H)
    E = len(cc)
    cc = cc.astype(np.int64)
    vv = vv.astype(np.int64)

    check_deg = np.bincount(cc, minlength=m)
    check_ptr = np.concatenate([[0], np.cumsum(check_deg)]).astype(np.int64)
    order = np.argsort(vv, kind="stable")
    var_edges = order.astype(np.int64)
    var_deg = np.bincount(vv, minlength=n)
    var_ptr = np.concatenate([[0], np.cumsum(var_deg)]).astype(np.int64)
    d_max = int(var_deg.max())
    dc_max = int(check_deg.max())

    check_pad = np.zeros((m, dc_max), dtype=np.int64)
    check_mask = np.zeros((m, dc_max), dtype=bool)
    for c in range(m):
        lo, hi = check_ptr[c], check_ptr[c + 1]
        check_pad[c, : hi - lo] = np.arange(lo, hi)
        check_mask[c, : hi - lo] = True

    excl_idx = np.zeros((E, max(d_max - 1, 1)), dtype=np.int64)
    excl_mask = np.zeros((E, max(d_max - 1, 1)), dtype=bool)
    for v in range(n):
        ids = var_edges[var_ptr[v] : var_ptr[v + 1]]
        for e in ids:
            others = ids[ids != e]
            excl_idx[e, : len(others)] = others
            excl_mask[e, : len(others)] = True

    return EdgeGraph(
        n=n,
        m=m,
        E=E,
        cc=cc,
        vv=vv,
        check_ptr=check_ptr,
        var_edges=var_edges,
        var_ptr=var_ptr,
        d_max=d_max,
        dc_max=dc_max,
        check_pad=check_pad,
        check_mask=check_mask,
        excl_idx=excl_idx,
        excl_mask=excl_mask,
    )


def lift(v_vec, graph):
    """Broadcast a per-variable vector to edges: out[e=(c,v)] = v_vec[v]."""
    return np.asarray(v_vec)[..., graph.vv]


def marginalize_sum(x, graph):
    """Per-variable sum of incident edge values (adjoint of `lift`)."""
    x = np.asarray(x)
    xs = x[..., graph.var_edges]
    return np.add.reduceat(xs, graph.var_ptr[:-1], axis=-1)
