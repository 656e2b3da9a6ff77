"""Linear block code definitions: parsing, standard form, extended parity matrix.

All matrices are dense uint8 arrays with entries in {0, 1}. A loaded code is
immutable after construction and can be shared freely between decoder
instances.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

try:  # py>=3.9
    from importlib import resources
except ImportError:  # pragma: no cover
    import importlib_resources as resources


class CodeFormatError(ValueError):
    """Malformed code definition file (carries a line number when known)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _as_binary(M, name="matrix"):
    M = np.asarray(M, dtype=np.uint8)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"{name} must be a 2-D nonempty matrix")
    if not np.isin(M, (0, 1)).all():
        raise ValueError(f"{name} entries must be 0/1")
    return M


@dataclass(frozen=True)
class ParityCheckCode:
    """A block code, held in the (column-permuted) coordinates in which the
    generator is in standard form [I_k | P].

    `column_perm` maps standard-form positions to the original columns:
    original_matrix[:, column_perm] == permuted_matrix.
    """

    n: int
    k: int
    H: np.ndarray          # (n-k, n), permuted consistently with G_std
    G_std: np.ndarray      # (k, n) == [I_k | P]
    H_ext: np.ndarray      # (C(n-k, 2), n) pairwise XOR rows of H
    column_perm: np.ndarray
    name: str = ""

    @property
    def rate(self):
        return self.k / self.n

    def syndrome(self, bits):
        """H · bitsᵀ mod 2, along the last axis of `bits`."""
        return (np.asarray(bits) @ self.H.T) % 2


def parse_alist(text):
    """Parse the alist sparse-matrix format (1-based indices) into a dense
    binary matrix.

    Layout: ``n m`` header, max column/row degrees, per-column degrees,
    per-row degrees, then n column index lists and m row index lists.
    Zero padding entries are ignored. Column and row adjacency lists are
    cross-checked against each other.
    """
    lines = text.splitlines()

    def ints(i, what):
        if i >= len(lines):
            raise CodeFormatError(f"unexpected end of file, expected {what}", i + 1)
        try:
            return [int(tok) for tok in lines[i].split()]
        except ValueError:
            raise CodeFormatError(f"non-integer token in {what}", i + 1) from None

    header = ints(0, "header")
    if len(header) != 2 or header[0] < 1 or header[1] < 1:
        raise CodeFormatError("malformed header, expected 'n m'", 1)
    n, m = header
    ints(1, "max degrees")  # informative only; degree lists are authoritative
    col_deg = ints(2, "column degrees")
    if len(col_deg) != n:
        raise CodeFormatError(f"expected {n} column degrees, got {len(col_deg)}", 3)
    row_deg = ints(3, "row degrees")
    if len(row_deg) != m:
        raise CodeFormatError(f"expected {m} row degrees, got {len(row_deg)}", 4)

    H = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        entries = [v for v in ints(4 + j, f"column {j + 1} list") if v != 0]
        if len(entries) != col_deg[j]:
            raise CodeFormatError(
                f"column {j + 1} lists {len(entries)} entries, degree says {col_deg[j]}",
                5 + j,
            )
        for v in entries:
            if not 1 <= v <= m:
                raise CodeFormatError(f"row index {v} out of range [1, {m}]", 5 + j)
            H[v - 1, j] = 1

    for i in range(m):
        lineno = 4 + n + i
        entries = [v for v in ints(lineno, f"row {i + 1} list") if v != 0]
        if len(entries) != row_deg[i]:
            raise CodeFormatError(
                f"row {i + 1} lists {len(entries)} entries, degree says {row_deg[i]}",
                lineno + 1,
            )
        cols = np.zeros(n, dtype=np.uint8)
        for v in entries:
            if not 1 <= v <= n:
                raise CodeFormatError(f"column index {v} out of range [1, {n}]", lineno + 1)
            cols[v - 1] = 1
        if not np.array_equal(cols, H[i]):
            raise CodeFormatError(
                f"row/column adjacency mismatch in row {i + 1}", lineno + 1
            )
    return H


def parse_dense(text):
    """Parse the dense text format: first line ``n m``, then m rows of n bits."""
    lines = [ln for ln in text.splitlines()]
    if not lines:
        raise CodeFormatError("empty file", 1)
    header = lines[0].split()
    if len(header) != 2:
        raise CodeFormatError("malformed header, expected 'n m'", 1)
    n, m = int(header[0]), int(header[1])
    if m + 1 > len(lines):
        raise CodeFormatError(f"expected {m} matrix rows", len(lines))
    M = np.zeros((m, n), dtype=np.uint8)
    for i in range(m):
        toks = lines[1 + i].split()
        if len(toks) != n:
            raise CodeFormatError(f"expected {n} entries, got {len(toks)}", 2 + i)
        for j, t in enumerate(toks):
            if t not in ("0", "1"):
                raise CodeFormatError(f"entry '{t}' is not a bit", 2 + i)
            M[i, j] = int(t)
    return M


def extend_parity(H):
    """All pairwise XOR combinations of the rows of H, ordered
    lexicographically by (alpha, beta) with alpha < beta."""
    H = _as_binary(H, "H")
    m = H.shape[0]
    if m < 2:
        raise ValueError("extension undefined: H needs at least 2 rows")
    rows = [H[a] ^ H[b] for a, b in combinations(range(m), 2)]
    return np.array(rows, dtype=np.uint8)


def _rref_gf2(M):
    """Row-reduce over GF(2); returns (reduced matrix, pivot columns)."""
    M = M.copy()
    rows, cols = M.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(M[r:, c])[0]
        if len(hit) == 0:
            continue
        pr = r + hit[0]
        if pr != r:
            M[[r, pr]] = M[[pr, r]]
        mask = M[:, c].copy()
        mask[r] = 0
        M[mask == 1] ^= M[r]
        pivots.append(c)
        r += 1
    return M, pivots


def standardize(G, H, name=""):
    """Bring G to standard form [I_k | P] by column permutation (with a
    GF(2) row-reduction fallback) and permute H by the same columns.

    Decoding then runs entirely in the permuted coordinates; on an AWGN
    channel with i.i.d. noise a fixed bit reordering leaves BER unchanged.
    """
    G = _as_binary(G, "G")
    H = _as_binary(H, "H")
    k, n = G.shape
    if H.shape[1] != n:
        raise ValueError("G and H column counts differ")
    if ((G @ H.T) % 2).any():
        raise ValueError("G and H are not orthogonal over GF(2)")

    # First try: pick out k distinct unit-vector columns of G as-is.
    unit_cols = {}
    for c in range(n):
        col = G[:, c]
        if col.sum() == 1:
            r = int(np.nonzero(col)[0][0])
            unit_cols.setdefault(r, c)
    if len(unit_cols) == k:
        G_red = G
        pivots = [unit_cols[r] for r in range(k)]
    else:
        G_red, pivots = _rref_gf2(G)
        if len(pivots) < k:
            raise ValueError("generator not full rank")

    rest = [c for c in range(n) if c not in set(pivots)]
    perm = np.array(list(pivots) + rest, dtype=np.int64)
    G_std = G_red[:, perm]
    if not np.array_equal(G_std[:, :k], np.eye(k, dtype=np.uint8)):
        raise ValueError("generator not full rank")
    H_perm = H[:, perm]
    # A single-row H has no row pairs to XOR; the extended matrix is empty.
    H_ext = (
        extend_parity(H_perm)
        if H_perm.shape[0] >= 2
        else np.zeros((0, n), dtype=np.uint8)
    )
    assert not ((G_std @ H_perm.T) % 2).any()
    return ParityCheckCode(
        n=n,
        k=k,
        H=np.ascontiguousarray(H_perm),
        G_std=np.ascontiguousarray(G_std),
        H_ext=H_ext,
        column_perm=perm,
        name=name,
    )


def encode(info, code):
    """Systematic encoding: (info · G_std) mod 2 along the last axis."""
    info = np.asarray(info, dtype=np.uint8)
    if info.shape[-1] != code.k:
        raise ValueError(f"info length {info.shape[-1]} != k={code.k}")
    return (info @ code.G_std) % 2


# ---------------------------------------------------------------------------
# Bundled codes

_REGISTRY = {
    "BCH_63_51": ("bch_63_51.alist", "bch_63_51.gmat"),
    "BCH_31_16": ("bch_31_16.alist", "bch_31_16.gmat"),
    "POLAR_64_32": ("polar_64_32.alist", "polar_64_32.gmat"),
    "HAMMING_7_4": ("hamming_7_4.alist", "hamming_7_4.gmat"),
    "SPC_4_3": ("spc_4_3.alist", "spc_4_3.gmat"),
}


def registry_ids():
    return sorted(_REGISTRY)


def load_code(code_id_or_path, gen_path=None):
    """Load a code by registry id, or from an alist file plus a generator
    matrix file (dense text format)."""
    key = str(code_id_or_path).upper().replace("-", "_").replace("(", "_").replace(
        ",", "_"
    ).rstrip(")")
    if key in _REGISTRY:
        alist_name, gmat_name = _REGISTRY[key]
        pkg = resources.files("arbp.data")
        H = parse_alist((pkg / alist_name).read_text())
        G = parse_dense((pkg / gmat_name).read_text())
        return standardize(G, H, name=key)
    with open(code_id_or_path) as fh:
        H = parse_alist(fh.read())
    if gen_path is None:
        raise ValueError("a generator matrix file is required for non-registry codes")
    with open(gen_path) as fh:
        G = parse_dense(fh.read())
    return standardize(G, H, name=str(code_id_or_path))
