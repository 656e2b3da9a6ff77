#!/usr/bin/env python3
"""Regenerate the bundled code matrices in src/arbp/data/.

Cyclic BCH codes are built from their generator polynomials (H rows are the
cyclic shifts of the reversed parity polynomial h(x) = (x^n + 1)/g(x)); the
polar code uses Bhattacharyya-parameter channel ordering at a 0 dB design
point with H taken from the frozen columns of the n-fold Kronecker kernel.
Code construction is deliberately kept out of the installed package; this
script exists only so the data files are reproducible.
"""
import os

import numpy as np

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "arbp", "data")


def gf2m_tables(m, prim):
    N = (1 << m) - 1
    exp = [0] * N
    log = [0] * (N + 1)
    x = 1
    for i in range(N):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x >> m:
            x ^= prim
    return exp, log, N


def min_poly(alpha_pow, m, prim):
    exp, log, N = gf2m_tables(m, prim)
    cls = set()
    e = alpha_pow % N
    while e not in cls:
        cls.add(e)
        e = (2 * e) % N
    poly = [1]
    for e in cls:
        root = exp[e]
        new = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            new[i + 1] ^= c
            if c and root:
                new[i] ^= exp[(log[c] + log[root]) % N]
        poly = new
    assert all(c in (0, 1) for c in poly)
    return poly


def poly_mul(a, b):
    r = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                r[i + j] ^= y
    return r


def poly_div(a, b):
    a = a[:]
    q = [0] * (len(a) - len(b) + 1)
    for i in range(len(a) - len(b), -1, -1):
        if a[i + len(b) - 1]:
            q[i] = 1
            for j, y in enumerate(b):
                a[i + j] ^= y
    assert not any(a)
    return q

def bch(n, m, prim, t):
    g = [1]
    seen = set()
    for i in range(1, 2 * t, 2):
        mp = tuple(min_poly(i, m, prim))
        if mp not in seen:
            seen.add(mp)
            g = poly_mul(g, list(mp))
    k = n - (len(g) - 1)
    h = poly_div([1] + [0] * (n - 1) + [1], g)
    hrev = h[::-1]
    H = np.zeros((n - k, n), dtype=np.uint8)
    for i in range(n - k):
        H[i, i : i + len(hrev)] = hrev
    G = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        G[i, i : i + len(g)] = g
    return G, H


def polar(n, k, design_snr_db=0.0):
    lev = int(np.log2(n))
    z = np.array([np.exp(-(10 ** (design_snr_db / 10)))])
    for _ in range(lev):
        z = np.concatenate([2 * z - z**2, z**2])
    order = np.argsort(z, kind="stable")
    info = np.sort(order[:k])
    frozen = np.sort(order[k:])
    G = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    for _ in range(lev - 1):
        G = np.kron(G, np.array([[1, 0], [1, 1]], dtype=np.uint8))
    return G[info, :] % 2, (G[:, frozen].T % 2).astype(np.uint8)


def null_space_gf2(H):
    """Basis of {c : H c = 0 mod 2} as rows of a generator matrix."""
    m, n = H.shape
    M = H.copy().astype(np.uint8)
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
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
    free = [c for c in range(n) if c not in pivots]
    rows = []
    for fc in free:
        v = np.zeros(n, dtype=np.uint8)
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = M[i, fc]
        rows.append(v)
    return np.array(rows, dtype=np.uint8)


def write_alist(H, path):
    m, n = H.shape
    col_lists = [list(np.nonzero(H[:, j])[0] + 1) for j in range(n)]
    row_lists = [list(np.nonzero(H[i, :])[0] + 1) for i in range(m)]
    with open(path, "w") as fh:
        fh.write(f"{n} {m}\n")
        fh.write(f"{max(map(len, col_lists))} {max(map(len, row_lists))}\n")
        fh.write(" ".join(str(len(c)) for c in col_lists) + "\n")
        fh.write(" ".join(str(len(r)) for r in row_lists) + "\n")
        for c in col_lists:
            fh.write(" ".join(map(str, c)) + "\n")
        for r in row_lists:
            fh.write(" ".join(map(str, r)) + "\n")


def write_dense(M, path):
    m, n = M.shape
    with open(path, "w") as fh:
        fh.write(f"{n} {m}\n")
        for row in M:
            fh.write(" ".join(map(str, row)) + "\n")


def emit(name, G, H):
    assert not ((G.astype(int) @ H.astype(int).T) % 2).any(), name
    write_alist(H, os.path.join(OUT, f"{name}.alist"))
    write_dense(G, os.path.join(OUT, f"{name}.gmat"))
    print(f"{name}: n={H.shape[1]} k={G.shape[0]} E={int(H.sum())}")


def main():
    os.makedirs(OUT, exist_ok=True)
    emit("bch_63_51", *bch(63, 6, 0b1000011, t=2))
    emit("bch_31_16", *bch(31, 5, 0b100101, t=3))
    emit("polar_64_32", *polar(64, 32))
    H_ham = np.array(
        [[1, 0, 1, 0, 1, 0, 1], [0, 1, 1, 0, 0, 1, 1], [0, 0, 0, 1, 1, 1, 1]],
        dtype=np.uint8,
    )
    emit("hamming_7_4", null_space_gf2(H_ham), H_ham)
    H_spc = np.ones((1, 4), dtype=np.uint8)
    emit("spc_4_3", null_space_gf2(H_spc), H_spc)


if __name__ == "__main__":
    main()
