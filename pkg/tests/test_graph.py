"""Edge-indexed graph construction and its gather/scatter helpers."""
import numpy as np
import pytest

from arbp.graph import build, lift, marginalize_sum

H = np.array(
    [
        [1, 1, 0, 1, 0, 0],
        [0, 1, 1, 0, 1, 0],
        [1, 0, 1, 0, 0, 1],
    ],
    dtype=np.uint8,
)


@pytest.fixture(scope="module")
def g():
    return build(H)


class TestBuild:
    def test_edge_enumeration_row_major(self, g):
        cc, vv = np.nonzero(H)
        assert np.array_equal(g.cc, cc)
        assert np.array_equal(g.vv, vv)
        assert g.E == H.sum()

    def test_degrees(self, g):
        assert g.d_max == int(H.sum(axis=0).max())
        assert g.dc_max == int(H.sum(axis=1).max())

    def test_check_csr_contiguous(self, g):
        for c in range(g.m):
            ids = np.arange(g.check_ptr[c], g.check_ptr[c + 1])
            assert (g.cc[ids] == c).all()
            assert np.array_equal(np.sort(g.vv[ids]), np.nonzero(H[c])[0])

    def test_var_csr(self, g):
        for v in range(g.n):
            ids = g.var_edges[g.var_ptr[v] : g.var_ptr[v + 1]]
            assert (g.vv[ids] == v).all()
        assert sorted(g.var_edges.tolist()) == list(range(g.E))

    def test_exclusion_lists(self, g):
        for e in range(g.E):
            v = g.vv[e]
            others = [f for f in range(g.E) if g.vv[f] == v and f != e]
            got = g.excl_idx[e][g.excl_mask[e]].tolist()
            assert got == others

    def test_check_padding(self, g):
        for c in range(g.m):
            deg = int(H[c].sum())
            assert g.check_mask[c, :deg].all()
            assert not g.check_mask[c, deg:].any()

    def test_degenerate_rows_rejected(self):
        bad = H.copy()
        bad[1] = 0
        with pytest.raises(ValueError, match="degenerate"):
            build(bad)

    def test_degenerate_columns_rejected(self):
        bad = H.copy()
        bad[:, 4] = 0
        with pytest.raises(ValueError, match="degenerate"):
            build(bad)


class TestFingerprint:
    def test_stable(self, g):
        assert g.fingerprint() == build(H).fingerprint()
        assert len(g.fingerprint()) == 16

    def test_sensitive_to_structure(self, g):
        other = build(H[:, ::-1].copy())
        assert other.fingerprint() != g.fingerprint()


class TestGatherScatter:
    def test_lift(self, g, rng):
        v = rng.normal(size=g.n)
        out = lift(v, g)
        for e in range(g.E):
            assert out[e] == v[g.vv[e]]

    def test_lift_batched(self, g, rng):
        v = rng.normal(size=(4, g.n))
        assert np.array_equal(lift(v, g), v[:, g.vv])

    def test_marginalize_sum_is_adjoint_of_lift(self, g, rng):
        # <lift(a), b>_E == <a, marginalize_sum(b)>_n
        a = rng.normal(size=g.n)
        b = rng.normal(size=g.E)
        lhs = float(lift(a, g) @ b)
        rhs = float(a @ marginalize_sum(b, g))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_marginalize_sum_loop_reference(self, g, rng):
        x = rng.normal(size=(3, g.E))
        got = marginalize_sum(x, g)
        for v in range(g.n):
            ids = np.nonzero(g.vv == v)[0]
            assert np.allclose(got[:, v], x[:, ids].sum(axis=1))
