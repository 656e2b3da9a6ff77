"""Message-passing kernels: loop references, Taylor check node, backends."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arbp import kernels
from arbp.graph import build

H = np.array(
    [
        [1, 1, 0, 1, 0, 0, 1],
        [0, 1, 1, 0, 1, 0, 1],
        [1, 0, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)


@pytest.fixture(scope="module")
def g():
    return build(H)


def frames(g, rng, B=6):
    llr = rng.normal(0.0, 2.0, (B, g.n))
    x = np.clip(rng.normal(0.0, 1.0, (B, g.E)), -6.0, 6.0)
    return llr, x


def variable_step_loops(llr, x_prev, g):
    out = np.empty((llr.shape[0], g.E))
    for b in range(llr.shape[0]):
        for e in range(g.E):
            v = g.vv[e]
            acc = llr[b, v]
            for f in range(g.E):
                if g.vv[f] == v and f != e:
                    acc += x_prev[b, f]
            out[b, e] = np.tanh(0.5 * acc)
    return out


def check_products_loops(x, g):
    out = np.empty_like(x)
    for b in range(x.shape[0]):
        for e in range(g.E):
            c = g.cc[e]
            prod = 1.0
            for f in range(g.E):
                if g.cc[f] == c and f != e:
                    prod *= x[b, f]
            out[b, e] = prod
    return out


class TestVariableStep:
    def test_matches_loop_reference(self, g, rng):
        llr, x = frames(g, rng)
        got = kernels.variable_step(llr, x, g)
        assert np.allclose(got, variable_step_loops(llr, x, g), atol=1e-12)

    def test_single_frame(self, g, rng):
        llr, x = frames(g, rng, B=1)
        got = kernels.variable_step(llr[0], x[0], g)
        assert got.shape == (g.E,)
        assert np.allclose(got, kernels.variable_step(llr, x, g)[0])

    def test_zero_messages_reduce_to_channel(self, g, rng):
        llr, _ = frames(g, rng)
        got = kernels.variable_step(llr, np.zeros((llr.shape[0], g.E)), g)
        assert np.allclose(got, np.tanh(0.5 * llr[:, g.vv]))

    def test_antisymmetric(self, g, rng):
        llr, x = frames(g, rng)
        plus = kernels.variable_step(llr, x, g)
        minus = kernels.variable_step(-llr, -x, g)
        assert np.allclose(plus + minus, 0.0, atol=1e-14)


class TestCheckExclusion:
    def test_matches_loop_reference(self, g, rng):
        _, x = frames(g, rng)
        t = np.tanh(x)
        assert np.allclose(
            kernels.check_exclusion(t, g), check_products_loops(t, g), atol=1e-13
        )

    def test_zero_safe(self, g, rng):
        # prefix/suffix products must stay finite when messages are zero
        _, x = frames(g, rng)
        t = np.tanh(x)
        t[:, ::3] = 0.0
        assert np.allclose(
            kernels.check_exclusion(t, g), check_products_loops(t, g), atol=1e-13
        )

    def test_backward_finite_difference(self, g, rng):
        _, x = frames(g, rng, B=2)
        t_in = np.tanh(x)
        up = rng.normal(size=t_in.shape)

        def f(flat):
            return float(
                (kernels.check_exclusion(flat.reshape(t_in.shape), g) * up).sum()
            )

        grad = kernels.check_exclusion_backward(up, t_in, g)
        flat = t_in.reshape(-1).copy()
        h = 1e-6
        idx = rng.choice(flat.size, 20, replace=False)
        for i in idx:
            old = flat[i]
            flat[i] = old + h
            fp = f(flat)
            flat[i] = old - h
            fm = f(flat)
            flat[i] = old
            fd = (fp - fm) / (2 * h)
            assert grad.reshape(-1)[i] == pytest.approx(fd, rel=1e-5, abs=1e-8)


class TestCheckStepExact:
    def test_matches_loop_reference(self, g, rng):
        _, x = frames(g, rng)
        t = np.tanh(x)
        lim = 1.0 - kernels.EPS_CLIP
        ref = 2.0 * np.arctanh(np.clip(check_products_loops(t, g), -lim, lim))
        assert np.allclose(kernels.check_step_exact(t, g), ref, atol=1e-12)

    def test_saturated_product_clipped(self, g):
        t = np.ones((1, g.E))
        out = kernels.check_step_exact(t, g)
        assert np.isfinite(out).all()


class TestTaylor:
    def test_tail_bound(self):
        # |series - 2 arctanh t| <= 2 t^(q+2) / ((q+2)(1 - t^2))
        q = 1005
        t = np.linspace(-0.9, 0.9, 2001)
        err = np.abs(kernels.taylor_sum(t, q) - 2.0 * np.arctanh(t))
        bound = 2.0 * np.abs(t) ** (q + 2) / ((q + 2) * (1.0 - t**2))
        assert (err <= bound + 1e-15).all()

    def test_low_order_series(self):
        # q=3 keeps exactly 2(t + t^3/3)
        t = np.array([-0.5, -0.1, 0.0, 0.2, 0.7])
        assert np.allclose(kernels.taylor_sum(t, 3), 2 * (t + t**3 / 3))

    def test_deriv_matches_finite_difference(self):
        q = 41
        t = np.linspace(-0.98, 0.98, 101)
        h = 1e-7
        fd = (kernels.taylor_sum(t + h, q) - kernels.taylor_sum(t - h, q)) / (2 * h)
        assert np.allclose(kernels.taylor_deriv(t, q), fd, rtol=1e-5, atol=1e-6)

    def test_check_step_taylor_requires_odd_q(self, g, rng):
        _, x = frames(g, rng, B=1)
        with pytest.raises(ValueError):
            kernels.check_step_taylor(np.tanh(x), g, 4)

    def test_check_step_taylor_near_exact_for_small_t(self, g, rng):
        _, x = frames(g, rng)
        t = 0.5 * np.tanh(x)
        exact = kernels.check_step_exact(t, g)
        approx = kernels.check_step_taylor(t, g, 1005)
        assert np.allclose(approx, exact, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-0.999, 0.999), st.sampled_from([1, 5, 205, 1005]))
    def test_series_odd_function(self, t, q):
        t = np.array([t])
        assert kernels.taylor_sum(-t, q) == pytest.approx(-kernels.taylor_sum(t, q))


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels unavailable")
class TestBackendParity:
    def test_all_kernels_agree(self, g, rng):
        llr, x = frames(g, rng)
        t = np.tanh(x)
        pairs = [
            (
                kernels.variable_step(llr, x, g, backend="cython"),
                kernels.variable_step(llr, x, g, backend="numpy"),
            ),
            (
                kernels.check_step_exact(t, g, backend="cython"),
                kernels.check_step_exact(t, g, backend="numpy"),
            ),
            (
                kernels.check_step_taylor(t, g, 1005, backend="cython"),
                kernels.check_step_taylor(t, g, 1005, backend="numpy"),
            ),
        ]
        for fast, ref in pairs:
            assert np.allclose(fast, ref, atol=1e-12)
