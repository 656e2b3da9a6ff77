"""Autoregressive hypernetwork decoder: features, forward, gradients,
training step, persistence."""
import numpy as np
import pytest

from arbp import hyper
from arbp.bp import _sigmoid, decode_bp
from arbp.codes import encode
from arbp.graph import build


@pytest.fixture
def ham_setup(hamming74, hamming74_graph, rng):
    params = hyper.init_decoder_params(
        hamming74, hamming74_graph, rng, L=2, q=41
    )
    llr, truth = hyper.make_batch(
        hamming74, rng, per_snr=2, snr_values=[2, 5]
    )
    return hamming74, hamming74_graph, params, llr, truth


class TestFeatures:
    def test_input_width(self, hamming74, hamming74_graph):
        d = hamming74.H_ext.shape[0]
        want = (
            2 * hamming74_graph.E
            + d
            + (hamming74.n - hamming74.k)
            + hyper.SNR_EMBED_DIM
        )
        assert hyper.feature_input_width(hamming74, hamming74_graph) == want

    def test_codewords_give_zero_e_and_z(self, hamming74):
        info = ((np.arange(16)[:, None] >> np.arange(4)) & 1).astype(np.uint8)
        words = encode(info, hamming74)
        s = 2.0 * words - 1.0
        assert not hyper.compute_e(s, hamming74.H_ext).any()
        assert not hyper.compute_z(s, hamming74).any()

    def test_single_bit_flip_patterns(self, hamming74):
        # flipping bit v makes e equal column v of H_ext and z the parity
        # response of unit info/parity vectors
        info = ((np.arange(16)[:, None] >> np.arange(4)) & 1).astype(np.uint8)
        words = encode(info, hamming74)
        for w in words:
            for v in range(hamming74.n):
                bad = w.copy()
                bad[v] ^= 1
                s = 2.0 * bad - 1.0
                e = hyper.compute_e(s, hamming74.H_ext)
                assert np.array_equal(e, hamming74.H_ext[:, v])
                z = hyper.compute_z(s, hamming74)
                if v < hamming74.k:
                    want = hamming74.G_std[v, hamming74.k :]
                else:
                    want = np.eye(
                        hamming74.n - hamming74.k, dtype=np.uint8
                    )[v - hamming74.k]
                assert np.array_equal(z, want)

    def test_compute_a_is_scaled_lift(self, hamming74_graph, rng):
        s = np.sign(rng.normal(size=(3, hamming74_graph.n)))
        a = hyper.compute_a(s, 0.7, hamming74_graph)
        assert np.allclose(a, 0.7 * s[:, hamming74_graph.vv])

    def test_embed_snr_lookup(self, rng):
        lut = rng.normal(size=(hyper.SNR_EMBED_DIM, 8))
        assert np.array_equal(hyper.embed_snr(3, lut), lut[:, 2])
        batch = hyper.embed_snr(np.array([1, 8]), lut)
        assert np.array_equal(batch, lut[:, [0, 7]].T)
        with pytest.raises(ValueError):
            hyper.embed_snr(0, lut)
        with pytest.raises(ValueError):
            hyper.embed_snr(9, lut)


class TestForward:
    def test_zero_hypernetwork_reduces_to_channel_posterior(self, ham_setup):
        code, graph, params, llr, _ = ham_setup
        params.theta_f.values[:] = 0.0
        res = hyper.decode_ar(llr, code, graph, params)
        for o in res.o_history:
            assert np.allclose(o, _sigmoid(llr), atol=1e-12)

    def test_history_and_shapes(self, ham_setup):
        code, graph, params, llr, _ = ham_setup
        res = hyper.decode_ar(llr, code, graph, params)
        assert len(res.o_history) == params.L
        assert res.bits.shape == llr.shape
        assert res.snr_index.shape == (llr.shape[0],)
        assert len(res.feature_history) == params.L

    def test_variants_differ_from_full(self, ham_setup):
        code, graph, params, llr, _ = ham_setup
        full = hyper.decode_ar(llr, code, graph, params).o_history[-1]
        for variant in ("NoA", "NoE", "NoZ", "NoP"):
            other = hyper.decode_ar(
                llr, code, graph, params, variant=variant
            ).o_history[-1]
            assert not np.allclose(other, full)

    def test_unknown_variant_rejected(self, ham_setup):
        code, graph, params, llr, _ = ham_setup
        with pytest.raises(ValueError):
            hyper.decode_ar(llr, code, graph, params, variant="bogus")

    def test_fingerprint_mismatch_rejected(self, ham_setup, spc43):
        code, graph, params, llr, _ = ham_setup
        other_graph = build(spc43.H)
        with pytest.raises(ValueError, match="fingerprint"):
            hyper.decode_ar(
                np.zeros((1, spc43.n)), spc43, other_graph, params
            )

    def test_high_snr_noiseless_decodes(self, hamming74, hamming74_graph, rng):
        params = hyper.init_decoder_params(
            hamming74, hamming74_graph, rng, L=2, q=41
        )
        params.theta_f.values[:] = 0.0
        truth = encode(
            rng.integers(0, 2, (6, 4)).astype(np.uint8), hamming74
        )
        llr = 20.0 * (2.0 * truth - 1.0)
        res = hyper.decode_ar(llr, hamming74, hamming74_graph, params)
        assert np.array_equal(res.bits, truth)


class TestLoss:
    def test_multiloss_averages_iterations(self, rng):
        truth = rng.integers(0, 2, (4, 7)).astype(np.uint8)
        perfect = np.where(truth == 1, 1.0 - 1e-9, 1e-9)
        assert hyper.loss([perfect, perfect], truth) == pytest.approx(0.0, abs=1e-6)
        coin = np.full((4, 7), 0.5)
        assert hyper.loss([coin], truth) == pytest.approx(np.log(2.0))

    def test_clipping_keeps_loss_finite(self, rng):
        truth = np.ones((2, 3), dtype=np.uint8)
        o = np.zeros((2, 3))
        assert np.isfinite(hyper.loss([o], truth))


class TestGradients:
    def test_end_to_end_finite_difference(self, ham_setup, rng):
        code, graph, params, llr, truth = ham_setup
        _, grads = hyper.decode_ar_with_grads(llr, truth, code, graph, params)

        def value():
            v, _ = hyper.decode_ar_with_grads(llr, truth, code, graph, params)
            return v

        h = 1e-6
        checked = 0
        for name, arr in params.groups().items():
            flat = arr.reshape(-1)
            gflat = grads[name].reshape(-1)
            for i in rng.choice(flat.size, min(6, flat.size), replace=False):
                old = flat[i]
                flat[i] = old + h
                fp = value()
                flat[i] = old - h
                fm = value()
                flat[i] = old
                fd = (fp - fm) / (2 * h)
                denom = max(abs(fd), abs(gflat[i]), 1e-6)
                assert abs(fd - gflat[i]) / denom < 1e-3, (name, i)
                checked += 1
        assert checked >= 20  # 6+6+2+6 across the four parameter groups

    def test_variant_gradients_respect_masks(self, ham_setup):
        code, graph, params, llr, truth = ham_setup
        _, g_noa = hyper.decode_ar_with_grads(
            llr, truth, code, graph, params, variant="NoA"
        )
        assert not g_noa["c"].any()
        _, g_nop = hyper.decode_ar_with_grads(
            llr, truth, code, graph, params, variant="NoP"
        )
        assert not g_nop["lut_snr"].any()


class TestTraining:
    def test_loss_decreases(self, bch3116, bch3116_graph):
        rng = np.random.default_rng(11)
        params = hyper.init_decoder_params(
            bch3116, bch3116_graph, rng, L=3, q=205
        )
        adam = hyper.init_adam(params, lr=3e-4)
        first = last = None
        for step in range(30):
            llr, truth = hyper.make_batch(bch3116, rng, per_snr=8)
            value = hyper.train_step(
                llr, truth, bch3116, bch3116_graph, params, adam
            )
            if step < 5:
                first = value if first is None else first + value
            if step >= 25:
                last = value if last is None else last + value
        assert last < first

    def test_make_batch_shapes(self, bch3116, rng):
        llr, truth = hyper.make_batch(bch3116, rng, per_snr=3, snr_values=[1, 5])
        assert llr.shape == (6, bch3116.n)
        assert truth.shape == (6, bch3116.n)
        assert not bch3116.syndrome(truth).any()

    def test_make_batch_zero_codeword(self, bch3116, rng):
        llr, truth = hyper.make_batch(
            bch3116, rng, per_snr=3, zero_codeword=True
        )
        assert not truth.any()
        assert llr.mean() < 0  # all-zero codeword maps to -1 symbols


class TestPersistence:
    def test_roundtrip_params_and_adam(self, ham_setup, tmp_path):
        code, graph, params, llr, truth = ham_setup
        adam = hyper.init_adam(params)
        hyper.train_step(llr, truth, code, graph, params, adam)
        path = tmp_path / "dec.npz"
        hyper.save_decoder(path, params, adam, meta={"step": 1})
        params2, adam2, meta = hyper.load_decoder(path)
        assert meta["step"] == 1
        assert np.array_equal(params.theta_f.values, params2.theta_f.values)
        assert np.array_equal(params.w_bar, params2.w_bar)
        assert params2.fingerprint == params.fingerprint
        for k in adam:
            assert np.array_equal(adam[k].m, adam2[k].m)
            assert adam[k].t == adam2[k].t

        out1 = hyper.decode_ar(llr, code, graph, params).o_history[-1]
        out2 = hyper.decode_ar(llr, code, graph, params2).o_history[-1]
        assert np.array_equal(out1, out2)
