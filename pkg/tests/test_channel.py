import numpy as np
import pytest
from scipy import stats

from acl0lms.channel import (MimoChannel, NoiseModel, TrainingSource, gen_mimo_channel,
                             gen_sparse_channel, load_channel, observe, observe_block,
                             received_power, save_channel, sigma_from_snr)


def rng(seed=0):
    return np.random.default_rng(seed)


class TestSparseChannel:
    def test_empty_support(self):
        ch = gen_sparse_channel(32, 0, rng())
        assert ch.support == ()
        assert not ch.taps.any()

    def test_dense(self):
        ch = gen_sparse_channel(32, 32, rng())
        assert np.count_nonzero(ch.taps) == 32

    def test_too_many_taps(self):
        with pytest.raises(ValueError):
            gen_sparse_channel(8, 9, rng())

    def test_exact_sparsity_and_support(self):
        g = rng(4)
        for _ in range(100):
            ch = gen_sparse_channel(64, 5, g)
            assert np.count_nonzero(ch.taps) == 5
            assert len(set(ch.support)) == 5
            assert np.flatnonzero(ch.taps).tolist() == list(ch.support)

    def test_statistics(self):
        m, k, draws = 128, 4, 10_000
        g = rng(2024)
        counts = np.zeros(m)
        values = []
        for _ in range(draws):
            ch = gen_sparse_channel(m, k, g)
            counts[list(ch.support)] += 1
            values.extend(ch.taps[list(ch.support)])
        assert abs(np.var(values) - 1.0) <= 0.05
        expected = draws * k / m
        chi2 = np.sum((counts - expected) ** 2 / expected)
        assert chi2 <= stats.chi2.ppf(0.99, m - 1)


class TestMimoChannel:
    def test_siso_reduces_to_sparse_channel(self):
        h = gen_mimo_channel(1, 16, 1, 3, rng(7))
        np.testing.assert_array_equal(h.matrix[0], gen_sparse_channel(16, 3, rng(7)).taps)

    def test_reference_sizes(self):
        h = gen_mimo_channel(24, 16, 8, 1, rng(1))
        assert h.matrix.shape == (24, 128)
        assert h.taps == 128
        for r in range(24):
            assert np.count_nonzero(h.row(r)) == 8
            for t in range(8):
                assert np.count_nonzero(h.sub_channel(r, t)) == 1

    def test_k_larger_than_n(self):
        with pytest.raises(ValueError):
            gen_mimo_channel(2, 4, 2, 5, rng())

    def test_shape_check(self):
        with pytest.raises(ValueError):
            MimoChannel(np.zeros((2, 10)), 4, 2, 1)

    def test_text_round_trip(self, tmp_path):
        h = gen_mimo_channel(3, 16, 2, 2, rng(5))
        path = tmp_path / "h.txt"
        save_channel(path, h, seed=42)
        header = path.read_text().splitlines()[0]
        assert header == "32 3 16 2 2 42"
        back, seed = load_channel(path)
        assert seed == 42
        np.testing.assert_array_equal(back.matrix, h.matrix)
        assert (back.n, back.n_t, back.k) == (16, 2, 2)

    def test_load_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("4 1 2 2\n0 0 0 0\n")
        with pytest.raises(ValueError):
            load_channel(path)


class TestTrainingSource:
    def test_warm_up_state(self):
        src = TrainingSource(16, 8, rng())
        x = src.next_regressor()
        assert x.shape == (128,)
        assert np.count_nonzero(x) == 8
        assert set(np.abs(x[x != 0])) == {1.0}
        assert np.all(x.reshape(8, 16)[:, 1:] == 0)

    def test_filled_lines(self):
        src = TrainingSource(16, 8, rng())
        for _ in range(16):
            x = src.next_regressor()
        assert set(np.unique(x)) <= {-1.0, 1.0}
        assert np.all(np.abs(x) == 1.0)
        assert x @ x == 128.0

    def test_shift_structure(self):
        src = TrainingSource(6, 3, rng(1))
        prev = src.next_regressor().reshape(3, 6)
        for _ in range(20):
            cur = src.next_regressor().reshape(3, 6)
            np.testing.assert_array_equal(cur[:, 1:], prev[:, :-1])
            prev = cur

    def test_deterministic(self):
        a = TrainingSource(16, 4, rng(9))
        b = TrainingSource(16, 4, rng(9))
        for _ in range(50):
            np.testing.assert_array_equal(a.next_regressor(), b.next_regressor())

    def test_block_matches_repeated_calls(self):
        a = TrainingSource(5, 3, rng(3))
        b = TrainingSource(5, 3, rng(3))
        ref = np.array([a.next_regressor() for _ in range(17)])
        out = np.concatenate([b.block(2), b.block(11), b.block(4)])
        np.testing.assert_array_equal(out, ref)
        np.testing.assert_array_equal(a.next_regressor(), b.next_regressor())

    def test_symbols_balanced_and_white(self):
        src = TrainingSource(4, 2, rng(12))
        xs = src.block(20_000)[4:]
        r = xs.T @ xs / len(xs)
        np.testing.assert_allclose(r, np.eye(8), atol=0.03)


class TestObserve:
    def test_noiseless_matches_matrix_vector_oracle(self):
        g = rng(6)
        h = gen_mimo_channel(4, 8, 3, 2, g)
        src = TrainingSource(8, 3, g)
        noise = NoiseModel(0.0, g)
        for _ in range(30):
            x = src.next_regressor()
            ref = [sum(h.matrix[r, j] * x[j] for j in range(24)) for r in range(4)]
            np.testing.assert_allclose(observe(h, x, noise), ref, atol=1e-12, rtol=0)

    @pytest.mark.parametrize("zero", ["x", "h"])
    def test_pure_noise_variance(self, zero):
        sigma2 = 0.37
        g = rng(17)
        h = gen_mimo_channel(1, 4, 1, 2, g)
        x = np.ones(4)
        if zero == "x":
            x = np.zeros(4)
        else:
            h = MimoChannel(np.zeros((1, 4)), 4, 1, 0)
        noise = NoiseModel(sigma2, g)
        d = np.array([observe(h, x, noise)[0] for _ in range(100_000)])
        assert abs(np.var(d) - sigma2) <= 0.03 * sigma2

    def test_block_matches_per_call(self):
        h = gen_mimo_channel(3, 4, 2, 1, rng(0))
        xs = TrainingSource(4, 2, rng(1)).block(30)
        a = observe_block(h, xs, NoiseModel(0.2, rng(2)))
        n = NoiseModel(0.2, rng(2))
        b = np.array([observe(h, x, n) for x in xs])
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-14)

    def test_dimension_mismatch(self):
        h = gen_mimo_channel(2, 4, 2, 1, rng())
        with pytest.raises(ValueError):
            observe(h, np.ones(7), NoiseModel(0.0, rng()))

    def test_negative_variance(self):
        with pytest.raises(ValueError):
            NoiseModel(-1.0, rng())


class TestSnr:
    @pytest.mark.parametrize("power,snr,expected", [(1.0, 0.0, 1.0), (1.0, 10.0, 0.1), (4.0, 20.0, 0.04)])
    def test_examples(self, power, snr, expected):
        assert sigma_from_snr(power, snr) == pytest.approx(expected, rel=1e-15)

    def test_non_positive_power(self):
        with pytest.raises(ValueError):
            sigma_from_snr(0.0, 10.0)

    def test_received_power_close_to_channel_energy(self):
        h = gen_mimo_channel(24, 16, 8, 1, rng(3))
        est = received_power(h, TrainingSource(16, 8, rng(4)), count=20_000)
        exact = np.mean(np.sum(h.matrix**2, axis=1))
        assert est == pytest.approx(exact, rel=0.03)
