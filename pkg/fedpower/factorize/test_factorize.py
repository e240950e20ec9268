import unittest

import numpy as np

from fedpower.accountant import required_sigma
from fedpower.dp import clip_frobenius
from fedpower.exceptions import ContractError, ShapeError
from fedpower.factorize import (
    factorize_input_perturb,
    factorize_output_perturb,
    output_sensitivities,
    power_dp,
    power_iteration,
    reconstruction_error,
)
from fedpower.linalg import RngStream


def optimal_error(w, r):
    s = np.linalg.svd(w, compute_uv=False)
    return float(np.sqrt(np.sum(s[r:] ** 2)))


def random_rank(gen, m, n, r, norm):
    w = gen.normal(size=(m, r)) @ gen.normal(size=(r, n))
    return w * (norm / np.linalg.norm(w))


def assert_orthonormal_rows(test, a, atol=1e-8):
    np.testing.assert_allclose(a @ a.T, np.eye(a.shape[0]), atol=atol)


class TestPowerIteration(unittest.TestCase):
    def test_drops_the_smallest_singular_value(self):
        pair = power_iteration(np.diag([3.0, 2.0, 1.0]), 2, 10, RngStream(0))
        self.assertAlmostEqual(reconstruction_error(np.diag([3.0, 2.0, 1.0]), pair), 1.0, delta=1e-6)
        assert_orthonormal_rows(self, pair.a)

    def test_zero_input(self):
        pair = power_iteration(np.zeros((5, 4)), 2, 3, RngStream(1))
        self.assertTrue(np.array_equal(pair.b, np.zeros((5, 2))))
        assert_orthonormal_rows(self, pair.a)
        self.assertGreater(pair.deficient, 0)

    def test_exact_on_low_rank_input(self):
        gen = np.random.default_rng(2)
        w = random_rank(gen, 12, 9, 3, 5.0)
        pair = power_iteration(w, 3, 20, RngStream(2))
        self.assertLessEqual(reconstruction_error(w, pair), 1e-6 * np.linalg.norm(w))

    def test_near_optimal_against_svd(self):
        gen = np.random.default_rng(3)
        for case in range(100):
            m, n = gen.integers(8, 65, size=2)
            r = int(gen.integers(1, 9))
            w = gen.normal(size=(m, n))
            pair = power_iteration(w, r, 20, RngStream(3, (case,)))
            self.assertLessEqual(reconstruction_error(w, pair), 1.05 * optimal_error(w, r))

    def test_error_non_increasing_in_iterations(self):
        gen = np.random.default_rng(4)
        for case in range(100):
            m, n, r = 10, 8, 3
            u, _ = np.linalg.qr(gen.normal(size=(m, n)))
            v, _ = np.linalg.qr(gen.normal(size=(n, n)))
            w = u @ np.diag(0.7 ** np.arange(n)) @ v.T
            errors = [
                reconstruction_error(w, power_iteration(w, r, k, RngStream(4, (case,))))
                for k in range(1, 9)
            ]
            for before, after in zip(errors, errors[1:]):
                self.assertLessEqual(after, before + 1e-10)

    def test_rank_too_large(self):
        with self.assertRaises(ShapeError):
            power_iteration(np.ones((3, 5)), 4, 2, RngStream(0))


class TestPowerDP(unittest.TestCase):
    def test_zero_noise_matches_power_iteration(self):
        gen = np.random.default_rng(5)
        for case in range(100):
            w = clip_frobenius(gen.normal(size=(10, 7)), 2.0)
            clean = power_iteration(w, 3, 4, RngStream(5, (case,)))
            private = power_dp(w, 3, 4, 0.0, 2.0, RngStream(5, (case,)))
            self.assertEqual(private.a.tobytes(), clean.a.tobytes())
            self.assertEqual(private.b.tobytes(), clean.b.tobytes())

    def test_zero_signal_is_pure_noise(self):
        pair = power_dp(np.zeros((200, 60)), 20, 2, 1.0, 2.0, RngStream(6))
        self.assertAlmostEqual(pair.b.std(), 2.0, delta=0.1)
        assert_orthonormal_rows(self, pair.a, atol=1e-10)

    def test_rows_orthonormal_regardless_of_noise(self):
        gen = np.random.default_rng(7)
        for sigma in (0.0, 0.1, 1.0, 10.0, 100.0):
            w = clip_frobenius(gen.normal(size=(16, 12)), 2.0)
            assert_orthonormal_rows(self, power_dp(w, 4, 4, sigma, 2.0, RngStream(7)).a)

    def test_small_noise_close_to_optimal_and_beats_output_perturbation(self):
        w = np.diag([3.0, 2.0, 1.0])
        private = [reconstruction_error(w, power_dp(w, 2, 4, 0.01, 4.0, RngStream(8, (s,)))) for s in range(100)]
        output = [
            reconstruction_error(w, factorize_output_perturb(w, 2, 4, 0.01, 4.0, RngStream(8, (s,))))
            for s in range(100)
        ]
        self.assertTrue(1.0 <= np.mean(private) <= 1.5)
        self.assertLess(np.mean(private), np.mean(output))

    def test_rejects_unclipped_input(self):
        with self.assertRaises(ContractError):
            power_dp(np.eye(3) * 3.0, 2, 2, 1.0, 2.0, RngStream(0))

    def test_projection_bounds_hold_in_debug_mode(self):
        gen = np.random.default_rng(9)
        for case in range(1000):
            m, n = gen.integers(2, 13, size=2)
            r = int(gen.integers(1, min(m, n) + 1))
            c = float(gen.uniform(0.5, 4.0))
            w = clip_frobenius(gen.normal(size=(m, n)) * 3.0, c)
            power_dp(w, r, 3, 0.5, c, RngStream(9, (case,)), debug=True)

    def test_deterministic(self):
        w = clip_frobenius(np.random.default_rng(10).normal(size=(8, 6)), 2.0)
        for factorizer in (power_dp, factorize_input_perturb, factorize_output_perturb):
            one = factorizer(w, 2, 3, 0.5, 2.0, RngStream(10, (1,)))
            two = factorizer(w, 2, 3, 0.5, 2.0, RngStream(10, (1,)))
            self.assertEqual(one.a.tobytes(), two.a.tobytes())
            self.assertEqual(one.b.tobytes(), two.b.tobytes())


class TestPerturbationVariants(unittest.TestCase):
    def test_zero_noise_equals_power_iteration(self):
        w = clip_frobenius(np.random.default_rng(11).normal(size=(9, 7)), 2.0)
        clean = power_iteration(w, 3, 4, RngStream(11))
        for factorizer in (factorize_input_perturb, factorize_output_perturb):
            pair = factorizer(w, 3, 4, 0.0, 2.0, RngStream(11))
            self.assertTrue(np.array_equal(pair.a, clean.a))
            self.assertTrue(np.array_equal(pair.b, clean.b))

    def test_overwhelming_input_noise_destroys_signal(self):
        gen = np.random.default_rng(12)
        for seed in range(50):
            w = random_rank(gen, 16, 16, 2, 1.0)
            pair = factorize_input_perturb(w, 2, 4, 10.0, 1.0, RngStream(12, (seed,)))
            self.assertGreaterEqual(reconstruction_error(w, pair), np.linalg.norm(w))

    def test_output_noise_scales_with_square_root_of_rank(self):
        self.assertEqual(output_sensitivities(16, 2.0)[0], 2 * output_sensitivities(4, 2.0)[0])
        w = clip_frobenius(np.random.default_rng(13).normal(size=(64, 256)), 2.0)
        spreads = []
        for r in (4, 16):
            clean = power_iteration(w, r, 2, RngStream(13))
            noisy = factorize_output_perturb(w, r, 2, 0.1, 2.0, RngStream(13))
            spreads.append((noisy.a - clean.a).std())
        self.assertAlmostEqual(spreads[1] / spreads[0], 2.0, delta=0.15)

    def test_noise_scheme_ordering_at_the_tightest_preset(self):
        sigma = required_sigma(3.0, 1e-5, 0.5 * 0.05, 200)
        gen = np.random.default_rng(14)
        errors = {"powerdp": [], "input": [], "output": []}
        for seed in range(100):
            w = random_rank(gen, 32, 32, 4, float(gen.uniform(0.5, 2.0)))
            rng = RngStream(14, (seed,))
            errors["powerdp"].append(reconstruction_error(w, power_dp(w, 4, 4, sigma, 2.0, rng)))
            errors["input"].append(reconstruction_error(w, factorize_input_perturb(w, 4, 4, sigma, 2.0, rng)))
            errors["output"].append(reconstruction_error(w, factorize_output_perturb(w, 4, 4, sigma, 2.0, rng)))
        means = {name: np.mean(values) for name, values in errors.items()}
        self.assertLess(means["powerdp"] * 1.05, means["input"])
        self.assertLess(means["input"] * 1.05, means["output"])
