import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from pnrqkd.exceptions import BracketError, DegenerateClassError, DomainError
from pnrqkd.stats import (
    CountHistogram,
    binary_entropy,
    bisect_root,
    chi_square_gof,
    corrected_rates_agree,
    multiphoton_given_nonempty,
    poisson_class_probs,
    poisson_pmf,
)

mp.dps = 40


def mp_entropy(x):
    x = mpf(x)
    return -x * mp.log(x, 2) - (1 - x) * mp.log(1 - x, 2)


class TestPoissonPmf:
    def test_vacuum_source(self):
        assert poisson_pmf(0, 0) == 1.0
        assert poisson_pmf(3, 0) == 0.0

    @pytest.mark.parametrize("n, mean", [(0, 0.1), (2, 0.2), (5, 0.7), (10, 1.0)])
    def test_matches_high_precision(self, n, mean):
        oracle = mpf(mean) ** n * mp.exp(-mpf(mean)) / mp.factorial(n)
        assert poisson_pmf(n, mean) == pytest.approx(float(oracle), rel=1e-13)

    def test_quoted_values(self):
        assert poisson_pmf(0, 0.1) == pytest.approx(0.9048374, abs=1e-7)
        assert poisson_pmf(2, 0.2) == pytest.approx(0.0163746, abs=1e-7)

    def test_negative_mean(self):
        with pytest.raises(DomainError):
            poisson_pmf(1, -0.1)

    @given(st.floats(0.0, 1.0))
    def test_sums_to_one(self, mean):
        assert math.fsum(poisson_pmf(n, mean) for n in range(41)) == pytest.approx(1.0, abs=1e-12)


class TestBinaryEntropy:
    def test_endpoints_and_peak(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_eleven_percent(self):
        assert binary_entropy(0.11) == pytest.approx(float(mp_entropy("0.11")), abs=1e-14)
        assert binary_entropy(0.11) == pytest.approx(0.4999160, abs=1e-7)

    @pytest.mark.parametrize("x", [-0.01, 1.01])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            binary_entropy(x)

    @given(st.integers(0, 2**20))
    def test_symmetric(self, k):
        x = k / 2**21
        assert binary_entropy(x) == binary_entropy(1 - x)

    @given(st.floats(0.0, 0.5), st.floats(0.0, 0.5))
    def test_monotone_on_lower_half(self, a, b):
        lo, hi = sorted((a, b))
        assert binary_entropy(lo) <= binary_entropy(hi)


class TestMultiphoton:
    def test_value(self):
        mu = mpf("0.1")
        oracle = (1 - mp.exp(-mu) * (1 + mu)) / (1 - mp.exp(-mu))
        assert multiphoton_given_nonempty(0.1) == pytest.approx(float(oracle), rel=1e-12)
        assert multiphoton_given_nonempty(0.1) == pytest.approx(0.049166, abs=1e-6)

    def test_close_to_half_mu(self):
        assert multiphoton_given_nonempty(0.1) == pytest.approx(0.05, rel=0.02)
        assert multiphoton_given_nonempty(1e-3) / 5e-4 == pytest.approx(1.0, rel=1e-3)

    def test_vacuum_limit(self):
        assert multiphoton_given_nonempty(1e-12) < 1e-11

    @pytest.mark.parametrize("mu", [0.0, -1.0])
    def test_domain(self, mu):
        with pytest.raises(DomainError):
            multiphoton_given_nonempty(mu)


class TestChiSquare:
    def test_exact_proportions(self):
        probs = [0.5, 0.3, 0.15, 0.05]
        hist = CountHistogram((5000, 3000, 1500, 500))
        result = chi_square_gof(hist, probs)
        assert result.statistic == 0.0
        assert result.passed

    def test_degenerate_class(self):
        with pytest.raises(DegenerateClassError):
            chi_square_gof(CountHistogram((99, 1)), [1.0, 0.0])

    def test_needs_normalized_expectation(self):
        with pytest.raises(ValueError):
            chi_square_gof(CountHistogram((50, 50)), [0.5, 0.4])

    def test_needs_100_events(self):
        with pytest.raises(ValueError):
            chi_square_gof(CountHistogram((50, 40)), [0.5, 0.5])

    def test_rejects_wrong_mean(self, rng):
        hist = CountHistogram.from_samples(rng.poisson(0.05, 10**6))
        assert not chi_square_gof(hist, poisson_class_probs(0.10)).passed

    def test_false_rejection_rate(self):
        # 300 independent 10^6-sample runs at the 0.01 level; failures must be
        # compatible with Binomial(300, 0.01): P(X > 10) < 1e-3.
        rng = np.random.default_rng(5)
        probs = poisson_class_probs(0.05)
        failures = sum(
            not chi_square_gof(CountHistogram.from_samples(rng.poisson(0.05, 10**6)), probs).passed
            for _ in range(300)
        )
        assert failures <= 10

    @settings(max_examples=50)
    @given(st.randoms(use_true_random=False))
    def test_permutation_invariant(self, rand: random.Random):
        probs = [0.4, 0.25, 0.2, 0.1, 0.05]
        counts = [rand.randint(0, 3000) + 100 for _ in probs]
        order = list(range(len(probs)))
        rand.shuffle(order)
        a = chi_square_gof(CountHistogram(tuple(counts)), probs)
        b = chi_square_gof(CountHistogram(tuple(counts[i] for i in order)), [probs[i] for i in order])
        assert a.statistic == pytest.approx(b.statistic, rel=1e-12)
        assert a.dof == b.dof

    def test_tail_class(self):
        hist = CountHistogram.from_samples(np.array([0, 1, 7, 12, 5]))
        assert hist.counts == (1, 1, 0, 0, 0, 3)
        assert hist.total == 5


class TestBisect:
    def test_linear(self):
        assert bisect_root(lambda x: x - 0.25, 0, 1, 1e-9) == pytest.approx(0.25, abs=1e-9)

    def test_sqrt_two(self):
        assert bisect_root(lambda x: x * x - 2, 1, 2, 1e-9) == pytest.approx(1.414213562, abs=1e-9)

    def test_entropy_half(self):
        root = bisect_root(lambda x: binary_entropy(x) - 0.5, 0, 0.5, 1e-6)
        mp_root = mp.findroot(lambda x: mp_entropy(x) - mpf(1) / 2, mpf("0.11"))
        assert root == pytest.approx(float(mp_root), abs=1e-6)
        assert root == pytest.approx(0.110028, abs=1e-6)

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            bisect_root(lambda x: x * x + 1, -1, 1, 1e-6)

    def test_bad_tol(self):
        with pytest.raises(DomainError):
            bisect_root(lambda x: x, -1, 1, 0)


class TestCorrectedRates:
    def test_identical(self):
        assert corrected_rates_agree((10, 1000, 0, 0), (10, 1000, 0, 0))

    def test_sparse_errors_are_compatible(self):
        assert corrected_rates_agree((1, 292, 0, 0), (0, 11866, 0, 0))

    def test_large_gap(self):
        assert not corrected_rates_agree((2000, 8000, 0, 0), (30, 12000, 0, 0))

    def test_background_explains_excess(self):
        # 40 expected background errors on 4935 events account for the 45 seen
        assert corrected_rates_agree((45, 4935, 40.0, 80.0), (0, 14190, 0.0, 0.0))
