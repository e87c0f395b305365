"""Numeric kernels shared by the rest of the package.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binomtest, chi2, norm

from .exceptions import BracketError, DegenerateClassError, DomainError

#: Photon-number truncation used throughout; tail mass is below 1e-13 for mean <= 1.
N_MAX = 10
#: Number of explicit classes in a goodness-of-fit histogram (n = 0..4), plus one tail class.
GOF_CLASSES = 5
DEFAULT_SIGNIFICANCE = 0.01
#: Classes whose expected count falls below this are pooled before the Pearson sum.
MIN_EXPECTED_COUNT = 5.0


def poisson_pmf(n: int, mean: float) -> float:
    """Probability that a Poisson variable with the given mean equals ``n``."""
    if mean < 0:
        raise DomainError(f"mean must be non-negative, got {mean}")
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    if mean == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mean) - mean - math.lgamma(n + 1))


def poisson_pmf_vector(mean: float, n_max: int = N_MAX) -> np.ndarray:
    """``poisson_pmf(n, mean)`` for n = 0..n_max as an array."""
    return np.array([poisson_pmf(n, mean) for n in range(n_max + 1)])


def poisson_class_probs(mean: float, n_classes: int = GOF_CLASSES) -> np.ndarray:
    """Poisson class probabilities for n = 0..n_classes-1 followed by the tail P(n >= n_classes)."""
    head = poisson_pmf_vector(mean, n_classes - 1)
    tail = max(0.0, 1.0 - head.sum())
    return np.append(head, tail)


def binary_entropy(x: float) -> float:
    """Shannon entropy of a Bernoulli(x) variable in bits, with 0 log 0 = 0."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary_entropy needs x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def multiphoton_given_nonempty(mu: float) -> float:
    """P(n > 1 | n > 0) for a Poisson source of mean ``mu``.

    Evaluated as (1 - e^-mu (1 + mu)) / (1 - e^-mu) with expm1 so that small
    ``mu`` does not lose digits to cancellation.
    """
    if mu <= 0:
        raise DomainError(f"mu must be positive, got {mu}")
    nonempty = -math.expm1(-mu)
    multi = nonempty - mu * math.exp(-mu)
    return multi / nonempty


@dataclass(frozen=True)
class CountHistogram:
    """Event counts per photon-number class; the last entry is the overflow tail."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(sum(self.counts))

    @classmethod
    def from_samples(cls, samples: np.ndarray, n_classes: int = GOF_CLASSES) -> "CountHistogram":
        """Bin integer samples into classes 0..n_classes-1 and a tail class for >= n_classes."""
        samples = np.asarray(samples, dtype=np.int64)
        clipped = np.minimum(samples, n_classes)
        counts = np.bincount(clipped, minlength=n_classes + 1)
        return cls(tuple(int(c) for c in counts))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float)


@dataclass(frozen=True)
class GofResult:
    statistic: float
    dof: int
    p_value: float
    significance: float

    @property
    def passed(self) -> bool:
        return self.p_value >= self.significance


def _pool_sparse(obs: np.ndarray, exp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Pool every class with expected count < MIN_EXPECTED_COUNT into one bin. If the
    # pooled bin is still sparse, fold it into the smallest remaining class. Both steps
    # only depend on the (observed, expected) pairs, never on class order.
    sparse = exp < MIN_EXPECTED_COUNT
    if not sparse.any():
        return obs, exp
    dense_obs, dense_exp = obs[~sparse], exp[~sparse]
    pooled_obs, pooled_exp = obs[sparse].sum(), exp[sparse].sum()
    if pooled_exp < MIN_EXPECTED_COUNT and dense_exp.size:
        k = int(np.argmin(dense_exp))
        dense_obs = dense_obs.copy()
        dense_exp = dense_exp.copy()
        dense_obs[k] += pooled_obs
        dense_exp[k] += pooled_exp
        return dense_obs, dense_exp
    return np.append(dense_obs, pooled_obs), np.append(dense_exp, pooled_exp)


def chi_square_gof(
    observed: CountHistogram,
    expected: Sequence[float],
    significance: float = DEFAULT_SIGNIFICANCE,
) -> GofResult:
    """Pearson chi-square test of a count histogram against class probabilities.

    Args:
        observed: Histogram with one entry per class (tail included).
        expected: Class probabilities aligned with ``observed.counts``; must sum to 1.
        significance: The test fails when the p-value drops below this.

    Raises:
        DegenerateClassError: A class with zero probability holds observations.
        ValueError: Misaligned inputs, probabilities not summing to 1, or fewer
            than 100 observations.
    """
    obs = observed.as_array()
    probs = np.asarray(expected, dtype=float)
    if probs.shape != obs.shape:
        raise ValueError(f"expected has {probs.size} classes, observed has {obs.size}")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError(f"expected probabilities sum to {probs.sum()!r}, not 1")
    if np.any(probs < 0):
        raise ValueError("expected probabilities must be non-negative")
    total = observed.total
    if total < 100:
        raise ValueError(f"chi-square needs at least 100 observations, got {total}")
    bad = (probs == 0) & (obs > 0)
    if bad.any():
        raise DegenerateClassError(
            f"classes {np.flatnonzero(bad).tolist()} have zero probability but nonzero counts"
        )
    keep = probs > 0
    o, e = _pool_sparse(obs[keep], probs[keep] * total)
    dof = o.size - 1
    if dof < 1:
        return GofResult(0.0, 0, 1.0, significance)
    stat = float(np.sum((o - e) ** 2 / e))
    return GofResult(stat, dof, float(chi2.sf(stat, dof)), significance)


def bisect_root(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Locate a sign change of ``f`` in [lo, hi] to within ``tol``.

    Returns the midpoint of the final bracket, whose width is at most ``tol``.
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if lo > hi:
        lo, hi = hi, lo
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(f"f({lo})={f_lo} and f({hi})={f_hi} have the same sign")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def corrected_rates_agree(
    first: tuple[int, int, float, float],
    second: tuple[int, int, float, float],
    n_sigma: float = 3.0,
) -> bool:
    """Test whether two error counts share one underlying rate on top of a known background.

    Each argument is ``(errors, events, background_errors, background_events)``.
    Under the null both samples have rate ``e`` on their ``events -
    background_events`` photon events, plus their expected background errors,
    so the error counts are Poisson with means ``lam_i``. Conditional on the
    total, the first count is Binomial(K, lam_1 / (lam_1 + lam_2)); the rates
    disagree when that exact two-sided test rejects at the ``n_sigma`` level.
    """
    k1, t1, b1, bt1 = first
    k2, t2, b2, bt2 = second
    total = k1 + k2
    if total == 0:
        return True
    c1, c2 = max(t1 - bt1, 0.0), max(t2 - bt2, 0.0)
    if c1 + c2 == 0:
        return True
    rate = max(0.0, (total - b1 - b2) / (c1 + c2))
    lam1, lam2 = rate * c1 + b1, rate * c2 + b2
    if lam1 + lam2 == 0:
        return True
    p_value = binomtest(int(k1), int(total), lam1 / (lam1 + lam2)).pvalue
    return p_value >= 2.0 * norm.sf(n_sigma)
