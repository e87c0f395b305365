"""Eve's photon-number redistribution problem.

Eve wants Bob's arriving photon-number distribution to look exactly like
the Poisson(eta*mu) statistics of an honest lossy channel, for the signal
and the decoy intensity at once. Two families of strategy are examined:

* pulse-level blocking, where an ``n``-photon pulse loses one photon with
  probability ``P_Eve(n)``; solved as a cascade from ``n = 0`` upward;
* per-photon capture, where each photon of an ``n``-photon pulse is kept by
  Eve with probability ``1 - eta``, giving the binomial forwarding law
  ``f_n(i) = C(n, i) eta^i (1 - eta)^(n - i)``.

Only the second family matches both intensities simultaneously.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from ..exceptions import DegenerateChannelError, DomainError
from ..stats import N_MAX, poisson_pmf

# Internal summation depth for residuals; the reported table stops at n_max.
_SUM_DEPTH = 60


def p_eve_one_exact(mu: float, eta: float) -> float:
    """Single-photon blocking probability (e^{mu(1-eta)} - 1) / mu."""
    return math.expm1(mu * (1.0 - eta)) / mu


def p_eve_one_first_order(eta: float) -> float:
    return 1.0 - eta


def p_eve_two_eq9(mu: float, eta: float) -> float:
    """Two-photon attack probability from the n = 1 balance with P_Eve(1) = 1 - eta.

    Solving ``mu e^-mu eta + P_Eve(2) mu^2/2 e^-mu = eta mu e^{-eta mu}`` gives
    ``2 eta (e^{mu(1-eta)} - 1) / mu``, which tends to 2 eta (1 - eta).
    """
    return 2.0 * eta * math.expm1(mu * (1.0 - eta)) / mu


def p_eve_two_first_order(eta: float) -> float:
    return 2.0 * (1.0 - eta) * eta


def blocking_cascade(mu: float, eta: float, n_max: int = N_MAX) -> np.ndarray:
    """Self-consistent pulse-level solution P_Eve(n), n = 0..n_max, for one intensity.

    Uses P^mu(n)[1 - P_Eve(n)] + P^mu(n+1) P_Eve(n+1) = P_loss(n) with
    P_Eve(0) = 0. Values outside [0, 1] signal that no such strategy exists.
    """
    p_eve = np.zeros(n_max + 1)
    for n in range(n_max):
        source_n = poisson_pmf(n, mu)
        lossy_n = poisson_pmf(n, eta * mu)
        p_eve[n + 1] = (lossy_n - source_n * (1.0 - p_eve[n])) / poisson_pmf(n + 1, mu)
    return p_eve


def forward_distribution(n: int, eta: float) -> np.ndarray:
    """Binomial probabilities that Eve forwards i = 0..n of n photons."""
    i = np.arange(n + 1)
    return comb(n, i) * eta**i * (1.0 - eta) ** (n - i)


def redistribution_residual(mu: float, eta: float, n: int) -> float:
    """|sum_j P^mu(j) f_j(n) - P_loss(n)| for the per-photon capture strategy."""
    total = math.fsum(
        poisson_pmf(j, mu) * math.comb(j, n) * eta**n * (1.0 - eta) ** (j - n)
        for j in range(n, max(n, _SUM_DEPTH) + 1)
    )
    return abs(total - poisson_pmf(n, eta * mu))


@dataclass(frozen=True)
class InfeasibilityReport:
    """Two-photon balance after Eve attacks two-photon pulses with probability 2 eta (1 - eta)."""

    mu: float
    eta: float
    left: float
    right: float

    @property
    def gap(self) -> float:
        return self.left - self.right

    @property
    def holds(self) -> bool:
        """True when Bob would see too many two-photon arrivals (naive blocking fails)."""
        return self.left > self.right


def check_blocking_infeasibility(mu: float, eta: float) -> InfeasibilityReport:
    if not 0.0 < eta < 1.0 or mu <= 0:
        raise DomainError(f"need mu > 0 and 0 < eta < 1, got mu={mu}, eta={eta}")
    left = mu**2 / 2.0 * math.exp(-mu) * (1.0 - p_eve_two_first_order(eta))
    right = (eta * mu) ** 2 / 2.0 * math.exp(-eta * mu)
    return InfeasibilityReport(mu, eta, left, right)


@dataclass
class EveStrategySolution:
    mu: float
    mu_prime: float
    eta: float
    n_max: int
    per_n_forward_dist: dict[int, np.ndarray]
    residuals: dict[int, float]
    p_eve_1: float
    p_eve_2: float
    p_eve_1_first_order: float
    p_eve_2_first_order: float
    cascade_signal: np.ndarray
    cascade_decoy: np.ndarray
    infeasibility: InfeasibilityReport
    feasible: bool
    residual_tol: float = field(default=1e-9)

    @property
    def cascade_consistent(self) -> bool:
        """Whether pulse-level blocking could satisfy both intensities at once."""
        in_range = np.all((self.cascade_signal >= 0) & (self.cascade_signal <= 1))
        in_range &= np.all((self.cascade_decoy >= 0) & (self.cascade_decoy <= 1))
        return bool(in_range and np.allclose(self.cascade_signal, self.cascade_decoy, atol=1e-9))

    def p_eve(self, n: int) -> float:
        """Probability that an n-photon pulse loses at least one photon to Eve."""
        return float(1.0 - self.per_n_forward_dist[n][n])

    def to_csv(self) -> str:
        """Table (n, p_eve, f_0..f_{n_max}, residual); f_i is blank for i > n."""
        from ..io import fmt

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "p_eve", *(f"f_{i}" for i in range(self.n_max + 1)), "residual"])
        for n in range(self.n_max + 1):
            dist = self.per_n_forward_dist[n]
            cells = [fmt(x) for x in dist] + [""] * (self.n_max - n)
            writer.writerow([n, fmt(self.p_eve(n)), *cells, fmt(self.residuals[n])])
        return buf.getvalue()


def solve_blocking_distribution(
    mu: float, mu_prime: float, eta: float, n_max: int = N_MAX, residual_tol: float = 1e-9
) -> EveStrategySolution:
    """Solve Eve's redistribution problem for signal ``mu`` and decoy ``mu_prime``.

    Raises:
        DegenerateChannelError: ``eta`` is 0 or 1.
    """
    if eta <= 0.0 or eta >= 1.0:
        raise DegenerateChannelError(f"eta must lie strictly between 0 and 1, got {eta}")
    if mu <= 0 or mu_prime <= 0:
        raise DomainError(f"intensities must be positive, got {mu}, {mu_prime}")
    dists = {n: forward_distribution(n, eta) for n in range(n_max + 1)}
    residuals = {
        n: max(redistribution_residual(mu, eta, n), redistribution_residual(mu_prime, eta, n))
        for n in range(n_max + 1)
    }
    return EveStrategySolution(
        mu=mu,
        mu_prime=mu_prime,
        eta=eta,
        n_max=n_max,
        per_n_forward_dist=dists,
        residuals=residuals,
        p_eve_1=p_eve_one_exact(mu, eta),
        p_eve_2=p_eve_two_eq9(mu, eta),
        p_eve_1_first_order=p_eve_one_first_order(eta),
        p_eve_2_first_order=p_eve_two_first_order(eta),
        cascade_signal=blocking_cascade(mu, eta, n_max),
        cascade_decoy=blocking_cascade(mu_prime, eta, n_max),
        infeasibility=check_blocking_infeasibility(mu, eta),
        feasible=max(residuals.values()) < residual_tol,
        residual_tol=residual_tol,
    )
