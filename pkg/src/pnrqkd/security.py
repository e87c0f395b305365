"""Asymptotic security quantities: mutual information, tagged fractions, key rates, thresholds."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DomainError
from .stats import binary_entropy, bisect_root

THRESHOLD_BRACKET = (1e-6, 0.5 - 1e-6)
THRESHOLD_TOL = 1e-6


def _check_qber(e: float) -> None:
    if not 0.0 <= e <= 0.5:
        raise DomainError(f"QBER must lie in [0, 0.5], got {e}")


def info_ab(e: float) -> float:
    """Alice-Bob mutual information 1 - h(e)."""
    _check_qber(e)
    return 1.0 - binary_entropy(e)


def si_info(e: float) -> float:
    """Eve's information from an optimal individual attack on a single photon at QBER ``e``."""
    _check_qber(e)
    p = min(1.0, (1.0 + 2.0 * math.sqrt(e - e * e)) / 2.0)
    return 1.0 - binary_entropy(p)


def info_ae(e: float, mu: float, p_tagged: float | None = None) -> float:
    """Eve's information: SI on the untagged share plus full knowledge of tagged pulses.

    ``p_tagged`` defaults to ``mu``; pass ``delta_bound(mu, eta)`` for the
    loss-aware variant.
    """
    _check_qber(e)
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"mu must lie in [0, 1], got {mu}")
    tagged = mu if p_tagged is None else p_tagged
    if not 0.0 <= tagged <= 1.0:
        raise DomainError(f"p_tagged must lie in [0, 1], got {tagged}")
    return (1.0 - tagged) * si_info(e) + tagged


@dataclass(frozen=True)
class Threshold:
    mu: float
    qber: float
    insecure_everywhere: bool = False


def security_threshold(mu: float, tol: float = THRESHOLD_TOL) -> Threshold:
    """QBER at which Bob's and Eve's information curves cross.

    A final key is possible only for QBER below the returned value. When the
    curves do not cross in the bracket, ``qber`` is 0 and the result is
    flagged insecure everywhere.
    """
    if not 0.0 < mu < 1.0:
        raise DomainError(f"mu must lie in (0, 1), got {mu}")
    lo, hi = THRESHOLD_BRACKET

    def gap(e: float) -> float:
        return info_ab(e) - info_ae(e, mu)

    if gap(lo) <= 0.0 or gap(hi) >= 0.0:
        return Threshold(mu, 0.0, insecure_everywhere=True)
    return Threshold(mu, bisect_root(gap, lo, hi, tol))


def gllp_rate(e: float, delta: float) -> float:
    """Asymptotic key fraction (1-D) - h(e) - (1-D) h(e/(1-D)).

    Signed: non-positive means no key. When e/(1-D) exceeds 1/2 the inner
    entropy is taken as 1, which keeps the rate non-positive.
    """
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"delta must lie in [0, 1), got {delta}")
    _check_qber(e)
    keep = 1.0 - delta
    return keep - binary_entropy(e) - keep * binary_entropy(min(e / keep, 0.5))


def delta_bound(mu: float, eta: float) -> float:
    """Tagged fraction (mu/2) * 2(eta - eta^2) / eta = mu (1 - eta); never above mu."""
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    return mu * (1.0 - eta)


def delta_from_counts(p_m: float, p_d: float) -> float:
    """Tagged fraction p_M / p_D, clamped to [0, 1]."""
    if p_d <= 0.0:
        raise DomainError("p_d must be positive")
    return min(1.0, max(0.0, p_m / p_d))


def decoy_delta_bound(mu: float, mu_prime: float) -> float:
    """Standard decoy-protocol bound mu e^-mu / (mu' e^-mu')."""
    if mu <= 0 or mu_prime <= 0:
        raise DomainError("intensities must be positive")
    return mu * math.exp(-mu) / (mu_prime * math.exp(-mu_prime))


def multiphoton_detect_prob(mu: float, eta: float) -> float:
    """First-order chance that a detected pulse is multiphoton, mu * eta / 2."""
    if mu < 0 or not 0.0 <= eta <= 1.0:
        raise DomainError(f"invalid mu={mu} or eta={eta}")
    return mu * eta / 2.0


def multiphoton_detect_prob_exact(mu: float, eta: float) -> float:
    """P(>= 2 photons arrive | >= 1 arrives) for Poisson(mu * eta) arrivals."""
    x = mu * eta
    if x == 0:
        return 0.0
    nonempty = -math.expm1(-x)
    return (nonempty - x * math.exp(-x)) / nonempty


@dataclass(frozen=True)
class SecuritySummary:
    qber: float
    mu: float
    eta: float
    i_ab: float
    h_si: float
    i_ae: float
    delta_bound: float
    delta_decoy_bound: float
    gllp_rate: float
    threshold_qber: float

    @property
    def secure(self) -> bool:
        return self.i_ab > self.i_ae


def summarize(qber: float, mu: float, eta: float, mu_prime: float) -> SecuritySummary:
    delta = delta_bound(mu, eta)
    return SecuritySummary(
        qber=qber,
        mu=mu,
        eta=eta,
        i_ab=info_ab(qber),
        h_si=si_info(qber),
        i_ae=info_ae(qber, mu),
        delta_bound=delta,
        delta_decoy_bound=decoy_delta_bound(mu, mu_prime),
        gllp_rate=gllp_rate(qber, delta),
        threshold_qber=security_threshold(mu).qber,
    )


def qber_grid(stop: float = 0.25, step: float = 0.001) -> np.ndarray:
    n = int(round(stop / step))
    return np.round(np.arange(n + 1) * step, 12)


def sweep_rows(mus: Sequence[float], eta: float, grid: Iterable[float] | None = None):
    """Yield (mu, e, i_ab, i_ae, gllp_rate) over a QBER grid for each mu."""
    grid = qber_grid() if grid is None else grid
    for mu in mus:
        delta = delta_bound(mu, eta)
        for e in grid:
            e = float(e)
            yield mu, e, info_ab(e), info_ae(e, mu), gllp_rate(e, delta)


def sweep_csv(mus: Sequence[float], eta: float, grid: Iterable[float] | None = None) -> str:
    from .io import fmt

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["mu", "e", "i_ab", "i_ae", "gllp_rate"])
    for row in sweep_rows(mus, eta, grid):
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()
