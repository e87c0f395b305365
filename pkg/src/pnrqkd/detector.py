"""Bob's photon-number-resolving receiver.

A balanced beam-splitter tree fans the incoming pulse out to ``n_ports``
equally likely leaf ports. Each port feeds a polarization beam splitter
aligned with Bob's basis for that pulse, and each PBS output has its own
single-photon detector, so there are ``2 * n_ports`` detectors in total.
Detector index ``2 * port + outcome`` identifies the port and the bit value
that detector reports. A detector clicks at most once per slot, so two
photons landing on the same detector are counted as one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .adversary.channel import ChannelBatch, ChannelOutcome
from .exceptions import DomainError
from .source import Basis
from .stats import GOF_CLASSES, N_MAX, poisson_pmf

AMBIGUOUS = -1


@dataclass(frozen=True)
class DetectorConfig:
    """Receiver layout.

    ``budget_factor`` scales ``n_ports`` into the detector count N used by
    the dark-count budget (1: leaf ports, 2: every SPD).
    """

    n_ports: int = 16
    e_dark: float = 0.0
    budget_factor: int = 1

    def __post_init__(self) -> None:
        if self.n_ports < 1 or self.n_ports & (self.n_ports - 1):
            raise ValueError(f"n_ports must be a power of two, got {self.n_ports}")
        if not 0.0 <= self.e_dark < 1.0:
            raise ValueError(f"e_dark must lie in [0, 1), got {self.e_dark}")
        if self.budget_factor not in (1, 2):
            raise ValueError(f"budget_factor must be 1 or 2, got {self.budget_factor}")

    @property
    def n_spd(self) -> int:
        return 2 * self.n_ports


@dataclass(frozen=True)
class DetectionEvent:
    pulse_id: int
    clicked_spds: frozenset[int]
    bob_basis: Basis
    dark_clicks: int

    @property
    def resolved_count(self) -> int:
        return len(self.clicked_spds)

    @property
    def measured_bit(self) -> int:
        bits = {spd % 2 for spd in self.clicked_spds}
        return bits.pop() if len(bits) == 1 else AMBIGUOUS

    @property
    def multiphoton_flag(self) -> bool:
        return self.resolved_count >= 2


@dataclass
class DetectionBatch:
    pulse_id: np.ndarray
    bob_basis: np.ndarray
    resolved_count: np.ndarray
    clicks_one: np.ndarray
    dark_clicks: np.ndarray

    _fields = ("pulse_id", "bob_basis", "resolved_count", "clicks_one", "dark_clicks")

    def __len__(self) -> int:
        return int(self.pulse_id.size)

    @property
    def clicks_zero(self) -> np.ndarray:
        return self.resolved_count - self.clicks_one

    @property
    def measured_bit(self) -> np.ndarray:
        bit = np.full(len(self), AMBIGUOUS, dtype=np.int8)
        bit[(self.resolved_count > 0) & (self.clicks_one == 0)] = 0
        bit[(self.resolved_count > 0) & (self.clicks_one == self.resolved_count)] = 1
        return bit

    @property
    def multiphoton_flag(self) -> np.ndarray:
        return self.resolved_count >= 2

    @classmethod
    def concatenate(cls, batches: list["DetectionBatch"]) -> "DetectionBatch":
        return cls(*(np.concatenate([getattr(b, f) for b in batches]) for f in cls._fields))


def _detect_core(channel: ChannelBatch, config: DetectorConfig, rng: np.random.Generator):
    size = len(channel)
    n_spd = config.n_spd
    bob_basis = rng.integers(0, 2, size=size, dtype=np.int8)

    g_idx = np.repeat(np.arange(size), channel.n_genuine)
    s_idx = np.flatnonzero(channel.n_sub)
    idx = np.concatenate([g_idx, s_idx])
    ph_basis = np.concatenate([channel.genuine_basis[g_idx], channel.sub_basis[s_idx]])
    ph_bit = np.concatenate([channel.genuine_bit[g_idx], channel.sub_bit[s_idx]])
    m = idx.size
    coin = rng.integers(0, 2, size=m, dtype=np.int8)
    outcome = np.where(ph_basis == bob_basis[idx], ph_bit, coin).astype(np.int64)
    port = rng.integers(0, config.n_ports, size=m)
    keys = [idx.astype(np.int64) * n_spd + 2 * port + outcome]

    if config.e_dark > 0:
        n_dark = rng.binomial(n_spd, config.e_dark, size=size)
    else:
        n_dark = np.zeros(size, dtype=np.int64)
    for i in np.flatnonzero(n_dark):
        spds = rng.choice(n_spd, size=int(n_dark[i]), replace=False)
        keys.append(i * n_spd + spds.astype(np.int64))

    clicked = np.unique(np.concatenate(keys))
    return bob_basis, clicked // n_spd, clicked % n_spd, n_dark


def detect_batch(channel: ChannelBatch, config: DetectorConfig, rng: np.random.Generator) -> DetectionBatch:
    """Route every forwarded photon through the receiver and add dark clicks."""
    size = len(channel)
    bob_basis, pulse_idx, spd, n_dark = _detect_core(channel, config, rng)
    resolved = np.bincount(pulse_idx, minlength=size).astype(np.int64)
    ones = np.bincount(pulse_idx, weights=spd % 2, minlength=size).astype(np.int64)
    return DetectionBatch(channel.pulse_id.copy(), bob_basis, resolved, ones, n_dark.astype(np.int64))


def detect(outcome: ChannelOutcome, config: DetectorConfig, rng: np.random.Generator) -> DetectionEvent:
    """Single-pulse detection returning the exact set of clicked detectors."""
    states = outcome.forwarded_states
    genuine = [s for s in states if s == states[0]] if states else []
    extra = [s for s in states if states and s != states[0]]
    batch = ChannelBatch(
        pulse_id=np.array([outcome.pulse_id]),
        n_genuine=np.array([len(genuine)]),
        genuine_basis=np.array([states[0].basis if states else 0], dtype=np.int8),
        genuine_bit=np.array([states[0].bit if states else 0], dtype=np.int8),
        n_sub=np.array([len(extra)]),
        sub_basis=np.array([extra[0].basis if extra else 0], dtype=np.int8),
        sub_bit=np.array([extra[0].bit if extra else 0], dtype=np.int8),
        eve_captured=np.array([outcome.eve_captured]),
        substituted=np.array([outcome.substituted]),
        tagged=np.array([outcome.tagged]),
    )
    if len(extra) > 1:
        raise ValueError("at most one photon may differ from the rest of the pulse")
    bob_basis, _, spd, n_dark = _detect_core(batch, config, rng)
    return DetectionEvent(
        pulse_id=outcome.pulse_id,
        clicked_spds=frozenset(int(s) for s in spd),
        bob_basis=Basis(int(bob_basis[0])),
        dark_clicks=int(n_dark[0]),
    )


def collision_probability(n_photons: int, config: DetectorConfig) -> float:
    """Chance that ``n_photons`` with the same measured polarization do not all hit distinct detectors."""
    if n_photons < 2:
        raise DomainError(f"collisions need at least two photons, got {n_photons}")
    distinct = 1.0
    for k in range(1, n_photons):
        distinct *= max(0.0, 1.0 - k / config.n_ports)
    return 1.0 - distinct


@dataclass(frozen=True)
class DarkCountBudget:
    background: float
    allowance: float

    @property
    def passed(self) -> bool:
        return self.background < self.allowance


def check_dark_count_budget(config: DetectorConfig, mu: float, eta: float) -> DarkCountBudget:
    """Compare N * e_dark with the two-photon arrival rate mu * eta / 2."""
    n = config.budget_factor * config.n_ports
    return DarkCountBudget(n * config.e_dark, mu * eta / 2.0)


def _occupancy(k: int, bins: int) -> np.ndarray:
    # P(r distinct bins hit | k uniform balls), r = 0..k
    dist = np.zeros(k + 1)
    dist[0] = 1.0
    for balls in range(k):
        nxt = np.zeros(k + 1)
        r = np.arange(balls + 1)
        nxt[: balls + 1] += dist[: balls + 1] * r / bins
        nxt[1 : balls + 2] += dist[: balls + 1] * (bins - r) / bins
        dist = nxt
    return dist


def response_matrix(config: DetectorConfig, n_max: int = N_MAX) -> np.ndarray:
    """R[k, r]: probability that k identical photons produce r clicks (dark counts included)."""
    n_spd = config.n_spd
    r_max = n_spd
    out = np.zeros((n_max + 1, r_max + 1))
    for k in range(n_max + 1):
        occ = 0.5 * _occupancy(k, config.n_ports) + 0.5 * _occupancy(k, n_spd)
        for r, p in enumerate(occ):
            if p == 0.0:
                continue
            if config.e_dark == 0.0:
                out[k, r] += p
            else:
                extra = binom.pmf(np.arange(n_spd - r + 1), n_spd - r, config.e_dark)
                out[k, r : n_spd + 1] += p * extra
    return out


def resolved_count_distribution(
    mean: float, config: DetectorConfig, n_classes: int = GOF_CLASSES, n_max: int = N_MAX
) -> np.ndarray:
    """Expected resolved-count class probabilities for Poisson(mean) honest arrivals.

    Classes are r = 0..n_classes-1 plus a tail r >= n_classes. With no dark
    counts and many ports this is Poisson(mean) up to the collision loss.
    """
    arrivals = np.array([poisson_pmf(k, mean) for k in range(n_max + 1)])
    arrivals[-1] += max(0.0, 1.0 - arrivals.sum())
    clicks = arrivals @ response_matrix(config, n_max)
    head = clicks[:n_classes]
    if head.size < n_classes:
        head = np.pad(head, (0, n_classes - head.size))
    tail = max(0.0, 1.0 - head.sum())
    probs = np.append(head, tail)
    return probs / probs.sum()


def dark_click_rate(batch: DetectionBatch, config: DetectorConfig) -> float:
    """Empirical dark clicks per detector per slot."""
    return float(batch.dark_clicks.sum()) / (len(batch) * config.n_spd) if len(batch) else math.nan


def background_contribution(
    n_pulses: int, arrival_mean: float, config: DetectorConfig, n_classes: int = GOF_CLASSES, n_max: int = N_MAX
) -> dict[int, tuple[float, float]]:
    """Dark-count share of basis-matched events, per resolved-count class.

    For honest, error-free arrivals this returns ``{n: (errors, dark_only)}``:
    the expected number of n-click basis-matched events made wrong by a dark
    click, and the expected number of such events with no photon at all.
    Class ``n_classes`` collects everything at or above it.
    """
    if config.e_dark == 0.0:
        return {}
    n_ports, n_spd = config.n_ports, config.n_spd
    arrivals = np.array([poisson_pmf(a, arrival_mean) for a in range(n_max + 1)])
    # matched basis: every photon reports Alice's bit, so only the n_ports "right" detectors fill
    photon_clicks = np.zeros(n_max + 1)
    for a, p in enumerate(arrivals):
        photon_clicks[: a + 1] += p * _occupancy(a, n_ports)
    matched = 0.5 * n_pulses
    out = {n: [0.0, 0.0] for n in range(1, n_classes + 1)}
    for k, p_k in enumerate(photon_clicks):
        free_right, free = n_ports - k, n_spd - k
        if p_k == 0.0 or free <= 0:
            continue
        for j in range(1, min(free, n_classes + 1) + 1):
            p_j = binom.pmf(j, free, config.e_dark)
            # error unless every dark click lands on a detector reporting Alice's bit
            clean = math.comb(max(free_right, 0), j) / math.comb(free, j)
            n_cls = min(k + j, n_classes)
            out[n_cls][0] += matched * p_k * p_j * (1.0 - clean)
            if k == 0:
                out[n_cls][1] += matched * p_k * p_j
    return {n: (e, d) for n, (e, d) in out.items()}
