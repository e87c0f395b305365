"""Phase-randomized weak coherent pulse source.

Phase randomization is treated as already traced out: each pulse is a Fock
state whose photon number is drawn from a Poisson distribution, and every
photon in the pulse carries the same BB84 state.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .stats import N_MAX


class PulseClass(IntEnum):
    SIGNAL = 0
    DECOY = 1


class Basis(IntEnum):
    RECTILINEAR = 0
    DIAGONAL = 1


@dataclass(frozen=True)
class PhotonState:
    """A single photon prepared in one of the four BB84 states."""

    basis: Basis
    bit: int


@dataclass(frozen=True)
class SourceConfig:
    mu: float
    mu_prime: float
    signal_fraction: float = 0.5
    n_max: int = N_MAX

    def __post_init__(self) -> None:
        if not self.mu > 0 or not self.mu_prime > 0:
            raise ValueError(f"mu and mu_prime must be positive, got {self.mu}, {self.mu_prime}")
        if self.mu == self.mu_prime:
            raise ValueError("decoy intensity must differ from the signal intensity")
        if not 0.0 < self.signal_fraction < 1.0:
            raise ValueError(f"signal_fraction must lie in (0, 1), got {self.signal_fraction}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}")

    def mean_for(self, cls: PulseClass) -> float:
        return self.mu if cls == PulseClass.SIGNAL else self.mu_prime


@dataclass(frozen=True)
class PulseRecord:
    id: int
    cls: PulseClass
    basis: Basis
    bit: int
    photon_count: int
    phase_randomized: bool = True


@dataclass
class PulseBatch:
    """Column-oriented block of emitted pulses."""

    id: np.ndarray
    cls: np.ndarray
    basis: np.ndarray
    bit: np.ndarray
    photon_count: np.ndarray

    def __len__(self) -> int:
        return int(self.id.size)

    def record(self, i: int) -> PulseRecord:
        return PulseRecord(
            id=int(self.id[i]),
            cls=PulseClass(int(self.cls[i])),
            basis=Basis(int(self.basis[i])),
            bit=int(self.bit[i]),
            photon_count=int(self.photon_count[i]),
        )

    def __iter__(self):
        return (self.record(i) for i in range(len(self)))

    @classmethod
    def concatenate(cls, batches: list["PulseBatch"]) -> "PulseBatch":
        return cls(
            *(np.concatenate([getattr(b, f) for b in batches]) for f in ("id", "cls", "basis", "bit", "photon_count"))
        )

    @classmethod
    def from_records(cls, records: list[PulseRecord]) -> "PulseBatch":
        return cls(
            id=np.array([r.id for r in records], dtype=np.int64),
            cls=np.array([int(r.cls) for r in records], dtype=np.int8),
            basis=np.array([int(r.basis) for r in records], dtype=np.int8),
            bit=np.array([r.bit for r in records], dtype=np.int8),
            photon_count=np.array([r.photon_count for r in records], dtype=np.int64),
        )


def emit_pulses(config: SourceConfig, n: int, rng: np.random.Generator, start_id: int = 0) -> PulseBatch:
    """Draw ``n`` independent pulses.

    Class, basis and bit are drawn independently; the photon count is Poisson
    with the class mean and clipped at ``config.n_max`` (the clipped tail is
    the overflow class).
    """
    cls = (rng.random(n) >= config.signal_fraction).astype(np.int8)
    basis = rng.integers(0, 2, size=n, dtype=np.int8)
    bit = rng.integers(0, 2, size=n, dtype=np.int8)
    means = np.where(cls == PulseClass.SIGNAL, config.mu, config.mu_prime)
    photons = np.minimum(rng.poisson(means), config.n_max).astype(np.int64)
    ids = np.arange(start_id, start_id + n, dtype=np.int64)
    return PulseBatch(ids, cls, basis, bit, photons)


def emit_pulse(config: SourceConfig, rng: np.random.Generator, pulse_id: int = 0) -> PulseRecord:
    """Emit a single pulse; identical to the first entry of ``emit_pulses`` on the same stream."""
    return emit_pulses(config, 1, rng, start_id=pulse_id).record(0)


def encode_states(pulse: PulseRecord) -> tuple[PhotonState, ...]:
    """The photon states carried by ``pulse``: ``photon_count`` copies of its BB84 state."""
    state = PhotonState(Basis(pulse.basis), int(pulse.bit))
    return (state,) * pulse.photon_count
