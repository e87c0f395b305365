"""Lossy channel and Monte Carlo eavesdropping strategies.

Eve is granted a lossless channel: once she has decided which photons to
keep, the rest reach Bob with no further loss. Error-rate level attacks
(``si``, ``cmp``) and the channel's own noise flip the bit of the whole
forwarded pulse, so every photon of a pulse leaves the channel in the same
state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..source import Basis, PhotonState, PulseBatch, PulseRecord


class Attack(str, Enum):
    NONE = "none"
    PNS = "pns"
    PNSR = "pnsr"
    SI = "si"
    CMP = "cmp"


class SubstituteModel(str, Enum):
    INTERCEPT_RESEND = "intercept_resend"
    RANDOM_STATE = "random_state"


@dataclass(frozen=True)
class ChannelConfig:
    """Channel transmittance plus the eavesdropping strategy.

    ``eta`` folds in Bob's detector efficiency. ``error_rate`` is the
    channel's intrinsic bit-flip probability per pulse. Strategy parameters:

    * ``pnsr``: ``substitute`` -- ``"intercept_resend"`` (default) or ``"random_state"``.
    * ``si`` / ``cmp``: ``qber`` -- flip probability Eve's unitary imprints.
    """

    eta: float
    attack: Attack = Attack.NONE
    attack_params: dict[str, Any] = field(default_factory=dict)
    error_rate: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0.0 <= self.error_rate <= 0.5:
            raise ValueError(f"error_rate must lie in [0, 0.5], got {self.error_rate}")
        object.__setattr__(self, "attack", Attack(self.attack))
        qber = self.attack_params.get("qber", 0.0)
        if not 0.0 <= qber <= 0.5:
            raise ValueError(f"attack qber must lie in [0, 0.5], got {qber}")
        SubstituteModel(self.attack_params.get("substitute", SubstituteModel.INTERCEPT_RESEND))

    @property
    def substitute_model(self) -> SubstituteModel:
        return SubstituteModel(self.attack_params.get("substitute", SubstituteModel.INTERCEPT_RESEND))

    @property
    def attack_qber(self) -> float:
        return float(self.attack_params.get("qber", 0.0))


@dataclass(frozen=True)
class ChannelOutcome:
    pulse_id: int
    forwarded_states: tuple[PhotonState, ...]
    eve_captured: int
    substituted: bool
    tagged: bool


@dataclass
class ChannelBatch:
    """Column-oriented channel outcomes.

    Genuine forwarded photons all share ``genuine_basis``/``genuine_bit``; a
    PNSR substitute, when present, is described by ``sub_basis``/``sub_bit``.
    """

    pulse_id: np.ndarray
    n_genuine: np.ndarray
    genuine_basis: np.ndarray
    genuine_bit: np.ndarray
    n_sub: np.ndarray
    sub_basis: np.ndarray
    sub_bit: np.ndarray
    eve_captured: np.ndarray
    substituted: np.ndarray
    tagged: np.ndarray

    _fields = (
        "pulse_id", "n_genuine", "genuine_basis", "genuine_bit", "n_sub",
        "sub_basis", "sub_bit", "eve_captured", "substituted", "tagged",
    )

    def __len__(self) -> int:
        return int(self.pulse_id.size)

    @property
    def forwarded(self) -> np.ndarray:
        return self.n_genuine + self.n_sub

    def outcome(self, i: int) -> ChannelOutcome:
        states = (PhotonState(Basis(int(self.genuine_basis[i])), int(self.genuine_bit[i])),) * int(self.n_genuine[i])
        if self.n_sub[i]:
            states += (PhotonState(Basis(int(self.sub_basis[i])), int(self.sub_bit[i])),)
        return ChannelOutcome(
            pulse_id=int(self.pulse_id[i]),
            forwarded_states=states,
            eve_captured=int(self.eve_captured[i]),
            substituted=bool(self.substituted[i]),
            tagged=bool(self.tagged[i]),
        )

    def __iter__(self):
        return (self.outcome(i) for i in range(len(self)))

    @classmethod
    def concatenate(cls, batches: list["ChannelBatch"]) -> "ChannelBatch":
        return cls(*(np.concatenate([getattr(b, f) for b in batches]) for f in cls._fields))


def _passive(pulses: PulseBatch, eta: float, rng: np.random.Generator, eve_keeps: bool) -> ChannelBatch:
    n = pulses.photon_count
    fwd = rng.binomial(n, eta).astype(np.int64)
    captured = (n - fwd) if eve_keeps else np.zeros_like(n)
    zeros8 = np.zeros(len(pulses), dtype=np.int8)
    return ChannelBatch(
        pulse_id=pulses.id.copy(),
        n_genuine=fwd,
        genuine_basis=pulses.basis.copy(),
        genuine_bit=pulses.bit.copy(),
        n_sub=np.zeros(len(pulses), dtype=np.int64),
        sub_basis=zeros8,
        sub_bit=zeros8.copy(),
        eve_captured=captured,
        substituted=np.zeros(len(pulses), dtype=bool),
        tagged=(captured >= 1) & (fwd >= 1),
    )


def lossy_batch(pulses: PulseBatch, eta: float, rng: np.random.Generator) -> ChannelBatch:
    """Every photon survives independently with probability ``eta``."""
    return _passive(pulses, eta, rng, eve_keeps=False)


def pns_batch(pulses: PulseBatch, eta: float, rng: np.random.Generator) -> ChannelBatch:
    """Eve keeps each photon with probability 1 - eta and forwards the rest losslessly."""
    return _passive(pulses, eta, rng, eve_keeps=True)


def pnsr_batch(
    pulses: PulseBatch,
    eta: float,
    rng: np.random.Generator,
    model: SubstituteModel = SubstituteModel.INTERCEPT_RESEND,
) -> ChannelBatch:
    """PNS on single photons; on multiphoton pulses Eve swaps one photon for a false one.

    The photon count reaching Bob is conserved for multiphoton pulses.
    """
    out = pns_batch(pulses, eta, rng)
    n = pulses.photon_count
    multi = n >= 2
    size = len(pulses)
    eve_basis = rng.integers(0, 2, size=size, dtype=np.int8)
    eve_bit = rng.integers(0, 2, size=size, dtype=np.int8)
    if SubstituteModel(model) is SubstituteModel.INTERCEPT_RESEND:
        # Eve measures the stolen photon in a random basis and resends her result.
        sub_basis = eve_basis
        sub_bit = np.where(eve_basis == pulses.basis, pulses.bit, eve_bit).astype(np.int8)
    else:
        sub_basis, sub_bit = eve_basis, eve_bit
    out.n_genuine = np.where(multi, n - 1, out.n_genuine)
    out.eve_captured = np.where(multi, 1, out.eve_captured)
    out.n_sub = multi.astype(np.int64)
    out.sub_basis = np.where(multi, sub_basis, 0).astype(np.int8)
    out.sub_bit = np.where(multi, sub_bit, 0).astype(np.int8)
    out.substituted = multi
    out.tagged = (out.eve_captured >= 1) & (out.forwarded >= 1)
    return out


def _flip(out: ChannelBatch, mask: np.ndarray, p: float, rng: np.random.Generator) -> None:
    flips = (rng.random(len(out)) < p) & mask
    out.genuine_bit = (out.genuine_bit ^ flips).astype(np.int8)


def transmit_batch(pulses: PulseBatch, config: ChannelConfig, rng: np.random.Generator) -> ChannelBatch:
    """Send a batch of pulses through the configured channel and attack."""
    attack = config.attack
    if attack is Attack.NONE:
        out = lossy_batch(pulses, config.eta, rng)
    elif attack is Attack.PNS:
        out = pns_batch(pulses, config.eta, rng)
    elif attack is Attack.PNSR:
        out = pnsr_batch(pulses, config.eta, rng, config.substitute_model)
    elif attack is Attack.SI:
        # Eve's optimal scheme: per-photon capture, SI on pulses that were single photons.
        out = pns_batch(pulses, config.eta, rng)
        _flip(out, (pulses.photon_count == 1) & (out.n_genuine > 0), config.attack_qber, rng)
    elif attack is Attack.CMP:
        out = lossy_batch(pulses, config.eta, rng)
        _flip(out, out.n_genuine > 0, config.attack_qber, rng)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown attack {attack!r}")
    if config.error_rate > 0:
        _flip(out, out.n_genuine > 0, config.error_rate, rng)
    return out


def _single(pulse: PulseRecord) -> PulseBatch:
    return PulseBatch.from_records([pulse])


def transmit_lossy(pulse: PulseRecord, config: ChannelConfig, rng: np.random.Generator) -> ChannelOutcome:
    """Passive loss only; nothing is tagged."""
    return lossy_batch(_single(pulse), config.eta, rng).outcome(0)


def attack_pns(pulse: PulseRecord, config: ChannelConfig, rng: np.random.Generator) -> ChannelOutcome:
    """Per-photon capture with probability 1 - eta."""
    return pns_batch(_single(pulse), config.eta, rng).outcome(0)


def attack_pnsr(pulse: PulseRecord, config: ChannelConfig, rng: np.random.Generator) -> ChannelOutcome:
    """Photon-number splitting with a resent substitute photon on multiphoton pulses."""
    return pnsr_batch(_single(pulse), config.eta, rng, config.substitute_model).outcome(0)
