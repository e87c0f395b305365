"""State-vector model of the symmetric-individual (SI) unitary and its two-photon CMP extension.

Single-photon register order is (Alice's photon, Eve's ancilla) with basis
index ``2*a + e``. The two-photon register is (A1, E1, A2, E2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError
from ..source import Basis

_SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class QubitJointState:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size not in (4, 16):
            raise ValueError(f"joint state must have dimension 4 or 16, got shape {amps.shape}")
        if abs(np.vdot(amps, amps).real - 1.0) > 1e-12:
            raise ValueError("joint state is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def bb84_vector(basis: Basis, bit: int) -> np.ndarray:
    """Two-component amplitude vector of a BB84 state."""
    if basis == Basis.RECTILINEAR:
        return np.array([1.0, 0.0], dtype=complex) if bit == 0 else np.array([0.0, 1.0], dtype=complex)
    sign = 1.0 if bit == 0 else -1.0
    return np.array([_SQRT_HALF, sign * _SQRT_HALF], dtype=complex)


def si_unitary(alpha: float) -> np.ndarray:
    """4x4 unitary on (photon, ancilla) with U|00> = |00> and U|10> = alpha|10> + beta|01>.

    The remaining columns are fixed to U|01> = alpha|01> - beta|10> and
    U|11> = |11>, so that alpha = 1 is the identity.
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    beta = math.sqrt(max(0.0, 1.0 - alpha * alpha))
    u = np.zeros((4, 4), dtype=complex)
    # columns: |00>=0, |01>=1, |10>=2, |11>=3
    u[0, 0] = 1.0
    u[2, 2], u[1, 2] = alpha, beta
    u[1, 1], u[2, 1] = alpha, -beta
    u[3, 3] = 1.0
    return u


def product_state(photon: np.ndarray) -> QubitJointState:
    """Photon state tensored with a fresh |0> ancilla."""
    return QubitJointState(np.kron(photon, np.array([1.0, 0.0], dtype=complex)))


def apply_si(state: QubitJointState, alpha: float) -> QubitJointState:
    if state.dimension != 4:
        raise ValueError(f"SI acts on a 4-dimensional state, got {state.dimension}")
    return QubitJointState(si_unitary(alpha) @ state.amplitudes)


def apply_cmp(two_photon_state: QubitJointState, alpha: float) -> QubitJointState:
    """Apply U (x) U to the (A1, E1, A2, E2) register."""
    if two_photon_state.dimension != 16:
        raise ValueError(f"CMP acts on a 16-dimensional state, got {two_photon_state.dimension}")
    u = si_unitary(alpha)
    return QubitJointState(np.kron(u, u) @ two_photon_state.amplitudes)


def _photon_error(state: np.ndarray, n_photons: int, which: int, basis: Basis, bit: int) -> float:
    # Probability that photon `which` is found orthogonal to the prepared state.
    wrong = bb84_vector(basis, 1 - bit)
    tensor = state.reshape((2, 2) * n_photons)
    photon_axis = 2 * which
    projected = np.tensordot(wrong.conj(), tensor, axes=([0], [photon_axis]))
    return float(np.sum(np.abs(projected) ** 2))


def si_error_probability(basis: Basis, bit: int, alpha: float) -> float:
    """Error probability of a single photon after the SI unitary, measured in its own basis."""
    out = apply_si(product_state(bb84_vector(basis, bit)), alpha)
    return _photon_error(out.amplitudes, 1, 0, basis, bit)


def cmp_error_probabilities(basis: Basis, bit: int, alpha: float) -> tuple[float, float]:
    """Per-photon marginal error probabilities after U (x) U on two identical photons."""
    single = product_state(bb84_vector(basis, bit)).amplitudes
    out = apply_cmp(QubitJointState(np.kron(single, single)), alpha)
    return (
        _photon_error(out.amplitudes, 2, 0, basis, bit),
        _photon_error(out.amplitudes, 2, 1, basis, bit),
    )
