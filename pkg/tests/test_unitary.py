import math

import numpy as np
import pytest

from pnrqkd.adversary.unitary import (
    QubitJointState,
    apply_cmp,
    apply_si,
    bb84_vector,
    cmp_error_probabilities,
    product_state,
    si_error_probability,
    si_unitary,
)
from pnrqkd.exceptions import DomainError
from pnrqkd.source import Basis

ALPHAS = [0.0, 0.3, 1 / math.sqrt(2), 1.0]
BB84 = [(b, bit) for b in Basis for bit in (0, 1)]


def ket(index, dim=4):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


@pytest.mark.parametrize("alpha", np.linspace(0, 1, 11))
def test_unitarity(alpha):
    u = si_unitary(alpha)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_alpha_one_is_identity():
    assert np.array_equal(si_unitary(1.0), np.eye(4))


def test_full_swap():
    # |1>_A|0>_E is index 2, |0>_A|1>_E is index 1
    assert np.allclose(si_unitary(0.0) @ ket(2), ket(1), atol=0)


def test_half_amplitudes():
    out = si_unitary(1 / math.sqrt(2)) @ ket(2)
    assert out[2] == pytest.approx(1 / math.sqrt(2))
    assert out[1] == pytest.approx(1 / math.sqrt(2))


def test_vacuum_pair_fixed():
    assert np.array_equal(si_unitary(0.4) @ ket(0), ket(0))


@pytest.mark.parametrize("alpha", [-0.1, 1.1])
def test_alpha_domain(alpha):
    with pytest.raises(DomainError):
        si_unitary(alpha)


def test_norm_preserved_on_random_states():
    rng = np.random.default_rng(17)
    for _ in range(100):
        alpha = rng.random()
        v4 = rng.normal(size=4) + 1j * rng.normal(size=4)
        v16 = rng.normal(size=16) + 1j * rng.normal(size=16)
        s4 = QubitJointState(v4 / np.linalg.norm(v4))
        s16 = QubitJointState(v16 / np.linalg.norm(v16))
        assert abs(apply_si(s4, alpha).norm_squared - 1) < 1e-12
        assert abs(apply_cmp(s16, alpha).norm_squared - 1) < 1e-12


def test_state_validation():
    with pytest.raises(ValueError):
        QubitJointState(np.ones(8) / math.sqrt(8))
    with pytest.raises(ValueError):
        QubitJointState(np.ones(4))


def test_dimension_mismatch():
    single = product_state(bb84_vector(Basis.RECTILINEAR, 0))
    with pytest.raises(ValueError):
        apply_cmp(single, 0.5)
    with pytest.raises(ValueError):
        apply_si(QubitJointState(ket(0, 16)), 0.5)


@pytest.mark.parametrize("alpha", np.linspace(0, 1, 7))
def test_cmp_leaves_vacuum_pair(alpha):
    state = QubitJointState(ket(0, 16))
    assert np.allclose(apply_cmp(state, alpha).amplitudes, ket(0, 16), atol=1e-15)


def test_cmp_identity_at_alpha_one():
    rng = np.random.default_rng(2)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    s = QubitJointState(v / np.linalg.norm(v))
    assert np.allclose(apply_cmp(s, 1.0).amplitudes, s.amplitudes, atol=1e-15)


def test_si_errors_by_hand():
    beta2 = 1 - 0.3**2
    assert si_error_probability(Basis.RECTILINEAR, 0, 0.3) == pytest.approx(0.0, abs=1e-15)
    assert si_error_probability(Basis.RECTILINEAR, 1, 0.3) == pytest.approx(beta2, abs=1e-12)
    for bit in (0, 1):
        assert si_error_probability(Basis.DIAGONAL, bit, 1.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("basis,bit", BB84)
def test_cmp_marginals_equal_si(basis, bit, alpha):
    si = si_error_probability(basis, bit, alpha)
    first, second = cmp_error_probabilities(basis, bit, alpha)
    assert abs(first - si) < 1e-12
    assert abs(second - si) < 1e-12
