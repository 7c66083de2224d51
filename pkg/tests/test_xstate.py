import cmath
import math

import numpy as np
import pytest

from steerharvest.errors import NegativeDiagonalError, TraceError
from steerharvest.models.schemas import Direction, Regime, SteeringResult, XState
from steerharvest.services.xstate import (
    classify,
    concurrence,
    j_terms,
    steering,
    steering_margins,
    validate_xstate,
    witness_state,
)

BELL = XState(rho11=0.5, rho22=0.0, rho33=0.0, rho44=0.5, rho14=0.5)
BELL_STEERING = 0.5 - math.sqrt((2.0 - math.sqrt(3.0)) / 8.0)


def random_xstate(rng) -> XState:
    r11, r22, r33, r44 = rng.dirichlet(np.ones(4))
    a14 = rng.uniform() * math.sqrt(r11 * r44)
    a23 = rng.uniform() * math.sqrt(r22 * r33)
    return XState(
        rho11=r11,
        rho22=r22,
        rho33=r33,
        rho44=1.0 - r11 - r22 - r33,
        rho14=cmath.rect(a14, rng.uniform(0, 2 * math.pi)),
        rho23=cmath.rect(a23, rng.uniform(0, 2 * math.pi)),
    )


def test_bell_state():
    assert concurrence(BELL) == pytest.approx(1.0, abs=1e-15)
    result = steering(BELL)
    assert result.s_a_to_b == pytest.approx(BELL_STEERING, abs=1e-15)
    assert result.s_b_to_a == pytest.approx(BELL_STEERING, abs=1e-15)
    assert result.asymmetry == 0.0
    assert result.regime == Regime.two_way


def test_product_ground_state_has_no_correlations():
    ground = XState(rho11=1.0, rho22=0.0, rho33=0.0, rho44=0.0)
    assert concurrence(ground) == 0.0
    result = steering(ground)
    assert (result.s_a_to_b, result.s_b_to_a) == (0.0, 0.0)
    assert result.regime == Regime.no_way


def test_trace_violation_is_rejected():
    with pytest.raises(TraceError) as info:
        validate_xstate(XState(rho11=0.5, rho22=0.3, rho33=0.3, rho44=0.0))
    assert info.value.trace == pytest.approx(1.1)


def test_negative_diagonal_is_rejected():
    with pytest.raises(NegativeDiagonalError) as info:
        validate_xstate(XState(rho11=0.6, rho22=-0.1, rho33=0.5, rho44=0.0))
    assert info.value.entry == "rho22"
    assert info.value.value == pytest.approx(-0.1)


def test_diagonal_above_one_reports_the_entry_itself():
    with pytest.raises(NegativeDiagonalError) as info:
        validate_xstate(XState(rho11=1.1, rho22=0.0, rho33=0.0, rho44=-0.1))
    # rho44 is checked after rho11
    assert info.value.entry == "rho11"
    assert info.value.value == pytest.approx(1.1)
    assert "outside [0, 1]" in str(info.value)


def test_tiny_negative_diagonal_noise_is_tolerated():
    state = XState(rho11=1.0 + 1e-13, rho22=-1e-13, rho33=0.0, rho44=0.0)
    assert validate_xstate(state) is state


def test_complex_coherence_accepts_pairs():
    state = XState(rho11=0.5, rho22=0.0, rho33=0.0, rho44=0.5, rho14=(0.0, 0.5))
    assert state.rho14 == 0.5j
    assert concurrence(state) == pytest.approx(1.0, abs=1e-15)


def test_to_matrix_is_a_density_matrix(rng):
    for _ in range(50):
        rho = random_xstate(rng).to_matrix()
        assert np.allclose(rho, rho.conj().T)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(rho).min() >= -1e-12


@pytest.mark.parametrize("direction", list(Direction))
def test_witness_state_is_a_valid_x_state(rng, direction):
    for _ in range(50):
        tau = witness_state(random_xstate(rng), direction)
        assert tau.trace == pytest.approx(1.0, abs=1e-12)
        assert min(tau.diagonal) >= 0.0


def test_steering_is_scaled_concurrence_of_the_witness(rng):
    scale = 2.0 / math.sqrt(3.0)
    for _ in range(500):
        rho = random_xstate(rng)
        result = steering(rho)
        assert concurrence(witness_state(rho, Direction.b_to_a)) == pytest.approx(
            scale * result.s_b_to_a, abs=1e-12
        )
        assert concurrence(witness_state(rho, Direction.a_to_b)) == pytest.approx(
            scale * result.s_a_to_b, abs=1e-12
        )


def test_j_terms_match_witness_products(rng):
    for _ in range(200):
        rho = random_xstate(rng)
        j = j_terms(rho)
        tau_ba = witness_state(rho, Direction.b_to_a)
        tau_ab = witness_state(rho, Direction.a_to_b)
        assert 3.0 * tau_ba.rho22 * tau_ba.rho33 == pytest.approx(j.j_a - j.j_b, abs=1e-14)
        assert 3.0 * tau_ba.rho11 * tau_ba.rho44 == pytest.approx(j.j_c - j.j_b, abs=1e-14)
        assert 3.0 * tau_ab.rho22 * tau_ab.rho33 == pytest.approx(j.j_a + j.j_b, abs=1e-14)


def test_margins_clamp_to_steering(rng):
    for _ in range(100):
        rho = random_xstate(rng)
        a_to_b, b_to_a = steering_margins(rho)
        result = steering(rho)
        assert result.s_a_to_b == max(0.0, a_to_b)
        assert result.s_b_to_a == max(0.0, b_to_a)


@pytest.mark.parametrize(
    "pair, regime",
    [
        ((0.1, 0.05), Regime.two_way),
        ((0.1, 0.0), Regime.one_way_a_to_b),
        ((0.0, 0.02), Regime.one_way_b_to_a),
        ((0.0, 0.0), Regime.no_way),
    ],
)
def test_classify(pair, regime):
    assert classify(*pair) == regime


def test_inconsistent_asymmetry_is_rejected():
    with pytest.raises(ValueError):
        SteeringResult(s_a_to_b=0.1, s_b_to_a=0.05, asymmetry=0.01, regime=Regime.two_way)


def _wootters_concurrence(rho: np.ndarray) -> float:
    flip = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
    spectrum = np.linalg.eigvals(rho @ flip @ rho.conj() @ flip).real
    roots = np.sort(np.sqrt(np.clip(spectrum, 0.0, None)))[::-1]
    return max(0.0, roots[0] - roots[1] - roots[2] - roots[3])


def test_concurrence_of_the_coherence_branch():
    state = XState(rho11=0.6, rho22=0.2, rho33=0.2, rho44=0.0, rho23=0.1)
    assert concurrence(state) == pytest.approx(0.2, abs=1e-15)
    assert _wootters_concurrence(state.to_matrix()) == pytest.approx(0.2, abs=1e-7)


def test_concurrence_agrees_with_wootters(rng):
    for _ in range(200):
        rho = random_xstate(rng)
        assert concurrence(rho) == pytest.approx(_wootters_concurrence(rho.to_matrix()), abs=1e-6)


def test_bell_state_j_terms():
    j = j_terms(BELL)
    assert j.j_a == pytest.approx((2.0 - math.sqrt(3.0)) / 8.0, abs=1e-15)
    assert j.j_b == 0.0
    assert j.j_c == pytest.approx((2.0 + math.sqrt(3.0)) / 8.0, abs=1e-15)


def test_ground_state_j_terms_vanish():
    j = j_terms(XState(rho11=1.0, rho22=0.0, rho33=0.0, rho44=0.0))
    assert (j.j_a, j.j_b, j.j_c) == (0.0, 0.0, 0.0)


def test_bell_state_witness_entry():
    tau = witness_state(BELL, Direction.b_to_a)
    expected = 0.5 / math.sqrt(3.0) + (3.0 - math.sqrt(3.0)) / 12.0
    assert tau.rho11 == pytest.approx(expected, abs=1e-15)
    assert tau.rho11 == pytest.approx(0.394337, abs=1e-6)


@pytest.mark.parametrize("direction", list(Direction))
def test_maximally_mixed_state_is_a_witness_fixed_point(direction):
    mixed = XState(rho11=0.25, rho22=0.25, rho33=0.25, rho44=0.25)
    tau = witness_state(mixed, direction)
    assert tau.diagonal == pytest.approx((0.25, 0.25, 0.25, 0.25), abs=1e-15)
    assert tau.rho14 == 0.0 and tau.rho23 == 0.0


def test_steering_is_bounded_by_half_the_concurrence(rng):
    for _ in range(1000):
        rho = random_xstate(rng)
        j = j_terms(rho)
        for sign in (1.0, -1.0):
            assert j.j_a + sign * j.j_b >= rho.rho22 * rho.rho33 - 1e-15
            assert j.j_c + sign * j.j_b >= rho.rho11 * rho.rho44 - 1e-15
        result = steering(rho)
        half = concurrence(rho) / 2.0
        assert result.s_a_to_b <= half + 1e-12
        assert result.s_b_to_a <= half + 1e-12


def test_equal_middle_populations_steer_symmetrically(rng):
    for _ in range(500):
        r11, middle, _ = rng.dirichlet(np.ones(3))
        half = middle / 2.0
        r44 = 1.0 - r11 - 2.0 * half
        rho = XState(
            rho11=r11,
            rho22=half,
            rho33=half,
            rho44=r44,
            rho14=cmath.rect(rng.uniform() * math.sqrt(r11 * r44), rng.uniform(0, 2 * math.pi)),
            rho23=rng.uniform() * half,
        )
        result = steering(rho)
        assert result.asymmetry == 0.0
        assert result.s_a_to_b == result.s_b_to_a
