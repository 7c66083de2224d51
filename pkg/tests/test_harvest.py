import itertools
import math
import warnings

import numpy as np
import pytest
from scipy import special

from steerharvest.config import settings
from steerharvest.errors import DomainError, NumericalError
from steerharvest.models.schemas import DetectorPairParams, Measure, Regime
from steerharvest.services import harvest
from steerharvest.services.harvest import (
    PerturbativeValidityWarning,
    amplitudes,
    concurrence_harvested,
    correlation_c,
    correlation_x,
    evaluate,
    perturbative_state,
    signed_margins,
    steering_closed_form,
    transition_probability,
)
from steerharvest.services.xstate import steering

LAMBDA = 0.1


def pair(omega_a: float, omega_b: float, sep: float, coupling: float = LAMBDA) -> DetectorPairParams:
    return DetectorPairParams(coupling=coupling, omega_a=omega_a, omega_b=omega_b, separation=sep)


class TestTransitionProbability:
    def test_reference_value(self):
        assert transition_probability(1.0, LAMBDA) == pytest.approx(7.0883e-5, rel=1e-3)

    def test_small_gap_limit(self):
        assert transition_probability(1e-12, LAMBDA) == pytest.approx(LAMBDA ** 2 / (4 * math.pi), rel=1e-9)

    def test_decreasing_in_the_gap(self):
        values = [transition_probability(omega, LAMBDA) for omega in np.linspace(0.05, 5.0, 100)]
        assert all(a > b > 0 for a, b in zip(values, values[1:]))

    def test_large_gap_stays_positive(self):
        assert transition_probability(8.0, LAMBDA) > 0.0

    @pytest.mark.parametrize("omega", [0.0, -1.0, float("nan"), float("inf")])
    def test_invalid_gap(self, omega):
        with pytest.raises(DomainError):
            transition_probability(omega, LAMBDA)

    def test_invalid_coupling(self):
        with pytest.raises(DomainError):
            transition_probability(1.0, 0.0)


def test_amplitudes_scale_with_coupling_squared(fig1a):
    base = amplitudes(fig1a)
    # 0.2 is exactly twice 0.1, so lambda^2 quadruples without rounding
    doubled = amplitudes(fig1a.evolve(coupling=0.2))
    assert doubled.p_a == pytest.approx(4.0 * base.p_a, rel=1e-15)
    assert doubled.p_b == pytest.approx(4.0 * base.p_b, rel=1e-15)
    assert abs(doubled.corr_x - 4.0 * base.corr_x) <= 1e-15 * abs(doubled.corr_x)
    assert abs(doubled.corr_c - 4.0 * base.corr_c) <= 1e-15 * abs(doubled.corr_c)


@pytest.mark.parametrize("sep", [5e-5, 0.5, 2.0])
def test_equal_gaps_reduce_x_to_real_erfi(sep):
    omega = 0.7
    expected = (
        LAMBDA ** 2
        * math.exp(-omega * omega - sep * sep / 4.0)
        / (4.0 * math.sqrt(math.pi) * sep)
        * complex(-1.0, special.erfi(sep / 2.0))
    )
    value = correlation_x(pair(omega, omega, sep))
    assert abs(value - expected) <= 1e-12 * abs(expected)


def test_x_grows_as_the_detectors_approach(fig1a):
    magnitudes = [abs(correlation_x(fig1a.evolve(separation=sep))) for sep in (0.01, 0.1, 0.5, 1.0)]
    assert magnitudes == sorted(magnitudes, reverse=True)


def test_c_is_real(fig1a, rng):
    for sep in rng.uniform(1e-5, 6.0, 50):
        assert correlation_c(fig1a.evolve(separation=float(sep))).imag == 0.0


def test_c_is_symmetric_under_label_swap():
    forward = correlation_c(pair(0.5, 0.9, 0.7))
    backward = correlation_c(pair(0.9, 0.5, 0.7))
    assert forward.real == pytest.approx(backward.real, rel=1e-14)


def test_c_decays_algebraically():
    sep = 8.0
    p = pair(0.5, 0.6, sep)
    tail = LAMBDA ** 2 * math.exp(-((0.1) ** 2 + (1.1) ** 2) / 4.0) / (2.0 * math.pi * sep ** 2)
    assert correlation_c(p).real == pytest.approx(tail, rel=0.1)
    assert abs(correlation_x(pair(0.5, 0.6, 10.0))) < math.sqrt(
        transition_probability(0.5, LAMBDA) * transition_probability(0.6, LAMBDA)
    )


@pytest.mark.parametrize("gaps", [(0.5, 1.0), (1.0, 2.0), (0.8, 0.8), (1.2, 0.4)])
def test_small_separation_series_is_continuous(gaps):
    seam = settings.small_separation_threshold
    below = pair(*gaps, seam * (1.0 - 1e-12))
    above = pair(*gaps, seam * (1.0 + 1e-12))
    x_below = below.separation * correlation_x(below)
    x_above = above.separation * correlation_x(above)
    assert x_below.real == pytest.approx(x_above.real, rel=1e-8)
    # imaginary part of L*X is O(L)
    assert x_below.imag == pytest.approx(x_above.imag, rel=1e-8)
    assert correlation_c(below).real == pytest.approx(correlation_c(above).real, rel=1e-8)


@pytest.mark.parametrize("gaps", [(0.5, 1.0), (1.0, 2.0), (0.8, 0.8), (1.2, 0.4)])
def test_far_separation_form_is_continuous(gaps):
    seam = settings.large_separation_threshold
    below = pair(*gaps, seam * (1.0 - 1e-12))
    above = pair(*gaps, seam * (1.0 + 1e-12))
    x_below, x_above = correlation_x(below), correlation_x(above)
    assert abs(x_below - x_above) <= 1e-9 * abs(x_above)
    assert correlation_c(below).real == pytest.approx(correlation_c(above).real, rel=1e-9)


@pytest.mark.parametrize("sep", [60.0, 200.0, 1e4])
def test_far_separation_amplitudes_stay_finite(fig1a, sep):
    p = fig1a.evolve(separation=sep)
    amps = amplitudes(p)
    assert math.isfinite(amps.corr_x.real) and math.isfinite(amps.corr_x.imag)
    assert math.isfinite(amps.corr_c.real)
    assert 0.0 < abs(amps.corr_x) < math.sqrt(amps.p_a * amps.p_b)
    tail = LAMBDA ** 2 * math.exp(-(p.gap_difference ** 2 + p.gap_sum ** 2) / 4.0) / (2.0 * math.pi * sep ** 2)
    assert amps.corr_c.real == pytest.approx(tail, rel=5e-3)
    record = evaluate(p)
    assert record.regime == Regime.no_way
    assert record.concurrence == 0.0


def test_non_finite_amplitude_is_a_numerical_error(fig1a, monkeypatch):
    monkeypatch.setattr(harvest, "correlation_c", lambda p: complex(float("nan"), 0.0))
    with pytest.raises(NumericalError):
        amplitudes(fig1a)


def test_state_has_unit_trace(fig1a, fig1b):
    for p in (fig1a, fig1b, pair(0.1, 3.0, 2.5)):
        _, rho = perturbative_state(p)
        assert rho.trace == pytest.approx(1.0, abs=1e-15)
        assert rho.rho44 == 0.0


def test_vanishing_coupling_leaves_the_ground_state():
    _, rho = perturbative_state(pair(0.5, 1.0, 0.1, coupling=1e-9))
    assert rho.diagonal == pytest.approx((1.0, 0.0, 0.0, 0.0), abs=1e-15)
    result = evaluate(pair(0.5, 1.0, 0.1, coupling=1e-9))
    assert result.s_a_to_b < 1e-15 and result.s_b_to_a < 1e-15


def test_closed_form_matches_generic_x_state_measures(rng):
    for _ in range(10_000):
        omega_a = rng.uniform(0.1, 2.0)
        p = pair(omega_a, omega_a + rng.uniform(0.0, 2.0), rng.uniform(0.05, 5.0))
        closed = steering_closed_form(p)
        generic = steering(perturbative_state(p)[1])
        assert closed.s_a_to_b == pytest.approx(generic.s_a_to_b, abs=1e-12)
        assert closed.s_b_to_a == pytest.approx(generic.s_b_to_a, abs=1e-12)


def test_larger_gap_detector_is_steered_less():
    for omega_a, extra, sep in itertools.product(
        np.linspace(0.1, 2.0, 20), np.linspace(0.0, 2.0, 20), np.linspace(0.05, 3.0, 20)
    ):
        result = steering_closed_form(pair(float(omega_a), float(omega_a + extra), float(sep)))
        assert result.s_a_to_b >= result.s_b_to_a


def test_equal_gaps_have_no_asymmetry():
    for sep in (0.01, 0.05, 0.2):
        record = evaluate(pair(0.5, 0.5, sep))
        assert record.asymmetry == 0.0
        assert record.s_a_to_b == record.s_b_to_a


def test_concurrence_dies_at_large_separation(fig1a):
    assert concurrence_harvested(fig1a.evolve(separation=10.0)) == 0.0


def test_one_way_steering_with_entanglement(fig1a):
    record = evaluate(fig1a)
    assert record.regime == Regime.one_way_a_to_b
    assert record.s_b_to_a == 0.0
    assert record.s_a_to_b > 0.0
    assert record.concurrence > 0.0


def test_two_way_steering_close_by(fig1a):
    record = evaluate(fig1a.evolve(separation=0.02))
    assert record.regime == Regime.two_way
    assert record.s_a_to_b > record.s_b_to_a > 0.0


def test_signed_margins_clamp_to_measures(fig1a, fig1b):
    for p in (fig1a, fig1b, fig1a.evolve(separation=3.0)):
        margins = signed_margins(p)
        record = evaluate(p)
        assert max(0.0, margins[Measure.s_a_to_b]) == record.s_a_to_b
        assert max(0.0, margins[Measure.s_b_to_a]) == record.s_b_to_a
        assert 2.0 * max(0.0, margins[Measure.concurrence]) == record.concurrence


def test_large_coupling_warns(fig1a):
    with pytest.warns(PerturbativeValidityWarning):
        evaluate(fig1a.evolve(coupling=0.5))


def test_small_coupling_is_silent(fig1a):
    with warnings.catch_warnings():
        warnings.simplefilter("error", PerturbativeValidityWarning)
        evaluate(fig1a)
