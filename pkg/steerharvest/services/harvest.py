"""Closed-form O(lambda^2) state of two static detectors and its steering.

Everything is in sigma-units: gaps are Omega*sigma, the separation is L/sigma.
Below ``settings.small_separation_threshold`` the brackets of the X and C
amplitudes are replaced by their Taylor series in L, whose O(L^0) term is the
removable 0/0 limit of the closed form. From
``settings.large_separation_threshold`` on, each bracket is folded with its
exp(-L^2/4) envelope into the Faddeeva function w(-L/2 + i a), which stays
O(1/L) where the bracket alone would overflow.
"""

import logging
import math
import warnings
from typing import Dict, Tuple

from steerharvest.config import settings
from steerharvest.errors import DomainError, NumericalError
from steerharvest.models.schemas import (
    DetectorPairParams,
    EvalRecord,
    Measure,
    PerturbativeState,
    SteeringResult,
    XState,
)
from steerharvest.services.specfun import erf_complex, erfc_complex, erfc_real, erfi_complex, faddeeva
from steerharvest.services.xstate import clamped_sqrt, classify, steering_result, validate_xstate

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
SQRT3 = math.sqrt(3.0)
_X_WEIGHT = (1.0 + SQRT3) / 2.0
_C_WEIGHT = (1.0 - SQRT3) / 2.0


class PerturbativeValidityWarning(UserWarning):
    """The coupling is large enough for O(lambda^4) terms to matter."""


def _check_coupling(coupling: float) -> None:
    if not (coupling > 0 and math.isfinite(coupling)):
        raise DomainError(f"coupling must be positive and finite, got {coupling!r}")
    level = coupling * coupling / (4.0 * math.pi)
    if level > settings.perturbative_warning_level:
        warnings.warn(
            f"lambda^2/(4 pi) = {level:.3g} exceeds {settings.perturbative_warning_level:g}; "
            "second-order perturbation theory may be unreliable",
            PerturbativeValidityWarning,
            stacklevel=3,
        )


def transition_probability(omega: float, coupling: float) -> float:
    """Excitation probability of one detector with gap ``omega``."""
    if not (omega > 0 and math.isfinite(omega)):
        raise DomainError(
            f"omega must be positive and finite, got {omega!r} (limit at 0+ is lambda^2/(4 pi))"
        )
    _check_coupling(coupling)
    bracket = math.exp(-omega * omega) - SQRT_PI * omega * erfc_real(omega)
    return coupling * coupling * (bracket / (4.0 * math.pi))


def _x_bracket_over_l(q: float, sep: float) -> complex:
    """Bracket of X divided by L, with q = (Omega_B - Omega_A)/2."""
    if sep < settings.small_separation_threshold:
        # the erfi pair is 2 Re[e^{iqL} erfi(L/2 - iq)], odd in L
        erf_q = erf_complex(q).real
        gauss = math.exp(-q * q) / SQRT_PI
        slope = gauss + q * erf_q
        cubic = (1.0 - 2.0 * q * q) * gauss / 12.0 - q ** 3 * erf_q / 6.0
        real_pair = 2.0 * (slope + cubic * sep * sep)
        return complex(real_pair, 2.0 * math.cos(q * sep) / sep)
    phase = complex(math.cos(q * sep), math.sin(q * sep))
    bracket = (
        phase * erfi_complex(complex(sep / 2.0, -q))
        + phase.conjugate() * erfi_complex(complex(sep / 2.0, q))
        + 2j * math.cos(q * sep)
    )
    return bracket / sep


def _c_bracket_over_l(alpha: float, sep: float) -> float:
    """Bracket of C divided by L, with alpha = (Omega_A + Omega_B)/2."""
    if sep < settings.small_separation_threshold:
        tail = erfc_real(alpha)
        gauss = math.exp(-alpha * alpha) / SQRT_PI
        slope = gauss - alpha * tail
        cubic = alpha ** 3 * tail / 6.0 - (2.0 * alpha * alpha - 1.0) * gauss / 12.0
        return slope + cubic * sep * sep
    # Im[e^{i a L} erf(a + iL/2)] - sin(a L) == -Im[e^{i a L} erfc(a + iL/2)]
    phase = complex(math.cos(alpha * sep), math.sin(alpha * sep))
    return -(phase * erfc_complex(complex(alpha, sep / 2.0))).imag / sep


def _x_far(q: float, gap_sum: float, sep: float) -> complex:
    """Envelope times bracket over L for X, through w(-L/2 + i|q|)."""
    # the bracket is even in q; |q| keeps w in the upper half plane
    q = abs(q)
    gauss = math.exp(-(gap_sum * gap_sum + sep * sep) / 4.0)
    w = faddeeva(complex(-sep / 2.0, q))
    real_pair = 2.0 * math.sin(q * sep) * gauss - 2.0 * math.exp(-gap_sum * gap_sum / 4.0 - q * q) * w.imag
    return complex(real_pair, 2.0 * math.cos(q * sep) * gauss) / (8.0 * SQRT_PI * sep)


def _c_far(alpha: float, delta: float, sep: float) -> float:
    """Envelope times bracket over L for C, through w(-L/2 + i alpha)."""
    w = faddeeva(complex(-sep / 2.0, alpha))
    return -math.exp(-delta * delta / 4.0 - alpha * alpha) * w.imag / (4.0 * SQRT_PI * sep)


def correlation_x(p: DetectorPairParams) -> complex:
    sep = p.separation
    q = p.gap_difference / 2.0
    if sep >= settings.large_separation_threshold:
        weighted = _x_far(q, p.gap_sum, sep)
    else:
        envelope = math.exp(-(p.gap_sum ** 2 + sep * sep) / 4.0) / (8.0 * SQRT_PI)
        weighted = envelope * _x_bracket_over_l(q, sep)
    return p.coupling * p.coupling * (1j * weighted)


def correlation_c(p: DetectorPairParams) -> complex:
    sep = p.separation
    delta = p.gap_difference
    alpha = p.gap_sum / 2.0
    if sep >= settings.large_separation_threshold:
        weighted = _c_far(alpha, delta, sep)
    else:
        envelope = math.exp(-(sep * sep + delta * delta) / 4.0) / (4.0 * SQRT_PI)
        weighted = envelope * _c_bracket_over_l(alpha, sep)
    return complex(p.coupling * p.coupling * weighted, 0.0)


def amplitudes(p: DetectorPairParams) -> PerturbativeState:
    _check_coupling(p.coupling)
    p_a = transition_probability(p.omega_a, p.coupling)
    p_b = transition_probability(p.omega_b, p.coupling)
    corr_x = correlation_x(p)
    corr_c = correlation_c(p)
    if not all(math.isfinite(v) for v in (p_a, p_b, corr_x.real, corr_x.imag, corr_c.real)):
        raise NumericalError(
            f"non-finite amplitude at {p.model_dump()}: P_A={p_a!r} P_B={p_b!r} X={corr_x!r} C={corr_c!r}"
        )
    return PerturbativeState(p_a=p_a, p_b=p_b, corr_x=corr_x, corr_c=corr_c)


def perturbative_state(p: DetectorPairParams) -> Tuple[PerturbativeState, XState]:
    amps = amplitudes(p)
    rho = XState(
        rho11=1.0 - amps.p_a - amps.p_b,
        rho22=amps.p_b,
        rho33=amps.p_a,
        rho44=0.0,
        rho14=amps.corr_x,
        rho23=amps.corr_c,
    )
    return amps, validate_xstate(rho)


def _closed_form_margins(amps: PerturbativeState) -> Tuple[float, float]:
    p_a, p_b = amps.p_a, amps.p_b
    product = p_a * p_b
    affine_a = 0.5 * p_a - 0.5 * p_a * p_a
    affine_b = 0.5 * p_b - 0.5 * p_b * p_b
    abs_x = abs(amps.corr_x)
    abs_c = abs(amps.corr_c)
    b_to_a = max(
        abs_x - clamped_sqrt(_X_WEIGHT * product + affine_a, "X branch, B->A"),
        abs_c - clamped_sqrt(_C_WEIGHT * product + affine_a, "C branch, B->A"),
    )
    a_to_b = max(
        abs_x - clamped_sqrt(_X_WEIGHT * product + affine_b, "X branch, A->B"),
        abs_c - clamped_sqrt(_C_WEIGHT * product + affine_b, "C branch, A->B"),
    )
    return a_to_b, b_to_a


def _concurrence_margin(amps: PerturbativeState) -> float:
    # only the |rho14| branch: rho44 = 0 is a truncation artifact
    return abs(amps.corr_x) - clamped_sqrt(amps.p_a * amps.p_b, "P_A*P_B")


def steering_closed_form(p: DetectorPairParams) -> SteeringResult:
    a_to_b, b_to_a = _closed_form_margins(amplitudes(p))
    return steering_result(max(0.0, a_to_b), max(0.0, b_to_a))


def concurrence_harvested(p: DetectorPairParams) -> float:
    return 2.0 * max(0.0, _concurrence_margin(amplitudes(p)))


def signed_margins(p: DetectorPairParams) -> Dict[Measure, float]:
    """Signed expressions whose positive part is each measure (up to the factor 2 of C)."""
    amps = amplitudes(p)
    a_to_b, b_to_a = _closed_form_margins(amps)
    return {
        Measure.s_a_to_b: a_to_b,
        Measure.s_b_to_a: b_to_a,
        Measure.concurrence: _concurrence_margin(amps),
    }


def evaluate(p: DetectorPairParams) -> EvalRecord:
    amps = amplitudes(p)
    a_to_b, b_to_a = _closed_form_margins(amps)
    s_a_to_b = max(0.0, a_to_b)
    s_b_to_a = max(0.0, b_to_a)
    return EvalRecord(
        p_a=amps.p_a,
        p_b=amps.p_b,
        abs_x=abs(amps.corr_x),
        abs_c=abs(amps.corr_c),
        s_a_to_b=s_a_to_b,
        s_b_to_a=s_b_to_a,
        asymmetry=abs(s_a_to_b - s_b_to_a),
        concurrence=2.0 * max(0.0, _concurrence_margin(amps)),
        regime=classify(s_a_to_b, s_b_to_a),
    )
