"""Concurrence and EPR-steering measures of two-qubit X states.

Steering from Bob to Alice is witnessed by the entanglement of
tau_AB = rho/sqrt(3) + (1 - 1/sqrt(3)) rho_A (x) I/2, and steering from Alice
to Bob by the analogous state built on rho_B. For X states both reduce to
closed forms in terms of the J-terms below.
"""

import logging
import math

from steerharvest.errors import NegativeDiagonalError, NegativeRadicandError, TraceError
from steerharvest.models.schemas import Direction, JTerms, Regime, SteeringResult, XState

logger = logging.getLogger(__name__)

TRACE_TOLERANCE = 1e-12
DIAGONAL_TOLERANCE = 1e-12
RADICAND_CLAMP = 1e-15

SQRT3 = math.sqrt(3.0)
_MIX = (3.0 - SQRT3) / 6.0
_LOW = (2.0 - SQRT3) / 2.0
_HIGH = (2.0 + SQRT3) / 2.0


def validate_xstate(candidate: XState) -> XState:
    trace = candidate.trace
    if abs(trace - 1.0) > TRACE_TOLERANCE:
        raise TraceError(trace)
    for name, value in zip(("rho11", "rho22", "rho33", "rho44"), candidate.diagonal):
        if value < -DIAGONAL_TOLERANCE:
            raise NegativeDiagonalError(name, value)
        if value > 1.0 + DIAGONAL_TOLERANCE:
            raise NegativeDiagonalError(name, value)
    return candidate


def clamped_sqrt(radicand: float, label: str) -> float:
    """sqrt with float noise below zero clamped; anything beyond -1e-15 raises."""
    if radicand < 0.0:
        if radicand < -RADICAND_CLAMP:
            raise NegativeRadicandError(label, radicand)
        return 0.0
    return math.sqrt(radicand)


def concurrence(rho: XState) -> float:
    validate_xstate(rho)
    r_outer = clamped_sqrt(rho.rho22 * rho.rho33, "rho22*rho33")
    r_inner = clamped_sqrt(rho.rho11 * rho.rho44, "rho11*rho44")
    return 2.0 * max(0.0, abs(rho.rho14) - r_outer, abs(rho.rho23) - r_inner)


def witness_state(rho: XState, direction: Direction) -> XState:
    """tau state whose entanglement witnesses steering in ``direction``.

    BtoA mixes in rho_A (x) I/2, AtoB mixes in I/2 (x) rho_B.
    """
    validate_xstate(rho)
    w = 1.0 / SQRT3
    if direction == Direction.b_to_a:
        f = _MIX * (rho.rho11 + rho.rho22)
        h = _MIX * (rho.rho33 + rho.rho44)
        diagonal = (w * rho.rho11 + f, w * rho.rho22 + f, w * rho.rho33 + h, w * rho.rho44 + h)
    else:
        # rho_B = diag(rho11 + rho33, rho22 + rho44)
        f = _MIX * (rho.rho11 + rho.rho33)
        h = _MIX * (rho.rho22 + rho.rho44)
        diagonal = (w * rho.rho11 + f, w * rho.rho22 + h, w * rho.rho33 + f, w * rho.rho44 + h)
    tau = XState(
        rho11=diagonal[0],
        rho22=diagonal[1],
        rho33=diagonal[2],
        rho44=diagonal[3],
        rho14=w * rho.rho14,
        rho23=w * rho.rho23,
    )
    return validate_xstate(tau)


def j_terms(rho: XState) -> JTerms:
    validate_xstate(rho)
    r11, r22, r33, r44 = rho.diagonal
    mixed = 0.25 * (r11 + r44) * (r22 + r33)
    return JTerms(
        j_a=_LOW * r11 * r44 + _HIGH * r22 * r33 + mixed,
        j_b=0.25 * (r11 - r44) * (r22 - r33),
        j_c=_HIGH * r11 * r44 + _LOW * r22 * r33 + mixed,
    )


def classify(s_a_to_b: float, s_b_to_a: float) -> Regime:
    if s_a_to_b > 0.0 and s_b_to_a > 0.0:
        return Regime.two_way
    if s_a_to_b > 0.0:
        return Regime.one_way_a_to_b
    if s_b_to_a > 0.0:
        return Regime.one_way_b_to_a
    return Regime.no_way


def steering_result(s_a_to_b: float, s_b_to_a: float) -> SteeringResult:
    return SteeringResult(
        s_a_to_b=s_a_to_b,
        s_b_to_a=s_b_to_a,
        asymmetry=abs(s_a_to_b - s_b_to_a),
        regime=classify(s_a_to_b, s_b_to_a),
    )


def steering_margins(rho: XState) -> tuple:
    """Signed (A->B, B->A) expressions before the max{0, .} clamp."""
    j = j_terms(rho)
    abs14 = abs(rho.rho14)
    abs23 = abs(rho.rho23)
    b_to_a = max(
        abs14 - clamped_sqrt(j.j_a - j.j_b, "J_a-J_b"),
        abs23 - clamped_sqrt(j.j_c - j.j_b, "J_c-J_b"),
    )
    a_to_b = max(
        abs14 - clamped_sqrt(j.j_a + j.j_b, "J_a+J_b"),
        abs23 - clamped_sqrt(j.j_c + j.j_b, "J_c+J_b"),
    )
    return a_to_b, b_to_a


def steering(rho: XState) -> SteeringResult:
    a_to_b, b_to_a = steering_margins(rho)
    return steering_result(max(0.0, a_to_b), max(0.0, b_to_a))
