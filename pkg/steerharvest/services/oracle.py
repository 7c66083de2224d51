"""Quadrature oracle for the O(lambda^2) amplitudes.

The double-time integrals are evaluated from the epsilon-regularized
Wightman function and extrapolated to epsilon -> 0. With u = tau - tau' and
v = (tau + tau')/2 the Gaussian switching makes the v-integral elementary, so
each amplitude reduces to one integral over u in [-2h, 2h]. That integral is
done with composite Gauss-Legendre panels graded geometrically towards the
light-cone points u = +-L (and u = 0 for the single-detector term), where the
regularized kernel has poles at distance epsilon from the real axis.

``raw_double_integral`` keeps the literal two-dimensional form at a single
epsilon and is only used to check the reduction.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from steerharvest.config import settings
from steerharvest.errors import ConvergenceError, DomainError, SteerHarvestError
from steerharvest.models.schemas import (
    Amplitude,
    AmplitudeCheck,
    DetectorPairParams,
    QuadratureResult,
    QuadratureSpec,
    VerificationPoint,
    VerificationReport,
)
from steerharvest.services.harvest import correlation_c, correlation_x, transition_probability

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
_WIGHTMAN_SCALE = 1.0 / (4.0 * math.pi ** 2)

Kernel = Callable[[np.ndarray, float], np.ndarray]


class SwitchingProfile:
    """Gaussian switching chi(tau) = exp(-tau^2/2) in sigma-units."""

    def __call__(self, tau):
        return np.exp(-0.5 * np.square(tau))

    def pair_weight(self, u: np.ndarray, mismatch: float) -> np.ndarray:
        """Integral over v of chi(v + u/2) chi(v - u/2) exp(-i mismatch v)."""
        return SQRT_PI * math.exp(-mismatch * mismatch / 4.0) * np.exp(-0.25 * np.square(u))


SWITCHING = SwitchingProfile()


def wightman(dt, dx, eps: float):
    """-(1/4 pi^2) / ((dt - i eps)^2 - dx^2), vectorized over dt and dx."""
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError(f"eps must be positive; the unregularized kernel is distributional (got {eps!r})")
    shifted = np.asarray(dt, dtype=float) - 1j * eps
    value = -_WIGHTMAN_SCALE / (np.square(shifted) - np.square(np.asarray(dx, dtype=float)))
    return value.item() if value.ndim == 0 else value


class _Reduction(NamedTuple):
    prefactor: float
    mismatch: float
    rate: float
    kernel: Kernel
    centers: Tuple[float, ...]


def _transition_reduction(omega: float, coupling: float) -> _Reduction:
    return _Reduction(
        prefactor=coupling * coupling,
        mismatch=0.0,
        rate=omega,
        kernel=lambda u, eps: wightman(u, 0.0, eps),
        centers=(0.0,),
    )


def _reduction(amplitude: Amplitude, p: DetectorPairParams) -> _Reduction:
    sep = p.separation
    scale = p.coupling * p.coupling
    if amplitude == Amplitude.p_a:
        return _transition_reduction(p.omega_a, p.coupling)
    if amplitude == Amplitude.p_b:
        return _transition_reduction(p.omega_b, p.coupling)
    if amplitude == Amplitude.corr_c:
        return _Reduction(
            prefactor=scale,
            mismatch=p.gap_difference,
            rate=p.gap_sum / 2.0,
            kernel=lambda u, eps: wightman(u, sep, eps),
            centers=(-sep, sep),
        )
    if amplitude == Amplitude.corr_x:
        # theta-split: both orderings collapse onto the |u| kernel
        kernel: Kernel = lambda u, eps: wightman(-np.abs(u), sep, eps)
    else:
        kernel = lambda u, eps: wightman(u, sep, eps)
    return _Reduction(
        prefactor=-scale,
        mismatch=p.gap_sum,
        rate=-p.gap_difference / 2.0,
        kernel=kernel,
        centers=(-sep, 0.0, sep),
    )


@lru_cache(maxsize=None)
def _reference_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(nodes)


def _panel_edges(centers: Sequence[float], eps: float, limit: float) -> np.ndarray:
    points = {-limit, limit}
    for center in centers:
        if not -limit < center < limit:
            continue
        points.add(center)
        step = eps / 4.0
        while step < 2.0 * limit:
            for x in (center - step, center + step):
                if -limit < x < limit:
                    points.add(x)
            step *= 2.0
    return np.array(sorted(points))


def _composite_rule(edges: np.ndarray, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = _reference_rule(nodes)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    half = (hi - lo) / 2.0
    return ((lo + hi) / 2.0 + half * x).ravel(), (half * w).ravel()


def _integrate_once(reduction: _Reduction, eps: float, nodes: int, half_width: float) -> complex:
    edges = _panel_edges(reduction.centers, eps, 2.0 * half_width)
    u, weights = _composite_rule(edges, nodes)
    integrand = (
        SWITCHING.pair_weight(u, reduction.mismatch)
        * np.exp(-1j * reduction.rate * u)
        * reduction.kernel(u, eps)
    )
    return complex(reduction.prefactor * np.sum(weights * integrand))


def _extrapolate(levels: Sequence[complex], epsilons: Sequence[float], order: int) -> Tuple[complex, float]:
    """Neville polynomial extrapolation of I(eps) to eps = 0.

    Returns the order-``order`` value from the smallest epsilons and its
    relative distance to the order-1 lower estimate.
    """
    table: List[List[complex]] = []
    for k, (value, eps_k) in enumerate(zip(levels, epsilons)):
        row = [value]
        for j in range(1, min(k, order) + 1):
            upper = row[j - 1]
            lower = table[k - 1][j - 1]
            row.append(upper + (upper - lower) * eps_k / (epsilons[k - j] - eps_k))
        table.append(row)
    best = table[-1][order]
    previous = table[-1][order - 1]
    residual = abs(best - previous) / max(abs(best), 1e-300)
    return best, residual


def _run(reduction: _Reduction, spec: QuadratureSpec, label: str) -> QuadratureResult:
    levels = [_integrate_once(reduction, eps, spec.nodes, spec.half_width) for eps in spec.epsilons]
    value, residual = _extrapolate(levels, spec.epsilons, spec.extrapolation_order)
    logger.debug("quadrature %s levels=%s value=%s residual=%.3g", label, levels, value, residual)
    if not math.isfinite(residual) or residual > 10.0 * spec.tolerance:
        raise ConvergenceError(
            f"{label}: epsilon extrapolation residual {residual:.3g} exceeds {10.0 * spec.tolerance:.3g}",
            diagnostics={
                "amplitude": label,
                "residual": residual,
                "levels": [(z.real, z.imag) for z in levels],
                "epsilons": list(spec.epsilons),
            },
        )
    return QuadratureResult(value=value, residual=residual, levels=levels, epsilons=spec.epsilons)


def integrate_amplitude(
    amplitude: Amplitude, p: DetectorPairParams, spec: Optional[QuadratureSpec] = None
) -> QuadratureResult:
    return _run(_reduction(amplitude, p), spec or QuadratureSpec(), amplitude.value)


def single_epsilon_integral(
    amplitude: Amplitude, p: DetectorPairParams, eps: float, nodes: int = 64, half_width: float = 8.0
) -> complex:
    """Reduced one-dimensional integral at fixed epsilon, without extrapolation."""
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError(f"eps must be positive, got {eps!r}")
    return _integrate_once(_reduction(amplitude, p), eps, nodes, half_width)


def quad_transition_probability(omega: float, coupling: float, spec: Optional[QuadratureSpec] = None) -> float:
    if not (omega > 0 and math.isfinite(omega)):
        raise DomainError(f"omega must be positive and finite, got {omega!r}")
    if not (coupling > 0 and math.isfinite(coupling)):
        raise DomainError(f"coupling must be positive and finite, got {coupling!r}")
    result = _run(_transition_reduction(omega, coupling), spec or QuadratureSpec(), "transition_probability")
    return result.value.real


def quad_correlation_c(p: DetectorPairParams, spec: Optional[QuadratureSpec] = None) -> complex:
    return integrate_amplitude(Amplitude.corr_c, p, spec).value


def quad_correlation_x(
    p: DetectorPairParams, spec: Optional[QuadratureSpec] = None, time_ordered: bool = True
) -> complex:
    """X amplitude; ``time_ordered=False`` drops the theta-split and keeps W(x_A, x_B) everywhere."""
    amplitude = Amplitude.corr_x if time_ordered else Amplitude.corr_x_unordered
    return integrate_amplitude(amplitude, p, spec).value


def _inner_rule(lo: np.ndarray, hi: np.ndarray, panels: int, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = _reference_rule(nodes)
    fractions = np.arange(panels + 1) / panels
    edges = lo[:, None] + (hi - lo)[:, None] * fractions[None, :]
    a = edges[:, :-1, None]
    b = edges[:, 1:, None]
    half = (b - a) / 2.0
    points = ((a + b) / 2.0 + half * x).reshape(lo.size, -1)
    weights = (half * w).reshape(lo.size, -1)
    return points, weights


def raw_double_integral(
    amplitude: Amplitude,
    p: DetectorPairParams,
    eps: float,
    half_width: float = 8.0,
    panels: int = 16,
    nodes: int = 32,
) -> complex:
    """Literal double-time integral over [-h, h]^2 at one epsilon.

    The time-ordered X term is integrated over its two triangles separately,
    each with the inner variable running from the diagonal.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError(f"eps must be positive, got {eps!r}")
    h = half_width
    sep = p.separation
    scale = p.coupling * p.coupling
    tau, tau_weights = _composite_rule(np.linspace(-h, h, panels + 1), nodes)
    t = tau[:, None]

    if amplitude in (Amplitude.p_a, Amplitude.p_b):
        omega = p.omega_a if amplitude == Amplitude.p_a else p.omega_b
        phase = lambda s: np.exp(-1j * omega * (t - s))
        regions = [(-h, h, lambda s: wightman(t - s, 0.0, eps))]
    elif amplitude == Amplitude.corr_c:
        phase = lambda s: np.exp(-1j * (p.omega_a * t - p.omega_b * s))
        regions = [(-h, h, lambda s: wightman(t - s, sep, eps))]
    else:
        scale = -scale
        phase = lambda s: np.exp(-1j * (p.omega_a * t + p.omega_b * s))
        if amplitude == Amplitude.corr_x:
            regions = [
                ("diag", h, lambda s: wightman(t - s, sep, eps)),
                (-h, "diag", lambda s: wightman(s - t, sep, eps)),
            ]
        else:
            regions = [(-h, h, lambda s: wightman(t - s, sep, eps))]

    total = 0j
    for lower, upper, kernel in regions:
        lo = tau if lower == "diag" else np.full_like(tau, lower)
        hi = tau if upper == "diag" else np.full_like(tau, upper)
        s, s_weights = _inner_rule(lo, hi, panels, nodes)
        values = SWITCHING(t) * SWITCHING(s) * phase(s) * kernel(s)
        total += complex(np.sum(tau_weights * np.sum(s_weights * values, axis=1)))
    return scale * total


def panel_points(panel: str = "default", coupling: Optional[float] = None) -> List[DetectorPairParams]:
    if panel != "default":
        raise DomainError(f"unknown verification panel {panel!r}; available: default")
    lam = settings.default_coupling if coupling is None else coupling
    return [
        DetectorPairParams.from_gap_ratio(omega_a, ratio, sep, lam)
        for omega_a in (0.5, 1.2)
        for ratio in (0.0, 0.5)
        for sep in (0.5, 1.0, 2.0)
    ]


def _compare(name: str, compared: str, closed: complex, result: QuadratureResult, tolerance: float) -> AmplitudeCheck:
    closed = complex(closed)
    quad = result.value
    error = abs(closed - quad) / abs(closed)
    return AmplitudeCheck(
        name=name,
        compared=compared,
        closed_form=(closed.real, closed.imag),
        quadrature=(quad.real, quad.imag),
        relative_error=error,
        residual=result.residual,
        passed=error <= tolerance,
    )


def verify_point(p: DetectorPairParams, spec: QuadratureSpec, tolerance: float) -> VerificationPoint:
    point = VerificationPoint(
        omega_a=p.omega_a, omega_b=p.omega_b, separation=p.separation, coupling=p.coupling
    )
    try:
        point.checks = [
            _compare("p_a", "complex", transition_probability(p.omega_a, p.coupling),
                     integrate_amplitude(Amplitude.p_a, p, spec), tolerance),
            _compare("p_b", "complex", transition_probability(p.omega_b, p.coupling),
                     integrate_amplitude(Amplitude.p_b, p, spec), tolerance),
            _compare("corr_c", "complex", correlation_c(p),
                     integrate_amplitude(Amplitude.corr_c, p, spec), tolerance),
            # the theta-split integral is i times the closed-form X
            _compare("corr_x", "i*closed", 1j * correlation_x(p),
                     integrate_amplitude(Amplitude.corr_x, p, spec), tolerance),
        ]
    except SteerHarvestError as exc:
        logger.warning("Oracle point %s failed: %s", p.model_dump(), exc)
        point.error = f"{type(exc).__name__}: {exc}"
        point.passed = False
        return point
    point.passed = all(check.passed for check in point.checks)
    logger.info(
        "Oracle point omega_a=%g omega_b=%g sep=%g passed=%s",
        p.omega_a, p.omega_b, p.separation, point.passed,
    )
    return point


def verify_panel(
    panel: str = "default",
    spec: Optional[QuadratureSpec] = None,
    tolerance: Optional[float] = None,
    coupling: Optional[float] = None,
) -> VerificationReport:
    spec = spec or QuadratureSpec()
    tol = settings.oracle_tolerance if tolerance is None else tolerance
    points = panel_points(panel, coupling)
    logger.info("Verifying panel %s (%d points, tolerance %g)", panel, len(points), tol)
    with ThreadPoolExecutor(max_workers=settings.worker_count()) as pool:
        results = list(pool.map(lambda p: verify_point(p, spec, tol), points))
    report = VerificationReport(
        panel=panel,
        tolerance=tol,
        points=results,
        passed=all(point.passed for point in results),
    )
    logger.info("Panel %s passed=%s", panel, report.passed)
    return report
