"""Sweeps, sudden-death points, asymmetry peaks and regime bookkeeping."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy import optimize

from steerharvest.config import settings
from steerharvest.errors import DomainError, NoPeakError, NoSignChangeError, SteerHarvestError
from steerharvest.models.schemas import (
    AxisName,
    DeathPoint,
    DetectorPairParams,
    Measure,
    OutputColumn,
    PeakResult,
    Regime,
    RegimeTransition,
    SteeringResult,
    SweepRow,
    SweepSpec,
    SweepTable,
)
from steerharvest.services import xstate
from steerharvest.services.harvest import evaluate, signed_margins

logger = logging.getLogger(__name__)

PEAK_GRID_POINTS = 200
PEAK_TOLERANCE = 1e-8
DEATH_TOLERANCE = 1e-9
FLAT_PEAK_LEVEL = 1e-15


def point_params(
    fixed: DetectorPairParams, coords: Dict[str, float], gap_ratio: Optional[float] = None
) -> DetectorPairParams:
    """Apply axis values to the fixed parameters.

    A gap ratio, swept or held, is applied last so that omega_b follows omega_a.
    """
    direct = {name: value for name, value in coords.items() if name != AxisName.gap_ratio.value}
    params = fixed.evolve(**direct) if direct else fixed
    ratio = coords.get(AxisName.gap_ratio.value, gap_ratio)
    if ratio is not None:
        params = params.evolve(omega_b=params.omega_a * (1.0 + ratio))
    return params


def _row(spec: SweepSpec, coords: Dict[str, float]) -> SweepRow:
    try:
        record = evaluate(point_params(spec.fixed, coords, spec.gap_ratio))
    except (SteerHarvestError, ValidationError) as exc:
        logger.warning("Sweep point %s failed: %s", coords, exc)
        return SweepRow(coords=coords, error=f"{type(exc).__name__}: {exc}")
    values: Dict[str, object] = {}
    for column in spec.outputs:
        value = getattr(record, column.value)
        values[column.value] = value.value if column == OutputColumn.regime else value
    return SweepRow(coords=coords, values=values)


def grid_coords(spec: SweepSpec) -> List[Dict[str, float]]:
    first = [float(x) for x in spec.axis1.values()]
    if spec.axis2 is None:
        return [{spec.axis1.name.value: x} for x in first]
    second = [float(y) for y in spec.axis2.values()]
    return [{spec.axis1.name.value: x, spec.axis2.name.value: y} for x in first for y in second]


def sweep(spec: SweepSpec) -> SweepTable:
    coords = grid_coords(spec)
    logger.info("Sweep over %s: %d points", [a.name.value for a in _axes(spec)], len(coords))
    with ThreadPoolExecutor(max_workers=settings.worker_count()) as pool:
        rows = list(pool.map(lambda c: _row(spec, c), coords))
    failed = sum(1 for row in rows if row.error)
    if failed:
        logger.warning("Sweep finished with %d failed points", failed)
    return SweepTable(axis_names=[a.name.value for a in _axes(spec)], outputs=list(spec.outputs), rows=rows)


def _axes(spec: SweepSpec):
    return [spec.axis1] if spec.axis2 is None else [spec.axis1, spec.axis2]


def classify(result: SteeringResult) -> Regime:
    return xstate.classify(result.s_a_to_b, result.s_b_to_a)


def _margin(
    measure: Measure, fixed: DetectorPairParams, axis: AxisName, x: float, gap_ratio: Optional[float] = None
) -> float:
    return signed_margins(point_params(fixed, {axis.value: x}, gap_ratio))[measure]


def _measure_value(measure: Measure, margin: float) -> float:
    clamped = max(0.0, margin)
    return 2.0 * clamped if measure == Measure.concurrence else clamped


def find_death_point(
    measure: Measure,
    fixed: DetectorPairParams,
    axis: AxisName,
    bracket: Tuple[float, float],
    gap_ratio: Optional[float] = None,
) -> DeathPoint:
    """Bisect the signed pre-clamp expression of ``measure`` along ``axis``.

    The clamped measure is flat past death, so the margin g is bisected
    instead. g is only piecewise smooth (branch switches), hence plain
    bisection.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise DomainError(f"death bracket must satisfy lo < hi, got [{lo!r}, {hi!r}]")
    g_lo = _margin(measure, fixed, axis, lo, gap_ratio)
    g_hi = _margin(measure, fixed, axis, hi, gap_ratio)
    if g_lo * g_hi > 0 or (g_lo == 0 and g_hi == 0):
        raise NoSignChangeError(lo, hi, g_lo, g_hi)

    scale = max(1.0, abs(lo), abs(hi))
    xtol = 0.5 * DEATH_TOLERANCE * scale
    rtol = 4.0 * np.finfo(float).eps
    if g_lo == 0:
        root = lo
    elif g_hi == 0:
        root = hi
    else:
        root = optimize.bisect(lambda x: _margin(measure, fixed, axis, x, gap_ratio), lo, hi, xtol=xtol, rtol=rtol)
    width = xtol + rtol * abs(root)

    step = 10.0 * width
    left = _margin(measure, fixed, axis, max(lo, root - step), gap_ratio)
    right = _margin(measure, fixed, axis, min(hi, root + step), gap_ratio)
    positive_left = g_lo > 0
    near, far = (left, right) if positive_left else (right, left)
    verified = near > 0 and far <= 0
    if not verified:
        logger.warning("Death point of %s at %s=%.12g failed the post-hoc check", measure.value, axis.value, root)
    logger.info("Death point of %s along %s: %.12g (width %.2e)", measure.value, axis.value, root, width)
    return DeathPoint(
        measure=measure,
        axis=axis,
        location=root,
        bracket_width=width,
        near_value=_measure_value(measure, near),
        far_value=_measure_value(measure, far),
        verified=verified,
    )


def _asymmetry(fixed: DetectorPairParams, axis: AxisName, x: float, gap_ratio: Optional[float] = None) -> float:
    return evaluate(point_params(fixed, {axis.value: x}, gap_ratio)).asymmetry


def find_asymmetry_peak(
    fixed: DetectorPairParams,
    axis: AxisName = AxisName.omega_b,
    search_range: Tuple[float, float] = (0.5, 4.0),
    grid_points: int = PEAK_GRID_POINTS,
    gap_ratio: Optional[float] = None,
) -> PeakResult:
    """Argmax of the steering asymmetry: coarse grid, then golden section on the best cell.

    The peak usually sits on a kink (the B->A death point), so no derivative
    information is used.
    """
    lo, hi = float(search_range[0]), float(search_range[1])
    if hi < lo:
        raise DomainError(f"peak range must satisfy lo <= hi, got [{lo!r}, {hi!r}]")
    if hi - lo <= PEAK_TOLERANCE:
        value = _asymmetry(fixed, axis, lo, gap_ratio)
        if value < FLAT_PEAK_LEVEL:
            raise NoPeakError(value)
        return PeakResult(axis=axis, location=lo, peak_value=value, tolerance=hi - lo)

    grid = np.linspace(lo, hi, max(grid_points, PEAK_GRID_POINTS))
    values = np.array([_asymmetry(fixed, axis, float(x), gap_ratio) for x in grid])
    k = int(np.argmax(values))
    best = float(values[k])
    if best < FLAT_PEAK_LEVEL:
        raise NoPeakError(best)
    spacing = float(grid[1] - grid[0])
    if k == 0 or k == grid.size - 1 or not (values[k] > values[k - 1] and values[k] > values[k + 1]):
        logger.info("Asymmetry peak on the grid at %s=%.6g", axis.value, grid[k])
        return PeakResult(axis=axis, location=float(grid[k]), peak_value=best, tolerance=spacing)

    centre = float(grid[k])
    rel_tol = PEAK_TOLERANCE / (2.0 * max(abs(centre), 1.0))
    location = float(
        optimize.golden(
            lambda x: -_asymmetry(fixed, axis, float(x), gap_ratio),
            brack=(float(grid[k - 1]), centre, float(grid[k + 1])),
            tol=rel_tol,
        )
    )
    peak_value = _asymmetry(fixed, axis, location, gap_ratio)
    if peak_value < best:
        location, peak_value = centre, best
    tolerance = rel_tol * 2.0 * max(abs(location), 1.0)
    logger.info("Asymmetry peak at %s=%.10g (value %.6g)", axis.value, location, peak_value)
    return PeakResult(axis=axis, location=location, peak_value=peak_value, tolerance=tolerance)


def harvesting_range(
    measure: Measure,
    fixed: DetectorPairParams,
    axis: AxisName = AxisName.separation,
    bracket: Tuple[float, float] = (0.01, 1.0),
    gap_ratio: Optional[float] = None,
) -> Tuple[float, float]:
    """Interval from the bracket's lower end to the sudden death of ``measure``."""
    lo, hi = float(bracket[0]), float(bracket[1])
    g_lo = _margin(measure, fixed, axis, lo, gap_ratio)
    if g_lo <= 0:
        raise NoSignChangeError(lo, hi, g_lo, _margin(measure, fixed, axis, hi, gap_ratio))
    return lo, find_death_point(measure, fixed, axis, (lo, hi), gap_ratio).location


def compare_ranges(
    fixed: DetectorPairParams, bracket: Tuple[float, float] = (0.01, 10.0)
) -> Dict[Measure, DeathPoint]:
    """Death points in the separation of both steering directions and of the harvested concurrence."""
    return {measure: find_death_point(measure, fixed, AxisName.separation, bracket) for measure in Measure}


def regime_transitions(table: SweepTable) -> List[RegimeTransition]:
    if OutputColumn.regime not in table.outputs:
        raise DomainError("regime_transitions needs the regime column in the sweep")
    axis = table.axis_names[0]
    held_names = table.axis_names[1:]
    lines: Dict[Tuple[float, ...], List[SweepRow]] = {}
    for row in table.rows:
        key = tuple(row.coords[name] for name in held_names)
        lines.setdefault(key, []).append(row)

    transitions: List[RegimeTransition] = []
    for key, rows in lines.items():
        previous: Optional[SweepRow] = None
        for row in rows:
            if row.error:
                continue
            if previous is not None and previous.values["regime"] != row.values["regime"]:
                transitions.append(
                    RegimeTransition(
                        axis=axis,
                        before=previous.coords[axis],
                        after=row.coords[axis],
                        from_regime=Regime(previous.values["regime"]),
                        to_regime=Regime(row.values["regime"]),
                        held=dict(zip(held_names, key)),
                    )
                )
            previous = row
    return transitions
