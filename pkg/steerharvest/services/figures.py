"""Data behind the steering-harvesting figures, with the caption parameters as defaults."""

import logging
from typing import Dict, List, Optional

from steerharvest.config import settings
from steerharvest.errors import DomainError
from steerharvest.models.schemas import (
    AxisName,
    DetectorPairParams,
    FigurePreset,
    SweepAxis,
    SweepSpec,
    Table,
)
from steerharvest.services.analysis import sweep

logger = logging.getLogger(__name__)

AXIS_LABELS = {
    AxisName.separation: "L_over_sigma",
    AxisName.omega_a: "omega_a",
    AxisName.omega_b: "omega_b",
    AxisName.gap_ratio: "gap_ratio",
}

PRESETS: Dict[str, FigurePreset] = {
    "fig1": FigurePreset(
        name="fig1",
        description="steering against separation, gap difference equal to omega_a",
        axis=AxisName.separation,
        lo=0.01,
        hi=0.3,
        count=291,
        cases=[{"omega_a": 0.5, "gap_ratio": 1.0}, {"omega_a": 1.0, "gap_ratio": 1.0}],
        case_columns=["omega_a", "omega_b"],
    ),
    "fig2": FigurePreset(
        name="fig2",
        description="steering against separation for several gap differences",
        axis=AxisName.separation,
        lo=0.01,
        hi=0.3,
        count=291,
        cases=[
            {"omega_a": 0.5, "gap_ratio": 0.0},
            {"omega_a": 0.5, "gap_ratio": 0.2},
            {"omega_a": 0.5, "gap_ratio": 0.6},
            {"omega_a": 1.2, "gap_ratio": 0.0},
            {"omega_a": 1.2, "gap_ratio": 0.25},
            {"omega_a": 1.2, "gap_ratio": 0.5},
        ],
        case_columns=["omega_a", "gap_ratio", "omega_b"],
    ),
    "fig3": FigurePreset(
        name="fig3",
        description="steering and asymmetry against omega_b at fixed separation",
        axis=AxisName.omega_b,
        lo=0.5,
        hi=4.0,
        count=351,
        cases=[
            {"omega_a": 0.5, "separation": 0.003},
            {"omega_a": 0.5, "separation": 0.01},
            {"omega_a": 0.5, "separation": 0.4},
            {"omega_a": 0.5, "separation": 1.0},
        ],
        case_columns=["omega_a", "L_over_sigma"],
    ),
    "fig4": FigurePreset(
        name="fig4",
        description="steering and asymmetry against the relative gap difference",
        axis=AxisName.gap_ratio,
        lo=0.0,
        hi=3.0,
        count=301,
        cases=[
            {"omega_a": 0.5, "separation": 0.01},
            {"omega_a": 0.5, "separation": 0.05},
            {"omega_a": 1.0, "separation": 0.01},
            {"omega_a": 1.0, "separation": 0.05},
        ],
        case_columns=["omega_a", "L_over_sigma"],
    ),
}


def get_preset(name: str) -> FigurePreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown figure {name!r}; available: {', '.join(sorted(PRESETS))}") from None


def _fixed_params(case: Dict[str, float], axis: AxisName, lo: float, coupling: float) -> DetectorPairParams:
    omega_a = case["omega_a"]
    if "omega_b" in case:
        omega_b = case["omega_b"]
    else:
        omega_b = omega_a * (1.0 + case.get("gap_ratio", 0.0))
    separation = case.get("separation", lo if axis == AxisName.separation else 1.0)
    return DetectorPairParams(coupling=coupling, omega_a=omega_a, omega_b=omega_b, separation=separation)


def _case_value(column: str, params: DetectorPairParams, case: Dict[str, float]) -> float:
    if column == "L_over_sigma":
        return params.separation
    if column == "gap_ratio":
        return case.get("gap_ratio", params.gap_ratio)
    return getattr(params, column)


def figure_table(
    name: str,
    coupling: Optional[float] = None,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    count: Optional[int] = None,
    cases: Optional[List[Dict[str, float]]] = None,
) -> Table:
    """Sweep every case of a preset and stack the rows into one table.

    Each keyword overrides the corresponding caption default.
    """
    preset = get_preset(name)
    lam = settings.default_coupling if coupling is None else coupling
    axis = SweepAxis(
        name=preset.axis,
        lo=preset.lo if lo is None else lo,
        hi=preset.hi if hi is None else hi,
        count=preset.count if count is None else count,
    )
    axis_label = AXIS_LABELS[preset.axis]
    columns = list(preset.case_columns) + [axis_label] + [c.value for c in preset.outputs]
    table = Table(columns=columns)
    for case in cases or preset.cases:
        fixed = _fixed_params(case, preset.axis, axis.lo, lam)
        result = sweep(SweepSpec(axis1=axis, fixed=fixed, outputs=preset.outputs))
        held = {column: _case_value(column, fixed, case) for column in preset.case_columns}
        for row in result.rows:
            record = dict(held)
            record[axis_label] = row.coords[preset.axis.value]
            for column in preset.outputs:
                record[column.value] = row.values.get(column.value, float("nan"))
            table.records.append(record)
    logger.info("Figure %s: %d rows", name, len(table.records))
    return table
