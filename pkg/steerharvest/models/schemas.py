import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Regime(str, Enum):
    two_way = "TwoWay"
    one_way_a_to_b = "OneWayAtoB"
    one_way_b_to_a = "OneWayBtoA"
    no_way = "NoWay"


class Direction(str, Enum):
    """Steering direction witnessed by a tau state."""

    b_to_a = "BtoA"
    a_to_b = "AtoB"


class Measure(str, Enum):
    s_a_to_b = "s_a_to_b"
    s_b_to_a = "s_b_to_a"
    concurrence = "concurrence"


class AxisName(str, Enum):
    separation = "separation"
    omega_a = "omega_a"
    omega_b = "omega_b"
    gap_ratio = "gap_ratio"


class Amplitude(str, Enum):
    """Double-time integrals the oracle knows how to evaluate."""

    p_a = "p_a"
    p_b = "p_b"
    corr_c = "corr_c"
    corr_x = "corr_x"
    corr_x_unordered = "corr_x_unordered"


class OutputColumn(str, Enum):
    s_a_to_b = "s_a_to_b"
    s_b_to_a = "s_b_to_a"
    asymmetry = "asymmetry"
    concurrence = "concurrence"
    p_a = "p_a"
    p_b = "p_b"
    abs_x = "abs_x"
    abs_c = "abs_c"
    regime = "regime"


def _as_complex(value: Any) -> complex:
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float, np.number)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot interpret {value!r} as a complex number")


class XState(BaseModel):
    """Two-qubit X state in the basis |00>, |01>, |10>, |11>.

    Only the upper anti-diagonal coherences are stored; the lower ones are
    their conjugates.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rho11: float
    rho22: float
    rho33: float
    rho44: float
    rho14: complex = 0j
    rho23: complex = 0j

    @field_validator("rho14", "rho23", mode="before")
    @classmethod
    def _coerce_complex(cls, value: Any) -> complex:
        return _as_complex(value)

    @model_validator(mode="after")
    def _finite(self) -> "XState":
        for name in ("rho11", "rho22", "rho33", "rho44"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("rho14", "rho23"):
            value = getattr(self, name)
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite")
        return self

    @property
    def diagonal(self) -> Tuple[float, float, float, float]:
        return (self.rho11, self.rho22, self.rho33, self.rho44)

    @property
    def trace(self) -> float:
        return math.fsum(self.diagonal)

    def to_matrix(self) -> np.ndarray:
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0], rho[1, 1], rho[2, 2], rho[3, 3] = self.diagonal
        rho[0, 3] = self.rho14
        rho[3, 0] = self.rho14.conjugate()
        rho[1, 2] = self.rho23
        rho[2, 1] = self.rho23.conjugate()
        return rho


class JTerms(BaseModel):
    model_config = ConfigDict(frozen=True)

    j_a: float
    j_b: float
    j_c: float


class SteeringResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    s_a_to_b: float = Field(ge=0)
    s_b_to_a: float = Field(ge=0)
    asymmetry: float = Field(ge=0)
    regime: Regime

    @model_validator(mode="after")
    def _consistent(self) -> "SteeringResult":
        if self.asymmetry != abs(self.s_a_to_b - self.s_b_to_a):
            raise ValueError("asymmetry must equal |s_a_to_b - s_b_to_a|")
        return self


class DetectorPairParams(BaseModel):
    """Dimensionless inputs; gaps are Omega*sigma and the separation is L/sigma."""

    model_config = ConfigDict(frozen=True)

    coupling: float = Field(gt=0, allow_inf_nan=False)
    omega_a: float = Field(gt=0, allow_inf_nan=False)
    omega_b: float = Field(gt=0, allow_inf_nan=False)
    separation: float = Field(gt=0, allow_inf_nan=False)

    @classmethod
    def from_gap_ratio(
        cls, omega_a: float, gap_ratio: float, separation: float, coupling: float
    ) -> "DetectorPairParams":
        return cls(
            coupling=coupling,
            omega_a=omega_a,
            omega_b=omega_a * (1.0 + gap_ratio),
            separation=separation,
        )

    @property
    def gap_difference(self) -> float:
        return self.omega_b - self.omega_a

    @property
    def gap_sum(self) -> float:
        return self.omega_a + self.omega_b

    @property
    def gap_ratio(self) -> float:
        return self.gap_difference / self.omega_a

    def evolve(self, **changes: float) -> "DetectorPairParams":
        """Validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(changes)
        return DetectorPairParams(**data)


class PerturbativeState(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p_a: float = Field(ge=0)
    p_b: float = Field(ge=0)
    corr_x: complex
    corr_c: complex

    @field_validator("corr_x", "corr_c", mode="before")
    @classmethod
    def _coerce_complex(cls, value: Any) -> complex:
        return _as_complex(value)


class EvalRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_a: float
    p_b: float
    abs_x: float
    abs_c: float
    s_a_to_b: float
    s_b_to_a: float
    asymmetry: float
    concurrence: float
    regime: Regime


class QuadratureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilons: Tuple[float, ...] = (4e-2, 2e-2, 1e-2)
    nodes: int = Field(default=64, ge=64)
    half_width: float = Field(default=8.0, ge=6.0)
    extrapolation_order: int = Field(default=2, ge=1)
    tolerance: float = Field(default=1e-4, gt=0)

    @model_validator(mode="after")
    def _check(self) -> "QuadratureSpec":
        if not self.epsilons or any(not (eps > 0 and math.isfinite(eps)) for eps in self.epsilons):
            raise ValueError("epsilons must be positive and finite")
        if any(b >= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ValueError("epsilons must be strictly descending")
        if self.extrapolation_order > len(self.epsilons) - 1:
            raise ValueError("extrapolation_order needs at least order + 1 epsilons")
        return self


class QuadratureResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: complex
    residual: float
    levels: List[complex]
    epsilons: Tuple[float, ...]


class AmplitudeCheck(BaseModel):
    name: str
    compared: str
    closed_form: Tuple[float, float]
    quadrature: Tuple[float, float]
    relative_error: float
    residual: float
    passed: bool


class VerificationPoint(BaseModel):
    omega_a: float
    omega_b: float
    separation: float
    coupling: float
    checks: List[AmplitudeCheck] = Field(default_factory=list)
    error: Optional[str] = None
    passed: bool = False


class VerificationReport(BaseModel):
    panel: str
    tolerance: float
    points: List[VerificationPoint] = Field(default_factory=list)
    passed: bool = False


class SweepAxis(BaseModel):
    name: AxisName
    lo: float = Field(alias="min", allow_inf_nan=False)
    hi: float = Field(alias="max", allow_inf_nan=False)
    count: int = Field(ge=2)

    model_config = {"populate_by_name": True, "frozen": True}

    @model_validator(mode="after")
    def _ordered(self) -> "SweepAxis":
        if self.lo > self.hi:
            raise ValueError("axis min must not exceed max")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    axis1: SweepAxis
    axis2: Optional[SweepAxis] = None
    fixed: DetectorPairParams
    outputs: List[OutputColumn] = Field(default_factory=lambda: list(OutputColumn))
    # held Delta/omega_a while omega_a moves; None keeps omega_b fixed instead
    gap_ratio: Optional[float] = Field(default=None, gt=-1.0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _check(self) -> "SweepSpec":
        axes = [self.axis1] + ([self.axis2] if self.axis2 is not None else [])
        if len(axes) == 2 and axes[0].name == axes[1].name:
            raise ValueError("axis1 and axis2 must differ")
        names = {axis.name for axis in axes}
        if AxisName.omega_b in names and AxisName.gap_ratio in names:
            raise ValueError("omega_b and gap_ratio cannot both be swept")
        if self.gap_ratio is not None and names & {AxisName.omega_b, AxisName.gap_ratio}:
            raise ValueError("a held gap_ratio conflicts with sweeping omega_b or gap_ratio")
        for axis in axes:
            if axis.name == AxisName.gap_ratio:
                if axis.lo <= -1.0:
                    raise ValueError("gap_ratio must stay above -1 so that omega_b > 0")
            elif axis.lo <= 0:
                raise ValueError(f"{axis.name.value} must stay strictly positive")
        if not self.outputs:
            raise ValueError("at least one output column is required")
        return self


class SweepRow(BaseModel):
    coords: Dict[str, float]
    values: Dict[str, Union[float, str]] = Field(default_factory=dict)
    error: Optional[str] = None


class SweepTable(BaseModel):
    axis_names: List[str]
    outputs: List[OutputColumn]
    rows: List[SweepRow] = Field(default_factory=list)


class DeathPoint(BaseModel):
    measure: Measure
    axis: AxisName
    location: float
    bracket_width: float
    near_value: float
    far_value: float
    verified: bool


class PeakResult(BaseModel):
    axis: AxisName
    location: float
    peak_value: float
    tolerance: float


class RegimeTransition(BaseModel):
    """Regime change between two neighbouring grid points along axis1."""

    axis: str
    before: float
    after: float
    from_regime: Regime
    to_regime: Regime
    held: Dict[str, float] = Field(default_factory=dict)


class FigurePreset(BaseModel):
    """Caption parameters of one figure: a list of held cases swept along one axis."""

    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    axis: AxisName
    lo: float
    hi: float
    count: int = Field(ge=2)
    cases: List[Dict[str, float]]
    case_columns: List[str]
    outputs: List[OutputColumn] = Field(
        default_factory=lambda: [OutputColumn.s_a_to_b, OutputColumn.s_b_to_a, OutputColumn.asymmetry]
    )


class Table(BaseModel):
    """Ordered column names plus one record per row, as handed to the writers."""

    columns: List[str]
    records: List[Dict[str, Any]] = Field(default_factory=list)
