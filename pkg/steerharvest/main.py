"""Command-line surface: ``python -m steerharvest <verb> ...``.

Exit status 0 on success, 1 for invalid input, 2 for numerical failure. On
failure a single line ``error=<kind> type=<Exception> message="<text>"`` is
written to stderr.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from steerharvest.config import settings
from steerharvest.errors import DomainError, NumericalError, UsageError
from steerharvest.models.schemas import (
    AxisName,
    DetectorPairParams,
    Measure,
    OutputColumn,
    QuadratureSpec,
    SweepAxis,
    SweepSpec,
)
from steerharvest.services.analysis import find_asymmetry_peak, find_death_point, sweep
from steerharvest.services.figures import PRESETS, figure_table, get_preset
from steerharvest.services.harvest import evaluate
from steerharvest.services.json_log import save_json_log
from steerharvest.services.oracle import verify_panel
from steerharvest.services.storage import (
    record_table,
    render,
    render_json,
    report_to_table,
    sweep_to_table,
    write_output,
)

logger = logging.getLogger("steerharvest")

AXIS_CHOICES = [axis.value for axis in AxisName]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        stream=sys.stderr,
    )


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--omega-a", type=float, help="Omega_A * sigma")
    gap = parser.add_mutually_exclusive_group()
    gap.add_argument("--omega-b", type=float, help="Omega_B * sigma")
    gap.add_argument("--gap-ratio", type=float, help="(Omega_B - Omega_A) / Omega_A")
    parser.add_argument("--sep", type=float, help="L / sigma")
    parser.add_argument("--coupling", type=float, default=None, help="lambda (default from settings)")


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="output file (stdout when omitted)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steerharvest", description="EPR steering harvested by two static detectors")
    verbs = parser.add_subparsers(dest="verb", required=True)

    p_eval = verbs.add_parser("eval", help="evaluate one parameter point")
    _add_param_flags(p_eval)
    _add_output_flags(p_eval)
    p_eval.set_defaults(handler=_cmd_eval)

    p_sweep = verbs.add_parser("sweep", help="dense grid over one or two axes")
    _add_param_flags(p_sweep)
    _add_output_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=AXIS_CHOICES, required=True)
    p_sweep.add_argument("--min", dest="lo", type=float, required=True)
    p_sweep.add_argument("--max", dest="hi", type=float, required=True)
    p_sweep.add_argument("--count", type=int, required=True)
    p_sweep.add_argument("--axis2", choices=AXIS_CHOICES)
    p_sweep.add_argument("--min2", dest="lo2", type=float)
    p_sweep.add_argument("--max2", dest="hi2", type=float)
    p_sweep.add_argument("--count2", type=int)
    p_sweep.add_argument("--outputs", default=",".join(c.value for c in OutputColumn),
                         help="comma-separated output columns")
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_death = verbs.add_parser("death", help="locate a sudden-death point by bisection")
    _add_param_flags(p_death)
    _add_output_flags(p_death)
    p_death.add_argument("--measure", choices=[m.value for m in Measure], required=True)
    p_death.add_argument("--axis", choices=AXIS_CHOICES, default=AxisName.separation.value)
    p_death.add_argument("--bracket", nargs=2, type=float, metavar=("LO", "HI"), required=True)
    p_death.set_defaults(handler=_cmd_death)

    p_peak = verbs.add_parser("peak", help="locate the steering-asymmetry peak")
    _add_param_flags(p_peak)
    _add_output_flags(p_peak)
    p_peak.add_argument("--axis", choices=AXIS_CHOICES, default=AxisName.omega_b.value)
    p_peak.add_argument("--min", dest="lo", type=float, default=0.5)
    p_peak.add_argument("--max", dest="hi", type=float, default=4.0)
    p_peak.add_argument("--count", type=int, default=200, help="coarse grid size (at least 200)")
    p_peak.set_defaults(handler=_cmd_peak)

    p_figure = verbs.add_parser("figure", help="data of one figure preset")
    p_figure.add_argument("name", choices=sorted(PRESETS))
    _add_param_flags(p_figure)
    _add_output_flags(p_figure)
    p_figure.add_argument("--min", dest="lo", type=float)
    p_figure.add_argument("--max", dest="hi", type=float)
    p_figure.add_argument("--count", type=int)
    p_figure.set_defaults(handler=_cmd_figure)

    p_verify = verbs.add_parser("verify", help="oracle quadrature against the closed forms")
    _add_output_flags(p_verify)
    p_verify.add_argument("--panel", default="default")
    p_verify.add_argument("--tolerance", type=float, default=None)
    p_verify.add_argument("--coupling", type=float, default=None)
    p_verify.set_defaults(handler=_cmd_verify)
    return parser


def _coupling(args: argparse.Namespace) -> float:
    return settings.default_coupling if args.coupling is None else args.coupling


def _params(args: argparse.Namespace, axis: Optional[AxisName] = None, placeholder: float = 1.0) -> DetectorPairParams:
    """Fixed parameters from the flags; the swept axis may be left out and gets ``placeholder``."""
    omega_a = args.omega_a
    if omega_a is None:
        if axis != AxisName.omega_a:
            raise UsageError("--omega-a is required")
        omega_a = placeholder
    sep = args.sep
    if sep is None:
        if axis != AxisName.separation:
            raise UsageError("--sep is required")
        sep = placeholder
    if args.omega_b is not None:
        omega_b = args.omega_b
    elif args.gap_ratio is not None:
        omega_b = omega_a * (1.0 + args.gap_ratio)
    elif axis == AxisName.omega_b:
        omega_b = placeholder
    elif axis == AxisName.gap_ratio:
        omega_b = omega_a * (1.0 + placeholder)
    else:
        raise UsageError("one of --omega-b or --gap-ratio is required")
    return DetectorPairParams(coupling=_coupling(args), omega_a=omega_a, omega_b=omega_b, separation=sep)


def _held_ratio(args: argparse.Namespace, axes: Sequence[AxisName]) -> Optional[float]:
    if args.gap_ratio is not None and AxisName.omega_a in axes:
        return args.gap_ratio
    return None


def _cmd_eval(args: argparse.Namespace) -> int:
    record = evaluate(_params(args)).model_dump(mode="json")
    write_output(render(record_table(record), args.format, single=True), args.out)
    return 0


def _parse_outputs(text: str) -> List[OutputColumn]:
    names = [name.strip() for name in text.split(",") if name.strip()]
    try:
        return [OutputColumn(name) for name in names]
    except ValueError as exc:
        raise UsageError(f"unknown output column in {text!r}") from exc


def _cmd_sweep(args: argparse.Namespace) -> int:
    axis1 = SweepAxis(name=args.axis, lo=args.lo, hi=args.hi, count=args.count)
    axes = [axis1.name]
    axis2 = None
    if args.axis2 is not None:
        if args.lo2 is None or args.hi2 is None or args.count2 is None:
            raise UsageError("--axis2 needs --min2, --max2 and --count2")
        axis2 = SweepAxis(name=args.axis2, lo=args.lo2, hi=args.hi2, count=args.count2)
        axes.append(axis2.name)
    fixed = _params_for_axes(args, [axis1] + ([axis2] if axis2 else []))
    spec = SweepSpec(
        axis1=axis1,
        axis2=axis2,
        fixed=fixed,
        outputs=_parse_outputs(args.outputs),
        gap_ratio=_held_ratio(args, axes),
    )
    write_output(render(sweep_to_table(sweep(spec)), args.format), args.out)
    return 0


def _params_for_axes(args: argparse.Namespace, axes: Sequence[SweepAxis]) -> DetectorPairParams:
    overrides: Dict[str, float] = {}
    for axis in axes:
        if axis.name == AxisName.omega_a and args.omega_a is None:
            overrides["omega_a"] = axis.lo
        if axis.name == AxisName.separation and args.sep is None:
            overrides["sep"] = axis.lo
        if axis.name == AxisName.omega_b and args.omega_b is None:
            overrides["omega_b"] = axis.lo
        if axis.name == AxisName.gap_ratio and args.gap_ratio is None:
            overrides["gap_ratio"] = axis.lo
    merged = argparse.Namespace(**{**vars(args), **overrides})
    return _params(merged)


def _cmd_death(args: argparse.Namespace) -> int:
    axis = AxisName(args.axis)
    lo, hi = args.bracket
    fixed = _params(args, axis, placeholder=lo)
    death = find_death_point(Measure(args.measure), fixed, axis, (lo, hi), _held_ratio(args, [axis]))
    write_output(render(record_table(death.model_dump(mode="json")), args.format, single=True), args.out)
    return 0


def _cmd_peak(args: argparse.Namespace) -> int:
    axis = AxisName(args.axis)
    fixed = _params(args, axis, placeholder=args.lo)
    peak = find_asymmetry_peak(fixed, axis, (args.lo, args.hi), args.count, _held_ratio(args, [axis]))
    write_output(render(record_table(peak.model_dump(mode="json")), args.format, single=True), args.out)
    return 0


def _cmd_figure(args: argparse.Namespace) -> int:
    preset = get_preset(args.name)
    cases = None
    given = {
        "omega_a": args.omega_a,
        "omega_b": args.omega_b,
        "gap_ratio": args.gap_ratio,
        "separation": args.sep,
    }
    given = {key: value for key, value in given.items() if value is not None}
    if given:
        case = dict(preset.cases[0])
        if "omega_b" in given:
            case.pop("gap_ratio", None)
        if "gap_ratio" in given:
            case.pop("omega_b", None)
        case.update(given)
        cases = [case]
    table = figure_table(args.name, coupling=args.coupling, lo=args.lo, hi=args.hi, count=args.count, cases=cases)
    write_output(render(table, args.format), args.out)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    report = verify_panel(args.panel, QuadratureSpec(), args.tolerance, args.coupling)
    save_json_log(report.model_dump(mode="json"), "verify")
    if args.format == "json":
        text = render_json(report.model_dump(mode="json"))
    else:
        text = render(report_to_table(report), "csv")
    write_output(text, args.out)
    if not report.passed:
        failed = [p for p in report.points if not p.passed]
        _report_failure("numerical", "VerificationFailed", f"{len(failed)} of {len(report.points)} panel points failed")
        return 2
    return 0


def _report_failure(kind: str, name: str, message: str) -> None:
    text = " ".join(str(message).split()).replace("\\", "\\\\").replace('"', '\\"')
    sys.stderr.write(f'error={kind} type={name} message="{text}"\n')


def run(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as exc:
        # --help / --version
        return int(exc.code or 0)
    except (DomainError, ValidationError) as exc:
        logger.error("Invalid input: %s", exc)
        _report_failure("validation", type(exc).__name__, str(exc))
        return 1
    except NumericalError as exc:
        logger.error("Numerical failure: %s", exc)
        _report_failure("numerical", type(exc).__name__, str(exc))
        return 2


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
