import csv
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from steerharvest.models.schemas import SweepTable, Table, VerificationReport

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """CSV cell text: floats with 17 significant digits, bare words otherwise."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value


def render_csv(table: Table) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for record in table.records:
        writer.writerow([format_value(record.get(column)) for column in table.columns])
    return buffer.getvalue()


def render_json(payload: Any) -> str:
    return json.dumps(_json_safe(payload), indent=2, ensure_ascii=True, allow_nan=False) + "\n"


def render(table: Table, fmt: str, single: bool = False) -> str:
    """CSV text, or JSON (one object when ``single``, else an array of objects)."""
    if fmt == "csv":
        return render_csv(table)
    records = [_ordered(record, table.columns) for record in table.records]
    return render_json(records[0] if single else records)


def _ordered(record: Dict[str, Any], columns: Iterable[str]) -> Dict[str, Any]:
    ordered = {column: record.get(column) for column in columns}
    if record.get("error"):
        ordered["error"] = record["error"]
    return ordered


def write_output(text: str, out: Optional[str]) -> Optional[Path]:
    if out is None:
        sys.stdout.write(text)
        return None
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    logger.info("Wrote %s", path)
    return path


def record_table(record: Dict[str, Any]) -> Table:
    return Table(columns=list(record), records=[record])


def sweep_to_table(table: SweepTable) -> Table:
    columns = list(table.axis_names) + [column.value for column in table.outputs]
    records: List[Dict[str, Any]] = []
    for row in table.rows:
        record: Dict[str, Any] = dict(row.coords)
        for column in table.outputs:
            record[column.value] = row.values.get(column.value, float("nan"))
        if row.error:
            record["error"] = row.error
        records.append(record)
    return Table(columns=columns, records=records)


VERIFY_COLUMNS = [
    "omega_a",
    "omega_b",
    "separation",
    "amplitude",
    "compared",
    "closed_form_re",
    "closed_form_im",
    "quadrature_re",
    "quadrature_im",
    "relative_error",
    "residual",
    "passed",
]


def report_to_table(report: VerificationReport) -> Table:
    table = Table(columns=VERIFY_COLUMNS)
    for point in report.points:
        base = {"omega_a": point.omega_a, "omega_b": point.omega_b, "separation": point.separation}
        if point.error:
            table.records.append({**base, "amplitude": "error", "passed": False, "error": point.error})
            continue
        for check in point.checks:
            table.records.append(
                {
                    **base,
                    "amplitude": check.name,
                    "compared": check.compared,
                    "closed_form_re": check.closed_form[0],
                    "closed_form_im": check.closed_form[1],
                    "quadrature_re": check.quadrature[0],
                    "quadrature_im": check.quadrature[1],
                    "relative_error": check.relative_error,
                    "residual": check.residual,
                    "passed": check.passed,
                }
            )
    return table
