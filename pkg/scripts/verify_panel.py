from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from steerharvest.main import configure_logging  # noqa: E402
from steerharvest.services.oracle import verify_panel  # noqa: E402


def main() -> int:
    panel = sys.argv[1] if len(sys.argv) > 1 else "default"
    configure_logging()
    report = verify_panel(panel)
    for point in report.points:
        if point.error:
            print(f"omega_a={point.omega_a:g} omega_b={point.omega_b:g} sep={point.separation:g} error={point.error}")
            continue
        for check in point.checks:
            print(
                f"omega_a={point.omega_a:g} omega_b={point.omega_b:g} sep={point.separation:g} "
                f"{check.name:<7} rel_err={check.relative_error:.2e} residual={check.residual:.2e} "
                f"{'ok' if check.passed else 'FAIL'}"
            )
    print(f"passed={report.passed}")
    return 0 if report.passed else 2


if __name__ == "__main__":
    raise SystemExit(main())
