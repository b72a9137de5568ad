from __future__ import annotations

import math
from typing import Any, Dict, List

from application.experiment import RunReport
from config.run_defaults import APP_TITLE


def _fmt(value: Any) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.6g}"
    return str(value)


def _estimate_lines(estimates: Dict[str, Any], indent: str = "  ") -> List[str]:
    lines: List[str] = []
    for key in sorted(estimates):
        value = estimates[key]
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.extend(_estimate_lines(value, indent + "  "))
        elif isinstance(value, (list, tuple)):
            lines.append(f"{indent}{key}: {', '.join(_fmt(v) for v in value) or '-'}")
        else:
            lines.append(f"{indent}{key}: {_fmt(value)}")
    return lines


def render_summary(report: RunReport) -> str:
    """
    Plain-text summary of a report: header, estimates, certification,
    discrepancies, then one line per table. Failed selfcheck rows are listed.
    """
    lines = [f"{APP_TITLE} {report.study}", f"config digest: {report.config_digest}", ""]

    # -----------------------------
    # Estimates
    # -----------------------------
    if report.estimates:
        lines.append("estimates:")
        lines.extend(_estimate_lines(report.estimates))
        lines.append("")

    if report.certification:
        lines.append("certification:")
        lines.extend(_estimate_lines(report.certification))
        lines.append("")

    if report.discrepancies:
        lines.append("paper vs corrected discrepancies:")
        lines.extend(f"  - {d}" for d in report.discrepancies)
        lines.append("")

    # -----------------------------
    # Tables
    # -----------------------------
    lines.append("tables:")
    for name, df in report.tables.items():
        lines.append(f"  {name}: {len(df)} row(s)")

    checks = report.tables.get("checks")
    if checks is not None and len(checks):
        failed = checks[~checks["passed"].astype(bool)]
        lines.append("")
        lines.append(f"checks: {len(checks) - len(failed)}/{len(checks)} passed")
        for row in failed.to_dict("records"):
            lines.append(f"  FAILED {row['target']}: {row['check']} = {_fmt(row['value'])} (threshold {_fmt(row['threshold'])})")

    return "\n".join(lines) + "\n"
