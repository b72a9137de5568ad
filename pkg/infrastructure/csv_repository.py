from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from application.experiment import RunReport
from config.run_defaults import CSV_FLOAT_FORMAT, FORMAT_VERSION
from domain.errors import DomainError
from domain.nodal import NodalCase, NodalSet, NodalSource
from utils.keys import report_file, spectrum_file, table_file, timings_file


def write_text_atomic(path: str, text: str) -> None:
    """Write to a temporary file next to `path`, then rename over it."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _versioned(df: pd.DataFrame) -> pd.DataFrame:
    out = df.copy()
    out.insert(0, "format_version", FORMAT_VERSION)
    return out


def dataframe_to_csv_text(df: pd.DataFrame) -> str:
    return _versioned(df).to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def _json_safe(value: Any) -> Any:
    """NaN and infinities become strings so the report stays strict JSON."""
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def report_tree(report: RunReport) -> Dict[str, Any]:
    """JSON-compatible tree of a report; wall-clock timings are kept out of it."""
    return _json_safe(
        {
            "format_version": FORMAT_VERSION,
            "study": report.study,
            "config_digest": report.config_digest,
            "config": report.config,
            "estimates": report.estimates,
            "certification": report.certification,
            "discrepancies": report.discrepancies,
            "tables": {name: df.to_dict(orient="records") for name, df in report.tables.items()},
        }
    )


def write_report(report: RunReport, out_dir: str) -> List[str]:
    """Tables as CSV, the report tree as JSON, timings separately. Returns written paths."""
    written: List[str] = []
    for name, df in report.tables.items():
        path = os.path.join(out_dir, table_file(report.study, name))
        write_text_atomic(path, dataframe_to_csv_text(df))
        written.append(path)

    path = os.path.join(out_dir, report_file(report.study))
    write_text_atomic(path, json.dumps(report_tree(report), indent=2, sort_keys=True) + "\n")
    written.append(path)

    path = os.path.join(out_dir, timings_file(report.study))
    write_text_atomic(path, json.dumps(_json_safe(report.timings), indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


# -----------------------------
# Nodal sets
# -----------------------------
def _read_header(path: str) -> Dict[str, str]:
    """`# key value` lines at the top of a cache text file."""
    header: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(" ")
            header[key] = value.strip()
    return header


def _cache_lambdas(path: str, digest: str) -> Dict[int, float]:
    # the spectrum file written next to a cached nodes file
    sibling = os.path.join(os.path.dirname(os.path.abspath(path)), spectrum_file(digest))
    if not digest or not os.path.exists(sibling):
        return {}
    df = pd.read_csv(sibling, sep=" ", comment="#", float_precision="round_trip")
    if not {"n", "lambda"}.issubset(df.columns):
        return {}
    return {int(n): float(lam) for n, lam in zip(df["n"], df["lambda"])}


def import_nodal_set(path: str) -> NodalSet:
    """
    Reads a nodal set in either layout:
      - CSV with columns n, j, x (optional lambda_n, case, format_version)
      - the solver cache text file: `# digest` header, space-separated n j x rows.
    Rows may come in any order; j fixes the order inside a level.
    """
    try:
        header = _read_header(path)
        if "digest" in header:
            df = pd.read_csv(path, sep=" ", comment="#", float_precision="round_trip")
            lambdas = _cache_lambdas(path, header["digest"])
        else:
            df = pd.read_csv(path, float_precision="round_trip")
            lambdas = {}
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DomainError(f"cannot read nodal set {path}: {exc}") from exc

    required_cols = {"n", "j", "x"}
    if not required_cols.issubset(set(df.columns)):
        missing = ", ".join(sorted(required_cols - set(df.columns)))
        raise DomainError(f"Missing required columns: {missing}")
    version = header.get("format_version")
    if version is None and "format_version" in df.columns:
        version = df["format_version"].iloc[0]
    if version is not None and int(version) > FORMAT_VERSION:
        raise DomainError(f"nodal file format_version {int(version)} is newer than {FORMAT_VERSION}")

    levels: Dict[int, np.ndarray] = {}
    for n, group in df.groupby("n"):
        group = group.sort_values("j")
        levels[int(n)] = group["x"].to_numpy(dtype=float)
        if "lambda_n" in group.columns and not math.isnan(float(group["lambda_n"].iloc[0])):
            lambdas[int(n)] = float(group["lambda_n"].iloc[0])
    lambdas = {n: lam for n, lam in lambdas.items() if n in levels}

    case = NodalCase.UNKNOWN
    if "case" in df.columns:
        raw = str(df["case"].iloc[0])
        try:
            case = NodalCase(raw)
        except ValueError:
            known = ", ".join(c.value for c in NodalCase)
            raise DomainError(f"unknown nodal case {raw!r}; known: {known}") from None
    return NodalSet(levels=levels, case_tag=case, source=NodalSource.FILE, lambdas=lambdas)
