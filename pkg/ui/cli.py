from __future__ import annotations

import argparse
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from application.convergence_study import run_convergence_study, run_h_recovery_study, run_reconstruction
from application.experiment import ExperimentConfig, RunReport
from application.highorder_study import run_highorder_study
from application.pipeline import run_forward, run_nodes
from application.selfcheck import SELFCHECK_TARGETS, run_selfcheck
from application.stability_study import run_stability_study
from config.run_defaults import APP_TITLE
from domain.errors import CertificationError, ConfigError, PencilLabError, SolverNonconvergenceError
from infrastructure.config_repository import config_from_mapping, load_config
from infrastructure.csv_repository import import_nodal_set, write_report, write_text_atomic
from ui.summary import render_summary
from utils.keys import summary_file
from utils.logging_config import configure_logging, get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

MODE_CHOICES = {"paper": ("paper",), "corrected": ("corrected",), "both": ("paper", "corrected")}


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML experiment file")
    parser.add_argument("--out", help="output directory (overrides run.output_dir)")
    parser.add_argument("--cache", help="cache directory (overrides run.cache_dir and the environment)")
    parser.add_argument("--mode", choices=sorted(MODE_CHOICES), help="reconstruction modes to run")
    parser.add_argument("--nmax", type=int, help="largest index (overrides run.n_max)")
    parser.add_argument("--workers", type=int, help="worker processes (overrides run.workers)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=APP_TITLE, description="Inverse nodal experiments for diffusion operators")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("forward", "eigenvalues with certification and asymptotic remainders"),
        ("nodes", "nodal points against their asymptotic expansion"),
        ("recover-h", "recover the boundary parameter h from the first nodes"),
        ("stability", "S_n, d0 and the Lipschitz identity for two problems"),
        ("high-order", "S_{m,n}, d_m and derivative reconstruction for two problems"),
    ):
        _common(sub.add_parser(name, help=text))

    rec = sub.add_parser("reconstruct", help="reconstruct q (or a derivative) from one level")
    _common(rec)
    rec.add_argument("--nodes", help="nodal-set CSV to reconstruct from instead of solving")
    rec.add_argument("--level", type=int, help="level n to use (default n_max)")
    rec.add_argument("--order", type=int, default=0, help="derivative order m (0 reconstructs q)")
    rec.add_argument("--study", action="store_true", help="run the full convergence study instead")

    check = sub.add_parser("selfcheck", help="run named acceptance targets")
    _common(check)
    check.add_argument("--target", action="append", choices=sorted(SELFCHECK_TARGETS), help="repeatable")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "n_max": args.nmax,
        "modes": list(MODE_CHOICES[args.mode]) if args.mode else None,
        "cache_dir": args.cache,
        "output_dir": args.out,
        "workers": args.workers,
    }


def _load(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        return load_config(args.config, _overrides(args))
    if args.command == "selfcheck":
        return config_from_mapping({"problem": {"bundled": "trivial"}}, source="bundled:trivial", overrides=_overrides(args))
    raise ConfigError("--config", f"the {args.command} command needs a config file")


def _reconstruct(config: ExperimentConfig, args: argparse.Namespace) -> RunReport:
    if args.study:
        return run_convergence_study(config)
    nodes = import_nodal_set(args.nodes) if args.nodes else None
    report, _ = run_reconstruction(config, nodes=nodes, n=args.level, order=args.order)
    return report


COMMANDS: Dict[str, Callable[[ExperimentConfig, argparse.Namespace], RunReport]] = {
    "forward": lambda config, args: run_forward(config),
    "nodes": lambda config, args: run_nodes(config),
    "reconstruct": _reconstruct,
    "recover-h": lambda config, args: run_h_recovery_study(config),
    "stability": lambda config, args: run_stability_study(config),
    "high-order": lambda config, args: run_highorder_study(config),
    "selfcheck": lambda config, args: run_selfcheck(config, args.target, discrepancy=bool(args.config)),
}


def _emit(report: RunReport, out_dir: str) -> List[str]:
    summary = render_summary(report)
    path = os.path.join(out_dir, summary_file(report.study))
    try:
        written = write_report(report, out_dir)
        write_text_atomic(path, summary)
    except OSError as exc:
        raise ConfigError("--out", f"cannot write to {out_dir}: {exc}") from exc
    sys.stdout.write(summary)
    return written + [path]


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses argv, runs one command and writes its report.
    Exit status: 0 ok, 1 failed checks or other lab errors, 2 usage or
    configuration errors, 3 solver nonconvergence or certification failures.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help
        return int(exc.code or 0)

    configure_logging("DEBUG" if args.verbose > 1 else "INFO" if args.verbose else None)
    try:
        config = _load(args)
        report = COMMANDS[args.command](config, args)
        written = _emit(report, config.output_dir)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (SolverNonconvergenceError, CertificationError) as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return EXIT_SOLVER
    except PencilLabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAILED

    logger.info(f"wrote {len(written)} file(s) to {config.output_dir}")
    if report.estimates.get("passed") is False:
        return EXIT_FAILED
    return EXIT_OK
