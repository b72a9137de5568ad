"""
Line-oriented text cache of certified levels, one spectrum file and one
nodes file per problem digest:

    # digest <problem digest>
    # format_version 1
    n lambda residual node_count
    ...

    # digest <problem digest>
    # format_version 1
    n j x
    ...

Each write merges the new levels into whatever the files already hold.
"""
from __future__ import annotations

import io
import os
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config.run_defaults import CACHE_DIR_ENV, CACHE_FLOAT_FORMAT, DEFAULT_CACHE_DIR, FORMAT_VERSION
from domain.errors import InconsistencyError
from domain.problem import PencilProblem
from domain.spectrum import LevelSolution, SpectrumEntry
from infrastructure.csv_repository import write_text_atomic
from utils.keys import nodes_file, spectrum_file
from utils.logging_config import get_logger

logger = get_logger(__name__)

SPECTRUM_COLUMNS = ["n", "lambda", "residual", "node_count"]
NODES_COLUMNS = ["n", "j", "x"]


def default_cache_dir() -> str:
    return os.environ.get(CACHE_DIR_ENV, DEFAULT_CACHE_DIR)


class CacheRepository:
    """
    Filesystem adapter for solved levels.
    Keeps file formats outside domain/application.
    """

    def __init__(self, root: str):
        self.root = root

    # -----------------------------
    # Helpers
    # -----------------------------
    def _path(self, name: str) -> str:
        return os.path.join(self.root, name)

    @staticmethod
    def _header(digest: str) -> str:
        return f"# digest {digest}\n# format_version {FORMAT_VERSION}\n"

    def _read(self, name: str, digest: str, columns: List[str]) -> Optional[pd.DataFrame]:
        path = self._path(name)
        if not os.path.exists(path):
            return None
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline().strip()
        if first != f"# digest {digest}":
            raise InconsistencyError(f"cache file {path} belongs to another problem ({first!r})")
        df = pd.read_csv(path, sep=" ", comment="#", float_precision="round_trip")
        missing = set(columns) - set(df.columns)
        if missing:
            raise InconsistencyError(f"cache file {path} lacks columns: {', '.join(sorted(missing))}")
        return df

    def _write(self, name: str, digest: str, df: pd.DataFrame) -> None:
        buf = io.StringIO()
        buf.write(self._header(digest))
        df.to_csv(buf, sep=" ", index=False, float_format=CACHE_FLOAT_FORMAT)
        write_text_atomic(self._path(name), buf.getvalue())

    # -----------------------------
    # Public API
    # -----------------------------
    def load_levels(self, problem: PencilProblem, indices: Sequence[int]) -> Dict[int, LevelSolution]:
        """Cached levels among `indices`; missing ones are simply absent."""
        digest = problem.digest()
        spectrum = self._read(spectrum_file(digest), digest, SPECTRUM_COLUMNS)
        nodes = self._read(nodes_file(digest), digest, NODES_COLUMNS)
        if spectrum is None or nodes is None:
            return {}

        wanted = set(int(n) for n in indices)
        grouped = {int(n): g.sort_values("j")["x"].to_numpy(dtype=float) for n, g in nodes.groupby("n")}
        out: Dict[int, LevelSolution] = {}
        for row in spectrum.to_dict("records"):
            n = int(row["n"])
            if n not in wanted:
                continue
            entry = SpectrumEntry(
                n=n,
                lam=float(row["lambda"]),
                residual=float(row["residual"]),
                node_count=int(row["node_count"]),
            )
            out[n] = LevelSolution(entry=entry, nodes=grouped.get(n, np.empty(0)))
        logger.info(f"cache {digest}: {len(out)} of {len(wanted)} levels found")
        return out

    def store_levels(self, problem: PencilProblem, solutions: Sequence[LevelSolution]) -> None:
        if not solutions:
            return
        os.makedirs(self.root, exist_ok=True)
        digest = problem.digest()
        new_spectrum = pd.DataFrame(
            [[s.entry.n, s.entry.lam, s.entry.residual, s.entry.node_count] for s in solutions],
            columns=SPECTRUM_COLUMNS,
        )
        new_nodes = pd.DataFrame(
            [[s.entry.n, j + 1, float(x)] for s in solutions for j, x in enumerate(s.nodes)],
            columns=NODES_COLUMNS,
        )
        fresh = set(new_spectrum["n"])

        old_spectrum = self._read(spectrum_file(digest), digest, SPECTRUM_COLUMNS)
        old_nodes = self._read(nodes_file(digest), digest, NODES_COLUMNS)
        if old_spectrum is not None:
            new_spectrum = pd.concat([old_spectrum[~old_spectrum["n"].isin(fresh)], new_spectrum], ignore_index=True)
        if old_nodes is not None:
            new_nodes = pd.concat([old_nodes[~old_nodes["n"].isin(fresh)], new_nodes], ignore_index=True)

        self._write(spectrum_file(digest), digest, new_spectrum.sort_values("n").reset_index(drop=True))
        self._write(nodes_file(digest), digest, new_nodes.sort_values(["n", "j"]).reset_index(drop=True))
        logger.info(f"cache {digest}: stored {len(fresh)} levels")
