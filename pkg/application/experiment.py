from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from config.run_defaults import (
    DEFAULT_CACHE_DIR,
    DEFAULT_GRID_SIZE,
    DEFAULT_H_INDEX,
    DEFAULT_M_MAX,
    DEFAULT_N_MAX,
    DEFAULT_N_MIN,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_WORKERS,
)
from config.tolerances import LIMSUP_WINDOW
from domain.problem import PencilProblem


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: the problem(s) plus the run block. Nothing here is random."""

    problem: PencilProblem
    problem_bar: Optional[PencilProblem] = None
    extra: Tuple[PencilProblem, ...] = ()
    n_min: int = DEFAULT_N_MIN
    n_max: int = DEFAULT_N_MAX
    levels: Tuple[int, ...] = ()
    grid_size: int = DEFAULT_GRID_SIZE
    modes: Tuple[str, ...] = ("paper", "corrected")
    window: int = LIMSUP_WINDOW
    workers: int = DEFAULT_WORKERS
    m_max: int = DEFAULT_M_MAX
    h_index: int = DEFAULT_H_INDEX
    output_dir: str = DEFAULT_OUTPUT_DIR
    cache_dir: Optional[str] = DEFAULT_CACHE_DIR
    source: str = ""

    def study_levels(self) -> List[int]:
        """Explicit levels, else n_min doubled up to n_max (n_max always included)."""
        if self.levels:
            return sorted(set(self.levels))
        out = []
        n = self.n_min
        while n < self.n_max:
            out.append(n)
            n *= 2
        out.append(self.n_max)
        return out

    def window_levels(self) -> List[int]:
        """Trailing limsup window plus the window ending at 3/4 n_max, for the stabilization check."""
        w = self.window
        early_end = max(self.n_min + w - 1, (3 * self.n_max) // 4)
        early = range(max(self.n_min, early_end - w + 1), early_end + 1)
        late = range(self.n_max - w + 1, self.n_max + 1)
        return sorted(set(early) | set(late))

    @property
    def smoothness(self) -> int:
        """Largest derivative order N every configured pair member supports."""
        return min(p.N for p in (self.problem, self.problem_bar) if p is not None)

    def as_mapping(self) -> Dict[str, Any]:
        """Run parameters only; output and cache locations do not change results."""
        return {
            "problem": self.problem.as_mapping(),
            "problem_bar": self.problem_bar.as_mapping() if self.problem_bar else None,
            "extra": [p.as_mapping() for p in self.extra],
            "n_min": self.n_min,
            "n_max": self.n_max,
            "levels": list(self.levels),
            "grid_size": self.grid_size,
            "modes": list(self.modes),
            "window": self.window,
            "m_max": self.m_max,
            "h_index": self.h_index,
        }

    def digest(self) -> str:
        payload = json.dumps(self.as_mapping(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class RunReport:
    study: str
    config: Dict[str, Any]
    config_digest: str
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    estimates: Dict[str, Any] = field(default_factory=dict)
    certification: Dict[str, Any] = field(default_factory=dict)
    discrepancies: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    def add_table(self, name: str, rows: List[Dict[str, Any]]) -> pd.DataFrame:
        """Every row carries the config digest it came from."""
        df = pd.DataFrame(rows)
        df.insert(0, "config_digest", self.config_digest)
        self.tables[name] = df
        return df
