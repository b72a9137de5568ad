from __future__ import annotations

from typing import Any, Dict, List, Tuple

from data.problem_bank import PAIR_BANK, PROBLEM_BANK, TRIPLE_BANK
from domain.errors import ConfigError
from domain.functions import RealFunction
from domain.problem import PencilProblem


def get_bundled_problem_mapping(name: str, field: str = "problem.bundled") -> Dict[str, Any]:
    # Returned as-is (static data)
    if name not in PROBLEM_BANK:
        raise ConfigError(field, f"unknown bundled problem {name!r}; known: {', '.join(sorted(PROBLEM_BANK))}")
    return PROBLEM_BANK[name]


def get_bundled_problem(name: str) -> PencilProblem:
    data = get_bundled_problem_mapping(name)
    return PencilProblem(
        p=RealFunction.from_mapping(data.get("p", {})),
        q=RealFunction.from_mapping(data.get("q", {})),
        h=data.get("h", 0.0),
        H=data.get("H", 0.0),
        case=data.get("case", "robin"),
        N=data.get("N", 0),
        h_convention=data.get("h_convention", "boundary"),
    )


def get_bundled_pair(name: str) -> Tuple[PencilProblem, PencilProblem]:
    if name not in PAIR_BANK:
        raise ConfigError("pair", f"unknown bundled pair {name!r}")
    first, second = PAIR_BANK[name]
    return get_bundled_problem(first), get_bundled_problem(second)


def get_bundled_triple(name: str) -> List[PencilProblem]:
    if name not in TRIPLE_BANK:
        raise ConfigError("triple", f"unknown bundled triple {name!r}")
    return [get_bundled_problem(n) for n in TRIPLE_BANK[name]]
