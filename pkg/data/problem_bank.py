from typing import Any, Dict, List, Tuple

# IMPORTANT:
# This file contains ONLY static data.
# Potentials use the cos / sin / poly grammar of the config files:
# lists of [frequency-or-degree, coefficient] pairs.

PROBLEM_BANK: Dict[str, Dict[str, Any]] = {
    "trivial": {
        "p": {},
        "q": {},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
    },
    "constant": {
        "p": {"poly": [[0, 0.3]]},
        "q": {"poly": [[0, 1.2]]},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
    },
    "constant_bar": {
        "p": {"poly": [[0, 0.3]]},
        "q": {"poly": [[0, 1.5]]},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
    },
    "sin3": {
        "p": {},
        "q": {"sin": [[3, 1.0]]},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
    },
    "drift": {
        "p": {"sin": [[1, 0.2]]},
        "q": {},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
    },
    "smooth": {
        "p": {"sin": [[1, 0.2]]},
        "q": {"sin": [[3, 1.0]]},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
        "N": 1,
    },
    "smooth_bar": {
        "p": {"sin": [[1, 0.2]]},
        "q": {"sin": [[3, 1.0]], "cos": [[1, 0.2]]},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
        "N": 1,
    },
    "smooth_mid": {
        "p": {"sin": [[1, 0.2]]},
        "q": {"sin": [[3, 1.0]], "cos": [[1, 0.1]]},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
        "N": 1,
    },
    "smooth_h": {
        "p": {"sin": [[1, 0.2]]},
        "q": {"sin": [[3, 1.0]]},
        "h": 0.7,
        "H": 0.0,
        "case": "robin",
    },
    "steep_ramp": {
        "p": {},
        "q": {"poly": [[1, 6.0]]},
        "h": 0.0,
        "H": 0.0,
        "case": "robin",
    },
    "h_oracle": {
        "p": {},
        "q": {},
        "h": 0.5,
        "H": 0.0,
        "case": "robin",
    },
    "dirichlet_trivial": {
        "p": {},
        "q": {},
        "h": 0.0,
        "H": 0.0,
        "case": "dirichlet",
    },
}

# (problem, bar) pairs for the stability and high-order studies
PAIR_BANK: Dict[str, Tuple[str, str]] = {
    "smooth_pair": ("smooth", "smooth_bar"),
    "constant_pair": ("constant", "constant_bar"),
    "identical_pair": ("smooth", "smooth"),
    "case_pair": ("trivial", "dirichlet_trivial"),
}

# Three sets for the pseudometric axioms
TRIPLE_BANK: Dict[str, List[str]] = {
    "smooth_triple": ["smooth", "smooth_mid", "smooth_bar"],
}
