"""Direct-encoding baseline optimizers behind one ask/tell interface."""

from .base import AskTellOptimizer, centered_ranks
from .openes import OpenEs
from .cmaes import CmaEs
from .ga import SimpleGa, one_point_crossover
from .gesmr import Gesmr
from .samr import Samr

ALGORITHMS = {
    "openes": OpenEs,
    "cmaes": CmaEs,
    "ga": SimpleGa,
    "gesmr": Gesmr,
    "samr": Samr,
}


def make_optimizer(algorithm: str, dim: int, popsize: int, seed: int, params: dict | None = None):
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r} (known: {', '.join(sorted(ALGORITHMS))})")
    return ALGORITHMS[algorithm](dim, popsize, seed, **(params or {}))
