"""Ask/tell optimizer protocol over flat float64 parameter vectors.

``ask`` yields exactly ``popsize`` candidates of the configured dimension;
``tell`` consumes exactly that many fitnesses (maximized). Asking twice
without telling, or telling the wrong number of fitnesses, is an error.
"""

from __future__ import annotations

import numpy as np

from ..nets import PURPOSE_BASELINE, RngStream


def centered_ranks(fitnesses: np.ndarray) -> np.ndarray:
    """Rank-based utilities in [-0.5, 0.5] that sum to zero; ties share ranks."""
    f = np.asarray(fitnesses, dtype=np.float64)
    n = len(f)
    if n < 2:
        return np.zeros(n)
    order = np.argsort(f, kind="stable")
    ranks = np.empty(n)
    sorted_f = f[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_f[j + 1] == sorted_f[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0
        i = j + 1
    return ranks / (n - 1) - 0.5


class AskTellOptimizer:
    def __init__(self, dim: int, popsize: int, seed: int):
        if dim < 1 or popsize < 1:
            raise ValueError("dim and popsize must be >= 1")
        self.dim = dim
        self.popsize = popsize
        self.seed = seed
        self.generation = 0
        self.rng = RngStream(seed, 0, 0, PURPOSE_BASELINE).generator()
        self._pending = False

    def ask(self) -> np.ndarray:
        if self._pending:
            raise RuntimeError("ask called twice without tell")
        candidates = self._ask()
        if candidates.shape != (self.popsize, self.dim):
            raise AssertionError("optimizer produced a malformed candidate matrix")
        self._pending = True
        return candidates

    def tell(self, fitnesses) -> None:
        if not self._pending:
            raise RuntimeError("tell called without a pending ask")
        fitnesses = np.asarray(fitnesses, dtype=np.float64)
        if fitnesses.shape != (self.popsize,):
            raise ValueError(
                f"expected {self.popsize} fitnesses, got shape {fitnesses.shape}"
            )
        self._tell(fitnesses)
        self._pending = False
        self.generation += 1

    # mean mutation magnitude for logging; algorithms override as suits them
    def step_size(self) -> float:
        return float("nan")

    def _ask(self) -> np.ndarray:
        raise NotImplementedError

    def _tell(self, fitnesses: np.ndarray) -> None:
        raise NotImplementedError
