"""Simple genetic algorithm: truncation selection, one-point crossover,
additive Gaussian mutation whose scale decays geometrically per generation."""

from __future__ import annotations

import numpy as np

from .base import AskTellOptimizer


def one_point_crossover(parent_a: np.ndarray, parent_b: np.ndarray, point: int) -> np.ndarray:
    """First ``point`` genes from parent_a, the rest from parent_b."""
    if not 1 <= point < len(parent_a):
        raise ValueError("crossover point must split both parents")
    return np.concatenate([parent_a[:point], parent_b[point:]])


class SimpleGa(AskTellOptimizer):
    def __init__(self, dim, popsize, seed, elite_size: int = 10, sigma0: float = 0.3,
                 decay: float = 0.999, init_std: float = 1.0):
        super().__init__(dim, popsize, seed)
        if not 1 <= elite_size < popsize:
            raise ValueError("elite_size must be in [1, popsize)")
        self.elite_size = elite_size
        self.sigma0 = float(sigma0)
        self.decay = float(decay)
        self.init_std = float(init_std)
        self._pop = None
        self._fits = None

    def mutation_sigma(self) -> float:
        return self.sigma0 * self.decay**self.generation

    def _ask(self) -> np.ndarray:
        if self._pop is None:
            self._pop = self.rng.standard_normal((self.popsize, self.dim)) * self.init_std
            return self._pop
        order = np.argsort(-self._fits, kind="stable")
        elites = self._pop[order[: self.elite_size]]
        new_pop = np.empty_like(self._pop)
        new_pop[: self.elite_size] = elites
        sigma = self.mutation_sigma()
        for i in range(self.elite_size, self.popsize):
            a, b = self.rng.choice(self.elite_size, size=2, replace=False)
            if self.dim > 1:
                point = int(self.rng.integers(1, self.dim))
                child = one_point_crossover(elites[a], elites[b], point)
            else:
                child = elites[a].copy()
            new_pop[i] = child + sigma * self.rng.standard_normal(self.dim)
        self._pop = new_pop
        return self._pop

    def _tell(self, fitnesses: np.ndarray) -> None:
        self._fits = fitnesses.copy()

    def step_size(self) -> float:
        return self.mutation_sigma()
