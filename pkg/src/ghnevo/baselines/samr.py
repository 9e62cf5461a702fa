"""Self-adaptive mutation rates: each genome carries its own sigma.

A child first perturbs the inherited sigma log-normally, then mutates its
parameters with the new sigma, so selection on fitness carries parameter
vectors and mutation rates jointly.
"""

from __future__ import annotations

import math

import numpy as np

from .base import AskTellOptimizer


class Samr(AskTellOptimizer):
    def __init__(self, dim, popsize, seed, elite_size: int = 10, tau: float | None = None,
                 init_sigma: float = 0.1, init_std: float = 1.0):
        super().__init__(dim, popsize, seed)
        if not 1 <= elite_size < popsize:
            raise ValueError("elite_size must be in [1, popsize)")
        self.elite_size = elite_size
        self.tau = float(tau) if tau is not None else 1.0 / math.sqrt(2 * dim)
        self.init_sigma = float(init_sigma)
        self.init_std = float(init_std)
        self._pop = None
        self.sigmas = None
        self._fits = None

    def _ask(self) -> np.ndarray:
        if self._pop is None:
            self._pop = self.rng.standard_normal((self.popsize, self.dim)) * self.init_std
            self.sigmas = np.full(self.popsize, self.init_sigma)
            return self._pop
        order = np.argsort(-self._fits, kind="stable")
        elite_x = self._pop[order[: self.elite_size]]
        elite_s = self.sigmas[order[: self.elite_size]]
        new_pop = np.empty_like(self._pop)
        new_sigmas = np.empty(self.popsize)
        new_pop[: self.elite_size] = elite_x
        new_sigmas[: self.elite_size] = elite_s
        for i in range(self.elite_size, self.popsize):
            j = int(self.rng.integers(self.elite_size))
            sigma = elite_s[j] * math.exp(self.tau * self.rng.standard_normal())
            new_sigmas[i] = sigma
            new_pop[i] = elite_x[j] + sigma * self.rng.standard_normal(self.dim)
        self._pop = new_pop
        self.sigmas = new_sigmas
        return self._pop

    def _tell(self, fitnesses: np.ndarray) -> None:
        self._fits = fitnesses.copy()

    def step_size(self) -> float:
        return float(self.sigmas.mean()) if self.sigmas is not None else self.init_sigma
