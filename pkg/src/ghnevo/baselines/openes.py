"""Evolution strategy with mirrored sampling and rank-shaped gradient steps.

The search distribution is an isotropic Gaussian with fixed sigma around a
mean that moves along the utility-weighted average of the sampled noise.
Candidates come in mirrored pairs, so the population size must be even.
"""

from __future__ import annotations

import numpy as np

from .base import AskTellOptimizer, centered_ranks


class OpenEs(AskTellOptimizer):
    def __init__(self, dim, popsize, seed, sigma: float = 0.1, lr: float = 0.1,
                 x0: float = 0.0):
        super().__init__(dim, popsize, seed)
        if popsize % 2 != 0:
            raise ValueError("mirrored sampling needs an even population size")
        self.sigma = float(sigma)
        self.lr = float(lr)
        self.mean = np.full(dim, float(x0))
        self._eps = None

    def _ask(self) -> np.ndarray:
        half = self.rng.standard_normal((self.popsize // 2, self.dim))
        self._eps = np.empty((self.popsize, self.dim))
        self._eps[0::2] = half
        self._eps[1::2] = -half
        return self.mean + self.sigma * self._eps

    def _tell(self, fitnesses: np.ndarray) -> None:
        utilities = centered_ranks(fitnesses)
        grad = utilities @ self._eps / (self.popsize * self.sigma)
        self.mean = self.mean + self.lr * grad
        self._eps = None

    def step_size(self) -> float:
        return self.sigma
