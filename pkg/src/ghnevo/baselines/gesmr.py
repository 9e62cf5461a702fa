"""Group elite selection of mutation rates.

Solutions and mutation rates co-evolve: the population is partitioned
round-robin into K groups, each mutating with its group's sigma. Solutions
undergo truncation selection; sigmas are selected by the best fitness
improvement any mutated member of their group achieved, and the surviving
sigmas spawn copies perturbed by a factor drawn uniformly in log space.
Solution parameters are clipped to the same bound as the hypernetwork
genomes.
"""

from __future__ import annotations

import math

import numpy as np

from .base import AskTellOptimizer


class Gesmr(AskTellOptimizer):
    def __init__(self, dim, popsize, seed, groups: int = 5, elite_size: int = 10,
                 sigma_min: float = 1e-4, sigma_max: float = 5.0,
                 sigma_init_lo: float = 0.01, sigma_init_hi: float = 1.0,
                 meta_factor: float = 2.0, init_std: float = 1.0,
                 param_clip: float = 20.0):
        super().__init__(dim, popsize, seed)
        if popsize % groups != 0:
            raise ValueError(f"population size {popsize} not divisible by {groups} groups")
        if not 1 <= elite_size < popsize:
            raise ValueError("elite_size must be in [1, popsize)")
        self.groups = groups
        self.elite_size = elite_size
        self.sigma_min = float(sigma_min)
        self.sigma_max = float(sigma_max)
        self.meta_factor = float(meta_factor)
        self.init_std = float(init_std)
        self.param_clip = float(param_clip)
        if groups == 1:
            self.sigmas = np.array([math.sqrt(sigma_init_lo * sigma_init_hi)])
        else:
            self.sigmas = np.geomspace(sigma_init_lo, sigma_init_hi, groups)
        self._pop = None
        self._fits = None
        self._parent_fits = None  # fitness of each slot's parent; nan for unmutated slots

    def group_of(self, slot: int) -> int:
        return slot % self.groups

    def _ask(self) -> np.ndarray:
        if self._pop is None:
            self._pop = self.rng.standard_normal((self.popsize, self.dim)) * self.init_std
            np.clip(self._pop, -self.param_clip, self.param_clip, out=self._pop)
            self._parent_fits = np.full(self.popsize, np.nan)
            return self._pop
        order = np.argsort(-self._fits, kind="stable")
        elites = self._pop[order[: self.elite_size]]
        elite_fits = self._fits[order[: self.elite_size]]
        new_pop = np.empty_like(self._pop)
        parent_fits = np.full(self.popsize, np.nan)
        new_pop[: self.elite_size] = elites
        for i in range(self.elite_size, self.popsize):
            j = int(self.rng.integers(self.elite_size))
            child = elites[j] + self.sigmas[self.group_of(i)] * self.rng.standard_normal(self.dim)
            np.clip(child, -self.param_clip, self.param_clip, out=child)
            new_pop[i] = child
            parent_fits[i] = elite_fits[j]
        self._pop = new_pop
        self._parent_fits = parent_fits
        return self._pop

    def _select_sigmas(self, improvements: np.ndarray) -> np.ndarray:
        """Keep the best-improving half (ties to the lower index), then refill
        with log-space perturbed copies of the survivors."""
        n_keep = (self.groups + 1) // 2
        order = np.argsort(-improvements, kind="stable")
        survivors = self.sigmas[order[:n_keep]]
        new = np.empty(self.groups)
        new[:n_keep] = survivors
        log_span = math.log(self.meta_factor)
        for i in range(n_keep, self.groups):
            factor = math.exp(self.rng.uniform(-log_span, log_span))
            new[i] = survivors[(i - n_keep) % n_keep] * factor
        return np.clip(new, self.sigma_min, self.sigma_max)

    def _tell(self, fitnesses: np.ndarray) -> None:
        if self._parent_fits is not None and np.any(np.isfinite(self._parent_fits)):
            improvements = np.full(self.groups, -np.inf)
            for i in range(self.popsize):
                if np.isnan(self._parent_fits[i]):
                    continue
                k = self.group_of(i)
                delta = fitnesses[i] - self._parent_fits[i]
                if delta > improvements[k]:
                    improvements[k] = delta
            self.sigmas = self._select_sigmas(improvements)
        self._fits = fitnesses.copy()

    def step_size(self) -> float:
        return float(self.sigmas.mean())
