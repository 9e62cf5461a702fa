"""Covariance matrix adaptation evolution strategy, (mu/mu_w, lambda).

Standard parameterization: log-decreasing positive recombination weights,
cumulative step-size adaptation, and rank-one plus rank-mu covariance
updates. Fitnesses are maximized. The covariance eigendecomposition is
refreshed every generation with a small eigenvalue floor to keep the
matrix positive definite.
"""

from __future__ import annotations

import math

import numpy as np

from .base import AskTellOptimizer

_EIG_FLOOR = 1e-20


class CmaEs(AskTellOptimizer):
    def __init__(self, dim, popsize, seed, sigma0: float = 0.5, x0=None):
        super().__init__(dim, popsize, seed)
        d = dim
        lam = popsize
        self.mu = lam // 2
        w = np.log((lam + 1) / 2.0) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mu_eff = 1.0 / np.sum(self.weights**2)

        self.c_sigma = (self.mu_eff + 2) / (d + self.mu_eff + 5)
        self.d_sigma = (
            1 + 2 * max(0.0, math.sqrt((self.mu_eff - 1) / (d + 1)) - 1) + self.c_sigma
        )
        self.c_c = (4 + self.mu_eff / d) / (d + 4 + 2 * self.mu_eff / d)
        self.c_1 = 2.0 / ((d + 1.3) ** 2 + self.mu_eff)
        self.c_mu = min(
            1 - self.c_1,
            2 * (self.mu_eff - 2 + 1 / self.mu_eff) / ((d + 2) ** 2 + self.mu_eff),
        )
        self.chi_n = math.sqrt(d) * (1 - 1 / (4 * d) + 1 / (21 * d * d))

        self.mean = np.zeros(d) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
        self.sigma = float(sigma0)
        self.cov = np.eye(d)
        self.p_sigma = np.zeros(d)
        self.p_c = np.zeros(d)
        self._decompose()
        self._y = None

    def _decompose(self):
        self.cov = (self.cov + self.cov.T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(self.cov)
        eigvals = np.maximum(eigvals, _EIG_FLOOR)
        self.b_mat = eigvecs
        self.d_vec = np.sqrt(eigvals)
        self.inv_sqrt = eigvecs @ np.diag(1.0 / self.d_vec) @ eigvecs.T

    def min_eigenvalue(self) -> float:
        return float(self.d_vec.min() ** 2)

    def _ask(self) -> np.ndarray:
        z = self.rng.standard_normal((self.popsize, self.dim))
        self._y = (z * self.d_vec) @ self.b_mat.T
        return self.mean + self.sigma * self._y

    def _tell(self, fitnesses: np.ndarray) -> None:
        if not np.all(np.isfinite(fitnesses)):
            raise ValueError("non-finite fitness passed to CMA-ES")
        order = np.argsort(-fitnesses, kind="stable")
        y_sel = self._y[order[: self.mu]]
        y_w = self.weights @ y_sel

        self.mean = self.mean + self.sigma * y_w

        g = self.generation + 1
        self.p_sigma = (1 - self.c_sigma) * self.p_sigma + math.sqrt(
            self.c_sigma * (2 - self.c_sigma) * self.mu_eff
        ) * (self.inv_sqrt @ y_w)
        p_norm = float(np.linalg.norm(self.p_sigma))
        h_sigma = p_norm / math.sqrt(1 - (1 - self.c_sigma) ** (2 * g)) < (
            1.4 + 2 / (self.dim + 1)
        ) * self.chi_n

        self.p_c = (1 - self.c_c) * self.p_c
        if h_sigma:
            self.p_c = self.p_c + math.sqrt(
                self.c_c * (2 - self.c_c) * self.mu_eff
            ) * y_w

        rank_mu = (y_sel * self.weights[:, None]).T @ y_sel
        delta_h = (1 - int(h_sigma)) * self.c_c * (2 - self.c_c)
        self.cov = (
            (1 - self.c_1 - self.c_mu) * self.cov
            + self.c_1 * (np.outer(self.p_c, self.p_c) + delta_h * self.cov)
            + self.c_mu * rank_mu
        )

        self.sigma *= math.exp((self.c_sigma / self.d_sigma) * (p_norm / self.chi_n - 1))
        self._decompose()
        self._y = None

    def step_size(self) -> float:
        return self.sigma
