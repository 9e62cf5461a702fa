"""2-D navigation over a value landscape that swaps mid-run.

The agent starts at the center of an H x W grid of cell values in [0, 1]
and moves up/down/left/right or waits for a fixed number of steps; its
score is the value of the cell it ends on. Two landscapes are generated
per task; the inverted schedule mode selects the second one, so survivors
must re-navigate to a new optimum.

Observations (8 scalars, all in [0, 1]): the four neighbor cell values,
the current cell value, the agent's x and y coordinates, and the step
counter, coordinates and counter normalized by their maxima. Off-grid
neighbors read as 0; moves off the edge leave the agent in place.
"""

from __future__ import annotations

import numpy as np

from .base import ACTION_DISCRETE, MODE_INVERTED, Environment, EnvSpec, SwitchSchedule

A_UP, A_DOWN, A_LEFT, A_RIGHT, A_WAIT = range(5)
_MOVES = {A_UP: (0, -1), A_DOWN: (0, 1), A_LEFT: (-1, 0), A_RIGHT: (1, 0), A_WAIT: (0, 0)}


class GridLandscape:
    """Two smooth multi-peaked value surfaces with distinct global optima."""

    def __init__(self, surfaces: np.ndarray):
        surfaces = np.asarray(surfaces, dtype=np.float64)
        if surfaces.ndim != 3 or surfaces.shape[0] != 2:
            raise ValueError("expected two stacked H x W surfaces")
        if surfaces.min() < 0 or surfaces.max() > 1:
            raise ValueError("surface values must lie in [0, 1]")
        for s in surfaces:
            if np.count_nonzero(s == s.max()) != 1:
                raise ValueError("each surface needs a unique global maximum")
        self.surfaces = surfaces

    def peak_cell(self, index: int) -> tuple[int, int]:
        """(x, y) of the surface's unique global maximum."""
        flat = int(np.argmax(self.surfaces[index]))
        y, x = divmod(flat, self.surfaces.shape[2])
        return x, y


def _gaussian_bump(size, cx, cy, sigma):
    xs = np.arange(size)
    gx = np.exp(-((xs - cx) ** 2) / (2 * sigma**2))
    gy = np.exp(-((xs - cy) ** 2) / (2 * sigma**2))
    return gy[:, None] * gx[None, :]


def _build_surface(rng, size, forbidden=None):
    """Sum of one dominant and one decoy Gaussian, normalized to max 1."""
    margin = 2
    center = size // 2
    while True:
        px, py = rng.integers(margin, size - margin, size=2)
        if abs(px - center) + abs(py - center) < 5:
            continue
        if forbidden is not None and abs(px - forbidden[0]) + abs(py - forbidden[1]) < 8:
            continue
        break
    surface = _gaussian_bump(size, px, py, rng.uniform(3.5, 5.5))
    dx, dy = rng.integers(margin, size - margin, size=2)
    surface = surface + rng.uniform(0.35, 0.55) * _gaussian_bump(
        size, dx, dy, rng.uniform(2.0, 3.5)
    )
    surface /= surface.max()
    # the summed decoy can shift the argmax off the main peak; retry if the
    # maximum is not unique
    if np.count_nonzero(surface == surface.max()) != 1:
        return _build_surface(rng, size, forbidden)
    return surface, (px, py)


def build_landscape(seed: int, size: int = 21) -> GridLandscape:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=[seed & (2**64 - 1), 7])))
    first, peak1 = _build_surface(rng, size)
    second, _ = _build_surface(rng, size, forbidden=peak1)
    return GridLandscape(np.stack([first, second]))


class Grid2dSwitchEnv(Environment):
    def __init__(
        self,
        schedule: SwitchSchedule,
        size: int = 21,
        episode_steps: int = 40,
        landscape_seed: int = 0,
    ):
        if size % 2 == 0:
            raise ValueError("grid size must be odd so the center is a cell")
        spec = EnvSpec(
            obs_dim=8,
            action_kind=ACTION_DISCRETE,
            action_size=5,
            max_steps=episode_steps,
            score_range=(0.0, 1.0),
        )
        super().__init__(spec, schedule)
        self.size = size
        self.landscape = build_landscape(landscape_seed, size)
        self.pos = (size // 2, size // 2)

    def _decode_action(self, action):
        # inversion swaps the active surface, not the action ordering
        action = int(action)
        if not 0 <= action < self.spec.action_size:
            raise ValueError(f"action {action} out of range 0..4")
        return action

    @property
    def active_surface(self) -> np.ndarray:
        index = 1 if self.mode == MODE_INVERTED else 0
        return self.landscape.surfaces[index]

    def _cell_value(self, x, y):
        if 0 <= x < self.size and 0 <= y < self.size:
            return float(self.active_surface[y, x])
        return 0.0

    def _observe(self):
        x, y = self.pos
        hi = self.size - 1
        return np.array(
            [
                self._cell_value(x, y - 1),
                self._cell_value(x, y + 1),
                self._cell_value(x - 1, y),
                self._cell_value(x + 1, y),
                self._cell_value(x, y),
                x / hi,
                y / hi,
                self._steps / self.spec.max_steps,
            ]
        )

    def _reset(self, rng):
        self.pos = (self.size // 2, self.size // 2)
        return self._observe()

    def _step(self, action):
        dx, dy = _MOVES[action]
        x = min(max(self.pos[0] + dx, 0), self.size - 1)
        y = min(max(self.pos[1] + dy, 0), self.size - 1)
        self.pos = (x, y)
        done = self._steps >= self.spec.max_steps
        reward = self._cell_value(x, y) if done else 0.0
        return self._observe(), reward, done
