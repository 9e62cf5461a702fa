"""Continuous-control point mass: thrust toward a goal, then hold position.

A 2-D point mass starts near the origin and is driven by a thrust vector
in [-1, 1]^2 with velocity drag. Reward per step is progress toward the
goal minus a small control cost, plus a hold bonus for every step spent
inside the goal radius; discovering the hold bonus produces the fitness
breakthrough this task is used to study. Inverted mode negates the thrust
vector (off by default: the standard schedule has no switches).

Observations (8): position (2), velocity (2), goal offset (2), distance
to goal, and the normalized step counter.
"""

from __future__ import annotations

import math

import numpy as np

from .base import ACTION_CONTINUOUS, Environment, EnvSpec, SwitchSchedule


class PointMassEnv(Environment):
    def __init__(
        self,
        schedule: SwitchSchedule,
        max_steps: int = 120,
        goal: tuple[float, float] = (0.6, 0.45),
        goal_radius: float = 0.1,
        drag: float = 0.1,
        dt: float = 0.1,
        control_cost: float = 0.05,
        progress_scale: float = 10.0,
        hold_bonus: float = 1.0,
    ):
        lo = -(control_cost * 2.0 + progress_scale) * max_steps
        hi = (progress_scale * 2.0 + hold_bonus) * max_steps
        spec = EnvSpec(
            obs_dim=8,
            action_kind=ACTION_CONTINUOUS,
            action_size=2,
            max_steps=max_steps,
            score_range=(lo, hi),
        )
        super().__init__(spec, schedule)
        self.goal = np.asarray(goal, dtype=np.float64)
        self.goal_radius = goal_radius
        self.drag = drag
        self.dt = dt
        self.control_cost = control_cost
        self.progress_scale = progress_scale
        self.hold_bonus = hold_bonus
        self.pos = np.zeros(2)
        self.vel = np.zeros(2)

    def _distance(self):
        return float(np.linalg.norm(self.goal - self.pos))

    def _observe(self):
        off = self.goal - self.pos
        return np.concatenate(
            [
                self.pos,
                self.vel,
                off,
                [self._distance(), self._steps / self.spec.max_steps],
            ]
        )

    def _reset(self, rng):
        self.pos = rng.uniform(-0.05, 0.05, size=2)
        self.vel = np.zeros(2)
        return self._observe()

    def _step(self, action):
        prev_dist = self._distance()
        self.vel = (1.0 - self.drag) * self.vel + self.dt * action
        self.pos = self.pos + self.dt * self.vel
        dist = self._distance()
        reward = self.progress_scale * (prev_dist - dist)
        reward -= self.control_cost * float(action @ action)
        if dist < self.goal_radius:
            reward += self.hold_bonus
        done = self._steps >= self.spec.max_steps
        return self._observe(), reward, done
