"""Pole balancing with schedulable action inversion.

Classic cart-pole physics: cart mass 1.0, pole mass 0.1, pole half-length
0.5, force magnitude 10, timestep 0.02, plain Euler integration. The
episode fails when |theta| > 12 degrees or |x| > 2.4; reward is +1 per
step, 500 steps is a perfect score. In the inverted mode the two actions
swap, so a push that used to go left goes right.
"""

from __future__ import annotations

import math

import numpy as np

from .base import ACTION_DISCRETE, Environment, EnvSpec, SwitchSchedule

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
HALF_LENGTH = 0.5
POLEMASS_LENGTH = MASS_POLE * HALF_LENGTH
FORCE_MAG = 10.0
TAU = 0.02
THETA_LIMIT = 12.0 * math.pi / 180.0
X_LIMIT = 2.4


def cartpole_euler_step(state, force):
    """One Euler step of the cart-pole dynamics; state is (x, xdot, th, thdot)."""
    x, x_dot, theta, theta_dot = state
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    temp = (force + POLEMASS_LENGTH * theta_dot * theta_dot * sin_t) / TOTAL_MASS
    theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
        HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos_t * cos_t / TOTAL_MASS)
    )
    x_acc = temp - POLEMASS_LENGTH * theta_acc * cos_t / TOTAL_MASS
    return (
        x + TAU * x_dot,
        x_dot + TAU * x_acc,
        theta + TAU * theta_dot,
        theta_dot + TAU * theta_acc,
    )


class CartPoleSwitchEnv(Environment):
    def __init__(self, schedule: SwitchSchedule, max_steps: int = 500):
        spec = EnvSpec(
            obs_dim=4,
            action_kind=ACTION_DISCRETE,
            action_size=2,
            max_steps=max_steps,
            score_range=(0.0, float(max_steps)),
        )
        super().__init__(spec, schedule)
        self.state = (0.0, 0.0, 0.0, 0.0)

    def _reset(self, rng):
        self.state = tuple(rng.uniform(-0.05, 0.05, size=4))
        return np.array(self.state)

    def _step(self, action):
        force = FORCE_MAG if action == 1 else -FORCE_MAG
        self.state = cartpole_euler_step(self.state, force)
        x, _, theta, _ = self.state
        done = abs(x) > X_LIMIT or abs(theta) > THETA_LIMIT
        return np.array(self.state), 1.0, done
