"""Episodic environment contract and switch schedules.

An environment runs fixed-policy episodes: ``reset(stream)`` returns the
first observation, ``step(action)`` returns (obs, reward, done). A
``SwitchSchedule`` maps generations to an interpretation mode; in the
inverted mode a discrete action a becomes n-1-a and a continuous action
vector is negated (the 2-D grid task swaps its landscape instead).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nets import PolicyNet, RngStream, forward

ACTION_DISCRETE = "discrete"
ACTION_CONTINUOUS = "continuous"

MODE_NORMAL = "normal"
MODE_INVERTED = "inverted"


@dataclass(frozen=True)
class EnvSpec:
    obs_dim: int
    action_kind: str  # ACTION_DISCRETE or ACTION_CONTINUOUS
    action_size: int  # number of discrete actions, or action vector length
    max_steps: int
    score_range: tuple[float, float]

    def __post_init__(self):
        if self.obs_dim < 1 or self.action_size < 1 or self.max_steps < 1:
            raise ValueError("dims must be >= 1")
        if self.action_kind not in (ACTION_DISCRETE, ACTION_CONTINUOUS):
            raise ValueError(f"unknown action kind {self.action_kind!r}")
        if not self.score_range[0] < self.score_range[1]:
            raise ValueError("score_range must be (min, max) with min < max")


class SwitchSchedule:
    """Generation-indexed interpretation modes, starting normal at 0."""

    def __init__(self, entries=((0, MODE_NORMAL),)):
        entries = tuple((int(g), str(m)) for g, m in entries)
        if not entries or entries[0] != (0, MODE_NORMAL):
            raise ValueError("schedule must start with (0, normal)")
        for (g0, _), (g1, m1) in zip(entries, entries[1:]):
            if g1 <= g0:
                raise ValueError("generation starts must be strictly increasing")
            if m1 not in (MODE_NORMAL, MODE_INVERTED):
                raise ValueError(f"unknown mode {m1!r}")
        self.entries = entries

    @classmethod
    def alternating(cls, switch_generations) -> "SwitchSchedule":
        """Normal, then flip at each listed generation."""
        entries = [(0, MODE_NORMAL)]
        mode = MODE_NORMAL
        for g in switch_generations:
            mode = MODE_INVERTED if mode == MODE_NORMAL else MODE_NORMAL
            entries.append((int(g), mode))
        return cls(entries)

    def phase_at(self, generation: int) -> int:
        phase = 0
        for i, (g, _) in enumerate(self.entries):
            if generation >= g:
                phase = i
        return phase

    def mode_at(self, generation: int) -> str:
        return self.entries[self.phase_at(generation)][1]

    def switch_generations(self) -> list[int]:
        return [g for g, _ in self.entries[1:]]


def invert_discrete(action: int, n: int) -> int:
    """Reversed action ordering; applying it twice is the identity."""
    return n - 1 - action


class Environment:
    """Base class: holds the spec, the schedule, and the current mode."""

    def __init__(self, spec: EnvSpec, schedule: SwitchSchedule):
        self.spec = spec
        self.schedule = schedule
        self.mode = MODE_NORMAL
        self._steps = 0
        self._active = False

    def set_mode(self, mode: str):
        self.mode = mode

    def reset(self, episode_stream: RngStream) -> np.ndarray:
        self._steps = 0
        self._active = True
        return self._reset(episode_stream.generator())

    def step(self, action):
        if not self._active:
            raise RuntimeError("step called on finished or unreset episode")
        action = self._decode_action(action)
        self._steps += 1
        obs, reward, done = self._step(action)
        if self._steps >= self.spec.max_steps:
            done = True
        if done:
            self._active = False
        return obs, reward, done

    def _decode_action(self, action):
        if self.spec.action_kind == ACTION_DISCRETE:
            action = int(action)
            if not 0 <= action < self.spec.action_size:
                raise ValueError(f"action {action} out of range 0..{self.spec.action_size - 1}")
            if self.mode == MODE_INVERTED:
                action = invert_discrete(action, self.spec.action_size)
            return action
        action = np.asarray(action, dtype=np.float64)
        if action.shape != (self.spec.action_size,):
            raise ValueError(f"action shape {action.shape} != ({self.spec.action_size},)")
        if np.any(np.abs(action) > 1.0 + 1e-9):
            raise ValueError("continuous actions must lie in [-1, 1]")
        if self.mode == MODE_INVERTED:
            action = -action
        return action

    # environment-specific hooks
    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _step(self, action):
        raise NotImplementedError

    def state_point(self):
        """Small per-step state summary for trajectory exports, or None."""
        return None

    def close(self):
        pass


def apply_switch(env: Environment, generation: int) -> None:
    """Put the environment into the mode its schedule assigns to this generation."""
    env.set_mode(env.schedule.mode_at(generation))


def policy_action(env: Environment, output: np.ndarray):
    if env.spec.action_kind == ACTION_DISCRETE:
        return int(np.argmax(output))
    return np.clip(output, -1.0, 1.0)


def rollout(env: Environment, net: PolicyNet, episode_stream: RngStream) -> float:
    """One episode under a fixed policy; returns the total score."""
    obs = env.reset(episode_stream)
    total = 0.0
    while True:
        action = policy_action(env, forward(net, obs))
        obs, reward, done = env.step(action)
        total += reward
        if done:
            return total


def rollout_trace(env: Environment, net: PolicyNet, episode_stream: RngStream):
    """Like rollout, but also records the per-step state summary."""
    obs = env.reset(episode_stream)
    points = [env.state_point()]
    total = 0.0
    while True:
        action = policy_action(env, forward(net, obs))
        obs, reward, done = env.step(action)
        total += reward
        points.append(env.state_point())
        if done:
            return total, points
