"""Episodic environments with generation-indexed output-inversion schedules."""

from .base import (
    ACTION_CONTINUOUS,
    ACTION_DISCRETE,
    EnvSpec,
    Environment,
    SwitchSchedule,
    apply_switch,
    rollout,
)
from .cartpole import CartPoleSwitchEnv
from .grid2d import Grid2dSwitchEnv, GridLandscape
from .pointmass import PointMassEnv
from .adapter import ExternalAdapterEnv

_ENV_IDS = ("grid2d-switch", "cartpole-switch", "pointmass-continuous", "external-adapter")


def make_env(env_id: str, schedule: SwitchSchedule, options: dict | None = None):
    """Instantiate an environment by id; options are environment-specific."""
    options = dict(options or {})
    if env_id == "cartpole-switch":
        return CartPoleSwitchEnv(schedule, **options)
    if env_id == "grid2d-switch":
        return Grid2dSwitchEnv(schedule, **options)
    if env_id == "pointmass-continuous":
        return PointMassEnv(schedule, **options)
    if env_id == "external-adapter":
        return ExternalAdapterEnv(schedule, **options)
    raise ValueError(f"unknown environment id {env_id!r} (known: {', '.join(_ENV_IDS)})")
