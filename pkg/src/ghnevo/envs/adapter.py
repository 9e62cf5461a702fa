"""Subprocess adapter for third-party simulators.

Wire protocol, one message per line, UTF-8 JSON with sorted keys and
compact separators, newline-terminated:

    -> {"payload":{"mode":"normal","seed":<uint32>},"type":"reset"}
    <- {"payload":{"obs":[...]},"type":"result"}
    -> {"payload":{"action":<int or [float,...]>},"type":"step"}
    <- {"payload":{"done":<bool>,"obs":[...],"reward":<float>},"type":"result"}

Action inversion is applied on this side before the message is written
(discrete: a -> n-1-a, continuous: negation); the active mode is also
forwarded in the reset payload for simulators that prefer to handle the
switch themselves (set ``forward_mode_only=True`` to disable local
remapping in that case).
"""

from __future__ import annotations

import json
import subprocess

import numpy as np

from .base import (
    ACTION_CONTINUOUS,
    ACTION_DISCRETE,
    Environment,
    EnvSpec,
    SwitchSchedule,
)


def _encode(msg_type: str, payload: dict) -> bytes:
    line = json.dumps({"payload": payload, "type": msg_type},
                      sort_keys=True, separators=(",", ":"))
    return (line + "\n").encode("utf-8")


class ExternalAdapterEnv(Environment):
    def __init__(
        self,
        schedule: SwitchSchedule,
        command: list[str],
        obs_dim: int,
        action_kind: str = ACTION_DISCRETE,
        action_size: int = 2,
        max_steps: int = 1000,
        score_range: tuple[float, float] = (-1e9, 1e9),
        forward_mode_only: bool = False,
    ):
        spec = EnvSpec(obs_dim, action_kind, action_size, max_steps, tuple(score_range))
        super().__init__(spec, schedule)
        self.forward_mode_only = forward_mode_only
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            bufsize=0,
        )

    def _decode_action(self, action):
        if self.forward_mode_only:
            # the simulator applies the inversion itself
            if self.spec.action_kind == ACTION_DISCRETE:
                return int(action)
            return np.asarray(action, dtype=np.float64)
        return super()._decode_action(action)

    def _exchange(self, msg_type: str, payload: dict) -> dict:
        if self._proc.poll() is not None:
            raise RuntimeError("external simulator exited")
        self._proc.stdin.write(_encode(msg_type, payload))
        self._proc.stdin.flush()
        line = self._proc.stdout.readline()
        if not line:
            raise RuntimeError("external simulator closed its output")
        msg = json.loads(line.decode("utf-8"))
        if msg.get("type") != "result":
            raise RuntimeError(f"expected result message, got {msg.get('type')!r}")
        return msg["payload"]

    def _reset(self, rng):
        seed = int(rng.integers(0, 2**32))
        payload = self._exchange("reset", {"mode": self.mode, "seed": seed})
        return np.asarray(payload["obs"], dtype=np.float64)

    def _step(self, action):
        if isinstance(action, np.ndarray):
            action = [float(a) for a in action]
        payload = self._exchange("step", {"action": action})
        return (
            np.asarray(payload["obs"], dtype=np.float64),
            float(payload["reward"]),
            bool(payload["done"]),
        )

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
                self._proc.wait(timeout=2)
            except Exception:
                self._proc.kill()
