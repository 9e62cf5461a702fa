"""Flat parameter vectors, dense-network forward passes, and keyed RNG streams.

All parameters are 64-bit floats. Randomness is counter-keyed: a stream is
fully determined by (run_seed, generation, individual_id, purpose), so
results never depend on evaluation order or parallel scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compgraph import (
    ACT_TANH,
    CompGraph,
    MlpSpec,
    build_mlp_graph,
)

# purpose tags for RngStream keys
PURPOSE_INIT = 0
PURPOSE_BASIS = 1
PURPOSE_DELTA = 2
PURPOSE_BASELINE = 3
PURPOSE_ENV = 4
PURPOSE_EPISODE_BASE = 16  # episode i uses PURPOSE_EPISODE_BASE + i

RNG_ALGORITHM_ID = "philox4x64/seedseq/numpy-ziggurat"

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream keyed by seed material.

    ``generator()`` always starts from the beginning of the stream, so a
    replay with the same key reproduces the same draws. Operations that
    need several draws pull one generator and consume it sequentially in a
    documented order.
    """

    run_seed: int
    generation: int
    individual_id: int
    purpose: int

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=[
                self.run_seed & _MASK64,
                self.generation & _MASK64,
                self.individual_id & _MASK64,
                self.purpose & _MASK64,
            ]
        )
        return np.random.Generator(np.random.Philox(ss))


def episode_stream(run_seed: int, generation: int, individual_id: int, episode: int) -> RngStream:
    return RngStream(run_seed, generation, individual_id, PURPOSE_EPISODE_BASE + episode)


def gaussian_sample(stream: RngStream, n: int, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
    """n i.i.d. draws from N(mean, std^2); std=0 gives the constant vector."""
    if std < 0:
        raise ValueError("std must be non-negative")
    if std == 0:
        return np.full(n, float(mean))
    g = stream.generator()
    return mean + std * g.standard_normal(n)


class FlatParams:
    """A float64 vector plus its (node_id, offset, count) layout.

    The layout follows the owning graph's node order; offsets are
    contiguous and cover the whole vector.
    """

    __slots__ = ("values", "layout", "_offsets")

    def __init__(self, values: np.ndarray, layout):
        self.values = np.asarray(values, dtype=np.float64)
        self.layout = tuple((int(i), int(o), int(c)) for i, o, c in layout)
        pos = 0
        offsets = {}
        for node_id, offset, count in self.layout:
            if offset != pos:
                raise ValueError("layout offsets must be contiguous")
            offsets[node_id] = (offset, count)
            pos += count
        if pos != self.values.shape[0]:
            raise ValueError(
                f"layout covers {pos} values but vector has {self.values.shape[0]}"
            )
        self._offsets = offsets

    @classmethod
    def from_graph(cls, graph: CompGraph, values: np.ndarray | None = None) -> "FlatParams":
        layout = []
        pos = 0
        for v in graph.nodes:
            layout.append((v.id, pos, v.param_count))
            pos += v.param_count
        if values is None:
            values = np.zeros(pos)
        return cls(values, layout)

    def slice(self, node_id: int) -> np.ndarray:
        offset, count = self._offsets[node_id]
        return self.values[offset : offset + count]

    def copy(self) -> "FlatParams":
        return FlatParams(self.values.copy(), self.layout)

    def __len__(self):
        return self.values.shape[0]


# a ParamSet maps node id -> 1-D slice of generated parameters
ParamSet = dict[int, np.ndarray]


class PolicyNet:
    """Immutable dense policy network over a flat parameter vector."""

    def __init__(self, spec: MlpSpec, params: FlatParams):
        graph = build_mlp_graph(spec)
        if len(params) != graph.total_param_count():
            raise ValueError(
                f"params length {len(params)} != {graph.total_param_count()} for {spec.arch_name}"
            )
        self.spec = spec
        self.params = params
        # cache per-layer (W, b) views for the forward pass
        self._layers = []
        for li, (fan_in, fan_out) in enumerate(spec.layer_dims):
            w = params.slice(2 * li).reshape(fan_in, fan_out)
            b = params.slice(2 * li + 1)
            self._layers.append((w, b))


def forward(net: PolicyNet, obs: np.ndarray) -> np.ndarray:
    """Evaluate the policy on one observation vector."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape != (net.spec.input_dim,):
        raise ValueError(
            f"observation shape {obs.shape} != ({net.spec.input_dim},)"
        )
    h = obs
    last = len(net._layers) - 1
    for li, (w, b) in enumerate(net._layers):
        h = h @ w + b
        if li < last:
            h = np.tanh(h)
    if net.spec.output_activation == ACT_TANH:
        h = np.tanh(h)
    return h


def assign_params(spec: MlpSpec, pset: ParamSet) -> PolicyNet:
    """Build a policy network from generated per-node slices, unmodified."""
    graph = build_mlp_graph(spec)
    flat = FlatParams.from_graph(graph)
    for v in graph.nodes:
        if v.id not in pset:
            raise ValueError(f"incomplete ParamSet: missing node {v.id} ({v.name})")
        vals = np.asarray(pset[v.id], dtype=np.float64)
        if vals.shape != (v.param_count,):
            raise ValueError(
                f"incomplete ParamSet: node {v.id} needs {v.param_count} values, got {vals.shape}"
            )
        flat.slice(v.id)[:] = vals
    return PolicyNet(spec, flat)
