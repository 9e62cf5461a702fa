"""Stochastic self-variation: an individual generates deltas for copies of itself.

Pipeline per node of the individual's own graph:

1. predict a vector of standard deviations (small MLP, softplus, clipped),
2. sample a zero-mean Gaussian with those deviations,
3. project the sample through the run-wide fixed random basis,
4. clip the projection elementwise,
5. scale it by the node's mutation rate (max of M sigmoid heads),
6. add constant floor noise,
7. keep the node's first-k prefix as its delta.

An offspring is the parent copied exactly, plus the delta, clipped to the
genome bound. Because the rate-producing weights are themselves part of
the genome, mutation rates are heritable traits.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .compgraph import CompGraph
from .ghn import (
    Ghn,
    GhnConfig,
    NodeStates,
    VARIATION_INPUT_GNN,
    _sigmoid,
    build_ghn_graph,
    embed_nodes,
    get_layout,
    gnn_propagate,
)
from .nets import PURPOSE_BASIS, FlatParams, RngStream

# a delta has the same layout as the genome it perturbs
DeltaParams = FlatParams


@dataclass(frozen=True)
class FixedBasis:
    """Immutable random linear map used as the stochastic head's last layer.

    Drawn once per run from the run seed; shared by every individual and
    never part of any genome. Entries are N(0, 1/basis_in_dim) so the
    projection roughly preserves the sample's scale.
    """

    matrix: np.ndarray  # (basis_in_dim, out_width)
    draw_seed: int

    def sha256(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.matrix).tobytes()).hexdigest()


def draw_basis(run_seed: int, config: GhnConfig) -> FixedBasis:
    layout = get_layout(config)
    g = RngStream(run_seed, 0, 0, PURPOSE_BASIS).generator()
    matrix = g.standard_normal((config.basis_in_dim, layout.self_out_width))
    matrix *= config.basis_in_dim ** -0.5
    matrix.setflags(write=False)
    return FixedBasis(matrix, run_seed)


@dataclass
class MutationReport:
    """Per-node mutation rates and deviation magnitudes for one delta."""

    rows: list[tuple[int, float, float]]  # (node_id, rate, std_mean)
    mean_rate: float


def _variation_states(ghn: Ghn, graph: CompGraph) -> NodeStates:
    states = embed_nodes(ghn, graph)
    if ghn.config.variation_input == VARIATION_INPUT_GNN:
        states = gnn_propagate(ghn, graph, states)
    return states


def _stds_matrix(ghn: Ghn, states: NodeStates) -> np.ndarray:
    """softplus-then-clip deviations, one row of basis_in_dim per node."""
    h = np.tanh(states.matrix @ ghn.tensor("stoch.W0") + ghn.tensor("stoch.b0"))
    raw = h @ ghn.tensor("stoch.W1") + ghn.tensor("stoch.b1")
    stds = np.logaddexp(0.0, raw)  # softplus keeps deviations non-negative
    np.clip(stds, 0.0, ghn.config.std_clip, out=stds)
    return stds


def _rates_vector(ghn: Ghn, states: NodeStates) -> np.ndarray:
    """Mutation rate per node: max of the M sigmoid-activated head outputs."""
    pre = states.matrix @ ghn.tensor("rate.W") + ghn.tensor("rate.b")
    return _sigmoid(pre).max(axis=1)


def predict_stds(ghn: Ghn, states: NodeStates, node_id: int) -> np.ndarray:
    """Standard deviations for one node's Gaussian; in [0, std_clip]."""
    idx = states.node_ids.index(node_id)
    return _stds_matrix(ghn, states)[idx]


def predict_mutation_rate(ghn: Ghn, states: NodeStates, node_id: int) -> float:
    """Mutation rate of one node, in (0, 1)."""
    idx = states.node_ids.index(node_id)
    return float(_rates_vector(ghn, states)[idx])


def sample_delta(
    ghn: Ghn,
    self_graph: CompGraph,
    basis: FixedBasis,
    stream: RngStream,
    capture: dict | None = None,
) -> tuple[DeltaParams, MutationReport]:
    """Draw one self-update delta over the individual's own graph.

    Draw order is pinned: first the Gaussian sample matrix for all nodes,
    then per node (in graph order) the floor noise for its first-k prefix.
    Pass ``capture`` to receive the pre-noise per-node outputs under key
    ``"prenoise"`` (test hook).
    """
    cfg = ghn.config
    layout = ghn.layout()
    if self_graph != layout.self_graph:
        raise ValueError("graph mismatch: sample_delta needs the individual's own graph")
    if basis.matrix.shape != (cfg.basis_in_dim, layout.self_out_width):
        raise ValueError(
            f"basis shape {basis.matrix.shape} does not fit "
            f"({cfg.basis_in_dim}, {layout.self_out_width})"
        )

    states = _variation_states(ghn, self_graph)
    stds = _stds_matrix(ghn, states)
    rates = _rates_vector(ghn, states)

    g = stream.generator()
    z = g.standard_normal(stds.shape) * stds

    delta = FlatParams(np.zeros(layout.total_params), layout.layout)
    rows = []
    prenoise = {} if capture is not None else None
    for i, v in enumerate(self_graph.nodes):
        k = v.param_count
        out = z[i] @ basis.matrix[:, :k]
        np.clip(out, -cfg.out_clip, cfg.out_clip, out=out)
        out *= rates[i]
        if prenoise is not None:
            prenoise[v.id] = out.copy()
        out += g.standard_normal(k) * cfg.noise_std
        delta.slice(v.id)[:] = out
        rows.append((v.id, float(rates[i]), float(stds[i].mean())))
    if capture is not None:
        capture["prenoise"] = prenoise
        capture["stds"] = stds
        capture["rates"] = rates
    report = MutationReport(rows, float(rates.mean()))
    return delta, report


def make_offspring(
    parent: Ghn,
    basis: FixedBasis,
    stream: RngStream,
    new_id: int,
    generation: int,
) -> Ghn:
    child, _ = make_offspring_with_report(parent, basis, stream, new_id, generation)
    return child


def make_offspring_with_report(
    parent: Ghn,
    basis: FixedBasis,
    stream: RngStream,
    new_id: int,
    generation: int,
) -> tuple[Ghn, MutationReport]:
    """Copy the parent, add its self-generated delta, clip to the genome bound."""
    cfg = parent.config
    self_graph = build_ghn_graph(cfg)
    delta, report = sample_delta(parent, self_graph, basis, stream)
    values = parent.flat.values + delta.values
    np.clip(values, -cfg.param_clip, cfg.param_clip, out=values)
    child = Ghn(
        config=cfg,
        flat=FlatParams(values, parent.flat.layout),
        basis_ref=parent.basis_ref,
        id=new_id,
        birth_generation=generation,
        parent_id=parent.id,
    )
    return child, report


def mean_mutation_rate(ghn: Ghn) -> float:
    """Mean over the individual's own nodes of its current mutation rates.

    Deterministic: rates do not depend on the Gaussian sample.
    """
    self_graph = build_ghn_graph(ghn.config)
    states = _variation_states(ghn, self_graph)
    return float(_rates_vector(ghn, states).mean())
