"""Graph hypernetwork core: embeddings, message passing, deterministic head.

One individual (``Ghn``) owns a single flat float64 vector holding every
updatable tensor: embedding rows for the policy graph, embedding rows for
its own graph, the GNN weights, and the three heads (deterministic,
stochastic, mutation-rate). The fixed random basis used by the stochastic
pipeline is shared by the whole population and is not part of the vector.

Self-reference note: giving every embedding row of the GHN's own graph a
dedicated row of its own diverges (each new row adds a node that needs yet
another row), so the GHN's own graph uses one shared embedding row per
tensor category while the policy graph keeps one row per node. Every
updatable value, embedding rows included, is still covered by the
first-k delta machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .compgraph import (
    CompGraph,
    MlpSpec,
    ParamNode,
    ROLE_BIAS,
    ROLE_EMBEDDING,
    ROLE_WEIGHT,
    build_mlp_graph,
    max_param_count,
)
from .nets import FlatParams, ParamSet, RngStream

GHN_SELF_ARCH = "ghn-self"

VARIATION_INPUT_GNN = "gnn"
VARIATION_INPUT_EMBEDDING = "embedding"


@dataclass(frozen=True)
class GhnConfig:
    """Hyperparameters of one self-referential graph hypernetwork.

    ``out_clip`` bounds the stochastic head's output before the mutation
    rate scales it; ``param_clip`` bounds every genome entry at offspring
    creation; ``std_clip`` bounds the predicted standard deviations;
    ``noise_std`` is the floor noise added after scaling.
    """

    policy_spec: MlpSpec
    embed_dim: int = 32
    gnn_rounds: int = 2
    gnn_hidden: int = 32
    det_head_hidden: int = 64
    stoch_head_hidden: int = 64
    basis_in_dim: int = 64
    mutation_heads: int = 5
    out_clip: float = 0.1
    param_clip: float = 20.0
    std_clip: float = 2.0
    noise_std: float = 0.001
    variation_input: str = VARIATION_INPUT_GNN

    def __post_init__(self):
        dims = (
            self.embed_dim,
            self.gnn_rounds,
            self.gnn_hidden,
            self.det_head_hidden,
            self.stoch_head_hidden,
            self.basis_in_dim,
            self.mutation_heads,
        )
        if any(d < 1 for d in dims):
            raise ValueError("all dimensions must be >= 1")
        if self.embed_dim != self.gnn_hidden:
            # the gated update mixes the previous state into the new one,
            # which requires a single state width throughout
            raise ValueError("embed_dim must equal gnn_hidden")
        if min(self.out_clip, self.param_clip, self.std_clip) <= 0:
            raise ValueError("clip bounds must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if self.variation_input not in (VARIATION_INPUT_GNN, VARIATION_INPUT_EMBEDDING):
            raise ValueError(f"unknown variation_input {self.variation_input!r}")


def _fixed_tensor_catalog(cfg: GhnConfig) -> list[tuple[str, tuple[int, ...], int]]:
    """Ordered (name, shape, layer_index) for every non-embedding tensor."""
    h = cfg.gnn_hidden
    w_pol = max_param_count(build_mlp_graph(cfg.policy_spec))
    return [
        ("gnn.msg_in.W", (h, h), 1),
        ("gnn.msg_in.b", (h,), 1),
        ("gnn.msg_out.W", (h, h), 1),
        ("gnn.msg_out.b", (h,), 1),
        ("gnn.cand.W", (3 * h, h), 2),
        ("gnn.cand.b", (h,), 2),
        ("gnn.gate.W", (3 * h, h), 2),
        ("gnn.gate.b", (h,), 2),
        ("det.W0", (h, cfg.det_head_hidden), 3),
        ("det.b0", (cfg.det_head_hidden,), 3),
        ("det.W1", (cfg.det_head_hidden, w_pol), 4),
        ("det.b1", (w_pol,), 4),
        ("stoch.W0", (h, cfg.stoch_head_hidden), 5),
        ("stoch.b0", (cfg.stoch_head_hidden,), 5),
        ("stoch.W1", (cfg.stoch_head_hidden, cfg.basis_in_dim), 6),
        ("stoch.b1", (cfg.basis_in_dim,), 6),
        ("rate.W", (h, cfg.mutation_heads), 7),
        ("rate.b", (cfg.mutation_heads,), 7),
    ]


def _self_row_types(cfg: GhnConfig) -> list[str]:
    """Embedding-row categories for the GHN's own graph."""
    return ["embed.policy", "embed.self"] + [name for name, _, _ in _fixed_tensor_catalog(cfg)]


@lru_cache(maxsize=32)
def build_ghn_graph(cfg: GhnConfig) -> CompGraph:
    """Graph over the GHN's own updatable tensors.

    One embedding node per row of both embedding blocks, one weight/bias
    node per GNN and head tensor. The fixed random basis has no node.
    Dataflow edges: embedding rows feed the GNN message stage, whose
    update stage feeds all three heads.
    """
    n_policy = len(build_mlp_graph(cfg.policy_spec).nodes)
    types = _self_row_types(cfg)
    e = cfg.embed_dim

    nodes: list[ParamNode] = []
    for i in range(n_policy):
        nodes.append(
            ParamNode(len(nodes), ROLE_EMBEDDING, 0, e, (e,), f"embed.policy.{i}")
        )
    for t in types:
        nodes.append(
            ParamNode(len(nodes), ROLE_EMBEDDING, 0, e, (e,), f"embed.self.{t}")
        )
    tensor_ids: dict[str, int] = {}
    for name, shape, layer in _fixed_tensor_catalog(cfg):
        role = ROLE_BIAS if len(shape) == 1 else ROLE_WEIGHT
        count = int(np.prod(shape))
        tensor_ids[name] = len(nodes)
        nodes.append(ParamNode(len(nodes), role, layer, count, tuple(shape), name))

    embed_ids = [v.id for v in nodes if v.role == ROLE_EMBEDDING]
    gnn_msg = [tensor_ids[n] for n in ("gnn.msg_in.W", "gnn.msg_in.b", "gnn.msg_out.W", "gnn.msg_out.b")]
    gnn_upd = [tensor_ids[n] for n in ("gnn.cand.W", "gnn.cand.b", "gnn.gate.W", "gnn.gate.b")]
    det0 = [tensor_ids["det.W0"], tensor_ids["det.b0"]]
    det1 = [tensor_ids["det.W1"], tensor_ids["det.b1"]]
    stoch0 = [tensor_ids["stoch.W0"], tensor_ids["stoch.b0"]]
    stoch1 = [tensor_ids["stoch.W1"], tensor_ids["stoch.b1"]]
    rate = [tensor_ids["rate.W"], tensor_ids["rate.b"]]

    edges: list[tuple[int, int]] = []
    for a in embed_ids:
        for b in gnn_msg:
            edges.append((a, b))
    for a in gnn_msg:
        for b in gnn_upd:
            edges.append((a, b))
    for a in gnn_upd:
        for b in det0 + stoch0 + rate:
            edges.append((a, b))
    for a in det0:
        for b in det1:
            edges.append((a, b))
    for a in stoch0:
        for b in stoch1:
            edges.append((a, b))
    return CompGraph(GHN_SELF_ARCH, nodes, edges)


class GhnLayout:
    """Precomputed index maps shared by every individual with one config."""

    def __init__(self, cfg: GhnConfig):
        self.cfg = cfg
        self.policy_graph = build_mlp_graph(cfg.policy_spec)
        self.self_graph = build_ghn_graph(cfg)
        self.n_policy_nodes = len(self.policy_graph.nodes)
        self.row_types = _self_row_types(cfg)
        self.n_self_rows = len(self.row_types)
        template = FlatParams.from_graph(self.self_graph)
        self.layout = template.layout
        self.total_params = len(template)
        # name -> (offset, shape) for the non-embedding tensors
        self.tensor_slices: dict[str, tuple[int, tuple[int, ...]]] = {}
        for v in self.self_graph.nodes:
            if v.role != ROLE_EMBEDDING:
                off, _ = template._offsets[v.id]
                self.tensor_slices[v.name] = (off, v.shape)
        e = cfg.embed_dim
        self.policy_embed_span = (0, self.n_policy_nodes * e)
        self.self_embed_span = (
            self.n_policy_nodes * e,
            (self.n_policy_nodes + self.n_self_rows) * e,
        )
        # self-graph node id -> row index into the self embedding block
        type_index = {t: i for i, t in enumerate(self.row_types)}
        rows = []
        for v in self.self_graph.nodes:
            if v.name.startswith("embed.policy."):
                rows.append(type_index["embed.policy"])
            elif v.name.startswith("embed.self."):
                rows.append(type_index["embed.self"])
            else:
                rows.append(type_index[v.name])
        self.self_row_of_node = np.asarray(rows, dtype=np.intp)
        self.policy_out_width = max_param_count(self.policy_graph)
        self.self_out_width = max_param_count(self.self_graph)


@lru_cache(maxsize=32)
def get_layout(cfg: GhnConfig) -> GhnLayout:
    return GhnLayout(cfg)


@dataclass
class Ghn:
    """One individual: a flat parameter vector plus identity bookkeeping.

    ``basis_ref`` names the run's fixed random basis (its content hash)
    and is inherited unchanged along a lineage. Treat instances as
    immutable after creation.
    """

    config: GhnConfig
    flat: FlatParams
    basis_ref: str
    id: int
    birth_generation: int = 0
    parent_id: int | None = None

    def layout(self) -> GhnLayout:
        return get_layout(self.config)

    def tensor(self, name: str) -> np.ndarray:
        off, shape = self.layout().tensor_slices[name]
        n = int(np.prod(shape))
        return self.flat.values[off : off + n].reshape(shape)

    def policy_embed_matrix(self) -> np.ndarray:
        lo, hi = self.layout().policy_embed_span
        return self.flat.values[lo:hi].reshape(-1, self.config.embed_dim)

    def self_embed_matrix(self) -> np.ndarray:
        lo, hi = self.layout().self_embed_span
        return self.flat.values[lo:hi].reshape(-1, self.config.embed_dim)


class NodeStates:
    """Per-node state vectors for one graph, ordered by node id."""

    __slots__ = ("node_ids", "matrix")

    def __init__(self, node_ids, matrix: np.ndarray):
        self.node_ids = tuple(node_ids)
        self.matrix = np.asarray(matrix, dtype=np.float64)
        if self.matrix.shape[0] != len(self.node_ids):
            raise ValueError("one state row per node required")

    def __getitem__(self, node_id: int) -> np.ndarray:
        return self.matrix[self.node_ids.index(node_id)]

    def __len__(self):
        return len(self.node_ids)


def init_ghn(config: GhnConfig, stream: RngStream, ghn_id: int = 0, birth_generation: int = 0,
             basis_ref: str = "") -> Ghn:
    """Random individual: weights N(0, 1/fan_in), biases zero, embeddings N(0,1).

    Values are drawn node-by-node in graph order from the given stream and
    clipped to the genome bound.
    """
    layout = get_layout(config)
    g = stream.generator()
    values = np.zeros(layout.total_params)
    flat = FlatParams(values, layout.layout)
    for v in layout.self_graph.nodes:
        if v.role == ROLE_EMBEDDING:
            flat.slice(v.id)[:] = g.standard_normal(v.param_count)
        elif v.role == ROLE_WEIGHT:
            fan_in = v.shape[0]
            flat.slice(v.id)[:] = g.standard_normal(v.param_count) * (fan_in ** -0.5)
        # biases stay zero
    np.clip(values, -config.param_clip, config.param_clip, out=values)
    return Ghn(config, flat, basis_ref, ghn_id, birth_generation, None)


def embed_nodes(ghn: Ghn, graph: CompGraph) -> NodeStates:
    """Look up the stored embedding row of every node in the graph."""
    layout = ghn.layout()
    if graph == layout.policy_graph:
        matrix = ghn.policy_embed_matrix().copy()
    elif graph == layout.self_graph:
        matrix = ghn.self_embed_matrix()[layout.self_row_of_node].copy()
    else:
        raise ValueError(f"unknown arch_name {graph.arch_name!r}: no embedding block")
    return NodeStates([v.id for v in graph.nodes], matrix)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@lru_cache(maxsize=64)
def _mean_adjacency(graph: CompGraph) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized in/out adjacency; isolated directions give zero rows."""
    n = len(graph.nodes)
    a_in = np.zeros((n, n))
    a_out = np.zeros((n, n))
    for v, nbrs in enumerate(graph.in_neighbors()):
        if nbrs:
            a_in[v, nbrs] = 1.0 / len(nbrs)
    for v, nbrs in enumerate(graph.out_neighbors()):
        if nbrs:
            a_out[v, nbrs] = 1.0 / len(nbrs)
    return a_in, a_out


def gnn_propagate(ghn: Ghn, graph: CompGraph, states: NodeStates) -> NodeStates:
    """Refine node states with synchronous gated message-passing rounds.

    Per round each node averages linear messages from in-neighbors and
    out-neighbors separately, then blends a tanh candidate with its old
    state through a sigmoid gate. Nodes with no neighbors in a direction
    receive a zero message.
    """
    if len(states) != len(graph.nodes):
        raise ValueError("states must cover the graph's nodes")
    a_in, a_out = _mean_adjacency(graph)
    w_mi = ghn.tensor("gnn.msg_in.W")
    b_mi = ghn.tensor("gnn.msg_in.b")
    w_mo = ghn.tensor("gnn.msg_out.W")
    b_mo = ghn.tensor("gnn.msg_out.b")
    w_c = ghn.tensor("gnn.cand.W")
    b_c = ghn.tensor("gnn.cand.b")
    w_g = ghn.tensor("gnn.gate.W")
    b_g = ghn.tensor("gnn.gate.b")

    s = states.matrix.copy()
    for _ in range(ghn.config.gnn_rounds):
        msg_in = a_in @ (s @ w_mi + b_mi)
        msg_out = a_out @ (s @ w_mo + b_mo)
        x = np.concatenate([s, msg_in, msg_out], axis=1)
        cand = np.tanh(x @ w_c + b_c)
        gate = _sigmoid(x @ w_g + b_g)
        s = gate * cand + (1.0 - gate) * s
    return NodeStates(states.node_ids, s)


def node_states(ghn: Ghn, graph: CompGraph) -> NodeStates:
    """Embedding lookup followed by the configured number of GNN rounds."""
    return gnn_propagate(ghn, graph, embed_nodes(ghn, graph))


def generate_policy_params(ghn: Ghn, policy_graph: CompGraph) -> ParamSet:
    """Emit policy parameters per node through the deterministic head.

    The head outputs one fixed-width vector per node (width = the largest
    per-node requirement of the policy graph); each node keeps its first-k
    prefix. No randomness, no clipping.
    """
    layout = ghn.layout()
    if policy_graph != layout.policy_graph:
        raise ValueError(
            f"graph mismatch: expected {layout.policy_graph.arch_name!r}, got {policy_graph.arch_name!r}"
        )
    states = node_states(ghn, policy_graph)
    h = np.tanh(states.matrix @ ghn.tensor("det.W0") + ghn.tensor("det.b0"))
    out = h @ ghn.tensor("det.W1") + ghn.tensor("det.b1")
    pset: ParamSet = {}
    for i, v in enumerate(policy_graph.nodes):
        pset[v.id] = out[i, : v.param_count].copy()
    return pset
