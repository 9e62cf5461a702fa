"""Computational graphs of parameter tensors.

A target network (an MLP policy, or the hypernetwork's own updatable
structure) is described as a directed acyclic graph whose nodes are
parameter tensors. Every node carries the number of parameters it needs
(``param_count``); generators emit a fixed-width vector per node and the
node takes the first ``param_count`` entries of it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

ROLE_WEIGHT = "weight"
ROLE_BIAS = "bias"
ROLE_EMBEDDING = "embedding"
_ROLES = (ROLE_WEIGHT, ROLE_BIAS, ROLE_EMBEDDING)
# tie-break order for node sorting within a layer
_ROLE_RANK = {ROLE_WEIGHT: 0, ROLE_BIAS: 1, ROLE_EMBEDDING: 2}

ACT_TANH = "tanh"
ACT_IDENTITY = "identity"


@dataclass(frozen=True)
class ParamNode:
    """One parameter tensor of a target network.

    ``param_count`` is the number of scalars this node needs; it must
    equal the product of ``shape``.
    """

    id: int
    role: str
    layer_index: int
    param_count: int
    shape: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"node id must be non-negative, got {self.id}")
        if self.role not in _ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.layer_index < 0:
            raise ValueError("layer_index must be non-negative")
        if self.param_count < 1:
            raise ValueError("param_count must be positive")
        if math.prod(self.shape) != self.param_count:
            raise ValueError(
                f"shape {self.shape} does not match param_count {self.param_count}"
            )


class CompGraph:
    """Directed acyclic graph of ParamNodes with dataflow edges.

    Node ids are dense and 0-based; the node list order is the canonical
    layout order for flat parameter vectors built from this graph.
    """

    def __init__(self, arch_name: str, nodes, edges):
        self.arch_name = arch_name
        self.nodes: tuple[ParamNode, ...] = tuple(nodes)
        self.edges: tuple[tuple[int, int], ...] = tuple(
            (int(a), int(b)) for a, b in edges
        )
        self._validate()
        self._in_nbrs: list[list[int]] | None = None
        self._out_nbrs: list[list[int]] | None = None

    def _validate(self):
        n = len(self.nodes)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ValueError(f"node ids must be dense 0-based, got {node.id} at {i}")
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a},{b}) references missing node")
        self._check_acyclic()

    def _check_acyclic(self):
        indeg = [0] * len(self.nodes)
        for _, b in self.edges:
            indeg[b] += 1
        out = self.out_neighbors()
        queue = [i for i, d in enumerate(indeg) if d == 0]
        seen = 0
        while queue:
            v = queue.pop()
            seen += 1
            for w in out[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
        if seen != len(self.nodes):
            raise ValueError("graph has a cycle")

    def in_neighbors(self) -> list[list[int]]:
        if self._in_nbrs is None:
            nbrs = [[] for _ in self.nodes]
            for a, b in self.edges:
                nbrs[b].append(a)
            self._in_nbrs = nbrs
        return self._in_nbrs

    def out_neighbors(self) -> list[list[int]]:
        if self._out_nbrs is None:
            nbrs = [[] for _ in self.nodes]
            for a, b in self.edges:
                nbrs[a].append(b)
            self._out_nbrs = nbrs
        return self._out_nbrs

    def total_param_count(self) -> int:
        return sum(v.param_count for v in self.nodes)

    def __eq__(self, other):
        if not isinstance(other, CompGraph):
            return NotImplemented
        return (
            self.arch_name == other.arch_name
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.arch_name, self.nodes, self.edges))

    def __repr__(self):
        return f"CompGraph({self.arch_name!r}, nodes={len(self.nodes)}, edges={len(self.edges)})"

    def to_json(self) -> str:
        doc = {
            "arch_name": self.arch_name,
            "nodes": [
                {
                    "id": v.id,
                    "role": v.role,
                    "layer_index": v.layer_index,
                    "shape": list(v.shape),
                    "name": v.name,
                }
                for v in self.nodes
            ],
            "edges": [list(e) for e in self.edges],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CompGraph":
        doc = json.loads(text)
        nodes = [
            ParamNode(
                id=d["id"],
                role=d["role"],
                layer_index=d["layer_index"],
                param_count=int(math.prod(d["shape"])),
                shape=tuple(d["shape"]),
                name=d.get("name", ""),
            )
            for d in doc["nodes"]
        ]
        return cls(doc["arch_name"], nodes, [tuple(e) for e in doc["edges"]])


@dataclass(frozen=True)
class MlpSpec:
    """Dense feed-forward network: tanh hidden layers, identity or tanh output."""

    input_dim: int
    hidden_dims: tuple[int, ...]
    output_dim: int
    activation: str = ACT_TANH
    output_activation: str = ACT_IDENTITY

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(self.hidden_dims))
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("dims must be >= 1")
        if any(h < 1 for h in self.hidden_dims):
            raise ValueError("hidden dims must be >= 1")
        if self.activation != ACT_TANH:
            raise ValueError("hidden activation must be tanh")
        if self.output_activation not in (ACT_IDENTITY, ACT_TANH):
            raise ValueError("output activation must be identity or tanh")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim, *self.hidden_dims, self.output_dim]
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]

    @property
    def arch_name(self) -> str:
        hid = "x".join(str(h) for h in self.hidden_dims) if self.hidden_dims else "0"
        return f"mlp-{self.input_dim}-{hid}-{self.output_dim}-{self.output_activation}"


def build_mlp_graph(spec: MlpSpec) -> CompGraph:
    """Graph for a dense MLP: one weight node and one bias node per layer.

    Weight node k = fan_in * fan_out, bias node k = fan_out. Each layer's
    two nodes feed both nodes of the next layer (the bias sits in parallel
    with its weight matrix).
    """
    nodes = []
    for li, (fan_in, fan_out) in enumerate(spec.layer_dims):
        nodes.append(
            ParamNode(
                id=len(nodes),
                role=ROLE_WEIGHT,
                layer_index=li,
                param_count=fan_in * fan_out,
                shape=(fan_in, fan_out),
                name=f"layer{li}.W",
            )
        )
        nodes.append(
            ParamNode(
                id=len(nodes),
                role=ROLE_BIAS,
                layer_index=li,
                param_count=fan_out,
                shape=(fan_out,),
                name=f"layer{li}.b",
            )
        )
    edges = []
    n_layers = len(spec.layer_dims)
    for li in range(n_layers - 1):
        for a in (2 * li, 2 * li + 1):
            for b in (2 * li + 2, 2 * li + 3):
                edges.append((a, b))
    return CompGraph(spec.arch_name, nodes, edges)


def max_param_count(graph: CompGraph) -> int:
    """Largest per-node parameter requirement; the generator's output width."""
    if not graph.nodes:
        raise ValueError("empty graph")
    return max(v.param_count for v in graph.nodes)


def take_first_k(full_output: np.ndarray, node: ParamNode) -> np.ndarray:
    """Prefix rule: a node needing k parameters takes the first k entries."""
    full_output = np.asarray(full_output)
    if full_output.ndim != 1:
        raise ValueError("full_output must be a vector")
    if full_output.shape[0] < node.param_count:
        raise ValueError(
            f"output width underflow: need {node.param_count}, got {full_output.shape[0]}"
        )
    return full_output[: node.param_count]
