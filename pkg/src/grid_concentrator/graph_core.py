"""Network topology: incidence matrices, degrees, and random graph sampling.

A power network is an undirected graph on ``n_nodes`` buses with an ordered
list of candidate lines. The edge list order is significant: line ``l`` keeps
the fixed index ``l`` for the lifetime of the topology, so incidence matrices
and per-line weight vectors align by position. Parallel lines (repeated node
pairs) are permitted; degrees count edge incidences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Topology",
    "build_topology",
    "path_topology",
    "complete_topology",
    "star_topology",
    "incidence_matrix",
    "degrees",
    "max_degree",
    "unweighted_laplacian",
    "sample_er_topology",
    "sample_random_tree",
    "is_connected",
    "is_tree",
    "topology_to_json",
    "topology_from_json",
]


@dataclass(frozen=True)
class Topology:
    """Immutable node/edge structure of a network.

    Attributes
    ----------
    n_nodes : int
        Number of buses, indexed ``0 .. n_nodes-1``.
    edges : tuple of (int, int)
        Ordered candidate lines. Line ``l`` connects ``edges[l]``; the pair
        order fixes the incidence row sign convention (first endpoint +1).
    reference_node : int or None
        Node whose incidence column is dropped in the reduced form.
    """

    n_nodes: int
    edges: tuple = field(default_factory=tuple)
    reference_node: int | None = None

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("topology needs at least one node")
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in self.edges))
        for l, (i, j) in enumerate(self.edges):
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge {l} endpoint out of range: ({i}, {j})")
            if i == j:
                raise ValueError(f"edge {l} is a self-loop at node {i}")
        if self.reference_node is not None and not (0 <= self.reference_node < self.n_nodes):
            raise ValueError(f"reference node {self.reference_node} out of range")

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def build_topology(n_nodes: int, edges, reference_node: int | None = None) -> Topology:
    """Validate and freeze a node count plus edge list into a Topology."""
    return Topology(n_nodes=n_nodes, edges=tuple(edges), reference_node=reference_node)


def path_topology(n_nodes: int, reference_node: int | None = None) -> Topology:
    """Path graph P_n: edges (0,1), (1,2), ..., (n-2, n-1)."""
    return Topology(n_nodes, tuple((i, i + 1) for i in range(n_nodes - 1)), reference_node)


def complete_topology(n_nodes: int, reference_node: int | None = None) -> Topology:
    """Complete graph K_n with edges in lexicographic order."""
    edges = tuple((i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes))
    return Topology(n_nodes, edges, reference_node)


def star_topology(n_leaves: int, reference_node: int | None = None) -> Topology:
    """Star with hub 0 and ``n_leaves`` leaves."""
    return Topology(n_leaves + 1, tuple((0, k + 1) for k in range(n_leaves)), reference_node)


def incidence_matrix(topology: Topology, reduced: bool = False) -> np.ndarray:
    """Branch-to-bus incidence matrix with rows ``e_i - e_j`` per line (i, j).

    Parameters
    ----------
    topology : Topology
    reduced : bool
        Drop the reference node's column (required for the square tree
        inverse). Raises if no reference node is set.

    Returns
    -------
    ndarray of shape (m, n) or (m, n-1), entries in {-1, 0, +1}.
    """
    if reduced and topology.reference_node is None:
        raise ValueError("reduced incidence requested but no reference node is set")
    a = np.zeros((topology.n_edges, topology.n_nodes))
    for l, (i, j) in enumerate(topology.edges):
        a[l, i] = 1.0
        a[l, j] = -1.0
    if reduced:
        keep = [c for c in range(topology.n_nodes) if c != topology.reference_node]
        a = a[:, keep]
    return a


def degrees(topology: Topology) -> np.ndarray:
    """Per-node count of incident lines (parallel lines counted separately)."""
    deg = np.zeros(topology.n_nodes, dtype=int)
    for i, j in topology.edges:
        deg[i] += 1
        deg[j] += 1
    return deg


def max_degree(topology: Topology) -> int:
    """Maximum node degree; 0 for an edgeless graph."""
    return int(degrees(topology).max(initial=0))


def unweighted_laplacian(topology: Topology) -> np.ndarray:
    """Combinatorial graph Laplacian A^T A (degrees on the diagonal)."""
    a = incidence_matrix(topology)
    return a.T @ a


def sample_er_topology(n_nodes: int, p: float, rng: np.random.Generator) -> Topology:
    """Homogeneous Erdos-Renyi topology: each candidate line on with prob p.

    Candidate pairs are visited in lexicographic order, drawing exactly one
    uniform variate each, so the edge list is bit-reproducible for a given
    generator state.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    edges = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < p:
                edges.append((i, j))
    return Topology(n_nodes, tuple(edges))


def sample_random_tree(n_nodes: int, rng: np.random.Generator,
                       reference_node: int | None = None) -> Topology:
    """Uniform random attachment tree: node k joins a uniformly chosen
    earlier node, for k = 1 .. n-1."""
    if n_nodes < 1:
        raise ValueError("tree needs at least one node")
    edges = tuple((int(rng.integers(0, k)), k) for k in range(1, n_nodes))
    return Topology(n_nodes, edges, reference_node)


def is_connected(topology: Topology) -> bool:
    """True iff every node is reachable from node 0."""
    n = topology.n_nodes
    if n == 1:
        return True
    adj = [[] for _ in range(n)]
    for i, j in topology.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return all(seen)


def is_tree(topology: Topology) -> bool:
    """True iff the graph is connected with exactly n-1 edges."""
    return topology.n_edges == topology.n_nodes - 1 and is_connected(topology)


def topology_to_json(topology: Topology) -> str:
    """Serialize as ``{"n": int, "edges": [[i,j],...], "reference": int|null}``."""
    return json.dumps({
        "n": topology.n_nodes,
        "edges": [[i, j] for i, j in topology.edges],
        "reference": topology.reference_node,
    })


def topology_from_json(text: str) -> Topology:
    """Inverse of :func:`topology_to_json`."""
    obj = json.loads(text)
    return Topology(
        n_nodes=int(obj["n"]),
        edges=tuple((int(i), int(j)) for i, j in obj["edges"]),
        reference_node=None if obj.get("reference") is None else int(obj["reference"]),
    )
