#!/usr/bin/env python3
"""
Clique vertex cover for penaltylab
Clique-union instances joined by single bridge edges and the clique cover QUBO
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from penaltylab.errors import ArgumentError, DimensionError, MissingStateError
from penaltylab.problem_gcp import Edge, _normalize_edges
from penaltylab.qubo_core import Assignment, QuboBuilder, QuboModel, _as_bits


@dataclass(frozen=True)
class CvcpInstance:
    """n_cliques is the number of colors available; clique_sizes is set by the generator"""

    n_nodes: int
    n_cliques: int
    edges: FrozenSet[Edge] = field(default_factory=frozenset)
    clique_sizes: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.n_nodes < 1 or self.n_cliques < 1:
            raise ArgumentError("a clique cover instance needs at least one node and one color")
        object.__setattr__(self, "edges", _normalize_edges(self.edges, self.n_nodes))
        object.__setattr__(self, "clique_sizes", tuple(int(s) for s in self.clique_sizes))

    @property
    def n_vars(self) -> int:
        return self.n_nodes * self.n_cliques

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from(self.edges)
        return g

    def var(self, node: int, color: int) -> int:
        return node * self.n_cliques + color


@dataclass(frozen=True)
class CvcpParams:
    """A weighs one-color-per-node, B weighs same-colored non-adjacent pairs"""

    A: float = 1.0
    B: float = 1.0

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise ArgumentError("clique cover penalty weights must be non-negative")


@dataclass(frozen=True)
class CoverDecoded:
    valid_onehot: bool
    is_clique_cover: bool
    assignment: Optional[Dict[int, int]]


def gen_clique_union(sizes: Sequence[int], n_colors: Optional[int] = None) -> CvcpInstance:
    """Cliques on contiguous blocks, chained by one edge between their lowest-index nodes"""
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ArgumentError("clique union needs at least one clique")
    if any(s < 1 for s in sizes):
        raise ArgumentError("clique sizes must be >= 1")
    n_colors = len(sizes) if n_colors is None else int(n_colors)
    if n_colors < len(sizes):
        raise ArgumentError(f"{n_colors} colors cannot cover {len(sizes)} cliques")

    g = nx.Graph()
    starts: List[int] = []
    start = 0
    for size in sizes:
        starts.append(start)
        g.add_edges_from(nx.complete_graph(range(start, start + size)).edges())
        start += size
    g.add_edges_from(zip(starts, starts[1:]))
    return CvcpInstance(start, n_colors, frozenset(g.edges()), tuple(sizes))


def build_cvcp_qubo(inst: CvcpInstance, p: CvcpParams) -> QuboModel:
    """H = A sum_v (1 - sum_i x_vi)^2 + B sum_i [pairs of color i that are not edges]"""
    n = inst.n_cliques
    builder = QuboBuilder(inst.n_vars)
    for v in range(inst.n_nodes):
        for i in range(n):
            builder.set_label(inst.var(v, i), f"x[v={v},color={i}]")
        builder.add_squared(p.A, 1.0, [(inst.var(v, i), -1.0) for i in range(n)])
    # 1/2 (S^2 - S) counts every same-color pair; subtracting edges leaves the non-edges
    if p.B:
        for u in range(inst.n_nodes):
            for v in range(u + 1, inst.n_nodes):
                if (u, v) in inst.edges:
                    continue
                for i in range(n):
                    builder.add_quadratic(inst.var(u, i), inst.var(v, i), p.B)
    return builder.build()


def cvcp_max_energy(inst: CvcpInstance, p: CvcpParams) -> float:
    """All-ones energy: A N (n-1)^2 + B n (N(N-1)/2 - |E|)"""
    N, n = inst.n_nodes, inst.n_cliques
    non_edges = N * (N - 1) // 2 - len(inst.edges)
    return float(p.A * N * (n - 1) ** 2 + p.B * n * non_edges)


def _is_clique(g: nx.Graph, nodes: List[int]) -> bool:
    k = len(nodes)
    return g.subgraph(nodes).number_of_edges() == k * (k - 1) // 2


def decode_cover(inst: CvcpInstance, x: Assignment) -> CoverDecoded:
    bits = _as_bits(x)
    if bits.size != inst.n_vars:
        raise DimensionError(f"expected {inst.n_vars} bits, got {bits.size}")
    grid = bits.reshape(inst.n_nodes, inst.n_cliques)
    if not (grid.sum(axis=1) == 1).all():
        return CoverDecoded(False, False, None)
    assignment = {v: int(np.argmax(grid[v])) for v in range(inst.n_nodes)}
    g = inst.graph()
    classes: Dict[int, List[int]] = {}
    for v, color in assignment.items():
        classes.setdefault(color, []).append(v)
    covered = all(_is_clique(g, nodes) for nodes in classes.values())
    return CoverDecoded(True, covered, assignment)


def known_cover(inst: CvcpInstance) -> Dict[int, int]:
    """Clique j gets color j on a generated instance"""
    if not inst.clique_sizes:
        raise MissingStateError("instance has no generator metadata, so no known cover")
    assignment = {}
    node = 0
    for j, size in enumerate(inst.clique_sizes):
        for _ in range(size):
            assignment[node] = j
            node += 1
    return assignment


def encode_cover(inst: CvcpInstance, assignment: Dict[int, int]) -> np.ndarray:
    bits = np.zeros(inst.n_vars, dtype=np.int8)
    for v, color in assignment.items():
        bits[inst.var(v, color)] = 1
    return bits
