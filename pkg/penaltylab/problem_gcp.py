#!/usr/bin/env python3
"""
Graph coloring for penaltylab
Complete k-partite instances with a known coloring and the split-coefficient coloring QUBO
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

import networkx as nx
import numpy as np

from penaltylab.errors import ArgumentError, DimensionError, MissingStateError
from penaltylab.qubo_core import Assignment, QuboBuilder, QuboModel, _as_bits

Edge = Tuple[int, int]


def _normalize_edges(edges: Iterable[Edge], n_nodes: int) -> FrozenSet[Edge]:
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ArgumentError(f"self-loop on node {u}")
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise ArgumentError(f"edge ({u}, {v}) references a node outside [0, {n_nodes})")
        out.add((min(u, v), max(u, v)))
    return frozenset(out)


@dataclass(frozen=True)
class GcpInstance:
    """Graph to color with k_colors colors; known_chromatic is set for generated instances"""

    n_nodes: int
    k_colors: int
    edges: FrozenSet[Edge] = field(default_factory=frozenset)
    known_chromatic: Optional[int] = None

    def __post_init__(self):
        if self.n_nodes < 1 or self.k_colors < 1:
            raise ArgumentError("a coloring instance needs at least one node and one color")
        object.__setattr__(self, "edges", _normalize_edges(self.edges, self.n_nodes))

    @property
    def n_vars(self) -> int:
        return self.n_nodes * self.k_colors

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from(self.edges)
        return g

    def var(self, node: int, color: int) -> int:
        return node * self.k_colors + color


@dataclass(frozen=True)
class GcpParams:
    """A weighs one-color-per-node, B weighs same-colored edges"""

    A: float = 1.0
    B: float = 1.0

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise ArgumentError("coloring penalty weights must be non-negative")


@dataclass(frozen=True)
class ColoringDecoded:
    valid_onehot: bool
    proper: bool
    coloring: Optional[Dict[int, int]]


def gen_complete_kpartite(N: int, k: int) -> GcpInstance:
    """N nodes in k contiguous parts of N/k; every inter-part pair is an edge"""
    if k < 2:
        raise ArgumentError("a k-partite instance needs k >= 2")
    if N < k or N % k != 0:
        raise ArgumentError(f"k={k} must divide N={N}")
    g = nx.complete_multipartite_graph(*([N // k] * k))
    return GcpInstance(N, k, frozenset(g.edges()), known_chromatic=k)


def build_gcp_qubo(inst: GcpInstance, p: GcpParams) -> QuboModel:
    """H = A sum_v (1 - sum_i x_vi)^2 + B sum_(uv) sum_i x_ui x_vi, index = node*k + color"""
    k = inst.k_colors
    builder = QuboBuilder(inst.n_vars)
    for v in range(inst.n_nodes):
        for i in range(k):
            builder.set_label(inst.var(v, i), f"x[v={v},color={i}]")
        builder.add_squared(p.A, 1.0, [(inst.var(v, i), -1.0) for i in range(k)])
    for u, v in sorted(inst.edges):
        for i in range(k):
            builder.add_quadratic(inst.var(u, i), inst.var(v, i), p.B)
    return builder.build()


def gcp_gap_estimate(inst: GcpInstance, p: GcpParams) -> float:
    """Near-ground gap in the balanced regime: dropping one color costs A"""
    return float(p.A)


def gcp_exact_gap(inst: GcpInstance, p: GcpParams) -> float:
    """Gap of a generated k-partite instance: min(A, B * part size)"""
    if inst.known_chromatic is None or inst.known_chromatic != inst.k_colors:
        raise MissingStateError("exact gap is only known for generated k-partite instances")
    part = inst.n_nodes // inst.known_chromatic
    return float(min(p.A, p.B * part))


def gcp_max_energy(inst: GcpInstance, p: GcpParams) -> float:
    """All-ones energy: A N (k-1)^2 + B |E| k"""
    k = inst.k_colors
    return float(p.A * inst.n_nodes * (k - 1) ** 2 + p.B * len(inst.edges) * k)


def gcp_dynamic_range_estimate(inst: GcpInstance, p: GcpParams) -> float:
    """Analytic overlay of the coloring sweep: exact gap over the max energy (min is 0)"""
    return gcp_exact_gap(inst, p) / gcp_max_energy(inst, p)


def decode_coloring(inst: GcpInstance, x: Assignment) -> ColoringDecoded:
    bits = _as_bits(x)
    if bits.size != inst.n_vars:
        raise DimensionError(f"expected {inst.n_vars} bits, got {bits.size}")
    grid = bits.reshape(inst.n_nodes, inst.k_colors)
    if not (grid.sum(axis=1) == 1).all():
        return ColoringDecoded(False, False, None)
    coloring = {v: int(np.argmax(grid[v])) for v in range(inst.n_nodes)}
    proper = all(coloring[u] != coloring[v] for u, v in inst.edges)
    return ColoringDecoded(True, proper, coloring)


def known_coloring(inst: GcpInstance) -> Dict[int, int]:
    """Part j gets color j on a generated instance"""
    if inst.known_chromatic is None:
        raise MissingStateError("instance has no known coloring")
    part = inst.n_nodes // inst.known_chromatic
    return {v: v // part for v in range(inst.n_nodes)}


def encode_coloring(inst: GcpInstance, coloring: Dict[int, int]) -> np.ndarray:
    bits = np.zeros(inst.n_vars, dtype=np.int8)
    for v, color in coloring.items():
        bits[inst.var(v, color)] = 1
    return bits
