#!/usr/bin/env python3
"""
Core System for penaltylab
Problem registry that ties each instance type to its QUBO builder, sweep x-axis and
convergence predicates
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional

from loguru import logger

from penaltylab.errors import ArgumentError
from penaltylab.instances import Instance
from penaltylab.problem_cvcp import CvcpInstance, CvcpParams, build_cvcp_qubo, cvcp_max_energy
from penaltylab.problem_gcp import GcpInstance, GcpParams, build_gcp_qubo, gcp_max_energy
from penaltylab.problem_pmsp import PmspInstance, PmspParams, build_pmsp_qubo, pmsp_max_energy, term_ratio
from penaltylab.qubo_core import QuboModel


@dataclass(frozen=True)
class ProblemKind:
    """Everything the sweep and the CLI need to know about one problem family"""

    name: str
    instance_type: type
    build: Callable[[Instance, float, float], QuboModel]
    max_energy: Callable[[Instance, float, float], float]
    x_axis: Callable[[Instance, float, float], float]
    ground_energy: Callable[[Instance], Optional[float]]
    has_practical: bool = False


def _gcp_ground(inst: GcpInstance) -> Optional[float]:
    # energies are non-negative and a proper coloring scores 0
    if inst.known_chromatic is not None and inst.known_chromatic <= inst.k_colors:
        return 0.0
    return None


def _cvcp_ground(inst: CvcpInstance) -> Optional[float]:
    if inst.clique_sizes and len(inst.clique_sizes) <= inst.n_cliques:
        return 0.0
    return None


class ProblemRegistry:
    """Lookup of problem families by name or by instance type"""

    def __init__(self):
        self.kinds: Dict[str, ProblemKind] = {}
        self.register(ProblemKind(
            "gcp", GcpInstance,
            build=lambda inst, A, B: build_gcp_qubo(inst, GcpParams(A, B)),
            max_energy=lambda inst, A, B: gcp_max_energy(inst, GcpParams(A, B)),
            x_axis=lambda inst, A, B: A,
            ground_energy=_gcp_ground,
        ))
        self.register(ProblemKind(
            "cvcp", CvcpInstance,
            build=lambda inst, A, B: build_cvcp_qubo(inst, CvcpParams(A, B)),
            max_energy=lambda inst, A, B: cvcp_max_energy(inst, CvcpParams(A, B)),
            x_axis=lambda inst, A, B: A,
            ground_energy=_cvcp_ground,
        ))
        # the scheduling ground level moves with A and B, so only enumeration finds it
        self.register(ProblemKind(
            "pmsp", PmspInstance,
            build=lambda inst, A, B: build_pmsp_qubo(inst, PmspParams(A, B)),
            max_energy=lambda inst, A, B: pmsp_max_energy(inst, PmspParams(A, B)),
            x_axis=lambda inst, A, B: term_ratio(inst, PmspParams(A, B)),
            ground_energy=lambda inst: None,
            has_practical=True,
        ))

    def register(self, kind: ProblemKind):
        self.kinds[kind.name] = kind
        logger.debug("🧩 Registered problem kind {}", kind.name)

    def get(self, name: str) -> ProblemKind:
        try:
            return self.kinds[name]
        except KeyError:
            raise ArgumentError(f"unknown problem kind {name!r}; known: {sorted(self.kinds)}") from None

    def kind_of(self, inst: Instance) -> ProblemKind:
        for kind in self.kinds.values():
            if isinstance(inst, kind.instance_type):
                return kind
        raise ArgumentError(f"no problem kind handles {type(inst).__name__}")

    def build(self, inst: Instance, A: float, B: float) -> QuboModel:
        return self.kind_of(inst).build(inst, A, B)


REGISTRY = ProblemRegistry()
