"""
Instance files for penaltylab
JSON reading and writing for coloring, clique cover and scheduling instances
"""

import json
from pathlib import Path
from typing import Dict, Union

from penaltylab.errors import ConfigError, PenaltyLabError
from penaltylab.problem_cvcp import CvcpInstance
from penaltylab.problem_gcp import GcpInstance
from penaltylab.problem_pmsp import PmspInstance, ensure_known_optimum

Instance = Union[GcpInstance, CvcpInstance, PmspInstance]


def instance_to_dict(inst: Instance) -> Dict:
    if isinstance(inst, GcpInstance):
        data = {"type": "gcp", "n_nodes": inst.n_nodes, "k_colors": inst.k_colors, "edges": sorted(map(list, inst.edges))}
        if inst.known_chromatic is not None:
            data["known_chromatic"] = inst.known_chromatic
        return data
    if isinstance(inst, CvcpInstance):
        data = {"type": "cvcp", "n_nodes": inst.n_nodes, "n_cliques": inst.n_cliques, "edges": sorted(map(list, inst.edges))}
        if inst.clique_sizes:
            data["clique_sizes"] = list(inst.clique_sizes)
        return data
    data = {"type": "pmsp", "jobs": list(inst.jobs), "m": inst.n_machines, "M": inst.slack_bound}
    if inst.known_min_makespan is not None:
        data["known_min_makespan"] = inst.known_min_makespan
    return data


def instance_from_dict(data: Dict) -> Instance:
    """Parse any instance shape; scheduling instances without an optimum get one by exhaustive search"""
    if not isinstance(data, dict):
        raise ConfigError("instance JSON must be an object")
    kind = data.get("type")
    try:
        if kind == "gcp":
            return GcpInstance(
                int(data["n_nodes"]), int(data["k_colors"]), frozenset(map(tuple, data.get("edges", []))),
                data.get("known_chromatic"),
            )
        if kind == "cvcp":
            return CvcpInstance(
                int(data["n_nodes"]), int(data["n_cliques"]), frozenset(map(tuple, data.get("edges", []))),
                tuple(data.get("clique_sizes", ())),
            )
        if kind == "pmsp":
            inst = PmspInstance(
                tuple(data["jobs"]), int(data.get("m", 2)), int(data.get("M", 15)), data.get("known_min_makespan")
            )
            return ensure_known_optimum(inst)
    except PenaltyLabError as e:
        raise ConfigError(f"invalid {kind} instance: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed {kind} instance: {e}") from e
    raise ConfigError(f"unknown instance type {kind!r}; expected gcp, cvcp or pmsp")


def load_instance(path: Union[str, Path]) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read instance file {path}: {e}") from e
    try:
        return instance_from_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise ConfigError(f"instance file {path} is not JSON: {e}") from e


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst))
