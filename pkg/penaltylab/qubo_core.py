#!/usr/bin/env python3
"""
QUBO / Ising core for penaltylab
Model containers, energy evaluation, exact QUBO <-> Ising conversion and the JSON model format
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import dimod
import numpy as np

from penaltylab.errors import ArgumentError, ConfigError, DimensionError, SpinDomainError

Pair = Tuple[int, int]


@dataclass(frozen=True)
class SpinVector:
    """A packed assignment, read either as bits {0,1} or spins {-1,+1}"""

    values: np.ndarray
    kind: str = "binary"

    def __post_init__(self):
        if self.kind not in ("binary", "spin"):
            raise ArgumentError(f"unknown SpinVector kind {self.kind!r}")
        arr = np.asarray(self.values, dtype=np.int8).reshape(-1)
        allowed = (0, 1) if self.kind == "binary" else (-1, 1)
        if arr.size and not np.isin(arr, allowed).all():
            raise SpinDomainError(f"{self.kind} vector holds values outside {allowed}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_string(cls, bits: str) -> "SpinVector":
        return cls(np.array([int(c) for c in bits], dtype=np.int8), "binary")

    def __len__(self) -> int:
        return int(self.values.size)

    def to_binary(self) -> "SpinVector":
        if self.kind == "binary":
            return self
        return SpinVector((self.values + 1) // 2, "binary")

    def to_spin(self) -> "SpinVector":
        if self.kind == "spin":
            return self
        return SpinVector(2 * self.values - 1, "spin")

    def to_string(self) -> str:
        return "".join(str(int(b)) for b in self.to_binary().values)


Assignment = Union[SpinVector, Sequence[int], np.ndarray]


def _as_bits(x: Assignment) -> np.ndarray:
    if isinstance(x, SpinVector):
        return x.to_binary().values
    return SpinVector(np.asarray(x), "binary").values


def _as_spins(s: Assignment) -> np.ndarray:
    if isinstance(s, SpinVector):
        return s.to_spin().values
    return SpinVector(np.asarray(s), "spin").values


def _check_index(i: int, n: int, what: str) -> int:
    if not isinstance(i, (int, np.integer)) or not 0 <= int(i) < n:
        raise ArgumentError(f"{what} index {i!r} outside [0, {n})")
    return int(i)


def _check_coefficient(c: float) -> float:
    c = float(c)
    if not math.isfinite(c):
        raise ArgumentError(f"coefficient {c!r} is not finite")
    return c


def _freeze_linear(linear: Mapping[int, float], n: int, what: str) -> Mapping[int, float]:
    out = {}
    for i, c in linear.items():
        out[_check_index(i, n, what)] = _check_coefficient(c)
    return MappingProxyType(out)


def _freeze_quadratic(quadratic: Mapping[Pair, float], n: int, what: str) -> Mapping[Pair, float]:
    out = {}
    for key, c in quadratic.items():
        i, j = key
        i = _check_index(i, n, what)
        j = _check_index(j, n, what)
        if i == j:
            raise ArgumentError(f"diagonal {what} entry ({i}, {i}); fold it into the linear term")
        if i > j:
            raise ArgumentError(f"{what} key ({i}, {j}) must be ordered i < j")
        out[(i, j)] = _check_coefficient(c)
    return MappingProxyType(out)


def _freeze_labels(labels: Optional[Mapping[int, str]], n: int) -> Mapping[int, str]:
    out = {}
    for i, name in (labels or {}).items():
        out[_check_index(int(i), n, "label")] = str(name)
    return MappingProxyType(out)


def _json_number(c: float):
    # integral coefficients are written as JSON integers so files round-trip bit-exactly
    return int(c) if float(c).is_integer() and abs(c) < 2**53 else float(c)


@dataclass(frozen=True)
class QuboModel:
    """E(x) = offset + sum_i linear_i x_i + sum_{i<j} quadratic_ij x_i x_j over x in {0,1}^n"""

    n_vars: int
    quadratic: Mapping[Pair, float] = field(default_factory=dict)
    linear: Mapping[int, float] = field(default_factory=dict)
    offset: float = 0.0
    labels: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.n_vars) < 0:
            raise ArgumentError("n_vars must be non-negative")
        object.__setattr__(self, "n_vars", int(self.n_vars))
        object.__setattr__(self, "linear", _freeze_linear(self.linear, self.n_vars, "linear"))
        object.__setattr__(self, "quadratic", _freeze_quadratic(self.quadratic, self.n_vars, "quadratic"))
        object.__setattr__(self, "offset", _check_coefficient(self.offset))
        object.__setattr__(self, "labels", _freeze_labels(self.labels, self.n_vars))

    @cached_property
    def dense(self) -> Tuple[np.ndarray, np.ndarray]:
        """(linear vector, strictly upper-triangular coupling matrix)"""
        lin = np.zeros(self.n_vars)
        quad = np.zeros((self.n_vars, self.n_vars))
        for i, c in self.linear.items():
            lin[i] = c
        for (i, j), c in self.quadratic.items():
            quad[i, j] = c
        lin.setflags(write=False)
        quad.setflags(write=False)
        return lin, quad

    def energy(self, x: Assignment) -> float:
        return qubo_energy(self, x)

    def energies(self, states: np.ndarray) -> np.ndarray:
        """Batched energies for a (k, n) array of 0/1 rows"""
        states = np.asarray(states, dtype=np.float64)
        if states.ndim != 2 or states.shape[1] != self.n_vars:
            raise DimensionError(f"expected (k, {self.n_vars}) states, got {states.shape}")
        lin, quad = self.dense
        return self.offset + states @ lin + np.einsum("ki,ki->k", states @ quad, states)

    def is_constant(self) -> bool:
        return not any(self.linear.values()) and not any(self.quadratic.values())

    def max_abs_coefficient(self) -> float:
        values = [abs(c) for c in self.linear.values()] + [abs(c) for c in self.quadratic.values()]
        return max(values, default=0.0)

    def label(self, i: int) -> str:
        return self.labels.get(i, f"x{i}")

    def shifted(self, c: float) -> "QuboModel":
        """Same model with the offset moved by c"""
        return QuboModel(self.n_vars, dict(self.quadratic), dict(self.linear), self.offset + c, dict(self.labels))

    def scaled(self, c: float) -> "QuboModel":
        """All coefficients and the offset multiplied by c"""
        return QuboModel(
            self.n_vars,
            {k: c * v for k, v in self.quadratic.items()},
            {k: c * v for k, v in self.linear.items()},
            c * self.offset,
            dict(self.labels),
        )

    def to_dict(self) -> Dict:
        return {
            "n_vars": self.n_vars,
            "linear": [[i, _json_number(c)] for i, c in sorted(self.linear.items())],
            "quadratic": [[i, j, _json_number(c)] for (i, j), c in sorted(self.quadratic.items())],
            "offset": _json_number(self.offset),
            "labels": {str(i): name for i, name in sorted(self.labels.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> "QuboModel":
        try:
            return cls(
                n_vars=int(data["n_vars"]),
                linear={int(i): float(c) for i, c in data.get("linear", [])},
                quadratic={(int(i), int(j)): float(c) for i, j, c in data.get("quadratic", [])},
                offset=float(data.get("offset", 0.0)),
                labels={int(i): name for i, name in data.get("labels", {}).items()},
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ArgumentError):
                raise
            raise ConfigError(f"malformed QUBO model JSON: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "QuboModel":
        return cls.from_dict(json.loads(text))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def __reduce__(self):
        # mapping proxies do not pickle; worker processes get the JSON dict
        return (QuboModel.from_dict, (self.to_dict(),))

    def to_bqm(self) -> dimod.BinaryQuadraticModel:
        bqm = dimod.BinaryQuadraticModel(dict(self.linear), dict(self.quadratic), self.offset, dimod.BINARY)
        bqm.add_variables_from({i: 0.0 for i in range(self.n_vars)})
        return bqm

    @classmethod
    def from_bqm(cls, bqm: dimod.BinaryQuadraticModel, labels: Optional[Mapping[int, str]] = None) -> "QuboModel":
        bqm = bqm.change_vartype(dimod.BINARY, inplace=False)
        n = max((int(v) for v in bqm.variables), default=-1) + 1
        quadratic = {}
        for (u, v), c in bqm.quadratic.items():
            i, j = sorted((int(u), int(v)))
            quadratic[(i, j)] = quadratic.get((i, j), 0.0) + c
        return cls(n, quadratic, {int(v): c for v, c in bqm.linear.items()}, bqm.offset, labels)


@dataclass(frozen=True)
class IsingModel:
    """E(s) = offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j over s in {-1,+1}^n"""

    n_spins: int
    couplings: Mapping[Pair, float] = field(default_factory=dict)
    fields: Mapping[int, float] = field(default_factory=dict)
    offset: float = 0.0
    labels: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.n_spins) < 0:
            raise ArgumentError("n_spins must be non-negative")
        object.__setattr__(self, "n_spins", int(self.n_spins))
        object.__setattr__(self, "fields", _freeze_linear(self.fields, self.n_spins, "field"))
        object.__setattr__(self, "couplings", _freeze_quadratic(self.couplings, self.n_spins, "coupling"))
        object.__setattr__(self, "offset", _check_coefficient(self.offset))
        object.__setattr__(self, "labels", _freeze_labels(self.labels, self.n_spins))

    @cached_property
    def dense(self) -> Tuple[np.ndarray, np.ndarray]:
        h = np.zeros(self.n_spins)
        J = np.zeros((self.n_spins, self.n_spins))
        for i, c in self.fields.items():
            h[i] = c
        for (i, j), c in self.couplings.items():
            J[i, j] = c
        h.setflags(write=False)
        J.setflags(write=False)
        return h, J

    def energy(self, s: Assignment) -> float:
        return ising_energy(self, s)

    def energies(self, spins: np.ndarray) -> np.ndarray:
        """Batched energies for a (k, n) array of -1/+1 rows"""
        spins = np.asarray(spins, dtype=np.float64)
        if spins.ndim != 2 or spins.shape[1] != self.n_spins:
            raise DimensionError(f"expected (k, {self.n_spins}) spins, got {spins.shape}")
        h, J = self.dense
        return self.offset + spins @ h + np.einsum("ki,ki->k", spins @ J, spins)

    def is_constant(self) -> bool:
        return not any(self.fields.values()) and not any(self.couplings.values())

    def max_abs_coefficient(self) -> float:
        values = [abs(c) for c in self.fields.values()] + [abs(c) for c in self.couplings.values()]
        return max(values, default=0.0)

    def typical_abs_coefficient(self) -> float:
        """Median nonzero |h_i| or |J_ij|; 0 for a constant model"""
        values = [abs(c) for c in self.fields.values()] + [abs(c) for c in self.couplings.values()]
        values = [v for v in values if v > 0]
        return float(np.median(values)) if values else 0.0

    def to_dict(self) -> Dict:
        return {
            "n_spins": self.n_spins,
            "h": [[i, _json_number(c)] for i, c in sorted(self.fields.items())],
            "J": [[i, j, _json_number(c)] for (i, j), c in sorted(self.couplings.items())],
            "offset": _json_number(self.offset),
            "labels": {str(i): name for i, name in sorted(self.labels.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> "IsingModel":
        try:
            return cls(
                n_spins=int(data["n_spins"]),
                fields={int(i): float(c) for i, c in data.get("h", [])},
                couplings={(int(i), int(j)): float(c) for i, j, c in data.get("J", [])},
                offset=float(data.get("offset", 0.0)),
                labels={int(i): name for i, name in data.get("labels", {}).items()},
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ArgumentError):
                raise
            raise ConfigError(f"malformed Ising model JSON: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "IsingModel":
        return cls.from_dict(json.loads(text))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    def __reduce__(self):
        return (IsingModel.from_dict, (self.to_dict(),))


Model =Union[QuboModel, IsingModel]


def qubo_energy(model: QuboModel, x: Assignment) -> float:
    """offset + sum linear_i x_i + sum quadratic_ij x_i x_j"""
    bits = _as_bits(x)
    if bits.size != model.n_vars:
        raise DimensionError(f"assignment has {bits.size} bits, model has {model.n_vars} variables")
    energy = model.offset
    for i, c in model.linear.items():
        if bits[i]:
            energy += c
    for (i, j), c in model.quadratic.items():
        if bits[i] and bits[j]:
            energy += c
    return float(energy)


def ising_energy(model: IsingModel, s: Assignment) -> float:
    """offset + sum h_i s_i + sum J_ij s_i s_j"""
    spins = _as_spins(s)
    if spins.size != model.n_spins:
        raise DimensionError(f"spin vector has {spins.size} entries, model has {model.n_spins} spins")
    energy = model.offset
    for i, c in model.fields.items():
        energy += c * int(spins[i])
    for (i, j), c in model.couplings.items():
        energy += c * int(spins[i]) * int(spins[j])
    return float(energy)


def qubo_to_ising(model: QuboModel) -> IsingModel:
    """Substitute x = (1 + s) / 2; energies agree state by state under s = 2x - 1"""
    fields: Dict[int, float] = {}
    couplings: Dict[Pair, float] = {}
    offset = model.offset
    for i, a in model.linear.items():
        fields[i] = fields.get(i, 0.0) + a / 2
        offset += a / 2
    for (i, j), b in model.quadratic.items():
        couplings[(i, j)] = b / 4
        fields[i] = fields.get(i, 0.0) + b / 4
        fields[j] = fields.get(j, 0.0) + b / 4
        offset += b / 4
    fields = {i: c for i, c in fields.items() if c != 0.0}
    couplings = {k: c for k, c in couplings.items() if c != 0.0}
    return IsingModel(model.n_vars, couplings, fields, offset, dict(model.labels))


def ising_to_qubo(model: IsingModel) -> QuboModel:
    """Substitute s = 2x - 1; inverse of qubo_to_ising up to exact energy equality"""
    linear: Dict[int, float] = {}
    quadratic: Dict[Pair, float] = {}
    offset = model.offset
    for i, h in model.fields.items():
        linear[i] = linear.get(i, 0.0) + 2 * h
        offset -= h
    for (i, j), J in model.couplings.items():
        quadratic[(i, j)] = 4 * J
        linear[i] = linear.get(i, 0.0) - 2 * J
        linear[j] = linear.get(j, 0.0) - 2 * J
        offset += J
    linear = {i: c for i, c in linear.items() if c != 0.0}
    quadratic = {k: c for k, c in quadratic.items() if c != 0.0}
    return QuboModel(model.n_spins, quadratic, linear, offset, dict(model.labels))


def as_qubo(model: Model) -> QuboModel:
    return model if isinstance(model, QuboModel) else ising_to_qubo(model)


def n_variables(model: Model) -> int:
    return model.n_vars if isinstance(model, QuboModel) else model.n_spins


def model_energy(model: Model, x: Assignment) -> float:
    """Energy of a state in the model's own variable convention"""
    return qubo_energy(model, x) if isinstance(model, QuboModel) else ising_energy(model, x)


def load_model(text: str) -> Model:
    """Parse either JSON model shape (n_vars -> QUBO, n_spins -> Ising)"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"model file is not JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("model JSON must be an object")
    if "n_vars" in data:
        return QuboModel.from_dict(data)
    if "n_spins" in data:
        return IsingModel.from_dict(data)
    raise ConfigError("model JSON needs either 'n_vars' (QUBO) or 'n_spins' (Ising)")


class QuboBuilder:
    """Mutable accumulator used by the problem builders; build() freezes it into a QuboModel"""

    def __init__(self, n_vars: int):
        self.n_vars = n_vars
        self.linear: Dict[int, float] = {}
        self.quadratic: Dict[Pair, float] = {}
        self.offset = 0.0
        self.labels: Dict[int, str] = {}

    def add_constant(self, c: float):
        self.offset += c

    def add_linear(self, i: int, c: float):
        self.linear[i] = self.linear.get(i, 0.0) + c

    def add_quadratic(self, i: int, j: int, c: float):
        if i == j:
            raise ArgumentError(f"diagonal term ({i}, {i}) passed to add_quadratic; use add_linear")
        key = (i, j) if i < j else (j, i)
        self.quadratic[key] = self.quadratic.get(key, 0.0) + c

    def add_squared(self, weight: float, constant: float, terms: Iterable[Tuple[int, float]]):
        """Add weight * (constant + sum_k w_k y_k)^2, folding y^2 = y into the linear part"""
        terms = list(terms)
        self.add_constant(weight * constant * constant)
        for i, w in terms:
            self.add_linear(i, weight * (2 * constant * w + w * w))
        for a in range(len(terms)):
            i, wi = terms[a]
            for b in range(a + 1, len(terms)):
                j, wj = terms[b]
                self.add_quadratic(i, j, 2 * weight * wi * wj)

    def set_label(self, i: int, name: str):
        self.labels[i] = name

    def build(self) -> QuboModel:
        linear = {i: c for i, c in self.linear.items() if c != 0.0}
        quadratic = {k: c for k, c in self.quadratic.items() if c != 0.0}
        return QuboModel(self.n_vars, quadratic, linear, self.offset, self.labels)
