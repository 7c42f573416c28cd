"""
Spin polarity bias for penaltylab
Fully connected antiferromagnet plus a uniform field whose minima are exactly the k-positive states
"""

from dataclasses import dataclass
from typing import Dict, Sequence

from penaltylab.errors import ArgumentError
from penaltylab.qubo_core import IsingModel, Pair


@dataclass(frozen=True)
class PolarityGroup:
    """N fully connected spins that should settle with exactly k_target of them positive"""

    n_spins: int
    k_target: int = 1
    J_scale: float = 1.0

    def __post_init__(self):
        if self.n_spins < 2:
            raise ArgumentError("a polarity group needs at least two spins")
        if not 1 <= self.k_target <= self.n_spins - 1:
            raise ArgumentError(f"k_target={self.k_target} outside [1, {self.n_spins - 1}]")
        if not self.J_scale > 0:
            raise ArgumentError("J_scale must be > 0")

    @property
    def field(self) -> float:
        return self.J_scale * (self.n_spins - 2 * self.k_target)


def polarity_energy(g: PolarityGroup, positives: int) -> float:
    """Group energy with `positives` spins up: J [((2p - N)^2 - N) / 2 + (N - 2k)(2p - N)]"""
    total = 2 * positives - g.n_spins
    return g.J_scale * ((total * total - g.n_spins) / 2 + (g.n_spins - 2 * g.k_target) * total)


def one_hot_ising(g: PolarityGroup) -> IsingModel:
    N = g.n_spins
    couplings = {(i, j): g.J_scale for i in range(N) for j in range(i + 1, N)}
    fields = {i: g.field for i in range(N)} if g.field else {}
    return IsingModel(N, couplings, fields)


def apply_polarity_bias(model: IsingModel, group: Sequence[int], g: PolarityGroup) -> IsingModel:
    """Add the group's polarity coefficients onto the given spins of model"""
    group = [int(i) for i in group]
    if len(group) != g.n_spins:
        raise ArgumentError(f"group has {len(group)} spins, polarity group expects {g.n_spins}")
    if len(set(group)) != len(group):
        raise ArgumentError("group indices collide")
    if any(not 0 <= i < model.n_spins for i in group):
        raise ArgumentError(f"group index outside [0, {model.n_spins})")

    block = one_hot_ising(g)
    fields: Dict[int, float] = dict(model.fields)
    couplings: Dict[Pair, float] = dict(model.couplings)
    for a, h in block.fields.items():
        fields[group[a]] = fields.get(group[a], 0.0) + h
    for (a, b), J in block.couplings.items():
        key = tuple(sorted((group[a], group[b])))
        couplings[key] = couplings.get(key, 0.0) + J
    return IsingModel(model.n_spins, couplings, fields, model.offset, dict(model.labels))
