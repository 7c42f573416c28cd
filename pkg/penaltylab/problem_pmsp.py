#!/usr/bin/env python3
"""
Parallel machine scheduling for penaltylab
Greedy-unsolvable balanced instances, the LPT baseline, the log-slack scheduling QUBO,
makespan decoding and the practical-correct state test
"""

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from penaltylab.errors import ArgumentError, ConstructionError, DimensionError, MissingStateError
from penaltylab.qubo_core import Assignment, QuboBuilder, QuboModel, _as_bits
from penaltylab.spectrum import SpectrumLimits, count_states

# Instances used throughout the experiments
SMALL_JOBS = (7, 6, 5, 4, 3, 1)
SIX_JOBS = (19, 13, 12, 21, 16, 7)
TWELVE_JOBS = (73, 71, 59, 47, 41, 37, 79, 67, 61, 53, 43, 25)


@dataclass(frozen=True)
class PmspInstance:
    """Jobs with integer process times on n_machines identical machines; machine 1 is the designated longest"""

    jobs: Tuple[int, ...]
    n_machines: int = 2
    slack_bound: int = 15
    known_min_makespan: Optional[int] = None

    def __post_init__(self):
        jobs = tuple(int(L) for L in self.jobs)
        if not jobs:
            raise ArgumentError("a scheduling instance needs at least one job")
        if any(L < 1 for L in jobs):
            raise ArgumentError("process times must be positive integers")
        if self.n_machines < 1:
            raise ArgumentError("need at least one machine")
        object.__setattr__(self, "jobs", jobs)

    @property
    def n_jobs(self) -> int:
        return len(self.jobs)

    @property
    def total(self) -> int:
        return sum(self.jobs)

    @property
    def slack_bits(self) -> int:
        """floor(log2(M - 1)) + 1 bits per machine 2..m"""
        if self.slack_bound < 2:
            raise ArgumentError(f"slack bound M={self.slack_bound} < 2 leaves the log encoding undefined")
        return (self.slack_bound - 1).bit_length()

    @property
    def n_vars(self) -> int:
        return self.n_jobs * self.n_machines + (self.n_machines - 1) * self.slack_bits

    def job_var(self, job: int, machine: int) -> int:
        """machine is 0-based; machine 0 is the designated longest machine"""
        return job * self.n_machines + machine

    def slack_var(self, bit: int, machine: int) -> int:
        """machine is 0-based and >= 1"""
        return self.n_jobs * self.n_machines + (machine - 1) * self.slack_bits + bit


@dataclass(frozen=True)
class PmspParams:
    """A weighs one-job-one-machine, B weighs machine-1-is-longest; the makespan term has weight 1"""

    A: float = 1.0
    B: float = 2.0

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise ArgumentError("scheduling penalty weights must be non-negative")


@dataclass(frozen=True)
class PmspDecoded:
    onehot_ok: bool
    loads: Tuple[int, ...]
    makespan: int
    machine1_is_max: bool
    slack_values: Tuple[int, ...]
    assignment: Optional[Dict[int, int]]


@dataclass(frozen=True)
class GreedyResult:
    assignment: Tuple[int, ...]
    loads: Tuple[int, ...]
    makespan: int


def greedy_schedule(inst: PmspInstance) -> GreedyResult:
    """LPT list scheduling: longest remaining job onto the least-loaded machine, lowest index on ties"""
    loads = [0] * inst.n_machines
    assignment = [0] * inst.n_jobs
    for i in sorted(range(inst.n_jobs), key=lambda j: (-inst.jobs[j], j)):
        machine = min(range(inst.n_machines), key=lambda a: (loads[a], a))
        assignment[i] = machine
        loads[machine] += inst.jobs[i]
    return GreedyResult(tuple(assignment), tuple(loads), max(loads))


def _subset_sum_counts(jobs: Sequence[int]) -> np.ndarray:
    """counts[s] = number of job subsets with total s"""
    counts = np.zeros(sum(jobs) + 1, dtype=np.int64)
    counts[0] = 1
    for L in jobs:
        counts[L:] = counts[L:] + counts[:-L].copy()
    return counts


def _min_makespan_search(jobs: Sequence[int], m: int) -> int:
    order = sorted(jobs, reverse=True)
    best = greedy_schedule(PmspInstance(tuple(order), m)).makespan
    lower = max(order[0], -(-sum(order) // m))
    loads = [0] * m

    def dfs(k: int):
        nonlocal best
        if best == lower:
            return
        if k == len(order):
            best = min(best, max(loads))
            return
        seen = set()
        for a in range(m):
            if loads[a] in seen or loads[a] + order[k] >= best:
                continue
            seen.add(loads[a])
            loads[a] += order[k]
            dfs(k + 1)
            loads[a] -= order[k]

    dfs(0)
    return best


def exact_min_makespan(jobs: Sequence[int], m: int) -> int:
    """Exhaustive optimum: subset sums for two machines, branch and bound otherwise"""
    jobs = [int(L) for L in jobs]
    total = sum(jobs)
    if m == 1:
        return total
    if m == 2:
        counts = _subset_sum_counts(jobs)
        reachable = np.nonzero(counts)[0]
        return int(np.min(np.maximum(reachable, total - reachable)))
    return _min_makespan_search(jobs, m)


def count_optimal_assignments(jobs: Sequence[int], m: int) -> int:
    """Number of job-to-machine assignments (machines distinguishable) reaching the minimum makespan"""
    jobs = [int(L) for L in jobs]
    opt = exact_min_makespan(jobs, m)
    if m == 1:
        return 1
    if m == 2:
        counts = _subset_sum_counts(jobs)
        total = sum(jobs)
        return int(sum(counts[s] for s in {opt, total - opt}))
    loads = [0] * m
    found = 0

    def dfs(k: int):
        nonlocal found
        if k == len(jobs):
            found += 1
            return
        for a in range(m):
            if loads[a] + jobs[k] <= opt:
                loads[a] += jobs[k]
                dfs(k + 1)
                loads[a] -= jobs[k]

    dfs(0)
    return found


def ensure_known_optimum(inst: PmspInstance) -> PmspInstance:
    """Fill known_min_makespan by exhaustive search when the instance does not carry it"""
    if inst.known_min_makespan is not None:
        return inst
    return replace(inst, known_min_makespan=exact_min_makespan(inst.jobs, inst.n_machines))


def gen_balanced_instance(
    base_jobs: Sequence[int], smallest: int = 1, m: int = 2, slack_bound: int = 15
) -> PmspInstance:
    """Two-machine instance whose LPT schedule misses the equal split.

    The first two base jobs go to different machines; every later pair goes
    longest-job-first onto the currently LONGER machine. A final pair
    (smallest + difference, smallest) then equalizes the two totals.
    """
    if m != 2:
        raise ArgumentError("the balanced construction is defined for two machines only")
    base = [int(L) for L in base_jobs]
    if len(base) < 2 or len(base) % 2:
        raise ArgumentError("base jobs come in pairs (at least one pair)")
    if any(a < b for a, b in zip(base, base[1:])):
        raise ArgumentError("base jobs must be given in descending order")
    if smallest < 1:
        raise ArgumentError("smallest job must be >= 1")

    loads = [base[0], base[1]]
    for longer, shorter in zip(base[2::2], base[3::2]):
        heavy = 0 if loads[0] >= loads[1] else 1
        loads[heavy] += longer
        loads[1 - heavy] += shorter
    filler = smallest + abs(loads[0] - loads[1])
    if filler >= base[-1]:
        raise ConstructionError(
            f"equalizing job {filler} would not stay below the smallest base job {base[-1]}; pick a smaller 'smallest'"
        )

    jobs = tuple(sorted(base + [filler, smallest], reverse=True))
    inst = PmspInstance(jobs, 2, slack_bound, known_min_makespan=sum(jobs) // 2)
    greedy = greedy_schedule(inst)
    if greedy.makespan <= inst.known_min_makespan:
        raise ConstructionError(f"LPT already reaches the optimum {inst.known_min_makespan} on {jobs}")
    logger.debug("🏗️ Balanced instance {} (optimum {}, LPT {})", jobs, inst.known_min_makespan, greedy.makespan)
    return inst


def pad_balanced_instance(inst: PmspInstance, pair_lengths: Sequence[int]) -> PmspInstance:
    """Prepend equal job pairs (c, c) with c >= every existing job; LPT places them first and the gap survives"""
    if inst.n_machines != 2 or inst.known_min_makespan is None:
        raise ArgumentError("padding needs a two-machine instance with a known optimum")
    jobs = list(inst.jobs)
    known = inst.known_min_makespan
    for c in pair_lengths:
        c = int(c)
        if c < max(jobs):
            raise ArgumentError(f"padding pair {c} is shorter than existing job {max(jobs)}")
        jobs = [c, c] + jobs
        known += c
    padded = PmspInstance(tuple(jobs), 2, inst.slack_bound, known)
    if greedy_schedule(padded).makespan <= known:
        raise ConstructionError("padding removed the greedy gap")
    return padded


def build_pmsp_qubo(inst: PmspInstance, p: PmspParams) -> QuboModel:
    """H = sum_i L_i x_i1 + A sum_i (1 - sum_a x_ia)^2
           + B sum_{a>=2} (M - sum_i L_i (x_i1 - x_ia) - sum_n 2^n z_na)^2"""
    bits = inst.slack_bits
    M = inst.slack_bound
    if M > 2**bits - 1:
        logger.warning("⚠️ slack register tops out at {} < M={}; equal loads cannot reach zero penalty", 2**bits - 1, M)
    builder = QuboBuilder(inst.n_vars)
    for i, L in enumerate(inst.jobs):
        for a in range(inst.n_machines):
            builder.set_label(inst.job_var(i, a), f"x[job={i},machine={a + 1}]")
        builder.add_linear(inst.job_var(i, 0), float(L))
        builder.add_squared(p.A, 1.0, [(inst.job_var(i, a), -1.0) for a in range(inst.n_machines)])
    for a in range(1, inst.n_machines):
        terms = []
        for i, L in enumerate(inst.jobs):
            terms.append((inst.job_var(i, 0), -float(L)))
            terms.append((inst.job_var(i, a), float(L)))
        for n in range(bits):
            builder.set_label(inst.slack_var(n, a), f"z[n={n},machine={a + 1}]")
            terms.append((inst.slack_var(n, a), -float(2**n)))
        builder.add_squared(p.B, float(M), terms)
    return builder.build()


def pmsp_max_energy(inst: PmspInstance, p: PmspParams) -> float:
    """A N (m-2)^2 + B (m-1)(M + sum L)^2: every job on every machine but machine 1, slack 0"""
    m = inst.n_machines
    return float(p.A * inst.n_jobs * (m - 2) ** 2 + p.B * (m - 1) * (inst.slack_bound + inst.total) ** 2)


def term_ratio(inst: PmspInstance, p: PmspParams) -> float:
    """Largest one-hot penalty over largest machine-1 penalty: A N (m-1)^2 / (B (m-1)(M + sum L)^2)"""
    m = inst.n_machines
    second = p.A * inst.n_jobs * (m - 1) ** 2
    third = p.B * (m - 1) * (inst.slack_bound + inst.total) ** 2
    if third == 0:
        raise ArgumentError("term ratio needs B > 0 and at least two machines")
    return float(second / third)


def pmsp_balance_a(inst: PmspInstance, B: float) -> float:
    """The A at which term_ratio equals 1"""
    m = inst.n_machines
    return float(B * (inst.slack_bound + inst.total) ** 2 / (inst.n_jobs * (m - 1)))


def decode_pmsp(inst: PmspInstance, x: Assignment) -> PmspDecoded:
    bits = _as_bits(x)
    if bits.size != inst.n_vars:
        raise DimensionError(f"expected {inst.n_vars} bits, got {bits.size}")
    N, m = inst.n_jobs, inst.n_machines
    grid = bits[: N * m].reshape(N, m).astype(np.int64)
    loads = tuple(int(v) for v in grid.T @ np.asarray(inst.jobs, dtype=np.int64))
    onehot_ok = bool((grid.sum(axis=1) == 1).all())
    weights = 2 ** np.arange(inst.slack_bits)
    slack = bits[N * m :].reshape(m - 1, inst.slack_bits).astype(np.int64) @ weights if m > 1 else np.zeros(0)
    makespan = max(loads)
    assignment = {i: int(np.argmax(grid[i])) for i in range(N)} if onehot_ok else None
    return PmspDecoded(onehot_ok, loads, makespan, loads[0] == makespan, tuple(int(s) for s in slack), assignment)


def is_practical_correct(inst: PmspInstance, x: Assignment) -> bool:
    """One-hot and minimum makespan, whatever the slack register and machine-1 term say"""
    if inst.known_min_makespan is None:
        raise MissingStateError("practical-correct test needs known_min_makespan")
    decoded = decode_pmsp(inst, x)
    return decoded.onehot_ok and decoded.makespan == inst.known_min_makespan


def practical_mask(inst: PmspInstance, states: np.ndarray) -> np.ndarray:
    """Batched is_practical_correct over a (k, n_vars) array of bit rows"""
    if inst.known_min_makespan is None:
        raise MissingStateError("practical-correct test needs known_min_makespan")
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[1] != inst.n_vars:
        raise DimensionError(f"expected (k, {inst.n_vars}) states, got {states.shape}")
    N, m = inst.n_jobs, inst.n_machines
    grid = states[:, : N * m].reshape(-1, N, m).astype(np.int64)
    onehot = (grid.sum(axis=2) == 1).all(axis=1)
    loads = np.einsum("knm,n->km", grid, np.asarray(inst.jobs, dtype=np.int64))
    return onehot & (loads.max(axis=1) == inst.known_min_makespan)


def encode_schedule(inst: PmspInstance, assignment: Dict[int, int], slack: Optional[Sequence[int]] = None) -> np.ndarray:
    """Bit vector for a job->machine map (0-based machines) and slack register values.

    Without explicit slack, each register holds M - (load_1 - load_a), the value that zeroes its penalty.
    When that value falls outside the register (machine 1 more than M ahead, or far enough behind
    to overflow the bits) an ArgumentError is raised; pass slack explicitly for such schedules.
    """
    bits = np.zeros(inst.n_vars, dtype=np.int8)
    loads = [0] * inst.n_machines
    for i, a in assignment.items():
        bits[inst.job_var(i, a)] = 1
        loads[a] += inst.jobs[i]
    if slack is None:
        slack = [inst.slack_bound - (loads[0] - loads[a]) for a in range(1, inst.n_machines)]
        if any(value < 0 for value in slack):
            raise ArgumentError(
                f"loads {tuple(loads)} put machine 1 more than M={inst.slack_bound} ahead; pass slack explicitly"
            )
    for a, value in zip(range(1, inst.n_machines), slack):
        if not 0 <= value < 2**inst.slack_bits:
            raise ArgumentError(f"slack value {value} does not fit {inst.slack_bits} bits")
        for n in range(inst.slack_bits):
            bits[inst.slack_var(n, a)] = (value >> n) & 1
    return bits


def optimal_assignments(inst: PmspInstance) -> List[Dict[int, int]]:
    """All minimum-makespan one-hot assignments (exhaustive over m^N; small instances only)"""
    inst = ensure_known_optimum(inst)
    N, m = inst.n_jobs, inst.n_machines
    out = []
    for code in range(m**N):
        assignment = {}
        loads = [0] * m
        c = code
        for i in range(N):
            a = c % m
            c //= m
            assignment[i] = a
            loads[a] += inst.jobs[i]
        if max(loads) == inst.known_min_makespan:
            out.append(assignment)
    return out


def count_practical_states(inst: PmspInstance, limits: Optional[SpectrumLimits] = None) -> int:
    """Exhaustive count of practical-correct bit vectors over all 2^n states"""
    inst = ensure_known_optimum(inst)
    return count_states(inst.n_vars, lambda bits: practical_mask(inst, bits), limits)
