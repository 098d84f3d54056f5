"""
Candidate enumeration for MO^OO points of a restricted problem MP(k, b, F).

The largest remaining block of the top class gets a range for its load in part b and a range
for its total load in parts b..l; every combination is fixed and the reduced problem recursed
on. Class 1 is solved greedily by gain.
"""
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

from seqknap.blocks import AssignmentY
from seqknap.errors import BranchBudgetExceeded
from seqknap.polyhedra.base import RestrictedProblem
from seqknap.polyhedra.hsets import h_profile
from seqknap.utils import ceil_div, floor_to, get_logger

logger = get_logger(__name__)

DEFAULT_BRANCH_BUDGET = 10**5


def _load_range(problem: RestrictedProblem, capacity: int) -> List[int]:
    k, b = problem.k, problem.b
    available = problem.avail(k, b)
    if available == 0:
        return [0]
    d = problem.delta(b)
    f = problem.msp.f(k)
    hset = h_profile(problem, k).size(b)
    low = max(0, capacity - ceil_div(hset + d, d) * d) // d
    high = max(0, capacity - floor_to(hset, d)) // d
    lower = min(low * d // f, available)
    upper = min(high * d // f, available)
    return [v for v in range(lower, upper + 1) if (f * v) % d == 0]


def _require_upper_class(problem: RestrictedProblem):
    if problem.b < 2:
        raise ValueError("load ranges are defined for classes above the first")


def value_range_top(problem: RestrictedProblem) -> List[int]:
    """
    Admissible values of y^b_{k,b} in an MO^OO point; [0] when block k is not in class b.
    """
    _require_upper_class(problem)
    return _load_range(problem, problem.F[problem.b - 1])


def value_range_tail(problem: RestrictedProblem) -> List[int]:
    """
    Admissible values of sum_{h >= b} y^h_{k,b}.
    """
    _require_upper_class(problem)
    return _load_range(problem, problem.fvector.tail())


def next_type_range(problem: RestrictedProblem, fixed: Mapping[int, int]) -> List[int]:
    """
    Range of y^b_{k-1,b} once y_{k,b} is fixed to `fixed` (part -> count).
    """
    reduced = problem.fix(problem.k, fixed)
    if reduced.k == 0:
        return [0]
    return value_range_top(reduced)


def base_case(problem: RestrictedProblem) -> AssignmentY:
    """
    Class 1 only: blocks in gain order fill parts 1..l from the bottom.
    """
    if problem.b != 1:
        raise ValueError("the greedy base case needs b = 1")
    msp = problem.msp
    room = list(problem.F)
    counts: Dict[Tuple[int, int, int], int] = {}
    types = sorted(
        (w for w in problem.types_in_class(1) if w <= problem.k),
        key=lambda w: (-msp.gain(w), w),
    )
    part = 1
    for w in types:
        left = problem.avail(w, 1)
        while left and part <= msp.l:
            take = min(left, room[part - 1] // msp.f(w))
            if take:
                counts[(w, 1, part)] = counts.get((w, 1, part), 0) + take
                room[part - 1] -= take * msp.f(w)
                left -= take
            if left:
                part += 1
    return AssignmentY.build(counts)


def _splits(problem: RestrictedProblem, k: int, rest: int, start: int) -> Iterator[Dict[int, int]]:
    # rest units of block k over parts start..l, each load a multiple of d_b within F_h
    if rest == 0:
        yield {}
        return
    if start > problem.l:
        return
    f, d = problem.msp.f(k), problem.delta(problem.b)
    cap = problem.F[start - 1] // f
    for v in range(min(rest, cap), -1, -1):
        if (f * v) % d:
            continue
        for tail in _splits(problem, k, rest - v, start + 1):
            yield {start: v, **tail} if v else tail


@dataclass
class Exploration:
    """
    Outcome of the search: the leaves, the optimal ones and a flat log of the branch points.
    """

    candidates: List[AssignmentY] = field(default_factory=list)
    optima: List[AssignmentY] = field(default_factory=list)
    value: Optional[Fraction] = None
    branches: List[Dict[str, Any]] = field(default_factory=list)


def enumerate_candidates(
    problem: RestrictedProblem,
    branch_budget: int = DEFAULT_BRANCH_BUDGET,
    log: Optional[List[Dict[str, Any]]] = None,
) -> List[AssignmentY]:
    """
    All leaves of the range search; a superset of the MO^OO points of `problem`.
    """
    leaves: Dict[AssignmentY, None] = {}
    visited = [0]

    def visit(node: RestrictedProblem, placed: Counter):
        visited[0] += 1
        if visited[0] > branch_budget:
            raise BranchBudgetExceeded(f"more than {branch_budget} branches explored")
        if node.b == 1:
            base = base_case(node)
            leaf = Counter(placed)
            leaf.update(base.as_dict())
            leaves.setdefault(AssignmentY.build(leaf), None)
            return
        k = node.top_type()
        if k is None:
            visit(node.lower(), placed)
            return
        node = node.with_k(k)
        b = node.b
        tops, tails = value_range_top(node), value_range_tail(node)
        if log is not None:
            log.append(
                {"k": k, "b": b, "F": list(node.F), "top": tops, "tail": tails}
            )
        f = node.msp.f(k)
        for top in tops:
            if f * top > node.F[b - 1]:
                continue
            for total in tails:
                if total < top:
                    continue
                for split in _splits(node, k, total - top, b + 1):
                    values = {b: top, **split}
                    child = Counter(placed)
                    for h, v in values.items():
                        if v:
                            child[(k, b, h)] += v
                    visit(node.fix(k, values), child)

    visit(problem, Counter())
    logger.debug(f"{visited[0]} branches, {len(leaves)} candidates")
    return list(leaves)


def explore(problem: RestrictedProblem, branch_budget: int = DEFAULT_BRANCH_BUDGET) -> Exploration:
    result = Exploration()
    result.candidates = enumerate_candidates(problem, branch_budget, result.branches)
    msp = problem.as_msp()
    feasible = [y for y in result.candidates if y.is_feasible(msp)]
    if feasible:
        result.value = max(y.value(msp) for y in feasible)
        result.optima = sorted(
            (y for y in feasible if y.value(msp) == result.value), key=lambda y: y.entries
        )
    return result


def enumerate_optima(
    problem: RestrictedProblem, branch_budget: int = DEFAULT_BRANCH_BUDGET
) -> List[AssignmentY]:
    """
    The candidates of maximum objective value.
    """
    return explore(problem, branch_budget).optima


@dataclass(frozen=True)
class PathStep:
    k: int
    b: int
    top: Tuple[int, ...]
    tail: Tuple[int, ...]
    top_value: int
    tail_value: int

    @property
    def inside(self) -> bool:
        return self.top_value in self.top and self.tail_value in self.tail


def decomposition_path(
    problem: RestrictedProblem, y: AssignmentY
) -> Tuple[List[PathStep], bool]:
    """
    Replays the reduction sequence along `y`: one step per fixed (block, class) with the ranges
    seen there and the values y actually takes, plus whether the class-1 part of y is the greedy
    base solution.
    """
    placed = y.as_dict()
    steps: List[PathStep] = []
    node = problem
    while node.b > 1:
        k = node.top_type()
        if k is None:
            node = node.lower()
            continue
        node = node.with_k(k)
        b = node.b
        values = {h: placed.get((k, b, h), 0) for h in range(b, node.l + 1)}
        steps.append(
            PathStep(
                k,
                b,
                tuple(value_range_top(node)),
                tuple(value_range_tail(node)),
                values[b],
                sum(values.values()),
            )
        )
        node = node.fix(k, values)
    base = base_case(node).as_dict()
    own = {key: c for key, c in placed.items() if key[1] == 1}
    return steps, own == base
