"""
Brute-force ground truth for small instances: every feasible x or y, the OPT and ordered filters, and
an independent optimum over the original knapsacks.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, TypeVar, Union

from seqknap.aopt import AssignmentX, is_ordered_solution
from seqknap.blocks import AssignmentY, MspInstance, is_ordered_y
from seqknap.errors import SearchSpaceTooLarge
from seqknap.instance import Instance, capacity_partition
from seqknap.utils import get_logger

logger = get_logger(__name__)

P = TypeVar("P", AssignmentX, AssignmentY)


@dataclass(frozen=True)
class EnumerationBudget:
    max_points: int = 10**6
    max_depth: int = 512

    def __post_init__(self):
        if self.max_points <= 0 or self.max_depth <= 0:
            raise ValueError("enumeration budgets must be positive")


def _exceeded(budget: EnumerationBudget, what: str) -> SearchSpaceTooLarge:
    return SearchSpaceTooLarge(f"{what} exceeds the budget (max_points={budget.max_points})")


def enumerate_feasible_x(
    instance: Instance, budget: Optional[EnumerationBudget] = None
) -> Iterator[AssignmentX]:
    """
    Every feasible part-formulation solution, depth first over the (item, knapsack, part) cells.
    """
    budget = budget or EnumerationBudget()
    partition = capacity_partition(instance)
    cells = [
        (j, i, h)
        for j in range(1, instance.n + 1)
        for i in range(1, instance.m + 1)
        for h in range(instance.size_class(j), instance.l + 1)
        if partition.part(i, h) >= instance.item(j).size and instance.item(j).bound
    ]
    if len(cells) > budget.max_depth:
        raise SearchSpaceTooLarge(f"{len(cells)} decision cells exceed depth {budget.max_depth}")

    room = {(i, h): partition.part(i, h) for i in range(1, instance.m + 1) for h in range(1, instance.l + 1)}
    left = {j: instance.item(j).bound for j in range(1, instance.n + 1)}
    counts: Dict[Tuple[int, int, int], int] = {}
    produced = [0]

    def walk(pos: int) -> Iterator[AssignmentX]:
        if pos == len(cells):
            produced[0] += 1
            if produced[0] > budget.max_points:
                raise _exceeded(budget, "feasible x enumeration")
            yield AssignmentX.build(counts)
            return
        j, i, h = cells[pos]
        size = instance.item(j).size
        top = min(left[j], room[(i, h)] // size)
        for c in range(top + 1):
            counts[(i, j, h)] = c
            left[j] -= c
            room[(i, h)] -= c * size
            yield from walk(pos + 1)
            left[j] += c
            room[(i, h)] += c * size
        counts.pop((i, j, h), None)

    yield from walk(0)


def enumerate_feasible_y(
    msp: MspInstance, budget: Optional[EnumerationBudget] = None
) -> Iterator[AssignmentY]:
    """
    Every feasible M-SP solution. Occupancy is counted in whole d_q chunks.
    """
    budget = budget or EnumerationBudget()
    cells = [
        (w, q, h)
        for w, q in msp.pairs()
        for h in range(q, msp.l + 1)
        if msp.part_capacities[h - 1] >= msp.d(q)
    ]
    if len(cells) > budget.max_depth:
        raise SearchSpaceTooLarge(f"{len(cells)} decision cells exceed depth {budget.max_depth}")

    room = list(msp.part_capacities)
    chunks_left = {(w, q): msp.f(w) * msp.tb(w, q) // msp.d(q) for w, q in msp.pairs()}
    counts: Dict[Tuple[int, int, int], int] = {}
    produced = [0]

    def walk(pos: int) -> Iterator[AssignmentY]:
        if pos == len(cells):
            produced[0] += 1
            if produced[0] > budget.max_points:
                raise _exceeded(budget, "feasible y enumeration")
            yield AssignmentY.build(counts)
            return
        w, q, h = cells[pos]
        f, d = msp.f(w), msp.d(q)
        usable = min(room[h - 1] // d, chunks_left[(w, q)])
        for c in range(usable * d // f + 1):
            chunks = -((-f * c) // d)
            counts[(w, q, h)] = c
            room[h - 1] -= chunks * d
            chunks_left[(w, q)] -= chunks
            yield from walk(pos + 1)
            room[h - 1] += chunks * d
            chunks_left[(w, q)] += chunks
        counts.pop((w, q, h), None)

    yield from walk(0)


def packing_optimum(instance: Instance) -> Fraction:
    """
    Optimum of the plain multiple knapsack, by dynamic programming over the multiset of residual
    capacities. Does not use the capacity partition at all.
    """
    states: Dict[Tuple[int, ...], Fraction] = {tuple(sorted(instance.capacities)): Fraction(0)}
    for item in instance.items:
        for _ in range(item.bound):
            nxt = dict(states)
            for rooms, value in states.items():
                for pos in {rooms.index(r) for r in rooms if r >= item.size}:
                    placed = list(rooms)
                    placed[pos] -= item.size
                    key = tuple(sorted(placed))
                    candidate = value + item.value
                    if key not in nxt or nxt[key] < candidate:
                        nxt[key] = candidate
            states = nxt
    return max(states.values())


def brute_optimum(
    instance: Instance, budget: Optional[EnumerationBudget] = None
) -> Tuple[Fraction, List[AssignmentX]]:
    best = None
    optima: List[AssignmentX] = []
    for x in enumerate_feasible_x(instance, budget):
        value = x.value(instance)
        if best is None or value > best:
            best, optima = value, [x]
        elif value == best:
            optima.append(x)
    return best, optima


def _opt_filter(points: Sequence[P], prefix: Callable[[P], Tuple]) -> List[P]:
    # a point is OPT iff its prefix vector is the componentwise max over its signature group
    frontier: Dict[Tuple, List] = {}
    vectors = [prefix(p) for p in points]
    for p, vector in zip(points, vectors):
        sig = p.signature()
        if sig in frontier:
            frontier[sig] = [max(a, b) for a, b in zip(frontier[sig], vector)]
        else:
            frontier[sig] = list(vector)
    return [p for p, vector in zip(points, vectors) if list(vector) == frontier[p.signature()]]


def filter_opt_ordered(
    points: Sequence[P], target: Union[Instance, MspInstance]
) -> List[P]:
    """
    Keeps the points that are OPT among the given feasible set and ordered.
    """
    if isinstance(target, Instance):
        opt = _opt_filter(points, lambda x: x.prefix_values(target))
        return [x for x in opt if is_ordered_solution(x, target)]
    opt = _opt_filter(points, lambda y: y.prefix_profits(target))
    return [y for y in opt if is_ordered_y(y, target)]


def mo_oo(
    target: Union[Instance, MspInstance], budget: Optional[EnumerationBudget] = None
) -> List:
    """
    Optimal solutions that are also OPT and ordered.
    """
    if isinstance(target, Instance):
        points = list(enumerate_feasible_x(target, budget))
    else:
        points = list(enumerate_feasible_y(target, budget))
    best = max(p.value(target) for p in points)
    result = [p for p in filter_opt_ordered(points, target) if p.value(target) == best]
    logger.debug(f"{len(points)} feasible points, {len(result)} optimal OPT ordered")
    return result
