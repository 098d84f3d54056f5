from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Tuple

from seqknap.errors import InfeasibleKeep, NonDivisibleSizes, SearchSpaceTooLarge
from seqknap.instance import CapacityPartition, Instance, capacity_partition
from seqknap.utils import bounded_multisets, format_value, get_logger, pack_chunks

logger = get_logger(__name__)

DEFAULT_CHECK_BUDGET = 10**6

Cell = Tuple[int, int, int]  # (knapsack i, item j, part h)


@dataclass(frozen=True)
class AssignmentX:
    """
    A solution of the part formulation: x^h_{i,j} items of type j in part h of knapsack i.
    Only positive entries are stored, sorted by (i, j, h).
    """

    entries: Tuple[Tuple[int, int, int, int], ...] = ()

    @classmethod
    def build(cls, counts: Mapping[Cell, int]) -> "AssignmentX":
        return cls(tuple(sorted((i, j, h, c) for (i, j, h), c in counts.items() if c > 0)))

    def as_dict(self) -> Dict[Cell, int]:
        return {(i, j, h): c for i, j, h, c in self.entries}

    def count(self, i: int, j: int, h: int) -> int:
        return self.as_dict().get((i, j, h), 0)

    def totals(self) -> Dict[int, int]:
        """
        S(x) as item-type multiplicities.
        """
        out: Counter = Counter()
        for _, j, _, c in self.entries:
            out[j] += c
        return dict(out)

    def signature(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(sorted(self.totals().items()))

    def cell(self, i: int, h: int) -> Dict[int, int]:
        return {j: c for ii, j, hh, c in self.entries if ii == i and hh == h}

    def value(self, instance: Instance) -> Fraction:
        return sum(
            (instance.item(j).value * c for _, j, _, c in self.entries), Fraction(0)
        )

    def prefix_values(self, instance: Instance) -> Tuple[Fraction, ...]:
        """
        v(x^{1,h}) for h = 1..l.
        """
        per_part = [Fraction(0)] * instance.l
        for _, j, h, c in self.entries:
            per_part[h - 1] += instance.item(j).value * c
        out, acc = [], Fraction(0)
        for v in per_part:
            acc += v
            out.append(acc)
        return tuple(out)

    def prefix_sizes(self, instance: Instance) -> Tuple[int, ...]:
        per_part = [0] * instance.l
        for _, j, h, c in self.entries:
            per_part[h - 1] += instance.item(j).size * c
        out, acc = [], 0
        for s in per_part:
            acc += s
            out.append(acc)
        return tuple(out)

    def is_feasible(
        self, instance: Instance, partition: Optional[CapacityPartition] = None
    ) -> bool:
        partition = partition or capacity_partition(instance)
        loads: Counter = Counter()
        for i, j, h, c in self.entries:
            if not (1 <= i <= instance.m and 1 <= j <= instance.n and 1 <= h <= instance.l):
                return False
            if h < instance.size_class(j):
                return False
            loads[(i, h)] += instance.item(j).size * c
        if any(load > partition.part(i, h) for (i, h), load in loads.items()):
            return False
        return all(c <= instance.item(j).bound for j, c in self.totals().items())

    def to_json(self, instance: Instance) -> Dict[str, Any]:
        return {
            "x": [
                {"knapsack": i, "item": instance.item(j).index, "part": h, "count": c}
                for i, j, h, c in self.entries
            ],
            "value": format_value(self.value(instance)),
        }


@dataclass(frozen=True)
class GroupedItem:
    """
    A (possibly synthetic) item of the grouping procedure.

    `members` lists (item position, count); `origin` is the sorted multiset of the members'
    input indices and breaks ties between equal values.
    """

    assigned_size: int
    value: Fraction
    members: Tuple[Tuple[int, int], ...]
    origin: Tuple[int, ...]

    @classmethod
    def single(cls, instance: Instance, j: int) -> "GroupedItem":
        item = instance.item(j)
        return cls(item.size, item.value, ((j, 1),), (item.index,))

    @classmethod
    def merge(cls, run: List["GroupedItem"], size: int) -> "GroupedItem":
        members: Counter = Counter()
        for g in run:
            for j, c in g.members:
                members[j] += c
        return cls(
            size,
            sum((g.value for g in run), Fraction(0)),
            tuple(sorted(members.items())),
            tuple(sorted(o for g in run for o in g.origin)),
        )

    def true_size(self, instance: Instance) -> int:
        return sum(instance.item(j).size * c for j, c in self.members)


def _rank(item: GroupedItem):
    return (-item.value, item.origin)


def group_items(pool: List[GroupedItem], target: int) -> List[GroupedItem]:
    """
    Lines the pool up by value and merges runs of target/d_q items into items of size `target`.
    The last run may be short; it still gets the full size `target`.
    """
    if not pool:
        return []
    size = pool[0].assigned_size
    if any(g.assigned_size != size for g in pool):
        raise ValueError("grouping pool mixes assigned sizes")
    if target % size:
        raise NonDivisibleSizes(f"target size {target} is not a multiple of {size}")
    ordered = sorted(pool, key=_rank)
    chunks = pack_chunks([g.assigned_size for g in ordered], target)
    return [GroupedItem.merge([ordered[pos] for pos in chunk], target) for chunk in chunks]


def _run_aopt(instance: Instance) -> Tuple[AssignmentX, List[GroupedItem]]:
    partition = capacity_partition(instance)
    counts: Counter = Counter()
    pool: List[GroupedItem] = []
    for h in range(1, instance.l + 1):
        d_h = instance.d(h)
        for j in instance.items_of_class(h):
            pool.extend(GroupedItem.single(instance, j) for _ in range(instance.item(j).bound))
        pool.sort(key=_rank)

        slots = [
            i
            for i in range(1, instance.m + 1)
            for _ in range(partition.part(i, h) // d_h)
        ]
        chosen, rest = pool[: len(slots)], pool[len(slots) :]
        for item, i in zip(chosen, slots):
            for j, c in item.members:
                counts[(i, j, h)] += c
        logger.debug(f"level {h}: {len(chosen)} of {len(pool)} items placed")

        pool = group_items(rest, instance.d(h + 1)) if h < instance.l else rest
    return AssignmentX.build(counts), pool


def aopt_solve(instance: Instance) -> AssignmentX:
    """
    A-OPT: at every level the best items fill the parts reserved for their size, the rest are
    grouped into items of the next size and carried up.
    """
    x, _ = _run_aopt(instance)
    return x


def aopt_solve_on_set(instance: Instance, keep: Mapping[int, int]) -> AssignmentX:
    """
    Re-solves with bounds replaced by `keep`; every kept item must end up assigned.
    """
    for j, c in keep.items():
        if not 1 <= j <= instance.n:
            raise InfeasibleKeep(f"unknown item position {j}")
        if c < 0 or c > instance.item(j).bound:
            raise InfeasibleKeep(f"item {instance.item(j).index}: keep {c} outside 0..bound")
    sub = instance.with_bounds({j: keep.get(j, 0) for j in range(1, instance.n + 1)})
    x, leftover = _run_aopt(sub)
    if leftover:
        raise InfeasibleKeep("kept items do not fit into the knapsacks")
    return x


def is_opt_solution(
    x: AssignmentX, instance: Instance, budget: Optional[Any] = None
) -> bool:
    """
    OPT checked by enumeration: no feasible solution with the same items has a larger
    value on any prefix of parts.
    """
    from seqknap.oracle import EnumerationBudget, enumerate_feasible_x

    budget = budget or EnumerationBudget()
    keep = x.totals()
    target = x.prefix_values(instance)
    sub = instance.with_bounds({j: keep.get(j, 0) for j in range(1, instance.n + 1)})
    for other in enumerate_feasible_x(sub, budget):
        if other.totals() != keep:
            continue
        if any(o > t for o, t in zip(other.prefix_values(instance), target)):
            return False
    return True


class Violation(NamedTuple):
    knapsack: int
    part: int
    bundle: Dict[int, int]
    partner: int
    partner_at: Optional[Tuple[int, int]]  # (knapsack, part) above, or None if unassigned


def find_unordered_x(
    x: AssignmentX,
    instance: Instance,
    max_gamma: Optional[int] = None,
    budget: int = DEFAULT_CHECK_BUDGET,
) -> Optional[Violation]:
    """
    Looks for a bundle of at least two items in one part that an equal-size, equal-value single
    item sitting higher (or unassigned) could replace.
    """
    totals = x.totals()
    by_size: Dict[int, List[int]] = {}
    for j in range(1, instance.n + 1):
        by_size.setdefault(instance.item(j).size, []).append(j)

    seen = 0
    for i, h in sorted({(i, h) for i, _, h, _ in x.entries}):
        cell = x.cell(i, h)
        pool = [(j, instance.item(j).size, c) for j, c in sorted(cell.items())]
        for bundle, size, count in bounded_multisets(pool, instance.d(h), max_gamma):
            seen += 1
            if seen > budget:
                raise SearchSpaceTooLarge(f"more than {budget} bundles inspected")
            if count < 2:
                continue
            value = instance.value_of(bundle)
            for partner in by_size.get(size, []):
                if instance.item(partner).value != value:
                    continue
                if totals.get(partner, 0) < instance.item(partner).bound:
                    return Violation(i, h, bundle, partner, None)
                above = [
                    (ii, hh)
                    for ii, jj, hh, _ in x.entries
                    if jj == partner and hh > h
                ]
                if above:
                    return Violation(i, h, bundle, partner, above[0])
    return None


def is_ordered_solution(
    x: AssignmentX,
    instance: Instance,
    max_gamma: Optional[int] = None,
    budget: int = DEFAULT_CHECK_BUDGET,
) -> bool:
    return find_unordered_x(x, instance, max_gamma, budget) is None


def make_ordered(
    x: AssignmentX,
    instance: Instance,
    max_gamma: Optional[int] = None,
    budget: int = DEFAULT_CHECK_BUDGET,
) -> AssignmentX:
    """
    Applies the swap/replace step until no violation is left. Each step keeps every prefix value
    and prefix size.
    """
    while True:
        violation = find_unordered_x(x, instance, max_gamma, budget)
        if violation is None:
            return x
        counts = Counter(x.as_dict())
        i, h = violation.knapsack, violation.part
        for j, c in violation.bundle.items():
            counts[(i, j, h)] -= c
        counts[(i, violation.partner, h)] += 1
        if violation.partner_at is not None:
            ii, hh = violation.partner_at
            counts[(ii, violation.partner, hh)] -= 1
            for j, c in violation.bundle.items():
                counts[(ii, j, hh)] += c
        x = AssignmentX.build(counts)


if __name__ == "__main__":
    from seqknap.loader import load_example

    example = load_example()
    solution = aopt_solve(example)
    print(solution.to_json(example))
