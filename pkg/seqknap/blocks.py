from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from seqknap.aopt import AssignmentX
from seqknap.errors import InfeasibleY, SearchSpaceTooLarge
from seqknap.instance import CapacityPartition, Instance, capacity_partition
from seqknap.utils import bounded_multisets, ceil_div, format_value, greedy_extract

Pair = Tuple[int, int]  # (block w, size class q)


@dataclass(frozen=True)
class Block:
    """
    A set of item positions with equal gain, sorted by size. The block behaves like
    `multiplicity` items of size `weight` and profit `profit`.
    """

    members: Tuple[int, ...]
    weight: int
    profit: Fraction
    multiplicity: int

    @property
    def gain(self) -> Fraction:
        return self.profit / self.weight

    def to_json(self, instance: Instance) -> Dict[str, Any]:
        return {
            "members": [instance.item(j).index for j in self.members],
            "f": self.weight,
            "p": format_value(self.profit),
            "multiplicity": self.multiplicity,
        }


@dataclass(frozen=True)
class MspInstance:
    """
    The block-aggregated single knapsack with l parts.

    `tilde_b[w-1][q-1]` counts block-w items coming from size class q; `member_class` maps
    every original item position j to its (w, q).
    """

    blocks: Tuple[Block, ...]
    tilde_b: Tuple[Tuple[int, ...], ...]
    part_capacities: Tuple[int, ...]
    size_classes: Tuple[int, ...]
    member_class: Tuple[Tuple[int, int, int], ...] = ()

    @property
    def t(self) -> int:
        return len(self.blocks)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.size_classes)

    def f(self, w: int) -> int:
        return self.blocks[w - 1].weight

    def p(self, w: int) -> Fraction:
        return self.blocks[w - 1].profit

    def gain(self, w: int) -> Fraction:
        return self.blocks[w - 1].gain

    def d(self, q: int) -> int:
        return self.size_classes[q - 1]

    def tb(self, w: int, q: int) -> int:
        return self.tilde_b[w - 1][q - 1]

    def pairs(self) -> List[Pair]:
        return [
            (w, q)
            for w in range(1, self.t + 1)
            for q in range(1, self.l + 1)
            if self.tb(w, q) > 0
        ]

    def class_of(self, j: int) -> Pair:
        for jj, w, q in self.member_class:
            if jj == j:
                return w, q
        raise KeyError(j)

    def with_capacities(self, capacities: Sequence[int]) -> "MspInstance":
        return MspInstance(
            self.blocks, self.tilde_b, tuple(capacities), self.size_classes, self.member_class
        )

    def with_tilde_b(self, tilde_b: Sequence[Sequence[int]]) -> "MspInstance":
        return MspInstance(
            self.blocks,
            tuple(tuple(row) for row in tilde_b),
            self.part_capacities,
            self.size_classes,
            self.member_class,
        )

    def to_json(self, instance: Optional[Instance] = None) -> Dict[str, Any]:
        return {
            "blocks": [
                {
                    "w": w,
                    "members": (
                        [instance.item(j).index for j in block.members]
                        if instance
                        else list(block.members)
                    ),
                    "f": block.weight,
                    "p": format_value(block.profit),
                    "tilde_b": list(self.tilde_b[w - 1]),
                }
                for w, block in enumerate(self.blocks, start=1)
            ],
            "part_capacities": list(self.part_capacities),
            "size_classes": list(self.size_classes),
        }


@dataclass(frozen=True)
class AssignmentY:
    """
    A solution of the M-SP: y^h_{w,q} items of block w from class q placed in part h >= q.
    """

    entries: Tuple[Tuple[int, int, int, int], ...] = ()

    @classmethod
    def build(cls, counts: Mapping[Tuple[int, int, int], int]) -> "AssignmentY":
        return cls(tuple(sorted((w, q, h, c) for (w, q, h), c in counts.items() if c > 0)))

    def as_dict(self) -> Dict[Tuple[int, int, int], int]:
        return {(w, q, h): c for w, q, h, c in self.entries}

    def get(self, w: int, q: int, h: int) -> int:
        return self.as_dict().get((w, q, h), 0)

    def totals(self) -> Dict[Pair, int]:
        """
        sum_h y^h_{w,q} per (w, q); this is the multiset signature S(y).
        """
        out: Counter = Counter()
        for w, q, _, c in self.entries:
            out[(w, q)] += c
        return dict(out)

    def signature(self) -> Tuple[Tuple[Pair, int], ...]:
        return tuple(sorted(self.totals().items()))

    def value(self, msp: MspInstance) -> Fraction:
        return sum((msp.p(w) * c for w, _, _, c in self.entries), Fraction(0))

    def prefix_profits(self, msp: MspInstance) -> Tuple[Fraction, ...]:
        per_part = [Fraction(0)] * msp.l
        for w, _, h, c in self.entries:
            per_part[h - 1] += msp.p(w) * c
        out, acc = [], Fraction(0)
        for v in per_part:
            acc += v
            out.append(acc)
        return tuple(out)

    def prefix_sizes(self, msp: MspInstance) -> Tuple[int, ...]:
        per_part = [0] * msp.l
        for w, _, h, c in self.entries:
            per_part[h - 1] += msp.f(w) * c
        out, acc = [], 0
        for s in per_part:
            acc += s
            out.append(acc)
        return tuple(out)

    def occupancy(self, msp: MspInstance, h: int) -> int:
        return sum(
            ceil_div(msp.f(w) * c, msp.d(q)) * msp.d(q)
            for w, q, hh, c in self.entries
            if hh == h
        )

    def is_feasible(self, msp: MspInstance) -> bool:
        chunks: Counter = Counter()
        for w, q, h, c in self.entries:
            if not (1 <= w <= msp.t and 1 <= q <= h <= msp.l):
                return False
            chunks[(w, q)] += ceil_div(msp.f(w) * c, msp.d(q))
        for (w, q), used in chunks.items():
            if used * msp.d(q) > msp.f(w) * msp.tb(w, q):
                return False
        return all(
            self.occupancy(msp, h) <= msp.part_capacities[h - 1]
            for h in range(1, msp.l + 1)
        )

    def to_json(self, msp: MspInstance) -> Dict[str, Any]:
        return {
            "y": [
                {"block": w, "class": q, "part": h, "count": c}
                for w, q, h, c in self.entries
            ],
            "value": format_value(self.value(msp)),
        }


@dataclass(frozen=True)
class XInequality:
    """
    sum_j coef_j * (sum_{i,h} x^h_{i,j}) <= rhs over item positions j.
    """

    coefficients: Tuple[Tuple[int, Fraction], ...]
    rhs: Fraction
    label: str = ""

    def lhs(self, x: AssignmentX) -> Fraction:
        totals = x.totals()
        return sum((c * totals.get(j, 0) for j, c in self.coefficients), Fraction(0))

    def holds(self, x: AssignmentX) -> bool:
        return self.lhs(x) <= self.rhs

    def tight(self, x: AssignmentX) -> bool:
        return self.lhs(x) == self.rhs

    def key(self):
        return self.coefficients, self.rhs

    def to_json(self, instance: Instance) -> Dict[str, Any]:
        return {
            "lhs": [
                {"item": instance.item(j).index, "coef": format_value(c)}
                for j, c in self.coefficients
            ],
            "rhs": format_value(self.rhs),
            "selection": self.label,
        }


def is_block(instance: Instance, member_set: Sequence[int]) -> bool:
    members = sorted(member_set, key=lambda j: (instance.item(j).size, instance.item(j).index))
    first = instance.item(members[0])
    reach = first.size
    for pos, j in enumerate(members):
        item = instance.item(j)
        if pos and item.size > reach:
            return False
        reach += item.bound * item.size
    return True


def maximal_block_partition(instance: Instance) -> List[Block]:
    """
    Splits every equal-gain class into blocks: scanning sizes upwards, an item joins the current
    block while its size is covered by the block's first size plus the total size already in it.
    Blocks come back sorted by weight, then profit non-increasing, then leading input index.
    """
    by_gain: Dict[Fraction, List[int]] = {}
    for j in range(1, instance.n + 1):
        by_gain.setdefault(instance.item(j).gain, []).append(j)

    blocks = []
    for members in by_gain.values():
        members.sort(key=lambda j: (instance.item(j).size, instance.item(j).index))
        current: List[int] = []
        reach = 0
        for j in members:
            item = instance.item(j)
            if current and item.size > reach:
                blocks.append(_make_block(instance, current))
                current = []
            if not current:
                reach = item.size
            current.append(j)
            reach += item.bound * item.size
        blocks.append(_make_block(instance, current))

    blocks.sort(
        key=lambda b: (b.weight, -b.profit, instance.item(b.members[0]).index)
    )
    return blocks


def _make_block(instance: Instance, members: List[int]) -> Block:
    lead = instance.item(members[0])
    total = sum(instance.item(j).bound * instance.item(j).size for j in members)
    return Block(tuple(members), lead.size, lead.value, total // lead.size)


def to_msp(
    instance: Instance,
    partition: Optional[List[Block]] = None,
    capacities: Optional[CapacityPartition] = None,
) -> MspInstance:
    blocks = partition if partition is not None else maximal_block_partition(instance)
    blocks = sorted(
        blocks, key=lambda b: (b.weight, -b.profit, instance.item(b.members[0]).index)
    )
    capacities = capacities or capacity_partition(instance)

    tilde_b = [[0] * instance.l for _ in blocks]
    member_class = []
    for w, block in enumerate(blocks, start=1):
        for j in block.members:
            q = instance.size_class(j)
            item = instance.item(j)
            tilde_b[w - 1][q - 1] += item.bound * item.size // block.weight
            member_class.append((j, w, q))

    return MspInstance(
        tuple(blocks),
        tuple(tuple(row) for row in tilde_b),
        capacities.part_capacities,
        instance.distinct_sizes,
        tuple(sorted(member_class)),
    )


def x_to_y(
    x: AssignmentX, instance: Instance, partition: Optional[List[Block]] = None
) -> AssignmentY:
    msp = to_msp(instance, partition)
    counts: Counter = Counter()
    for _, j, h, c in x.entries:
        w, q = msp.class_of(j)
        counts[(w, q, h)] += c * msp.d(q) // msp.f(w)
    return AssignmentY.build(counts)


def y_to_x(
    y: AssignmentY, instance: Instance, partition: Optional[List[Block]] = None
) -> AssignmentX:
    """
    Turns an M-SP solution into a part-formulation solution.

    For each block and class, ceil(f_w y / d_q) original items of size d_q are drawn from the
    block's members, lowest input index first; then every part's load is packed into the
    knapsacks' r_i^h budgets: a knapsack that cannot take the whole rest gets an exact fill
    from `greedy_extract`.
    """
    capacities = capacity_partition(instance)
    msp = to_msp(instance, partition, capacities)
    if not y.is_feasible(msp):
        raise InfeasibleY("y violates the occupancy or multiplicity constraints")

    remaining = {j: instance.item(j).bound for j in range(1, instance.n + 1)}
    per_part: Dict[int, Counter] = {h: Counter() for h in range(1, instance.l + 1)}
    for q in range(1, instance.l + 1):
        for w, block in enumerate(msp.blocks, start=1):
            pool = sorted(
                (j for j in block.members if instance.size_class(j) == q),
                key=lambda j: instance.item(j).index,
            )
            for h in range(q, instance.l + 1):
                need = ceil_div(msp.f(w) * y.get(w, q, h), msp.d(q))
                for j in pool:
                    if need == 0:
                        break
                    take = min(need, remaining[j])
                    if take:
                        remaining[j] -= take
                        per_part[h][j] += take
                        need -= take
                if need:
                    raise InfeasibleY(f"block {w} class {q} runs out of items")

    counts: Counter = Counter()
    for h, load in per_part.items():
        copies = [j for j in sorted(load) for _ in range(load[j])]
        for i in range(1, instance.m + 1):
            if not copies:
                break
            sizes = [instance.item(j).size for j in copies]
            room = capacities.part(i, h)
            chosen = range(len(copies)) if sum(sizes) <= room else greedy_extract(sizes, room)
            for pos in chosen:
                counts[(i, copies[pos], h)] += 1
            taken = set(chosen)
            copies = [j for pos, j in enumerate(copies) if pos not in taken]
        if copies:
            raise InfeasibleY(f"part {h} load does not fit the knapsacks")
    return AssignmentX.build(counts)


def lift_inequality(
    coeffs: Mapping[Pair, Fraction], rhs: Fraction, msp: MspInstance, label: str = ""
) -> XInequality:
    """
    Rewrites sum nu_{w,q} sum_h y^h_{w,q} <= rhs over items: each member j of block w with
    size d_q gets nu_{w,q} * d_q / f_w.
    """
    out = {}
    for j, w, q in msp.member_class:
        nu = Fraction(coeffs.get((w, q), 0))
        if nu:
            out[j] = nu * msp.d(q) / msp.f(w)
    return XInequality(tuple(sorted(out.items())), Fraction(rhs), label)


class YViolation(NamedTuple):
    part: int
    size_class: int
    low: Dict[Pair, int]
    high: Dict[Pair, int]


def find_unordered_y(
    y: AssignmentY, msp: MspInstance, budget: int = 10**6
) -> Optional[YViolation]:
    """
    Searches part h for items of classes below q of total size d_q whose profit a class-q set of
    the same size matches, every item of which is unassigned or placed above h.
    """
    placed = y.as_dict()
    seen = 0
    for h in range(1, msp.l + 1):
        for q in range(2, h + 1):
            low_pool = [
                ((w, qq), msp.f(w), placed.get((w, qq, h), 0))
                for w in range(1, msp.t + 1)
                for qq in range(1, q)
                if placed.get((w, qq, h), 0)
            ]
            if not low_pool:
                continue
            profits: Dict[Fraction, Dict[Pair, int]] = {}
            for bundle, size, _ in bounded_multisets(low_pool, msp.d(q)):
                seen += 1
                if seen > budget:
                    raise SearchSpaceTooLarge(f"more than {budget} bundles inspected")
                if size == msp.d(q):
                    profit = sum((msp.p(w) * c for (w, _), c in bundle.items()), Fraction(0))
                    profits.setdefault(profit, bundle)
            if not profits:
                continue

            high_pool = []
            for w in range(1, msp.t + 1):
                below = sum(placed.get((w, q, hh), 0) for hh in range(q, h + 1))
                free = msp.tb(w, q) - below
                if free > 0:
                    high_pool.append(((w, q), msp.f(w), free))
            for bundle, size, _ in bounded_multisets(high_pool, msp.d(q)):
                seen += 1
                if seen > budget:
                    raise SearchSpaceTooLarge(f"more than {budget} bundles inspected")
                if size != msp.d(q):
                    continue
                profit = sum((msp.p(w) * c for (w, _), c in bundle.items()), Fraction(0))
                if profit in profits:
                    return YViolation(h, q, profits[profit], bundle)
    return None


def is_ordered_y(y: AssignmentY, msp: MspInstance, budget: int = 10**6) -> bool:
    return find_unordered_y(y, msp, budget) is None
