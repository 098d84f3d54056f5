from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from seqknap.errors import (
    EmptyInstance,
    MissingUnitSize,
    NonDivisibleSizes,
    NonPositiveField,
)
from seqknap.utils import format_value, parse_value


@dataclass(frozen=True)
class ItemType:
    size: int
    value: Fraction
    bound: int
    index: int  # 1-based position in the caller's input

    @property
    def gain(self) -> Fraction:
        return self.value / self.size


@dataclass(frozen=True)
class Instance:
    """
    A Sequential Multiple Knapsack instance.

    Items are kept sorted by size ascending, then value non-increasing, then input index, and
    are addressed 1-based (`item(j)`). Size classes are addressed 1-based as well (`d(q)`).
    """

    items: Tuple[ItemType, ...]
    capacities: Tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def distinct_sizes(self) -> Tuple[int, ...]:
        return tuple(sorted({item.size for item in self.items}))

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.distinct_sizes)

    def item(self, j: int) -> ItemType:
        return self.items[j - 1]

    def d(self, q: int) -> int:
        return self.distinct_sizes[q - 1]

    def size_class(self, j: int) -> int:
        """
        g(j): the index q with d_q equal to the size of item j.
        """
        return self.distinct_sizes.index(self.item(j).size) + 1

    def items_of_class(self, q: int) -> List[int]:
        size = self.d(q)
        return [j for j in range(1, self.n + 1) if self.item(j).size == size]

    def value_of(self, counts: Mapping[int, int]) -> Fraction:
        return sum((self.item(j).value * c for j, c in counts.items()), Fraction(0))

    def size_of(self, counts: Mapping[int, int]) -> int:
        return sum(self.item(j).size * c for j, c in counts.items())

    def with_bounds(self, bounds: Mapping[int, int]) -> "Instance":
        """
        Same instance with bounds overridden; items whose bound drops to 0 keep their slot
        with bound 0 so that positions stay stable.
        """
        items = tuple(
            ItemType(it.size, it.value, bounds.get(j, it.bound), it.index)
            for j, it in enumerate(self.items, start=1)
        )
        return Instance(items, self.capacities)

    def to_dict(self) -> Dict[str, Any]:
        ordered = sorted(self.items, key=lambda it: it.index)
        return {
            "items": [
                {"size": it.size, "value": format_value(it.value), "bound": it.bound}
                for it in ordered
            ],
            "capacities": list(self.capacities),
        }


@dataclass(frozen=True)
class CapacityPartition:
    """
    The matrix r_i^h: knapsack i split into l parts, part h reserved for items of size <= d_h.
    """

    r: Tuple[Tuple[int, ...], ...]

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.r, dtype=np.int64).reshape(len(self.r), -1)

    def part(self, i: int, h: int) -> int:
        return self.r[i - 1][h - 1]

    @property
    def part_capacities(self) -> Tuple[int, ...]:
        """
        Column sums c̄_h = sum_i r_i^h.
        """
        if not self.r:
            return tuple()
        return tuple(int(v) for v in self.matrix.sum(axis=0))

    def prefix(self, i: int, h: int) -> int:
        return sum(self.r[i - 1][:h])


def _positive_int(raw: Any, field: str, allow_zero: bool = False) -> int:
    if isinstance(raw, bool) or not isinstance(raw, (int, np.integer)):
        raise NonPositiveField(f"{field} must be an integer, got {raw!r}")
    if raw < 0 or (raw == 0 and not allow_zero):
        raise NonPositiveField(f"{field} must be {'non-negative' if allow_zero else 'positive'}, got {raw}")
    return int(raw)


def validate_instance(
    raw_items: Sequence[Any], raw_capacities: Sequence[Any]
) -> Instance:
    """
    Normalises raw items and capacities into an Instance.

    Each raw item is an ItemType, a mapping with keys size/value/bound, or a (size, value, bound)
    tuple. Values may be ints, Fractions or "num/den" strings.
    """
    if not raw_items or not raw_capacities:
        raise EmptyInstance("an instance needs at least one item and one knapsack")

    items = []
    for idx, raw in enumerate(raw_items, start=1):
        if isinstance(raw, ItemType):
            size, value, bound = raw.size, raw.value, raw.bound
        elif isinstance(raw, Mapping):
            try:
                size, value, bound = raw["size"], raw["value"], raw["bound"]
            except KeyError as e:
                raise NonPositiveField(f"item {idx}: missing field {e.args[0]}")
        else:
            size, value, bound = raw
        size = _positive_int(size, f"item {idx} size")
        bound = _positive_int(bound, f"item {idx} bound")
        try:
            value = parse_value(value)
        except NonPositiveField as e:
            raise NonPositiveField(f"item {idx} value: {e}") from e
        if value < 0:
            raise NonPositiveField(f"item {idx} value must be non-negative, got {value}")
        items.append(ItemType(size, value, bound, idx))

    capacities = tuple(
        _positive_int(c, f"capacity {i}", allow_zero=True)
        for i, c in enumerate(raw_capacities, start=1)
    )

    sizes = sorted({it.size for it in items})
    if sizes[0] != 1:
        raise MissingUnitSize(f"smallest size must be 1, got {sizes[0]}")
    for small, large in zip(sizes, sizes[1:]):
        if large % small:
            raise NonDivisibleSizes(f"size {large} is not a multiple of {small}")

    items.sort(key=lambda it: (it.size, -it.value, it.index))
    return Instance(tuple(items), capacities)


def capacity_partition(instance: Instance) -> CapacityPartition:
    d = instance.distinct_sizes
    remaining = np.array(instance.capacities, dtype=np.int64)
    columns = []
    for h in range(len(d) - 1):
        part = remaining % d[h + 1]
        columns.append(part)
        remaining = remaining - part
    columns.append(remaining)
    r = np.stack(columns, axis=1)
    return CapacityPartition(tuple(tuple(int(v) for v in row) for row in r))


def restrict(instance: Instance, h: int) -> Instance:
    """
    SMKP(h): items of size <= d_h, knapsack i shrunk to r_i^1 + ... + r_i^h.
    """
    if not 1 <= h <= instance.l:
        raise IndexError(f"part index {h} outside 1..{instance.l}")
    partition = capacity_partition(instance)
    limit = instance.d(h)
    items = tuple(it for it in instance.items if it.size <= limit)
    capacities = tuple(partition.prefix(i, h) for i in range(1, instance.m + 1))
    return Instance(items, capacities)
