from dataclasses import dataclass, replace
from typing import List, Mapping, Optional, Sequence, Tuple

from seqknap.blocks import MspInstance
from seqknap.errors import DivisibilityViolation, IndexOutOfRange, NonPositiveField


@dataclass(frozen=True)
class FVector:
    """
    Part capacities F_1..F_l of a restricted problem whose largest active class is b.
    """

    F: Tuple[int, ...]
    b: int
    sizes: Tuple[int, ...]

    def __post_init__(self):
        if len(self.F) != len(self.sizes):
            raise ValueError(f"F has {len(self.F)} entries, expected {len(self.sizes)}")
        if not 1 <= self.b <= len(self.sizes):
            raise IndexOutOfRange(f"class index {self.b} outside 1..{len(self.sizes)}")
        for h, value in enumerate(self.F, start=1):
            if value < 0:
                raise NonPositiveField(f"F_{h} = {value} is negative")
            if value % self.delta(h):
                raise DivisibilityViolation(f"F_{h} = {value} is not a multiple of {self.delta(h)}")

    def delta(self, h: int) -> int:
        return min(self.sizes[h - 1], self.sizes[self.b - 1])

    def tail(self) -> int:
        return sum(self.F[self.b - 1 :])


@dataclass(frozen=True)
class RestrictedProblem:
    """
    MP(k, b, F): the M-SP limited to classes 1..b, with class-b blocks limited to 1..k, and part
    capacities F. `available` holds the remaining multiplicities (t x l, 0 outside the universe).
    """

    msp: MspInstance
    k: int
    b: int
    F: Tuple[int, ...]
    available: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        FVector(self.F, self.b, self.msp.size_classes)
        if 1 <= self.k <= self.msp.t and self.avail(self.k, self.b):
            if self.msp.d(self.b) % self.msp.f(self.k):
                raise DivisibilityViolation(
                    f"block weight {self.msp.f(self.k)} does not divide d_{self.b}"
                )

    @classmethod
    def build(
        cls,
        msp: MspInstance,
        k: Optional[int] = None,
        b: Optional[int] = None,
        F: Optional[Sequence[int]] = None,
    ) -> "RestrictedProblem":
        k = msp.t if k is None else k
        b = msp.l if b is None else b
        if not 1 <= k <= msp.t:
            raise IndexOutOfRange(f"block index {k} outside 1..{msp.t}")
        if not 1 <= b <= msp.l:
            raise IndexOutOfRange(f"class index {b} outside 1..{msp.l}")
        F = tuple(msp.part_capacities if F is None else F)
        for h, (value, cap) in enumerate(zip(F, msp.part_capacities), start=1):
            if value > cap:
                raise NonPositiveField(f"F_{h} = {value} exceeds the part capacity {cap}")
        available = tuple(
            tuple(
                msp.tb(w, q) if q < b or (q == b and w <= k) else 0
                for q in range(1, msp.l + 1)
            )
            for w in range(1, msp.t + 1)
        )
        return cls(msp, k, b, F, available)

    @property
    def fvector(self) -> FVector:
        return FVector(self.F, self.b, self.msp.size_classes)

    @property
    def l(self) -> int:  # noqa: E743
        return self.msp.l

    def delta(self, h: int) -> int:
        return self.fvector.delta(h)

    def avail(self, w: int, q: int) -> int:
        return self.available[w - 1][q - 1]

    def types_in_class(self, q: int) -> List[int]:
        return [w for w in range(1, self.msp.t + 1) if self.avail(w, q) > 0]

    def top_type(self) -> Optional[int]:
        """
        Largest block index <= k still present in class b.
        """
        present = [w for w in self.types_in_class(self.b) if w <= self.k]
        return max(present) if present else None

    def with_k(self, k: int) -> "RestrictedProblem":
        return replace(self, k=k)

    def at_level(self, b: int, k: int) -> "RestrictedProblem":
        """
        The same universe seen as MP(k, b, F): classes above b dropped, class b cut at k.
        """
        available = tuple(
            tuple(
                v if q < b or (q == b and w <= k) else 0
                for q, v in enumerate(row, start=1)
            )
            for w, row in enumerate(self.available, start=1)
        )
        return RestrictedProblem(self.msp, k, b, self.F, available)

    def fix(self, w: int, values: Mapping[int, int]) -> "RestrictedProblem":
        """
        Fixes y^h_{w,b} for h >= b: capacities shrink by f_w * y and T_b^w leaves the universe.
        """
        F = list(self.F)
        for h, v in values.items():
            if h < self.b:
                raise ValueError(f"class {self.b} items cannot sit in part {h}")
            F[h - 1] -= self.msp.f(w) * v
        available = [list(row) for row in self.available]
        available[w - 1][self.b - 1] = 0
        return RestrictedProblem(
            self.msp, w - 1, self.b, tuple(F), tuple(tuple(r) for r in available)
        )

    def lower(self) -> "RestrictedProblem":
        """
        Drops to class b-1 once class b is empty (G = current F).
        """
        if self.b == 1:
            raise ValueError("already at the lowest class")
        available = tuple(
            tuple(0 if q >= self.b else v for q, v in enumerate(row, start=1))
            for row in self.available
        )
        return RestrictedProblem(self.msp, self.msp.t, self.b - 1, self.F, available)

    def as_msp(self) -> MspInstance:
        return self.msp.with_capacities(self.F).with_tilde_b(self.available)
