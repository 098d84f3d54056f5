from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from seqknap.blocks import Pair
from seqknap.polyhedra.base import RestrictedProblem
from seqknap.utils import floor_to


@dataclass(frozen=True)
class HProfile:
    """
    For one block type k: `dominated[g-1]` is the total weight of strictly better blocks that
    may sit in parts 1..g, `sizes[g-1]` is what is left of it for part g after the lower parts
    took `mins[h-1]` each.
    """

    k: int
    dominated: Tuple[int, ...]
    sizes: Tuple[int, ...]
    mins: Tuple[int, ...]

    def size(self, g: int) -> int:
        return self.sizes[g - 1]

    def min(self, g: int) -> int:
        return self.mins[g - 1]


def gain_dominators(problem: RestrictedProblem, k: int, g: Optional[int] = None) -> Dict[Pair, int]:
    """
    Remaining multiplicities of the blocks with larger gain than k. With `g` given, only the
    pairs that may go into part g are kept, and class-g blocks indexed above k are left out.
    """
    msp = problem.msp
    gain = msp.gain(k)
    top = problem.b if g is None else g
    return {
        (u, q): problem.avail(u, q)
        for u in range(1, msp.t + 1)
        for q in range(1, top + 1)
        if problem.avail(u, q)
        and msp.gain(u) > gain
        and (g is None or not (q == g and u > k))
    }


def _dominated_sizes(problem: RestrictedProblem, k: int) -> Tuple[int, ...]:
    msp = problem.msp
    return tuple(
        sum(msp.f(u) * c for (u, _), c in gain_dominators(problem, k, g).items())
        for g in range(1, problem.b + 1)
    )


def h_profile(problem: RestrictedProblem, k: int) -> HProfile:
    dominated = _dominated_sizes(problem, k)
    sizes, mins = [], []
    used = 0
    for g in range(1, problem.b + 1):
        size = dominated[g - 1] - used
        least = min(floor_to(size, problem.delta(g)), problem.F[g - 1])
        sizes.append(size)
        mins.append(least)
        used += least
    return HProfile(k, dominated, tuple(sizes), tuple(mins))


def availability_bounds(problem: RestrictedProblem, k: int, g: int) -> Tuple[int, int]:
    """
    Bracket for the size of better blocks still free when part g is filled in an optimal point.
    """
    size = h_profile(problem, k).size(g)
    d = problem.delta(g)
    return floor_to(size, d), size + d
