"""
Valid inequalities for the restricted M-SP polytopes and their lifting to the item space.
"""
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from seqknap.blocks import AssignmentY, MspInstance, Pair, XInequality, lift_inequality, to_msp
from seqknap.errors import DivisibilityViolation, SelectionBudgetExceeded, SubsetBudgetExceeded
from seqknap.instance import Instance, validate_instance
from seqknap.oracle import (
    EnumerationBudget,
    enumerate_feasible_y,
    filter_opt_ordered,
)
from seqknap.polyhedra.base import RestrictedProblem
from seqknap.polyhedra.hsets import h_profile
from seqknap.utils import floor_to, format_value, get_logger

logger = get_logger(__name__)

ALPHA = "A"
BETA = "B"

DEFAULT_SELECTION_LIMIT = 12
DEFAULT_SUBSET_CAP = 2**12


@dataclass(frozen=True)
class CoefficientSelection:
    """
    One alpha/beta choice per (block, class) pair with class >= 2.
    """

    tags: Tuple[Tuple[Pair, str], ...] = ()

    def tag(self, w: int, q: int) -> str:
        return dict(self.tags)[(w, q)]

    def restricted(self, k: int, b: int) -> Tuple[Tuple[Pair, str], ...]:
        return tuple(
            (pair, tag) for pair, tag in self.tags if pair[1] < b or (pair[1] == b and pair[0] <= k)
        )

    @property
    def label(self) -> str:
        return ",".join(f"{w}{q}:{tag}" for (w, q), tag in self.tags)


@dataclass(frozen=True)
class YInequality:
    coefficients: Tuple[Tuple[Pair, Fraction], ...]
    rhs: Fraction
    selection: CoefficientSelection = CoefficientSelection()

    def lhs(self, y: AssignmentY) -> Fraction:
        totals = y.totals()
        return sum((c * totals.get(pair, 0) for pair, c in self.coefficients), Fraction(0))

    def holds(self, y: AssignmentY) -> bool:
        return self.lhs(y) <= self.rhs

    def tight(self, y: AssignmentY) -> bool:
        return self.lhs(y) == self.rhs

    def key(self):
        return self.coefficients, self.rhs

    def to_json(self) -> Dict[str, Any]:
        return {
            "lhs": [
                {"w": w, "q": q, "coef": format_value(c)}
                for (w, q), c in self.coefficients
            ],
            "rhs": format_value(self.rhs),
            "selection": self.selection.label,
        }


class GContext:
    """
    Evaluates g(k, b, S) and the alpha/beta coefficients of one selection. `cache` may be shared
    between selections: keys carry the part of the selection the value depends on.
    """

    def __init__(
        self,
        problem: RestrictedProblem,
        selection: CoefficientSelection,
        cache: Optional[Dict] = None,
    ):
        self.problem = problem
        self.msp = problem.msp
        self.selection = selection
        self.cache = {} if cache is None else cache

    def _floor_h(self, k: int, b: int) -> int:
        key = ("H", k, b)
        if key not in self.cache:
            level = self.problem.at_level(b, k)
            self.cache[key] = floor_to(h_profile(level, k).size(b), self.msp.d(b))
        return self.cache[key]

    def g(self, k: int, b: int, S: int) -> Fraction:
        if S % self.msp.d(b):
            raise DivisibilityViolation(f"S = {S} is not a multiple of d_{b} = {self.msp.d(b)}")
        key = ("g", k, b, S, self.selection.restricted(k, b))
        if key in self.cache:
            return self.cache[key]

        problem = self.problem
        if b == 1:
            value = Fraction(min(S, sum(problem.avail(w, 1) for w in range(1, k + 1))))
        elif k == 0:
            value = self.g(self.msp.t, b - 1, problem.F[b - 2] + S)
        elif problem.avail(k, b) == 0:
            value = self.g(k - 1, b, S)
        else:
            d = self.msp.d(b)
            alpha, beta = self.alpha_beta(k, b)
            a_floor = self._floor_h(k, b)
            if self.selection.tag(k, b) == ALPHA:
                a, base = alpha, a_floor
            else:
                a, base = beta, a_floor + d
            steps = (S - base) // d
            cap = self.msp.f(k) * problem.avail(k, b) // d
            if steps < 0:
                sigma, rest = 0, S
            elif steps <= cap:
                sigma, rest = steps, base
            else:
                sigma, rest = cap, S - self.msp.f(k) * problem.avail(k, b)
            value = self.g(k - 1, b, rest) + a * sigma
        self.cache[key] = value
        return value

    def alpha_beta(self, k: int, b: int) -> Tuple[Fraction, Fraction]:
        d = self.msp.d(b)
        a_floor = self._floor_h(k, b)
        low = self.g(k - 1, b, a_floor)
        mid = self.g(k - 1, b, a_floor + d)
        high = self.g(k - 1, b, a_floor + 2 * d)
        return mid - low, high - mid

    def coefficient(self, w: int, q: int) -> Fraction:
        """
        nu_{w,q}: 1 for class 1, otherwise the selected alpha or beta scaled by f_w / d_q.
        """
        if q == 1:
            return Fraction(1)
        alpha, beta = self.alpha_beta(w, q)
        a = alpha if self.selection.tag(w, q) == ALPHA else beta
        return a * self.msp.f(w) / self.msp.d(q)


def _selection_pairs(problem: RestrictedProblem) -> List[Pair]:
    return sorted(
        ((w, q) for q in range(2, problem.b + 1) for w in problem.types_in_class(q)),
        key=lambda pair: (pair[1], pair[0]),
    )


def base_inequality(problem: RestrictedProblem) -> YInequality:
    """
    Class 1 only: the total count is bounded by the capacity and by the multiplicities.
    """
    types = [w for w in problem.types_in_class(1) if w <= problem.k]
    rhs = min(sum(problem.F), sum(problem.avail(w, 1) for w in types))
    return YInequality(tuple(((w, 1), Fraction(1)) for w in types), Fraction(rhs))


def g_value(problem: RestrictedProblem, selection: CoefficientSelection, S: Optional[int] = None) -> Fraction:
    S = problem.fvector.tail() if S is None else S
    return GContext(problem, selection).g(problem.k, problem.b, S)


def alpha_beta(problem: RestrictedProblem, selection: CoefficientSelection, k: int, b: int):
    return GContext(problem, selection).alpha_beta(k, b)


def generate_I(
    msp: MspInstance,
    k: int,
    b: int,
    F: Sequence[int],
    selection_limit: int = DEFAULT_SELECTION_LIMIT,
) -> List[YInequality]:
    """
    I(k, b, F): one inequality per alpha/beta selection, duplicates dropped.
    """
    return generate_for(RestrictedProblem.build(msp, k, b, F), selection_limit)


def generate_for(
    problem: RestrictedProblem, selection_limit: int = DEFAULT_SELECTION_LIMIT
) -> List[YInequality]:
    if problem.b == 1:
        return [base_inequality(problem)]
    pairs = _selection_pairs(problem)
    if len(pairs) > selection_limit:
        raise SelectionBudgetExceeded(
            f"{len(pairs)} coefficient pairs means 2^{len(pairs)} selections (limit 2^{selection_limit})"
        )
    tail = problem.fvector.tail()
    class_one = problem.types_in_class(1)
    cache: Dict = {}
    found: Dict[Any, YInequality] = {}
    for tags in itertools.product((ALPHA, BETA), repeat=len(pairs)):
        selection = CoefficientSelection(tuple(zip(pairs, tags)))
        ctx = GContext(problem, selection, cache)
        rhs = ctx.g(problem.k, problem.b, tail)
        coeffs = [((w, 1), Fraction(1)) for w in class_one]
        coeffs += [((w, q), ctx.coefficient(w, q)) for w, q in pairs]
        inequality = YInequality(
            tuple(sorted((pair, c) for pair, c in coeffs if c)), rhs, selection
        )
        found.setdefault(inequality.key(), inequality)
    logger.debug(f"{2 ** len(pairs)} selections, {len(found)} distinct inequalities")
    return list(found.values())


@dataclass
class ConditionReport:
    """
    Violations found by the oracle: OPT/ordered points cutting off an inequality, and optimal
    OPT/ordered points on no inequality's face.
    """

    violated: List[Tuple[YInequality, AssignmentY]] = field(default_factory=list)
    untouched: List[AssignmentY] = field(default_factory=list)
    checked_points: int = 0
    optima: int = 0

    @property
    def ok(self) -> bool:
        return not self.violated and not self.untouched


def check_conditions(
    inequalities: Sequence[YInequality],
    problem: RestrictedProblem,
    budget: Optional[EnumerationBudget] = None,
) -> ConditionReport:
    msp = problem.as_msp()
    points = list(enumerate_feasible_y(msp, budget))
    ordered = filter_opt_ordered(points, msp)
    best = max(p.value(msp) for p in points)
    optima = [y for y in ordered if y.value(msp) == best]

    report = ConditionReport(checked_points=len(ordered), optima=len(optima))
    for y in ordered:
        for inequality in inequalities:
            if not inequality.holds(y):
                report.violated.append((inequality, y))
    for y in optima:
        if not any(inequality.tight(y) for inequality in inequalities):
            report.untouched.append(y)
    return report


def _sub_instance(instance: Instance, subset: Sequence[int]) -> Instance:
    # items of `subset` rescaled so that the smallest size becomes 1
    unit = min(instance.item(j).size for j in subset)
    raw = []
    for j in subset:
        item = instance.item(j)
        raw.append((item.size // unit, item.value, item.bound))
    return validate_instance(raw, [c // unit for c in instance.capacities])


def family_for_subset(
    instance: Instance,
    subset: Sequence[int],
    selection_limit: int = DEFAULT_SELECTION_LIMIT,
) -> List[XInequality]:
    """
    The lifted I(t, l, c̄) of the instance cut down to `subset`, in the instance's positions.
    """
    subset = sorted(subset)
    sub = _sub_instance(instance, subset)
    msp = to_msp(sub)
    family = generate_for(RestrictedProblem.build(msp), selection_limit)
    out = []
    for inequality in family:
        lifted = lift_inequality(
            dict(inequality.coefficients), inequality.rhs, msp, inequality.selection.label
        )
        coefficients = tuple((subset[j - 1], c) for j, c in lifted.coefficients)
        out.append(XInequality(coefficients, lifted.rhs, lifted.label))
    return out


def describe_polytope(
    instance: Instance,
    subset_cap: int = DEFAULT_SUBSET_CAP,
    truncate: bool = False,
    selection_limit: int = DEFAULT_SELECTION_LIMIT,
) -> List[XInequality]:
    """
    Union over non-empty item subsets W of the lifted inequality families.
    """
    n = instance.n
    if 2**n - 1 > subset_cap and not truncate:
        raise SubsetBudgetExceeded(f"2^{n} - 1 item subsets exceed the cap {subset_cap}")
    seen: Dict[Any, XInequality] = {}
    visited = 0
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(1, n + 1), size):
            if visited == subset_cap:
                logger.warning(f"stopped after {subset_cap} subsets")
                return list(seen.values())
            visited += 1
            for inequality in family_for_subset(instance, subset, selection_limit):
                seen.setdefault(inequality.key(), inequality)
    return list(seen.values())


def optimal_face(
    instance: Instance, selection_limit: int = DEFAULT_SELECTION_LIMIT
) -> List[XInequality]:
    """
    The family of W = {items with positive value}.
    """
    subset = [j for j in range(1, instance.n + 1) if instance.item(j).value > 0]
    if not subset:
        return []
    return family_for_subset(instance, subset, selection_limit)
