import concurrent.futures
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import pandas as pd

from seqknap.aopt import aopt_solve, is_opt_solution, is_ordered_solution, make_ordered
from seqknap.blocks import to_msp, x_to_y, y_to_x
from seqknap.errors import BudgetExceeded
from seqknap.instance import Instance
from seqknap.loader import RandomParams, gen_random
from seqknap.oracle import EnumerationBudget, brute_optimum, mo_oo, packing_optimum
from seqknap.polyhedra.base import RestrictedProblem
from seqknap.polyhedra.enumerator import DEFAULT_BRANCH_BUDGET, explore
from seqknap.polyhedra.inequalities import (
    DEFAULT_SELECTION_LIMIT,
    check_conditions,
    generate_for,
)
from seqknap.utils import format_value, get_logger

logger = get_logger(__name__)

PASS, FAIL, SKIP = "pass", "fail", "skipped"


@dataclass
class CheckResult:
    check: str
    status: str
    detail: str = ""
    counterexample: Optional[Dict[str, Any]] = None

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"check": self.check, "status": self.status, "detail": self.detail}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class VerificationReport:
    name: str
    instance: Instance
    results: List[CheckResult] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(r.status == FAIL for r in self.results)

    def to_json(self) -> Dict[str, Any]:
        return {
            "instance": self.name,
            "data": self.instance.to_dict(),
            "passed": not self.failed,
            "checks": [r.to_json() for r in self.results],
        }


class Verifier:
    """
    Runs solve, transform, enumerate and inequalities on one instance and checks each stage
    against the enumeration oracle. Stages whose oracle would exceed the budget are skipped.
    """

    def __init__(
        self,
        instance: Instance,
        name: str = "instance",
        budget: Optional[EnumerationBudget] = None,
        branch_budget: int = DEFAULT_BRANCH_BUDGET,
        selection_limit: int = DEFAULT_SELECTION_LIMIT,
    ):
        self.instance = instance
        self.name = name
        self.budget = budget or EnumerationBudget(max_points=20_000)
        self.branch_budget = branch_budget
        self.selection_limit = selection_limit

    def log(self, txt: str) -> None:
        logger.info(f"[{self.name}] {txt}")

    def _guard(self, check: str, fn: Callable[[], CheckResult]) -> CheckResult:
        try:
            result = fn()
        except BudgetExceeded as e:
            result = CheckResult(check, SKIP, str(e))
        self.log(f"{check}: {result.status}")
        return result

    def check_solver(self) -> CheckResult:
        x = aopt_solve(self.instance)
        value = x.value(self.instance)
        best = packing_optimum(self.instance)
        if not x.is_feasible(self.instance) or value != best:
            return CheckResult(
                "solve",
                FAIL,
                f"A-OPT value {value}, optimum {best}",
                x.to_json(self.instance),
            )
        brute, _ = brute_optimum(self.instance, self.budget)
        if brute != best:
            return CheckResult("solve", FAIL, f"brute force {brute}, packing optimum {best}")
        return CheckResult("solve", PASS, f"value {format_value(value)}")

    def check_properties(self) -> CheckResult:
        x = aopt_solve(self.instance)
        if not is_opt_solution(x, self.instance, self.budget):
            return CheckResult("opt-ordered", FAIL, "A-OPT output is not OPT", x.to_json(self.instance))
        ordered = make_ordered(x, self.instance)
        if not is_ordered_solution(ordered, self.instance) or ordered.value(self.instance) != x.value(
            self.instance
        ):
            return CheckResult("opt-ordered", FAIL, "reordering changed the value", ordered.to_json(self.instance))
        return CheckResult("opt-ordered", PASS)

    def check_transform(self) -> CheckResult:
        msp = to_msp(self.instance)
        x = make_ordered(aopt_solve(self.instance), self.instance)
        y = x_to_y(x, self.instance)
        if not y.is_feasible(msp) or y.value(msp) != x.value(self.instance):
            return CheckResult("transform", FAIL, "x_to_y lost feasibility or value", y.to_json(msp))
        back = y_to_x(y, self.instance)
        if not back.is_feasible(self.instance) or back.value(self.instance) != x.value(self.instance):
            return CheckResult("transform", FAIL, "y_to_x lost feasibility or value", back.to_json(self.instance))
        return CheckResult("transform", PASS, f"{msp.t} blocks")

    def check_enumeration(self) -> CheckResult:
        msp = to_msp(self.instance)
        problem = RestrictedProblem.build(msp)
        found = explore(problem, self.branch_budget)
        best = packing_optimum(self.instance)
        if found.value != best:
            return CheckResult("enumerate", FAIL, f"enumerated optimum {found.value}, optimum {best}")
        candidates = set(found.candidates)
        for y in mo_oo(msp, self.budget):
            if y not in candidates:
                return CheckResult("enumerate", FAIL, "MO^OO point not enumerated", y.to_json(msp))
        return CheckResult("enumerate", PASS, f"{len(found.optima)} optima")

    def check_inequalities(self) -> CheckResult:
        msp = to_msp(self.instance)
        problem = RestrictedProblem.build(msp)
        family = generate_for(problem, self.selection_limit)
        report = check_conditions(family, problem, self.budget)
        if report.violated:
            inequality, y = report.violated[0]
            return CheckResult(
                "inequalities",
                FAIL,
                "an OPT/ordered point violates an inequality",
                {"inequality": inequality.to_json(), **y.to_json(msp)},
            )
        if report.untouched:
            return CheckResult(
                "inequalities", FAIL, "an optimum lies on no inequality", report.untouched[0].to_json(msp)
            )
        return CheckResult("inequalities", PASS, f"{len(family)} inequalities")

    def run(self) -> VerificationReport:
        report = VerificationReport(self.name, self.instance)
        for check, fn in (
            ("solve", self.check_solver),
            ("opt-ordered", self.check_properties),
            ("transform", self.check_transform),
            ("enumerate", self.check_enumeration),
            ("inequalities", self.check_inequalities),
        ):
            report.results.append(self._guard(check, fn))
        return report


def verify_random(
    seed: int,
    count: int,
    params: Optional[RandomParams] = None,
    budget: Optional[EnumerationBudget] = None,
    branch_budget: int = DEFAULT_BRANCH_BUDGET,
    selection_limit: int = DEFAULT_SELECTION_LIMIT,
    max_workers: int = 5,
) -> List[VerificationReport]:
    """
    Verifies `count` random instances drawn with seeds seed, seed+1, ... in a thread pool.
    Reports come back in seed order.
    """
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {
            executor.submit(
                Verifier(
                    gen_random(s, params),
                    name=f"seed={s}",
                    budget=budget,
                    branch_budget=branch_budget,
                    selection_limit=selection_limit,
                ).run
            ): s
            for s in range(seed, seed + count)
        }
        reports = {}
        for future in concurrent.futures.as_completed(futures):
            reports[futures[future]] = future.result()
    logger.info(f"Finished {count} random instances.")
    return [reports[s] for s in sorted(reports)]


def analyze(reports: List[VerificationReport]) -> pd.DataFrame:
    """
    One row per (instance, check).
    """
    rows = [
        {"instance": r.name, "check": c.check, "status": c.status, "detail": c.detail}
        for r in reports
        for c in r.results
    ]
    return pd.DataFrame(rows, columns=["instance", "check", "status", "detail"])
