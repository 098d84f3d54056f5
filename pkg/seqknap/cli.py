import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import click
import pandas as pd

from seqknap.aopt import aopt_solve, make_ordered
from seqknap.blocks import maximal_block_partition, to_msp
from seqknap.instance import Instance, capacity_partition
from seqknap.loader import RandomParams, dump_json, load_instance
from seqknap.oracle import EnumerationBudget
from seqknap.pipeline import Verifier, analyze, verify_random
from seqknap.polyhedra.base import RestrictedProblem
from seqknap.polyhedra.enumerator import DEFAULT_BRANCH_BUDGET, explore
from seqknap.polyhedra.inequalities import (
    DEFAULT_SELECTION_LIMIT,
    DEFAULT_SUBSET_CAP,
    describe_polytope,
    generate_for,
)
from seqknap.utils import format_value, get_logger

logger = get_logger(__name__)

SUBCOMMANDS = ("partition", "solve", "transform", "enumerate", "inequalities", "describe", "verify")

EXIT_OK, EXIT_ERROR, EXIT_COUNTEREXAMPLE = 0, 1, 2


@dataclass
class RunConfig:
    subcommand: str
    input: Optional[str] = None
    output: Optional[str] = None
    pretty: bool = False
    budget_points: int = 10**6
    budget_branches: int = DEFAULT_BRANCH_BUDGET
    selection_limit: int = DEFAULT_SELECTION_LIMIT
    subset_cap: int = DEFAULT_SUBSET_CAP
    seed: Optional[int] = None
    count: int = 10
    k: Optional[int] = None
    b: Optional[int] = None
    F: Optional[Tuple[int, ...]] = None
    params: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {self.subcommand!r}")
        for name in ("budget_points", "budget_branches", "selection_limit", "subset_cap", "count"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def budget(self) -> EnumerationBudget:
        return EnumerationBudget(max_points=self.budget_points)


def _problem(instance: Instance, config: RunConfig) -> RestrictedProblem:
    return RestrictedProblem.build(to_msp(instance), config.k, config.b, config.F)


def cmd_partition(instance: Instance, config: RunConfig) -> Tuple[Dict[str, Any], pd.DataFrame]:
    partition = capacity_partition(instance)
    table = pd.DataFrame(
        partition.matrix,
        columns=[f"part {h} (d={instance.d(h)})" for h in range(1, instance.l + 1)],
    )
    table.insert(0, "knapsack", range(1, instance.m + 1))
    payload = {
        "r": [list(row) for row in partition.r],
        "part_capacities": list(partition.part_capacities),
        "sizes": list(instance.distinct_sizes),
    }
    return payload, table


def cmd_solve(instance: Instance, config: RunConfig):
    x = make_ordered(aopt_solve(instance), instance)
    payload = x.to_json(instance)
    table = pd.DataFrame(payload["x"], columns=["knapsack", "item", "part", "count"])
    return payload, table


def cmd_transform(instance: Instance, config: RunConfig):
    msp = to_msp(instance, maximal_block_partition(instance))
    payload = msp.to_json(instance)
    table = pd.DataFrame(
        [
            {"block": b["w"], "members": b["members"], "f": b["f"], "p": b["p"], "tilde_b": b["tilde_b"]}
            for b in payload["blocks"]
        ]
    )
    return payload, table


def cmd_enumerate(instance: Instance, config: RunConfig):
    problem = _problem(instance, config)
    found = explore(problem, config.budget_branches)
    msp = problem.as_msp()
    payload = {
        "k": problem.k,
        "b": problem.b,
        "F": list(problem.F),
        "value": None if found.value is None else format_value(found.value),
        "optima": [y.to_json(msp) for y in found.optima],
        "candidates": [y.to_json(msp) for y in found.candidates],
        "branches": found.branches,
    }
    table = pd.DataFrame(
        [
            {"optimal": y in found.optima, "value": format_value(y.value(msp)), "totals": y.signature()}
            for y in found.candidates
        ]
    )
    return payload, table


def cmd_inequalities(instance: Instance, config: RunConfig):
    problem = _problem(instance, config)
    family = generate_for(problem, config.selection_limit)
    payload = {
        "k": problem.k,
        "b": problem.b,
        "F": list(problem.F),
        "inequalities": [inequality.to_json() for inequality in family],
    }
    table = pd.DataFrame(
        [
            {
                "lhs": " + ".join(f"{format_value(c)}*y[{w},{q}]" for (w, q), c in ineq.coefficients),
                "rhs": format_value(ineq.rhs),
                "selection": ineq.selection.label,
            }
            for ineq in family
        ]
    )
    return payload, table


def cmd_describe(instance: Instance, config: RunConfig):
    family = describe_polytope(
        instance, config.subset_cap, truncate=False, selection_limit=config.selection_limit
    )
    payload = {"inequalities": [ineq.to_json(instance) for ineq in family]}
    table = pd.DataFrame(
        [
            {
                "lhs": " + ".join(
                    f"{format_value(c)}*x[{instance.item(j).index}]" for j, c in ineq.coefficients
                ),
                "rhs": format_value(ineq.rhs),
            }
            for ineq in family
        ]
    )
    return payload, table


def _emit(payload: Dict[str, Any], table: pd.DataFrame, config: RunConfig) -> None:
    if config.pretty:
        text = table.to_string(index=False) if not table.empty else "(empty)"
        if config.output:
            with open(config.output, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            click.echo(text)
    else:
        dump_json(payload, stream=None if config.output else sys.stdout, path=config.output)


def run(config: RunConfig) -> int:
    """
    Dispatches one subcommand and writes its report. Returns the process exit status.
    """
    logger.info(f"Running {config.subcommand}")
    if config.subcommand == "verify":
        if config.seed is not None:
            reports = verify_random(
                config.seed,
                config.count,
                RandomParams.from_pairs(config.params),
                config.budget,
                config.budget_branches,
                config.selection_limit,
            )
        else:
            if not config.input:
                raise ValueError("verify needs --input or --random")
            instance = load_instance(config.input)
            verifier = Verifier(
                instance,
                name=config.input,
                budget=config.budget,
                branch_budget=config.budget_branches,
                selection_limit=config.selection_limit,
            )
            reports = [verifier.run()]
        failed = any(r.failed for r in reports)
        payload = {"passed": not failed, "reports": [r.to_json() for r in reports]}
        _emit(payload, analyze(reports), config)
        return EXIT_COUNTEREXAMPLE if failed else EXIT_OK

    if not config.input:
        raise ValueError(f"{config.subcommand} needs an instance file")
    instance = load_instance(config.input)
    handler: Callable = {
        "partition": cmd_partition,
        "solve": cmd_solve,
        "transform": cmd_transform,
        "enumerate": cmd_enumerate,
        "inequalities": cmd_inequalities,
        "describe": cmd_describe,
    }[config.subcommand]
    payload, table = handler(instance, config)
    _emit(payload, table, config)
    return EXIT_OK


def _parse_f(ctx, param, value: Optional[str]) -> Optional[Tuple[int, ...]]:
    if value is None:
        return None
    try:
        return tuple(int(v) for v in value.split(","))
    except ValueError:
        raise click.BadParameter("expected comma-separated integers, e.g. 1,6,8")


COMMON_OPTIONS = (
    click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write the report here instead of stdout."),
    click.option("--pretty", is_flag=True, help="Print a table instead of JSON."),
    click.option("--budget-points", default=10**6, show_default=True, help="Oracle enumeration cap."),
    click.option("--budget-branches", default=DEFAULT_BRANCH_BUDGET, show_default=True, help="Enumerator branch cap."),
    click.option(
        "--selection-limit", default=DEFAULT_SELECTION_LIMIT, show_default=True, help="Max alpha/beta pairs."
    ),
    click.option("--subset-cap", default=DEFAULT_SUBSET_CAP, show_default=True, help="Max item subsets for describe."),
    click.option("--k", "k", type=int, default=None, help="Largest active block (default: all)."),
    click.option("--b", "b", type=int, default=None, help="Largest active size class (default: all)."),
    click.option("--F", "F", callback=_parse_f, default=None, help="Part capacities, e.g. 1,6,8."),
)


def _common(fn):
    for decorator in reversed(COMMON_OPTIONS):
        fn = decorator(fn)
    return fn


def _execute(config: RunConfig) -> None:
    try:
        status = run(config)
    except (ValueError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_ERROR)
    sys.exit(status)


@click.group()
def main():
    """
    Exact solver and polyhedral toolkit for the sequential multiple knapsack problem.
    """


def _register(name: str, help_text: str):
    @main.command(name=name, help=help_text)
    @click.argument("input", type=click.Path(dir_okay=False), required=False)
    @click.option("--input", "-i", "input_file", type=click.Path(dir_okay=False), help="Instance file.")
    @_common
    def command(input: Optional[str], input_file: Optional[str], **kwargs):
        if input and input_file and input != input_file:
            raise click.UsageError("give the instance file once, as INPUT or --input")
        _execute(RunConfig(subcommand=name, input=input or input_file, **kwargs))

    return command


partition = _register("partition", "Capacity partition r of every knapsack.")
solve = _register("solve", "Optimal OPT/ordered solution by A-OPT.")
transform = _register("transform", "Maximal block partition and the M-SP instance.")
enumerate_ = _register("enumerate", "Candidate and optimal OPT/ordered M-SP solutions of MP(k, b, F).")
inequalities = _register("inequalities", "The inequality family I(k, b, F).")
describe = _register("describe", "Lifted inequalities over all item subsets.")


@main.command(name="verify")
@click.option("--input", "-i", "input", type=click.Path(dir_okay=False), help="Instance file to verify.")
@click.option("--random", "use_random", is_flag=True, help="Verify random instances instead of a file.")
@click.option("--seed", type=int, default=None, help="First seed of the random corpus (default 0).")
@click.option("--count", default=10, show_default=True, help="Number of random instances.")
@_common
@click.argument("params", nargs=-1)
def verify(use_random: bool, seed: Optional[int], params: Tuple[str, ...], **kwargs):
    """
    Checks every pipeline stage against the brute-force oracle and exits 2 on a counterexample.
    PARAMS are key=value settings for the random generator, e.g. n=4 m=2.
    """
    if use_random or (seed is not None and not kwargs.get("input")):
        seed = 0 if seed is None else seed
    else:
        seed = None
    _execute(RunConfig(subcommand="verify", seed=seed, params=params, **kwargs))


if __name__ == "__main__":
    main()
