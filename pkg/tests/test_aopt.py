from fractions import Fraction

import pytest

from seqknap.aopt import (
    AssignmentX,
    GroupedItem,
    aopt_solve,
    aopt_solve_on_set,
    find_unordered_x,
    group_items,
    is_opt_solution,
    is_ordered_solution,
    make_ordered,
)
from seqknap.errors import BudgetExceeded, InfeasibleKeep, NonDivisibleSizes
from seqknap.instance import restrict, validate_instance
from seqknap.loader import gen_random
from seqknap.oracle import EnumerationBudget, brute_optimum, packing_optimum


def test_example_value(example):
    x = aopt_solve(example)
    assert x.is_feasible(example)
    assert x.value(example) == 163
    assert packing_optimum(example) == 163


def test_example_json_uses_input_indices(example):
    payload = aopt_solve(example).to_json(example)
    assert payload["value"] == 163
    assert {e["item"] for e in payload["x"]} <= {1, 2, 3, 4, 5, 6}
    # the size-4 item of value 32 is item 6 in the input
    assert any(e["item"] == 6 and e["part"] == 3 for e in payload["x"])


@pytest.mark.parametrize("seed", range(200))
def test_matches_independent_optimum(seed):
    instance = gen_random(seed)
    x = aopt_solve(instance)
    assert x.is_feasible(instance)
    assert x.value(instance) == packing_optimum(instance)
    try:
        best, _ = brute_optimum(instance)
    except BudgetExceeded:
        pytest.skip("oracle budget")
    assert x.value(instance) == best


@pytest.mark.parametrize("seed", range(60))
def test_every_prefix_is_optimal(seed):
    instance = gen_random(seed)
    prefixes = aopt_solve(instance).prefix_values(instance)
    for h in range(1, instance.l + 1):
        try:
            best, _ = brute_optimum(restrict(instance, h))
        except BudgetExceeded:
            pytest.skip("oracle budget")
        assert prefixes[h - 1] == best


def test_empty_knapsacks_give_zero():
    instance = validate_instance([(1, 5, 2), (2, 7, 1)], [0])
    assert aopt_solve(instance) == AssignmentX()


class TestGrouping:
    def test_runs_and_short_tail(self):
        pool = [GroupedItem(1, Fraction(v), ((1, 1),), (i,)) for i, v in enumerate([1, 5, 3], start=1)]
        grouped = group_items(pool, 2)
        assert [g.value for g in grouped] == [8, 1]
        assert all(g.assigned_size == 2 for g in grouped)
        assert grouped[0].origin == (2, 3)

    def test_ties_follow_input_index(self):
        pool = [GroupedItem(1, Fraction(4), ((1, 1),), (i,)) for i in (3, 1, 2)]
        grouped = group_items(pool, 2)
        assert grouped[0].origin == (1, 2)
        assert grouped[1].origin == (3,)

    def test_non_divisible_target(self):
        pool = [GroupedItem(2, Fraction(1), ((1, 1),), (1,))]
        with pytest.raises(NonDivisibleSizes):
            group_items(pool, 3)

    @pytest.mark.parametrize("count, target, runs", [(5, 4, [4, 1]), (8, 4, [4, 4]), (3, 1, [1, 1, 1])])
    def test_every_run_but_the_last_is_full(self, count, target, runs):
        pool = [GroupedItem(1, Fraction(count - i), ((i, 1),), (i,)) for i in range(1, count + 1)]
        grouped = group_items(pool, target)
        assert [len(g.origin) for g in grouped] == runs
        assert grouped[0].origin == tuple(range(1, runs[0] + 1))


class TestSolveOnSet:
    def test_reproduces_the_kept_items(self, example):
        x = aopt_solve(example)
        again = aopt_solve_on_set(example, x.totals())
        assert again.totals() == x.totals()
        assert again.value(example) == x.value(example)

    def test_too_many_items(self):
        instance = validate_instance([(1, 1, 3)], [2])
        with pytest.raises(InfeasibleKeep):
            aopt_solve_on_set(instance, {1: 3})

    def test_above_bound(self):
        instance = validate_instance([(1, 1, 1)], [2])
        with pytest.raises(InfeasibleKeep):
            aopt_solve_on_set(instance, {1: 2})

    def test_empty_keep(self, example):
        assert aopt_solve_on_set(example, {}) == AssignmentX()


class TestOrdered:
    @pytest.fixture
    def bundle_instance(self):
        # two unit items of value 2 against one size-2 item of value 4, capacity split (0, 2)
        return validate_instance([(1, 2, 2), (2, 4, 1)], [2])

    def test_detects_unassigned_partner(self, bundle_instance):
        x = AssignmentX.build({(1, 1, 2): 2})
        violation = find_unordered_x(x, bundle_instance)
        assert violation is not None
        assert violation.bundle == {1: 2}
        assert violation.partner == 2
        assert violation.partner_at is None

    def test_make_ordered_swaps_in_partner(self, bundle_instance):
        x = AssignmentX.build({(1, 1, 2): 2})
        ordered = make_ordered(x, bundle_instance)
        assert ordered == AssignmentX.build({(1, 2, 2): 1})
        assert ordered.value(bundle_instance) == x.value(bundle_instance)
        assert is_ordered_solution(ordered, bundle_instance)

    def test_single_items_are_never_bundles(self, bundle_instance):
        x = AssignmentX.build({(1, 1, 2): 1})
        assert is_ordered_solution(x, bundle_instance)

    @pytest.mark.parametrize("seed", range(40))
    def test_make_ordered_keeps_prefixes(self, seed):
        instance = gen_random(seed)
        x = aopt_solve(instance)
        ordered = make_ordered(x, instance)
        assert is_ordered_solution(ordered, instance)
        assert ordered.is_feasible(instance)
        assert ordered.prefix_values(instance) == x.prefix_values(instance)


def test_aopt_output_is_opt(tiny_corpus):
    budget = EnumerationBudget(max_points=200_000)
    for instance in tiny_corpus:
        assert is_opt_solution(aopt_solve(instance), instance, budget)


def test_non_opt_solution_detected():
    # the valuable item sits in part 2 while part 1 could hold it
    instance = validate_instance([(1, 9, 1), (1, 1, 1)], [1, 1])
    x = AssignmentX.build({(1, 2, 1): 1, (2, 1, 1): 1})
    assert is_opt_solution(x, instance)
    worse = validate_instance([(1, 9, 1), (1, 1, 1), (2, 1, 1)], [3])
    y = AssignmentX.build({(1, 2, 1): 1, (1, 1, 2): 1})
    assert not is_opt_solution(y, worse)
