import pytest

from seqknap.blocks import AssignmentY, to_msp
from seqknap.errors import BranchBudgetExceeded, BudgetExceeded, DivisibilityViolation, IndexOutOfRange
from seqknap.instance import validate_instance
from seqknap.oracle import EnumerationBudget, mo_oo, packing_optimum
from seqknap.polyhedra.base import FVector, RestrictedProblem
from seqknap.polyhedra.enumerator import (
    base_case,
    decomposition_path,
    enumerate_candidates,
    enumerate_optima,
    explore,
    next_type_range,
    value_range_tail,
    value_range_top,
)
from seqknap.polyhedra.hsets import availability_bounds, gain_dominators, h_profile


def _profile(y: AssignmentY):
    totals = y.totals()
    return tuple(totals.get(pair, 0) for pair in [(1, 1), (2, 2), (3, 2), (4, 2)])


class TestRestrictedProblem:
    def test_full_problem(self, example_msp):
        problem = RestrictedProblem.build(example_msp)
        assert (problem.k, problem.b, problem.F) == (5, 3, (1, 6, 8))
        assert problem.top_type() == 5

    def test_branch_universe(self, branch_problem):
        assert branch_problem.avail(4, 3) == 0
        assert branch_problem.avail(5, 3) == 0
        assert branch_problem.avail(4, 2) == 7
        assert branch_problem.types_in_class(2) == [2, 3, 4]

    def test_fix_and_lower(self, branch_problem):
        reduced = branch_problem.fix(4, {2: 0}).fix(3, {2: 1, 3: 2})
        assert reduced.k == 2
        assert reduced.F == (1, 4, 4)
        assert reduced.avail(3, 2) == 0
        lowered = reduced.fix(2, {2: 2}).fix(1, {}).lower()
        assert lowered.b == 1

    def test_fvector_divisibility(self):
        with pytest.raises(DivisibilityViolation):
            FVector((1, 3, 8), 2, (1, 2, 4))
        assert FVector((1, 6, 8), 2, (1, 2, 4)).delta(3) == 2

    def test_capacity_above_partition(self, example_msp):
        with pytest.raises(ValueError):
            RestrictedProblem.build(example_msp, 4, 2, (1, 8, 8))

    @pytest.mark.parametrize("k, b", [(9, 2), (0, 2), (4, 0), (4, 4)])
    def test_indices_out_of_range(self, example_msp, k, b):
        with pytest.raises(IndexOutOfRange):
            RestrictedProblem.build(example_msp, k, b, (1, 6, 8))


class TestHSets:
    def test_top_block(self, example_msp):
        problem = RestrictedProblem.build(example_msp)
        profile = h_profile(problem, 5)
        assert profile.size(2) == 8
        assert profile.min(2) == 6
        assert profile.size(3) == 2

    def test_block_four(self, example_msp):
        problem = RestrictedProblem.build(example_msp)
        profile = h_profile(problem, 4)
        assert profile.size(2) == 24
        assert profile.size(3) == 18

    def test_dominators_skip_later_blocks_of_the_same_class(self, example_msp):
        problem = RestrictedProblem.build(example_msp)
        assert (5, 3) not in gain_dominators(problem, 4, 3)
        assert gain_dominators(problem, 4, 2) == {(2, 2): 4, (3, 2): 8}

    def test_all_better_blocks(self, example_msp):
        problem = RestrictedProblem.build(example_msp)
        assert gain_dominators(problem, 5) == {(2, 2): 4}
        assert {u for u, _ in gain_dominators(problem, 4)} == {2, 3, 5}
        assert gain_dominators(problem, 2) == {}

    def test_availability_bounds(self, example_msp):
        problem = RestrictedProblem.build(example_msp)
        assert availability_bounds(problem, 5, 3) == (0, 6)
        assert availability_bounds(problem, 5, 2) == (8, 10)


class TestRanges:
    def test_top_class_of_example(self, example_msp):
        problem = RestrictedProblem.build(example_msp)
        assert value_range_top(problem) == [0, 1]
        assert next_type_range(problem, {3: 0}) == [0]
        assert next_type_range(problem, {3: 1}) == [0]

    def test_branch_ranges(self, branch_problem):
        assert value_range_top(branch_problem) == [0]
        assert value_range_tail(branch_problem) == [0]
        three = branch_problem.fix(4, {2: 0})
        assert value_range_top(three) == [0]
        assert value_range_tail(three) == [2, 3]
        assert value_range_top(three.fix(3, {3: 2})) == [2, 3]
        assert value_range_tail(three.fix(3, {3: 2})) == [4]
        assert value_range_tail(three.fix(3, {3: 3})) == [3, 4]

    def test_first_class_has_no_range(self, example_msp):
        problem = RestrictedProblem.build(example_msp, b=1)
        with pytest.raises(ValueError):
            value_range_top(problem)


class TestBaseCase:
    def test_gain_order_water_fill(self):
        msp = to_msp(validate_instance([(1, 2, 3), (1, 5, 2)], [4]))
        problem = RestrictedProblem.build(msp)
        y = base_case(problem)
        assert y.totals() == {(1, 1): 2, (2, 1): 2}
        assert y.value(msp) == 14

    def test_capacity_limits(self):
        msp = to_msp(validate_instance([(1, 2, 3), (1, 5, 2)], [1]))
        y = base_case(RestrictedProblem.build(msp))
        assert y.totals() == {(1, 1): 1}


class TestBranchExample:
    def test_candidate_profiles(self, branch_problem):
        profiles = {_profile(y) for y in enumerate_candidates(branch_problem)}
        assert profiles == {(2, 4, 2, 0), (2, 3, 3, 0), (1, 4, 3, 0)}

    def test_profile_values(self, branch_problem):
        msp = branch_problem.as_msp()
        values = {_profile(y): y.value(msp) for y in enumerate_candidates(branch_problem)}
        assert values == {(2, 4, 2, 0): 150, (2, 3, 3, 0): 137, (1, 4, 3, 0): 161}

    def test_only_the_third_profile_is_optimal(self, branch_problem):
        optima = enumerate_optima(branch_problem)
        assert optima
        assert {_profile(y) for y in optima} == {(1, 4, 3, 0)}

    def test_oracle_optima_are_candidates(self, branch_problem):
        candidates = set(enumerate_candidates(branch_problem))
        assert set(mo_oo(branch_problem.as_msp())) <= candidates

    def test_branch_log(self, branch_problem):
        found = explore(branch_problem)
        assert found.branches[0] == {"k": 4, "b": 2, "F": [1, 6, 8], "top": [0], "tail": [0]}
        assert found.value == 161

    def test_branch_budget(self, branch_problem):
        with pytest.raises(BranchBudgetExceeded):
            enumerate_candidates(branch_problem, branch_budget=2)


def test_full_example_reaches_the_optimum(example, example_msp):
    found = explore(RestrictedProblem.build(example_msp))
    assert found.value == packing_optimum(example)


def test_random_optimum_value(tiny_corpus):
    for instance in tiny_corpus:
        found = explore(RestrictedProblem.build(to_msp(instance)))
        assert found.value == packing_optimum(instance)


def test_oracle_optima_follow_the_ranges(tiny_instance):
    msp = to_msp(tiny_instance)
    problem = RestrictedProblem.build(msp)
    try:
        optima = mo_oo(msp, EnumerationBudget(max_points=100_000))
    except BudgetExceeded:
        pytest.skip("oracle budget")
    candidates = set(enumerate_candidates(problem))
    for y in optima:
        steps, base_ok = decomposition_path(problem, y)
        assert all(step.inside for step in steps)
        assert all(len(step.top) <= 3 and len(step.tail) <= 3 for step in steps)
        assert base_ok
        assert y in candidates
