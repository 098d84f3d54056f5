from fractions import Fraction

import pytest

from seqknap.aopt import AssignmentX, aopt_solve, make_ordered
from seqknap.blocks import (
    AssignmentY,
    is_block,
    is_ordered_y,
    find_unordered_y,
    lift_inequality,
    maximal_block_partition,
    to_msp,
    x_to_y,
    y_to_x,
)
from seqknap.errors import BudgetExceeded, InfeasibleY, SearchSpaceTooLarge
from seqknap.instance import validate_instance
from seqknap.loader import gen_random
from seqknap.oracle import brute_optimum, enumerate_feasible_x, enumerate_feasible_y


class TestBlockPartition:
    def test_example_blocks(self, example, example_msp):
        members = [[example.item(j).index for j in b.members] for b in example_msp.blocks]
        assert members == [[1], [2], [3], [4, 5], [6]]
        assert [b.weight for b in example_msp.blocks] == [1, 2, 2, 2, 4]
        assert [b.profit for b in example_msp.blocks] == [4, 28, 15, 14, 32]

    def test_example_multiplicities(self, example_msp):
        expected = {(1, 1): 2, (2, 2): 4, (3, 2): 8, (4, 2): 7, (4, 3): 4, (5, 3): 1}
        assert {pair: example_msp.tb(*pair) for pair in example_msp.pairs()} == expected
        assert example_msp.part_capacities == (1, 6, 8)

    def test_is_block(self, example):
        # input items 4 and 5 sit at positions 4 and 6
        assert is_block(example, [4, 6])
        assert is_block(example, [1])

    def test_equal_gain_but_out_of_reach(self):
        instance = validate_instance([(1, 1, 1), (4, 4, 1)], [8])
        blocks = maximal_block_partition(instance)
        assert len(blocks) == 2
        assert not is_block(instance, [1, 2])

    def test_chained_reach(self):
        # 1 + 2*1 covers size 2, then 3 + 1*2 covers size 4
        instance = validate_instance([(1, 1, 2), (2, 2, 1), (4, 4, 1)], [8])
        blocks = maximal_block_partition(instance)
        assert len(blocks) == 1
        assert blocks[0].weight == 1
        assert blocks[0].multiplicity == 8

    @pytest.mark.parametrize("seed", range(30))
    def test_partition_covers_items(self, seed):
        instance = gen_random(seed)
        blocks = maximal_block_partition(instance)
        assert sorted(j for b in blocks for j in b.members) == list(range(1, instance.n + 1))
        for b in blocks:
            assert is_block(instance, b.members)
            assert len({instance.item(j).gain for j in b.members}) == 1


class TestCorrespondence:
    def test_example_roundtrip(self, example, example_msp):
        x = aopt_solve(example)
        y = x_to_y(x, example)
        assert y.is_feasible(example_msp)
        assert y.value(example_msp) == x.value(example)
        back = y_to_x(y, example)
        assert back.is_feasible(example)
        assert back.value(example) == x.value(example)

    @pytest.mark.parametrize("seed", range(60))
    def test_random_roundtrip_keeps_value(self, seed):
        instance = gen_random(seed)
        msp = to_msp(instance)
        x = make_ordered(aopt_solve(instance), instance)
        y = x_to_y(x, instance)
        assert y.is_feasible(msp)
        assert y.value(msp) == x.value(instance)
        assert y.prefix_profits(msp) == x.prefix_values(instance)
        back = y_to_x(y, instance)
        assert back.is_feasible(instance)
        assert back.value(instance) == x.value(instance)

    def test_zero(self, example):
        assert y_to_x(AssignmentY(), example).entries == ()

    def test_multiplicity_exceeded(self, example):
        with pytest.raises(InfeasibleY):
            y_to_x(AssignmentY.build({(5, 3, 3): 2}), example)

    def test_wrong_part(self, example):
        with pytest.raises(InfeasibleY):
            y_to_x(AssignmentY.build({(2, 2, 1): 1}), example)

    def test_part_load_split_over_knapsacks(self):
        # r = [[0, 2], [0, 2]]: knapsack 1 cannot take the whole part-2 load
        instance = validate_instance([(1, 2, 2), (2, 6, 2)], [2, 2])
        x = AssignmentX.build({(1, 1, 2): 2, (2, 2, 2): 1})
        back = y_to_x(x_to_y(x, instance), instance)
        assert back == AssignmentX.build({(1, 2, 2): 1, (2, 1, 2): 2})
        assert back.is_feasible(instance)


class TestCorrespondenceOnCorpus:
    @pytest.mark.parametrize("seed", range(40))
    def test_every_x_keeps_its_value(self, seed):
        instance = gen_random(seed)
        msp = to_msp(instance)
        blocks = list(msp.blocks)
        try:
            for x in enumerate_feasible_x(instance):
                y = x_to_y(x, instance, blocks)
                assert y.is_feasible(msp)
                assert y.value(msp) == x.value(instance)
        except BudgetExceeded:
            pytest.skip("oracle budget")

    @pytest.mark.parametrize("seed", range(40))
    def test_every_y_maps_back(self, seed):
        instance = gen_random(seed)
        msp = to_msp(instance)
        blocks = list(msp.blocks)
        try:
            best_x, _ = brute_optimum(instance)
            best_y = None
            for y in enumerate_feasible_y(msp):
                x = y_to_x(y, instance, blocks)
                assert x.is_feasible(instance)
                assert x.value(instance) >= y.value(msp)
                best_y = y.value(msp) if best_y is None else max(best_y, y.value(msp))
        except BudgetExceeded:
            pytest.skip("oracle budget")
        assert best_x == best_y


def test_lift_inequality(example, example_msp):
    coeffs = {(1, 1): Fraction(1), (2, 2): Fraction(1), (3, 2): Fraction(1), (4, 2): Fraction(1)}
    lifted = lift_inequality(coeffs, Fraction(8), example_msp)
    assert dict(lifted.coefficients) == {1: 1, 2: 1, 3: 1, 4: 1}
    assert lifted.rhs == 8
    x = aopt_solve(example)
    assert lifted.lhs(x) == sum(c for j, c in x.totals().items() if j <= 4)


def test_lift_scales_by_size_over_weight():
    # one block of weight 1 holding a size-1 and a size-2 item
    instance = validate_instance([(1, 1, 2), (2, 2, 1)], [4])
    msp = to_msp(instance)
    lifted = lift_inequality({(1, 1): Fraction(1), (1, 2): Fraction(1, 2)}, Fraction(3), msp)
    assert dict(lifted.coefficients) == {1: 1, 2: 1}


class TestOrderedY:
    @pytest.fixture
    def msp(self):
        # one block {unit item, size-2 item}; part capacities (0, 2)
        return to_msp(validate_instance([(1, 2, 2), (2, 4, 1)], [2]))

    def test_low_items_with_free_class_two_twin(self, msp):
        y = AssignmentY.build({(1, 1, 2): 2})
        violation = find_unordered_y(y, msp)
        assert violation is not None
        assert violation.part == 2 and violation.size_class == 2
        assert not is_ordered_y(y, msp)

    def test_class_two_items_are_ordered(self, msp):
        assert is_ordered_y(AssignmentY.build({(1, 2, 2): 2}), msp)

    def test_zero_is_ordered(self, msp):
        assert is_ordered_y(AssignmentY(), msp)

    def test_budget_covers_low_bundles(self, msp):
        # a lone unit item never fills a size-2 chunk, so only low bundles are inspected
        y = AssignmentY.build({(1, 1, 2): 1})
        assert find_unordered_y(y, msp) is None
        with pytest.raises(SearchSpaceTooLarge):
            find_unordered_y(y, msp, budget=0)
