import pytest

from seqknap.blocks import to_msp
from seqknap.instance import capacity_partition, validate_instance
from seqknap.loader import RandomParams, gen_random, load_example
from seqknap.polyhedra.base import RestrictedProblem

# small enough for the brute-force oracle
TINY = RandomParams(max_types=3, max_knapsacks=2, chain=(1, 2, 4), bound_cap=2, capacity_cap=6, value_cap=9)
TINY_SEEDS = range(40)


@pytest.fixture
def example():
    return load_example()


@pytest.fixture
def example_partition(example):
    return capacity_partition(example)


@pytest.fixture
def example_msp(example):
    return to_msp(example)


@pytest.fixture
def branch_problem(example_msp):
    """
    MP(4, 2, (1, 6, 8)) of the worked example.
    """
    return RestrictedProblem.build(example_msp, 4, 2, (1, 6, 8))


@pytest.fixture
def tiny_corpus():
    return [gen_random(seed, TINY) for seed in TINY_SEEDS]


@pytest.fixture(params=TINY_SEEDS)
def tiny_instance(request):
    return gen_random(request.param, TINY)


@pytest.fixture
def two_items():
    # gains 3 and 5/2, capacity split (1, 2)
    return validate_instance([(1, 3, 1), (2, 5, 1)], [3])
