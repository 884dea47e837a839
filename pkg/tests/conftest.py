import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from coordmech.core import Assignment, Instance

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

F = Fraction


def one_machine(weights, times):
    return Instance(weights, [list(times)])


@pytest.fixture
def pair():
    """One machine, w=(1,1), p=(1,2): the running example."""
    return one_machine([1, 1], [1, 2])


@pytest.fixture
def crossing():
    return Instance([1, 1], [[1, 3], [3, 1]])


positive = st.fractions(min_value=F(1, 4), max_value=10, max_denominator=6)


@st.composite
def instances(draw, max_jobs=5, max_machines=3, unit=False, forbid=True):
    n = draw(st.integers(1, max_jobs))
    m = draw(st.integers(1, max_machines))
    weights = [F(1)] * n if unit else draw(st.lists(positive, min_size=n, max_size=n))
    proc = [[draw(positive) for _ in range(n)] for _ in range(m)]
    if forbid and m > 1:
        for j in range(n):
            keep = draw(st.integers(0, m - 1))
            for i in range(m):
                if i != keep and draw(st.booleans()) and draw(st.booleans()):
                    proc[i][j] = None
    return Instance(weights, proc)


@st.composite
def instance_and_assignment(draw, **kw):
    inst = draw(instances(**kw))
    x = Assignment(draw(st.sampled_from(inst.feasible_machines(j))) for j in range(inst.num_jobs))
    return inst, x


def rng(seed=0):
    return random.Random(seed)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[key])
