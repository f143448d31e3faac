from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from pacsol.dimension import (ShatteringWitness, argmax_instance, natarajan_dimension,
                              solution_dimension, thresholds_instance, threshold_hypotheses,
                              tournament_bound, vc_dimension, vc_instance, verify_dimension_bound,
                              witness_is_valid)
from pacsol.framework import ProblemInstance, random_instance


def test_single_solution_has_dimension_zero():
    inst = random_instance(4, 3, 1, seed=0)
    d, w = solution_dimension(inst)
    assert d == 0 and w.points == ()


def test_argmax_three_points():
    d, w = solution_dimension(argmax_instance(3))
    assert d == 1
    assert witness_is_valid(argmax_instance(3), w)


def test_argmax_four_points():
    assert solution_dimension(argmax_instance(4))[0] == 1


def test_thresholds_match_vc():
    inst = thresholds_instance(4)
    assert solution_dimension(inst)[0] == 1
    assert vc_dimension(range(4), threshold_hypotheses(4)) == 1


def test_vc_trivial_cases():
    assert vc_dimension([0, 1, 2], [(0, 1, 0)]) == 0
    assert vc_dimension([0, 1, 2], list(product((0, 1), repeat=3))) == 3
    assert vc_dimension(["a"], [{"a": 0}, {"a": 1}]) == 1
    assert vc_dimension([], []) == 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(*[st.integers(0, 1)] * 4), min_size=1, max_size=10))
def test_vc_matches_bruteforce(rows):
    assert vc_dimension(range(4), rows) == oracles.vc_bruteforce(rows)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_solution_dimension_matches_bruteforce(seed):
    inst = random_instance(5, 3, 6, seed=seed)
    d, w = solution_dimension(inst)
    assert d == oracles.solution_dimension_bruteforce(inst)
    assert witness_is_valid(inst, w)


def test_vc_collapse_on_random_classes():
    for seed in range(10):
        inst = random_instance(5, 6, 1, seed=seed)
        rows = [tuple(inst.game_mapping(g)[x] for x in inst.instance_space) for g in range(6)]
        rows = list(dict.fromkeys(rows))
        as_problem = vc_instance(inst.instance_space, rows)
        assert solution_dimension(as_problem)[0] == vc_dimension(inst.instance_space, rows)


def test_natarajan_single_game():
    inst = random_instance(4, 1, 5, seed=3)
    assert natarajan_dimension(inst)[0] == 0


def test_natarajan_on_thresholds():
    inst = thresholds_instance(4)
    d, w = natarajan_dimension(inst)
    assert d >= 1
    assert witness_is_valid(inst, w)


def test_max_size_caps_search():
    inst = vc_instance(range(3), list(product((0, 1), repeat=3)))
    assert solution_dimension(inst)[0] == 3
    assert solution_dimension(inst, max_size=2)[0] == 2


def test_verify_dimension_bound():
    assert verify_dimension_bound(argmax_instance(3), 1)
    assert not verify_dimension_bound(argmax_instance(3), 0)
    assert verify_dimension_bound(thresholds_instance(4), tournament_bound(0))
    assert not verify_dimension_bound(thresholds_instance(4), -1)


def test_witness_rejects_tampering():
    inst = thresholds_instance(4)
    _, w = solution_dimension(inst)
    flipped = {k: (s + 1) % len(inst.solutions) for k, s in w.realized_labelings.items()}
    assert not witness_is_valid(inst, ShatteringWitness(w.points, w.games, flipped))


def test_witness_json():
    inst = argmax_instance(3)
    _, w = solution_dimension(inst)
    doc = w.to_json(inst)
    assert doc["kind"] == "solution"
    assert len(doc["labelings"]) == 2
    assert doc["point_values"] == [repr(inst.instance_space[i]) for i in w.points]


def test_tournament_bound_values():
    assert tournament_bound(0) == 1
    assert tournament_bound(2) == 2


def test_empty_table_instance():
    inst = ProblemInstance.from_table((0, 1), (0,), [(0, 0)], ("s",), [[[0, 0]]])
    assert solution_dimension(inst)[0] == 0


@pytest.mark.parametrize("size", [2, 3, 4])
def test_argmax_never_exceeds_one(size):
    assert verify_dimension_bound(argmax_instance(size), 1)
