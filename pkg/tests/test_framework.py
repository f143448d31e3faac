import math
from fractions import Fraction
from itertools import product

import pytest
import sympy
from hypothesis import given, settings, strategies as st

import oracles
from pacsol.distributions import DistributionSpec
from pacsol.errors import EmptyBatch, InvalidParams, NoConsistentGame
from pacsol.framework import (PacParameters, ProblemInstance, SampleBatch, conjoin_instances,
                              conjoin_losses, consistent_games, consistent_sample_size,
                              disjoin_instances, disjoin_losses, empirical_loss, epsilon_split,
                              erm_bayesian, erm_worst_case, exact_statistical_loss,
                              random_instance, statistical_loss_estimate, uc_sample_size)
from pacsol.tu_core import tu_loss


def const_loss(v):
    return lambda x, g, s: v


def test_empirical_loss_zero_and_quarter():
    batch = SampleBatch(((i, 0) for i in range(4)))
    assert empirical_loss(batch, None, None, const_loss(0)) == 0
    assert empirical_loss(batch, None, None, lambda x, g, s: int(x == 2)) == Fraction(1, 4)


def test_empirical_loss_tu_blocking():
    batch = SampleBatch([(frozenset({0, 1}), 3)])
    game = lambda S: 3 if S == frozenset({0, 1}) else 0
    assert empirical_loss(batch, game, (1, 1, 1), tu_loss) == 1


def test_empirical_loss_empty_batch():
    with pytest.raises(EmptyBatch):
        empirical_loss(SampleBatch(), None, None, const_loss(0))


def test_estimate_constant_losses():
    dist = DistributionSpec.uniform(range(5), seed=1)
    assert statistical_loss_estimate(dist, None, None, const_loss(0), 100) == (0, 0.0)
    est, _ = statistical_loss_estimate(dist, None, None, const_loss(1), 100)
    assert est == 1


def test_estimate_two_points():
    dist = DistributionSpec.uniform(["a", "b"], seed=3)
    loss = lambda x, g, s: int(x == "a")
    exact = exact_statistical_loss(dist, None, None, loss)
    est, hw = statistical_loss_estimate(dist, None, None, loss, 10000)
    assert exact == Fraction(1, 2)
    assert abs(est - exact) <= Fraction(1, 50)
    assert 0 < hw < 0.02


def test_estimate_is_deterministic():
    dist = DistributionSpec.nonempty_subsets(4, seed=9)
    loss = lambda x, g, s: int(len(x) > 2)
    assert statistical_loss_estimate(dist, None, None, loss, 500, seed=4) == \
        statistical_loss_estimate(dist, None, None, loss, 500, seed=4)


def test_exact_loss_weights():
    dist = DistributionSpec.weighted(["p", "q"], ["1/3", "2/3"])
    assert exact_statistical_loss(dist, None, None, lambda x, g, s: int(x == "p")) == Fraction(1, 3)
    assert exact_statistical_loss(dist, None, None, const_loss(0)) == 0


def test_exact_matches_estimate_on_random_cases():
    # 95% intervals: the expected count outside is one in twenty
    inside = 0
    for seed in range(20):
        inst = random_instance(5, 1, 1, seed=seed)
        gen = __import__("numpy").random.default_rng(seed)
        w = [int(v) + 1 for v in gen.integers(0, 5, size=5)]
        dist = DistributionSpec.weighted(range(5), [Fraction(v, sum(w)) for v in w], seed=seed)
        loss = lambda x, g, s: inst.loss(x, 0, 0)
        exact = exact_statistical_loss(dist, None, None, loss)
        est, hw = statistical_loss_estimate(dist, None, None, loss, 4000)
        inside += abs(float(est - exact)) <= hw or hw == 0 and est == exact
    assert inside >= 17


def test_consistent_games_basic():
    inst = random_instance(4, 5, 2, n_labels=3, seed=2)
    assert consistent_games(inst, SampleBatch()) == tuple(range(5))
    g0 = 3
    batch = inst.sample_batch(g0, inst.instance_space)
    assert g0 in consistent_games(inst, batch)


def test_consistent_games_enumeration():
    xs = ("a", "b")
    games = [dict(zip(xs, v)) for v in product(range(4), repeat=2)]
    inst = ProblemInstance.from_loss(xs, games, (0,), const_loss(0), label_space=range(4))
    got = consistent_games(inst, SampleBatch([("a", 1)]))
    expected = tuple(i for i, g in enumerate(games) if g["a"] == 1)
    assert got == expected and len(got) == 4


def test_uc_sample_size_examples():
    assert uc_sample_size(0, PacParameters(1, math.exp(-1), alpha1=1)) == 1
    got = uc_sample_size(6, PacParameters("1/5", "1/10"))
    expected = sympy.ceiling(8 * (6 + sympy.log(10)) / sympy.Rational(1, 25))
    assert got == int(expected)


def test_consistent_sample_size_examples():
    assert consistent_sample_size(0, PacParameters("1/2", math.exp(-1), alpha2=1)) == 2
    got = consistent_sample_size(3, PacParameters("1/10", "1/20"))
    expected = sympy.ceiling(40 * (3 * sympy.log(10) + sympy.log(20)))
    assert got == int(expected)


def test_consistent_size_clamps_log():
    p = PacParameters("1/2", "1/10", alpha2=1)
    assert consistent_sample_size(5, p) == math.ceil(2 * (5 + math.log(10)))


def test_consistent_below_uc_on_grid():
    for eps, dl, d in product(["1/20", "1/10", "1/5", "1/3"], ["1/100", "1/20", "1/5"], range(0, 8)):
        p = PacParameters(eps, dl)
        assert consistent_sample_size(d, p) <= uc_sample_size(d, p)


@settings(max_examples=60, deadline=None)
@given(d=st.integers(0, 30), e=st.integers(2, 50), dl=st.integers(2, 50))
def test_sample_sizes_monotone(d, e, dl):
    base = PacParameters(Fraction(1, e), Fraction(1, dl))
    for fn in (uc_sample_size, consistent_sample_size):
        assert fn(2 * d, base) >= fn(d, base)
        assert fn(d + 1, base) >= fn(d, base)
        assert fn(d, PacParameters(Fraction(1, e + 1), Fraction(1, dl))) >= fn(d, base)
        assert fn(d, PacParameters(Fraction(1, e), Fraction(1, dl + 1))) >= fn(d, base)


@pytest.mark.parametrize("eps,delta", [(0, "1/2"), ("3/2", "1/2"), ("1/2", 0), ("1/2", 1), (-1, "1/2")])
def test_invalid_params(eps, delta):
    with pytest.raises(InvalidParams):
        PacParameters(eps, delta)


def test_conjoin_identities():
    l2 = lambda x, g, s: int(x % 2 == 0)
    assert all(conjoin_losses(const_loss(1), const_loss(0))(x, None, (0, 0)) == 0 for x in range(4))
    assert all(conjoin_losses(const_loss(1), l2)(x, None, (0, 0)) == l2(x, None, 0) for x in range(4))


def test_disjoin_identities():
    l1 = lambda x, g, s: int(x > 1)
    assert all(disjoin_losses(l1)(x, None, 0) == l1(x, None, 0) for x in range(4))
    assert disjoin_losses(const_loss(0), const_loss(0))(0, None, 0) == 0
    assert epsilon_split("1/5", 1) == Fraction(1, 5)
    assert epsilon_split("1/5", 4) == Fraction(1, 20)


def test_combinators_truth_tables():
    a = random_instance(4, 3, 3, seed=11)
    b = ProblemInstance(a.instance_space, a.label_space, a.games, (0, 1, 2),
                        random_instance(4, 3, 3, seed=12).loss_table)
    c = conjoin_instances(a, b)
    d = disjoin_instances(a, b)
    for g in range(3):
        for x in a.instance_space:
            for i, (s1, s2) in enumerate(c.solutions):
                assert c.loss(x, g, i) == (a.loss(x, g, s1) and b.loss(x, g, s2))
            for s in range(3):
                assert d.loss(x, g, s) == (a.loss(x, g, s) or b.loss(x, g, s))


def test_union_bound_on_explicit_support():
    for seed in range(10):
        parts = [random_instance(5, 2, 3, seed=100 * seed + j) for j in range(3)]
        parts = [ProblemInstance(parts[0].instance_space, parts[0].label_space, parts[0].games,
                                 parts[0].solutions, p.loss_table) for p in parts]
        union = disjoin_instances(*parts)
        dist = DistributionSpec.weighted(range(5), ["1/10", "1/5", "1/5", "1/4", "1/4"])
        for g in range(2):
            for s in range(3):
                total = exact_statistical_loss(dist, g, s, union.loss)
                assert total <= sum(exact_statistical_loss(dist, g, s, p.loss) for p in parts)


def test_erm_zero_loss_solution():
    xs = (0, 1, 2)
    inst = ProblemInstance.from_table(xs, (0,), [(0, 0, 0), (0, 0, 0)], ("bad", "good"),
                                      [[[1, 0, 1], [0, 0, 0]], [[0, 1, 0], [0, 0, 0]]])
    res = erm_worst_case(inst, inst.sample_batch(0, [0, 1, 2]))
    assert (res.index, res.objective) == (1, 0)


def test_erm_single_consistent_game_is_plain_erm():
    inst = random_instance(5, 4, 6, n_labels=4, seed=5)
    batch = inst.sample_batch(2, [0, 1, 2, 3, 4])
    assert consistent_games(inst, batch) == (2,)
    res = erm_worst_case(inst, batch)
    losses = [empirical_loss(batch, 2, s, inst.loss) for s in range(6)]
    assert res.objective == min(losses) and res.index == losses.index(min(losses))


def test_erm_worst_case_matches_oracle():
    for seed in range(25):
        inst = random_instance(5, 4, 6, seed=seed)
        batch = inst.sample_batch(seed % 4, [seed % 5, (seed + 2) % 5])
        res = erm_worst_case(inst, batch)
        assert (res.objective, res.index) == oracles.minmax(inst, batch)


def test_erm_bayesian_point_mass_and_average():
    inst = random_instance(5, 4, 6, seed=1)
    batch = inst.sample_batch(0, [0, 1])
    res = erm_bayesian(inst, [1, 0, 0, 0], batch)
    losses = [empirical_loss(batch, 0, s, inst.loss) for s in range(6)]
    assert res.objective == min(losses)
    xs = (0, 1)
    two = ProblemInstance.from_table(xs, (0,), [(0, 0), (0, 0)], ("s0", "s1", "s2"),
                                     [[[1, 1], [0, 0], [1, 0]], [[0, 0], [1, 1], [0, 1]]])
    batch = two.sample_batch(0, [0, 1])
    res = erm_bayesian(two, ["1/2", "1/2"], batch)
    assert (res.objective, res.index) == oracles.minavg(two, [Fraction(1, 2)] * 2, batch)


def test_erm_no_consistent_game():
    inst = ProblemInstance.from_table((0,), (0, 1), [(0,), (1,)], ("s",), [[[0]], [[1]]])
    with pytest.raises(NoConsistentGame):
        erm_bayesian(inst, [0, 1], SampleBatch([(0, 0)]))
    with pytest.raises(NoConsistentGame):
        erm_worst_case(inst, SampleBatch([(0, 2)]))
    with pytest.raises(EmptyBatch):
        erm_worst_case(inst, SampleBatch())


def test_instance_validation():
    with pytest.raises(ValueError):
        ProblemInstance.from_table((), (), [], (), [])
    with pytest.raises(ValueError):
        ProblemInstance.from_table((0, 1), (0,), [(0,)], ("s",), [[[0, 0]]])
