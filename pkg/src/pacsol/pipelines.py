"""Ready-made (family, solver, distribution) triples for the validation harness."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from . import condorcet, hedonic, market, tu_core
from .distributions import DistributionSpec
from .montecarlo import ProblemFamily


@dataclass(frozen=True)
class Pipeline:
    family: ProblemFamily
    solver: Callable
    dist: DistributionSpec
    dimension: int


def tu_pipeline(n: int = 6, kind: str = "induced-subgraph", max_weight: int = 3) -> Pipeline:
    """Convex TU games, uniform non-empty coalitions, minimal-subsidy LP solver."""
    params = {"max_weight": max_weight} if kind == "induced-subgraph" else {}

    def draw(rng):
        return tu_core.tu_game_generator(kind, n, seed=rng, **params)

    def solve_core(batch, game):
        return tu_core.solve_core_lp(batch, n)

    family = ProblemFamily(f"tu-core/{kind}/n={n}", draw, lambda g, S: g(S), tu_core.tu_loss)
    return Pipeline(family, solve_core, DistributionSpec.nonempty_subsets(n), n)


def hedonic_pipeline(n: int = 5, kind: str = "friends-appreciation", weak: bool = False) -> Pipeline:
    """Hedonic games, uniform non-empty coalitions, brute-force partition search."""

    def draw(rng):
        return hedonic.hedonic_game_generator(kind, n, seed=rng)

    def solve_partition(batch, game):
        return hedonic.consistent_partition_bruteforce(batch, game, n, weak=weak)

    family = ProblemFamily(f"hedonic/{kind}/n={n}", draw, lambda g, S: g.label(S),
                           lambda S, g, p: hedonic.blocking_loss(S, g, p, weak=weak))
    return Pipeline(family, solve_partition, DistributionSpec.nonempty_subsets(n), n)


def condorcet_pipeline(candidates: int = 20, voters: int = 11) -> Pipeline:
    """Single-peaked profiles on a random axis, uniform candidates, empirical winner.

    The solver only reads the sampled rank vectors. Dimension 1 is the
    transitive case.
    """
    if voters % 2 == 0:
        raise ValueError("use an odd number of voters so the tournament has no ties")
    cands = tuple(range(candidates))

    def draw(rng):
        axis = tuple(int(c) for c in rng.permutation(candidates))
        return condorcet.generate_single_peaked(axis, voters, seed=rng)

    def solve_winner(batch, game):
        return condorcet.winner_from_labels(batch)

    tournament = lru_cache(maxsize=64)(condorcet.build_tournament)

    def loss(c, profile, winner):
        return int(tournament(profile).beats(c, winner))

    family = ProblemFamily(f"condorcet/single-peaked/c={candidates}/v={voters}", draw,
                           lambda p, c: p.ranks(c), loss)
    return Pipeline(family, solve_winner, DistributionSpec.uniform(cands), 1)


def market_pipeline(n: int = 2, k: int = 2, zeta="1/2") -> Pipeline:
    """Random explicit Fisher markets, uniform non-empty bundles, restricted outcome search."""

    def draw(rng):
        return market.random_fisher_instance(n, k, seed=rng)

    def solve_outcome(batch, instance):
        samples = list(dict.fromkeys((S, y) for S, y in batch))
        return market.consistent_outcome_search(instance, samples, zeta,
                                                max_samples=(1 << k) - 1)

    family = ProblemFamily(f"market/random-explicit/n={n}/k={k}", draw,
                           lambda inst, S: inst.label(S), market.ce_loss)
    return Pipeline(family, solve_outcome, DistributionSpec.nonempty_subsets(k), 2 * k)


PIPELINES = {
    "tucore": tu_pipeline,
    "hedonic": hedonic_pipeline,
    "condorcet": condorcet_pipeline,
    "market": market_pipeline,
}
