"""Preference profiles, majority tournaments and empirical Condorcet winners."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Hashable, Iterable, Sequence

import networkx as nx

from .errors import InvalidParams, NoEmpiricalWinner, TiesPresent
from .framework import ProblemInstance
from .rational import as_fraction, ceil_mp, ln_inverse, mp
from .rng import as_generator


@dataclass(frozen=True)
class PreferenceProfile:
    """One strict ranking (best first) per voter over the same candidates."""

    candidates: tuple
    orders: tuple

    def __post_init__(self):
        cands = tuple(self.candidates)
        orders = tuple(tuple(o) for o in self.orders)
        if not orders:
            raise ValueError("a profile needs at least one voter")
        if len(set(cands)) != len(cands):
            raise ValueError("candidates must be distinct")
        for o in orders:
            if len(o) != len(cands) or set(o) != set(cands):
                raise ValueError(f"order {o} is not a permutation of the candidates")
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "orders", orders)

    @classmethod
    def from_orders(cls, orders: Sequence[Sequence[Hashable]]) -> "PreferenceProfile":
        orders = [tuple(o) for o in orders]
        if not orders:
            raise ValueError("a profile needs at least one voter")
        try:
            cands = tuple(sorted(orders[0]))
        except TypeError:
            cands = orders[0]
        return cls(cands, orders)

    @property
    def n_voters(self) -> int:
        return len(self.orders)

    def ranks(self, candidate) -> tuple:
        """Position of ``candidate`` in every voter's order (0 = top)."""
        return tuple(o.index(candidate) for o in self.orders)

    def prefers_count(self, a, b) -> int:
        return sum(1 for o in self.orders if o.index(a) < o.index(b))


@dataclass(frozen=True)
class TournamentGraph:
    candidates: tuple
    edges: frozenset  # (a, b) means a beats b

    def beats(self, a, b) -> bool:
        return (a, b) in self.edges

    def has_ties(self) -> bool:
        return any(not self.beats(a, b) and not self.beats(b, a)
                   for a, b in combinations(self.candidates, 2))

    def adjacency(self) -> dict:
        return {c: [d for d in self.candidates if self.beats(c, d)] for c in self.candidates}

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.candidates)
        g.add_edges_from(sorted(self.edges, key=repr))
        return g


def build_tournament(profile: PreferenceProfile) -> TournamentGraph:
    """a -> b iff strictly more than half of the voters rank a above b."""
    n = profile.n_voters
    positions = [{c: r for r, c in enumerate(o)} for o in profile.orders]
    edges = set()
    for a, b in permutations(profile.candidates, 2):
        above = sum(1 for pos in positions if pos[a] < pos[b])
        if 2 * above > n:
            edges.add((a, b))
    return TournamentGraph(profile.candidates, frozenset(edges))


def _tournament(t) -> TournamentGraph:
    return t if isinstance(t, TournamentGraph) else build_tournament(t)


def condorcet_winner(t, candidates: Iterable | None = None):
    """The candidate of ``candidates`` beating all the others, or None."""
    t = _tournament(t)
    pool = list(dict.fromkeys(t.candidates if candidates is None else candidates))
    for c in pool:
        if all(t.beats(c, d) for d in pool if d != c):
            return c
    return None


def empirical_condorcet_winner(profile, sample: Iterable):
    """The sampled candidate beating every other sampled candidate.

    ``profile`` may be a PreferenceProfile or a TournamentGraph; duplicates
    in the sample are ignored. Raises NoEmpiricalWinner when no such
    candidate exists.
    """
    t = _tournament(profile)
    pool = list(dict.fromkeys(sample))
    if not pool:
        raise ValueError("the sample must contain at least one candidate")
    for c in pool:
        if c not in t.candidates:
            raise ValueError(f"unknown candidate {c!r}")
    winner = condorcet_winner(t, pool)
    if winner is None:
        raise NoEmpiricalWinner("no sampled candidate beats all other sampled candidates")
    return winner


def winner_from_labels(batch):
    """Empirical winner computed from sampled rank vectors alone.

    Each batch item is (candidate, ranks) with ranks[v] the position voter v
    gives the candidate. Raises NoEmpiricalWinner like the profile version.
    """
    ranks = dict(batch)
    if not ranks:
        raise ValueError("the sample must contain at least one candidate")
    pool = list(ranks)

    def beats(a, b):
        ahead = sum(1 for ra, rb in zip(ranks[a], ranks[b]) if ra < rb)
        return 2 * ahead > len(ranks[a])

    for c in pool:
        if all(beats(c, d) for d in pool if d != c):
            return c
    raise NoEmpiricalWinner("no sampled candidate beats all other sampled candidates")


def _require_tie_free(t: TournamentGraph) -> None:
    if t.has_ties():
        raise TiesPresent("tournament has tied pairs")


def is_transitive(t) -> bool:
    t = _tournament(t)
    _require_tie_free(t)
    for a, b, c in permutations(t.candidates, 3):
        if t.beats(a, b) and t.beats(b, c) and not t.beats(a, c):
            return False
    return True


def pair_on_three_cycle(t: TournamentGraph, a, b) -> bool:
    """The edge between a and b lies on a directed 3-cycle."""
    if t.beats(b, a):
        a, b = b, a
    if not t.beats(a, b):
        return False
    return any(t.beats(b, c) and t.beats(c, a) for c in t.candidates if c not in (a, b))


def three_cycle_core_size(t) -> int:
    """Largest K (|K| >= 2) whose every pair lies on some 3-cycle; 0 if none."""
    t = _tournament(t)
    _require_tie_free(t)
    g = nx.Graph()
    g.add_nodes_from(range(len(t.candidates)))
    for (i, a), (j, b) in combinations(enumerate(t.candidates), 2):
        if pair_on_three_cycle(t, a, b):
            g.add_edge(i, j)
    if g.number_of_edges() == 0:
        return 0
    best = max(len(c) for c in nx.find_cliques(g))
    return best if best >= 2 else 0


def condorcet_sample_size(epsilon, delta) -> int:
    """ceil((1/eps) * ln(1/delta))."""
    eps, dl = as_fraction(epsilon), as_fraction(delta)
    if not 0 < eps <= 1:
        raise InvalidParams("epsilon must lie in (0, 1]")
    if not 0 < dl < 1:
        raise InvalidParams("delta must lie in (0, 1)")
    return ceil_mp(lambda: ln_inverse(dl) / mp(eps))


def condorcet_loss(c, profile, winner) -> int:
    """1 iff candidate c beats the proposed winner."""
    return int(_tournament(profile).beats(c, winner))


def condorcet_instance(candidates: Sequence, profiles: Sequence[PreferenceProfile]) -> ProblemInstance:
    """Points = candidates, games = profiles (label = rank vector), solutions = candidates."""
    candidates = tuple(candidates)
    tournaments = [build_tournament(p) for p in profiles]
    rows = [tuple(p.ranks(c) for c in candidates) for p in profiles]
    labels = tuple(dict.fromkeys(y for r in rows for y in r))
    table = [[[int(t.beats(c, s)) for c in candidates] for s in candidates] for t in tournaments]
    return ProblemInstance.from_table(candidates, labels, rows, candidates, table)


def generate_single_peaked(axis: Sequence, n: int, seed=None) -> PreferenceProfile:
    """Each voter draws a peak on the axis and ranks candidates by distance to it.

    Equidistant candidates are ordered toward the left end of the axis.
    """
    axis = tuple(axis)
    gen = as_generator(seed)
    peaks = gen.integers(0, len(axis), size=n)
    orders = []
    for peak in peaks:
        peak = int(peak)
        idx = sorted(range(len(axis)), key=lambda j: (abs(j - peak), j))
        orders.append(tuple(axis[j] for j in idx))
    return PreferenceProfile(axis, tuple(orders))


def generate_single_crossing(n: int, seed=None, candidate_params: Sequence | None = None,
                             n_candidates: int = 4) -> PreferenceProfile:
    """Voter with type t scores candidate c as a_c + t * b_c and ranks by score.

    ``candidate_params`` is a sequence of (a_c, b_c); without it, integer
    parameters are drawn from the seed. Types t are rationals in [0, 1).
    Equal scores rank the lower index first.
    """
    gen = as_generator(seed)
    if candidate_params is None:
        candidate_params = [(int(gen.integers(-5, 6)), int(gen.integers(-5, 6)))
                            for _ in range(n_candidates)]
    params = [(as_fraction(a), as_fraction(b)) for a, b in candidate_params]
    cands = tuple(range(len(params)))
    types = sorted(Fraction(int(v), 1 << 20) for v in gen.integers(0, 1 << 20, size=n))
    orders = []
    for t in types:
        scores = [a + t * b for a, b in params]
        orders.append(tuple(sorted(cands, key=lambda c: (-scores[c], c))))
    return PreferenceProfile(cands, tuple(orders))


CYCLE_PROFILE = PreferenceProfile(("a", "b", "c"),
                                  (("a", "b", "c"), ("b", "c", "a"), ("c", "a", "b")))
