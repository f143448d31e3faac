"""TU cooperative games and the PAC core.

Players are 0-based; coalitions are frozensets. A coalition S blocks a
payoff x when x(S) < v(S). The consistent solver pays the minimal total
subject to every sampled coalition being unblocked (the minimal subsidy
needed to stabilize the sample).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Mapping

from .distributions import mask_to_set
from .lp import Constraint, LinearProgram, simplex_solve
from .rational import as_fraction
from .rng import as_generator


class TUGame:
    """Characteristic function v over coalitions of ``n`` players.

    ``values`` is either a mapping from frozensets to values (missing
    coalitions are worth 0) or a callable; results are cached.
    """

    def __init__(self, n: int, values: Mapping | Callable[[frozenset], object], name: str = ""):
        if n < 1:
            raise ValueError("a game needs at least one player")
        self.n = n
        self.name = name
        self._fn = values if callable(values) else None
        self._cache: dict[frozenset, Fraction] = {}
        if self._fn is None:
            for S, v in values.items():
                S = frozenset(S)
                if not S <= frozenset(range(n)):
                    raise ValueError(f"coalition {sorted(S)} has unknown players")
                self._cache[S] = as_fraction(v)
            self._cache.setdefault(frozenset(), Fraction(0))
            if self._cache[frozenset()] != 0:
                raise ValueError("v(empty) must be 0")
            if any(v < 0 for v in self._cache.values()):
                raise ValueError("coalition values must be nonnegative")

    @property
    def players(self) -> frozenset:
        return frozenset(range(self.n))

    def __call__(self, coalition: Iterable[int]) -> Fraction:
        S = frozenset(coalition)
        if not S:
            return Fraction(0)
        if S in self._cache:
            return self._cache[S]
        if self._fn is None:
            return Fraction(0)
        v = as_fraction(self._fn(S))
        if v < 0:
            raise ValueError("coalition values must be nonnegative")
        self._cache[S] = v
        return v

    @property
    def grand_value(self) -> Fraction:
        return self(self.players)

    def table(self) -> dict[frozenset, Fraction]:
        return {mask_to_set(m): self(mask_to_set(m)) for m in range(1 << self.n)}

    def __repr__(self):
        return f"TUGame(n={self.n}{', ' + self.name if self.name else ''})"


@dataclass(frozen=True)
class PayoffVector:
    values: tuple

    def __post_init__(self):
        vals = tuple(as_fraction(v) for v in self.values)
        if any(v < 0 for v in vals):
            raise ValueError("payoffs must be nonnegative")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    @property
    def total(self) -> Fraction:
        return sum(self.values, Fraction(0))

    def of(self, coalition: Iterable[int]) -> Fraction:
        """x(S)."""
        return sum((self.values[i] for i in coalition), Fraction(0))


def blocking_loss(coalition, game, payoff) -> int:
    """1 iff x(S) < v(S). ``game`` may be a TUGame or any callable on coalitions."""
    S = frozenset(coalition)
    if not S:
        return 0
    x = payoff if isinstance(payoff, PayoffVector) else PayoffVector(payoff)
    return int(x.of(S) < as_fraction(game(S)))


def tu_loss(x, game, solution) -> int:
    """Blocking loss in the (point, game, solution) calling convention."""
    return blocking_loss(x, game, solution)


def _pairs(batch) -> list[tuple[frozenset, Fraction]]:
    out = []
    for S, v in batch:
        out.append((frozenset(S), as_fraction(v)))
    return out


def solve_core_lp(batch, n: int) -> PayoffVector:
    """Minimal-total payoff with x(S) >= v(S) on every sampled coalition and x >= 0.

    ``batch`` is a SampleBatch or any iterable of (coalition, value) pairs.
    The LP is solved through its dual, max sum v_S y_S s.t. sum_{S ni i} y_S <= 1,
    whose slack basis is feasible from the start; the payoffs are the exact
    dual prices of the player rows.
    """
    strongest: dict[frozenset, Fraction] = {}
    for S, v in _pairs(batch):
        if not S <= frozenset(range(n)):
            raise ValueError(f"coalition {sorted(S)} has players outside 0..{n - 1}")
        if v < 0:
            raise ValueError("coalition values must be nonnegative")
        if S and v > 0 and v > strongest.get(S, Fraction(0)):
            strongest[S] = v
    if not strongest:
        return PayoffVector((0,) * n)
    coalitions = sorted(strongest, key=lambda S: (len(S), sorted(S)))
    rows = [Constraint(tuple(1 if i in S else 0 for S in coalitions), "<=", 1) for i in range(n)]
    dual = LinearProgram(len(coalitions), tuple(rows),
                         tuple(strongest[S] for S in coalitions), sense="max")
    return PayoffVector(simplex_solve(dual).duals)


def rescale_to_efficiency(payoff, grand_value) -> tuple[PayoffVector, bool]:
    """Spread v(N) - x(N) equally over the players.

    Returns ``(payoff, subsidy_required)``. When x(N) already exceeds v(N) the
    sample cannot be stabilized without a subsidy: the payoff is returned
    unchanged with the flag set.
    """
    x = payoff if isinstance(payoff, PayoffVector) else PayoffVector(payoff)
    grand_value = as_fraction(grand_value)
    surplus = grand_value - x.total
    if surplus < 0:
        return x, True
    share = surplus / len(x)
    return PayoffVector(tuple(v + share for v in x)), False


def induced_subgraph_game(n: int, weights: Mapping | None = None, seed=None,
                          max_weight: int = 3) -> TUGame:
    """v(S) = total weight of edges inside S; nonnegative weights give a convex game.

    Pass explicit ``weights`` as {(i, j): w}, or a seed to draw integer
    weights uniformly from 0..max_weight for every pair.
    """
    if weights is None:
        gen = as_generator(seed)
        weights = {pair: int(gen.integers(0, max_weight + 1)) for pair in combinations(range(n), 2)}
    w = {}
    for (i, j), val in weights.items():
        val = as_fraction(val)
        if val < 0:
            raise ValueError("edge weights must be nonnegative")
        w[frozenset((i, j))] = w.get(frozenset((i, j)), Fraction(0)) + val
    edges = [(tuple(e), val) for e, val in w.items() if val]

    def value(S):
        return sum((val for (i, j), val in edges if i in S and j in S), Fraction(0))

    return TUGame(n, value, name="induced-subgraph")


def unanimity_game(n: int, carrier: Iterable[int]) -> TUGame:
    """v(S) = 1 iff the carrier T is inside S."""
    T = frozenset(carrier)
    if not T or not T <= frozenset(range(n)):
        raise ValueError("carrier must be a non-empty set of players")
    return TUGame(n, lambda S: 1 if T <= S else 0, name="unanimity")


def random_supermodular_game(n: int, seed=None, max_dividend: int = 3) -> TUGame:
    """Sum of nonnegative random dividends on pairs and triples (a convex game)."""
    gen = as_generator(seed)
    dividends = []
    for size in (2, 3):
        for T in combinations(range(n), size):
            d = int(gen.integers(0, max_dividend + 1))
            if d:
                dividends.append((frozenset(T), Fraction(d)))

    def value(S):
        return sum((d for T, d in dividends if T <= S), Fraction(0))

    return TUGame(n, value, name="random-supermodular")


def tu_game_generator(kind: str, n: int, seed=None, **params) -> TUGame:
    if kind == "induced-subgraph":
        return induced_subgraph_game(n, seed=seed, **params)
    if kind == "unanimity":
        return unanimity_game(n, params["carrier"])
    if kind == "random-supermodular":
        return random_supermodular_game(n, seed=seed, **params)
    raise ValueError(f"unknown TU game family {kind!r}")
