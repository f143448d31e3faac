"""Fisher markets with indivisible goods and a search for outcomes consistent with sampled bundles.

Goods are 0-based indices and bundles are frozensets of goods. A sample is a
bundle with the value every player assigns to it. The search only assigns
the empty bundle or sampled bundles, perturbs budgets by at most ``zeta`` and
prices goods through an exact LP per assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .distributions import mask_to_set
from .errors import Infeasible, NotFound
from .framework import ProblemInstance
from .lp import Constraint, LinearProgram, simplex_solve
from .rational import as_fraction
from .rng import as_generator

EMPTY = frozenset()
DEFAULT_MAX_PLAYERS = 4
DEFAULT_MAX_SAMPLES = 4


class FisherInstance:
    """Players 0..n-1 with valuations over bundles of goods 0..k-1 and budgets.

    ``valuations`` is either a callable ``v(i, bundle)`` or a mapping
    ``{(i, bundle): value}``; bundles missing from a mapping are worth 0.
    """

    def __init__(self, n: int, k: int, valuations, budgets: Sequence, name: str = ""):
        if n < 1 or k < 1:
            raise ValueError("a market needs at least one player and one good")
        budgets = tuple(as_fraction(b) for b in budgets)
        if len(budgets) != n:
            raise ValueError("one budget per player")
        if any(b < 0 for b in budgets):
            raise ValueError("budgets must be nonnegative")
        self.n, self.k, self.budgets, self.name = n, k, budgets, name
        self._fn = valuations if callable(valuations) else None
        self._cache: dict = {}
        if self._fn is None:
            for (i, S), v in valuations.items():
                self._cache[(i, frozenset(S))] = as_fraction(v)

    def value(self, i: int, bundle) -> Fraction:
        S = frozenset(bundle)
        if not S:
            return Fraction(0)
        key = (i, S)
        if key not in self._cache:
            if self._fn is None:
                return Fraction(0)
            v = as_fraction(self._fn(i, S))
            if v < 0:
                raise ValueError("valuations must be nonnegative")
            self._cache[key] = v
        return self._cache[key]

    def label(self, bundle) -> tuple:
        """(v_i(S) for every player), the observation for a sampled bundle."""
        return tuple(self.value(i, bundle) for i in range(self.n))

    def bundles(self) -> list[frozenset]:
        """Non-empty bundles in increasing bitmask order."""
        return [mask_to_set(m) for m in range(1, 1 << self.k)]

    def __repr__(self):
        return f"FisherInstance(n={self.n}, k={self.k}, budgets={self.budgets})"


class MarketSample(NamedTuple):
    bundle: frozenset
    values: tuple


@dataclass(frozen=True)
class MarketOutcome:
    assignment: tuple
    prices: tuple
    perturbed_budgets: tuple
    zeta: Fraction
    price_slack: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(frozenset(b) for b in self.assignment))
        object.__setattr__(self, "prices", tuple(as_fraction(p) for p in self.prices))
        object.__setattr__(self, "perturbed_budgets",
                           tuple(as_fraction(b) for b in self.perturbed_budgets))
        object.__setattr__(self, "zeta", as_fraction(self.zeta))
        object.__setattr__(self, "price_slack", as_fraction(self.price_slack))

    @property
    def k(self) -> int:
        return len(self.prices)

    @property
    def excess_sq(self) -> Fraction:
        return excess_allocation_sq(self.assignment, self.k)

    @property
    def excess_compliant(self) -> bool:
        """||sum pi(i) - 1||_2 <= k/2, compared in squares."""
        return self.excess_sq <= Fraction(self.k * self.k, 4)

    def price_of(self, bundle) -> Fraction:
        return sum((self.prices[g] for g in bundle), Fraction(0))


def _sample(item) -> MarketSample:
    S, values = item
    return MarketSample(frozenset(S), tuple(as_fraction(v) for v in values))


def affordability(bundle, prices: Sequence, budget) -> bool:
    """True iff the bundle's total price is at most the budget."""
    total = sum((as_fraction(prices[g]) for g in bundle), Fraction(0))
    return total <= as_fraction(budget)


def _player_value(instance, i, bundle) -> Fraction:
    if isinstance(instance, FisherInstance):
        return instance.value(i, bundle)
    return as_fraction(instance(i, frozenset(bundle)))


def ce_player_loss(bundle, instance, outcome: MarketOutcome, i: int) -> int:
    """1 iff player i can afford the bundle and strictly prefers it to pi(i)."""
    S = frozenset(bundle)
    if not affordability(S, outcome.prices, outcome.perturbed_budgets[i]):
        return 0
    return int(_player_value(instance, i, S) > _player_value(instance, i, outcome.assignment[i]))


def ce_player_losses(bundle, instance, outcome: MarketOutcome) -> tuple:
    return tuple(ce_player_loss(bundle, instance, outcome, i)
                 for i in range(len(outcome.assignment)))


def ce_loss(bundle, instance, outcome: MarketOutcome) -> int:
    """1 iff some player both affords and strictly prefers the bundle."""
    return int(any(ce_player_losses(bundle, instance, outcome)))


def excess_allocation_sq(assignment: Sequence, k: int) -> Fraction:
    """||sum_i pi(i) - 1||_2^2 with bundles as 0/1 vectors over k goods."""
    counts = [0] * k
    for bundle in assignment:
        for g in bundle:
            counts[g] += 1
    return Fraction(sum((c - 1) ** 2 for c in counts))


def _values_of(samples: Sequence[MarketSample]) -> dict:
    table = {EMPTY: None}
    for s in samples:
        prev = table.get(s.bundle)
        if prev is not None and prev != s.values:
            raise ValueError(f"bundle {sorted(s.bundle)} sampled with conflicting values")
        table[s.bundle] = s.values
    return table


def empirical_player_losses(batch, outcome: MarketOutcome) -> tuple:
    """Per-player empirical loss on the batch, using only sampled values."""
    samples = [_sample(item) for item in batch]
    if not samples:
        return tuple(Fraction(0) for _ in outcome.assignment)
    table = _values_of(samples)

    def held(i):
        b = outcome.assignment[i]
        if not b:
            return Fraction(0)
        if b not in table:
            raise ValueError("assigned bundle is not among the samples")
        return table[b][i]

    out = []
    for i in range(len(outcome.assignment)):
        mine = held(i)
        hits = sum(1 for s in samples
                   if affordability(s.bundle, outcome.prices, outcome.perturbed_budgets[i])
                   and s.values[i] > mine)
        out.append(Fraction(hits, len(samples)))
    return tuple(out)


def empirical_ce_loss(batch, outcome: MarketOutcome) -> Fraction:
    """Aggregate (any-player) empirical loss on the batch, using only sampled values."""
    samples = [_sample(item) for item in batch]
    if not samples:
        return Fraction(0)
    table = _values_of(samples)
    held = [Fraction(0) if not b else table[b][i] for i, b in enumerate(outcome.assignment)]
    hits = 0
    for s in samples:
        if any(affordability(s.bundle, outcome.prices, outcome.perturbed_budgets[i])
               and s.values[i] > held[i] for i in range(len(held))):
            hits += 1
    return Fraction(hits, len(samples))


def _assignment_lp(options, assignment, samples, budgets, zeta, slack, goods):
    """LP over (prices of observed goods, perturbed budgets); minimize total price."""
    n = len(budgets)
    col = {g: c for c, g in enumerate(goods)}
    width = len(goods) + n

    def row(bundle=EMPTY, player=None, sign=-1):
        coeffs = [0] * width
        for g in bundle:
            coeffs[col[g]] = 1
        if player is not None:
            coeffs[len(goods) + player] = sign
        return tuple(coeffs)

    cons = []
    for i, beta in enumerate(budgets):
        unit = row(player=i, sign=1)
        cons.append(Constraint(unit, "<=", beta + zeta))
        cons.append(Constraint(unit, ">=", max(Fraction(0), beta - zeta)))
    for i, opt in enumerate(assignment):
        held_bundle, held_values = options[opt]
        held = held_values[i] if held_values is not None else Fraction(0)
        if held_bundle:
            cons.append(Constraint(row(held_bundle, i), "<=", 0))
        for s in samples:
            if s.values[i] > held:
                cons.append(Constraint(row(s.bundle, i), ">=", slack))
    objective = tuple([1] * len(goods) + [0] * n)
    return LinearProgram(width, tuple(cons), objective, sense="min")


def _closest_budgets(lp: LinearProgram, total_price, budgets, n_goods) -> tuple:
    """Perturbed budgets nearest to the true ones (L1) among the cheapest price vectors."""
    n = len(budgets)
    width = lp.variables + n
    pad = (0,) * n
    cons = [Constraint(c.coeffs + pad, c.relation, c.rhs) for c in lp.constraints]
    cons.append(Constraint(lp.objective + pad, "<=", total_price))
    for i, beta in enumerate(budgets):
        # d_i >= |beta*_i - beta_i|
        up = [0] * width
        up[n_goods + i], up[lp.variables + i] = 1, -1
        cons.append(Constraint(tuple(up), "<=", beta))
        down = [0] * width
        down[n_goods + i], down[lp.variables + i] = -1, -1
        cons.append(Constraint(tuple(down), "<=", -beta))
    objective = tuple([0] * lp.variables + [1] * n)
    sol = simplex_solve(LinearProgram(width, tuple(cons), objective, sense="min"))
    return sol.x[n_goods:lp.variables]


def _fix_budgets(lp: LinearProgram, beta_star, n_goods) -> LinearProgram:
    cons = list(lp.constraints)
    for i, b in enumerate(beta_star):
        unit = [0] * lp.variables
        unit[n_goods + i] = 1
        cons.append(Constraint(tuple(unit), "=", b))
    return LinearProgram(lp.variables, tuple(cons), lp.objective, sense="min")


def ordered_assignments(n: int, options: Sequence, k: int) -> list[tuple]:
    """Option-index tuples sorted by (excess_sq, lexicographic order)."""
    bundles = [b for b, _ in options]
    every = list(product(range(len(options)), repeat=n))
    return sorted(every, key=lambda a: (excess_allocation_sq([bundles[o] for o in a], k), a))


def search_options(batch) -> list[tuple]:
    """(bundle, values) choices per player: the empty bundle, then distinct sampled bundles."""
    samples = [_sample(item) for item in batch]
    table = _values_of(samples)
    options = [(EMPTY, None)]
    for b in dict.fromkeys(s.bundle for s in samples):
        if b:
            options.append((b, table[b]))
    return options


def consistent_outcome_search(instance: FisherInstance, batch, zeta, price_slack=None,
                              max_players: int = DEFAULT_MAX_PLAYERS,
                              max_samples: int = DEFAULT_MAX_SAMPLES) -> MarketOutcome:
    """Outcome with zero CE loss on every sampled bundle, assigning only sampled bundles.

    Assignments are tried in order of increasing excess allocation, then
    lexicographically; the first with feasible prices and budgets wins. Its
    prices minimize the total price of observed goods, and among those the
    perturbed budgets stay as close to the true budgets as possible.
    Strict preferences are enforced with ``price_slack`` (default: max budget
    / 1000, or 1/1000 if all budgets are 0). Goods that no sample mentions are
    priced above the total perturbed budget, except for an empty batch, which
    gets zero prices. Raises NotFound otherwise.
    """
    zeta = as_fraction(zeta)
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    if price_slack is None:
        top = max(instance.budgets)
        price_slack = top / 1000 if top > 0 else Fraction(1, 1000)
    slack = as_fraction(price_slack)
    if slack <= 0:
        raise ValueError("price_slack must be positive")
    samples = [_sample(item) for item in batch]
    if instance.n > max_players:
        raise ValueError(f"search is capped at {max_players} players")
    for s in samples:
        if len(s.values) != instance.n:
            raise ValueError("each sample needs one value per player")
        if not s.bundle <= frozenset(range(instance.k)):
            raise ValueError(f"bundle {sorted(s.bundle)} has unknown goods")
    options = search_options(samples)
    if len(options) - 1 > max_samples:
        raise ValueError(f"search is capped at {max_samples} distinct sampled bundles")
    unique = list(dict.fromkeys(samples))
    goods = sorted(set().union(*(s.bundle for s in samples)) if samples else set())

    for assignment in ordered_assignments(instance.n, options, instance.k):
        lp = _assignment_lp(options, assignment, unique, instance.budgets, zeta, slack, goods)
        try:
            sol = simplex_solve(lp)
        except Infeasible:
            continue
        beta_star = _closest_budgets(lp, sol.objective, instance.budgets, len(goods))
        if not samples:
            # nothing observed: no price is needed to keep any sample stable
            return MarketOutcome(tuple(EMPTY for _ in range(instance.n)), (Fraction(0),) * instance.k,
                                 tuple(beta_star), zeta, slack)
        sol = simplex_solve(_fix_budgets(lp, beta_star, len(goods)))
        prices = [Fraction(0)] * instance.k
        for c, g in enumerate(goods):
            prices[g] = sol.x[c]
        unseen_price = sum(beta_star, Fraction(0)) + 1
        for g in range(instance.k):
            if g not in goods:
                prices[g] = unseen_price
        return MarketOutcome(tuple(options[o][0] for o in assignment), tuple(prices),
                             tuple(beta_star), zeta, slack)
    raise NotFound("no assignment of sampled bundles admits consistent prices and budgets")


def validate_outcome(instance: FisherInstance, batch, outcome: MarketOutcome) -> list[str]:
    """Problems with an outcome; empty when every invariant holds."""
    issues = []
    samples = [_sample(item) for item in batch]
    for i, (b, bs) in enumerate(zip(instance.budgets, outcome.perturbed_budgets)):
        if bs < 0:
            issues.append(f"perturbed budget {i} is negative")
        if abs(bs - b) > outcome.zeta:
            issues.append(f"budget {i} moved by more than zeta")
        if not affordability(outcome.assignment[i], outcome.prices, bs):
            issues.append(f"player {i} cannot afford their bundle")
    if any(p < 0 for p in outcome.prices):
        issues.append("negative price")
    if samples and empirical_ce_loss(samples, outcome) != 0:
        issues.append("some sampled bundle is affordable and preferred")
    return issues


def random_fisher_instance(n: int, k: int, seed=None, max_value: int = 9,
                           max_budget: int = 10) -> FisherInstance:
    """Explicit random valuations on every non-empty bundle and integer budgets in 1..max_budget."""
    gen = as_generator(seed)
    table = {}
    for m in range(1, 1 << k):
        S = mask_to_set(m)
        for i in range(n):
            table[(i, S)] = int(gen.integers(0, max_value + 1))
    budgets = [int(gen.integers(1, max_budget + 1)) for _ in range(n)]
    return FisherInstance(n, k, table, budgets, name="random-explicit")


def additive_fisher_instance(n: int, k: int, seed=None, max_value: int = 5,
                             max_budget: int = 10) -> FisherInstance:
    """Additive valuations: v_i(S) = sum of per-good values."""
    gen = as_generator(seed)
    per_good = [[int(gen.integers(0, max_value + 1)) for _ in range(k)] for _ in range(n)]
    budgets = [int(gen.integers(1, max_budget + 1)) for _ in range(n)]
    return FisherInstance(n, k, lambda i, S: sum(per_good[i][g] for g in S), budgets,
                          name="additive")


def sample_market_batch(instance: FisherInstance, bundles: Iterable) -> list[MarketSample]:
    return [MarketSample(frozenset(b), instance.label(b)) for b in bundles]


def ce_instance(k: int, valuations: Sequence[Callable | Mapping], budget,
                price_grid: Sequence, budget_grid: Sequence | None = None) -> ProblemInstance:
    """Explicit single-player CE problem for dimension checks.

    Points are the non-empty bundles, games are the given valuation
    functions, and solutions are (assigned bundle, prices, perturbed budget)
    with prices drawn from ``price_grid`` per good and budgets from
    ``budget_grid`` (default: the budget alone).
    """
    bundles = [mask_to_set(m) for m in range(1, 1 << k)]
    budget_grid = [as_fraction(budget)] if budget_grid is None else [as_fraction(b) for b in budget_grid]
    markets = [FisherInstance(1, k, v if callable(v) else dict(v), [budget]) for v in valuations]
    solutions = []
    for held in [EMPTY] + bundles:
        for prices in product([as_fraction(p) for p in price_grid], repeat=k):
            for b in budget_grid:
                solutions.append(MarketOutcome((held,), prices, (b,), Fraction(0)))
    rows = [tuple(m.value(0, S) for S in bundles) for m in markets]
    labels = tuple(dict.fromkeys(y for r in rows for y in r))
    table = [[[ce_loss(S, m, o) for S in bundles] for o in solutions] for m in markets]
    return ProblemInstance.from_table(bundles, labels, rows, solutions, table)
