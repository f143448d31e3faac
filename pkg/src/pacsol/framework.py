"""Statistical solution problems on finite instances.

A problem is the tuple (instance space, label space, games, solutions,
loss). Games label every instance point; the loss is a 0/1 predicate saying
whether a point witnesses a violation of the solution concept for a given
game and solution.

The generic loss functions here take the loss as a callable
``loss(x, game, solution) -> 0 | 1`` so they serve the structured domains
(TU games, hedonic games, markets, tournaments) as well as explicit finite
instances. For a :class:`ProblemInstance`, games and solutions are addressed
by index and ``problem.loss`` is the callable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .distributions import DistributionSpec
from .errors import EmptyBatch, InvalidParams, NoConsistentGame
from .rational import as_fraction, ceil_mp, ln_inverse, mp
from .rng import as_generator

Loss = Callable[[Any, Any, Any], int]

DEFAULT_ALPHA1 = Fraction(8)
DEFAULT_ALPHA2 = Fraction(4)


@dataclass(frozen=True)
class SampleBatch:
    """Labelled points ``((x1, y1), ..., (xm, ym))``; duplicates allowed."""

    points: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((x, y) for x, y in self.points))

    @property
    def m(self) -> int:
        return len(self.points)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def xs(self) -> tuple:
        return tuple(x for x, _ in self.points)

    @classmethod
    def label(cls, xs: Iterable, labeller: Callable[[Any], Any]) -> "SampleBatch":
        return cls(tuple((x, labeller(x)) for x in xs))


@dataclass(frozen=True)
class PacParameters:
    """Accuracy epsilon, confidence delta and the two sample-size constants.

    ``epsilon`` is allowed to reach 1 (the vacuous contract) so that
    degenerate settings can be expressed; ``delta`` must lie strictly in
    (0, 1).
    """

    epsilon: Fraction
    delta: Fraction
    alpha1: Fraction = DEFAULT_ALPHA1
    alpha2: Fraction = DEFAULT_ALPHA2

    def __post_init__(self):
        for name in ("epsilon", "delta", "alpha1", "alpha2"):
            try:
                object.__setattr__(self, name, as_fraction(getattr(self, name)))
            except ValueError as exc:
                raise InvalidParams(f"{name}: {exc}") from None
        if not 0 < self.epsilon <= 1:
            raise InvalidParams(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise InvalidParams(f"delta must lie in (0, 1), got {self.delta}")
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise InvalidParams("alpha1 and alpha2 must be positive")


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """An explicit finite statistical solution problem.

    ``games[g]`` is a tuple of labels aligned with ``instance_space``;
    ``loss_table[g][s]`` is an int bitmask whose bit ``i`` is the loss at
    ``instance_space[i]``. Build instances with :meth:`from_loss` or
    :meth:`from_table`.
    """

    instance_space: tuple
    label_space: tuple
    games: tuple
    solutions: tuple
    loss_table: tuple
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        if not self.instance_space or not self.games or not self.solutions:
            raise ValueError("instance space, games and solutions must be non-empty")
        index = {x: i for i, x in enumerate(self.instance_space)}
        if len(index) != len(self.instance_space):
            raise ValueError("instance points must be distinct")
        labels = set(self.label_space)
        for g in self.games:
            if len(g) != len(self.instance_space):
                raise ValueError("every game must label every instance point")
            if labels and any(y not in labels for y in g):
                raise ValueError("game label outside the label space")
        if len(self.loss_table) != len(self.games) or any(
                len(row) != len(self.solutions) for row in self.loss_table):
            raise ValueError("loss table must be games x solutions")
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_loss(cls, instance_space: Sequence[Hashable], games: Sequence,
                  solutions: Sequence, loss: Loss,
                  label_space: Sequence | None = None) -> "ProblemInstance":
        """Tabulate ``loss(x, game_mapping, s)`` for every triple.

        Each game may be a mapping from points to labels or a sequence of
        labels aligned with ``instance_space``; the loss always receives a
        dict.
        """
        xs = tuple(instance_space)
        rows = []
        for g in games:
            if isinstance(g, Mapping):
                rows.append(tuple(g[x] for x in xs))
            else:
                rows.append(tuple(g))
        if label_space is None:
            seen = {}
            for row in rows:
                for y in row:
                    seen.setdefault(y, None)
            label_space = tuple(seen)
        table = []
        for row in rows:
            gmap = dict(zip(xs, row))
            table.append(tuple(
                sum(1 << i for i, x in enumerate(xs) if loss(x, gmap, s))
                for s in solutions))
        return cls(xs, tuple(label_space), tuple(rows), tuple(solutions), tuple(table))

    @classmethod
    def from_table(cls, instance_space, label_space, games, solutions, table) -> "ProblemInstance":
        """``table[g][s][i]`` in {0, 1} is the loss at point i."""
        masks = tuple(
            tuple(sum(1 << i for i, bit in enumerate(bits) if int(bit)) for bits in row)
            for row in table)
        for row in table:
            for bits in row:
                if len(bits) != len(instance_space) or any(int(b) not in (0, 1) for b in bits):
                    raise ValueError("loss rows must be 0/1 vectors over the instance space")
        return cls(tuple(instance_space), tuple(label_space),
                   tuple(tuple(g) for g in games), tuple(solutions), masks)

    @property
    def n_points(self) -> int:
        return len(self.instance_space)

    def index_of(self, x) -> int:
        return self._index[x]

    def label(self, g: int, x) -> Any:
        return self.games[g][self._index[x]]

    def game_mapping(self, g: int) -> dict:
        return dict(zip(self.instance_space, self.games[g]))

    def loss(self, x, g: int, s: int) -> int:
        """Loss at point ``x`` for game index ``g`` and solution index ``s``."""
        return (self.loss_table[g][s] >> self._index[x]) & 1

    def loss_bits(self, g: int, s: int) -> tuple:
        mask = self.loss_table[g][s]
        return tuple((mask >> i) & 1 for i in range(self.n_points))

    def loss_matrix(self) -> np.ndarray:
        """Dense int array indexed [game, solution, point]."""
        out = np.zeros((len(self.games), len(self.solutions), self.n_points), dtype=np.int64)
        for g, row in enumerate(self.loss_table):
            for s, mask in enumerate(row):
                for i in range(self.n_points):
                    out[g, s, i] = (mask >> i) & 1
        return out

    def sample_batch(self, g: int, xs: Iterable) -> SampleBatch:
        return SampleBatch.label(xs, lambda x: self.label(g, x))

    def to_json(self) -> dict:
        from .serialize import instance_to_json
        return instance_to_json(self)


def empirical_loss(batch: SampleBatch, game, solution, loss: Loss) -> Fraction:
    """Mean loss over the batch, as an exact rational.

    The caller is responsible for ``game`` agreeing with the batch labels.
    """
    if len(batch) == 0:
        raise EmptyBatch("empirical loss of an empty batch is undefined")
    hits = sum(1 for x, _ in batch if loss(x, game, solution))
    return Fraction(hits, len(batch))


def exact_statistical_loss(dist: DistributionSpec, game, solution, loss: Loss) -> Fraction:
    """Sum of weight(x) * loss(x) over the support of ``dist``.

    Raises UnsupportedDistribution if the support is too large to list.
    """
    return sum((w for x, w in dist.support() if loss(x, game, solution)), Fraction(0))


def statistical_loss_estimate(dist: DistributionSpec, game, solution, loss: Loss,
                              holdout_size: int, seed=None) -> tuple[Fraction, float]:
    """Monte-Carlo estimate of the statistical loss on fresh draws.

    Returns the empirical mean (exact rational) and a 95% normal-approximation
    half-width. ``seed`` may be an int or a numpy Generator; ``None`` uses the
    distribution's own seed. The loss is evaluated once per distinct point.
    """
    if holdout_size < 1:
        raise ValueError("holdout_size must be at least 1")
    draws = dist.sample(holdout_size, as_generator(seed, dist.seed))
    counts: dict = {}
    for x in draws:
        counts[x] = counts.get(x, 0) + 1
    hits = sum(c for x, c in counts.items() if loss(x, game, solution))
    estimate = Fraction(hits, holdout_size)
    p = hits / holdout_size
    half_width = 1.96 * (p * (1 - p) / holdout_size) ** 0.5
    return estimate, half_width


def consistent_games(problem: ProblemInstance, batch: SampleBatch) -> tuple[int, ...]:
    """Indices of the games that agree with every labelled point of the batch."""
    wanted = [(problem.index_of(x), y) for x, y in batch]
    return tuple(g for g, labels in enumerate(problem.games)
                 if all(labels[i] == y for i, y in wanted))


def uc_sample_size(d: int, params: PacParameters) -> int:
    """ceil(alpha1 * (d + ln(1/delta)) / epsilon^2), the uniform-convergence size."""
    if d < 0:
        raise InvalidParams("dimension must be nonnegative")
    eps, a1 = params.epsilon, params.alpha1
    return ceil_mp(lambda: mp(a1) * (d + ln_inverse(params.delta)) / mp(eps) ** 2)


def consistent_sample_size(d: int, params: PacParameters) -> int:
    """ceil((alpha2/epsilon) * (d * ln(1/epsilon) + ln(1/delta))).

    ln(1/epsilon) is clamped below at 1, which only matters for
    epsilon >= 1/e.
    """
    if d < 0:
        raise InvalidParams("dimension must be nonnegative")
    eps, a2 = params.epsilon, params.alpha2

    def value():
        import mpmath
        log_eps = mpmath.mpf(1) if eps == 1 else max(mpmath.mpf(1), ln_inverse(eps))
        return mp(a2) / mp(eps) * (d * log_eps + ln_inverse(params.delta))

    return ceil_mp(value)


def conjoin_losses(loss1: Loss, loss2: Loss,
                   split: Callable[[Any], tuple] | None = None) -> Loss:
    """Loss on pair solutions: ``loss1(x, g, s1) and loss2(x, g, s2)``.

    ``split`` maps a composite solution to ``(s1, s2)``; by default the
    composite solution already is the pair.
    """
    def conjunction(x, g, s):
        s1, s2 = split(s) if split is not None else s
        return 1 if loss1(x, g, s1) and loss2(x, g, s2) else 0
    return conjunction


def disjoin_losses(*losses: Loss) -> Loss:
    """Loss that fires when any part fires, all parts reading the same solution."""
    if not losses:
        raise ValueError("need at least one loss")

    def disjunction(x, g, s):
        return 1 if any(part(x, g, s) for part in losses) else 0
    return disjunction


def epsilon_split(epsilon, k: int) -> Fraction:
    """Per-part accuracy budget epsilon/k for a k-way disjunction (union bound)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return as_fraction(epsilon) / k


def conjoin_instances(first: ProblemInstance, second: ProblemInstance) -> ProblemInstance:
    """Separable conjunction of two problems over the same points and games.

    Solutions of the result are pairs ``(s1, s2)`` of solution indices, in
    row-major order.
    """
    if first.instance_space != second.instance_space or first.games != second.games:
        raise ValueError("conjoined problems must share points and games")
    pairs = tuple(product(range(len(first.solutions)), range(len(second.solutions))))
    table = tuple(
        tuple(first.loss_table[g][a] & second.loss_table[g][b] for a, b in pairs)
        for g in range(len(first.games)))
    return ProblemInstance(first.instance_space, first.label_space, first.games, pairs, table)


def disjoin_instances(*parts: ProblemInstance) -> ProblemInstance:
    """Pointwise OR of problems sharing points, games and solutions."""
    head = parts[0]
    for p in parts[1:]:
        if (p.instance_space, p.games, p.solutions) != (head.instance_space, head.games, head.solutions):
            raise ValueError("disjoined problems must share points, games and solutions")
    table = tuple(
        tuple(_or_all(p.loss_table[g][s] for p in parts) for s in range(len(head.solutions)))
        for g in range(len(head.games)))
    return ProblemInstance(head.instance_space, head.label_space, head.games, head.solutions, table)


def _or_all(masks):
    out = 0
    for m in masks:
        out |= m
    return out


@dataclass(frozen=True)
class ErmResult:
    index: int
    solution: Any
    objective: Fraction


def _batch_counts(problem: ProblemInstance, batch: SampleBatch) -> dict[int, int]:
    counts: dict[int, int] = {}
    for x, _ in batch:
        i = problem.index_of(x)
        counts[i] = counts.get(i, 0) + 1
    return counts


def _instance_losses(problem, counts, m, g, s) -> Fraction:
    mask = problem.loss_table[g][s]
    return Fraction(sum(c for i, c in counts.items() if (mask >> i) & 1), m)


def erm_worst_case(problem: ProblemInstance, batch: SampleBatch) -> ErmResult:
    """Solution minimizing the worst empirical loss over the games consistent with the batch.

    Ties go to the earliest solution. Raises NoConsistentGame when no game
    agrees with the batch and EmptyBatch on an empty batch.
    """
    if len(batch) == 0:
        raise EmptyBatch("ERM needs at least one labelled point")
    games = consistent_games(problem, batch)
    if not games:
        raise NoConsistentGame("no game agrees with the batch")
    counts, m = _batch_counts(problem, batch), len(batch)
    best = None
    for s in range(len(problem.solutions)):
        worst = max(_instance_losses(problem, counts, m, g, s) for g in games)
        if best is None or worst < best[1]:
            best = (s, worst)
    return ErmResult(best[0], problem.solutions[best[0]], best[1])


def erm_bayesian(problem: ProblemInstance, prior: Sequence, batch: SampleBatch) -> ErmResult:
    """Solution minimizing the prior-weighted empirical loss, conditioned on the batch.

    ``prior`` holds one nonnegative rational weight per game, summing to 1.
    """
    weights = [as_fraction(w) for w in prior]
    if len(weights) != len(problem.games):
        raise ValueError("prior needs one weight per game")
    if any(w < 0 for w in weights) or sum(weights, Fraction(0)) != 1:
        raise ValueError("prior weights must be nonnegative and sum to 1")
    if len(batch) == 0:
        raise EmptyBatch("ERM needs at least one labelled point")
    games = [g for g in consistent_games(problem, batch) if weights[g] > 0]
    mass = sum((weights[g] for g in games), Fraction(0))
    if mass == 0:
        raise NoConsistentGame("the prior puts no mass on games consistent with the batch")
    counts, m = _batch_counts(problem, batch), len(batch)
    best = None
    for s in range(len(problem.solutions)):
        avg = sum((weights[g] / mass * _instance_losses(problem, counts, m, g, s) for g in games),
                  Fraction(0))
        if best is None or avg < best[1]:
            best = (s, avg)
    return ErmResult(best[0], problem.solutions[best[0]], best[1])


def random_instance(n_points: int, n_games: int, n_solutions: int, n_labels: int = 2,
                    seed: int = 0, density: float = 0.5) -> ProblemInstance:
    """Random explicit instance: uniform labels, Bernoulli(density) loss bits."""
    gen = as_generator(seed)
    xs = tuple(range(n_points))
    games = [tuple(int(v) for v in gen.integers(0, n_labels, size=n_points)) for _ in range(n_games)]
    bits = gen.random((n_games, n_solutions, n_points)) < density
    table = [[[int(b) for b in bits[g, s]] for s in range(n_solutions)] for g in range(n_games)]
    return ProblemInstance.from_table(xs, tuple(range(n_labels)), games,
                                      tuple(range(n_solutions)), table)
