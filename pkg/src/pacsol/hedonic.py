"""Hedonic games, coalition blocking, and a brute-force consistent partition solver.

Players are 0-based. A sample is a coalition together with the values its
members assign to it, ``(S, (v_i(S) for i in sorted(S)))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .distributions import mask_to_set
from .errors import NoConsistentPartition
from .framework import ProblemInstance, SampleBatch
from .rational import as_fraction
from .rng import as_generator

DEFAULT_MAX_PLAYERS = 10


class HedonicGame:
    """Cardinal valuations v_i(S), defined for coalitions S containing i.

    ``valuations`` is a mapping ``{(i, S): value}`` (explicit; must cover
    every coalition containing i) or a callable ``f(i, S)``.
    """

    def __init__(self, n: int, valuations, name: str = ""):
        if n < 1:
            raise ValueError("a game needs at least one player")
        self.n = n
        self.name = name
        self._fn = valuations if callable(valuations) else None
        self._cache: dict = {}
        if self._fn is None:
            for (i, S), v in valuations.items():
                S = frozenset(S)
                if i not in S:
                    raise ValueError(f"player {i} valued a coalition without them")
                self._cache[(i, S)] = as_fraction(v)
            for m in range(1, 1 << n):
                S = mask_to_set(m)
                for i in S:
                    if (i, S) not in self._cache:
                        raise ValueError(f"missing v_{i}({sorted(S)})")

    def value(self, i: int, coalition) -> Fraction:
        S = frozenset(coalition)
        if i not in S:
            raise ValueError(f"v_{i} is only defined on coalitions containing {i}")
        key = (i, S)
        if key not in self._cache:
            self._cache[key] = as_fraction(self._fn(i, S))
        return self._cache[key]

    def __call__(self, i, coalition):
        return self.value(i, coalition)

    def label(self, coalition) -> tuple:
        """(v_i(S) for i in sorted(S)), the observation for a sampled coalition."""
        S = frozenset(coalition)
        return tuple(self.value(i, S) for i in sorted(S))

    def __repr__(self):
        return f"HedonicGame(n={self.n}{', ' + self.name if self.name else ''})"


@dataclass(frozen=True)
class Partition:
    """Coalition structure: disjoint non-empty blocks covering 0..n-1."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted((frozenset(b) for b in self.blocks), key=lambda b: min(b) if b else -1))
        seen = set()
        for b in blocks:
            if not b:
                raise ValueError("blocks must be non-empty")
            if seen & b:
                raise ValueError("blocks must be disjoint")
            seen |= b
        if seen != set(range(len(seen))):
            raise ValueError("blocks must cover players 0..n-1")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "_owner", {i: b for b in blocks for i in b})

    @property
    def n(self) -> int:
        return len(self._owner)

    def block_of(self, i: int) -> frozenset:
        """pi(i)."""
        return self._owner[i]

    @classmethod
    def from_rgs(cls, rgs: Sequence[int]) -> "Partition":
        groups: dict[int, list] = {}
        for i, label in enumerate(rgs):
            groups.setdefault(label, []).append(i)
        return cls(tuple(frozenset(g) for g in groups.values()))

    def to_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.blocks]

    def __repr__(self):
        return "Partition(" + " | ".join(",".join(map(str, sorted(b))) for b in self.blocks) + ")"


class HedonicSample(NamedTuple):
    coalition: frozenset
    values: tuple


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """All RGS of length n in lexicographic order: a[0] = 0, a[i] <= 1 + max(a[:i]).

    The first string is all zeros (the grand coalition), the last is 0..n-1
    (all singletons).
    """
    if n == 0:
        yield ()
        return
    a = [0] * n
    m = [0] * n  # m[i] = max(a[:i + 1])
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] > m[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        m[i] = max(m[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            m[j] = m[i]


def set_partitions(n: int) -> Iterator[Partition]:
    for rgs in restricted_growth_strings(n):
        yield Partition.from_rgs(rgs)


def _as_sample(item) -> HedonicSample:
    S, values = item
    S = frozenset(S)
    values = tuple(as_fraction(v) for v in values)
    if len(values) != len(S):
        raise ValueError("a hedonic sample needs one value per member")
    return HedonicSample(S, values)


def _value_fn(game) -> Callable[[int, frozenset], Fraction]:
    if isinstance(game, HedonicGame):
        return game.value
    return lambda i, S: as_fraction(game(i, S))


def blocking_loss(coalition, game, partition: Partition, weak: bool = False) -> int:
    """1 iff every member of S strictly prefers S to their own block.

    With ``weak=True`` the comparison is v_i(S) >= v_i(pi(i)).
    """
    S = frozenset(coalition)
    if not S:
        return 0
    value = _value_fn(game)
    for i in S:
        here, there = value(i, S), value(i, partition.block_of(i))
        if not (here >= there if weak else here > there):
            return 0
    return 1


def hedonic_loss(x, game, partition, weak: bool = False) -> int:
    return blocking_loss(x, game, partition, weak=weak)


def _sample_blocks(sample: HedonicSample, value, partition: Partition, weak: bool) -> bool:
    for i, vs in zip(sorted(sample.coalition), sample.values):
        there = value(i, partition.block_of(i))
        if not (vs >= there if weak else vs > there):
            return False
    return True


def consistent_partition_bruteforce(batch, game_oracle, n: int, weak: bool = False,
                                    max_players: int = DEFAULT_MAX_PLAYERS) -> Partition:
    """First partition (RGS order) that no sampled coalition blocks.

    Sampled coalitions are judged with their observed values; the oracle is
    queried for the values players assign to their own blocks. Raises
    NoConsistentPartition when every partition is blocked.
    """
    if n > max_players:
        raise ValueError(f"brute force is capped at {max_players} players")
    samples = [_as_sample(item) for item in batch]
    for s in samples:
        if not s.coalition or not s.coalition <= frozenset(range(n)):
            raise ValueError(f"bad sampled coalition {sorted(s.coalition)}")
    # one representative per distinct (coalition, values)
    samples = list(dict.fromkeys(samples))
    value = _value_fn(game_oracle)
    cache: dict = {}

    def cached(i, S):
        key = (i, S)
        if key not in cache:
            cache[key] = value(i, S)
        return cache[key]

    for partition in set_partitions(n):
        if not any(_sample_blocks(s, cached, partition, weak) for s in samples):
            return partition
    raise NoConsistentPartition("every partition is blocked by a sampled coalition")


def worst_case_consistency_check(batch, game_class: Iterable, partition: Partition,
                                 weak: bool = False) -> bool:
    """True iff no sampled coalition blocks the partition under any game agreeing with the batch.

    Games in ``game_class`` that disagree with the batch labels are ignored.
    """
    samples = [_as_sample(item) for item in batch]
    for game in game_class:
        value = _value_fn(game)
        if any(tuple(value(i, s.coalition) for i in sorted(s.coalition)) != s.values
               for s in samples):
            continue
        if any(blocking_loss(s.coalition, game, partition, weak) for s in samples):
            return False
    return True


def additively_separable_game(n: int, weights: Mapping | Sequence | None = None, seed=None,
                              low: int = -3, high: int = 3) -> HedonicGame:
    """v_i(S) = sum of w_ij over j in S other than i.

    ``weights`` may be a matrix or a mapping {(i, j): w}; absent pairs are 0.
    Without weights, each w_ij is drawn uniformly from low..high.
    """
    if weights is None:
        gen = as_generator(seed)
        w = {(i, j): Fraction(int(gen.integers(low, high + 1)))
             for i in range(n) for j in range(n) if i != j}
    elif isinstance(weights, Mapping):
        w = {k: as_fraction(v) for k, v in weights.items()}
    else:
        w = {(i, j): as_fraction(weights[i][j]) for i in range(n) for j in range(n) if i != j}

    def value(i, S):
        return sum((w.get((i, j), Fraction(0)) for j in S if j != i), Fraction(0))

    return HedonicGame(n, value, name="additively-separable")


def friends_appreciation_game(n: int, seed=None, friend_prob=Fraction(1, 2),
                              friends: Mapping | None = None) -> HedonicGame:
    """Appreciation-of-friends preferences: v_i(S) = n * |friends in S| - |others in S|.

    Games of this kind always have a non-empty core, so they give realizable
    corpora.
    """
    if friends is None:
        gen = as_generator(seed)
        p = float(friend_prob)
        friends = {i: frozenset(j for j in range(n) if j != i and gen.random() < p)
                   for i in range(n)}
    friends = {i: frozenset(f) for i, f in friends.items()}

    def value(i, S):
        f = len(S & friends.get(i, frozenset()))
        return Fraction(n * f - (len(S) - 1 - f))

    return HedonicGame(n, value, name="friends-appreciation")


def random_hedonic_game(n: int, seed=None, low: int = 0, high: int = 9) -> HedonicGame:
    """Explicit game with independent uniform integer values for every (i, S)."""
    gen = as_generator(seed)
    table = {}
    for m in range(1, 1 << n):
        S = mask_to_set(m)
        for i in sorted(S):
            table[(i, S)] = int(gen.integers(low, high + 1))
    return HedonicGame(n, table, name="random-explicit")


def hedonic_game_generator(kind: str, n: int, seed=None, **params) -> HedonicGame:
    if kind == "additively-separable":
        return additively_separable_game(n, seed=seed, **params)
    if kind in ("top-responsive-flavored", "friends-appreciation"):
        return friends_appreciation_game(n, seed=seed, **params)
    if kind == "random-explicit":
        return random_hedonic_game(n, seed=seed, **params)
    raise ValueError(f"unknown hedonic game family {kind!r}")


def coalitions(n: int) -> list[frozenset]:
    """Non-empty coalitions in increasing bitmask order."""
    return [mask_to_set(m) for m in range(1, 1 << n)]


def hedonic_instance(n: int, games: Sequence[HedonicGame], weak: bool = False) -> ProblemInstance:
    """Explicit problem: points = non-empty coalitions, solutions = all partitions."""
    xs = coalitions(n)
    partitions = list(set_partitions(n))
    labels = [{S: g.label(S) for S in xs} for g in games]
    table = []
    for g in games:
        row = []
        for part in partitions:
            row.append([blocking_loss(S, g, part, weak) for S in xs])
        table.append(row)
    return ProblemInstance.from_table(
        xs, tuple(dict.fromkeys(y for lab in labels for y in lab.values())),
        [tuple(lab[S] for S in xs) for lab in labels], tuple(partitions), table)


def least_preferred_unique(game: HedonicGame, family: Sequence[frozenset]) -> bool:
    """Every coalition of the family is the unique least-preferred member of the
    family for at least one of its players."""
    for S in family:
        ok = False
        for i in S:
            mine = [T for T in family if i in T]
            if all(game.value(i, T) > game.value(i, S) for T in mine if T != S):
                ok = True
                break
        if not ok:
            return False
    return True


def sample_batch(game: HedonicGame, coalitions_: Iterable) -> SampleBatch:
    return SampleBatch.label((frozenset(S) for S in coalitions_), game.label)
