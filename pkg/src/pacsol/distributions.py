"""Seedable sampling distributions over an instance space.

Subset-valued points (coalitions, bundles) are frozensets of 0-based
element indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Hashable, Sequence

import numpy as np

from .errors import UnsupportedDistribution
from .rational import as_fraction
from .rng import as_generator

UNIFORM_POINTS = "uniform-over-listed-points"
NONEMPTY_SUBSETS = "uniform-nonempty-subsets"
INDEPENDENT = "independent-inclusion"
WEIGHTED = "explicit-weighted"

KINDS = (UNIFORM_POINTS, NONEMPTY_SUBSETS, INDEPENDENT, WEIGHTED)

# largest support enumerated for the subset kinds
SUPPORT_CAP = 1 << 16


@lru_cache(maxsize=1 << 16)
def mask_to_set(mask: int) -> frozenset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def set_to_mask(subset) -> int:
    mask = 0
    for i in subset:
        mask |= 1 << i
    return mask


@dataclass(frozen=True)
class DistributionSpec:
    """A named distribution plus the seed used when no generator is passed.

    Build one with the classmethods rather than the raw constructor.
    """

    kind: str
    seed: int = 0
    points: tuple = ()
    n: int = 0
    p: Fraction | None = None
    weights: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind in (UNIFORM_POINTS, WEIGHTED) and not self.points:
            raise ValueError(f"{self.kind} needs at least one point")
        if self.kind in (NONEMPTY_SUBSETS, INDEPENDENT):
            if not 1 <= self.n <= 62:
                raise ValueError("subset distributions need 1 <= n <= 62")
        if self.kind == INDEPENDENT:
            if self.p is None or not 0 <= self.p <= 1:
                raise ValueError("independent-inclusion needs 0 <= p <= 1")
        if self.kind == WEIGHTED:
            if len(self.weights) != len(self.points):
                raise ValueError("one weight per point required")
            if any(w < 0 for w in self.weights):
                raise ValueError("weights must be nonnegative")
            if sum(self.weights, Fraction(0)) != 1:
                raise ValueError("weights must sum to exactly 1")

    @classmethod
    def uniform(cls, points: Sequence[Hashable], seed: int = 0) -> "DistributionSpec":
        return cls(UNIFORM_POINTS, seed=seed, points=tuple(points))

    @classmethod
    def nonempty_subsets(cls, n: int, seed: int = 0) -> "DistributionSpec":
        return cls(NONEMPTY_SUBSETS, seed=seed, n=n)

    @classmethod
    def independent(cls, n: int, p, seed: int = 0) -> "DistributionSpec":
        return cls(INDEPENDENT, seed=seed, n=n, p=as_fraction(p))

    @classmethod
    def weighted(cls, points: Sequence[Hashable], weights, seed: int = 0) -> "DistributionSpec":
        return cls(WEIGHTED, seed=seed, points=tuple(points),
                   weights=tuple(as_fraction(w) for w in weights))

    @property
    def is_explicit(self) -> bool:
        """True for the kinds whose support is listed point by point."""
        return self.kind in (UNIFORM_POINTS, WEIGHTED)

    def support(self, cap: int = SUPPORT_CAP) -> list[tuple[Any, Fraction]]:
        """Every point with positive probability, with its exact weight.

        Listed points keep their order (duplicates merged); subsets come in
        increasing bitmask order.
        """
        if self.kind == UNIFORM_POINTS:
            merged: dict = {}
            share = Fraction(1, len(self.points))
            for x in self.points:
                merged[x] = merged.get(x, Fraction(0)) + share
            return list(merged.items())
        if self.kind == WEIGHTED:
            merged = {}
            for x, w in zip(self.points, self.weights):
                merged[x] = merged.get(x, Fraction(0)) + w
            return [(x, w) for x, w in merged.items() if w > 0]
        if (1 << self.n) > cap:
            raise UnsupportedDistribution(
                f"{self.kind} over {self.n} elements has 2^{self.n} points (cap {cap})")
        if self.kind == NONEMPTY_SUBSETS:
            share = Fraction(1, (1 << self.n) - 1)
            return [(mask_to_set(m), share) for m in range(1, 1 << self.n)]
        p, q = self.p, 1 - self.p
        out = []
        for m in range(1 << self.n):
            size = bin(m).count("1")
            w = p ** size * q ** (self.n - size)
            if w > 0:
                out.append((mask_to_set(m), w))
        return out

    def sample(self, size: int, rng=None) -> list:
        """Draw ``size`` i.i.d. points.

        ``rng`` may be a numpy Generator or an int seed; when omitted the
        spec's own seed is used, so repeated calls return the same draws.
        """
        gen = as_generator(rng, self.seed)
        if size == 0:
            return []
        if self.kind == UNIFORM_POINTS:
            idx = gen.integers(0, len(self.points), size=size)
            return [self.points[i] for i in idx]
        if self.kind == WEIGHTED:
            cum = np.array([float(c) for c in _cumulative(self.weights)])
            idx = np.searchsorted(cum, gen.random(size), side="right")
            last = len(self.points) - 1
            return [self.points[min(int(i), last)] for i in idx]
        if self.kind == NONEMPTY_SUBSETS:
            masks = gen.integers(1, 1 << self.n, size=size, dtype=np.uint64)
            return [mask_to_set(int(m)) for m in masks]
        hits = gen.random((size, self.n)) < float(self.p)
        weights = np.left_shift(np.uint64(1), np.arange(self.n, dtype=np.uint64))
        masks = (hits.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
        return [mask_to_set(int(m)) for m in masks]

    def to_json(self) -> dict:
        from .serialize import distribution_to_json
        return distribution_to_json(self)


def _cumulative(weights):
    total = Fraction(0)
    out = []
    for w in weights:
        total += w
        out.append(total)
    return out
