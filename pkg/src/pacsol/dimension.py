"""Brute-force shattering dimensions on explicit finite problems.

Candidate sets are scanned by increasing size in ``itertools.combinations``
order over point indices, and games (or game pairs) in index order, so the
witness returned is always the first one in that canonical order. If no set
of some size is shattered, no larger set can be, and the search stops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Hashable, Mapping, Sequence

from .framework import ProblemInstance

DEFAULT_MAX_SIZE = 12


@dataclass(frozen=True)
class ShatteringWitness:
    """A shattered point set and how each labeling is realized.

    ``points`` are instance indices; ``games`` holds one game index
    (S-shattering) or two (N-shattering); ``realized_labelings`` maps each
    labeling, a 0/1 tuple aligned with ``points``, to a solution index.
    """

    points: tuple = ()
    games: tuple = ()
    realized_labelings: Mapping = field(default_factory=dict)
    kind: str = "solution"

    @property
    def size(self) -> int:
        return len(self.points)

    def to_json(self, problem: ProblemInstance | None = None) -> dict:
        out = {
            "kind": self.kind,
            "points": list(self.points),
            "games": list(self.games),
            "labelings": [
                {"labeling": list(b), "solution": s}
                for b, s in sorted(self.realized_labelings.items())
            ],
        }
        if self.kind == "natarajan":
            out["note"] = "generalized Natarajan dimension (framework draft material)"
        if problem is not None:
            out["point_values"] = [repr(problem.instance_space[i]) for i in self.points]
        return out


def _cap(problem: ProblemInstance, max_size: int | None) -> int:
    if max_size is None:
        max_size = DEFAULT_MAX_SIZE
    return max(0, min(max_size, problem.n_points))


def _labeling(mask: int, points: tuple) -> tuple:
    return tuple((mask >> i) & 1 for i in points)


def _shatters(masks: Sequence[int], cmask: int, size: int) -> dict | None:
    """Map projected pattern -> first solution, if all 2^size patterns occur."""
    seen: dict[int, int] = {}
    full = 1 << size
    for s, mask in enumerate(masks):
        key = mask & cmask
        if key not in seen:
            seen[key] = s
            if len(seen) == full:
                return seen
    return None


def solution_dimension(problem: ProblemInstance, max_size: int | None = None
                       ) -> tuple[int, ShatteringWitness]:
    """Size of the largest S-shattered point set (capped at ``max_size``) and a witness.

    A set C is S-shattered when one game realizes every 0/1 labeling of C
    through some choice of solution. Returns ``(0, empty witness)`` when not
    even a singleton is shattered.
    """
    cap = _cap(problem, max_size)
    best = (0, ShatteringWitness())
    for size in range(1, cap + 1):
        found = None
        for pts in combinations(range(problem.n_points), size):
            cmask = sum(1 << i for i in pts)
            for g, masks in enumerate(problem.loss_table):
                seen = _shatters(masks, cmask, size)
                if seen is not None:
                    found = ShatteringWitness(
                        pts, (g,), {_labeling(k, pts): s for k, s in seen.items()})
                    break
            if found:
                break
        if found is None:
            break
        best = (size, found)
    return best


def natarajan_dimension(problem: ProblemInstance, max_size: int | None = None
                        ) -> tuple[int, ShatteringWitness]:
    """Generalized Natarajan dimension (from the framework draft) by brute force.

    C is N-shattered by games g0 != g1 that disagree on every point of C when
    every labeling b has a solution with loss b under g0 and 1 - b under g1.
    """
    cap = _cap(problem, max_size)
    best = (0, ShatteringWitness(kind="natarajan"))
    pairs = list(combinations(range(len(problem.games)), 2))
    for size in range(1, cap + 1):
        found = None
        for pts in combinations(range(problem.n_points), size):
            cmask = sum(1 << i for i in pts)
            for g0, g1 in pairs:
                if any(problem.games[g0][i] == problem.games[g1][i] for i in pts):
                    continue
                row0, row1 = problem.loss_table[g0], problem.loss_table[g1]
                seen: dict[int, int] = {}
                for s, (m0, m1) in enumerate(zip(row0, row1)):
                    if (m0 ^ m1) & cmask != cmask:
                        continue
                    seen.setdefault(m0 & cmask, s)
                if len(seen) == 1 << size:
                    found = ShatteringWitness(
                        pts, (g0, g1), {_labeling(k, pts): s for k, s in seen.items()},
                        kind="natarajan")
                    break
            if found:
                break
        if found is None:
            break
        best = (size, found)
    return best


def vc_dimension(points: Sequence[Hashable], hypotheses: Sequence) -> int:
    """Classical VC dimension of a finite class of 0/1 maps.

    Each hypothesis is a mapping point -> {0, 1} or a sequence aligned with
    ``points``.
    """
    points = list(points)
    rows = [tuple(h[x] for x in points) if isinstance(h, Mapping) else tuple(h)
            for h in hypotheses]
    if not rows:
        return 0
    d = 0
    for size in range(1, len(points) + 1):
        if (1 << size) > len(rows):
            break
        if not any(len({tuple(r[i] for i in c) for r in rows}) == 1 << size
                   for c in combinations(range(len(points)), size)):
            break
        d = size
    return d


def verify_dimension_bound(problem: ProblemInstance, claimed_bound) -> bool:
    """True iff the solution dimension is at most ``claimed_bound``.

    Only sets of size floor(bound) + 1 need checking, so the bound may be any
    real (e.g. log2(k + 2)).
    """
    limit = math.floor(claimed_bound)
    if limit < 0:
        return False
    if limit >= problem.n_points:
        return True
    d, _ = solution_dimension(problem, max_size=limit + 1)
    return d <= limit


def witness_is_valid(problem: ProblemInstance, witness: ShatteringWitness) -> bool:
    """Replay every recorded labeling through the loss table."""
    size = len(witness.points)
    if len(witness.realized_labelings) != (1 << size if size else 0):
        return False
    for labeling, s in witness.realized_labelings.items():
        if witness.kind == "natarajan":
            g0, g1 = witness.games
            if any(problem.games[g0][i] == problem.games[g1][i] for i in witness.points):
                return False
            if _labeling(problem.loss_table[g0][s], witness.points) != labeling:
                return False
            if _labeling(problem.loss_table[g1][s], witness.points) != tuple(1 - b for b in labeling):
                return False
        else:
            (g,) = witness.games
            if _labeling(problem.loss_table[g][s], witness.points) != labeling:
                return False
    return True


def argmax_instance(size: int = 4) -> ProblemInstance:
    """Points x1..x_size, games = all injective scorings onto 1..size, solution = a point.

    Loss is 1 when the point scores strictly higher than the chosen solution.
    """
    xs = tuple(f"x{i + 1}" for i in range(size))
    games = [dict(zip(xs, perm)) for perm in permutations(range(1, size + 1))]
    return ProblemInstance.from_loss(
        xs, games, xs, lambda x, g, s: int(g[x] > g[s]), label_space=tuple(range(1, size + 1)))


def vc_instance(points: Sequence[Hashable], hypotheses: Sequence) -> ProblemInstance:
    """Classifier learning as a solution problem: games = solutions = hypotheses,
    loss = disagreement at the point."""
    points = tuple(points)
    rows = [tuple(h[x] for x in points) if isinstance(h, Mapping) else tuple(h)
            for h in hypotheses]
    return ProblemInstance.from_loss(
        points, rows, tuple(rows),
        lambda x, g, h: int(g[x] != h[points.index(x)]), label_space=(0, 1))


def threshold_hypotheses(n_points: int) -> list[tuple]:
    """1[x >= t] on points 0..n-1 for every threshold t in 0..n."""
    return [tuple(int(x >= t) for x in range(n_points)) for t in range(n_points + 1)]


def thresholds_instance(n_points: int = 4) -> ProblemInstance:
    return vc_instance(range(n_points), threshold_hypotheses(n_points))


def tournament_bound(core_size: int) -> float:
    """log2(k + 2), the dimension bound for Condorcet problems."""
    return math.log2(core_size + 2)
