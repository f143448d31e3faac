"""Seeded Monte-Carlo checks of (epsilon, delta) guarantees.

Each trial t draws its game, its sample and its holdout from separate
streams keyed by (seed, t), so a report depends only on the configuration,
never on how many worker threads ran the trials.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import __version__
from .distributions import DistributionSpec
from .errors import InvalidParams, SolverFailure, UnsupportedDistribution
from .framework import (PacParameters, ProblemInstance, SampleBatch, consistent_games,
                        consistent_sample_size, statistical_loss_estimate,
                        uc_sample_size)
from .rational import as_fraction, format_rational
from .rng import STREAM_GAME, STREAM_HOLDOUT, STREAM_SAMPLE, stream
from .serialize import distribution_to_json, dumps

CSV_COLUMNS = ("trial", "loss", "exceeded", "error")


@dataclass(frozen=True)
class ProblemFamily:
    """Latent games for the harness.

    ``draw(rng)`` returns a game, ``label(game, x)`` its observation at x and
    ``loss(x, game, solution)`` the 0/1 violation indicator.
    """

    name: str
    draw: Callable[[np.random.Generator], Any]
    label: Callable[[Any, Any], Any]
    loss: Callable[[Any, Any, Any], int]


@dataclass(frozen=True)
class ValidationConfig:
    """Harness settings.

    Give ``m`` directly, or a ``dimension`` from which the harness derives
    it (consistent-solver size for validate_pac, uniform-convergence size for
    validate_uniform_convergence, which can also brute-force the dimension). ``exact`` selects exact statistical loss:
    None means use it whenever the support lists at most ``holdout`` points.
    """

    epsilon: Fraction
    delta: Fraction
    m: int | None = None
    trials: int = 200
    holdout: int = 20000
    seed: int = 0
    slack_z: Fraction = Fraction(2)
    dimension: int | None = None
    alpha1: Fraction = Fraction(8)
    alpha2: Fraction = Fraction(4)
    exact: bool | None = None
    workers: int = 1

    def __post_init__(self):
        for name in ("epsilon", "delta", "slack_z", "alpha1", "alpha2"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        PacParameters(self.epsilon, self.delta, self.alpha1, self.alpha2)
        if self.trials < 1 or self.holdout < 1:
            raise InvalidParams("trials and holdout must be at least 1")
        if self.slack_z < 0:
            raise InvalidParams("slack_z must be nonnegative")
        if self.m is not None and self.m < 1:
            raise InvalidParams("m must be at least 1")
        if self.workers < 1:
            raise InvalidParams("workers must be at least 1")
        if not 0 <= self.seed < 1 << 64:
            raise InvalidParams("seed must be an unsigned 64-bit integer")

    @property
    def params(self) -> PacParameters:
        return PacParameters(self.epsilon, self.delta, self.alpha1, self.alpha2)

    def threshold(self) -> float:
        """delta + z * sqrt(delta (1 - delta) / R)."""
        d = float(self.delta)
        return d + float(self.slack_z) * math.sqrt(d * (1 - d) / self.trials)

    def to_json(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if k == "workers":
                continue  # scheduling only; reports must not depend on it
            out[k] = format_rational(v) if isinstance(v, Fraction) else v
        return out


@dataclass(frozen=True)
class TrialResult:
    trial: int
    loss: Fraction | None
    exceeded: bool
    error: str = ""
    half_width: float | None = None

    def to_json(self) -> dict:
        out = {"trial": self.trial,
               "loss": None if self.loss is None else format_rational(self.loss),
               "exceeded": self.exceeded}
        if self.half_width is not None:
            out["half_width"] = self.half_width
        if self.error:
            out["error"] = self.error
        return out


@dataclass(frozen=True)
class ValidationReport:
    per_trial: tuple
    failure_fraction: Fraction
    threshold: float
    verdict: bool
    m: int
    provenance: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(1 for t in self.per_trial if t.exceeded)

    def to_json(self) -> dict:
        return {
            "verdict": "pass" if self.verdict else "fail",
            "failure_fraction": format_rational(self.failure_fraction),
            "failures": self.failures,
            "trials": len(self.per_trial),
            "threshold": self.threshold,
            "m": self.m,
            "provenance": self.provenance,
            "per_trial": [t.to_json() for t in self.per_trial],
        }

    def to_json_text(self) -> str:
        return dumps(self.to_json())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t in self.per_trial:
            w.writerow([t.trial, "" if t.loss is None else format_rational(t.loss),
                        int(t.exceeded), t.error])
        return buf.getvalue()


def _run(config: ValidationConfig, trial_fn) -> list[TrialResult]:
    indices = range(config.trials)
    if config.workers == 1:
        return [trial_fn(t) for t in indices]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(trial_fn, indices))


def _report(config: ValidationConfig, results, m: int, extra: dict) -> ValidationReport:
    failures = sum(1 for r in results if r.exceeded)
    frac = Fraction(failures, config.trials)
    threshold = config.threshold()
    provenance = {"package": "pacsol", "version": __version__, "config": config.to_json(), **extra}
    return ValidationReport(tuple(results), frac, threshold, float(frac) <= threshold, m, provenance)


def _use_exact(dist: DistributionSpec, config: ValidationConfig) -> bool:
    if config.exact is not None:
        return config.exact
    if dist.is_explicit:
        return True
    try:
        return len(dist.support(cap=config.holdout)) <= config.holdout
    except UnsupportedDistribution:
        return False


def validate_pac(family: ProblemFamily, solver: Callable, dist: DistributionSpec,
                 config: ValidationConfig) -> ValidationReport:
    """Fraction of trials whose returned solution has statistical loss above epsilon.

    ``solver(batch, game)`` receives the labelled batch and the latent game
    as an oracle (some solvers, e.g. hedonic partition search, query it for
    values of coalitions they place in the partition). SolverFailure
    exceptions count as failed trials.
    """
    if config.m is None and config.dimension is None:
        raise InvalidParams("give either m or dimension")
    m = config.m if config.m is not None else consistent_sample_size(config.dimension, config.params)
    exact = _use_exact(dist, config)
    support = dist.support() if exact else None

    def trial(t: int) -> TrialResult:
        game = family.draw(stream(config.seed, t, STREAM_GAME))
        xs = dist.sample(m, stream(config.seed, t, STREAM_SAMPLE))
        batch = SampleBatch.label(xs, lambda x: family.label(game, x))
        try:
            solution = solver(batch, game)
        except SolverFailure as exc:
            return TrialResult(t, None, True, type(exc).__name__)
        if exact:
            loss = sum((w for x, w in support if family.loss(x, game, solution)), Fraction(0))
            return TrialResult(t, loss, loss > config.epsilon)
        loss, hw = statistical_loss_estimate(dist, game, solution, family.loss, config.holdout,
                                             stream(config.seed, t, STREAM_HOLDOUT))
        return TrialResult(t, loss, loss > config.epsilon, half_width=hw)

    results = _run(config, trial)
    extra = {"family": family.name, "solver": getattr(solver, "__name__", repr(solver)),
             "distribution": distribution_to_json(dist), "loss_mode": "exact" if exact else "holdout"}
    return _report(config, results, m, extra)


def validate_uniform_convergence(problem: ProblemInstance, dist: DistributionSpec,
                                 config: ValidationConfig, game: int | None = None
                                 ) -> ValidationReport:
    """Fraction of trials where some consistent (game, solution) pair has
    |empirical - statistical| loss above epsilon.

    The labelling game is drawn uniformly per trial unless ``game`` fixes
    it. Without an explicit m, it is derived from the solution dimension.
    """
    from .dimension import solution_dimension

    if config.m is not None:
        m, d = config.m, None
    else:
        d = config.dimension if config.dimension is not None else solution_dimension(problem)[0]
        m = uc_sample_size(d, config.params)
    weight = np.zeros(problem.n_points, dtype=object)
    for x, w in dist.support():
        weight[problem.index_of(x)] += w
    losses = problem.loss_matrix()
    exact = [[sum((weight[i] for i in range(problem.n_points) if losses[g, s, i]), Fraction(0))
              for s in range(len(problem.solutions))] for g in range(len(problem.games))]

    def trial(t: int) -> TrialResult:
        g0 = game if game is not None else int(stream(config.seed, t, STREAM_GAME)
                                               .integers(0, len(problem.games)))
        xs = dist.sample(m, stream(config.seed, t, STREAM_SAMPLE))
        batch = problem.sample_batch(g0, xs)
        counts = np.zeros(problem.n_points, dtype=np.int64)
        for x in xs:
            counts[problem.index_of(x)] += 1
        gap = Fraction(0)
        for g in consistent_games(problem, batch):
            hits = losses[g] @ counts
            for s in range(len(problem.solutions)):
                gap = max(gap, abs(Fraction(int(hits[s]), m) - exact[g][s]))
        return TrialResult(t, gap, gap > config.epsilon)

    results = _run(config, trial)
    extra = {"distribution": distribution_to_json(dist), "dimension": d,
             "points": problem.n_points, "games": len(problem.games),
             "solutions": len(problem.solutions)}
    return _report(config, results, m, extra)
