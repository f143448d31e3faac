"""Command-line front end: one JSON config per run.

    pacsol --config run.json [--seed N] [--out DIR] [--format json|csv] [--quiet]
    pacsol --example dimension

Exit codes: 0 success or passing verdict, 1 failing verdict or a search that
found nothing, 2 configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import condorcet, dimension, hedonic, market, tu_core
from .distributions import DistributionSpec
from .errors import InvalidParams, NoConsistentPartition, NoEmpiricalWinner, NotFound, TiesPresent
from .montecarlo import ValidationConfig, validate_pac, validate_uniform_convergence
from .pipelines import PIPELINES
from .rational import as_fraction, format_rational
from .rng import stream
from .serialize import (distribution_from_json, dumps, encode_value, hedonic_batch_from_json,
                        instance_from_json, market_batch_from_json, outcome_to_json,
                        tournament_to_json, tu_batch_from_json)

DOMAINS = ("tucore", "hedonic", "condorcet", "market", "dimension", "validate", "uc")
BUILTIN_INSTANCES = {
    "argmax": lambda: dimension.argmax_instance(4),
    "thresholds": lambda: dimension.thresholds_instance(4),
}


class ConfigError(Exception):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        super().__init__(message)
        self.key = key
        self.line = line


def _locate(text: str, key: str | None) -> int:
    """Line of the first occurrence of ``"key"`` in the raw config, else 1."""
    if key:
        needle = json.dumps(key)
        for no, line in enumerate(text.splitlines(), start=1):
            if needle in line:
                return no
    return 1


class Cfg:
    """Config accessor that turns bad values into ConfigError naming the key."""

    def __init__(self, doc: dict):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        self.doc = doc

    def has(self, key):
        return key in self.doc

    def raw(self, key, default=...):
        if key not in self.doc:
            if default is ...:
                raise ConfigError(f"missing required key {key!r}", key)
            return default
        return self.doc[key]

    def rational(self, key, default=...) -> Fraction:
        value = self.raw(key, default)
        if isinstance(value, Fraction):
            return value
        if not isinstance(value, (str, int)) or isinstance(value, bool):
            raise ConfigError(f"{key}: rationals are written as \"p/q\" strings", key)
        try:
            return as_fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{key}: {exc}", key) from None

    def integer(self, key, default=..., low=None) -> int:
        value = self.raw(key, default)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{key}: expected an integer", key)
        if low is not None and value < low:
            raise ConfigError(f"{key}: must be at least {low}", key)
        return value

    def boolean(self, key, default=False) -> bool:
        value = self.raw(key, default)
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true or false", key)
        return value

    def sub(self, key, default=...) -> "Cfg":
        value = self.raw(key, default)
        return Cfg(value)


def _rational_tree(value, key):
    """Validate every string that should be a rational inside nested lists."""
    if isinstance(value, list):
        return [_rational_tree(v, key) for v in value]
    try:
        return as_fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: {exc}", key) from None


def _seed(cfg: Cfg) -> int:
    seed = cfg.integer("seed", low=0)
    if seed >= 1 << 64:
        raise ConfigError("seed: must fit in 64 bits", "seed")
    return seed


def _distribution(cfg: Cfg, seed: int) -> DistributionSpec:
    doc = cfg.raw("distribution")
    try:
        return distribution_from_json(doc, seed=seed)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"distribution: missing or malformed field {exc}", "distribution") from None
    except ValueError as exc:
        raise ConfigError(f"distribution: {exc}", "distribution") from None


def _instance(cfg: Cfg):
    spec = cfg.raw("instance")
    if isinstance(spec, str):
        if spec not in BUILTIN_INSTANCES:
            raise ConfigError(f"instance: unknown built-in {spec!r}", "instance")
        return BUILTIN_INSTANCES[spec]()
    try:
        return instance_from_json(spec)
    except (KeyError, TypeError, IndexError) as exc:
        raise ConfigError(f"instance: missing or malformed field {exc}", "instance") from None
    except ValueError as exc:
        raise ConfigError(f"instance: {exc}", "instance") from None


# --- domain runners: each returns (document, csv rows with header, ok flag, summary) ---

def run_tucore(cfg: Cfg):
    n = cfg.integer("n", low=1)
    if cfg.has("batch"):
        try:
            batch = tu_batch_from_json(cfg.raw("batch"))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"batch: missing or malformed field {exc}", "batch") from None
        except ValueError as exc:
            raise ConfigError(f"batch: {exc}", "batch") from None
        game = None
    else:
        gen = cfg.sub("generator")
        seed = _seed(cfg)
        kind = gen.raw("kind")
        params = {k: v for k, v in gen.doc.items() if k != "kind"}
        try:
            game = tu_core.tu_game_generator(kind, n, seed=stream(seed, 0), **params)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"generator: {exc}", "generator") from None
        dist = _distribution(cfg, seed)
        m = cfg.integer("m", low=0)
        xs = dist.sample(m, stream(seed, 1))
        batch = [(S, game(S)) for S in xs]
    payoff = tu_core.solve_core_lp(batch, n)
    doc = {"payoff": [format_rational(v) for v in payoff], "total": format_rational(payoff.total),
           "batch_size": len(batch)}
    if cfg.has("grand_value") or game is not None:
        grand = cfg.rational("grand_value") if cfg.has("grand_value") else game.grand_value
        efficient, subsidy = tu_core.rescale_to_efficiency(payoff, grand)
        doc["grand_value"] = format_rational(grand)
        doc["efficient_payoff"] = [format_rational(v) for v in efficient]
        doc["subsidy_required"] = subsidy
    rows = [("player", "payoff")] + [(i, format_rational(v)) for i, v in enumerate(payoff)]
    return doc, rows, True, f"total payoff = {format_rational(payoff.total)}"


def _hedonic_game(cfg: Cfg, n: int):
    g = cfg.raw("game")
    if isinstance(g, dict) and "kind" in g:
        params = {k: v for k, v in g.items() if k not in ("kind", "seed")}
        if "seed" not in g:
            raise ConfigError("game: generated games need a seed", "game")
        try:
            return hedonic.hedonic_game_generator(g["kind"], n, seed=int(g["seed"]), **params)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"game: {exc}", "game") from None
    if isinstance(g, list):
        try:
            table = {(int(e["player"]), frozenset(e["coalition"])): as_fraction(e["value"]) for e in g}
            return hedonic.HedonicGame(n, table)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"game: missing or malformed field {exc}", "game") from None
        except ValueError as exc:
            raise ConfigError(f"game: {exc}", "game") from None
    raise ConfigError("game: give a generator {kind, seed} or a list of valuations", "game")


def run_hedonic(cfg: Cfg):
    n = cfg.integer("n", low=1)
    if n > hedonic.DEFAULT_MAX_PLAYERS:
        raise ConfigError(f"n: brute force is capped at {hedonic.DEFAULT_MAX_PLAYERS}", "n")
    weak = cfg.boolean("weak", False)
    game = _hedonic_game(cfg, n)
    if cfg.has("batch"):
        try:
            batch = hedonic_batch_from_json(cfg.raw("batch"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"batch: {exc}", "batch") from None
    else:
        seed = _seed(cfg)
        dist = _distribution(cfg, seed)
        xs = dist.sample(cfg.integer("m", low=0), stream(seed, 1))
        batch = [(S, game.label(S)) for S in xs]
    blocking = "weak" if weak else "strict"
    try:
        partition = hedonic.consistent_partition_bruteforce(batch, game, n, weak=weak)
    except NoConsistentPartition as exc:
        return ({"partition": None, "error": str(exc), "blocking": blocking}, [("block", "players")],
                False, "no consistent partition")
    doc = {"partition": partition.to_lists(), "blocking": blocking, "batch_size": len(batch)}
    rows = [("block", "players")] + [(b, " ".join(map(str, ps)))
                                     for b, ps in enumerate(partition.to_lists())]
    return doc, rows, True, f"partition = {partition.to_lists()}"


def _profile(cfg: Cfg):
    if cfg.has("profile"):
        try:
            return condorcet.PreferenceProfile.from_orders(cfg.raw("profile"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"profile: {exc}", "profile") from None
    gen = cfg.sub("generator")
    seed = _seed(cfg)
    kind = gen.raw("kind")
    voters = gen.integer("voters", low=1)
    if kind == "single-peaked":
        axis = gen.raw("axis")
        return condorcet.generate_single_peaked(axis, voters, seed=stream(seed, 0))
    if kind == "single-crossing":
        params = gen.raw("candidate_params", None)
        if params is not None:
            params = [tuple(_rational_tree(p, "candidate_params")) for p in params]
        return condorcet.generate_single_crossing(voters, seed=stream(seed, 0),
                                                  candidate_params=params,
                                                  n_candidates=gen.integer("candidates", 4, low=1))
    raise ConfigError(f"generator: unknown profile generator {kind!r}", "kind")


def run_condorcet(cfg: Cfg):
    profile = _profile(cfg)
    t = condorcet.build_tournament(profile)
    doc = {"voters": profile.n_voters, "tournament": tournament_to_json(t),
           "ties": t.has_ties()}
    if not t.has_ties():
        doc["transitive"] = condorcet.is_transitive(t)
        k = condorcet.three_cycle_core_size(t)
        doc["three_cycle_core_size"] = k
        doc["dimension_bound"] = dimension.tournament_bound(k)
    sample = cfg.raw("sample", list(profile.candidates))
    ok, summary = True, ""
    try:
        winner = condorcet.empirical_condorcet_winner(profile, sample)
        doc["winner"] = encode_value(winner)
        summary = f"winner = {winner}"
    except NoEmpiricalWinner:
        doc["winner"] = None
        ok, summary = False, "no empirical Condorcet winner"
    except ValueError as exc:
        raise ConfigError(f"sample: {exc}", "sample") from None
    rows = [("candidate", "beats", "is_winner")]
    for c, beaten in t.adjacency().items():
        rows.append((c, " ".join(map(str, beaten)), int(doc.get("winner") == encode_value(c))))
    return doc, rows, ok, summary


def run_market(cfg: Cfg):
    try:
        k, budgets, samples = market_batch_from_json(cfg.doc)
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}", exc.args[0]) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"market batch: {exc}", "samples") from None
    zeta = cfg.rational("zeta")
    slack = cfg.rational("price_slack") if cfg.has("price_slack") else None
    n = len(budgets)
    instance = market.FisherInstance(n, k, {}, budgets)
    try:
        outcome = market.consistent_outcome_search(instance, samples, zeta, slack)
    except NotFound as exc:
        return {"outcome": None, "error": str(exc)}, [("item", "index", "value")], False, "not found"
    except ValueError as exc:
        raise ConfigError(str(exc), "samples") from None
    doc = {"outcome": outcome_to_json(outcome), "aggregation": "any-player",
           "per_player_empirical_loss": [format_rational(v) for v in
                                         market.empirical_player_losses(samples, outcome)]}
    rows = [("item", "index", "value")]
    rows += [("price", g, format_rational(p)) for g, p in enumerate(outcome.prices)]
    rows += [("bundle", i, " ".join(map(str, sorted(b)))) for i, b in enumerate(outcome.assignment)]
    rows += [("perturbed_budget", i, format_rational(b))
             for i, b in enumerate(outcome.perturbed_budgets)]
    return doc, rows, True, f"assignment = {[sorted(b) for b in outcome.assignment]}"


def run_dimension(cfg: Cfg):
    problem = _instance(cfg)
    max_size = cfg.integer("max_size", None, low=0) if cfg.has("max_size") else None
    d, witness = dimension.solution_dimension(problem, max_size)
    doc = {"solution_dimension": d, "witness": witness.to_json(problem)}
    rows = [("kind", "d", "points", "games"),
            ("solution", d, " ".join(map(str, witness.points)), " ".join(map(str, witness.games)))]
    ok = True
    if cfg.boolean("natarajan", False):
        nd, nw = dimension.natarajan_dimension(problem, max_size)
        doc["natarajan_dimension"] = nd
        doc["natarajan_witness"] = nw.to_json(problem)
        rows.append(("natarajan", nd, " ".join(map(str, nw.points)), " ".join(map(str, nw.games))))
    if cfg.has("bound"):
        bound = cfg.rational("bound")
        doc["bound"] = format_rational(bound)
        doc["within_bound"] = d <= bound
        ok = d <= bound
    return doc, rows, ok, f"d = {d}"


def _validation_config(cfg: Cfg, dimension_: int | None) -> ValidationConfig:
    try:
        return ValidationConfig(
            epsilon=cfg.rational("epsilon"), delta=cfg.rational("delta"),
            m=cfg.integer("m", low=1) if cfg.has("m") else None,
            trials=cfg.integer("trials", 200, low=1), holdout=cfg.integer("holdout", 20000, low=1),
            seed=_seed(cfg), slack_z=cfg.rational("slack_z", "2"), dimension=dimension_,
            alpha1=cfg.rational("alpha1", "8"), alpha2=cfg.rational("alpha2", "4"),
            workers=cfg.integer("workers", 1, low=1))
    except InvalidParams as exc:
        raise ConfigError(str(exc), str(exc).split(":")[0].split()[0]) from None


def _report_output(report):
    rows = [("trial", "loss", "exceeded", "error")]
    for t in report.per_trial:
        rows.append((t.trial, "" if t.loss is None else format_rational(t.loss), int(t.exceeded), t.error))
    summary = (f"failure_fraction = {format_rational(report.failure_fraction)} "
               f"threshold = {report.threshold:.6f} verdict = {'pass' if report.verdict else 'fail'}")
    return report.to_json(), rows, report.verdict, summary


def run_validate(cfg: Cfg):
    name = cfg.raw("pipeline")
    if name not in PIPELINES:
        raise ConfigError(f"pipeline: expected one of {sorted(PIPELINES)}", "pipeline")
    params = cfg.raw("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params: expected an object", "params")
    try:
        pipe = PIPELINES[name](**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params: {exc}", "params") from None
    vc = _validation_config(cfg, pipe.dimension)
    return _report_output(validate_pac(pipe.family, pipe.solver, pipe.dist, vc))


def run_uc(cfg: Cfg):
    problem = _instance(cfg)
    seed = _seed(cfg)
    if cfg.has("distribution"):
        dist = _distribution(cfg, seed)
    else:
        dist = DistributionSpec.uniform(problem.instance_space, seed=seed)
    d = cfg.integer("dimension", low=0) if cfg.has("dimension") else dimension.solution_dimension(problem)[0]
    vc = _validation_config(cfg, d)
    game = cfg.integer("game", low=0) if cfg.has("game") else None
    return _report_output(validate_uniform_convergence(problem, dist, vc, game=game))


RUNNERS = {
    "tucore": run_tucore, "hedonic": run_hedonic, "condorcet": run_condorcet,
    "market": run_market, "dimension": run_dimension, "validate": run_validate, "uc": run_uc,
}


def _csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def load_example(name: str) -> str:
    path = resources.files("pacsol") / "data" / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(name)
    return path.read_text()


def example_names() -> list[str]:
    return sorted(p.name[:-5] for p in (resources.files("pacsol") / "data").iterdir()
                  if p.name.endswith(".json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pacsol", description=__doc__.splitlines()[0])
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON run config")
    src.add_argument("--example", help="run a bundled example config by name")
    parser.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
    parser.add_argument("--out", help="directory for the report file")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    source = args.config or f"<example {args.example}>"
    try:
        text = load_example(args.example) if args.example else Path(args.config).read_text()
    except (OSError, FileNotFoundError) as exc:
        print(f"{source}: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        doc = json.loads(text)
        cfg = Cfg(doc)
        if args.seed is not None:
            doc["seed"] = args.seed
        domain = cfg.raw("domain")
        if domain not in DOMAINS:
            raise ConfigError(f"domain: expected one of {', '.join(DOMAINS)}", "domain")
        result, rows, ok, summary = RUNNERS[domain](cfg)
    except json.JSONDecodeError as exc:
        print(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        line = exc.line or _locate(text, exc.key)
        print(f"{source}:{line}: {exc}", file=sys.stderr)
        return 2
    except TiesPresent as exc:
        print(f"{source}: {exc}", file=sys.stderr)
        return 2

    report = {"domain": domain, "config": doc, **result}
    body = dumps(report) if args.format == "json" else _csv_text(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{domain}.{args.format}").write_text(body)
    else:
        sys.stdout.write(body)
    if not args.quiet:
        print(summary, file=sys.stderr if not args.out else sys.stdout)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())
