"""JSON codecs. Rationals travel as "p/q" strings so every value round-trips exactly."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .distributions import INDEPENDENT, NONEMPTY_SUBSETS, UNIFORM_POINTS, WEIGHTED, DistributionSpec
from .framework import ProblemInstance, SampleBatch
from .rational import as_fraction, format_rational


def encode_value(value) -> Any:
    """Plain JSON form of points, labels and solutions.

    Fractions become "p/q" strings, sets become sorted lists, tuples lists.
    """
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return format_rational(Fraction(value))
    if isinstance(value, str):
        return value
    if isinstance(value, (set, frozenset)):
        return sorted(encode_value(v) for v in value)
    if isinstance(value, (tuple, list)):
        return [encode_value(v) for v in value]
    if isinstance(value, dict):
        return {str(k): encode_value(v) for k, v in value.items()}
    if hasattr(value, "to_json"):
        return value.to_json()
    if hasattr(value, "blocks"):
        return [sorted(b) for b in value.blocks]
    return repr(value)


def decode_value(value) -> Any:
    """Inverse of :func:`encode_value` up to container types: lists become tuples."""
    if isinstance(value, list):
        return tuple(decode_value(v) for v in value)
    return value


def dumps(doc) -> str:
    """Canonical text: two-space indent, trailing newline, stable key order."""
    return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=True) + "\n"


def instance_to_json(problem: ProblemInstance) -> dict:
    labels = list(problem.label_space)
    index = {y: i for i, y in enumerate(labels)}
    return {
        "instance_space": [encode_value(x) for x in problem.instance_space],
        "label_space": [encode_value(y) for y in labels],
        "games": [[index[y] for y in g] for g in problem.games],
        "solutions": [encode_value(s) for s in problem.solutions],
        "loss_table": [[list(problem.loss_bits(g, s)) for s in range(len(problem.solutions))]
                       for g in range(len(problem.games))],
    }


def instance_from_json(doc: dict) -> ProblemInstance:
    xs = [decode_value(x) for x in doc["instance_space"]]
    labels = [decode_value(y) for y in doc["label_space"]]
    games = []
    for row in doc["games"]:
        if len(row) != len(xs):
            raise ValueError("every game must label every instance point")
        games.append(tuple(labels[int(i)] for i in row))
    solutions = [decode_value(s) for s in doc["solutions"]]
    return ProblemInstance.from_table(xs, labels, games, solutions, doc["loss_table"])


def distribution_to_json(dist: DistributionSpec) -> dict:
    out: dict = {"kind": dist.kind, "seed": dist.seed}
    if dist.kind in (UNIFORM_POINTS, WEIGHTED):
        out["points"] = [encode_value(x) for x in dist.points]
    if dist.kind in (NONEMPTY_SUBSETS, INDEPENDENT):
        out["n"] = dist.n
    if dist.kind == INDEPENDENT:
        out["p"] = format_rational(dist.p)
    if dist.kind == WEIGHTED:
        out["weights"] = [format_rational(w) for w in dist.weights]
    return out


def distribution_from_json(doc: dict, seed: int | None = None) -> DistributionSpec:
    kind = doc["kind"]
    seed = int(doc.get("seed", 0) if seed is None else seed)
    if kind == UNIFORM_POINTS:
        return DistributionSpec.uniform([decode_value(x) for x in doc["points"]], seed=seed)
    if kind == NONEMPTY_SUBSETS:
        return DistributionSpec.nonempty_subsets(int(doc["n"]), seed=seed)
    if kind == INDEPENDENT:
        return DistributionSpec.independent(int(doc["n"]), as_fraction(doc["p"]), seed=seed)
    if kind == WEIGHTED:
        return DistributionSpec.weighted([decode_value(x) for x in doc["points"]],
                                         [as_fraction(w) for w in doc["weights"]], seed=seed)
    raise ValueError(f"unknown distribution kind {kind!r}")


def batch_to_json(batch: SampleBatch) -> list:
    return [{"x": encode_value(x), "y": encode_value(y)} for x, y in batch]


def batch_from_json(doc: list) -> SampleBatch:
    return SampleBatch(tuple((decode_value(p["x"]), decode_value(p["y"])) for p in doc))


def tu_batch_to_json(batch) -> list:
    return [{"coalition": sorted(S), "value": format_rational(as_fraction(v))} for S, v in batch]


def tu_batch_from_json(doc: list) -> list:
    return [(frozenset(int(i) for i in item["coalition"]), as_fraction(item["value"]))
            for item in doc]


def hedonic_batch_to_json(batch) -> list:
    return [{"coalition": sorted(S), "values": [format_rational(as_fraction(v)) for v in vals]}
            for S, vals in batch]


def hedonic_batch_from_json(doc: list) -> list:
    return [(frozenset(int(i) for i in item["coalition"]),
             tuple(as_fraction(v) for v in item["values"])) for item in doc]


def market_batch_to_json(k: int, budgets, samples) -> dict:
    return {
        "goods": k,
        "budgets": [format_rational(as_fraction(b)) for b in budgets],
        "samples": [{"bundle": sorted(S), "values": [format_rational(as_fraction(v)) for v in vals]}
                    for S, vals in samples],
    }


def market_batch_from_json(doc: dict) -> tuple[int, tuple, list]:
    k = int(doc["goods"])
    budgets = tuple(as_fraction(b) for b in doc["budgets"])
    samples = [(frozenset(int(g) for g in s["bundle"]), tuple(as_fraction(v) for v in s["values"]))
               for s in doc.get("samples", [])]
    return k, budgets, samples


def payoff_to_json(payoff) -> list:
    return [format_rational(v) for v in payoff]


def partition_to_json(partition) -> list:
    return partition.to_lists()


def outcome_to_json(outcome) -> dict:
    k = outcome.k
    return {
        "assignment": [sorted(b) for b in outcome.assignment],
        "prices": [format_rational(p) for p in outcome.prices],
        "perturbed_budgets": [format_rational(b) for b in outcome.perturbed_budgets],
        "zeta": format_rational(outcome.zeta),
        "price_slack": format_rational(outcome.price_slack),
        "excess_sq": format_rational(outcome.excess_sq),
        "excess_bound_sq": format_rational(Fraction(k * k, 4)),
        "excess_compliant": outcome.excess_compliant,
    }


def tournament_to_json(t) -> dict:
    return {"candidates": [encode_value(c) for c in t.candidates],
            "adjacency": {str(encode_value(c)): [encode_value(d) for d in ds]
                          for c, ds in t.adjacency().items()}}
