"""Run metrics computed from event logs.

success rate, cost totals, distinct solution paths, proposal diversity,
discriminative accuracy and calibration error.  Everything is derived from
the logs alone, plus optional per-node reachability labels for the last two.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from typing import Mapping, Optional, Sequence

from ..core import State, Thought
from ..domains.base import Domain
from ..runlog import RunLog

Labels = Mapping[int, bool]


@dataclass
class MetricsReport:
    instances: int
    success_rate: float
    expansions: int
    generated_thoughts: int
    tokens: int
    backend_calls: int
    distinct_valid_paths: int
    candidate_diversity: Optional[float]
    discriminative_accuracy: Optional[float]
    calibration_error: Optional[float]

    def __post_init__(self):
        for name in ("success_rate", "candidate_diversity", "discriminative_accuracy"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.calibration_error is not None and self.calibration_error < 0:
            raise ValueError("calibration error must be >= 0")

    def as_dict(self) -> dict:
        return asdict(self)


# -- building blocks ---------------------------------------------------------

def expected_calibration_error(confidences: Sequence[float], outcomes: Sequence[bool],
                               bins: int = 10) -> float:
    """Equal-width ECE: sum over bins of |bin| / N * |mean confidence - accuracy|.

    Bin i holds confidences in [i/bins, (i+1)/bins); 1.0 goes to the last bin.
    """
    if len(confidences) != len(outcomes):
        raise ValueError("confidences and outcomes differ in length")
    if not confidences:
        raise ValueError("no predictions")
    conf_sum = [0.0] * bins
    hit_sum = [0.0] * bins
    count = [0] * bins
    for c, y in zip(confidences, outcomes):
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"confidence {c} outside [0, 1]")
        i = min(int(c * bins), bins - 1)
        conf_sum[i] += c
        hit_sum[i] += 1.0 if y else 0.0
        count[i] += 1
    n = len(confidences)
    return sum(abs(conf_sum[i] - hit_sum[i]) / n for i in range(bins) if count[i])


def distinct_ngram_ratio(texts: Sequence[str], n: int = 1) -> float:
    grams = []
    for t in texts:
        toks = t.split()
        grams.extend(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))
    if not grams:
        return 0.0
    return len(set(grams)) / len(grams)


def batch_diversity(candidates: Sequence[str], n: int = 1) -> Optional[float]:
    """Mean distinct-n ratio over all candidate pairs of one proposal batch."""
    if len(candidates) < 2:
        return None
    vals = [distinct_ngram_ratio(pair, n) for pair in itertools.combinations(candidates, 2)]
    return sum(vals) / len(vals)


def node_paths(log: RunLog) -> dict[int, tuple[str, ...]]:
    """Thought sequence of every created node, rebuilt from nodeCreated events."""
    paths: dict[int, tuple[str, ...]] = {}
    for e in log.of_type("nodeCreated"):
        parent = e["parent"]
        paths[e["node"]] = () if parent is None else paths[parent] + (e["thought"],)
    return paths


def reachability_labels(log: RunLog, domain: Domain, max_depth: Optional[int] = None) -> dict[int, bool]:
    """Per scored node: can a goal still be reached from it (within the depth limit)?

    Uses the domain's exhaustive solver, so it is only available for
    desk-scale instances.
    """
    labels = {}
    paths = node_paths(log)
    scored = {e["node"] for e in log.of_type("nodeScored")}
    for nid in scored:
        texts = paths[nid]
        state = State(domain.prompt, tuple(Thought(t) for t in texts))
        steps = domain.optimal_remaining(state)
        ok = steps is not None and (max_depth is None or steps <= max_depth - len(texts))
        labels[nid] = ok
    return labels


def _scores(log: RunLog) -> dict[int, dict]:
    return {e["node"]: e for e in log.of_type("nodeScored")}


def sibling_accuracy(log: RunLog, labels: Labels) -> tuple[float, int]:
    """Correctly ordered (positive, negative) sibling pairs, ties counted as half.

    Returns (sum of credit, number of pairs).
    """
    scores = _scores(log)
    parents: dict[int, list[int]] = {}
    for e in log.of_type("nodeCreated"):
        if e["parent"] is not None:
            parents.setdefault(e["parent"], []).append(e["node"])
    credit, pairs = 0.0, 0
    for kids in parents.values():
        rated = [k for k in kids if k in scores and k in labels and scores[k].get("h_success") is not None]
        pos = [k for k in rated if labels[k]]
        neg = [k for k in rated if not labels[k]]
        for a in pos:
            for b in neg:
                ha, hb = scores[a]["h_success"], scores[b]["h_success"]
                credit += 1.0 if ha > hb else 0.5 if ha == hb else 0.0
                pairs += 1
    return credit, pairs


def calibration_points(log: RunLog, labels: Labels) -> tuple[list[float], list[bool]]:
    """(h_success, label) for every labeled non-root scored node."""
    roots = {e["node"] for e in log.of_type("nodeCreated") if e["parent"] is None}
    conf, hit = [], []
    for nid, e in sorted(_scores(log).items()):
        if nid in roots or nid not in labels or e.get("h_success") is None:
            continue
        conf.append(min(1.0, max(0.0, float(e["h_success"]))))
        hit.append(bool(labels[nid]))
    return conf, hit


# -- aggregate ---------------------------------------------------------------

def compute_metrics(logs: Sequence[RunLog], labels: Optional[Sequence[Optional[Labels]]] = None,
                    ngram_n: int = 1, bins: int = 10) -> MetricsReport:
    if labels is not None and len(labels) != len(logs):
        raise ValueError("labels must align with logs")
    solved = 0
    expansions = generated = tokens = calls = paths = 0
    diversities: list[float] = []
    credit, pairs = 0.0, 0
    conf: list[float] = []
    hit: list[bool] = []
    for i, log in enumerate(logs):
        goals = log.of_type("goalFound")
        solved += bool(goals)
        paths += len({tuple(g["plan"]) for g in goals})
        for e in log.of_type("nodeExpanded"):
            expansions += 1
            generated += len(e["candidates"])
            d = batch_diversity(e["candidates"], ngram_n)
            if d is not None:
                diversities.append(d)
        for e in log.of_type("backendCall"):
            calls += 1
            tokens += e["completion_tokens"]
        lab = None if labels is None else labels[i]
        if lab:
            c, p = sibling_accuracy(log, lab)
            credit, pairs = credit + c, pairs + p
            xs, ys = calibration_points(log, lab)
            conf += xs
            hit += ys
    n = len(logs)
    return MetricsReport(
        instances=n,
        success_rate=solved / n if n else 0.0,
        expansions=expansions,
        generated_thoughts=generated,
        tokens=tokens,
        backend_calls=calls,
        distinct_valid_paths=paths,
        candidate_diversity=sum(diversities) / len(diversities) if diversities else None,
        discriminative_accuracy=credit / pairs if pairs else None,
        calibration_error=expected_calibration_error(conf, hit, bins) if conf else None,
    )

