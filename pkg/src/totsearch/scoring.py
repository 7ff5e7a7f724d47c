"""Path costs, heuristics and node priorities.

Heuristics come in two scales.  Success-scale values live in [0, 1] and are
maximised; they are turned into cost-scale values before being combined
with the path cost.  Cost-scale values (remaining-step estimates, external
costs) are used as-is, and a success value ``1 / (1 + h_cost)`` is kept
alongside for MCTS backups and calibration.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Literal, Mapping, Optional

from .core import Node, State
from .errors import ConfigError, EvaluationError, ScoringError

log = logging.getLogger(__name__)

DEFAULT_LABELS = {"sure": 2.0, "maybe": 1.0, "impossible": 0.0}
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class CostModel:
    kind: Literal["uniform", "none", "nll"] = "uniform"
    length_normalize: bool = False

    def __post_init__(self):
        if self.kind not in ("uniform", "none", "nll"):
            raise ConfigError(f"unknown cost model {self.kind!r}")


@dataclass(frozen=True)
class HeuristicModel:
    """Which heuristic produces h and how it is brought onto the cost scale.

    kind: ``value`` (evaluator backend), ``probability`` (sequence
    probability), ``external`` (callback), ``none`` (h = 0).
    scale: how numeric replies/callback values are read.  Labels are always
    success-scale.
    """

    kind: Literal["value", "probability", "external", "none"] = "value"
    scale: Literal["success", "cost"] = "success"
    inversion: Literal["reciprocal", "negLog", "identity"] = "reciprocal"
    epsilon: float = DEFAULT_EPSILON
    labels: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_LABELS))
    value_range: tuple[float, float] = (0.0, 10.0)
    callback: Optional[Callable[[State], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("value", "probability", "external", "none"):
            raise ConfigError(f"unknown heuristic {self.kind!r}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        if self.inversion == "identity" and self.scale != "cost" and self.kind != "none":
            raise ConfigError("identity inversion needs cost-scale values")
        if self.kind == "external" and self.callback is None:
            raise ConfigError("external heuristic needs a callback")
        lo, hi = self.value_range
        if not hi > lo:
            raise ConfigError("value_range must be increasing")

    @classmethod
    def zero(cls) -> "HeuristicModel":
        return cls(kind="none", scale="cost", inversion="identity")


@dataclass(frozen=True)
class Combiner:
    kind: Literal["additive", "ratio"] = "additive"

    def __post_init__(self):
        if self.kind not in ("additive", "ratio"):
            raise ConfigError(f"unknown combiner {self.kind!r}")


def _logprobs(s: State, what: str) -> list[float]:
    out = []
    for i, z in enumerate(s.thoughts, start=1):
        if z.logprob is None:
            raise ScoringError(f"{what} needs a logprob for the thought at depth {i}", depth=i)
        out.append(z.logprob)
    return out


def path_cost(s: State, m: CostModel) -> float:
    if m.kind == "uniform":
        return float(s.depth)
    if m.kind == "none":
        return 0.0
    # fsum is exactly rounded, so the result does not depend on thought order
    total = -math.fsum(_logprobs(s, "NLL cost")) + 0.0
    if m.length_normalize:
        tokens = sum(z.token_count for z in s.thoughts)
        return total / tokens if tokens else 0.0
    return total


def invert_success(hs: float, inversion: str = "reciprocal", epsilon: float = DEFAULT_EPSILON) -> float:
    """Map a success-scale value to a cost; both inversions send 1 to 0."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    hs = min(1.0, max(epsilon, hs))
    if inversion == "reciprocal":
        return 1.0 / hs - 1.0
    if inversion == "negLog":
        return -math.log(hs)
    if inversion == "identity":
        return hs
    raise ValueError(f"unknown inversion {inversion!r}")


def categorical_to_score(label: str, mapping: Mapping[str, float] = DEFAULT_LABELS) -> float:
    """Case-insensitive label lookup, rescaled by the mapping maximum."""
    table = {k.lower(): v for k, v in mapping.items()}
    key = label.strip().lower()
    if key not in table:
        raise EvaluationError(f"unknown label {label!r}")
    top = max(table.values())
    return table[key] / top if top else 0.0


def sequence_probability(s: State) -> float:
    return math.exp(math.fsum(_logprobs(s, "sequence probability")))


_NUMBER = re.compile(r"-?\d+(?:\.\d+)?")


def parse_scalar(text: str) -> float:
    """First number in a free-text reply."""
    m = _NUMBER.search(text)
    if m is None:
        raise EvaluationError(f"no number in reply {text!r}")
    return float(m.group())


def success_from_reply(reply, heur: HeuristicModel) -> tuple[float, Optional[float]]:
    """Turn an evaluator reply into (h_success, h_cost or None)."""
    if reply.label is not None:
        return categorical_to_score(reply.label, heur.labels), None
    if reply.value is None:
        raise EvaluationError("evaluator reply carries neither value nor label")
    v = float(reply.value)
    if heur.scale == "cost":
        hc = max(0.0, v)
        return 1.0 / (1.0 + hc), hc
    lo, hi = heur.value_range
    return min(1.0, max(0.0, (v - lo) / (hi - lo))), None


def score_node(n: Node, cost: CostModel, heur: HeuristicModel, comb: Combiner = Combiner(),
               evaluate: Optional[Callable[[State], object]] = None, *, is_goal: bool = False) -> Node:
    """Populate g, h_success, h_cost and f on ``n`` in place and return it.

    Goal nodes skip the heuristic (h_success = 1, h_cost = 0).  An evaluator
    reply that cannot be interpreted maps to the worst score with a warning.
    """
    n.g = path_cost(n.state, cost)
    hc: Optional[float] = None
    if is_goal:
        hs, hc = 1.0, 0.0
    elif heur.kind == "none":
        hs, hc = 1.0, 0.0
    elif heur.kind == "probability":
        hs = sequence_probability(n.state)
    elif heur.kind == "external":
        v = float(heur.callback(n.state))
        if heur.scale == "cost":
            hc = max(0.0, v)
            hs = 1.0 / (1.0 + hc)
        else:
            hs = min(1.0, max(0.0, v))
    else:
        if evaluate is None:
            raise ConfigError("value heuristic needs an evaluator")
        try:
            hs, hc = success_from_reply(evaluate(n.state), heur)
        except EvaluationError as exc:
            log.warning("node %d: %s; using worst score", n.id, exc)
            hs, hc = 0.0, None
    if hc is None:
        inversion = "reciprocal" if heur.inversion == "identity" else heur.inversion
        hc = invert_success(hs, inversion, heur.epsilon)
    n.h_success = hs
    n.h_cost = hc
    if comb.kind == "additive":
        n.f = n.g + n.h_cost
    else:
        n.f = n.g / max(heur.epsilon, hs)
    n.scored = True
    return n
