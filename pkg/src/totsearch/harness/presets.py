"""Named component configurations for published ToT-style systems.

Each preset carries a manifest of component tags (sampling, constraints,
pruning, strategy, cost, heuristic, goal test) so a test can check that the
built components really match the advertised recipe.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..core import SearchBudget
from ..domains.base import Domain
from ..errors import ConfigError
from ..generation import DiversityConfig, DomainActions, ProposalConfig, Semantic
from ..scoring import Combiner, CostModel, HeuristicModel
from ..search.config import (Beam, BestFirst, GreedyDfs, LocalBranch, LocalThreshold, Lts, Mcts,
                             StrategyConfig)


@dataclass
class Components:
    """Everything a search run needs besides the problem and the backend."""

    proposal: ProposalConfig
    constraints: list = field(default_factory=list)
    cost: CostModel = field(default_factory=CostModel)
    heuristic: HeuristicModel = field(default_factory=HeuristicModel.zero)
    combiner: Combiner = field(default_factory=Combiner)
    config: StrategyConfig = field(default_factory=StrategyConfig)
    goal_mode: Optional[str] = None
    validate: bool = True
    # how the oracle/mock evaluator should answer for this recipe
    evaluator_mode: str = "steps"
    horizon: Optional[int] = None


@dataclass(frozen=True)
class Preset:
    name: str
    domain: str
    manifest: dict
    description: str
    build: Callable[[Domain, int], Components]


def _manifest(sampling, constraints, pruning, strategy, cost, heuristic, goal) -> dict:
    return {"sampling": sampling, "constraints": list(constraints), "pruning": pruning,
            "strategy": strategy, "cost": cost, "heuristic": heuristic, "goal": goal}


def _depth_for(domain: Domain, default: int = 8) -> int:
    numbers = getattr(domain, "numbers", None)
    return max(1, len(numbers) - 1) if numbers is not None else default


# a 4-number Game of 24 state has at most 36 distinct next steps
_ENUMERATE_ALL = 40


def _yao_game24_beam(d: Domain, seed: int, width: int = 5) -> Components:
    depth = _depth_for(d)
    return Components(
        proposal=ProposalConfig("enumerated", branch=_ENUMERATE_ALL),
        constraints=[DomainActions(d.is_action)],
        cost=CostModel("uniform"),
        heuristic=HeuristicModel("value", scale="success", inversion="reciprocal"),
        config=StrategyConfig(Beam(width), seed=seed, budget=SearchBudget(max_depth=depth)),
        goal_mode="T1", evaluator_mode="label", horizon=depth)


def _yao_dfs(d: Domain, seed: int) -> Components:
    depth = _depth_for(d)
    # label replies: sure -> h_cost 0, impossible -> h_cost 1/eps - 1; prune the latter
    return Components(
        proposal=ProposalConfig("independent", branch=3),
        cost=CostModel("none"),
        heuristic=HeuristicModel("value", scale="success", inversion="reciprocal"),
        config=StrategyConfig(GreedyDfs(threshold=1.0), LocalThreshold(1.0), seed=seed,
                              budget=SearchBudget(max_depth=depth, max_expansions=200)),
        goal_mode="T3", evaluator_mode="label", horizon=depth)


def _pendurkar_lts(d: Domain, seed: int) -> Components:
    depth = _depth_for(d)
    return Components(
        proposal=ProposalConfig("independent", branch=4),
        constraints=[DomainActions(d.is_action)],
        cost=CostModel("uniform"),
        heuristic=HeuristicModel("probability"),
        combiner=Combiner("ratio"),
        config=StrategyConfig(Lts(), LocalBranch(3), seed=seed,
                              budget=SearchBudget(max_depth=depth, max_expansions=500)),
        goal_mode=d.goal_kind)


def _hao_mcts(d: Domain, seed: int, iterations: int = 64) -> Components:
    depth = _depth_for(d)
    return Components(
        proposal=ProposalConfig("independent", branch=3),
        constraints=[DomainActions(d.is_action)],
        cost=CostModel("none"),
        heuristic=HeuristicModel("value", scale="success", value_range=(0.0, 10.0)),
        config=StrategyConfig(Mcts(iterations=iterations), seed=seed,
                              budget=SearchBudget(max_depth=depth)),
        goal_mode="T3", evaluator_mode="scalar", horizon=depth)


def _zhang_bfs(d: Domain, seed: int) -> Components:
    depth = _depth_for(d)
    return Components(
        proposal=ProposalConfig("enumerated", branch=_ENUMERATE_ALL),
        constraints=[Semantic(d.validate)],
        cost=CostModel("none"),
        heuristic=HeuristicModel("value", scale="cost", inversion="identity"),
        # unreachable states get the oracle's sentinel step count; cut them
        config=StrategyConfig(BestFirst(), LocalThreshold(float(depth)), seed=seed,
                              budget=SearchBudget(max_depth=depth, max_expansions=500)),
        goal_mode="T2", evaluator_mode="steps", horizon=depth)


def _diverse_beam(d: Domain, seed: int) -> Components:
    depth = _depth_for(d)
    return Components(
        proposal=ProposalConfig("diversity", branch=20, diversity=DiversityConfig(ngram_n=2, min_distinct=1)),
        constraints=[DomainActions(d.is_action)],
        cost=CostModel("nll"),
        heuristic=HeuristicModel("value", scale="success", inversion="negLog"),
        config=StrategyConfig(Beam(3), seed=seed, budget=SearchBudget(max_depth=depth)),
        goal_mode=d.goal_kind, evaluator_mode="label", horizon=depth)


def _case_study_bfs(d: Domain, seed: int) -> Components:
    depth = _depth_for(d)
    return Components(
        proposal=ProposalConfig("independent", branch=3, retries=0),
        constraints=[DomainActions(d.is_action)],
        cost=CostModel("uniform"),
        heuristic=HeuristicModel("value", scale="cost", inversion="identity"),
        config=StrategyConfig(BestFirst(), seed=seed,
                              budget=SearchBudget(max_depth=depth, max_expansions=500)),
        goal_mode=d.goal_kind, evaluator_mode="steps")


PRESETS: dict[str, Preset] = {p.name: p for p in [
    Preset("yao-game24-beam", "game24",
           _manifest("S3", ["C1"], "P1", "beam", "G1", "H1", "T1"),
           "enumerated proposals, layer beam over categorical value labels", _yao_game24_beam),
    Preset("yao-crosswords-dfs", "blocksworld",
           _manifest("S1", [], "P3", "greedyDfs", "G2", "H1", "T3"),
           "depth-first search with a value threshold, applied to Blocksworld", _yao_dfs),
    Preset("pendurkar-lts", "blocksworld",
           _manifest("S1", ["C1"], "P2", "lts", "G1", "H2", "T3"),
           "Levin tree search: depth over sequence probability", _pendurkar_lts),
    Preset("hao-blocksworld-mcts", "blocksworld",
           _manifest("S1", ["C1"], None, "mcts", "G2", "H1", "T3"),
           "UCT with evaluator values at the leaves", _hao_mcts),
    Preset("zhang-bfs", "game24",
           _manifest("S3", ["C4"], "P3", "bestFirst", "G2", "H1", "T2"),
           "best-first on evaluator step estimates, goal judged by the backend", _zhang_bfs),
    Preset("diverse-beam", "game24",
           _manifest("S2", ["C1"], "P1", "beam", "G3", "H1", "T1"),
           "diversity-filtered proposals, NLL path cost", _diverse_beam),
    Preset("case-study-bfs", "blocksworld",
           _manifest("S1", ["C1"], None, "bestFirst", "G1", "H1", "T3"),
           "best-first on depth plus estimated remaining steps", _case_study_bfs),
]}


def load_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None


_SAMPLING_TAGS = {"independent": "S1", "diversity": "S2", "enumerated": "S3"}
_CONSTRAINT_TAGS = {"domain": "C1", "grammar": "C2", "length": "C3", "semantic": "C4"}
_PRUNING_TAGS = {"beamPrune": "P1", "localBranch": "P2", "localThreshold": "P3"}
_COST_TAGS = {"uniform": "G1", "none": "G2", "nll": "G3"}
_HEURISTIC_TAGS = {"value": "H1", "probability": "H2", "external": "H3", "none": None}


def describe(c: Components) -> dict:
    """Component tags actually present in a built configuration."""
    p = c.config.pruning
    return _manifest(
        _SAMPLING_TAGS[c.proposal.strategy],
        [_CONSTRAINT_TAGS[x.kind] for x in c.constraints],
        None if p is None else _PRUNING_TAGS[p.kind],
        c.config.strategy.kind,
        _COST_TAGS[c.cost.kind],
        _HEURISTIC_TAGS[c.heuristic.kind],
        c.goal_mode,
    )
