"""Shared fixtures-as-functions for the search, harness and acceptance tests."""
from __future__ import annotations

from totsearch.backends import ScriptedOracle
from totsearch.core import SearchBudget
from totsearch.domains import bundled_instance
from totsearch.generation import DomainActions, ProposalConfig
from totsearch.scoring import CostModel, HeuristicModel
from totsearch.search import BestFirst, StrategyConfig, run_search

Z1 = "Pick block `A' from `B' and place it on the table."
Z2 = "Pick block `B' from `C' and place it on block `A'."
Z3 = ["Pick block `A' from the table and place it on block `C'.",
      "Pick block `C' from the table and place it on block `B'.",
      "Pick block `B' from block `A' and place it on the table."]


def case_study_run():
    """Best-first on the three-block instance with a scripted proposer."""
    d = bundled_instance("blocks3_c_on_b")
    be = ScriptedOracle(d, {(): [Z1], (Z1,): [Z2], (Z1, Z2): Z3})
    return run_search(d.problem(), be, ProposalConfig("independent", branch=3),
                      constraints=[DomainActions(d.is_action)], cost=CostModel("uniform"),
                      heuristic=HeuristicModel("value", scale="cost", inversion="identity"),
                      config=StrategyConfig(BestFirst(), budget=SearchBudget(max_depth=10)))


def bfs_kwargs(d, branch=30, max_depth=20, **cfg):
    return dict(constraints=[DomainActions(d.is_action)], cost=CostModel("uniform"),
                config=StrategyConfig(BestFirst(), dedupe=True, budget=SearchBudget(max_depth=max_depth), **cfg))
