from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from ..core import SearchBudget, SearchStats, SearchTree, reconstruct_path
from ..errors import ConfigError, TotSearchError
from ..runlog import RunLog


@dataclass(frozen=True)
class BestFirst:
    kind = "bestFirst"


@dataclass(frozen=True)
class Beam:
    width: int = 5
    kind = "beam"

    def __post_init__(self):
        if self.width < 1:
            raise ConfigError("beam width must be >= 1")


@dataclass(frozen=True)
class GreedyDfs:
    threshold: float = math.inf
    child_limit: int = 1_000_000
    kind = "greedyDfs"

    def __post_init__(self):
        if self.child_limit < 1:
            raise ConfigError("child_limit must be >= 1")


@dataclass(frozen=True)
class Lts:
    kind = "lts"


@dataclass(frozen=True)
class Mcts:
    exploration: float = math.sqrt(2)
    iterations: int = 100
    kind = "mcts"

    def __post_init__(self):
        if self.exploration <= 0:
            raise ConfigError("exploration constant must be > 0")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")


@dataclass(frozen=True)
class BeamPrune:
    k: int
    kind = "beamPrune"


@dataclass(frozen=True)
class LocalBranch:
    b: int
    kind = "localBranch"

    def __post_init__(self):
        if self.b < 1:
            raise ConfigError("b must be >= 1")


@dataclass(frozen=True)
class LocalThreshold:
    threshold: float
    kind = "localThreshold"


Strategy = Union[BestFirst, Beam, GreedyDfs, Lts, Mcts]
Pruning = Union[BeamPrune, LocalBranch, LocalThreshold]


@dataclass(frozen=True)
class StrategyConfig:
    strategy: Strategy = field(default_factory=BestFirst)
    pruning: Optional[Pruning] = None
    seed: int = 0
    budget: SearchBudget = field(default_factory=SearchBudget)
    # stop at the first verified goal; False collects goals until the budget runs out
    satisficing: bool = True
    # drop children whose world key was already generated
    dedupe: bool = False

    def __post_init__(self):
        s, p = self.strategy, self.pruning
        if isinstance(s, Mcts) and p is not None:
            raise ConfigError("MCTS takes no pruning policy")
        if isinstance(s, Beam):
            if p is None:
                object.__setattr__(self, "pruning", BeamPrune(s.width))
            elif not isinstance(p, BeamPrune) or p.k != s.width:
                raise ConfigError("beam strategy needs beamPrune with the same width")
        elif isinstance(p, BeamPrune):
            raise ConfigError("beamPrune only applies to the beam strategy")


class BudgetExhausted(Exception):
    """Raised inside a run when a budget bound stops further work."""


@dataclass
class SearchResult:
    outcome: str  # solved | exhausted | budgetExceeded
    goal_id: Optional[int]
    solutions: list[int]
    stats: SearchStats
    tree: SearchTree
    log: RunLog
    best_path: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.outcome == "solved" and not self.solutions:
            raise ValueError("solved result without solutions")

    @property
    def solved(self) -> bool:
        return self.outcome == "solved"

    def plan(self, node_id: Optional[int] = None) -> list[str]:
        nid = self.goal_id if node_id is None else node_id
        if nid is None:
            return []
        return [t.text for t in reconstruct_path(nid, self.tree)]

    def stored_nodes(self) -> int:
        return sum(1 for n in self.tree if n.status.value not in ("pruned", "invalid"))


class SearchAborted(TotSearchError):
    """Hard backend failure; ``result`` holds the partial run."""

    def __init__(self, message: str, result: SearchResult):
        super().__init__(message)
        self.result = result
