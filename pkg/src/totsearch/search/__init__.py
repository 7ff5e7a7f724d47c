from .config import (Beam, BeamPrune, BestFirst, BudgetExhausted, GreedyDfs, LocalBranch,
                     LocalThreshold, Lts, Mcts, SearchAborted, SearchResult, StrategyConfig)
from .engine import MeteredBackend, SearchRun, StepEvent, derive_seed, run_search
from .mcts import recommended_path, run_mcts
from .pruning import beam_prune, local_branch_prune, threshold_prune

__all__ = [
    "Beam", "BeamPrune", "BestFirst", "BudgetExhausted", "GreedyDfs", "LocalBranch",
    "LocalThreshold", "Lts", "Mcts", "SearchAborted", "SearchResult", "StrategyConfig",
    "MeteredBackend", "SearchRun", "StepEvent", "derive_seed", "run_search",
    "recommended_path", "run_mcts", "beam_prune", "local_branch_prune", "threshold_prune",
]
