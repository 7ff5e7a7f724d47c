"""Tree-of-thoughts reasoning as heuristic search over thought sequences."""
from .core import (Node, NodeStatus, Problem, SearchBudget, SearchStats, SearchTree, State, Thought,
                   extend_state, reconstruct_path, root_state)
from .errors import ConfigError, InvalidStateError, TotSearchError
from .generation import (Decoding, DiversityConfig, DomainActions, Grammar, Length, ProposalConfig,
                         Semantic, propose_successors)
from .scoring import Combiner, CostModel, HeuristicModel, invert_success, score_node
from .search import (Beam, BestFirst, GreedyDfs, LocalBranch, LocalThreshold, Lts, Mcts,
                     SearchResult, SearchRun, StrategyConfig, run_search)

__version__ = "0.1.0"
