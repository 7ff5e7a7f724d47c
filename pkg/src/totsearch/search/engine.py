"""Search control loop shared by all strategies.

One expansion runs: propose successors -> validate -> detect duplicates ->
goal test (T1/T3) -> score -> local pruning.  Strategies differ only in how
they pick the next node to expand.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..backends.base import Backend, BackendError, GenerationRequest
from ..core import Node, NodeStatus, Problem, SearchStats, SearchTree, State, Thought, extend_state
from ..errors import ConfigError, GenerationError, InvalidStateError
from ..generation import Constraint, ProposalConfig, ProposalReport, propose_successors
from ..runlog import RunLog
from ..scoring import Combiner, CostModel, HeuristicModel, score_node
from .config import (
    Beam,
    BestFirst,
    BudgetExhausted,
    GreedyDfs,
    LocalBranch,
    LocalThreshold,
    Lts,
    Mcts,
    SearchAborted,
    SearchResult,
    StrategyConfig,
)
from .pruning import beam_prune, local_branch_prune, threshold_prune

log = logging.getLogger(__name__)

_LIVE = (NodeStatus.OPEN, NodeStatus.GOAL)


def derive_seed(seed: int, node_id: int, round_: int) -> int:
    return ((seed * 1_000_003 + node_id) * 10_007 + round_) % (2**63)


class MeteredBackend(Backend):
    """Counts calls and usage, enforces call/token budgets, logs backendCall."""

    def __init__(self, inner: Backend, run: "SearchRun"):
        self.inner = inner
        self.run = run
        self.node_id: Optional[int] = None

    def _call(self, kind: str, fn, *args):
        stats, budget = self.run.stats, self.run.config.budget
        if budget.max_backend_calls is not None and stats.backend_calls >= budget.max_backend_calls:
            raise BudgetExhausted("backend calls")
        if budget.max_tokens is not None and stats.tokens >= budget.max_tokens:
            raise BudgetExhausted("tokens")
        reply = fn(*args)
        u = reply.usage
        stats.backend_calls += 1
        stats.tokens += u.completion_tokens
        stats.prompt_tokens += u.prompt_tokens
        self.run.log.emit("backendCall", kind=kind, node=self.node_id,
                          prompt_tokens=u.prompt_tokens, completion_tokens=u.completion_tokens)
        return reply

    def generate(self, state: State, request: GenerationRequest):
        return self._call("generate", self.inner.generate, state, request)

    def evaluate(self, state):
        return self._call("evaluate", self.inner.evaluate, state)

    def test_goal(self, state):
        return self._call("test_goal", self.inner.test_goal, state)

    def validate(self, state):
        return self._call("validate", self.inner.validate, state)


@dataclass
class StepEvent:
    """What one selection step did: goal | expanded | skipped | deadEnd."""

    kind: str
    node_id: Optional[int]
    children: list[int] = field(default_factory=list)


class SearchRun:
    """One search over one problem.  Not reusable: call ``run()`` once."""

    def __init__(self, problem: Problem, backend: Backend, proposal: ProposalConfig,
                 constraints: Sequence[Constraint] = (), cost: CostModel = CostModel(),
                 heuristic: HeuristicModel = HeuristicModel.zero(), combiner: Combiner = Combiner(),
                 config: StrategyConfig = StrategyConfig(), validate: bool = True,
                 goal_mode: Optional[str] = None):
        self.problem = problem
        self.proposal = proposal
        self.constraints = list(constraints)
        self.cost = cost
        self.heuristic = heuristic
        self.combiner = combiner
        self.config = config
        self.validate = validate
        if goal_mode is None:
            goal_mode = problem.goal_kind if problem.goal_test is not None else "T2"
        if goal_mode not in ("T1", "T2", "T3"):
            raise ConfigError(f"unknown goal mode {goal_mode!r}")
        if goal_mode != "T2" and problem.goal_test is None:
            raise ConfigError(f"goal mode {goal_mode} needs a domain goal test")
        self.goal_mode = goal_mode
        if isinstance(config.strategy, Lts):
            if combiner.kind != "ratio" or cost.kind != "uniform":
                raise ConfigError("LTS needs the ratio combiner over uniform (depth) cost")
        self.tree = SearchTree()
        self.log = RunLog()
        self.stats = SearchStats()
        self.backend = MeteredBackend(backend, self)
        self.solutions: list[int] = []
        self.goal_id: Optional[int] = None
        self._rounds: dict[int, int] = {}
        self._seen_keys: set = set()
        self._goal_pending: set[int] = set()
        self._budget_hit = False
        self._started = False

    # -- node bookkeeping ----------------------------------------------------
    def _new_node(self, state: State, parent: Optional[Node]) -> Node:
        node = self.tree.add(state, None if parent is None else parent.id)
        self.log.emit("nodeCreated", node=node.id, parent=node.parent_id, depth=node.depth,
                      thought=state.thoughts[-1].text if state.thoughts else None)
        return node

    def _drop(self, node: Node, reason: str, status=NodeStatus.PRUNED) -> None:
        if node.status == NodeStatus.GOAL:
            return
        node.set_status(status)
        self.stats.pruned_nodes += 1
        self.log.emit("nodePruned", node=node.id, reason=reason, status=status.value)

    def _mark_goal(self, node: Node) -> None:
        node.set_status(NodeStatus.GOAL)
        self.solutions.append(node.id)
        self.log.emit("goalFound", node=node.id, depth=node.depth, plan=list(node.state.texts))

    def _confirm_goals(self, nodes) -> None:
        for n in nodes:
            if n.id in self._goal_pending:
                self._goal_pending.discard(n.id)
                self._mark_goal(n)

    def _score(self, node: Node, is_goal: bool = False) -> None:
        self.backend.node_id = node.id
        before = self.stats.tokens
        score_node(node, self.cost, self.heuristic, self.combiner, self.backend.evaluate,
                   is_goal=is_goal or node.status == NodeStatus.GOAL)
        node.tokens_spent += self.stats.tokens - before
        self.log.emit("nodeScored", node=node.id, g=node.g, h_cost=node.h_cost,
                      h_success=node.h_success, f=node.f)

    def _check_validity(self, node: Node) -> tuple[bool, str]:
        if not self.validate:
            return True, ""
        if self.problem.validator is not None:
            return self.problem.validator(node.state)
        self.backend.node_id = node.id
        verdict = self.backend.validate(node.state)
        return verdict.verdict, verdict.reason

    def _goal_on_selection(self, node: Node) -> bool:
        if node.status == NodeStatus.GOAL:
            return True
        if self.goal_mode == "T2":
            self.backend.node_id = node.id
            if self.backend.test_goal(node.state).verdict:
                self._mark_goal(node)
                return True
        return False

    def create_root(self) -> Node:
        root = self._new_node(State(self.problem.prompt), None)
        # the root is never evaluated: g = 0, h_success = 1
        root.g, root.h_cost, root.h_success, root.f, root.scored = 0.0, 0.0, 1.0, 0.0, True
        self.log.emit("nodeScored", node=root.id, g=0.0, h_cost=0.0, h_success=1.0, f=0.0)
        if self.problem.projector is not None and self.config.dedupe:
            self._seen_keys.add(self.problem.projector(root.state))
        if self.goal_mode != "T2" and self.problem.goal_test(root.state):
            self._mark_goal(root)
        return root

    # -- expansion -----------------------------------------------------------
    def _check_expansion_budget(self) -> Optional[int]:
        budget = self.config.budget
        if budget.max_expansions is not None and self.stats.expansions >= budget.max_expansions:
            raise BudgetExhausted("expansions")
        return self._thought_limit()

    def _thought_limit(self) -> Optional[int]:
        budget, stats = self.config.budget, self.stats
        if budget.max_generated_thoughts is None:
            return None
        left = budget.max_generated_thoughts - stats.generated_thoughts
        if self.proposal.strategy == "diversity":
            left //= 2
        if left <= 0:
            raise BudgetExhausted("generated thoughts")
        return left

    def expand(self, node: Node, merge: bool = False) -> list[Node]:
        """Expand ``node``; return the new children that survived pruning.

        With ``merge`` (MCTS revisits) candidates matching an existing child
        are skipped, so only new distinct children are added.
        """
        if node.depth >= self.config.budget.max_depth:
            raise ValueError("node is at maximum depth")
        limit = self._check_expansion_budget()
        self.stats.expansions += 1
        existing = {c.state.thoughts[-1].text for c in self.tree.children(node.id)} if merge else set()
        b = self.proposal.branch * 2
        report = ProposalReport()
        thoughts: list[Thought] = []
        self.backend.node_id = node.id
        try:
            for _ in range(1 + self.proposal.retries):
                round_ = self._rounds.get(node.id, 0)
                self._rounds[node.id] = round_ + 1
                before = report.raw
                try:
                    thoughts = propose_successors(
                        node.state, self.proposal, self.backend, self.constraints,
                        seed=derive_seed(self.config.seed, node.id, round_), draw_offset=round_ * b,
                        limit=limit, report=report)
                finally:
                    self.stats.generated_thoughts += report.raw - before
                thoughts = [t for t in thoughts if t.text not in existing]
                if thoughts:
                    break
                if limit is not None:
                    limit = self._thought_limit()
        except BudgetExhausted:
            # keep log totals equal to the statistics for the interrupted expansion
            self.log.emit("nodeExpanded", node=node.id, children=[], kept=[],
                          candidates=report.candidates)
            raise
        if node.status == NodeStatus.OPEN:
            node.set_status(NodeStatus.EXPANDED)

        created, live = [], []
        for t in thoughts:
            child = self._new_node(extend_state(node.state, t), node)
            child.tokens_spent = report.tokens.get(t.text, t.token_count)
            created.append(child)
            ok, reason = self._check_validity(child)
            if not ok:
                self._drop(child, reason or "invalid", NodeStatus.INVALID)
                continue
            if self.config.dedupe and self.problem.projector is not None:
                try:
                    key = self.problem.projector(child.state)
                except InvalidStateError as exc:
                    self._drop(child, exc.reason, NodeStatus.INVALID)
                    continue
                if key in self._seen_keys:
                    self._drop(child, "duplicate world state")
                    continue
                self._seen_keys.add(key)
            # goal status is only assigned once the child survives pruning
            is_goal = self.goal_mode != "T2" and self.problem.goal_test(child.state)
            if is_goal:
                self._goal_pending.add(child.id)
            self._score(child, is_goal)
            live.append(child)

        kept = live
        p = self.config.pruning
        if isinstance(p, LocalBranch):
            kept = local_branch_prune(live, p.b)
        elif isinstance(p, LocalThreshold):
            kept = threshold_prune(live, p.threshold)
        kept_ids = {c.id for c in kept}
        for c in live:
            if c.id not in kept_ids:
                self._drop(c, "local pruning")
        kept = [c for c in live if c.id in kept_ids and c.status in _LIVE]
        if not isinstance(self.config.strategy, Beam):
            self._confirm_goals(kept)
        self.log.emit("nodeExpanded", node=node.id, children=[c.id for c in created],
                      kept=[c.id for c in kept], candidates=report.candidates)
        return kept

    # -- strategies ----------------------------------------------------------
    def best_first_step(self, frontier: list) -> StepEvent:
        """Pop the smallest (f, id) entry; stop on a goal, otherwise expand."""
        _, nid = heapq.heappop(frontier)
        node = self.tree[nid]
        if node.status in (NodeStatus.PRUNED, NodeStatus.INVALID, NodeStatus.EXPANDED):
            return StepEvent("skipped", nid)
        if self._goal_on_selection(node):
            return StepEvent("goal", nid)
        if node.depth >= self.config.budget.max_depth:
            return StepEvent("deadEnd", nid)
        children = self.expand(node)
        for c in children:
            heapq.heappush(frontier, (c.f, c.id))
        return StepEvent("expanded", nid, [c.id for c in children])

    def _run_best_first(self) -> None:
        root = self.create_root()
        frontier = [(root.f, root.id)]
        while frontier:
            event = self.best_first_step(frontier)
            if event.kind == "goal":
                if self.goal_id is None:
                    self.goal_id = event.node_id
                if self.config.satisficing:
                    return

    def greedy_dfs_step(self, stack: list) -> StepEvent:
        strat = self.config.strategy
        node = self.tree[stack.pop()]
        if node.status in (NodeStatus.PRUNED, NodeStatus.INVALID, NodeStatus.EXPANDED):
            return StepEvent("skipped", node.id)
        if self._goal_on_selection(node):
            return StepEvent("goal", node.id)
        if node.depth >= self.config.budget.max_depth:
            return StepEvent("deadEnd", node.id)
        children = self.expand(node)
        kept = threshold_prune(children, strat.threshold)
        kept = sorted(kept, key=lambda n: (n.f, n.id))
        over_ids = {c.id for c in kept[strat.child_limit:]}
        kept = kept[: strat.child_limit]
        kept_ids = {c.id for c in kept}
        for c in children:
            if c.id not in kept_ids:
                self._drop(c, "child limit" if c.id in over_ids else "threshold")
        for c in reversed(kept):
            stack.append(c.id)
        return StepEvent("expanded" if kept else "deadEnd", node.id, [c.id for c in kept])

    def _run_greedy_dfs(self) -> None:
        root = self.create_root()
        stack = [root.id]
        while stack:
            event = self.greedy_dfs_step(stack)
            if event.kind == "goal":
                if self.goal_id is None:
                    self.goal_id = event.node_id
                if self.config.satisficing:
                    return

    def _run_beam(self) -> None:
        k = self.config.strategy.width
        layer = [self.create_root()]
        for depth in range(self.config.budget.max_depth + 1):
            ranked = sorted(layer, key=lambda n: (n.f, n.id))
            goals = [n for n in ranked if self._goal_on_selection(n)]
            if goals:
                if self.goal_id is None:
                    self.goal_id = goals[0].id
                if self.config.satisficing:
                    return
            if depth == self.config.budget.max_depth:
                return
            children = []
            for n in ranked:
                if n.status != NodeStatus.GOAL:
                    children.extend(self.expand(n))
            layer = beam_prune(children, k)
            kept_ids = {c.id for c in layer}
            for c in children:
                if c.id not in kept_ids:
                    self._drop(c, "beam")
            self._confirm_goals(layer)
            if not layer:
                return

    def run(self) -> SearchResult:
        if self._started:
            raise RuntimeError("a SearchRun can only be run once")
        self._started = True
        strat = self.config.strategy
        try:
            if isinstance(strat, (BestFirst, Lts)):
                self._run_best_first()
            elif isinstance(strat, GreedyDfs):
                self._run_greedy_dfs()
            elif isinstance(strat, Beam):
                self._run_beam()
            elif isinstance(strat, Mcts):
                from .mcts import run_mcts
                run_mcts(self)
            else:
                raise ConfigError(f"unknown strategy {strat!r}")
        except BudgetExhausted as exc:
            log.info("budget exhausted: %s", exc)
            self._budget_hit = True
        except (BackendError, GenerationError) as exc:
            raise SearchAborted(str(exc), self._result()) from exc
        return self._result()

    def _result(self) -> SearchResult:
        if self.goal_id is None and self.solutions and not self.config.satisficing:
            self.goal_id = self.solutions[0]
        if self.goal_id is not None:
            outcome = "solved"
        elif self._budget_hit:
            outcome = "budgetExceeded"
        else:
            outcome = "exhausted"
        best = getattr(self, "best_path", None)
        if best is None:
            best = [] if self.goal_id is None else list(self.tree[self.goal_id].state.texts)
        return SearchResult(outcome, self.goal_id, list(self.solutions), self.stats, self.tree,
                            self.log, best)


def run_search(problem: Problem, backend: Backend, proposal: ProposalConfig, **kwargs) -> SearchResult:
    return SearchRun(problem, backend, proposal, **kwargs).run()
