"""UCT tree search with leaf evaluation instead of rollouts.

Each iteration descends by UCT, evaluates one leaf and backs its
success-scale value up the path.  A visited leaf without live children is
expanded again, so stochastic proposal mechanisms get resampled; only new
distinct thoughts are added as children.
"""
from __future__ import annotations

import logging
import math
from typing import Optional

from ..backends.base import BackendError
from ..core import Node, NodeStatus
from ..errors import GenerationError
from .config import Mcts

log = logging.getLogger(__name__)

_SELECTABLE = (NodeStatus.OPEN, NodeStatus.EXPANDED, NodeStatus.GOAL)


def uct_score(child: Node, parent_visits: int, c: float) -> float:
    explore = c * math.sqrt(math.log(parent_visits + 1) / (child.visits + 1))
    return child.value + explore


def select_child(run, node: Node, c: float) -> Node:
    """Unvisited children first (lowest id), otherwise UCT argmax, ties to lowest id."""
    kids = [k for k in run.tree.children(node.id) if k.status in _SELECTABLE]
    for k in kids:
        if k.visits == 0:
            return k
    return max(kids, key=lambda k: (uct_score(k, node.visits, c), -k.id))


def mcts_iterate(run, cfg: Mcts) -> Optional[Node]:
    """One selection/expansion/evaluation/backup pass.  Returns a new goal node, if any."""
    tree = run.tree
    max_depth = run.config.budget.max_depth
    node = tree.root
    path = [node]
    while node.status != NodeStatus.GOAL and node.depth < max_depth:
        kids = [k for k in tree.children(node.id) if k.status in _SELECTABLE]
        if not kids:
            break
        node = select_child(run, node, cfg.exploration)
        path.append(node)
        if node.visits == 0:
            break

    leaf = path[-1]
    new_goal = None
    if leaf.status == NodeStatus.GOAL:
        value = 1.0
    elif leaf.visits == 0 and leaf is not tree.root:
        value = leaf.h_success if leaf.h_success is not None else 0.0
    elif leaf.depth >= max_depth:
        value = 0.0
    else:
        n_before = len(tree)
        try:
            children = run.expand(leaf, merge=True)
        except (BackendError, GenerationError) as exc:
            if len(tree) == n_before:
                log.warning("iteration failed at node %d: %s", leaf.id, exc)
                return None
            raise
        if children:
            child = children[0]
            path.append(child)
            if child.status == NodeStatus.GOAL:
                value = 1.0
                new_goal = child
            else:
                value = child.h_success
        else:
            value = 0.0
        for c in children[1:]:
            if c.status == NodeStatus.GOAL and new_goal is None:
                new_goal = c

    for n in path:
        n.visits += 1
        n.value_sum += value
    path[-1].leaf_evaluations += 1
    return new_goal


def recommended_path(run) -> list[str]:
    """Most-visited descent from the root (ties: higher value, then lower id)."""
    node = run.tree.root
    while True:
        kids = [k for k in run.tree.children(node.id) if k.status in _SELECTABLE and k.visits > 0]
        if not kids:
            return list(node.state.texts)
        node = max(kids, key=lambda k: (k.visits, k.value, -k.id))


def run_mcts(run) -> None:
    cfg: Mcts = run.config.strategy
    run.create_root()
    try:
        for _ in range(cfg.iterations):
            goal = mcts_iterate(run, cfg)
            if goal is not None and run.goal_id is None:
                run.goal_id = goal.id
            if run.goal_id is not None and run.config.satisficing:
                break
    finally:
        if run.goal_id is not None:
            run.best_path = list(run.tree[run.goal_id].state.texts)
        else:
            run.best_path = recommended_path(run)
