"""Thought-sequence states, search-tree nodes and budgets.

A state is the problem prompt followed by the ordered thoughts produced so
far.  Nodes wrap a state with the bookkeeping a search strategy needs
(g/h/f values, status, MCTS statistics).  Full states are stored per node;
``reconstruct_path`` walks parent links and is only used for compact logs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterator, Optional

from .errors import ConfigError, UnknownNodeError


def count_tokens(text: str) -> int:
    """Whitespace token count used by the oracle and mock backends."""
    return len(text.split())


@dataclass(frozen=True, eq=False)
class Thought:
    """One atomic reasoning step.

    Equality and hashing only look at the text, after one trailing newline
    is dropped.
    """

    text: str
    token_count: int = 0
    logprob: Optional[float] = None

    def __post_init__(self):
        text = self.text[:-1] if self.text.endswith("\n") else self.text
        object.__setattr__(self, "text", text)
        if not text:
            raise ValueError("thought text must be non-empty")
        if self.token_count <= 0:
            object.__setattr__(self, "token_count", max(1, count_tokens(text)))
        if self.logprob is not None and self.logprob > 0:
            raise ValueError(f"logprob must be <= 0, got {self.logprob}")

    def __eq__(self, other):
        if not isinstance(other, Thought):
            return NotImplemented
        return self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class State:
    prompt: str
    thoughts: tuple[Thought, ...] = ()

    def __post_init__(self):
        if not isinstance(self.thoughts, tuple):
            object.__setattr__(self, "thoughts", tuple(self.thoughts))

    @property
    def depth(self) -> int:
        return len(self.thoughts)

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.thoughts)

    def render(self) -> str:
        """Prompt followed by one thought per line."""
        return "\n".join((self.prompt,) + self.texts)


def extend_state(s: State, z: Thought) -> State:
    return State(s.prompt, s.thoughts + (z,))


def root_state(prompt: str) -> State:
    return State(prompt)


class NodeStatus(str, enum.Enum):
    OPEN = "open"
    EXPANDED = "expanded"
    PRUNED = "pruned"
    INVALID = "invalid"
    GOAL = "goal"


_TERMINAL = {NodeStatus.PRUNED, NodeStatus.INVALID, NodeStatus.GOAL}


@dataclass
class Node:
    id: int
    state: State
    parent_id: Optional[int] = None
    g: float = 0.0
    h_cost: float = 0.0
    h_success: Optional[float] = None
    f: float = 0.0
    status: NodeStatus = NodeStatus.OPEN
    visits: int = 0
    value_sum: float = 0.0
    tokens_spent: int = 0
    leaf_evaluations: int = 0
    scored: bool = False

    @property
    def depth(self) -> int:
        return self.state.depth

    @property
    def value(self) -> float:
        return self.value_sum / self.visits if self.visits else 0.0

    def set_status(self, status: NodeStatus) -> None:
        """Move along open -> {expanded, pruned, invalid, goal}."""
        status = NodeStatus(status)
        if status == self.status:
            return
        if self.status in _TERMINAL:
            raise ValueError(f"node {self.id}: cannot leave {self.status.value}")
        if self.status == NodeStatus.EXPANDED and status != NodeStatus.GOAL:
            raise ValueError(f"node {self.id}: cannot go from expanded to {status.value}")
        self.status = status


class SearchTree:
    """Node store owned by one search run.  Ids are dense, in creation order."""

    def __init__(self):
        self._nodes: list[Node] = []
        self._children: dict[int, list[int]] = {}

    def add(self, state: State, parent_id: Optional[int] = None) -> Node:
        if parent_id is None:
            if self._nodes:
                raise ValueError("tree already has a root")
            if state.depth != 0:
                raise ValueError("root state must have depth 0")
        else:
            parent = self[parent_id]
            if state.depth != parent.depth + 1:
                raise ValueError("child depth must be parent depth + 1")
            if state.prompt != parent.state.prompt or state.thoughts[:-1] != parent.state.thoughts:
                raise ValueError("child state must extend its parent's state by one thought")
        node = Node(id=len(self._nodes), state=state, parent_id=parent_id)
        self._nodes.append(node)
        self._children[node.id] = []
        if parent_id is not None:
            self._children[parent_id].append(node.id)
        return node

    def __getitem__(self, node_id: int) -> Node:
        if not isinstance(node_id, int) or not 0 <= node_id < len(self._nodes):
            raise UnknownNodeError(node_id)
        return self._nodes[node_id]

    def __contains__(self, node_id) -> bool:
        return isinstance(node_id, int) and 0 <= node_id < len(self._nodes)

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self) -> Iterator[Node]:
        return iter(self._nodes)

    @property
    def root(self) -> Node:
        return self[0]

    def children(self, node_id: int) -> list[Node]:
        self[node_id]
        return [self._nodes[i] for i in self._children[node_id]]


def reconstruct_path(node_id: int, tree: SearchTree) -> list[Thought]:
    """Thoughts along the edges from the root to ``node_id``."""
    path = []
    node = tree[node_id]
    while node.parent_id is not None:
        path.append(node.state.thoughts[-1])
        node = tree[node.parent_id]
    path.reverse()
    return path


Projector = Callable[[State], Hashable]


def world_key(s: State, projector: Optional[Projector]) -> Optional[Hashable]:
    """Canonical world-configuration key, or None when no projector exists.

    The projector raises ``InvalidStateError`` on thoughts it cannot parse.
    """
    if projector is None:
        return None
    return projector(s)


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 10
    max_expansions: Optional[int] = None
    max_generated_thoughts: Optional[int] = None
    max_tokens: Optional[int] = None
    max_backend_calls: Optional[int] = None

    def __post_init__(self):
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        for name in ("max_generated_thoughts", "max_tokens", "max_backend_calls"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be >= 1")
        # max_expansions=0 is accepted: it yields an immediate budget stop
        if self.max_expansions is not None and self.max_expansions < 0:
            raise ConfigError("max_expansions must be >= 0")


@dataclass
class SearchStats:
    expansions: int = 0
    generated_thoughts: int = 0
    pruned_nodes: int = 0
    backend_calls: int = 0
    tokens: int = 0
    prompt_tokens: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Problem:
    """What a search run needs to know about the task.

    ``goal_test`` and ``validator`` are domain-side checks (T1/T3 and the
    state validator).  When ``goal_test`` is None the goal is judged by the
    backend at expansion time (T2).
    """

    prompt: str
    goal_test: Optional[Callable[[State], bool]] = None
    validator: Optional[Callable[[State], tuple[bool, str]]] = None
    projector: Optional[Projector] = None
    name: str = "problem"
    goal_kind: str = "T1"
    extras: dict = field(default_factory=dict)
