"""Blocksworld: pick-and-place simulator, action grammar and exact solver."""
from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from ..errors import InvalidStateError
from .base import Domain

TABLE = "Table"
NAME_RE = r"[A-Za-z][A-Za-z0-9]*"
_FACT = re.compile(rf"^\s*(On|Clear)\(\s*({NAME_RE})\s*(?:,\s*({NAME_RE})\s*)?\)\s*$", re.I)


class BlocksParseError(InvalidStateError):
    pass


class PreconditionError(InvalidStateError):
    """An action precondition does not hold; ``fact`` names it."""

    def __init__(self, fact: str, reason: str):
        super().__init__(reason)
        self.fact = fact


def on(x: str, y: str) -> str:
    return f"On({x},{y})"


def clear(x: str) -> str:
    return f"Clear({x})"


@dataclass(frozen=True)
class BlocksConfig:
    """Block -> support mapping, stored as sorted pairs."""

    support: tuple[tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple(sorted(self.support))
        object.__setattr__(self, "support", pairs)
        blocks = [b for b, _ in pairs]
        if len(set(blocks)) != len(blocks):
            raise ValueError("a block has more than one support")
        names = set(blocks)
        under = {}
        for b, s in pairs:
            if b == TABLE:
                raise ValueError("'Table' is not a block name")
            if s != TABLE:
                if s not in names:
                    raise ValueError(f"unknown support {s!r}")
                if s in under:
                    raise ValueError(f"two blocks on {s}")
                under[s] = b
        m = dict(pairs)
        for b in blocks:
            seen = set()
            x = b
            while x != TABLE:
                if x in seen:
                    raise ValueError("cycle in On relation")
                seen.add(x)
                x = m[x]

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "BlocksConfig":
        return cls(tuple(mapping.items()))

    @classmethod
    def from_facts(cls, facts: Iterable[str]) -> "BlocksConfig":
        """Build from On/Clear facts; given Clear facts must be consistent."""
        mapping = {}
        clears = set()
        for fact in facts:
            pred, x, y = parse_fact(fact)
            if pred == "On":
                if x in mapping:
                    raise ValueError(f"{x} has two supports")
                mapping[x] = y
            else:
                clears.add(x)
        cfg = cls.from_mapping(mapping)
        for x in clears:
            if x not in mapping:
                raise ValueError(f"Clear({x}) names an unknown block")
            if not cfg.is_clear(x):
                raise ValueError(f"Clear({x}) contradicts the On facts")
        return cfg

    @property
    def blocks(self) -> tuple[str, ...]:
        return tuple(b for b, _ in self.support)

    def on(self, block: str) -> str:
        for b, s in self.support:
            if b == block:
                return s
        raise KeyError(block)

    def is_clear(self, x: str) -> bool:
        if x == TABLE:
            return True
        return all(s != x for _, s in self.support)

    @property
    def facts(self) -> frozenset[str]:
        out = {on(b, s) for b, s in self.support}
        out |= {clear(b) for b in self.blocks if self.is_clear(b)}
        return frozenset(out)

    def key(self) -> str:
        return " ".join(sorted(self.facts))


def parse_fact(text: str) -> tuple[str, str, Optional[str]]:
    m = _FACT.match(text)
    if not m:
        raise ValueError(f"cannot parse fact {text!r}")
    pred = m.group(1).capitalize()
    x, y = m.group(2), m.group(3)
    if pred == "On" and y is None:
        raise ValueError(f"On needs two arguments: {text!r}")
    if pred == "Clear" and y is not None:
        raise ValueError(f"Clear takes one argument: {text!r}")
    if y is not None and y.lower() == "table":
        y = TABLE
    return pred, x, y


@dataclass(frozen=True)
class BlocksAction:
    block: str
    src: str
    dst: str

    def __post_init__(self):
        if self.block == self.dst:
            raise ValueError("a block cannot be placed on itself")
        if self.src == self.dst:
            raise ValueError("source and destination are the same")

    def render(self) -> str:
        def place(x):
            return "the table" if x == TABLE else f"block `{x}'"
        return f"Pick block `{self.block}' from {place(self.src)} and place it on {place(self.dst)}."


_Q = "[`'\"‘’“”]?"
_PLACE = rf"(?:(?P<{{g}}table>the\s+table)|(?:block\s+)?{_Q}(?P<{{g}}>{NAME_RE}){_Q})"
_ACTION = re.compile(
    rf"^\s*pick\s+(?:up\s+)?block\s+{_Q}(?P<block>{NAME_RE}){_Q}"
    rf"\s+from\s+{_PLACE.format(g='src')}"
    rf"\s+and\s+place\s+it\s+on\s+{_PLACE.format(g='dst')}\s*\.?\s*$",
    re.I,
)


def parse_blocks_action(text: str) -> BlocksAction:
    m = _ACTION.match(text)
    if not m:
        raise BlocksParseError(f"not a blocksworld action: {text!r}")
    src = TABLE if m.group("srctable") else m.group("src")
    dst = TABLE if m.group("dsttable") else m.group("dst")
    try:
        return BlocksAction(m.group("block"), src, dst)
    except ValueError as exc:
        raise BlocksParseError(str(exc)) from None


def apply_blocks_action(cfg: BlocksConfig, a: BlocksAction) -> BlocksConfig:
    names = set(cfg.blocks)
    for x in (a.block, a.src, a.dst):
        if x != TABLE and x not in names:
            raise PreconditionError(f"Block({x})", f"unknown block {x}")
    if not cfg.is_clear(a.block):
        raise PreconditionError(clear(a.block), f"block {a.block} is not clear")
    if cfg.on(a.block) != a.src:
        raise PreconditionError(on(a.block, a.src), f"block {a.block} is not on {_name(a.src)}")
    if a.dst != TABLE and not cfg.is_clear(a.dst):
        raise PreconditionError(clear(a.dst), f"block {a.dst} is not clear")
    mapping = dict(cfg.support)
    mapping[a.block] = a.dst
    return BlocksConfig.from_mapping(mapping)


def _name(x):
    return "the table" if x == TABLE else f"block {x}"


def blocks_goal_satisfied(cfg: BlocksConfig, goal: Iterable[str]) -> bool:
    return frozenset(goal) <= cfg.facts


def enumerate_legal_actions(cfg: BlocksConfig) -> list[BlocksAction]:
    """Every applicable move, ordered by (block, destination)."""
    out = []
    for b in sorted(cfg.blocks):
        if not cfg.is_clear(b):
            continue
        src = cfg.on(b)
        for dst in sorted(cfg.blocks + (TABLE,)):
            if dst in (b, src):
                continue
            if dst != TABLE and not cfg.is_clear(dst):
                continue
            out.append(BlocksAction(b, src, dst))
    return out


def all_configs(blocks: Iterable[str]) -> list[BlocksConfig]:
    """Every configuration of the given blocks (towers on a table)."""
    blocks = sorted(blocks)
    out = []

    def build(i, mapping):
        if i == len(blocks):
            try:
                out.append(BlocksConfig.from_mapping(mapping))
            except ValueError:
                pass
            return
        b = blocks[i]
        for s in [TABLE] + [x for x in blocks if x != b]:
            if s != TABLE and s in mapping.values():
                continue
            mapping[b] = s
            build(i + 1, mapping)
            del mapping[b]

    build(0, {})
    return out


def random_config(blocks: Iterable[str], rng: random.Random) -> BlocksConfig:
    """Random towers: shuffle blocks, then cut into stacks."""
    blocks = list(blocks)
    rng.shuffle(blocks)
    mapping = {}
    below = TABLE
    for b in blocks:
        if below != TABLE and rng.random() < 0.4:
            below = TABLE
        mapping[b] = below
        below = b
    return BlocksConfig.from_mapping(mapping)


class BlocksDomain(Domain):
    name = "blocksworld"
    goal_kind = "T3"

    def __init__(self, init: BlocksConfig, goal: Iterable[str], instance_id: str = "blocksworld",
                 prompt: Optional[str] = None):
        super().__init__(instance_id)
        self.init = init
        self.goal = frozenset(goal)
        for fact in self.goal:
            pred, x, y = parse_fact(fact)
            for n in (x, y):
                if n is not None and n != TABLE and n not in init.blocks:
                    raise ValueError(f"goal fact {fact} names an unknown block")
        self._prompt = prompt
        self.custom_prompt = prompt
        self._distances: Optional[dict[str, int]] = None

    @property
    def prompt(self) -> str:
        if self._prompt is None:
            self._prompt = (
                "Blocksworld: blocks rest on the table or on one another; a block can be "
                "moved only when nothing is on it, onto the table or onto a clear block. "
                f"Initial configuration: {', '.join(sorted(self.init.facts))}. "
                f"Goal configuration: {', '.join(sorted(self.goal))}. "
                "Give a plan, one action per line, in the form: "
                "pick block ? from ? and place it on ?"
            )
        return self._prompt

    def initial_world(self):
        return self.init

    def step(self, world, text):
        return apply_blocks_action(world, parse_blocks_action(text))

    def world_is_goal(self, world):
        return blocks_goal_satisfied(world, self.goal)

    def world_key_of(self, world):
        return world.key()

    def legal_moves(self, world):
        return [a.render() for a in enumerate_legal_actions(world)]

    def schema_moves(self, world):
        out = []
        for b in sorted(world.blocks):
            src = world.on(b)
            for dst in sorted(world.blocks + (TABLE,)):
                if dst not in (b, src):
                    out.append(BlocksAction(b, src, dst).render())
        return out

    def is_action(self, text):
        try:
            a = parse_blocks_action(text)
        except BlocksParseError:
            return False
        names = set(self.init.blocks) | {TABLE}
        return {a.block, a.src, a.dst} <= names

    def steps_to_goal(self, world):
        if self._distances is None:
            self._distances = self._goal_distances()
        return self._distances.get(world.key())

    def _goal_distances(self) -> dict[str, int]:
        # moves are reversible, so distance-to-goal is a multi-source BFS
        configs = all_configs(self.init.blocks)
        dist = {}
        queue = deque()
        for c in configs:
            if blocks_goal_satisfied(c, self.goal):
                dist[c.key()] = 0
                queue.append(c)
        while queue:
            c = queue.popleft()
            d = dist[c.key()]
            for a in enumerate_legal_actions(c):
                nxt = apply_blocks_action(c, a)
                k = nxt.key()
                if k not in dist:
                    dist[k] = d + 1
                    queue.append(nxt)
        return dist


BLOCK_NAMES = "ABCDEFGH"


def random_blocks_instance(n_blocks: int, rng: random.Random, instance_id: Optional[str] = None) -> BlocksDomain:
    """Random initial towers and a full random goal configuration (On facts only)."""
    if not 1 <= n_blocks <= len(BLOCK_NAMES):
        raise ValueError(f"n_blocks must be in 1..{len(BLOCK_NAMES)}")
    names = BLOCK_NAMES[:n_blocks]
    init = random_config(names, rng)
    goal_cfg = random_config(names, rng)
    while goal_cfg == init:
        goal_cfg = random_config(names, rng)
    goal = sorted(f for f in goal_cfg.facts if f.startswith("On("))
    return BlocksDomain(init, goal, instance_id or f"bw{n_blocks}-{rng.randrange(10**6):06d}")
