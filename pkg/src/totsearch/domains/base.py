from __future__ import annotations

import abc
from collections import OrderedDict
from typing import Hashable, Optional

from ..core import Problem, State
from ..errors import InvalidStateError


class Domain(abc.ABC):
    """A desk-scale problem instance with a simulator behind its thoughts.

    Subclasses implement ``initial_world``, ``step`` (apply one thought) and
    the world-level queries; state-level helpers are derived here.
    """

    name = "domain"
    goal_kind = "T1"

    def __init__(self, instance_id: str = "instance"):
        self.instance_id = instance_id
        self._world_cache: OrderedDict = OrderedDict()
        self._moves_cache: dict = {}

    # -- world-level hooks ---------------------------------------------------
    @property
    @abc.abstractmethod
    def prompt(self) -> str:
        ...

    @abc.abstractmethod
    def initial_world(self):
        ...

    @abc.abstractmethod
    def step(self, world, text: str):
        """Apply one thought; raise InvalidStateError with a readable reason."""

    @abc.abstractmethod
    def world_is_goal(self, world) -> bool:
        ...

    @abc.abstractmethod
    def world_key_of(self, world) -> Hashable:
        ...

    @abc.abstractmethod
    def legal_moves(self, world) -> list[str]:
        """Canonical texts of every applicable next thought, in a fixed order."""

    @abc.abstractmethod
    def schema_moves(self, world) -> list[str]:
        """Well-formed thoughts, applicable or not (used by noisy backends)."""

    @abc.abstractmethod
    def is_action(self, text: str) -> bool:
        ...

    @abc.abstractmethod
    def steps_to_goal(self, world) -> Optional[int]:
        """Optimal number of remaining steps, None if no goal is reachable."""

    # -- state-level helpers -------------------------------------------------
    def world(self, s: State):
        key = s.texts
        cached = self._world_cache.get(key)
        if cached is not None:
            self._world_cache.move_to_end(key)
            if isinstance(cached, InvalidStateError):
                raise cached
            return cached
        if not key:
            result = self.initial_world()
        else:
            parent = State(s.prompt, s.thoughts[:-1])
            try:
                result = self.step(self.world(parent), key[-1])
            except InvalidStateError as exc:
                result = InvalidStateError(exc.reason, depth=len(key) if exc.depth is None else exc.depth)
        self._world_cache[key] = result
        if len(self._world_cache) > 200_000:
            self._world_cache.popitem(last=False)
        if isinstance(result, InvalidStateError):
            raise result
        return result

    def validate(self, s: State) -> tuple[bool, str]:
        try:
            self.world(s)
        except InvalidStateError as exc:
            return False, exc.reason
        return True, ""

    def is_goal(self, s: State) -> bool:
        try:
            return self.world_is_goal(self.world(s))
        except InvalidStateError:
            return False

    def world_key(self, s: State) -> Hashable:
        return self.world_key_of(self.world(s))

    def legal_thoughts(self, s: State) -> list[str]:
        world = self.world(s)
        key = self.world_key_of(world)
        moves = self._moves_cache.get(key)
        if moves is None:
            if len(self._moves_cache) > 100_000:
                self._moves_cache.clear()
            moves = self._moves_cache[key] = tuple(self.legal_moves(world))
        return list(moves)

    def schema_thoughts(self, s: State) -> list[str]:
        return self.schema_moves(self.world(s))

    def optimal_remaining(self, s: State) -> Optional[int]:
        try:
            return self.steps_to_goal(self.world(s))
        except InvalidStateError:
            return None

    def problem(self) -> Problem:
        return Problem(
            prompt=self.prompt,
            goal_test=self.is_goal,
            validator=self.validate,
            projector=self.world_key,
            name=self.instance_id,
            goal_kind=self.goal_kind,
            extras={"domain": self},
        )
