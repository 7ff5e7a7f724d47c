"""Game of 24 with exact rational arithmetic.

A step combines two remaining numbers and is written as
``a op b = c (left: m1 m2 ...)`` with the remaining numbers sorted.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

from ..errors import InvalidStateError
from .base import Domain

_NUM = r"-?\d+(?:/\d+)?"
_STEP = re.compile(
    rf"^\s*(?P<a>{_NUM})\s*(?P<op>[-+*/×÷−])\s*(?P<b>{_NUM})\s*=\s*(?P<c>{_NUM})"
    rf"\s*\(\s*left:\s*(?P<left>(?:{_NUM}\s*)*)\)\s*\.?\s*$",
    re.I,
)
_OP_ALIASES = {"×": "*", "÷": "/", "−": "-"}


def fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _apply(a: Fraction, op: str, b: Fraction) -> Optional[Fraction]:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        return None
    return a / b


@dataclass(frozen=True)
class Game24State:
    remaining: tuple[Fraction, ...]
    derivation: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "remaining", tuple(sorted(Fraction(x) for x in self.remaining)))

    def key(self) -> str:
        return " ".join(fmt(x) for x in self.remaining)


@dataclass(frozen=True)
class Game24Step:
    a: Fraction
    op: str
    b: Fraction
    result: Fraction
    left: tuple[Fraction, ...]


def parse_game24_step(text: str) -> Game24Step:
    m = _STEP.match(text)
    if not m:
        raise InvalidStateError(f"not an arithmetic step: {text!r}")
    op = _OP_ALIASES.get(m.group("op"), m.group("op"))
    left = tuple(Fraction(t) for t in m.group("left").split())
    try:
        a, b, c = Fraction(m.group("a")), Fraction(m.group("b")), Fraction(m.group("c"))
    except ZeroDivisionError:
        raise InvalidStateError(f"zero denominator in {text!r}") from None
    return Game24Step(a, op, b, c, left)


def step_text(a: Fraction, op: str, b: Fraction, result: Fraction, left: Iterable[Fraction]) -> str:
    left_s = " ".join(fmt(x) for x in sorted(left))
    return f"{fmt(a)} {op} {fmt(b)} = {fmt(result)} (left: {left_s})"


def game24_legal_steps(st: Game24State) -> list[tuple[str, Game24State]]:
    """One entry per operand pair and operator; - and / in both orders."""
    nums = st.remaining
    out = []
    seen = set()
    for i in range(len(nums)):
        for j in range(i + 1, len(nums)):
            a, b = nums[i], nums[j]
            rest = nums[:i] + nums[i + 1:j] + nums[j + 1:]
            for x, op, y in ((a, "+", b), (a, "-", b), (b, "-", a), (a, "*", b), (a, "/", b), (b, "/", a)):
                r = _apply(x, op, y)
                if r is None:
                    continue
                left = tuple(sorted(rest + (r,)))
                text = step_text(x, op, y, r, left)
                if text in seen:
                    continue
                seen.add(text)
                out.append((text, Game24State(left, st.derivation + (text,))))
    return out


def apply_game24_step(st: Game24State, text: str) -> Game24State:
    step = parse_game24_step(text)
    pool = list(st.remaining)
    for x in (step.a, step.b):
        if x not in pool:
            raise InvalidStateError(f"number {fmt(x)} is not available")
        pool.remove(x)
    r = _apply(step.a, step.op, step.b)
    if r is None:
        raise InvalidStateError("division by zero")
    if r != step.result:
        raise InvalidStateError(f"{fmt(step.a)} {step.op} {fmt(step.b)} is {fmt(r)}, not {fmt(step.result)}")
    expected = tuple(sorted(pool + [r]))
    if tuple(sorted(step.left)) != expected:
        raise InvalidStateError("remaining numbers do not match")
    return Game24State(expected, st.derivation + (text,))


def game24_goal_test(st: Game24State, target: Fraction = Fraction(24)) -> bool:
    return st.remaining == (Fraction(target),)


@lru_cache(maxsize=None)
def _solvable(nums: tuple[Fraction, ...], target: Fraction) -> bool:
    if len(nums) == 1:
        return nums[0] == target
    for i in range(len(nums)):
        for j in range(i + 1, len(nums)):
            a, b = nums[i], nums[j]
            rest = nums[:i] + nums[i + 1:j] + nums[j + 1:]
            for r in (a + b, a - b, b - a, a * b, a / b if b else None, b / a if a else None):
                if r is not None and _solvable(tuple(sorted(rest + (r,))), target):
                    return True
    return False


def solvable(numbers: Iterable, target=24) -> bool:
    return _solvable(tuple(sorted(Fraction(x) for x in numbers)), Fraction(target))


class Game24Domain(Domain):
    name = "game24"
    goal_kind = "T1"

    def __init__(self, numbers: Iterable, target=24, instance_id: str = "game24",
                 prompt: Optional[str] = None):
        super().__init__(instance_id)
        self.numbers = tuple(Fraction(x) for x in numbers)
        if len(self.numbers) < 1:
            raise ValueError("need at least one number")
        self.target = Fraction(target)
        self._prompt = prompt
        self.custom_prompt = prompt

    @property
    def prompt(self) -> str:
        if self._prompt is None:
            nums = " ".join(fmt(x) for x in self.numbers)
            self._prompt = (
                f"Use the numbers and basic arithmetic (+ - * /) to obtain {fmt(self.target)}. "
                f"Each step combines two remaining numbers. Input: {nums}"
            )
        return self._prompt

    def initial_world(self):
        return Game24State(self.numbers)

    def step(self, world, text):
        return apply_game24_step(world, text)

    def world_is_goal(self, world):
        return game24_goal_test(world, self.target)

    def world_key_of(self, world):
        return world.key()

    def legal_moves(self, world):
        return [text for text, _ in game24_legal_steps(world)]

    def schema_moves(self, world):
        # well-formed steps with a wrong result mixed in with the right ones
        out = []
        for text, nxt in game24_legal_steps(world):
            out.append(text)
            step = parse_game24_step(text)
            wrong = step.result + 1
            left = list(step.left)
            left[left.index(step.result)] = wrong
            out.append(step_text(step.a, step.op, step.b, wrong, left))
        return out

    def is_action(self, text):
        try:
            parse_game24_step(text)
        except InvalidStateError:
            return False
        return True

    def steps_to_goal(self, world):
        if _solvable(world.remaining, self.target):
            return len(world.remaining) - 1
        return None


def random_game24_instance(rng: random.Random, want_solvable: Optional[bool] = None, low: int = 1,
                           high: int = 13, size: int = 4, target=24) -> Game24Domain:
    """Random number set; with ``want_solvable`` set, resample until the label matches."""
    while True:
        nums = sorted(rng.randint(low, high) for _ in range(size))
        if want_solvable is None or solvable(nums, target) == want_solvable:
            tag = "-".join(map(str, nums))
            return Game24Domain(nums, target, instance_id=f"g24-{tag}")
