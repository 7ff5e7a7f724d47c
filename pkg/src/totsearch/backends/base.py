"""Request/reply types and the abstract backend.

A backend realises the four agent-to-model interfaces: thought generation,
heuristic evaluation, goal judgement and state validation.  Backends never
touch search state.
"""
from __future__ import annotations

import abc
from dataclasses import asdict, dataclass, field
from typing import Optional

from ..core import State
from ..errors import TotSearchError

GENERATE_INSTRUCTION = "Suggest a next step."
ENUMERATE_INSTRUCTION = "Generate {n} different options for the next step, one per line."
EVALUATE_INSTRUCTION = (
    "Estimate the number of extra steps required to solve the problem. "
    "Output a single number."
)
GOAL_INSTRUCTION = "Is this a valid solution? Answer True or False."
VALIDATE_INSTRUCTION = "Is this a valid partial solution? Answer True or False."


class BackendError(TotSearchError):
    """Backend failure.  ``retryable`` tells callers whether a retry may help."""

    retryable = False

    def __init__(self, message: str, *, status: Optional[int] = None, attempts: int = 1):
        super().__init__(message)
        self.status = status
        self.attempts = attempts


class TransportError(BackendError):
    retryable = True


class HTTPStatusError(BackendError):
    def __init__(self, message, *, status, attempts=1):
        super().__init__(message, status=status, attempts=attempts)
        self.retryable = status == 429 or status >= 500


class MalformedReplyError(BackendError):
    pass


class ContextOverflowError(BackendError):
    pass


@dataclass(frozen=True)
class GenerationRequest:
    rendered_state: str
    instruction: str = GENERATE_INSTRUCTION
    temperature: float = 1.0
    top_k: Optional[int] = None
    top_p: Optional[float] = None
    n: int = 1
    max_tokens: int = 64
    stop: tuple[str, ...] = ("\n",)
    want_logprobs: bool = True
    # set for enumerated proposals: ask for this many options in one reply
    list_size: Optional[int] = None
    seed: int = 0
    draw: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.stop:
            raise ValueError("stop must be non-empty")
        if not isinstance(self.stop, tuple):
            object.__setattr__(self, "stop", tuple(self.stop))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stop"] = list(self.stop)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationRequest":
        d = dict(d)
        d["stop"] = tuple(d["stop"])
        return cls(**d)


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("usage counts must be >= 0")


@dataclass(frozen=True)
class Completion:
    text: str
    token_count: int
    logprob: Optional[float] = None
    # per-line log-probabilities of an enumerated reply, when known
    item_logprobs: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class BackendReply:
    completions: tuple[Completion, ...]
    usage: Usage = field(default_factory=Usage)

    def to_dict(self) -> dict:
        return {
            "completions": [
                {
                    "text": c.text,
                    "token_count": c.token_count,
                    "logprob": c.logprob,
                    "item_logprobs": None if c.item_logprobs is None else list(c.item_logprobs),
                }
                for c in self.completions
            ],
            "usage": asdict(self.usage),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BackendReply":
        comps = tuple(
            Completion(
                text=c["text"],
                token_count=c["token_count"],
                logprob=c.get("logprob"),
                item_logprobs=None if c.get("item_logprobs") is None else tuple(c["item_logprobs"]),
            )
            for c in d["completions"]
        )
        return cls(comps, Usage(**d["usage"]))


@dataclass(frozen=True)
class EvaluationReply:
    """Numeric estimate or categorical label from the evaluator."""

    value: Optional[float] = None
    label: Optional[str] = None
    text: str = ""
    usage: Usage = field(default_factory=Usage)

    def to_dict(self) -> dict:
        return {"value": self.value, "label": self.label, "text": self.text, "usage": asdict(self.usage)}

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReply":
        return cls(d["value"], d["label"], d["text"], Usage(**d["usage"]))


@dataclass(frozen=True)
class Judgement:
    """Boolean verdict of a goal test or validator call."""

    verdict: bool
    reason: str = ""
    usage: Usage = field(default_factory=Usage)

    def __bool__(self):
        return self.verdict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason, "usage": asdict(self.usage)}

    @classmethod
    def from_dict(cls, d: dict) -> "Judgement":
        return cls(d["verdict"], d["reason"], Usage(**d["usage"]))


class Backend(abc.ABC):
    name = "backend"

    @abc.abstractmethod
    def generate(self, state: State, request: GenerationRequest) -> BackendReply:
        ...

    @abc.abstractmethod
    def evaluate(self, state: State) -> EvaluationReply:
        ...

    @abc.abstractmethod
    def test_goal(self, state: State) -> Judgement:
        ...

    @abc.abstractmethod
    def validate(self, state: State) -> Judgement:
        ...


def truncate_at_stop(text: str, stop) -> str:
    cut = len(text)
    for delim in stop:
        i = text.find(delim)
        if i != -1:
            cut = min(cut, i)
    return text[:cut]
