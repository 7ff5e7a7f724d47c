"""Transcript recording and replay.

A transcript is a JSON-lines file with one record per backend call::

    {"method": "generate", "state": <rendered state>, "request": {...} | null,
     "reply": {...}}

Replay serves recorded replies keyed by (method, state, request), in
recorded order for repeated keys.
"""
from __future__ import annotations

import json
from collections import defaultdict, deque
from pathlib import Path
from typing import Iterable, Optional, Union

from ..core import State
from .base import Backend, BackendError, BackendReply, EvaluationReply, GenerationRequest, Judgement

_REPLY_TYPES = {"generate": BackendReply, "evaluate": EvaluationReply,
                "test_goal": Judgement, "validate": Judgement}


def _key(method: str, state: str, request: Optional[dict]) -> str:
    return json.dumps([method, state, request], sort_keys=True)


class RecordingBackend(Backend):
    def __init__(self, inner: Backend):
        self.inner = inner
        self.name = inner.name
        self.records: list[dict] = []

    def _record(self, method, state, request, reply):
        self.records.append({"method": method, "state": state.render(),
                             "request": None if request is None else request.to_dict(),
                             "reply": reply.to_dict()})
        return reply

    def generate(self, state, request):
        return self._record("generate", state, request, self.inner.generate(state, request))

    def evaluate(self, state):
        return self._record("evaluate", state, None, self.inner.evaluate(state))

    def test_goal(self, state):
        return self._record("test_goal", state, None, self.inner.test_goal(state))

    def validate(self, state):
        return self._record("validate", state, None, self.inner.validate(state))

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


class ReplayError(BackendError):
    pass


class ReplayBackend(Backend):
    name = "replay"

    def __init__(self, records: Iterable[dict]):
        self._queues: dict[str, deque] = defaultdict(deque)
        for rec in records:
            self._queues[_key(rec["method"], rec["state"], rec["request"])].append(rec)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ReplayBackend":
        with open(path) as fh:
            return cls(json.loads(line) for line in fh if line.strip())

    def _take(self, method: str, state: State, request: Optional[GenerationRequest]):
        key = _key(method, state.render(), None if request is None else request.to_dict())
        queue = self._queues.get(key)
        if not queue:
            raise ReplayError(f"no recorded {method} reply for this request")
        return _REPLY_TYPES[method].from_dict(queue.popleft()["reply"])

    def generate(self, state, request):
        return self._take("generate", state, request)

    def evaluate(self, state):
        return self._take("evaluate", state, None)

    def test_goal(self, state):
        return self._take("test_goal", state, None)

    def validate(self, state):
        return self._take("validate", state, None)
