"""Append-only event stream of one search run.

Event types: nodeCreated, nodeScored, nodePruned, nodeExpanded, goalFound,
backendCall.  Events carry no wall-clock fields, so two runs with the same
configuration and seed serialise to identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator, Union

EVENT_TYPES = ("nodeCreated", "nodeScored", "nodePruned", "nodeExpanded", "goalFound", "backendCall")


class RunLog:
    def __init__(self, events=None):
        self.events: list[dict] = list(events or [])

    def emit(self, event: str, **fields) -> None:
        if event not in EVENT_TYPES:
            raise ValueError(f"unknown event type {event!r}")
        self.events.append({"event": event, **fields})

    def __iter__(self) -> Iterator[dict]:
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def of_type(self, event: str) -> list[dict]:
        return [e for e in self.events if e["event"] == event]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunLog":
        with open(path) as fh:
            return cls(json.loads(line) for line in fh if line.strip())
