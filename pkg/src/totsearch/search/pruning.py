"""Node-level pruning.  All three keep the input order among ties (FIFO by id)."""
from __future__ import annotations

from typing import Sequence

from ..core import Node


def _rank(nodes: Sequence[Node]) -> list[Node]:
    return sorted(nodes, key=lambda n: (n.f, n.id))


def beam_prune(layer: Sequence[Node], k: int) -> list[Node]:
    """Keep the k smallest-f nodes of a whole depth layer."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _rank(layer)[:k]


def local_branch_prune(children: Sequence[Node], b: int) -> list[Node]:
    """Keep the b smallest-f successors of one expansion."""
    if b < 1:
        raise ValueError("b must be >= 1")
    return _rank(children)[:b]


def threshold_prune(children: Sequence[Node], threshold: float) -> list[Node]:
    return [n for n in children if n.f <= threshold]
