"""Successor generation: sampling strategies plus structural constraint filters."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional, Sequence

from .backends.base import ENUMERATE_INSTRUCTION, GENERATE_INSTRUCTION, Backend, GenerationRequest
from .core import State, Thought, count_tokens, extend_state
from .errors import ConfigError

log = logging.getLogger(__name__)

SamplingStrategy = Literal["independent", "diversity", "enumerated"]


@dataclass(frozen=True)
class Decoding:
    temperature: float = 1.0
    top_k: Optional[int] = None
    top_p: Optional[float] = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.top_k is not None and self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if self.top_p is not None and not 0 < self.top_p <= 1:
            raise ConfigError("top_p must be in (0, 1]")


@dataclass(frozen=True)
class DiversityConfig:
    ngram_n: int = 2
    overlap_penalty: float = 0.0
    min_distinct: int = 1

    def __post_init__(self):
        if self.ngram_n < 1 or self.overlap_penalty < 0 or self.min_distinct < 0:
            raise ConfigError("invalid diversity parameters")


@dataclass(frozen=True)
class ProposalConfig:
    strategy: SamplingStrategy = "independent"
    branch: int = 3
    decoding: Decoding = field(default_factory=Decoding)
    diversity: Optional[DiversityConfig] = None
    max_tokens: int = 64
    # extra proposal rounds when every candidate gets filtered out
    retries: int = 1
    instruction: Optional[str] = None

    def __post_init__(self):
        if self.strategy not in ("independent", "diversity", "enumerated"):
            raise ConfigError(f"unknown sampling strategy {self.strategy!r}")
        if self.branch < 1:
            raise ConfigError("branch must be >= 1")
        if self.strategy == "diversity" and self.diversity is None:
            raise ConfigError("diversity sampling needs diversity parameters")
        if self.retries < 0:
            raise ConfigError("retries must be >= 0")


# -- constraints -------------------------------------------------------------

@dataclass(frozen=True)
class DomainActions:
    """Thought must be an element of the domain's action schema."""

    is_action: Callable[[str], bool]
    kind = "domain"

    def check(self, state: State, text: str) -> tuple[bool, str]:
        return (True, "") if self.is_action(text) else (False, "not a domain action")


@dataclass(frozen=True)
class Grammar:
    """Thought must parse; ``parse`` raises on failure."""

    parse: Callable[[str], Any]
    kind = "grammar"

    def check(self, state, text):
        try:
            self.parse(text)
        except Exception as exc:  # parser crashes reject the candidate only
            return False, f"parse failed: {exc}"
        return True, ""


@dataclass(frozen=True)
class Length:
    max_tokens: int
    kind = "length"

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ConfigError("max_tokens must be >= 1")

    def check(self, state, text):
        n = count_tokens(text)
        if n > self.max_tokens:
            return False, f"{n} tokens > {self.max_tokens}"
        return True, ""


@dataclass(frozen=True)
class Semantic:
    """State-dependent validity: the validator sees the extended state."""

    validator: Callable[[State], tuple[bool, str]]
    kind = "semantic"

    def check(self, state, text):
        ok, reason = self.validator(extend_state(state, Thought(text)))
        return bool(ok), reason


Constraint = DomainActions | Grammar | Length | Semantic


@dataclass
class ProposalReport:
    """Side information from one ``propose_successors`` call."""

    raw: int = 0
    duplicates: int = 0
    rejected: list[tuple[str, str]] = field(default_factory=list)
    calls: int = 0
    candidates: list[str] = field(default_factory=list)
    tokens: dict[str, int] = field(default_factory=dict)


def apply_constraints(cands: Sequence[Thought], chain: Sequence[Constraint], s: State,
                      rejected: Optional[list] = None) -> list[Thought]:
    out = []
    for cand in cands:
        for constraint in chain:
            ok, reason = constraint.check(s, cand.text)
            if not ok:
                log.debug("rejected %r by %s: %s", cand.text, constraint.kind, reason)
                if rejected is not None:
                    rejected.append((cand.text, f"{constraint.kind}: {reason}"))
                break
        else:
            out.append(cand)
    return out


def ngrams(text: str, n: int) -> set[tuple[str, ...]]:
    toks = text.split()
    if len(toks) < n:
        return {tuple(toks)} if toks else set()
    return {tuple(toks[i:i + n]) for i in range(len(toks) - n + 1)}


def diversity_filter(cands: Sequence[Thought], ngram_n: int, min_distinct: int,
                     overlap_penalty: float = 0.0) -> list[Thought]:
    """Greedy n-gram overlap filter.

    A candidate is rejected when more than ``len(grams) - min_distinct`` of
    its n-grams already occur among accepted candidates.  With a positive
    ``overlap_penalty`` the survivors are re-ordered by penalised overlap
    (stable), so low-overlap candidates come first.
    """
    if ngram_n < 1:
        raise ValueError("ngram_n must be >= 1")
    seen: set = set()
    kept = []
    for cand in cands:
        grams = ngrams(cand.text, ngram_n)
        shared = len(grams & seen)
        if shared > max(len(grams) - min_distinct, 0):
            continue
        kept.append((overlap_penalty * shared, cand))
        seen |= grams
    if overlap_penalty > 0:
        kept.sort(key=lambda pair: pair[0])
    return [cand for _, cand in kept]


_MARKER = re.compile(r"^\s*(?:\d+[.)]|[-*•])\s+")


def parse_enumerated(text: str) -> list[str]:
    """Split an enumerated reply into items, stripping list markers."""
    items = []
    for line in text.splitlines():
        line = _MARKER.sub("", line).strip()
        if line:
            items.append(line)
    return items


def _dedupe(thoughts: list[Thought]) -> tuple[list[Thought], int]:
    seen = set()
    out = []
    for t in thoughts:
        if t.text in seen:
            continue
        seen.add(t.text)
        out.append(t)
    return out, len(thoughts) - len(out)


def _request(s: State, cfg: ProposalConfig, *, seed: int, draw: int, list_size=None) -> GenerationRequest:
    if list_size is None:
        instruction = cfg.instruction or GENERATE_INSTRUCTION
        stop = ("\n",)
        max_tokens = cfg.max_tokens
    else:
        instruction = cfg.instruction or ENUMERATE_INSTRUCTION.format(n=list_size)
        stop = ("\n\n",)
        max_tokens = cfg.max_tokens * list_size
    return GenerationRequest(
        rendered_state=s.render(),
        instruction=instruction,
        temperature=cfg.decoding.temperature,
        top_k=cfg.decoding.top_k,
        top_p=cfg.decoding.top_p,
        n=1,
        max_tokens=max_tokens,
        stop=stop,
        list_size=list_size,
        seed=seed,
        draw=draw,
    )


def propose_successors(s: State, cfg: ProposalConfig, gen: Backend, chain: Sequence[Constraint] = (),
                       *, seed: int = 0, draw_offset: int = 0, limit: Optional[int] = None,
                       report: Optional[ProposalReport] = None) -> list[Thought]:
    """Propose at most ``cfg.branch`` next thoughts for state ``s``.

    Independent and diversity sampling issue one backend call per draw
    (diversity oversamples 2b draws); enumerated sampling issues a single
    call and splits the reply into lines.  Exact duplicates are dropped
    before the constraint chain runs.  ``limit`` tightens the branch bound.
    """
    b = cfg.branch if limit is None else max(0, min(cfg.branch, limit))
    report = report if report is not None else ProposalReport()
    if b == 0:
        return []
    raw: list[Thought] = []
    if cfg.strategy == "enumerated":
        reply = gen.generate(s, _request(s, cfg, seed=seed, draw=draw_offset, list_size=b))
        report.calls += 1
        for comp in reply.completions:
            items = parse_enumerated(comp.text)
            lps = comp.item_logprobs
            for i, item in enumerate(items):
                lp = lps[i] if lps is not None and i < len(lps) else None
                raw.append(Thought(item, count_tokens(item), lp))
    else:
        draws = b if cfg.strategy == "independent" else 2 * b
        for i in range(draws):
            reply = gen.generate(s, _request(s, cfg, seed=seed, draw=draw_offset + i))
            report.calls += 1
            for comp in reply.completions:
                text = comp.text.strip()
                if text:
                    raw.append(Thought(text, comp.token_count, comp.logprob))
    report.raw += len(raw)
    report.candidates.extend(t.text for t in raw)
    for t in raw:
        report.tokens.setdefault(t.text, t.token_count)
    uniq, dups = _dedupe(raw)
    report.duplicates += dups
    survivors = apply_constraints(uniq, chain, s, report.rejected)
    if cfg.strategy == "diversity":
        div = cfg.diversity
        survivors = diversity_filter(survivors, div.ngram_n, div.min_distinct, div.overlap_penalty)
    return survivors[:b]
