"""Deterministic backends backed by a domain simulator."""
from __future__ import annotations

import math
from typing import Callable, Literal, Mapping, Optional, Sequence

from ..core import State, count_tokens
from ..domains.base import Domain
from .base import Backend, BackendReply, Completion, EvaluationReply, GenerationRequest, Judgement, Usage

EvaluatorMode = Literal["steps", "label", "scalar"]
WeightFn = Callable[[State, Sequence[str]], Sequence[float]]


def _prompt_tokens(state: State, instruction: str) -> int:
    return count_tokens(state.render()) + count_tokens(instruction)


class OracleBackend(Backend):
    """Exhaustive oracle: proposes the domain's legal moves.

    Draw ``i`` of a request returns candidate ``(draw + i) mod m``, so a
    branch of ``b >= m`` independent draws covers every legal move and
    ``b = 1`` returns the first one.  Log-probabilities are uniform over the
    candidate set unless a ``weights`` hook is given.

    Evaluator modes:
      steps   remaining optimal steps (cost scale); ``unreachable_steps``
              when no goal can be reached within ``horizon``
      label   "sure" if a goal is reachable, else "impossible"
      scalar  10 / (1 + steps) on a 0-10 scale, 0 when unreachable
    """

    name = "oracle"

    def __init__(self, domain: Domain, evaluator_mode: EvaluatorMode = "steps",
                 horizon: Optional[int] = None, weights: Optional[WeightFn] = None,
                 unreachable_steps: int = 99):
        self.domain = domain
        self.evaluator_mode = evaluator_mode
        self.horizon = horizon
        self.weights = weights
        self.unreachable_steps = unreachable_steps

    # -- candidates ----------------------------------------------------------
    def candidates(self, state: State) -> list[str]:
        ok, _ = self.domain.validate(state)
        if not ok:
            return []
        return self.domain.legal_thoughts(state)

    def candidate_logprobs(self, state: State, cands: Sequence[str]) -> list[float]:
        if not cands:
            return []
        if self.weights is None:
            return [-math.log(len(cands))] * len(cands)
        w = [float(x) for x in self.weights(state, cands)]
        total = sum(w)
        return [math.log(x / total) if x > 0 else -math.inf for x in w]

    def generate(self, state, request: GenerationRequest) -> BackendReply:
        cands = self.candidates(state)
        lps = self.candidate_logprobs(state, cands)
        prompt_tokens = _prompt_tokens(state, request.instruction)
        if not cands:
            return BackendReply((), Usage(prompt_tokens, 0))
        if request.list_size is not None:
            items = cands[: request.list_size]
            text = "\n".join(items)
            n_tok = sum(count_tokens(t) for t in items)
            comp = Completion(text, n_tok, sum(lps[: len(items)]), tuple(lps[: len(items)]))
            return BackendReply((comp,) * request.n, Usage(prompt_tokens, n_tok * request.n))
        comps = []
        for j in range(request.n):
            i = (request.draw + j) % len(cands)
            comps.append(Completion(cands[i], count_tokens(cands[i]), lps[i]))
        return BackendReply(tuple(comps), Usage(prompt_tokens, sum(c.token_count for c in comps)))

    # -- evaluation ----------------------------------------------------------
    def remaining_steps(self, state: State) -> Optional[int]:
        steps = self.domain.optimal_remaining(state)
        if steps is None:
            return None
        if self.horizon is not None and steps > self.horizon - state.depth:
            return None
        return steps

    def exact_reply(self, state: State) -> EvaluationReply:
        steps = self.remaining_steps(state)
        if self.evaluator_mode == "steps":
            v = self.unreachable_steps if steps is None else steps
            return EvaluationReply(value=float(v), text=str(v))
        if self.evaluator_mode == "label":
            label = "impossible" if steps is None else "sure"
            return EvaluationReply(label=label, text=label)
        v = 0.0 if steps is None else 10.0 / (1 + steps)
        return EvaluationReply(value=v, text=f"{v:g}")

    def evaluate(self, state) -> EvaluationReply:
        reply = self.exact_reply(state)
        usage = Usage(_prompt_tokens(state, "evaluate"), count_tokens(reply.text))
        return EvaluationReply(reply.value, reply.label, reply.text, usage)

    def test_goal(self, state) -> Judgement:
        ok = self.domain.is_goal(state)
        return Judgement(ok, "" if ok else "goal not satisfied", Usage(_prompt_tokens(state, "goal"), 1))

    def validate(self, state) -> Judgement:
        ok, reason = self.domain.validate(state)
        return Judgement(ok, reason, Usage(_prompt_tokens(state, "validate"), 1))


class ScriptedOracle(OracleBackend):
    """Oracle whose proposals at selected states come from a script.

    ``script`` maps a tuple of thought texts (the state's thoughts) to the
    candidate list to return there; unscripted states fall back to the legal
    moves unless ``fallback`` is False.
    """

    name = "scripted"

    def __init__(self, domain: Domain, script: Mapping[tuple[str, ...], Sequence[str]],
                 fallback: bool = True, **kwargs):
        super().__init__(domain, **kwargs)
        self.script = {tuple(k): list(v) for k, v in script.items()}
        self.fallback = fallback

    def candidates(self, state):
        if state.texts in self.script:
            return self.script[state.texts]
        return super().candidates(state) if self.fallback else []
