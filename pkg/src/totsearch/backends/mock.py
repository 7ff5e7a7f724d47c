"""Seeded stochastic stand-in for a language model."""
from __future__ import annotations

import math
import random

from ..core import State, count_tokens
from ..domains.base import Domain
from .base import BackendReply, Completion, EvaluationReply, GenerationRequest, Usage
from .oracle import EvaluatorMode, OracleBackend, _prompt_tokens


class MockBackend(OracleBackend):
    """Samples legal moves with temperature, plus optional noise.

    Candidate ``i`` (in the domain's canonical order) has prior weight
    ``exp(-i / temperature)``; ``top_k`` and ``top_p`` truncate the
    distribution as in ordinary decoding.  With probability
    ``invalid_rate`` a draw is taken from the domain's schema moves instead,
    which may violate preconditions.  Evaluations equal the oracle's except
    that with probability ``error_rate`` a wrong value is returned.

    Every random choice is keyed on (seed, request seed, draw, sample) or
    (seed, state), so replies do not depend on call order.
    """

    name = "mock"

    def __init__(self, domain: Domain, seed: int = 0, error_rate: float = 0.0,
                 invalid_rate: float = 0.0, evaluator_mode: EvaluatorMode = "steps", **kwargs):
        super().__init__(domain, evaluator_mode=evaluator_mode, **kwargs)
        if not 0 <= error_rate <= 1 or not 0 <= invalid_rate <= 1:
            raise ValueError("rates must lie in [0, 1]")
        self.seed = seed
        self.error_rate = error_rate
        self.invalid_rate = invalid_rate

    def _distribution(self, n: int, request: GenerationRequest) -> list[float]:
        if request.temperature == 0:
            probs = [1.0] + [0.0] * (n - 1)
        else:
            w = [math.exp(-i / request.temperature) for i in range(n)]
            total = sum(w)
            probs = [x / total for x in w]
        if request.top_k is not None:
            probs = [p if i < request.top_k else 0.0 for i, p in enumerate(probs)]
        if request.top_p is not None:
            acc, cut = 0.0, n
            for i, p in enumerate(probs):
                acc += p
                if acc >= request.top_p - 1e-12:
                    cut = i + 1
                    break
            probs = [p if i < cut else 0.0 for i, p in enumerate(probs)]
        total = sum(probs)
        return [p / total for p in probs]

    def _sample(self, state: State, request: GenerationRequest, j: int) -> tuple[str, float]:
        rng = random.Random(f"{self.seed}:{request.seed}:{request.draw}:{j}")
        if self.invalid_rate and rng.random() < self.invalid_rate:
            pool = self.domain.schema_thoughts(state) if self.domain.validate(state)[0] else []
            if pool:
                return rng.choice(pool), -math.log(len(pool))
        cands = self.candidates(state)
        if not cands:
            return "", 0.0
        probs = self._distribution(len(cands), request)
        i = rng.choices(range(len(cands)), weights=probs)[0]
        return cands[i], math.log(probs[i])

    def generate(self, state, request):
        prompt_tokens = _prompt_tokens(state, request.instruction)
        comps = []
        for j in range(request.n):
            if request.list_size is not None:
                items = []
                lps = []
                for k in range(request.list_size):
                    text, lp = self._sample(state, request, j * request.list_size + k)
                    if text:
                        items.append(text)
                        lps.append(lp)
                if items:
                    text = "\n".join(items)
                    comps.append(Completion(text, sum(count_tokens(t) for t in items), sum(lps), tuple(lps)))
            else:
                text, lp = self._sample(state, request, j)
                if text:
                    comps.append(Completion(text, count_tokens(text), lp))
        return BackendReply(tuple(comps), Usage(prompt_tokens, sum(c.token_count for c in comps)))

    def evaluate(self, state):
        exact = self.exact_reply(state)
        rng = random.Random(f"{self.seed}:eval:{state.render()}")
        reply = exact
        if self.error_rate and rng.random() < self.error_rate:
            reply = self._corrupt(exact, rng)
        usage = Usage(_prompt_tokens(state, "evaluate"), count_tokens(reply.text))
        return EvaluationReply(reply.value, reply.label, reply.text, usage)

    def _corrupt(self, exact: EvaluationReply, rng: random.Random) -> EvaluationReply:
        if exact.label is not None:
            label = "sure" if exact.label != "sure" else rng.choice(["maybe", "impossible"])
            return EvaluationReply(label=label, text=label)
        if self.evaluator_mode == "steps":
            true = int(exact.value)
            hi = max(4, 2 * min(true, 20) + 2)
            wrong = rng.choice([v for v in range(hi + 1) if v != true])
            return EvaluationReply(value=float(wrong), text=str(wrong))
        wrong = rng.choice([v for v in range(11) if v != round(exact.value)])
        return EvaluationReply(value=float(wrong), text=str(wrong))
