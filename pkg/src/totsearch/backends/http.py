"""Chat-completion client over HTTP+JSON.

Request body (POST ``{base_url}/chat/completions``)::

    model        str
    messages     [{"role": "user", "content": <state>\\n<instruction>}]
    temperature  float
    top_p        float        (omitted when unset)
    n            int
    max_tokens   int
    stop         [str]
    logprobs     bool
    top_k        int          (omitted when unset; not all servers accept it)

Reply fields read: ``choices[i].message.content``,
``choices[i].logprobs.content[j].logprob`` (optional) and
``usage.{prompt_tokens, completion_tokens}``.
"""
from __future__ import annotations

import logging
import os
import re
import time
from typing import Optional

import httpx

from ..core import State, count_tokens
from ..scoring import DEFAULT_LABELS, parse_scalar
from ..errors import EvaluationError
from .base import (
    EVALUATE_INSTRUCTION,
    GOAL_INSTRUCTION,
    VALIDATE_INSTRUCTION,
    Backend,
    BackendReply,
    Completion,
    ContextOverflowError,
    EvaluationReply,
    GenerationRequest,
    HTTPStatusError,
    Judgement,
    MalformedReplyError,
    TransportError,
    Usage,
    truncate_at_stop,
)

log = logging.getLogger(__name__)

ENV_BASE_URL = "TOTSEARCH_BASE_URL"
ENV_API_KEY = "TOTSEARCH_API_KEY"
ENV_MODEL = "TOTSEARCH_MODEL"

_BOOL = re.compile(r"\b(true|false|yes|no)\b", re.I)


def build_payload(model: str, prompt: str, request: GenerationRequest) -> dict:
    payload = {
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": request.temperature,
        "n": request.n,
        "max_tokens": request.max_tokens,
        "stop": list(request.stop),
        "logprobs": request.want_logprobs,
    }
    if request.top_p is not None:
        payload["top_p"] = request.top_p
    if request.top_k is not None:
        payload["top_k"] = request.top_k
    return payload


def parse_reply(body: dict, request: GenerationRequest) -> BackendReply:
    try:
        choices = body["choices"]
        usage = body.get("usage") or {}
        comps = []
        for choice in choices[: request.n]:
            text = truncate_at_stop(choice["message"]["content"] or "", request.stop)
            lp_block = choice.get("logprobs") or {}
            tokens = lp_block.get("content") if isinstance(lp_block, dict) else None
            logprob = None
            n_tok = count_tokens(text) or 1
            if request.want_logprobs and tokens:
                logprob = min(0.0, sum(float(t["logprob"]) for t in tokens))
                n_tok = len(tokens)
            comps.append(Completion(text, n_tok, logprob))
        u = Usage(int(usage.get("prompt_tokens", 0)), int(usage.get("completion_tokens", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedReplyError(f"unexpected reply shape: {exc!r}") from None
    return BackendReply(tuple(comps), u)


class HTTPBackend(Backend):
    name = "http"

    def __init__(self, base_url: Optional[str] = None, model: Optional[str] = None,
                 api_key: Optional[str] = None, timeout: float = 60.0, max_attempts: int = 3,
                 backoff: float = 0.5, transport: Optional[httpx.BaseTransport] = None,
                 labels=DEFAULT_LABELS, sleep=time.sleep):
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL, "")).rstrip("/")
        if not self.base_url:
            raise ValueError(f"no endpoint configured (set {ENV_BASE_URL})")
        self.model = model or os.environ.get(ENV_MODEL, "default")
        key = api_key if api_key is not None else os.environ.get(ENV_API_KEY, "")
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self.client = httpx.Client(base_url=self.base_url, headers=headers, timeout=timeout,
                                   transport=transport)
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.labels = labels
        self._sleep = sleep

    def _post(self, payload: dict) -> dict:
        delay = self.backoff
        for attempt in range(1, self.max_attempts + 1):
            try:
                resp = self.client.post("/chat/completions", json=payload)
            except httpx.TimeoutException as exc:
                err = TransportError(f"timeout: {exc}", attempts=attempt)
            except httpx.TransportError as exc:
                err = TransportError(f"transport failure: {exc}", attempts=attempt)
            else:
                if resp.status_code < 400:
                    try:
                        return resp.json()
                    except ValueError:
                        raise MalformedReplyError("reply is not JSON", attempts=attempt) from None
                text = resp.text[:500]
                if resp.status_code == 400 and "context" in text.lower():
                    raise ContextOverflowError(text, status=400, attempts=attempt)
                err = HTTPStatusError(f"HTTP {resp.status_code}: {text}", status=resp.status_code,
                                      attempts=attempt)
            if not err.retryable or attempt == self.max_attempts:
                raise err
            log.warning("attempt %d failed (%s); retrying in %.2fs", attempt, err, delay)
            self._sleep(delay)
            delay *= 2
        raise AssertionError("unreachable")

    def complete_chat(self, prompt: str, request: GenerationRequest) -> BackendReply:
        body = self._post(build_payload(self.model, prompt, request))
        return parse_reply(body, request)

    def generate(self, state: State, request: GenerationRequest) -> BackendReply:
        return self.complete_chat(f"{request.rendered_state}\n{request.instruction}", request)

    def _ask(self, state: State, instruction: str, max_tokens: int = 16) -> tuple[str, Usage]:
        req = GenerationRequest(state.render(), instruction, temperature=0.0, max_tokens=max_tokens,
                                want_logprobs=False)
        reply = self.complete_chat(f"{req.rendered_state}\n{instruction}", req)
        text = reply.completions[0].text if reply.completions else ""
        return text, reply.usage

    def evaluate(self, state: State) -> EvaluationReply:
        text, usage = self._ask(state, EVALUATE_INSTRUCTION)
        lowered = text.strip().lower()
        for label in self.labels:
            if re.search(rf"\b{re.escape(label.lower())}\b", lowered):
                return EvaluationReply(label=label, text=text, usage=usage)
        try:
            return EvaluationReply(value=parse_scalar(text), text=text, usage=usage)
        except EvaluationError:
            raise EvaluationError(f"unparsable evaluation reply {text!r}") from None

    def _judge(self, state: State, instruction: str) -> Judgement:
        text, usage = self._ask(state, instruction, max_tokens=4)
        m = _BOOL.search(text)
        if m is None:
            return Judgement(False, f"unparsable verdict {text!r}", usage)
        return Judgement(m.group(1).lower() in ("true", "yes"), text.strip(), usage)

    def test_goal(self, state: State) -> Judgement:
        return self._judge(state, GOAL_INSTRUCTION)

    def validate(self, state: State) -> Judgement:
        return self._judge(state, VALIDATE_INSTRUCTION)
