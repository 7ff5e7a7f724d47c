import json
import math

import httpx
import pytest
from hypothesis import given, settings, strategies as st

from totsearch.backends import (ContextOverflowError, GenerationRequest, HTTPBackend, HTTPStatusError,
                                MalformedReplyError, MockBackend, OracleBackend, RecordingBackend,
                                ReplayBackend, ReplayError, ScriptedOracle, TransportError)
from totsearch.backends.base import truncate_at_stop
from totsearch.backends.http import build_payload, parse_reply
from totsearch.core import State, Thought
from totsearch.domains import Game24Domain, bundled_instance
from totsearch.errors import EvaluationError

Z1 = "Pick block `A' from `B' and place it on the table."
Z2 = "Pick block `B' from `C' and place it on block `A'."
Z3 = ["Pick block `A' from the table and place it on block `C'.",
      "Pick block `C' from the table and place it on block `B'.",
      "Pick block `B' from block `A' and place it on the table."]

CASE = bundled_instance("blocks3_c_on_b")


def cs(*texts):
    return State(CASE.prompt, tuple(Thought(t) for t in texts))


def req(state, **kw):
    return GenerationRequest(state.render(), **kw)


# -- oracle -------------------------------------------------------------------------

def test_scripted_oracle_returns_case_study_candidates():
    be = ScriptedOracle(CASE, {(Z1, Z2): Z3})
    s = cs(Z1, Z2)
    texts, lps = [], []
    for draw in range(3):
        c = be.generate(s, req(s, draw=draw)).completions[0]
        texts.append(c.text)
        lps.append(c.logprob)
    assert texts == Z3
    assert lps == [pytest.approx(math.log(1 / 3))] * 3


def test_game24_oracle_root_includes_product():
    d = Game24Domain([4, 6])
    s = State(d.prompt)
    reply = OracleBackend(d).generate(s, req(s, list_size=10))
    assert "4 * 6 = 24 (left: 24)" in reply.completions[0].text.split("\n")


def test_oracle_evaluator_case_study_values():
    be = OracleBackend(CASE)
    assert be.evaluate(cs(Z1, Z2, Z3[2])).value == 1.0
    assert be.evaluate(cs(Z1, Z2, Z3[1])).value == 0.0
    assert be.evaluate(cs(Z1, Z2, Z3[0])).value == 99.0  # invalid: unreachable sentinel


def test_oracle_evaluator_modes():
    d = Game24Domain([4, 6])
    assert OracleBackend(d, evaluator_mode="label").evaluate(State(d.prompt)).label == "sure"
    bad = Game24Domain([1, 1])
    assert OracleBackend(bad, evaluator_mode="label").evaluate(State(bad.prompt)).label == "impossible"
    assert OracleBackend(d, evaluator_mode="scalar").evaluate(State(d.prompt)).value == 5.0
    assert OracleBackend(CASE, horizon=2).evaluate(cs()).value == 99.0


def test_goal_and_validate_interfaces():
    be = OracleBackend(CASE)
    assert be.test_goal(cs(Z1, Z2, Z3[1])).verdict
    assert not be.test_goal(cs()).verdict
    j = be.validate(cs(Z1, Z2, Z3[0]))
    assert (j.verdict, j.reason) == (False, "block A is not clear")
    assert be.validate(cs()).verdict
    g = Game24Domain([2, 3, 4])
    gb = OracleBackend(g)
    assert not gb.validate(State(g.prompt, (Thought("5 + 3 = 8 (left: 4 8)"),))).verdict
    end = State(g.prompt, (Thought("2 * 3 = 6 (left: 4 6)"), Thought("4 * 6 = 24 (left: 24)")))
    assert gb.test_goal(end).verdict


def test_oracle_logprobs_normalised_with_weights():
    be = OracleBackend(CASE, weights=lambda s, cands: list(range(1, len(cands) + 1)))
    s = cs(Z1)
    cands = be.candidates(s)
    assert math.fsum(math.exp(x) for x in be.candidate_logprobs(s, cands)) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 13), min_size=2, max_size=4))
def test_oracle_logprob_normalisation(nums):
    d = Game24Domain(nums)
    be = OracleBackend(d)
    s = State(d.prompt)
    m = len(be.candidates(s))
    reply = be.generate(s, req(s, n=m))
    assert abs(math.fsum(math.exp(c.logprob) for c in reply.completions) - 1.0) <= 1e-9


def test_oracle_enumerated_reply_has_item_logprobs():
    s = cs(Z1)
    c = OracleBackend(CASE).generate(s, req(s, list_size=2)).completions[0]
    assert len(c.text.split("\n")) == 2 and len(c.item_logprobs) == 2


def test_backends_do_not_mutate_state():
    s = cs(Z1)
    before = s.render()
    for be in (OracleBackend(CASE), MockBackend(CASE, seed=1, error_rate=0.5)):
        be.generate(s, req(s, n=3))
        be.evaluate(s)
        be.validate(s)
        be.test_goal(s)
    assert s.render() == before


# -- mock ---------------------------------------------------------------------------

def test_mock_temperature_zero_is_deterministic():
    be = MockBackend(CASE, seed=5)
    s = cs(Z1)
    replies = {be.generate(s, req(s, temperature=0.0, draw=d)).completions[0].text for d in range(5)}
    assert len(replies) == 1


def test_mock_without_noise_equals_oracle():
    mock, oracle = MockBackend(CASE, seed=9), OracleBackend(CASE)
    for s in [cs(), cs(Z1), cs(Z1, Z2), cs(Z1, Z2, Z3[2])]:
        assert mock.evaluate(s).value == oracle.evaluate(s).value


def test_mock_noise_changes_some_evaluations():
    g = Game24Domain([4, 9, 10, 13])
    be = MockBackend(g, seed=2, error_rate=1.0, evaluator_mode="label")
    exact = OracleBackend(g, evaluator_mode="label")
    s = State(g.prompt)
    assert be.evaluate(s).label != exact.evaluate(s).label


def test_mock_top_k_limits_support():
    be = MockBackend(CASE, seed=0)
    s = cs(Z1)
    cands = be.candidates(s)
    seen = {be.generate(s, req(s, top_k=1, draw=d)).completions[0].text for d in range(20)}
    assert seen == {cands[0]}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 50), st.floats(0.1, 3.0), st.floats(0, 1))
def test_mock_replies_are_reproducible(seed, draw, temp, inv):
    s = cs(Z1)
    r = req(s, temperature=temp, draw=draw, seed=seed, n=2)
    a = MockBackend(CASE, seed=seed, invalid_rate=inv, error_rate=0.3)
    b = MockBackend(CASE, seed=seed, invalid_rate=inv, error_rate=0.3)
    assert json.dumps(a.generate(s, r).to_dict()) == json.dumps(b.generate(s, r).to_dict())
    assert a.evaluate(s) == b.evaluate(s)


# -- http ---------------------------------------------------------------------------

def _chat_body(texts, logprobs=True, usage=(10, 5)):
    choices = []
    for t in texts:
        ch = {"message": {"role": "assistant", "content": t}}
        if logprobs:
            ch["logprobs"] = {"content": [{"token": w, "logprob": -0.5} for w in t.split()]}
        choices.append(ch)
    return {"choices": choices, "usage": {"prompt_tokens": usage[0], "completion_tokens": usage[1]}}


def _backend(handler, **kw):
    return HTTPBackend(base_url="http://test.local/v1", model="m", api_key="k",
                       transport=httpx.MockTransport(handler), sleep=lambda s: None, **kw)


def test_payload_fields():
    r = GenerationRequest("state", "inst", temperature=0.7, top_p=0.9, n=2, max_tokens=12)
    p = build_payload("m", "hello", r)
    assert p == {"model": "m", "messages": [{"role": "user", "content": "hello"}], "temperature": 0.7,
                 "n": 2, "max_tokens": 12, "stop": ["\n"], "logprobs": True, "top_p": 0.9}


def test_http_generate_two_completions_and_auth():
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        seen["url"] = str(request.url)
        return httpx.Response(200, json=_chat_body(["move one", "move two\nextra"]))

    be = _backend(handler)
    s = cs()
    reply = be.generate(s, req(s, n=2))
    assert [c.text for c in reply.completions] == ["move one", "move two"]
    assert all("\n" not in c.text for c in reply.completions)
    assert reply.completions[0].logprob == -1.0 and reply.completions[0].token_count == 2
    assert (reply.usage.prompt_tokens, reply.usage.completion_tokens) == (10, 5)
    assert seen["auth"] == "Bearer k"
    assert seen["url"] == "http://test.local/v1/chat/completions"
    assert seen["body"]["messages"][0]["content"].endswith("Suggest a next step.")


def test_http_missing_logprobs_degrades_to_none():
    be = _backend(lambda r: httpx.Response(200, json=_chat_body(["a b"], logprobs=False)))
    s = cs()
    c = be.generate(s, req(s)).completions[0]
    assert c.logprob is None and c.token_count == 2


def test_http_retries_then_succeeds():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) < 3:
            return httpx.Response(503, text="busy")
        return httpx.Response(200, json=_chat_body(["ok"]))

    sleeps = []
    be = HTTPBackend(base_url="http://t", transport=httpx.MockTransport(handler), sleep=sleeps.append,
                     backoff=0.5)
    s = cs()
    assert be.generate(s, req(s)).completions[0].text == "ok"
    assert sleeps == [0.5, 1.0]


def test_http_gives_up_after_max_attempts():
    be = _backend(lambda r: httpx.Response(500, text="down"))
    s = cs()
    with pytest.raises(HTTPStatusError) as exc:
        be.generate(s, req(s))
    assert exc.value.attempts == 3 and exc.value.status == 500 and exc.value.retryable


def test_http_client_errors_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401, text="no")

    with pytest.raises(HTTPStatusError) as exc:
        s = cs()
        _backend(handler).generate(s, req(s))
    assert len(calls) == 1 and not exc.value.retryable


def test_http_context_overflow():
    be = _backend(lambda r: httpx.Response(400, text="maximum context length exceeded"))
    s = cs()
    with pytest.raises(ContextOverflowError):
        be.generate(s, req(s))


def test_http_transport_failure():
    def handler(request):
        raise httpx.ConnectError("refused")

    s = cs()
    with pytest.raises(TransportError) as exc:
        _backend(handler).generate(s, req(s))
    assert exc.value.attempts == 3


def test_http_malformed_reply():
    with pytest.raises(MalformedReplyError):
        parse_reply({"nope": []}, GenerationRequest("s"))
    be = _backend(lambda r: httpx.Response(200, text="not json"))
    s = cs()
    with pytest.raises(MalformedReplyError):
        be.generate(s, req(s))


def test_http_evaluate_and_judgements():
    replies = iter(["Probably maybe.", "7 more steps", "I cannot tell", "True", "no", "hmm"])

    def handler(request):
        return httpx.Response(200, json=_chat_body([next(replies)], logprobs=False))

    be = _backend(handler)
    s = cs()
    assert be.evaluate(s).label == "maybe"
    assert be.evaluate(s).value == 7.0
    with pytest.raises(EvaluationError):
        be.evaluate(s)
    assert be.test_goal(s).verdict
    assert not be.validate(s).verdict
    j = be.validate(s)
    assert not j.verdict and "unparsable" in j.reason


def test_http_requires_endpoint(monkeypatch):
    monkeypatch.delenv("TOTSEARCH_BASE_URL", raising=False)
    with pytest.raises(ValueError):
        HTTPBackend()
    monkeypatch.setenv("TOTSEARCH_BASE_URL", "http://env.local/")
    assert HTTPBackend().base_url == "http://env.local"


def test_truncate_at_stop():
    assert truncate_at_stop("a\nb", ("\n",)) == "a"
    assert truncate_at_stop("a\n\nb\nc", ("\n\n",)) == "a"
    assert truncate_at_stop("abc", ("\n",)) == "abc"


def test_request_validation():
    with pytest.raises(ValueError):
        GenerationRequest("s", n=0)
    with pytest.raises(ValueError):
        GenerationRequest("s", stop=())
    r = GenerationRequest("s", stop=["\n"], list_size=3)
    assert GenerationRequest.from_dict(r.to_dict()) == r


# -- record / replay ------------------------------------------------------------------

def test_record_and_replay_round_trip(tmp_path):
    rec = RecordingBackend(MockBackend(CASE, seed=4, error_rate=0.2))
    s = cs(Z1)
    r = req(s, n=2, temperature=1.3)
    first = [rec.generate(s, r), rec.evaluate(s), rec.test_goal(s), rec.validate(s), rec.generate(s, r)]
    path = tmp_path / "t.jsonl"
    rec.save(path)
    rep = ReplayBackend.from_file(path)
    again = [rep.generate(s, r), rep.evaluate(s), rep.test_goal(s), rep.validate(s), rep.generate(s, r)]
    assert [x.to_dict() for x in again] == [x.to_dict() for x in first]
    with pytest.raises(ReplayError):
        rep.generate(s, r)
