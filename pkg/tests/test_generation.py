import pytest
from hypothesis import given, settings, strategies as st

from totsearch.backends import MockBackend, OracleBackend, ScriptedOracle
from totsearch.backends.base import Backend, BackendReply, Completion, Usage
from totsearch.core import State, Thought, root_state
from totsearch.domains import Game24Domain, bundled_instance
from totsearch.errors import ConfigError
from totsearch.generation import (Decoding, DiversityConfig, DomainActions, Grammar, Length,
                                  ProposalConfig, ProposalReport, Semantic, apply_constraints,
                                  diversity_filter, ngrams, parse_enumerated, propose_successors)

Z1 = "Pick block `A' from `B' and place it on the table."
Z2 = "Pick block `B' from `C' and place it on block `A'."
Z3 = ["Pick block `A' from the table and place it on block `C'.",
      "Pick block `C' from the table and place it on block `B'.",
      "Pick block `B' from block `A' and place it on the table."]


def T(*texts):
    return [Thought(t) for t in texts]


class CountingBackend(Backend):
    """Returns scripted completions in order and counts calls."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.calls = []

    def generate(self, state, request):
        self.calls.append(request)
        text = self.replies[len(self.calls) - 1] if len(self.calls) <= len(self.replies) else "zzz"
        return BackendReply((Completion(text, len(text.split())),), Usage(1, len(text.split())))

    def evaluate(self, state):
        raise NotImplementedError

    def test_goal(self, state):
        raise NotImplementedError

    def validate(self, state):
        raise NotImplementedError


def case_study_state(d):
    return State(d.prompt, tuple(T(Z1, Z2)))


def test_case_study_expansion_yields_three_candidates():
    d = bundled_instance("blocks3_c_on_b")
    be = ScriptedOracle(d, {(Z1, Z2): Z3})
    cfg = ProposalConfig("independent", branch=3, decoding=Decoding(top_k=3))
    out = propose_successors(case_study_state(d), cfg, be, [DomainActions(d.is_action)])
    assert [t.text for t in out] == Z3
    assert "Pick block `C' from the table and place it on block `B'." in [t.text for t in out]


def test_branch_one_returns_first_legal_action():
    d = bundled_instance("blocks3_c_on_b")
    be = OracleBackend(d)
    s = root_state(d.prompt)
    out = propose_successors(s, ProposalConfig(branch=1), be)
    assert [t.text for t in out] == [d.legal_thoughts(s)[0]]


def test_semantic_constraint_removes_division_by_zero():
    d = Game24Domain([1, 1, 5], target=24)
    s = State(d.prompt, (Thought("1 - 1 = 0 (left: 0 5)"),))
    bad = ["5 / 0 = 0 (left: 0)", "5 / 0 = 5 (left: 5)"]
    be = ScriptedOracle(d, {s.texts: bad + d.legal_thoughts(s)})
    out = propose_successors(s, ProposalConfig(branch=20), be, [Semantic(d.validate)])
    texts = [t.text for t in out]
    assert texts and not any("/ 0" in t for t in texts)
    assert all(d.validate(State(d.prompt, s.thoughts + (t,)))[0] for t in out)


def test_exhaustive_game24_oracle_never_proposes_zero_division():
    d = Game24Domain([1, 1, 2, 3])
    be = OracleBackend(d)
    frontier = [root_state(d.prompt)]
    seen = 0
    while frontier:
        s = frontier.pop()
        out = propose_successors(s, ProposalConfig(branch=40, retries=0), be, [Semantic(d.validate)])
        for t in out:
            seen += 1
            assert "/ 0 " not in t.text
            frontier.append(State(s.prompt, s.thoughts + (t,)))
    assert seen > 100


def test_empty_chain_is_identity():
    cands = T("a", "b c", "d")
    assert apply_constraints(cands, [], root_state("p")) == cands


def test_length_constraint_rejects_long_candidate():
    rejected = []
    out = apply_constraints(T("one two three four five six seven eight nine", "short one"),
                            [Length(5)], root_state("p"), rejected)
    assert [t.text for t in out] == ["short one"]
    assert rejected[0][1].startswith("length")


def test_domain_constraint_rejects_non_action():
    d = bundled_instance("blocks3_c_on_b")
    out = apply_constraints(T("fly block A to the moon", Z1), [DomainActions(d.is_action)], root_state("p"))
    assert [t.text for t in out] == [Z1]


def test_grammar_crash_rejects_only_that_candidate():
    def parse(text):
        if "boom" in text:
            raise RuntimeError("parser crashed")
        return text

    rejected = []
    out = apply_constraints(T("ok", "boom", "fine"), [Grammar(parse)], root_state("p"), rejected)
    assert [t.text for t in out] == ["ok", "fine"]
    assert "parser crashed" in rejected[0][1]


def test_diversity_filter_examples():
    assert [t.text for t in diversity_filter(T("a b c", "a b c"), 2, 1)] == ["a b c"]
    assert len(diversity_filter(T("a b", "c d", "e f"), 2, 1)) == 3
    # trigram sets: {1+2, +2=, 2=3} and {1+2, +2=, 2=3, =3extra}: 3 shared > 4 - 2
    assert [t.text for t in diversity_filter(T("1 + 2 = 3", "1 + 2 = 3 extra"), 3, 2)] == ["1 + 2 = 3"]


def test_diversity_filter_rejects_on_derived_overlap_counts():
    # oracle: count shared bigrams by hand against the union of accepted sets
    cands = T("a b c d", "b c d e", "x y", "a b x y")
    # "b c d e": bigrams {bc, cd, de}, shared {bc, cd} = 2 > 3 - 2 = 1 -> rejected at min_distinct=2
    out = diversity_filter(cands, 2, 2)
    assert [t.text for t in out] == ["a b c d", "x y"]
    # at min_distinct=1 the threshold is 2, so "b c d e" survives; "a b x y" shares {ab, xy}=2 of 3 -> kept
    assert [t.text for t in diversity_filter(cands, 2, 1)] == ["a b c d", "b c d e", "x y", "a b x y"]


def test_ngrams_short_text():
    assert ngrams("a", 3) == {("a",)}
    assert ngrams("", 2) == set()
    with pytest.raises(ValueError):
        diversity_filter(T("a"), 0, 1)


def test_parse_enumerated_strips_markers():
    text = "1. first\n2) second\n- third\n* fourth\n\n  fifth  "
    assert parse_enumerated(text) == ["first", "second", "third", "fourth", "fifth"]


def test_enumerated_makes_one_call_and_parses_lines():
    be = CountingBackend(["1. a\n2. b\n3. a\n4. c"])
    report = ProposalReport()
    out = propose_successors(root_state("p"), ProposalConfig("enumerated", branch=3), be, report=report)
    assert len(be.calls) == 1 and be.calls[0].list_size == 3
    assert [t.text for t in out] == ["a", "b", "c"]
    assert report.duplicates == 1


def test_independent_calls_b_times_and_dedupes():
    be = CountingBackend(["x", "y", "x"])
    out = propose_successors(root_state("p"), ProposalConfig("independent", branch=3), be)
    assert len(be.calls) == 3
    assert [t.text for t in out] == ["x", "y"]
    assert [r.draw for r in be.calls] == [0, 1, 2]


def test_diversity_oversamples_two_b():
    be = CountingBackend(["a b", "a b", "c d", "e f", "g h", "i j"])
    cfg = ProposalConfig("diversity", branch=3, diversity=DiversityConfig(ngram_n=2, min_distinct=1))
    out = propose_successors(root_state("p"), cfg, be)
    assert len(be.calls) == 6
    assert [t.text for t in out] == ["a b", "c d", "e f"]


def test_limit_tightens_branch():
    be = CountingBackend(["a", "b", "c"])
    out = propose_successors(root_state("p"), ProposalConfig(branch=3), be, limit=1)
    assert len(be.calls) == 1 and len(out) == 1


def test_proposal_config_validation():
    with pytest.raises(ConfigError):
        ProposalConfig(branch=0)
    with pytest.raises(ConfigError):
        ProposalConfig("diversity")
    with pytest.raises(ConfigError):
        ProposalConfig("beam")
    with pytest.raises(ConfigError):
        Decoding(top_p=0.0)
    with pytest.raises(ConfigError):
        Length(0)


# -- properties --------------------------------------------------------------

_D = bundled_instance("blocks3_c_on_b")
_chain_pool = [DomainActions(_D.is_action), Length(12), Semantic(_D.validate), Length(9)]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31), st.sampled_from(["independent", "enumerated"]),
       st.floats(0.0, 3.0), st.floats(0.0, 1.0))
def test_branch_bound_and_survivors_pass_chain(b, seed, strategy, temp, invalid_rate):
    be = MockBackend(_D, seed=seed, invalid_rate=invalid_rate)
    cfg = ProposalConfig(strategy, branch=b, decoding=Decoding(temperature=temp))
    s = root_state(_D.prompt)
    out = propose_successors(s, cfg, be, _chain_pool, seed=seed)
    assert len(out) <= b
    assert len({t.text for t in out}) == len(out)
    for t in out:
        assert all(c.check(s, t.text)[0] for c in _chain_pool)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.text(alphabet="ab c", min_size=1, max_size=12).filter(str.strip), max_size=8),
       st.integers(0, len(_chain_pool)))
def test_appending_a_constraint_never_enlarges_survivors(texts, k):
    cands = [Thought(t) for t in texts]
    s = root_state(_D.prompt)
    chain = [Length(3), Length(2), Grammar(lambda t: t.split()[1]), Length(1)]
    for i in range(len(chain)):
        shorter = apply_constraints(cands, chain[:i], s)
        longer = apply_constraints(cands, chain[: i + 1], s)
        assert set(longer) <= set(shorter)
        assert [c for c in shorter if c in longer] == longer


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 1000), st.integers(1, 6))
def test_seeded_mock_is_reproducible(seed, b):
    s = root_state(_D.prompt)
    cfg = ProposalConfig(branch=b, decoding=Decoding(temperature=1.5))
    a = propose_successors(s, cfg, MockBackend(_D, seed=3), seed=seed)
    c = propose_successors(s, cfg, MockBackend(_D, seed=3), seed=seed)
    assert [t.text for t in a] == [t.text for t in c]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.text(alphabet="abcd ", min_size=1, max_size=15).filter(str.strip), max_size=10),
       st.integers(1, 3), st.integers(0, 3))
def test_diversity_filter_is_ordered_subset(texts, n, md):
    cands = [Thought(t) for t in texts]
    out = diversity_filter(cands, n, md)
    it = iter(cands)
    assert all(any(o is c for c in it) for o in out)
    if cands:
        assert out[0] is cands[0] or not ngrams(cands[0].text, n)
