import pytest
from hypothesis import given, strategies as st

from totsearch.core import (Node, NodeStatus, SearchBudget, SearchTree, State, Thought, count_tokens,
                            extend_state, reconstruct_path, root_state, world_key)
from totsearch.errors import ConfigError, UnknownNodeError

texts = st.text(alphabet="abc xyz.-", min_size=1, max_size=20).filter(lambda t: t.strip() and t != "\n")


def test_thought_defaults_token_count_to_whitespace_count():
    assert Thought("move A to B").token_count == 4
    assert Thought("x", token_count=7).token_count == 7


def test_thought_strips_one_trailing_newline():
    assert Thought("step\n").text == "step"
    assert Thought("step\n\n").text == "step\n"


@pytest.mark.parametrize("bad", ["", "\n"])
def test_thought_rejects_empty(bad):
    with pytest.raises(ValueError):
        Thought(bad)


def test_thought_rejects_positive_logprob():
    with pytest.raises(ValueError):
        Thought("a", logprob=0.1)
    assert Thought("a", logprob=0.0).logprob == 0.0


def test_thought_equality_ignores_metadata():
    assert Thought("a b", 3, -1.0) == Thought("a b", 9, None)
    assert len({Thought("a"), Thought("a", logprob=-2.0)}) == 1


def test_state_render_and_depth():
    s = extend_state(extend_state(root_state("P"), Thought("one")), Thought("two"))
    assert s.depth == 2
    assert s.texts == ("one", "two")
    assert s.render() == "P\none\ntwo"


@given(st.lists(texts, max_size=6))
def test_state_depth_is_thought_count(items):
    s = root_state("prompt")
    for i, t in enumerate(items):
        s = extend_state(s, Thought(t))
        assert s.depth == i + 1
    assert s.render().count("\n") >= len(items)


def test_node_status_transitions():
    n = Node(0, root_state("p"))
    n.set_status(NodeStatus.EXPANDED)
    n.set_status(NodeStatus.GOAL)
    with pytest.raises(ValueError):
        n.set_status(NodeStatus.OPEN)
    m = Node(1, root_state("p"))
    m.set_status("pruned")
    with pytest.raises(ValueError):
        m.set_status(NodeStatus.EXPANDED)
    e = Node(2, root_state("p"), status=NodeStatus.EXPANDED)
    with pytest.raises(ValueError):
        e.set_status(NodeStatus.PRUNED)


def test_node_value_is_mean_backup():
    n = Node(0, root_state("p"))
    assert n.value == 0.0
    n.visits, n.value_sum = 4, 3.0
    assert n.value == 0.75


def _chain_tree(k):
    tree = SearchTree()
    node = tree.add(root_state("p"))
    for i in range(k):
        node = tree.add(extend_state(node.state, Thought(f"t{i}")), node.id)
    return tree, node


def test_tree_ids_are_dense_and_children_tracked():
    tree, last = _chain_tree(3)
    assert [n.id for n in tree] == [0, 1, 2, 3]
    assert [c.id for c in tree.children(0)] == [1]
    assert tree.children(last.id) == []
    assert 3 in tree and 4 not in tree


def test_tree_rejects_bad_structure():
    tree = SearchTree()
    with pytest.raises(ValueError):
        tree.add(extend_state(root_state("p"), Thought("x")))
    root = tree.add(root_state("p"))
    with pytest.raises(ValueError):
        tree.add(root_state("p"))
    with pytest.raises(ValueError):
        tree.add(root_state("p"), root.id)
    with pytest.raises(ValueError):
        tree.add(extend_state(root_state("other"), Thought("x")), root.id)


def test_unknown_node():
    tree, _ = _chain_tree(1)
    with pytest.raises(UnknownNodeError):
        tree[5]
    with pytest.raises(KeyError):
        tree.children(9)


@given(st.integers(0, 8))
def test_reconstruct_path_recovers_thoughts(k):
    tree, last = _chain_tree(k)
    path = reconstruct_path(last.id, tree)
    assert [t.text for t in path] == [f"t{i}" for i in range(k)]
    assert tuple(path) == last.state.thoughts


def test_world_key_without_projector():
    assert world_key(root_state("p"), None) is None
    assert world_key(root_state("p"), lambda s: s.depth) == 0


def test_budget_validation():
    SearchBudget(max_expansions=0)
    with pytest.raises(ConfigError):
        SearchBudget(max_depth=0)
    with pytest.raises(ConfigError):
        SearchBudget(max_tokens=0)
    with pytest.raises(ConfigError):
        SearchBudget(max_expansions=-1)


def test_count_tokens():
    assert count_tokens("") == 0
    assert count_tokens("  a  b\tc\n") == 3
