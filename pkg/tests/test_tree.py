import random

from hypothesis import given, strategies as st

from logigrid.metrics.tree import Node, postorder, tree_edit_distance

from conftest import brute_force_ted, random_tree


def chain(*labels):
    root = Node(labels[0])
    cur = root
    for l in labels[1:]:
        nxt = Node(l)
        cur.children.append(nxt)
        cur = nxt
    return root


def test_postorder_indices():
    # a(b(c, d), e)
    t = Node("a", [Node("b", [Node("c"), Node("d")]), Node("e")])
    p = postorder(t)
    assert [n.label for n in p.nodes] == ["c", "d", "b", "e", "a"]
    assert p.lmld.tolist() == [0, 1, 0, 3, 0]
    assert p.keyroots.tolist() == [1, 3, 4]


def test_postorder_deep_tree_no_recursion_limit():
    t = chain(*range(5000))
    assert len(postorder(t).nodes) == 5000


def test_known_distances():
    a = Node("f", [Node("d", [Node("a"), Node("c", [Node("b")])]), Node("e")])
    b = Node("f", [Node("c", [Node("d", [Node("a"), Node("b")])]), Node("e")])
    # classic example pair from the tree-edit literature
    assert tree_edit_distance(a, b) == 2
    assert tree_edit_distance(None, a) == 6
    assert tree_edit_distance(a, None) == 6
    assert tree_edit_distance(None, None) == 0


def test_matches_exhaustive_search():
    rng = random.Random(2)
    for _ in range(200):
        t1 = random_tree(rng, rng.randint(1, 6))
        t2 = random_tree(rng, rng.randint(1, 6))
        assert tree_edit_distance(t1, t2) == brute_force_ted(t1, t2)


trees = st.builds(lambda seed, n: random_tree(random.Random(seed), n),
                  st.integers(0, 10**6), st.integers(1, 5))


@given(trees, trees, trees)
def test_metric_axioms(a, b, c):
    ab, bc, ac = tree_edit_distance(a, b), tree_edit_distance(b, c), tree_edit_distance(a, c)
    assert ab == tree_edit_distance(b, a)
    assert ac <= ab + bc
    assert tree_edit_distance(a, a) == 0
    assert ab <= a.size() + b.size()


@given(trees, trees)
def test_random_pairs_match_oracle(a, b):
    assert brute_force_ted(a, b) == tree_edit_distance(a, b)
