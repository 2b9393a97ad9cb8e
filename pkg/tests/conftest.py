import random
import sys

from hypothesis import settings

from logigrid.core import LogicalLocation, SpatialQuad, TableCell, TableGrid
from logigrid.metrics.tree import Node
from logigrid.synth import SynthConfig, generate_table

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def grid(*locs, quads=False):
    """Grid from location tuples; optional unit-box quads placed at the logical slots."""
    cells = []
    for k, loc in enumerate(locs):
        l = LogicalLocation(*loc)
        q = None
        if quads:
            q = SpatialQuad.from_box(10 + 20 * l.c_s, 10 + 20 * l.r_s, 30 + 20 * l.c_e, 30 + 20 * l.r_e)
        cells.append(TableCell(k, l, q))
    return TableGrid(tuple(cells), (1000.0, 1000.0) if quads else None)


def synth_grid(seed, rows=(1, 8), cols=(1, 8), span=0.3, holes=0.0, jitter=0.0):
    cfg = SynthConfig(n_tables=1, rows=rows, cols=cols, span_probability=span,
                      hole_probability=holes, jitter=jitter, seed=seed)
    return generate_table(cfg.validate(), 0)


# -- ordered trees ------------------------------------------------------------


def random_tree(rng: random.Random, size: int, alphabet="abc") -> Node:
    nodes = [Node(rng.choice(alphabet), [])]
    for _ in range(size - 1):
        parent = rng.choice(nodes)
        child = Node(rng.choice(alphabet), [])
        parent.children.insert(rng.randint(0, len(parent.children)), child)
        nodes.append(child)
    return nodes[0]


def _orders(root):
    pre, post, labels = [], [], []

    def walk(n):
        k = len(labels)
        labels.append(n.label)
        pre.append(k)
        for c in n.children:
            walk(c)
        post.append(k)

    if root is not None:
        walk(root)
    pre_rank = {k: i for i, k in enumerate(pre)}
    post_rank = {k: i for i, k in enumerate(post)}
    return labels, pre_rank, post_rank


def brute_force_ted(t1, t2) -> int:
    """Minimum edit-script cost via exhaustive search over Tai mappings.

    A mapping is valid iff it is one-to-one and preserves both preorder and
    postorder relations between every two mapped pairs; its cost is renames
    plus the unmapped nodes on either side.
    """
    l1, pre1, post1 = _orders(t1)
    l2, pre2, post2 = _orders(t2)
    n1, n2 = len(l1), len(l2)
    best = n1 + n2

    def ok(a, b, pairs):
        for x, y in pairs:
            if (pre1[a] < pre1[x]) != (pre2[b] < pre2[y]):
                return False
            if (post1[a] < post1[x]) != (post2[b] < post2[y]):
                return False
        return True

    def search(i, used, pairs, cost):
        nonlocal best
        if i == n1:
            best = min(best, cost + n1 + n2 - 2 * len(pairs))
            return
        search(i + 1, used, pairs, cost)
        for j in range(n2):
            if j not in used and ok(i, j, pairs):
                pairs.append((i, j))
                used.add(j)
                search(i + 1, used, pairs, cost + (l1[i] != l2[j]))
                used.discard(j)
                pairs.pop()

    search(0, set(), [], 0)
    return best


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
