"""Compiled vs pure-Python kernels on realistic inputs.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one row per kernel with best-of-N wall time for each backend and the
speed-up, after checking that both backends return the same values.
"""

import argparse
import sys
import timeit

import numpy as np

from logigrid._kernels import _pykernels
from logigrid.metrics.teds import markup_tree, table_rename_costs
from logigrid.metrics.tree import postorder
from logigrid.synth import SynthConfig, generate
from logigrid.transform import to_markup

try:
    from logigrid._kernels import _ckernels
except ImportError:
    _ckernels = None


def _ted_case():
    a, b = generate(SynthConfig(n_tables=2, rows=(12, 12), cols=(8, 8), span_probability=0.3, seed=1))
    p1, p2 = postorder(markup_tree(to_markup(a))), postorder(markup_tree(to_markup(b)))
    costs = table_rename_costs(p1.nodes, p2.nodes, False)
    return (p1.lmld, p1.keyroots, p2.lmld, p2.keyroots, costs), f"TED {len(p1.nodes)}x{len(p2.nodes)} nodes"


def _lev_case():
    rng = np.random.default_rng(0)
    words = ["".join(rng.choice(list("abcdefgh"), size=40)) for _ in range(2)]
    return tuple(words), "Levenshtein 40x40 chars"


def _adam_case():
    n = 200_000
    rng = np.random.default_rng(0)
    return (rng.normal(size=n), rng.normal(size=n), np.zeros(n), np.zeros(n), 1e-3, 0.9, 0.999, 1e-8), \
        f"Adam step {n} params"


def _best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the Python backend is available", file=sys.stderr)
        return 1
    print(f"{'kernel':32s} {'python':>12s} {'cython':>12s} {'speed-up':>9s}")
    for name, case in (("tree_distance", _ted_case), ("levenshtein", _lev_case), ("adam_update", _adam_case)):
        call_args, label = case()
        py, cy = getattr(_pykernels, name), getattr(_ckernels, name)
        if name == "adam_update":
            # in-place update: give each backend its own state
            a1 = tuple(x.copy() if isinstance(x, np.ndarray) else x for x in call_args)
            a2 = tuple(x.copy() if isinstance(x, np.ndarray) else x for x in call_args)
            py(*a1)
            cy(*a2)
            assert np.allclose(a1[0], a2[0], rtol=1e-12)
        else:
            assert abs(py(*call_args) - cy(*call_args)) < 1e-9
        t_py, t_cy = _best(py, call_args, args.repeat), _best(cy, call_args, args.repeat)
        print(f"{label:32s} {t_py * 1e3:10.2f}ms {t_cy * 1e3:10.2f}ms {t_py / t_cy:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
