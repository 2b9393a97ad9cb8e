import random
import warnings

import pytest
from hypothesis import given, strategies as st
from nltk.translate.bleu_score import corpus_bleu as nltk_corpus_bleu

from logigrid.metrics.bleu import bleu, corpus_bleu, ngram_counts
from logigrid.transform import to_markup

from conftest import synth_grid


def reference(preds, refs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return nltk_corpus_bleu([[list(r)] for r in refs], [list(p) for p in preds])


def tokens(seed, **kw):
    return list(to_markup(synth_grid(seed, **kw)).tokens)


def test_identical_is_one():
    t = tokens(1)
    assert bleu(t, t) == 1.0


def test_disjoint_is_zero():
    assert bleu(["a", "b", "c", "d", "e"], ["v", "w", "x", "y", "z"]) == 0.0


def test_empty_prediction_is_zero():
    assert bleu([], ["a", "b", "c", "d"]) == 0.0


def test_one_deletion_out_of_twenty():
    ref = [f"t{k % 7}" for k in range(20)]
    pred = ref[:9] + ref[10:]
    assert bleu(pred, ref) == pytest.approx(reference([pred], [ref]), abs=1e-12)
    assert 0.0 < bleu(pred, ref) < 1.0


def test_accepts_markup_strings():
    s = str(to_markup(synth_grid(3)))
    assert bleu(s, s) == 1.0


def test_ngram_counts():
    assert ngram_counts(["a", "b", "a", "b"], 2) == {("a", "b"): 2, ("b", "a"): 1}


def test_corpus_pairs_against_reference():
    rng = random.Random(11)
    preds, refs = [], []
    for k in range(20):
        ref = tokens(k, rows=(2, 6), cols=(2, 6))
        pred = list(ref)
        for _ in range(rng.randint(0, 4)):
            op = rng.random()
            pos = rng.randrange(len(pred))
            if op < 0.4:
                del pred[pos]
            elif op < 0.7:
                pred.insert(pos, rng.choice(["<td>", "</td>", "<tr>", '<td colspan="2">']))
            else:
                pred[pos] = rng.choice(["<td>", "</tr>"])
        preds.append(pred)
        refs.append(ref)
    assert corpus_bleu(preds, refs) == pytest.approx(reference(preds, refs), abs=1e-9)
    for p, r in zip(preds, refs):
        assert bleu(p, r) == pytest.approx(reference([p], [r]), abs=1e-9)


# nltk pads the n-gram count of sentences shorter than n to 1; the two conventions
# agree once every sentence has at least max_n tokens (any markup has >= 7)
@given(st.lists(st.lists(st.sampled_from("abcd"), min_size=4, max_size=15), min_size=1, max_size=4),
       st.lists(st.lists(st.sampled_from("abcd"), min_size=4, max_size=15), min_size=1, max_size=4))
def test_random_corpora_against_reference(p, r):
    n = min(len(p), len(r))
    p, r = p[:n], r[:n]
    assert corpus_bleu(p, r) == pytest.approx(reference(p, r), abs=1e-9)


def test_short_sentence_adds_no_ngrams():
    # "a" has no bigrams, so the corpus is still a perfect match
    assert corpus_bleu([list("aaaa"), ["a"]], [list("aaaa"), ["a"]]) == 1.0


def test_length_mismatch():
    with pytest.raises(ValueError):
        corpus_bleu([["a"]], [])
