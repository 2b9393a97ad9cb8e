"""Corpus BLEU-4 over markup tokens, no smoothing."""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence, Union

from ..transform import MarkupSequence, tokenize

Tokens = Union[MarkupSequence, str, Sequence[str]]


def as_tokens(seq: Tokens) -> list[str]:
    if isinstance(seq, MarkupSequence):
        return list(seq.tokens)
    if isinstance(seq, str):
        return tokenize(seq)
    return list(seq)


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(preds: Sequence[Tokens], refs: Sequence[Tokens], max_n: int = 4) -> float:
    if len(preds) != len(refs):
        raise ValueError("preds and refs differ in length")
    matched = [0] * max_n
    total = [0] * max_n
    pred_len = ref_len = 0
    for p, r in zip(preds, refs):
        pt, rt = as_tokens(p), as_tokens(r)
        pred_len += len(pt)
        ref_len += len(rt)
        for n in range(1, max_n + 1):
            pc, rc = ngram_counts(pt, n), ngram_counts(rt, n)
            matched[n - 1] += sum(min(c, rc[g]) for g, c in pc.items())
            total[n - 1] += max(len(pt) - n + 1, 0)
    if pred_len == 0 or any(m == 0 for m in matched):
        return 0.0
    log_p = sum(math.log(m / t) for m, t in zip(matched, total)) / max_n
    brevity = min(0.0, 1.0 - ref_len / pred_len)
    return math.exp(log_p + brevity)


def bleu(pred: Tokens, gt: Tokens) -> float:
    return corpus_bleu([pred], [gt])
