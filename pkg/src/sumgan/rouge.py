"""ROUGE-1/2/L F1 scoring over token sequences.

Clipped (multiset-intersection) n-gram counts; LCS for ROUGE-L. Per-pair
F1 scores are macro-averaged over a corpus. No stemming or stopword
removal: tokens are compared as given.
"""

from collections import Counter
from dataclasses import dataclass


@dataclass
class RougeScore:
    precision: float
    recall: float
    f1: float


def _f1(p, r):
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _ngrams(tokens, n):
    if len(tokens) < n:
        return Counter()
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate, reference, n):
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cand = _ngrams(list(candidate), n)
    ref = _ngrams(list(reference), n)
    overlap = sum(min(c, ref[g]) for g, c in cand.items())
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    p = overlap / n_cand if n_cand else 0.0
    r = overlap / n_ref if n_ref else 0.0
    return RougeScore(p, r, _f1(p, r))


def _lcs_length(xs, ys):
    m, n = len(xs), len(ys)
    dp = [0] * (n + 1)
    for i in range(1, m + 1):
        prev = 0
        for j in range(1, n + 1):
            tmp = dp[j]
            if xs[i - 1] == ys[j - 1]:
                dp[j] = prev + 1
            elif dp[j - 1] > dp[j]:
                dp[j] = dp[j - 1]
            prev = tmp
    return dp[n]

def rouge_l(candidate, reference):
    cand, ref = list(candidate), list(reference)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = _lcs_length(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    return RougeScore(p, r, _f1(p, r))


def evaluate_corpus(pairs):
    """Mean per-pair F1 for ROUGE-1/2/L over (candidate, reference) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("evaluate_corpus: empty pair list")
    r1 = r2 = rl = 0.0
    for cand, ref in pairs:
        r1 += rouge_n(cand, ref, 1).f1
        r2 += rouge_n(cand, ref, 2).f1
        rl += rouge_l(cand, ref).f1
    n = len(pairs)
    return r1 / n, r2 / n, rl / n
