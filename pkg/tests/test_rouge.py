from itertools import combinations

import pytest

from sumgan.rouge import evaluate_corpus, rouge_l, rouge_n


def brute_force_ngram_overlap(cand, ref, n):
    """Clipped overlap by explicit match-and-consume, no Counter."""
    cand_grams = [tuple(cand[i:i + n]) for i in range(len(cand) - n + 1)]
    ref_grams = [tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)]
    used = [False] * len(ref_grams)
    overlap = 0
    for g in cand_grams:
        for j, rg in enumerate(ref_grams):
            if not used[j] and rg == g:
                used[j] = True
                overlap += 1
                break
    return overlap, len(cand_grams), len(ref_grams)


def brute_force_lcs(xs, ys):
    """Longest common subsequence by exhaustive subset enumeration."""
    best = 0
    for k in range(len(xs), 0, -1):
        if k <= best:
            break
        for idx in combinations(range(len(xs)), k):
            sub = [xs[i] for i in idx]
            it = iter(ys)
            if all(tok in it for tok in sub):
                best = k
                break
    return best


def test_identical_sequences():
    toks = "a b c d".split()
    assert rouge_n(toks, toks, 1).f1 == 1.0
    assert rouge_n(toks, toks, 2).f1 == 1.0
    assert rouge_l(toks, toks).f1 == 1.0


def test_disjoint_sequences():
    assert rouge_n("a b".split(), "c d".split(), 1).f1 == 0.0
    assert rouge_l("a b".split(), "c d".split()).f1 == 0.0


def test_worked_bigram_example():
    cand = "the cat on the mat".split()
    ref = "the cat sat on the mat".split()
    score = rouge_n(cand, ref, 2)
    assert score.recall == pytest.approx(3 / 5)
    assert score.precision == pytest.approx(3 / 4)
    assert score.f1 == pytest.approx(2 / 3)


def test_short_sequences_contribute_zero():
    assert rouge_n(["a"], "a b c".split(), 2).f1 == 0.0
    assert rouge_n([], ["a"], 1).f1 == 0.0


def test_rouge_n_requires_positive_n():
    with pytest.raises(ValueError):
        rouge_n(["a"], ["a"], 0)


def test_reversed_distinct_tokens_lcs_one():
    ref = "a b c d".split()
    cand = list(reversed(ref))
    score = rouge_l(cand, ref)
    assert score.recall == pytest.approx(1 / 4)
    assert score.precision == pytest.approx(1 / 4)


def test_rouge_matches_brute_force(rng):
    alphabet = list("abcde")
    for _ in range(200):
        cand = [alphabet[rng.integers(5)] for _ in range(rng.integers(1, 9))]
        ref = [alphabet[rng.integers(5)] for _ in range(rng.integers(1, 9))]
        for n in (1, 2):
            overlap, nc, nr = brute_force_ngram_overlap(cand, ref, n)
            got = rouge_n(cand, ref, n)
            p = overlap / nc if nc else 0.0
            r = overlap / nr if nr else 0.0
            assert got.precision == pytest.approx(p)
            assert got.recall == pytest.approx(r)
        lcs = brute_force_lcs(cand, ref)
        got = rouge_l(cand, ref)
        assert got.precision == pytest.approx(lcs / len(cand))
        assert got.recall == pytest.approx(lcs / len(ref))


def test_f1_symmetry(rng):
    alphabet = list("abc")
    for _ in range(50):
        a = [alphabet[rng.integers(3)] for _ in range(rng.integers(1, 7))]
        b = [alphabet[rng.integers(3)] for _ in range(rng.integers(1, 7))]
        assert rouge_n(a, b, 1).f1 == pytest.approx(rouge_n(b, a, 1).f1)
        assert rouge_l(a, b).f1 == pytest.approx(rouge_l(b, a).f1)


def test_recall_monotone_under_reference_growth(rng):
    cand = "a b c".split()
    ref = "a b".split()
    base = rouge_n(cand, ref, 1).recall
    grown = rouge_n(cand, ref + ["z"], 1).recall
    assert grown <= base


def test_scores_bounded(rng):
    alphabet = list("ab")
    for _ in range(50):
        a = [alphabet[rng.integers(2)] for _ in range(rng.integers(1, 6))]
        b = [alphabet[rng.integers(2)] for _ in range(rng.integers(1, 6))]
        for s in (rouge_n(a, b, 1), rouge_n(a, b, 2), rouge_l(a, b)):
            assert 0.0 <= s.precision <= 1.0
            assert 0.0 <= s.recall <= 1.0
            assert 0.0 <= s.f1 <= 1.0


def test_evaluate_corpus():
    pair = ("a b".split(), "a c".split())
    single = evaluate_corpus([pair])
    assert single[0] == pytest.approx(rouge_n(*pair, 1).f1)
    doubled = evaluate_corpus([pair, pair])
    assert doubled == pytest.approx(single)
    with pytest.raises(ValueError):
        evaluate_corpus([])


def test_evaluate_corpus_mean_oracle(rng):
    alphabet = list("abcd")
    pairs = [
        ([alphabet[rng.integers(4)] for _ in range(rng.integers(1, 6))],
         [alphabet[rng.integers(4)] for _ in range(rng.integers(1, 6))])
        for _ in range(50)
    ]
    r1, r2, rl = evaluate_corpus(pairs)
    assert r1 == pytest.approx(sum(rouge_n(c, r, 1).f1 for c, r in pairs) / 50)
    assert r2 == pytest.approx(sum(rouge_n(c, r, 2).f1 for c, r in pairs) / 50)
    assert rl == pytest.approx(sum(rouge_l(c, r).f1 for c, r in pairs) / 50)
