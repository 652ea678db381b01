import numpy as np
import pytest

from sumgan import corpus
from sumgan.corpus import (EOS, PAD, SOS, UNK, Batch, DatasetFormatError,
                           Vocabulary, build_vocab, decode_ids, encode_example,
                           load_dataset, make_batches)


def test_build_vocab_frequency_order():
    v = build_vocab("a a b".split(), 10)
    assert v.lookup("<pad>") == PAD == 0
    assert v.lookup("<unk>") == UNK == 1
    assert v.lookup("<s>") == SOS == 2
    assert v.lookup("</s>") == EOS == 3
    assert v.lookup("a") == 4
    assert v.lookup("b") == 5


def test_build_vocab_lexicographic_tiebreak_cutoff():
    v = build_vocab("a b c".split(), 5)
    assert v.size == 5
    assert "a" in v
    assert "b" not in v and "c" not in v


def test_build_vocab_empty_stream():
    v = build_vocab([], 10)
    assert v.size == 4


def test_build_vocab_truncates_to_max(rng):
    # count-and-sort oracle on a synthetic heavy-tailed stream
    tokens = [f"tok{i}" for i in range(9000) for _ in range(1 + i % 3)]
    v = build_vocab(tokens, 5000)
    assert v.size == 5000
    from collections import Counter
    ranked = sorted(Counter(tokens).items(), key=lambda kv: (-kv[1], kv[0]))
    assert set(v.id_to_token[4:]) == {tok for tok, _ in ranked[:4996]}


def test_build_vocab_min_size():
    with pytest.raises(ValueError):
        build_vocab(["a"], 4)


def test_encode_example_oov():
    v = build_vocab(["cat"], 10)
    ex = encode_example(["cat", "zorp"], ["zorp"], v)
    assert ex.source_ids == [v.lookup("cat"), UNK]
    assert ex.source_ext_ids == [v.lookup("cat"), v.size]
    assert ex.oov_list == ["zorp"]
    assert ex.target_ext_ids == [v.size, EOS]
    assert ex.target_ids == [UNK, EOS]


def test_encode_source_invariants(rng):
    words = [f"w{i}" for i in range(30)]
    v = build_vocab(words[:15] * 3, 25)
    for _ in range(50):
        src = [words[rng.integers(30)] for _ in range(rng.integers(1, 12))]
        tgt = [words[rng.integers(30)] for _ in range(rng.integers(1, 6))]
        ex = encode_example(src, tgt, v)
        assert len(ex.source_ids) == len(ex.source_ext_ids)
        for a, b in zip(ex.source_ids, ex.source_ext_ids):
            assert (a == UNK) == (b >= v.size)
            if a != UNK:
                assert a == b
        assert len(ex.oov_list) == len(set(ex.oov_list))
        for j in ex.target_ext_ids:
            if j >= v.size:
                assert ex.oov_list[j - v.size] in src


def test_decode_round_trip(rng):
    words = [f"w{i}" for i in range(20)]
    v = build_vocab(words[:10] * 2, 20)
    for _ in range(50):
        src = [words[rng.integers(20)] for _ in range(rng.integers(1, 10))]
        ex = encode_example(src, src[:3] or src, v)
        assert decode_ids(ex.source_ext_ids, v, ex.oov_list) == src
        # target round-trips up to its EOS marker
        assert decode_ids(ex.target_ext_ids, v, ex.oov_list) == src[:3] or src


def test_decode_simple_cases():
    v = build_vocab(["cat"], 10)
    assert decode_ids([v.lookup("cat"), EOS], v) == ["cat"]
    assert decode_ids([v.size], v, ["zorp"]) == ["zorp"]
    with pytest.raises(ValueError):
        decode_ids([v.size + 1], v, ["zorp"])


def test_truncation_keeps_min_lengths():
    v = build_vocab("a b c".split() * 2, 10)
    ex = encode_example(["a", "b", "c"], ["a", "b", "c"], v, src_limit=2, tgt_limit=1)
    assert len(ex.source_ids) == 2
    assert ex.target_ids[-1] == EOS
    assert len(ex.target_ids) == 2  # one token + EOS


def test_load_dataset(tmp_path):
    p = tmp_path / "data.tsv"
    p.write_text("a B\tc\nd\te F\n", encoding="utf-8")
    pairs = list(load_dataset(p))
    assert pairs == [(["a", "b"], ["c"]), (["d"], ["e", "f"])]


def test_load_dataset_empty(tmp_path):
    p = tmp_path / "empty.tsv"
    p.write_text("", encoding="utf-8")
    assert list(load_dataset(p)) == []


def test_load_dataset_malformed_line(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("a\tb\nno-tab-here\n", encoding="utf-8")
    with pytest.raises(DatasetFormatError, match=":2"):
        list(load_dataset(p))


def test_load_dataset_line_count(tmp_path):
    p = tmp_path / "big.tsv"
    n = 3854  # COVID-style file at 1/10 scale
    p.write_text("".join(f"src {i}\ttgt {i}\n" for i in range(n)), encoding="utf-8")
    assert sum(1 for _ in load_dataset(p)) == n


def test_batch_padding_and_oov():
    v = build_vocab("a b".split() * 2, 10)
    exs = [
        encode_example(["a", "zorp"], ["a"], v),
        encode_example(["b"], ["b", "a", "b"], v),
    ]
    batch = Batch(exs)
    assert batch.source.shape == (2, 2)
    assert batch.source[1, 1] == PAD
    assert batch.max_oov == 1
    assert batch.oov_counts == [1, 0]
    # padding only after true length
    for r, ex in enumerate(exs):
        assert list(batch.source[r, : len(ex.source_ids)]) == ex.source_ids


def test_make_batches_seeded_shuffle():
    v = build_vocab("a b".split() * 2, 10)
    exs = [encode_example(["a"], ["b"], v) for _ in range(10)]
    b1 = make_batches(exs, 3, np.random.default_rng(7))
    b2 = make_batches(exs, 3, np.random.default_rng(7))
    assert [id(e) for b in b1 for e in b.examples] == [id(e) for b in b2 for e in b.examples]
    assert sum(len(b) for b in b1) == 10


def test_vocab_save_load_round_trip(tmp_path):
    v = build_vocab("a a a b b c".split(), 10)
    path = tmp_path / "vocab.txt"
    v.save(path)
    v2 = Vocabulary.load(path)
    assert v2.id_to_token == v.id_to_token
    assert v2.counts == v.counts
