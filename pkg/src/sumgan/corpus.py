"""Tokenization, vocabulary, extended-vocabulary encoding and batching.

Dataset file format: UTF-8 text, one example per line,
`source-text<TAB>target-text`. Tokenization is lowercased whitespace
splitting. OOV source tokens get per-example extended ids V+k so the
pointer mechanism can copy them.
"""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

PAD, UNK, SOS, EOS = 0, 1, 2, 3
RESERVED = ["<pad>", "<unk>", "<s>", "</s>"]


class DatasetFormatError(ValueError):
    pass


def tokenize(text):
    return text.lower().split()


class Vocabulary:
    """Immutable token<->id bijection with reserved ids 0..3."""

    def __init__(self, content_tokens, counts=None):
        self.id_to_token = list(RESERVED) + list(content_tokens)
        self.token_to_id = {tok: i for i, tok in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")
        self.counts = dict(counts) if counts else {}

    @property
    def size(self):
        return len(self.id_to_token)

    def lookup(self, token):
        return self.token_to_id.get(token, UNK)

    def word(self, idx):
        return self.id_to_token[idx]

    def __contains__(self, token):
        return token in self.token_to_id

    def save(self, path):
        # one `token count` per line, descending count; reserved tokens implicit
        with open(path, "w", encoding="utf-8") as f:
            for tok in self.id_to_token[len(RESERVED):]:
                f.write(f"{tok} {self.counts.get(tok, 0)}\n")

    @classmethod
    def load(cls, path):
        tokens, counts = [], {}
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                tok, cnt = line.rsplit(" ", 1)
                tokens.append(tok)
                counts[tok] = int(cnt)
        return cls(tokens, counts)


def build_vocab(token_stream, max_size):
    """Frequency-ranked vocabulary (ties lexicographic), truncated to max_size."""
    if max_size < 5:
        raise ValueError(f"max_size must be >= 5, got {max_size}")
    counts = Counter(token_stream)
    for tok in RESERVED:
        counts.pop(tok, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = ranked[: max_size - len(RESERVED)]
    return Vocabulary([tok for tok, _ in keep], dict(keep))


@dataclass
class EncodedExample:
    source_tokens: list
    target_tokens: list
    source_ids: list
    source_ext_ids: list
    oov_list: list
    target_ids: list
    target_ext_ids: list

    @property
    def n_oov(self):
        return len(self.oov_list)


def encode_source(tokens, vocab):
    """Source ids plus extended ids mapping the k-th new OOV token to V+k."""
    ids, ext_ids, oovs = [], [], []
    V = vocab.size
    for tok in tokens:
        i = vocab.lookup(tok)
        ids.append(i)
        if i == UNK:
            if tok not in oovs:
                oovs.append(tok)
            ext_ids.append(V + oovs.index(tok))
        else:
            ext_ids.append(i)
    return ids, ext_ids, oovs


def encode_example(source_tokens, target_tokens, vocab, src_limit=None, tgt_limit=None):
    if not source_tokens or not target_tokens:
        raise ValueError("source and target token sequences must be non-empty")
    if src_limit:
        source_tokens = source_tokens[:max(1, src_limit)]
    if tgt_limit:
        target_tokens = target_tokens[:max(1, tgt_limit)]
    src_ids, src_ext, oovs = encode_source(source_tokens, vocab)
    V = vocab.size
    tgt_ids, tgt_ext = [], []
    for tok in target_tokens:
        i = vocab.lookup(tok)
        tgt_ids.append(i)
        if i == UNK and tok in oovs:
            tgt_ext.append(V + oovs.index(tok))
        else:
            tgt_ext.append(i)
    tgt_ids.append(EOS)
    tgt_ext.append(EOS)
    return EncodedExample(
        source_tokens=list(source_tokens),
        target_tokens=list(target_tokens),
        source_ids=src_ids,
        source_ext_ids=src_ext,
        oov_list=oovs,
        target_ids=tgt_ids,
        target_ext_ids=tgt_ext,
    )


def decode_ids(ids, vocab, oov_list=()):
    """Ids back to tokens. EOS terminates output; PAD is never emitted."""
    V = vocab.size
    out = []
    for i in ids:
        i = int(i)
        if i == EOS:
            break
        if i == PAD:
            continue
        if i < V:
            out.append(vocab.word(i))
        elif i - V < len(oov_list):
            out.append(oov_list[i - V])
        else:
            raise ValueError(f"id {i} out of range for V={V} with {len(oov_list)} OOVs")
    return out


def load_dataset(path):
    """Yield (source_tokens, target_tokens) pairs from a tab-separated file."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise DatasetFormatError(f"{path}:{lineno}: expected `source<TAB>target`")
            src, tgt = line.split("\t", 1)
            yield tokenize(src), tokenize(tgt)


@dataclass
class Batch:
    examples: list
    source: np.ndarray = field(init=False)
    target: np.ndarray = field(init=False)
    source_lengths: list = field(init=False)
    target_lengths: list = field(init=False)
    oov_counts: list = field(init=False)
    max_oov: int = field(init=False)

    def __post_init__(self):
        self.source_lengths = [len(e.source_ids) for e in self.examples]
        self.target_lengths = [len(e.target_ids) for e in self.examples]
        self.oov_counts = [e.n_oov for e in self.examples]
        self.max_oov = max(self.oov_counts, default=0)
        ns, nt = max(self.source_lengths), max(self.target_lengths)
        self.source = np.full((len(self.examples), ns), PAD, dtype=np.int64)
        self.target = np.full((len(self.examples), nt), PAD, dtype=np.int64)
        for r, e in enumerate(self.examples):
            self.source[r, : len(e.source_ids)] = e.source_ids
            self.target[r, : len(e.target_ids)] = e.target_ids

    def __len__(self):
        return len(self.examples)


def make_batches(examples, batch_size, rng=None):
    """Split examples into batches; shuffled reproducibly when rng is given."""
    order = list(range(len(examples)))
    if rng is not None:
        rng.shuffle(order)
    return [
        Batch([examples[i] for i in order[k : k + batch_size]])
        for k in range(0, len(order), batch_size)
    ]
