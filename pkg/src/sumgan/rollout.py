"""Monte-Carlo completion of partial sequences under a lagged generator copy.

The rollout policy is never touched by gradient updates; it is refreshed
from the live generator by explicit sync calls. Within one scoring call
the per-prefix step distributions are memoized (the decoder is
deterministic given the prefix), which makes large sample counts cheap
on small vocabularies.
"""

import numpy as np

from . import tensor as T
from .corpus import EOS, SOS
from .tensor import ShapeError


class RolloutPolicy:
    def __init__(self, generator, sync_interval=1):
        self.gen = generator.clone()
        self.sync_interval = sync_interval
        self.lag = 0

    def sync_from_generator(self, generator):
        """Deep-copy the generator's parameters; resets the lag counter."""
        for name, p in self.gen.params.items():
            src = generator.params[name]
            if src.values.shape != p.values.shape:
                raise ShapeError(
                    f"sync: {name} has shape {src.values.shape}, expected {p.values.shape}")
            p.values = src.values.copy()
        self.lag = 0

    def _step_cache(self, example):
        """Memoized (prefix tuple) -> (step probabilities, decoder state)."""
        gen = self.gen
        enc, state0 = gen.start(example)
        cache = {}

        def step(prefix):
            key = tuple(prefix)
            hit = cache.get(key)
            if hit is not None:
                return hit
            if key:
                probs_prev, state = step(key[:-1])
                prev = key[-1]
            else:
                state, prev = state0, None
            if prev is None:
                dist, new_state = gen.decode_step(SOS, state0, enc,
                                                  example.source_ext_ids, example.n_oov)
            else:
                dist, new_state = gen.decode_step(prev, state, enc,
                                                  example.source_ext_ids, example.n_oov)
            probs = dist.values / dist.values.sum()
            out = (probs, new_state)
            if len(cache) < 20000:
                cache[key] = out
            return out

        return step

    def complete_sequence(self, example, prefix, n, rng, max_len):
        """n sequences starting with `prefix` verbatim, extended by sampling."""
        if n < 1:
            raise ValueError("n must be >= 1")
        if len(prefix) < 1:
            raise ValueError("prefix must be non-empty")
        prefix = [int(t) for t in prefix]
        with T.no_grad():
            step = self._step_cache(example)
            # warm the cache along the prefix so completions start from its state
            if prefix[-1] != EOS and len(prefix) < max_len:
                step(prefix[:-1])
            out = []
            for _ in range(n):
                seq = list(prefix)
                while seq[-1] != EOS and len(seq) < max_len:
                    probs, _ = step(seq)
                    seq.append(int(rng.choice(probs.size, p=probs)))
                out.append(seq)
        return out

    def action_value(self, example, prefix, n, score_fn, rng, max_len):
        """Mean score over n completions of `prefix`; the direct score when
        the prefix is already terminal (ends in EOS or has max_len tokens)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        prefix = [int(t) for t in prefix]
        if prefix[-1] == EOS or len(prefix) >= max_len:
            return float(score_fn(prefix))
        completions = self.complete_sequence(example, prefix, n, rng, max_len)
        scores = {}
        total = 0.0
        for seq in completions:
            key = tuple(seq)
            if key not in scores:
                scores[key] = float(score_fn(seq))
            total += scores[key]
        return total / n
