"""Pointer-generator encoder-decoder with intra-temporal and intra-decoder
attention.

Encoder: single-layer bidirectional LSTM; each direction has hidden size
d_hid, so encoder states and the decoder hidden state are both 2*d_hid
wide (the attention scores are plain dot products between them).

Temporal attention divides each source token's raw exp-score by the
accumulated exp-scores it received at earlier decoding steps. The
accumulator carries a per-token running max shift so the exp never
overflows; the shift cancels exactly in the normalized weights.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import tensor as T
from .corpus import EOS, SOS, UNK
from .tensor import Tensor


@dataclass
class EncoderOutput:
    states: Tensor      # (n, 2*d_hid), row i = [h_i_fwd || h_i_bwd]
    final_h: Tensor     # (2*d_hid,), [h_n_fwd || h_1_bwd]
    final_c: Tensor     # (2*d_hid,)


@dataclass(frozen=True)
class DecoderStepState:
    h: Tensor
    c: Tensor
    t: int                  # next decoding step index, starts at 1
    hist: Tensor            # accumulated shifted exp-scores per source token, or None at t=1
    hist_shift: np.ndarray  # per-token running max of raw scores, or None
    past: tuple             # decoder hidden states h_1 .. h_{t-1}


def _uniform(rng, shape, a=0.08):
    return rng.uniform(-a, a, size=shape)


def _fan_in(rng, shape):
    return rng.normal(0.0, 1.0 / np.sqrt(shape[-1]), size=shape)


class Generator:
    def __init__(self, vocab_size, d_emb, d_hid, rng, d_proj=None):
        self.V = vocab_size
        self.d_emb = d_emb
        self.d_hid = d_hid
        self.D = 2 * d_hid          # decoder width == encoder output width
        self.d_proj = d_proj if d_proj is not None else d_emb
        D, H, E, P = self.D, d_hid, d_emb, self.d_proj

        def param(name, values):
            return Tensor(values, requires_grad=True, name=name)

        self.params = {
            "embedding": param("embedding", _fan_in(rng, (self.V, E))),
            "enc_fwd_W": param("enc_fwd_W", _uniform(rng, (4 * H, E + H))),
            "enc_fwd_b": param("enc_fwd_b", np.zeros(4 * H)),
            "enc_bwd_W": param("enc_bwd_W", _uniform(rng, (4 * H, E + H))),
            "enc_bwd_b": param("enc_bwd_b", np.zeros(4 * H)),
            "bridge_h_W": param("bridge_h_W", _fan_in(rng, (D, D))),
            "bridge_h_b": param("bridge_h_b", np.zeros(D)),
            "bridge_c_W": param("bridge_c_W", _fan_in(rng, (D, D))),
            "bridge_c_b": param("bridge_c_b", np.zeros(D)),
            "dec_W": param("dec_W", _uniform(rng, (4 * D, E + D))),
            "dec_b": param("dec_b", np.zeros(4 * D)),
            "proj1_W": param("proj1_W", _fan_in(rng, (P, 3 * D))),
            "proj1_b": param("proj1_b", np.zeros(P)),
            "proj2_W": param("proj2_W", _fan_in(rng, (self.V, P))),
            "proj2_b": param("proj2_b", np.zeros(self.V)),
            "ptr_w_ctx": param("ptr_w_ctx", _fan_in(rng, (2 * D,))),
            "ptr_w_state": param("ptr_w_state", _fan_in(rng, (D,))),
            "ptr_w_input": param("ptr_w_input", _fan_in(rng, (E,))),
            "ptr_b": param("ptr_b", np.zeros(1)),
        }

    def clone(self):
        """Deep read-only copy (used by the rollout policy)."""
        other = Generator.__new__(Generator)
        other.V, other.d_emb, other.d_hid = self.V, self.d_emb, self.d_hid
        other.D, other.d_proj = self.D, self.d_proj
        other.params = {
            name: Tensor(p.values.copy(), name=name) for name, p in self.params.items()
        }
        return other

    def load_values(self, arrays):
        for name, p in self.params.items():
            src = arrays[name]
            if src.shape != p.values.shape:
                raise T.ShapeError(
                    f"load_values: {name} has shape {src.shape}, expected {p.values.shape}")
            p.values = src.astype(np.float64).copy()

    def _embed(self, token_id):
        token_id = int(token_id)
        return T.take_row(self.params["embedding"], token_id if token_id < self.V else UNK)

    # -- encoder ------------------------------------------------------------

    def encode(self, source_ids):
        if len(source_ids) == 0:
            raise ValueError("encode: empty source")
        p = self.params
        H = self.d_hid
        zero = Tensor(np.zeros(H))
        embs = [self._embed(i) for i in source_ids]
        fwd, h, c = [], zero, zero
        for x in embs:
            h, c = T.lstm_step(x, h, c, p["enc_fwd_W"], p["enc_fwd_b"])
            fwd.append((h, c))
        bwd, h, c = [], zero, zero
        for x in reversed(embs):
            h, c = T.lstm_step(x, h, c, p["enc_bwd_W"], p["enc_bwd_b"])
            bwd.append((h, c))
        bwd.reverse()
        states = T.stack([T.concat([f[0], b[0]]) for f, b in zip(fwd, bwd)])
        final_h = T.concat([fwd[-1][0], bwd[0][0]])
        final_c = T.concat([fwd[-1][1], bwd[0][1]])
        return EncoderOutput(states, final_h, final_c)

    def initial_state(self, enc):
        p = self.params
        h0 = T.tanh(p["bridge_h_W"] @ enc.final_h + p["bridge_h_b"])
        c0 = T.tanh(p["bridge_c_W"] @ enc.final_c + p["bridge_c_b"])
        return DecoderStepState(h=h0, c=c0, t=1, hist=None, hist_shift=None, past=())

    # -- attention ----------------------------------------------------------

    def temporal_attention(self, h_t, enc, state):
        """Attention weights over source tokens, context vector, new history."""
        scores = enc.states @ h_t                     # (n,) raw dot products
        if state.t == 1:
            shift = np.full(scores.values.shape, scores.values.max())
            e = T.exp(scores - Tensor(shift))
        else:
            shift = np.maximum(state.hist_shift, scores.values)
            hist = state.hist * Tensor(np.exp(state.hist_shift - shift))
            e = T.exp(scores - Tensor(shift)) / hist
        alpha = e / T.tsum(e)
        context = enc.states.T @ alpha
        # history accumulates this step's exp-scores under the new shift
        step_exp = T.exp(scores - Tensor(shift))
        if state.t == 1:
            new_shift = scores.values.copy()
            new_hist = T.exp(scores - Tensor(new_shift))
        else:
            new_shift = shift
            new_hist = hist + step_exp
        return alpha, context, new_hist, new_shift

    def intra_decoder_attention(self, h_t, state):
        if state.t == 1:
            return None, Tensor(np.zeros(self.D))
        past = T.stack(list(state.past))              # (t-1, D)
        alpha = T.softmax(past @ h_t)
        return alpha, past.T @ alpha

    # -- output layer -------------------------------------------------------

    def vocab_distribution(self, h_t, c_e, c_d):
        p = self.params
        hidden = p["proj1_W"] @ T.concat([h_t, c_e, c_d]) + p["proj1_b"]
        return T.softmax(p["proj2_W"] @ hidden + p["proj2_b"])

    def pointer_switch(self, c_star, s_t, x_t):
        p = self.params
        z = (T.dot(p["ptr_w_ctx"], c_star) + T.dot(p["ptr_w_state"], s_t)
             + T.dot(p["ptr_w_input"], x_t) + T.gather(p["ptr_b"], 0))
        return T.sigmoid(z)

    def final_distribution(self, p_gen, p_vocab, alpha_e, src_ext_ids, n_oov):
        ext = self.V + n_oov
        gen_part = T.pad_to(p_gen * p_vocab, ext)
        copy_part = T.scatter_add((1.0 - p_gen) * alpha_e, src_ext_ids, ext)
        return gen_part + copy_part

    # -- one decoding step --------------------------------------------------

    def decode_step(self, prev_id, state, enc, src_ext_ids, n_oov, p_gen_override=None):
        """Advance one step; returns (distribution over V+n_oov ids, new state).

        Extended-vocabulary prev ids embed as UNK. Does not mutate `state`.
        """
        p = self.params
        x = self._embed(prev_id)
        h, c = T.lstm_step(x, state.h, state.c, p["dec_W"], p["dec_b"])
        alpha_e, c_e, new_hist, new_shift = self.temporal_attention(h, enc, state)
        _, c_d = self.intra_decoder_attention(h, state)
        p_vocab = self.vocab_distribution(h, c_e, c_d)
        if p_gen_override is None:
            p_gen = self.pointer_switch(T.concat([c_e, c_d]), h, x)
        else:
            p_gen = Tensor(float(p_gen_override))
        dist = self.final_distribution(p_gen, p_vocab, alpha_e, src_ext_ids, n_oov)
        new_state = DecoderStepState(
            h=h, c=c, t=state.t + 1, hist=new_hist, hist_shift=new_shift,
            past=state.past + (h,),
        )
        return dist, new_state

    def start(self, example):
        enc = self.encode(example.source_ids)
        return enc, self.initial_state(enc)

    # -- losses and decoding ------------------------------------------------

    def mle_loss(self, examples, p_gen_override=None):
        """Teacher-forced mean negative log-likelihood over target tokens."""
        total = None
        count = 0
        for ex in examples:
            enc, state = self.start(ex)
            prev = SOS
            for y in ex.target_ext_ids:
                dist, state = self.decode_step(
                    prev, state, enc, ex.source_ext_ids, ex.n_oov, p_gen_override)
                nll = -T.log(T.gather(dist, y) + 1e-12)
                total = nll if total is None else total + nll
                count += 1
                prev = y
        return total / count

    def _adjust(self, probs, temperature):
        if temperature != 1.0:
            probs = probs ** (1.0 / temperature)
        return probs / probs.sum()  # guard rng.choice against 1e-16 drift

    def sample_sequence(self, example, max_len, rng, temperature=1.0):
        """Ancestral sampling; stops after EOS or max_len tokens."""
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        with T.no_grad():
            enc, state = self.start(example)
            seq, prev = [], SOS
            for _ in range(max_len):
                dist, state = self.decode_step(prev, state, enc,
                                               example.source_ext_ids, example.n_oov)
                tok = int(rng.choice(dist.values.size,
                                     p=self._adjust(dist.values, temperature)))
                seq.append(tok)
                if tok == EOS:
                    break
                prev = tok
        return seq

    def sample_with_logprobs(self, example, max_len, rng, p_gen_override=None):
        """Sample a sequence while keeping per-step log-prob tensors on the graph."""
        enc, state = self.start(example)
        seq, logps, prev = [], [], SOS
        for _ in range(max_len):
            dist, state = self.decode_step(prev, state, enc,
                                           example.source_ext_ids, example.n_oov,
                                           p_gen_override)
            tok = int(rng.choice(dist.values.size, p=dist.values / dist.values.sum()))
            seq.append(tok)
            logps.append(T.log(T.gather(dist, tok) + 1e-12))
            if tok == EOS:
                break
            prev = tok
        return seq, logps

    def greedy_decode(self, example, max_len, p_gen_override=None):
        """Argmax decoding, ties broken by lowest id; stops at EOS or max_len."""
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        with T.no_grad():
            enc, state = self.start(example)
            seq, prev = [], SOS
            for _ in range(max_len):
                dist, state = self.decode_step(prev, state, enc,
                                               example.source_ext_ids, example.n_oov,
                                               p_gen_override)
                tok = int(dist.values.argmax())
                seq.append(tok)
                if tok == EOS:
                    break
                prev = tok
        return seq
