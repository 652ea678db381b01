"""TextCNN binary classifier: embedding, tanh convolutions over several
window sizes, max-over-time pooling, one highway layer, sigmoid output.

The classifier scores the summary sequence alone (no source
conditioning). Extended-vocabulary ids embed as UNK.
"""

import numpy as np

from . import tensor as T
from .corpus import PAD, UNK
from .optim import AdamState, adam_step, collect_grads, zero_grads
from .tensor import Tensor


def pad_sequence(ids, length):
    """Pad with PAD / truncate to exactly `length` tokens."""
    ids = list(ids)[:length]
    return ids + [PAD] * (length - len(ids))


def conv_features(embedded, kernel_W, kernel_b):
    """Feature map (T-h+1, n_kernels): c_i = tanh(w . e_{i:i+h-1} + b)."""
    Tlen, k = embedded.values.shape
    hk = kernel_W.values.shape[1]
    h = hk // k
    if h > Tlen:
        raise T.ShapeError(f"conv_features: window {h} exceeds sequence length {Tlen}")
    windows = T.stack([
        T.reshape(embedded[i : i + h], (hk,)) for i in range(Tlen - h + 1)
    ])
    return T.tanh(windows @ kernel_W.T + kernel_b)


def max_over_time(feature_map):
    """Max along the sequence axis; one scalar per kernel."""
    return T.max0(feature_map)


def highway(features, W_T, b_T, W_F, b_F):
    """Gated residual: tau * relu(affine(x)) + (1 - tau) * x."""
    tau = T.sigmoid(W_T @ features + b_T)
    transformed = T.relu(W_F @ features + b_F)
    return tau * transformed + (1.0 - tau) * features


def bce_loss(label, prob):
    """-y log p - (1-y) log(1-p), with a 1e-12 floor inside the logs."""
    y = float(label)
    return -(y * T.log(prob + 1e-12) + (1.0 - y) * T.log((1.0 - prob) + 1e-12))


class Discriminator:
    def __init__(self, vocab_size, d_emb, seq_len, rng,
                 window_sizes=(1, 2, 3, 4), kernels_per_window=25):
        if max(window_sizes) > seq_len:
            raise T.ShapeError(
                f"window {max(window_sizes)} exceeds padded length {seq_len}")
        self.V = vocab_size
        self.d_emb = d_emb
        self.seq_len = seq_len
        self.window_sizes = tuple(window_sizes)
        self.kernels_per_window = kernels_per_window
        n_feat = kernels_per_window * len(window_sizes)
        self.n_features = n_feat

        def param(name, values):
            return Tensor(values, requires_grad=True, name=name)

        k = d_emb
        self.params = {
            "embedding": param("embedding",
                               rng.normal(0, 1.0 / np.sqrt(k), (vocab_size, k))),
            "highway_WT": param("highway_WT", rng.normal(0, 1.0 / np.sqrt(n_feat), (n_feat, n_feat))),
            "highway_bT": param("highway_bT", np.zeros(n_feat)),
            "highway_WF": param("highway_WF", rng.normal(0, 1.0 / np.sqrt(n_feat), (n_feat, n_feat))),
            "highway_bF": param("highway_bF", np.zeros(n_feat)),
            "out_W": param("out_W", rng.normal(0, 1.0 / np.sqrt(n_feat), (n_feat,))),
            "out_b": param("out_b", np.zeros(1)),
        }
        for h in self.window_sizes:
            self.params[f"conv{h}_W"] = param(
                f"conv{h}_W", rng.normal(0, 1.0 / np.sqrt(h * k), (kernels_per_window, h * k)))
            self.params[f"conv{h}_b"] = param(f"conv{h}_b", np.zeros(kernels_per_window))

    def _embed_sequence(self, ids):
        emb = self.params["embedding"]
        return T.stack([
            T.take_row(emb, i if int(i) < self.V else UNK) for i in ids
        ])

    def classify(self, ids):
        """Probability in (0,1) that the padded sequence is a real summary."""
        ids = pad_sequence(ids, self.seq_len)
        embedded = self._embed_sequence(ids)
        pooled = [
            max_over_time(conv_features(embedded,
                                        self.params[f"conv{h}_W"],
                                        self.params[f"conv{h}_b"]))
            for h in self.window_sizes
        ]
        features = T.concat(pooled)
        gated = highway(features, self.params["highway_WT"], self.params["highway_bT"],
                        self.params["highway_WF"], self.params["highway_bF"])
        return T.sigmoid(T.dot(self.params["out_W"], gated) + T.gather(self.params["out_b"], 0))

    def score(self, ids):
        with T.no_grad():
            return float(self.classify(ids).values)


def eval_gan_loss(disc, real_seqs, fake_seqs):
    """E_real[-log D] + E_fake[-log(1-D)] without touching gradients."""
    with T.no_grad():
        lr = np.mean([bce_loss(1.0, disc.classify(s)).values for s in real_seqs])
        lf = np.mean([bce_loss(0.0, disc.classify(s)).values for s in fake_seqs])
    return float(lr + lf)


def train_discriminator(disc, real_seqs, negative_sampler, epochs, rng,
                        lr=1e-3, batch_size=32, adam=None):
    """Alternating real/fake training with a fresh negative set each epoch.

    `negative_sampler(rng, n)` must return n generated sequences (the
    bootstrap-style resampling keeps classes balanced). Returns
    (adam state, per-epoch loss trace).
    """
    if not real_seqs:
        raise ValueError("train_discriminator: empty real batch")
    if adam is None:
        adam = AdamState(disc.params, lr=lr)
    trace = []
    for _ in range(int(epochs)):
        fakes = negative_sampler(rng, len(real_seqs))
        if len(fakes) != len(real_seqs):
            raise ValueError("negative sampler must return as many fakes as reals")
        labelled = [(s, 1.0) for s in real_seqs] + [(s, 0.0) for s in fakes]
        order = rng.permutation(len(labelled))
        epoch_loss = 0.0
        for k in range(0, len(order), batch_size):
            idx = order[k : k + batch_size]
            zero_grads(disc.params)
            loss = None
            for j in idx:
                seq, label = labelled[j]
                term = bce_loss(label, disc.classify(seq))
                loss = term if loss is None else loss + term
            loss = loss / len(idx)
            T.backward(loss)
            adam_step(disc.params, collect_grads(disc.params), adam)
            epoch_loss += float(loss.values) * len(idx)
        trace.append(epoch_loss / len(labelled))
    return adam, trace
