"""Adversarial training: mixed discriminator+ROUGE rewards, policy-gradient
estimation with rollout action-values and an EMA baseline, and the
alternating generator/discriminator schedule.

Rewards are bounded in [0,1]: lambda weights the discriminator score
against ROUGE-L F1 at the sequence level, so rollout action-values and
word-level credit inherit the mix uniformly. Updates go through Adam on
the negated reward objective (same ascent direction as a plain
gradient-ascent step on the expected reward).
"""

import time
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .corpus import EOS, decode_ids
from .discriminator import pad_sequence, train_discriminator
from .optim import AdamState, adam_step, clip_grad_norm, collect_grads, zero_grads
from .rouge import evaluate_corpus, rouge_l

TRACE_HEADER = "round,mean_reward,disc_loss,val_rouge1,val_rouge2,val_rougeL,wall_ms"


@dataclass
class RewardConfig:
    lambda_disc: float = 0.7
    baseline_decay: float = 0.9
    n_rollouts: int = 16
    g_steps: int = 1
    d_steps: int = 5
    samples_per_g_step: int = 8
    advantage_guard: float = 10.0
    max_len: int = 25

    def __post_init__(self):
        if not 0.0 <= self.lambda_disc <= 1.0:
            raise ValueError("lambda_disc must be in [0, 1]")
        if not 0.0 <= self.baseline_decay < 1.0:
            raise ValueError("baseline_decay must be in [0, 1)")


@dataclass
class BaselineState:
    b: float = 0.0
    count: int = 0


def update_baseline(state, sequence_rewards, decay):
    """b <- decay*b + (1-decay)*mean(rewards)."""
    rewards = list(sequence_rewards)
    if rewards:
        state.b = decay * state.b + (1.0 - decay) * float(np.mean(rewards))
        state.count += 1
    return state


def mixed_reward(sequence, example, discriminator, lam, vocab):
    """lambda * D(Y) + (1-lambda) * ROUGE-L F1(Y, reference), in [0,1]."""
    d = discriminator.score(sequence) if lam > 0.0 else 0.0
    if lam < 1.0:
        cand = decode_ids(sequence, vocab, example.oov_list)
        r = rouge_l(cand, example.target_tokens).f1
    else:
        r = 0.0
    return lam * d + (1.0 - lam) * r


@dataclass
class GradientStats:
    mean_reward: float
    mean_abs_advantage: float
    n_samples: int


def policy_gradient_step(examples, generator, rollout, score_fn, baseline, cfg, rng):
    """One REINFORCE estimate with rollout action-values as word-level credit.

    Leaves the (mean over samples and steps of advantage * grad log P)
    estimate in the generator parameters' .grad buffers and updates the
    baseline from full-sequence rewards. `score_fn(sequence, example)`
    must return a terminal reward in [0,1].
    """
    zero_grads(generator.params)
    loss_terms = []
    seq_rewards = []
    abs_advantages = []
    for k in range(cfg.samples_per_g_step):
        ex = examples[int(rng.integers(len(examples)))]
        seq, logps = generator.sample_with_logprobs(ex, cfg.max_len, rng)
        for t in range(len(seq)):
            q = rollout.action_value(ex, seq[: t + 1], cfg.n_rollouts,
                                     lambda s: score_fn(s, ex), rng, cfg.max_len)
            adv = q - baseline.b
            abs_advantages.append(abs(adv))
            loss_terms.append((adv, logps[t]))
            if t == len(seq) - 1:
                seq_rewards.append(q if (seq[-1] == EOS or len(seq) >= cfg.max_len)
                                   else float(score_fn(seq, ex)))
    n_terms = len(loss_terms)
    loss = None
    for adv, logp in loss_terms:
        term = (-adv) * logp
        loss = term if loss is None else loss + term
    loss = loss / n_terms
    if any(adv != 0.0 for adv, _ in loss_terms):
        T.backward(loss)
    update_baseline(baseline, seq_rewards, cfg.baseline_decay)
    return GradientStats(
        mean_reward=float(np.mean(seq_rewards)),
        mean_abs_advantage=float(np.mean(abs_advantages)),
        n_samples=cfg.samples_per_g_step,
    )


def validation_rouge(generator, examples, vocab, max_len):
    pairs = []
    for ex in examples:
        ids = generator.greedy_decode(ex, max_len)
        pairs.append((decode_ids(ids, vocab, ex.oov_list), ex.target_tokens))
    return evaluate_corpus(pairs)


def make_negative_sampler(generator, examples, max_len):
    def sampler(rng, n):
        out = []
        for _ in range(n):
            ex = examples[int(rng.integers(len(examples)))]
            out.append(generator.sample_sequence(ex, max_len, rng))
        return out
    return sampler


def adversarial_train(train_examples, val_examples, generator, discriminator,
                      rollout, vocab, cfg, rng, rounds, gen_lr=1e-4, disc_lr=1e-3,
                      clip_norm=2.0, log=None):
    """Alternate policy-gradient generator updates with discriminator retraining.

    Returns the metric trace: one row per round with
    (round, mean_reward, disc_loss, val_rouge1/2/L, wall_ms).
    """
    gen_adam = AdamState(generator.params, lr=gen_lr)
    disc_adam = AdamState(discriminator.params, lr=disc_lr)
    baseline = BaselineState()
    score_fn = lambda seq, ex: mixed_reward(
        seq, ex, discriminator, cfg.lambda_disc, vocab)
    real_seqs = [pad_sequence(ex.target_ext_ids, cfg.max_len) for ex in train_examples]
    sampler = make_negative_sampler(generator, train_examples, cfg.max_len)

    trace = []
    for rnd in range(rounds):
        t0 = time.perf_counter()
        rewards = []
        for _ in range(cfg.g_steps):
            stats = policy_gradient_step(train_examples, generator, rollout,
                                         score_fn, baseline, cfg, rng)
            rewards.append(stats.mean_reward)
            if stats.mean_abs_advantage > cfg.advantage_guard:
                if log:
                    log(f"round {rnd}: divergence guard tripped "
                        f"(mean |advantage| {stats.mean_abs_advantage:.3f}), skipping update")
                continue
            grads = collect_grads(generator.params)
            clip_grad_norm(grads, clip_norm)
            adam_step(generator.params, grads, gen_adam)
        rollout.lag += 1
        if rollout.lag >= rollout.sync_interval:
            rollout.sync_from_generator(generator)

        disc_loss = float("nan")
        if cfg.d_steps > 0 and cfg.lambda_disc > 0.0:
            _, disc_trace = train_discriminator(
                discriminator, real_seqs, sampler, cfg.d_steps, rng, adam=disc_adam)
            disc_loss = 2.0 * disc_trace[-1]  # per-example mean -> real+fake term sum
        r1, r2, rl = validation_rouge(generator, val_examples, vocab, cfg.max_len)
        wall_ms = int(1000 * (time.perf_counter() - t0))
        trace.append((rnd, float(np.mean(rewards)), disc_loss, r1, r2, rl, wall_ms))
        if log:
            log(f"round {rnd}: reward {np.mean(rewards):.4f} disc_loss {disc_loss:.4f} "
                f"rougeL {rl:.4f}")
    return trace
