"""Command-line entry point for the four training phases plus inference.

Commands: pretrain-gen, pretrain-disc, adv-train, summarize, evaluate.
Each takes --config PATH plus overrides and exits 0 on success, nonzero
with a one-line diagnostic on failure. Report paths get a delimited
trace plus rendered figures.
"""

import argparse
import os
import sys

import numpy as np

from . import corpus, report
from . import tensor as T
from .checkpoint import load_checkpoint, save_checkpoint
from .config import TrainingConfig, config_hash, from_profile, load_config
from .discriminator import Discriminator, pad_sequence, train_discriminator
from .generator import Generator
from .optim import AdamState, adam_step, clip_grad_norm, collect_grads, zero_grads
from .rl import RewardConfig, adversarial_train, make_negative_sampler, validation_rouge
from .rollout import RolloutPolicy


class CliError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# shared plumbing


def _load_examples(path, vocab, cfg):
    if not path:
        raise CliError("no dataset path configured (set train_path/val_path)")
    if not os.path.exists(path):
        raise CliError(f"dataset not found: {path}")
    return [
        corpus.encode_example(src, tgt, vocab, cfg.src_limit, cfg.tgt_limit)
        for src, tgt in corpus.load_dataset(path)
    ]


def _vocab_path(cfg):
    return os.path.join(cfg.out_dir, "vocab.txt")


def _build_or_load_vocab(cfg):
    path = _vocab_path(cfg)
    if os.path.exists(path):
        return corpus.Vocabulary.load(path)
    if not cfg.train_path or not os.path.exists(cfg.train_path):
        raise CliError(f"no vocabulary at {path} and no training data to build one")
    tokens = []
    for src, tgt in corpus.load_dataset(cfg.train_path):
        tokens.extend(src[: cfg.src_limit])
        tokens.extend(tgt[: cfg.tgt_limit])
    vocab = corpus.build_vocab(tokens, cfg.vocab_size)
    os.makedirs(cfg.out_dir, exist_ok=True)
    vocab.save(path)
    return vocab


def _gen_checkpoint_tensors(gen, adam=None, epoch=0):
    tensors = {f"gen/{name}": p.values for name, p in gen.params.items()}
    tensors["epoch"] = np.array([float(epoch)])
    if adam is not None:
        for name in gen.params:
            tensors[f"adam_m/{name}"] = adam.m[name]
            tensors[f"adam_v/{name}"] = adam.v[name]
        tensors["adam_t"] = np.array([float(adam.t)])
    return tensors


def _load_generator(path, vocab, cfg, rng):
    if not os.path.exists(path):
        raise CliError(f"generator checkpoint not found: {path}")
    tensors, meta = load_checkpoint(path)
    gen = Generator(vocab.size, cfg.d_emb, cfg.d_hid, rng)
    gen.load_values({name[4:]: arr for name, arr in tensors.items()
                     if name.startswith("gen/")})
    adam = AdamState(gen.params, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    if "adam_t" in tensors:
        adam.t = int(tensors["adam_t"][0])
        for name in gen.params:
            adam.m[name] = tensors[f"adam_m/{name}"].copy()
            adam.v[name] = tensors[f"adam_v/{name}"].copy()
    epoch = int(tensors.get("epoch", np.zeros(1))[0])
    return gen, adam, epoch


def _load_discriminator(path, vocab, cfg, rng):
    if not os.path.exists(path):
        raise CliError(f"discriminator checkpoint not found: {path}")
    tensors, _ = load_checkpoint(path)
    disc = Discriminator(vocab.size, cfg.disc_d_emb, cfg.tgt_limit + 1, rng,
                         cfg.window_sizes, cfg.disc_kernels)
    for name, p in disc.params.items():
        arr = tensors[f"disc/{name}"]
        if arr.shape != p.values.shape:
            raise CliError(f"discriminator checkpoint shape mismatch on {name}")
        p.values = arr.copy()
    return disc


def _max_len(cfg):
    return cfg.tgt_limit + 1  # room for EOS after a full-length summary


# ---------------------------------------------------------------------------
# training phases


def mle_pretrain(gen, examples, epochs, cfg, rng, adam=None, start_epoch=0,
                 log=None):
    """Teacher-forced MLE epochs; returns (adam state, per-epoch loss trace)."""
    if adam is None:
        adam = AdamState(gen.params, lr=cfg.lr, beta1=cfg.beta1,
                         beta2=cfg.beta2, eps=cfg.eps)
    trace = []
    for epoch in range(start_epoch, start_epoch + epochs):
        total, count = 0.0, 0
        for batch in corpus.make_batches(examples, cfg.batch_size, rng):
            zero_grads(gen.params)
            loss = gen.mle_loss(batch.examples)
            T.backward(loss)
            grads = collect_grads(gen.params)
            clip_grad_norm(grads, cfg.clip_norm)
            adam_step(gen.params, grads, adam)
            total += float(loss.values) * len(batch)
            count += len(batch)
        trace.append((epoch + 1, total / count))
        if log:
            log(f"epoch {epoch + 1}: loss {total / count:.4f}")
    return adam, trace


def cmd_pretrain_gen(cfg, args):
    rng = np.random.default_rng(cfg.seed)
    vocab = _build_or_load_vocab(cfg)
    examples = _load_examples(cfg.train_path, vocab, cfg)
    ckpt_path = args.checkpoint or os.path.join(cfg.out_dir, "generator.ckpt")
    if args.resume and os.path.exists(ckpt_path):
        gen, adam, start_epoch = _load_generator(ckpt_path, vocab, cfg, rng)
    else:
        gen = Generator(vocab.size, cfg.d_emb, cfg.d_hid, rng)
        adam, start_epoch = None, 0
    epochs = args.epochs if args.epochs is not None else cfg.mle_epochs
    adam, trace = mle_pretrain(gen, examples, epochs, cfg, rng, adam=adam,
                               start_epoch=start_epoch,
                               log=lambda m: print(m, flush=True))
    os.makedirs(cfg.out_dir, exist_ok=True)
    save_checkpoint(ckpt_path, _gen_checkpoint_tensors(gen, adam, start_epoch + epochs),
                    meta={"config_hash": config_hash(cfg)})
    report.save_trace(os.path.join(cfg.out_dir, "pretrain_gen_trace.csv"),
                      trace, header="epoch,loss")
    if trace:
        report.plot_loss_curve(os.path.join(cfg.out_dir, "pretrain_gen_loss.png"),
                               [row[1] for row in trace], ylabel="MLE loss")
    print(f"saved generator checkpoint to {ckpt_path}")
    return 0


def cmd_pretrain_disc(cfg, args):
    rng = np.random.default_rng(cfg.seed)
    vocab = _build_or_load_vocab(cfg)
    examples = _load_examples(cfg.train_path, vocab, cfg)
    gen_path = args.checkpoint or os.path.join(cfg.out_dir, "generator.ckpt")
    gen, _, _ = _load_generator(gen_path, vocab, cfg, rng)
    disc = Discriminator(vocab.size, cfg.disc_d_emb, _max_len(cfg), rng,
                         cfg.window_sizes, cfg.disc_kernels)
    real = [pad_sequence(ex.target_ext_ids, _max_len(cfg)) for ex in examples]
    sampler = make_negative_sampler(gen, examples, _max_len(cfg))
    epochs = args.epochs if args.epochs is not None else cfg.disc_epochs
    _, trace = train_discriminator(disc, real, sampler, epochs, rng,
                                   lr=cfg.lr, batch_size=cfg.disc_batch_size)
    os.makedirs(cfg.out_dir, exist_ok=True)
    disc_path = os.path.join(cfg.out_dir, "discriminator.ckpt")
    save_checkpoint(disc_path, {f"disc/{n}": p.values for n, p in disc.params.items()},
                    meta={"config_hash": config_hash(cfg)})
    report.save_trace(os.path.join(cfg.out_dir, "pretrain_disc_trace.csv"),
                      list(enumerate(trace, start=1)), header="epoch,loss")
    if trace:
        report.plot_loss_curve(os.path.join(cfg.out_dir, "pretrain_disc_loss.png"),
                               trace, ylabel="BCE loss")
    print(f"saved discriminator checkpoint to {disc_path}")
    return 0


def cmd_adv_train(cfg, args):
    rng = np.random.default_rng(cfg.seed)
    vocab = _build_or_load_vocab(cfg)
    train_examples = _load_examples(cfg.train_path, vocab, cfg)
    val_examples = (_load_examples(cfg.val_path, vocab, cfg)
                    if cfg.val_path else train_examples)
    gen_path = args.checkpoint or os.path.join(cfg.out_dir, "generator.ckpt")
    gen, _, _ = _load_generator(gen_path, vocab, cfg, rng)
    disc = _load_discriminator(os.path.join(cfg.out_dir, "discriminator.ckpt"),
                               vocab, cfg, rng)
    rollout = RolloutPolicy(gen, sync_interval=cfg.sync_interval)
    rcfg = RewardConfig(
        lambda_disc=args.lambda_disc if args.lambda_disc is not None else cfg.lambda_disc,
        baseline_decay=cfg.baseline_decay,
        n_rollouts=args.rollouts if args.rollouts is not None else cfg.n_rollouts,
        g_steps=cfg.g_steps, d_steps=cfg.d_steps,
        samples_per_g_step=cfg.samples_per_g_step,
        advantage_guard=cfg.advantage_guard, max_len=_max_len(cfg))
    rounds = args.epochs if args.epochs is not None else cfg.adv_rounds
    trace = adversarial_train(train_examples, val_examples, gen, disc, rollout,
                              vocab, rcfg, rng, rounds, gen_lr=cfg.lr / 10,
                              disc_lr=cfg.lr, clip_norm=cfg.clip_norm,
                              log=lambda m: print(m, flush=True))
    os.makedirs(cfg.out_dir, exist_ok=True)
    save_checkpoint(os.path.join(cfg.out_dir, "generator_adv.ckpt"),
                    _gen_checkpoint_tensors(gen),
                    meta={"config_hash": config_hash(cfg)})
    save_checkpoint(os.path.join(cfg.out_dir, "discriminator_adv.ckpt"),
                    {f"disc/{n}": p.values for n, p in disc.params.items()},
                    meta={"config_hash": config_hash(cfg)})
    trace_path = os.path.join(cfg.out_dir, "adv_trace.csv")
    report.save_trace(trace_path, trace)
    if trace:
        report.plot_adversarial_trace(os.path.join(cfg.out_dir, "adv_trace.png"), trace)
    print(f"adversarial training done; trace at {trace_path}")
    return 0


# ---------------------------------------------------------------------------
# inference and evaluation


def _source_only_example(tokens, vocab, cfg):
    ids, ext_ids, oovs = corpus.encode_source(tokens[: cfg.src_limit], vocab)
    return corpus.EncodedExample(
        source_tokens=tokens, target_tokens=[], source_ids=ids,
        source_ext_ids=ext_ids, oov_list=oovs, target_ids=[], target_ext_ids=[])


def cmd_summarize(cfg, args):
    rng = np.random.default_rng(cfg.seed)
    vocab = _build_or_load_vocab(cfg)
    gen_path = args.checkpoint or os.path.join(cfg.out_dir, "generator.ckpt")
    gen, _, _ = _load_generator(gen_path, vocab, cfg, rng)
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        with open(args.input, encoding="utf-8") as f:
            for line in f:
                tokens = corpus.tokenize(line)
                if not tokens:
                    out.write("\n")
                    continue
                ex = _source_only_example(tokens, vocab, cfg)
                ids = gen.greedy_decode(ex, _max_len(cfg))
                out.write(" ".join(corpus.decode_ids(ids, vocab, ex.oov_list)) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_evaluate(cfg, args):
    rng = np.random.default_rng(cfg.seed)
    vocab = _build_or_load_vocab(cfg)
    gen_path = args.checkpoint or os.path.join(cfg.out_dir, "generator.ckpt")
    gen, _, _ = _load_generator(gen_path, vocab, cfg, rng)
    examples = _load_examples(args.input, vocab, cfg)
    r1, r2, rl = validation_rouge(gen, examples, vocab, _max_len(cfg))
    print("val_rouge1,val_rouge2,val_rougeL")
    print(f"{r1:.6f},{r2:.6f},{rl:.6f}")
    os.makedirs(cfg.out_dir, exist_ok=True)
    report.write_rouge_report(os.path.join(cfg.out_dir, "eval_report.csv"), r1, r2, rl)
    report.plot_rouge_scores(os.path.join(cfg.out_dir, "eval_rouge.png"), r1, r2, rl)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sumgan",
        description="Pointer-generator summarization with adversarial training")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "pretrain-gen": cmd_pretrain_gen,
        "pretrain-disc": cmd_pretrain_disc,
        "adv-train": cmd_adv_train,
        "summarize": cmd_summarize,
        "evaluate": cmd_evaluate,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--config", help="config file (flat key = value lines)")
        p.add_argument("--profile", choices=("paper", "desk"),
                       help="built-in config profile when no --config is given")
        p.add_argument("--seed", type=int)
        p.add_argument("--epochs", type=int, help="epochs (or adversarial rounds)")
        p.add_argument("--lambda", dest="lambda_disc", type=float,
                       help="discriminator weight in the mixed reward")
        p.add_argument("--rollouts", type=int, help="Monte-Carlo rollouts per step")
        p.add_argument("--checkpoint", help="generator checkpoint path")
        p.add_argument("--train", dest="train_path")
        p.add_argument("--val", dest="val_path")
        p.add_argument("--out-dir", dest="out_dir")
        if name == "pretrain-gen":
            p.add_argument("--resume", action="store_true")
        if name in ("summarize", "evaluate"):
            p.add_argument("--input", required=True)
        if name == "summarize":
            p.add_argument("--output")
    return parser


def _resolve_config(args):
    if args.config:
        cfg = load_config(args.config)
    elif args.profile:
        cfg = from_profile(args.profile)
    else:
        cfg = TrainingConfig()
    for key in ("seed", "train_path", "val_path", "out_dir"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return args.fn(cfg, args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
