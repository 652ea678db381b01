import os

import numpy as np
import pytest

from sumgan import report
from sumgan.checkpoint import load_checkpoint
from sumgan.cli import main
from sumgan.rl import TRACE_HEADER

WORDS = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"]


def write_corpus(path, n=6):
    lines = []
    for i in range(n):
        src = " ".join(WORDS[(i + j) % len(WORDS)] for j in range(4))
        tgt = " ".join(WORDS[(i + j) % len(WORDS)] for j in range(2))
        lines.append(f"{src}\t{tgt}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def workdir(tmp_path):
    data = write_corpus(tmp_path / "train.tsv")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "vocab_size = 30\nd_emb = 6\nd_hid = 4\nsrc_limit = 6\ntgt_limit = 3\n"
        "batch_size = 4\ndisc_d_emb = 6\ndisc_windows = 1,2\ndisc_kernels = 3\n"
        "disc_batch_size = 4\nn_rollouts = 2\nsamples_per_g_step = 2\n"
        f"lr = 0.01\nseed = 0\ntrain_path = {data}\nout_dir = {tmp_path / 'out'}\n",
        encoding="utf-8",
    )
    return tmp_path, cfg, data


def run(cfg, *argv):
    return main([argv[0], "--config", str(cfg), *argv[1:]])


# -- argument and error handling ---------------------------------------------


def test_missing_command_exits_nonzero():
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code != 0


def test_bad_config_path_is_one_line_error(capsys):
    rc = main(["pretrain-gen", "--config", "/nonexistent/run.cfg"])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert err.count("\n") == 1


def test_missing_dataset_errors(tmp_path, capsys):
    rc = main(["pretrain-gen", "--profile", "desk",
               "--train", str(tmp_path / "none.tsv"),
               "--out-dir", str(tmp_path / "out")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_missing_checkpoint_errors(workdir, capsys):
    tmp_path, cfg, _ = workdir
    rc = run(cfg, "summarize", "--input", str(tmp_path / "train.tsv"))
    assert rc == 1
    assert "checkpoint" in capsys.readouterr().err


# -- pretrain-gen --------------------------------------------------------------


def test_pretrain_gen_writes_artifacts(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "2") == 0
    out = tmp_path / "out"
    assert (out / "generator.ckpt").exists()
    assert (out / "vocab.txt").exists()
    assert (out / "pretrain_gen_loss.png").stat().st_size > 0
    header, rows = report.read_trace(out / "pretrain_gen_trace.csv")
    assert header == ["epoch", "loss"]
    assert [r[0] for r in rows] == ["1", "2"]
    tensors, meta = load_checkpoint(out / "generator.ckpt")
    assert "gen/embedding" in tensors and "adam_t" in tensors
    assert "config_hash" in meta


def test_pretrain_gen_loss_decreases(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "8") == 0
    _, rows = report.read_trace(tmp_path / "out" / "pretrain_gen_trace.csv")
    losses = [float(r[1]) for r in rows]
    assert losses[-1] < losses[0]


def test_pretrain_gen_zero_epochs(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "0") == 0
    tensors, _ = load_checkpoint(tmp_path / "out" / "generator.ckpt")
    assert int(tensors["epoch"][0]) == 0


def test_pretrain_gen_resume_continues_epochs(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "2") == 0
    ckpt = tmp_path / "out" / "generator.ckpt"
    t1, _ = load_checkpoint(ckpt)
    assert run(cfg, "pretrain-gen", "--epochs", "2", "--resume") == 0
    t2, _ = load_checkpoint(ckpt)
    assert int(t1["epoch"][0]) == 2
    assert int(t2["epoch"][0]) == 4
    assert int(t2["adam_t"][0]) > int(t1["adam_t"][0])
    # resumed training kept moving the weights
    assert not np.array_equal(t1["gen/embedding"], t2["gen/embedding"])


def test_pretrain_gen_fresh_run_overwrites(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0  # no --resume
    tensors, _ = load_checkpoint(tmp_path / "out" / "generator.ckpt")
    assert int(tensors["epoch"][0]) == 1


# -- pretrain-disc and adv-train -------------------------------------------


def full_pipeline(cfg):
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0
    assert run(cfg, "pretrain-disc", "--epochs", "1") == 0
    assert run(cfg, "adv-train", "--epochs", "1") == 0


def test_pretrain_disc_writes_artifacts(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0
    assert run(cfg, "pretrain-disc", "--epochs", "2") == 0
    out = tmp_path / "out"
    assert (out / "discriminator.ckpt").exists()
    assert (out / "pretrain_disc_loss.png").stat().st_size > 0
    header, rows = report.read_trace(out / "pretrain_disc_trace.csv")
    assert header == ["epoch", "loss"]
    assert len(rows) == 2


def test_adv_train_writes_trace_and_figures(workdir):
    tmp_path, cfg, _ = workdir
    full_pipeline(cfg)
    out = tmp_path / "out"
    assert (out / "generator_adv.ckpt").exists()
    assert (out / "discriminator_adv.ckpt").exists()
    assert (out / "adv_trace.png").stat().st_size > 0
    header, rows = report.read_trace(out / "adv_trace.csv")
    assert header == TRACE_HEADER.split(",")
    assert len(rows) == 1
    reward = float(rows[0][1])
    assert 0.0 <= reward <= 1.0


def test_adv_train_zero_rounds_keeps_generator(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0
    assert run(cfg, "pretrain-disc", "--epochs", "1") == 0
    before, _ = load_checkpoint(tmp_path / "out" / "generator.ckpt")
    assert run(cfg, "adv-train", "--epochs", "0") == 0
    after, _ = load_checkpoint(tmp_path / "out" / "generator_adv.ckpt")
    assert np.array_equal(before["gen/embedding"], after["gen/embedding"])


def test_adv_train_reproducible_across_runs(tmp_path):
    def one_run(root):
        root.mkdir()
        data = write_corpus(root / "train.tsv")
        cfg = root / "run.cfg"
        cfg.write_text(
            "vocab_size = 30\nd_emb = 6\nd_hid = 4\nsrc_limit = 6\ntgt_limit = 3\n"
            "batch_size = 4\ndisc_d_emb = 6\ndisc_windows = 1,2\ndisc_kernels = 3\n"
            "disc_batch_size = 4\nn_rollouts = 2\nsamples_per_g_step = 2\n"
            f"lr = 0.01\nseed = 0\ntrain_path = {data}\nout_dir = {root / 'out'}\n",
            encoding="utf-8",
        )
        full_pipeline(cfg)
        _, rows = report.read_trace(root / "out" / "adv_trace.csv")
        return [r[:-1] for r in rows]  # drop the wall-clock column

    assert one_run(tmp_path / "a") == one_run(tmp_path / "b")


# -- summarize and evaluate --------------------------------------------------


def test_summarize_round_trip(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0
    inp = tmp_path / "articles.txt"
    inp.write_text("alpha beta gamma delta\n\nbeta gamma\n", encoding="utf-8")
    outp = tmp_path / "summaries.txt"
    assert run(cfg, "summarize", "--input", str(inp), "--output", str(outp)) == 0
    lines = outp.read_text(encoding="utf-8").split("\n")
    assert len(lines) == 4  # 3 inputs + trailing newline
    assert lines[1] == ""   # blank input line stays blank
    assert lines[0] != ""


def test_summarize_deterministic(workdir):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0
    inp = tmp_path / "a.txt"
    inp.write_text("alpha beta gamma\n", encoding="utf-8")
    o1, o2 = tmp_path / "s1.txt", tmp_path / "s2.txt"
    assert run(cfg, "summarize", "--input", str(inp), "--output", str(o1)) == 0
    assert run(cfg, "summarize", "--input", str(inp), "--output", str(o2)) == 0
    assert o1.read_text() == o2.read_text()


def test_evaluate_reports_scores(workdir, capsys):
    tmp_path, cfg, data = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0
    assert run(cfg, "evaluate", "--input", str(data)) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l]
    assert lines[-2] == "val_rouge1,val_rouge2,val_rougeL"
    scores = [float(x) for x in lines[-1].split(",")]
    assert all(0.0 <= s <= 1.0 for s in scores)
    assert (tmp_path / "out" / "eval_report.csv").exists()
    assert (tmp_path / "out" / "eval_rouge.png").stat().st_size > 0


def test_evaluate_empty_input_errors(workdir, capsys):
    tmp_path, cfg, _ = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "1") == 0
    empty = tmp_path / "empty.tsv"
    empty.write_text("", encoding="utf-8")
    rc = run(cfg, "evaluate", "--input", str(empty))
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_overfit_evaluate_scores_high(workdir, capsys):
    # enough epochs on a 6-pair corpus: the greedy decodes match references
    tmp_path, cfg, data = workdir
    assert run(cfg, "pretrain-gen", "--epochs", "100") == 0
    assert run(cfg, "evaluate", "--input", str(data)) == 0
    out = capsys.readouterr().out
    r1 = float(out.splitlines()[-1].split(",")[0])
    assert r1 > 0.9
