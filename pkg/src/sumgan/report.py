"""Delimited metric traces and the matplotlib figures rendered next to them."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .rl import TRACE_HEADER  # noqa: E402


def save_trace(path, rows, header=TRACE_HEADER):
    """Append-only comma-separated trace, one line per round."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    exists = os.path.exists(path)
    with open(path, "a", encoding="utf-8") as f:
        if not exists:
            f.write(header + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def read_trace(path):
    with open(path, encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def plot_loss_curve(path, losses, ylabel="loss", title=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(1, len(losses) + 1), losses, marker="o", markersize=3)
    ax.set_xlabel("epoch")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_adversarial_trace(path, trace):
    """Reward and validation ROUGE curves from adversarial_train rows."""
    rounds = [r[0] for r in trace]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(rounds, [r[1] for r in trace], marker="o", markersize=3, label="mean reward")
    ax1.plot(rounds, [r[2] for r in trace], marker="s", markersize=3, label="disc loss")
    ax1.set_xlabel("round")
    ax1.legend()
    ax1.grid(alpha=0.3)
    for idx, name in ((3, "ROUGE-1"), (4, "ROUGE-2"), (5, "ROUGE-L")):
        ax2.plot(rounds, [r[idx] for r in trace], marker="o", markersize=3, label=name)
    ax2.set_xlabel("round")
    ax2.set_ylabel("validation F1")
    ax2.legend()
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_rouge_scores(path, r1, r2, rl):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(["ROUGE-1", "ROUGE-2", "ROUGE-L"], [r1, r2, rl], color="#4477aa")
    ax.set_ylabel("F1")
    ax.set_ylim(0, 1)
    for i, v in enumerate([r1, r2, rl]):
        ax.text(i, v + 0.01, f"{v:.3f}", ha="center")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_rouge_report(path, r1, r2, rl):
    """Text table matching the metric-trace column names."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("val_rouge1,val_rouge2,val_rougeL\n")
        f.write(f"{r1:.6f},{r2:.6f},{rl:.6f}\n")
