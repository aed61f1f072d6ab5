"""Matplotlib figures rendered next to the delimited report files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_history_curves(run, path):
    """Loss and accuracy curves over epochs for train and validation."""
    epochs = np.arange(1, len(run.train_loss) + 1)
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(10, 4))
    ax_loss.plot(epochs, run.train_loss, label="train")
    ax_loss.plot(epochs, run.val_loss, label="validation")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("loss")
    ax_loss.legend()
    ax_acc.plot(epochs, run.train_acc, label="train")
    ax_acc.plot(epochs, run.val_acc, label="validation")
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0.0, 1.02)
    ax_acc.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_confusion_heatmap(report, path, class_names=("no_cactus", "cactus")):
    cm = report.confusion
    grid = np.array([[cm.tn, cm.fp], [cm.fn, cm.tp]])
    fig, ax = plt.subplots(figsize=(4.2, 3.8))
    im = ax.imshow(grid, cmap="Blues")
    for (i, j), value in np.ndenumerate(grid):
        color = "white" if value > grid.max() / 2 else "black"
        ax.text(j, i, str(value), ha="center", va="center", color=color)
    ax.set_xticks([0, 1], [f"pred {c}" for c in class_names])
    ax.set_yticks([0, 1], [f"true {c}" for c in class_names])
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_per_class_bars(report, path, class_names=("cactus", "no_cactus")):
    per_class = report.per_class(*class_names)
    measures = ("precision", "recall", "f1")
    x = np.arange(len(measures))
    width = 0.35
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, name in enumerate(class_names):
        vals = [per_class[name][m] for m in measures]
        ax.bar(x + (k - 0.5) * width, vals, width, label=name)
    ax.set_xticks(x, measures)
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_ablation_bars(rows, path):
    """rows: list of (arm name, {metric: value}) pairs."""
    measures = ("accuracy", "precision", "recall", "f1")
    x = np.arange(len(measures))
    width = 0.8 / max(1, len(rows))
    fig, ax = plt.subplots(figsize=(7, 4))
    for k, (arm, metrics) in enumerate(rows):
        vals = [metrics[m] for m in measures]
        ax.bar(x + (k - (len(rows) - 1) / 2) * width, vals, width, label=arm)
    ax.set_xticks(x, measures)
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_angle_histogram(alphas_deg, alpha_min_deg, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(alphas_deg, bins=72, range=(-90, 90), color="tab:blue")
    for edge in (-90, -alpha_min_deg, alpha_min_deg, 90):
        ax.axvline(edge, color="tab:red", linestyle="--", linewidth=0.8)
    ax.set_xlabel("slope angle (degrees)")
    ax.set_ylabel("units")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_image_grid(images, titles, path, cols=4):
    rows = (len(images) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(2.2 * cols, 2.4 * rows))
    axes = np.atleast_1d(axes).ravel()
    for ax in axes:
        ax.axis("off")
    for ax, img, title in zip(axes, images, titles):
        ax.imshow(np.clip(img, 0.0, 1.0))
        ax.set_title(title, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
