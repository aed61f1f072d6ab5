"""Command-line entry point.

Subcommands: train, eval, ablate, init-stats, augment-preview.  Every run
writes the exact configuration it used to ``config.effective`` in its output
directory; re-running from that file reproduces the delimited artifacts
byte-for-byte.  Exit codes: 0 success, 1 configuration/data problems,
2 numeric failure (non-finite loss).
"""

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
from PIL import Image

from . import data as data_mod
from . import figures
from .augment import augment_image, item_rng
from .config import RunConfig, SEED_ENV_VAR, load_config
from .errors import (ConfigError, FormatError, IngestionError, NumericError,
                     ShapeError)
from .init import SlopeInterval, draw_unit, unit_rng
from .network import build_network, evaluate, train
from .weights_io import load_weights, save_weights

LOCK_NAME = ".lock"


class _OutDirLock:
    """One run at a time per output directory."""

    def __init__(self, out_dir):
        self.path = Path(out_dir) / LOCK_NAME
        self.fd = None

    def __enter__(self):
        Path(self.path).parent.mkdir(parents=True, exist_ok=True)
        try:
            self.fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(f"output directory is locked by another run: {self.path}")
        return self

    def __exit__(self, *exc):
        if self.fd is not None:
            os.close(self.fd)
            os.unlink(self.path)
        return False


def _load_split(cfg):
    dataset = data_mod.load_dataset(cfg.data_root, cfg.positive_dir, cfg.negative_dir)
    counts = ", ".join(f"{k}={v}" for k, v in dataset.summary.items())
    print(f"loaded {len(dataset)} images ({counts})")
    return data_mod.split_train_val(dataset, cfg.split_fraction, cfg.seed)


def _write_history(run, path):
    lines = ["epoch,train_loss,train_acc,val_loss,val_acc"]
    for i in range(len(run.train_loss)):
        lines.append(f"{i + 1},{run.train_loss[i]!r},{run.train_acc[i]!r},"
                     f"{run.val_loss[i]!r},{run.val_acc[i]!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _metrics_payload(report, cfg):
    per_class = report.per_class(cfg.positive_dir, cfg.negative_dir)
    cm = report.confusion
    return {
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "loss": report.mean_loss,
        "confusion": {
            "tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn,
            "per_class": per_class,
        },
    }


def _print_report(report, cfg):
    print(f"{'accuracy':<10} {report.accuracy:.4f}")
    print(f"{'precision':<10} {report.precision:.4f}")
    print(f"{'recall':<10} {report.recall:.4f}")
    print(f"{'f1':<10} {report.f1:.4f}")
    print(f"{'loss':<10} {report.mean_loss:.4f}")
    cm = report.confusion
    print(f"{'confusion':<10} tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}")
    if report.undefined:
        print(f"{'undefined':<10} {', '.join(report.undefined)} (zero denominator)")
    for name, scores in report.per_class(cfg.positive_dir, cfg.negative_dir).items():
        print(f"  {name:<12} precision={scores['precision']:.4f} "
              f"recall={scores['recall']:.4f} f1={scores['f1']:.4f}")


def _train_one(cfg, train_ds, val_ds, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    net = build_network(init=cfg.init, interval=cfg.interval(),
                        train_images=train_ds.images, seed=cfg.seed,
                        data_align=cfg.data_align)
    save_weights(net, out_dir / "init.ericnn")
    run = train(net, train_ds, val_ds, cfg, log=print)
    save_weights(net, out_dir / "model.ericnn")
    _write_history(run, out_dir / "history.csv")
    figures.save_history_curves(run, out_dir / "history.png")
    print(f"validation accuracy: final={run.final_val_accuracy:.4f}, "
          f"best={run.best_val_accuracy:.4f} (epoch {run.best_val_epoch})")
    print(f"training took {run.duration_s:.1f}s over {run.epochs} epochs")
    return net, run


def cmd_train(cfg):
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    with _OutDirLock(out_dir):
        cfg.write(out_dir / "config.effective")
        train_ds, val_ds = _load_split(cfg)
        _train_one(cfg, train_ds, val_ds, out_dir)
        print(f"artifacts in {out_dir}: model.ericnn, history.csv, config.effective")
    return 0


def cmd_eval(weights_path, test_dir, cfg):
    out_dir = Path(cfg.out_dir)
    with _OutDirLock(out_dir):
        cfg.write(out_dir / "config.effective")
        net = load_weights(weights_path)
        test_ds = data_mod.load_dataset(test_dir, cfg.positive_dir,
                                        cfg.negative_dir, split_tag="test")
        print(f"evaluating {len(test_ds)} images from {test_dir}")
        report = evaluate(net, test_ds)
        payload = _metrics_payload(report, cfg)
        (out_dir / "metrics.json").write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        figures.save_confusion_heatmap(
            report, out_dir / "confusion.png",
            class_names=(cfg.negative_dir, cfg.positive_dir))
        figures.save_per_class_bars(
            report, out_dir / "per_class.png",
            class_names=(cfg.positive_dir, cfg.negative_dir))
        _print_report(report, cfg)
    return 0


def cmd_ablate(cfg):
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    arms = (("with_augmentation", cfg),
            ("without_augmentation", cfg.without_augmentation()))
    with _OutDirLock(out_dir):
        out_dir.mkdir(parents=True, exist_ok=True)
        cfg.write(out_dir / "config.effective")
        train_ds, val_ds = _load_split(cfg)
        if cfg.test_root:
            eval_ds = data_mod.load_dataset(cfg.test_root, cfg.positive_dir,
                                            cfg.negative_dir, split_tag="test")
        else:
            eval_ds = val_ds
            print("no test_root configured; comparing arms on the validation split")
        rows = []
        for arm_name, arm_cfg in arms:
            print(f"--- arm: {arm_name} ---")
            arm_dir = out_dir / arm_name
            arm_cfg = replace(arm_cfg, out_dir=str(arm_dir))
            net, _ = _train_one(arm_cfg, train_ds, val_ds, arm_dir)
            report = evaluate(net, eval_ds)
            rows.append((arm_name, _metrics_payload(report, cfg)))
            _print_report(report, cfg)
        header = "arm,accuracy,precision,recall,f1,loss"
        lines = [header]
        for arm_name, m in rows:
            lines.append(f"{arm_name},{m['accuracy']!r},{m['precision']!r},"
                         f"{m['recall']!r},{m['f1']!r},{m['loss']!r}")
        (out_dir / "ablation.csv").write_text("\n".join(lines) + "\n",
                                              encoding="utf-8")
        figures.save_ablation_bars(rows, out_dir / "ablation.png")
        init_a = (out_dir / arms[0][0] / "init.ericnn").read_bytes()
        init_b = (out_dir / arms[1][0] / "init.ericnn").read_bytes()
        print(f"initial weights identical across arms: {init_a == init_b}")
    return 0


def cmd_init_stats(cfg, n_units, fan_in):
    if n_units < 1:
        raise ConfigError(f"n-units must be >= 1, got {n_units}")
    interval = cfg.interval()  # rejects invalid alpha_min
    out_dir = Path(cfg.out_dir)
    with _OutDirLock(out_dir):
        cfg.write(out_dir / "config.effective")
        lines = ["unit,alpha_deg,normal_norm,w0,max_abs_weight"]
        alphas = np.empty(n_units)
        offset_residual = 0.0
        weight_residual = 0.0
        violations = 0
        for u in range(n_units):
            unit = draw_unit(fan_in, interval, unit_rng(cfg.seed, 0, u))
            norm = float(np.linalg.norm(unit.normal))
            alphas[u] = unit.alpha_deg
            if not interval.contains(unit.alpha_deg):
                violations += 1
            tan_a = np.tan(np.radians(unit.alpha_deg))
            offset_residual = max(
                offset_residual,
                abs(unit.w0 * tan_a * (-1.0) ** unit.c - norm) / norm)
            weight_residual = max(
                weight_residual,
                float(np.max(np.abs(unit.weights * unit.w0 + 4.0 * unit.normal))
                      / np.max(np.abs(4.0 * unit.normal))))
            lines.append(f"{u},{unit.alpha_deg!r},{norm!r},{unit.w0!r},"
                         f"{float(np.max(np.abs(unit.weights)))!r}")
        (out_dir / "units.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        hist, edges = np.histogram(alphas, bins=36, range=(-90.0, 90.0))
        summary = {
            "n_units": n_units,
            "fan_in": fan_in,
            "alpha_min_deg": interval.alpha_min_deg,
            "interval_violations": violations,
            "offset_identity_max_rel_residual": offset_residual,
            "weight_identity_max_rel_residual": weight_residual,
            "alpha_histogram": {"bin_edges_deg": edges.tolist(),
                                "counts": hist.tolist()},
        }
        (out_dir / "summary.json").write_text(
            json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        figures.save_angle_histogram(alphas, interval.alpha_min_deg,
                                     out_dir / "alpha_hist.png")
        print(f"sampled {n_units} units at fan-in {fan_in}: "
              f"{violations} interval violations, "
              f"max identity residuals {offset_residual:.2e} / {weight_residual:.2e}")
        if violations:
            print("error: sampled slope angles escaped the configured interval",
                  file=sys.stderr)
            return 1
    return 0


def cmd_augment_preview(cfg, count):
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    with _OutDirLock(out_dir):
        cfg.write(out_dir / "config.effective")
        dataset = data_mod.load_dataset(cfg.data_root, cfg.positive_dir,
                                        cfg.negative_dir)
        count = min(count, len(dataset))
        spec = cfg.augment_spec()
        images, titles = [], []
        for i in range(count):
            original = dataset.images[i]
            transformed = augment_image(original, spec, item_rng(cfg.seed, 0, i))
            for tag, img in (("orig", original), ("aug", transformed)):
                png = out_dir / f"{tag}_{i:03d}.png"
                Image.fromarray((np.clip(img, 0, 1) * 255).astype(np.uint8)).save(png)
                images.append(img)
                titles.append(f"{tag} {i}")
        figures.save_image_grid(images, titles, out_dir / "preview.png")
        print(f"wrote {2 * count} preview images to {out_dir}")
    return 0


def _add_config_flags(parser):
    parser.add_argument("--config", help="config file of key = value lines")
    parser.add_argument("--data-root", dest="data_root")
    parser.add_argument("--test-root", dest="test_root")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--init", choices=("eri", "baseline"))
    parser.add_argument("--alpha-min", dest="alpha_min", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--split-fraction", dest="split_fraction", type=float)
    parser.add_argument("--no-augment", action="store_true",
                        help="disable all six augmentation transforms")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")


def _resolve_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is None and SEED_ENV_VAR in os.environ:
        try:
            cfg.seed = int(os.environ[SEED_ENV_VAR])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc
    direct = {}
    for key in ("data_root", "test_root", "out_dir", "seed", "init", "alpha_min",
                "epochs", "batch_size", "lr", "split_fraction"):
        value = getattr(args, key, None)
        if value is not None:
            direct[key] = value
    cfg.apply(direct)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got '{item}'")
        key, value = item.split("=", 1)
        cfg.apply({key.strip(): value.strip()})
    if getattr(args, "no_augment", False):
        cfg = cfg.without_augmentation()
    return cfg


def _require(cfg, field, flag):
    if not getattr(cfg, field):
        raise ConfigError(f"{field} is required (pass {flag} or set it in the config)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ericnn",
        description="Train and evaluate the slope-angle-initialized CNN")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a class-folder dataset")
    _add_config_flags(p)

    p = sub.add_parser("eval", help="evaluate saved weights on a test folder")
    _add_config_flags(p)
    p.add_argument("--weights", required=True, help="path to a .ericnn weight file")
    p.add_argument("--test-dir", dest="test_dir", help="test dataset root "
                   "(defaults to test_root from the config)")

    p = sub.add_parser("ablate", help="train with and without augmentation "
                       "from identical initial weights")
    _add_config_flags(p)

    p = sub.add_parser("init-stats", help="sample initializer units and report "
                       "angle/weight statistics")
    _add_config_flags(p)
    p.add_argument("--n-units", dest="n_units", type=int, default=10000)
    p.add_argument("--fan-in", dest="fan_in", type=int, default=12)

    p = sub.add_parser("augment-preview", help="write augmented copies of a few "
                       "training images for inspection")
    _add_config_flags(p)
    p.add_argument("--count", type=int, default=8)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if args.command == "train":
            _require(cfg, "data_root", "--data-root")
            return cmd_train(cfg)
        if args.command == "eval":
            test_dir = args.test_dir or cfg.test_root
            if not test_dir:
                raise ConfigError("a test directory is required "
                                  "(--test-dir or test_root)")
            return cmd_eval(args.weights, test_dir, cfg)
        if args.command == "ablate":
            _require(cfg, "data_root", "--data-root")
            return cmd_ablate(cfg)
        if args.command == "init-stats":
            return cmd_init_stats(cfg, args.n_units, args.fan_in)
        if args.command == "augment-preview":
            _require(cfg, "data_root", "--data-root")
            return cmd_augment_preview(cfg, args.count)
        raise ConfigError(f"unknown command {args.command}")
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, IngestionError, FormatError, ShapeError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
