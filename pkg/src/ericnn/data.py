"""Dataset ingestion, the train/validation split, and deterministic batching.

Images load from two class subfolders (default ``cactus/`` and
``no_cactus/``), must be exactly 32x32 RGB, and are scaled to [0, 1].  Files
that fail to decode or have the wrong size are skipped with a warning on
stderr and counted in the ingestion summary.  Item order is lexicographic by
path regardless of filesystem enumeration order.
"""

import math
import sys
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import IngestionError

IMAGE_SHAPE = (32, 32, 3)
_EXTS = {".png", ".jpg", ".jpeg", ".bmp"}

_PERM_NS = 0
_SPLIT_NS = 4


@dataclass
class Dataset:
    images: np.ndarray  # (n, 32, 32, 3) float32 in [0, 1]
    labels: np.ndarray  # (n,) int8, 1 = cactus
    paths: tuple
    split_tag: str = "train"
    summary: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.labels)

    def subset(self, indices, split_tag=None):
        idx = np.asarray(indices)
        return Dataset(
            images=self.images[idx],
            labels=self.labels[idx],
            paths=tuple(self.paths[i] for i in idx),
            split_tag=split_tag or self.split_tag,
        )


@dataclass
class Batch:
    images: np.ndarray  # (b, 32, 32, 3)
    labels: np.ndarray  # (b,)
    indices: np.ndarray  # positions in the source dataset

    def __len__(self):
        return len(self.labels)


def _decode(path):
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"))
    if arr.shape != IMAGE_SHAPE:
        raise ValueError(f"size {arr.shape[:2]} != (32, 32)")
    return arr.astype(np.float32) / 255.0


def load_dataset(root_dir, positive_dir="cactus", negative_dir="no_cactus",
                 split_tag="train"):
    """Load every decodable 32x32 image under the two class folders."""
    from pathlib import Path

    root = Path(root_dir)
    folders = [(root / positive_dir, 1), (root / negative_dir, 0)]
    for folder, _ in folders:
        if not folder.is_dir():
            raise IngestionError(f"missing class folder: {folder}")

    entries = []
    for folder, label in folders:
        for path in folder.iterdir():
            if path.is_file() and path.suffix.lower() in _EXTS:
                entries.append((str(path), label))
    entries.sort(key=lambda e: e[0])

    images, labels, paths = [], [], []
    rejected = 0
    for path, label in entries:
        try:
            images.append(_decode(path))
        except (OSError, ValueError, UnidentifiedImageError) as exc:
            print(f"warning: skipping {path}: {exc}", file=sys.stderr)
            rejected += 1
            continue
        labels.append(label)
        paths.append(path)
    if not images:
        raise IngestionError(f"no decodable 32x32 images under {root}")

    labels = np.asarray(labels, dtype=np.int8)
    summary = {
        positive_dir: int(np.count_nonzero(labels == 1)),
        negative_dir: int(np.count_nonzero(labels == 0)),
        "rejected": rejected,
    }
    return Dataset(
        images=np.stack(images),
        labels=labels,
        paths=tuple(paths),
        split_tag=split_tag,
        summary=summary,
    )


def split_train_val(dataset, fraction=0.8, seed=0):
    """Seeded shuffle then prefix split; train gets ceil(fraction * n) items."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"split fraction must lie in (0, 1), got {fraction}")
    n = len(dataset)
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    # tiny slack so exact products like 0.8 * 17500 do not ceil one too high
    n_train = math.ceil(fraction * n - 1e-9)
    perm = np.random.default_rng((int(seed), _SPLIT_NS)).permutation(n)
    train = dataset.subset(perm[:n_train], split_tag="train")
    val = dataset.subset(perm[n_train:], split_tag="val")
    return train, val


def epoch_permutation(n, seed, epoch):
    """Item order for one epoch; depends only on (seed, epoch)."""
    return np.random.default_rng((int(seed), _PERM_NS, int(epoch))).permutation(n)


def batches(dataset, batch_size, seed=0, epoch=0):
    """Per-epoch reshuffled batches covering the dataset exactly once.

    The final batch may be short; no sample is dropped.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    perm = epoch_permutation(len(dataset), seed, epoch)
    out = []
    for start in range(0, len(dataset), batch_size):
        idx = perm[start : start + batch_size]
        out.append(Batch(images=dataset.images[idx], labels=dataset.labels[idx],
                         indices=idx))
    return out
