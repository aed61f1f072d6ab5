"""Desk-scale synthetic task: bright cross on noise vs. plain noise.

Positive images carry an axis-aligned bright cross blended over uniform
noise; negatives are noise only.  The task is linearly separable enough for
a small CNN to master quickly, which makes it a practical stand-in when the
real aerial dataset is not on disk.
"""

import numpy as np

from .data import Dataset

_IMG_NS = 6


def _cross_image(rng):
    img = rng.uniform(0.0, 0.8, size=(32, 32, 3)).astype(np.float32)
    cy = int(rng.integers(10, 22))
    cx = int(rng.integers(10, 22))
    half = int(rng.integers(6, 10))
    thick = int(rng.integers(1, 3))
    lo_y, hi_y = max(0, cy - half), min(32, cy + half + 1)
    lo_x, hi_x = max(0, cx - half), min(32, cx + half + 1)
    bright = rng.uniform(0.9, 1.0)
    img[cy - thick : cy + thick + 1, lo_x:hi_x, :] = bright
    img[lo_y:hi_y, cx - thick : cx + thick + 1, :] = bright
    return img


def synthetic_dataset(n, seed=0, split_tag="train"):
    """Balanced dataset of n images; even indices are crosses (label 1)."""
    images = np.empty((n, 32, 32, 3), dtype=np.float32)
    labels = np.empty(n, dtype=np.int8)
    for i in range(n):
        rng = np.random.default_rng((int(seed), _IMG_NS, i))
        if i % 2 == 0:
            images[i] = _cross_image(rng)
            labels[i] = 1
        else:
            images[i] = rng.uniform(0.0, 0.8, size=(32, 32, 3)).astype(np.float32)
            labels[i] = 0
    paths = tuple(f"synthetic-{split_tag}-{seed}/{i:05d}" for i in range(n))
    return Dataset(images=images, labels=labels, paths=paths, split_tag=split_tag)
