import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))


def write_image_tree(dataset, root, positive_dir="cactus", negative_dir="no_cactus"):
    """Materialize an in-memory dataset as a class-folder PNG tree."""
    root = Path(root)
    for name in (positive_dir, negative_dir):
        (root / name).mkdir(parents=True, exist_ok=True)
    for i in range(len(dataset)):
        folder = positive_dir if dataset.labels[i] == 1 else negative_dir
        arr = (np.clip(dataset.images[i], 0, 1) * 255).round().astype(np.uint8)
        Image.fromarray(arr).save(root / folder / f"img_{i:05d}.png")
    return root


@pytest.fixture
def image_tree(tmp_path):
    def _build(dataset, name="data"):
        return write_image_tree(dataset, tmp_path / name)

    return _build
