"""Seeded image augmentation for the training split.

Six transforms, applied in a fixed order with parameters drawn independently
per image: scaling (resize then center crop/pad), horizontal flip, rotation,
zoom (center magnification), intensity shift, and lighting (gamma).
Geometric transforms resample bilinearly with zero fill; every output is
clamped back to [0, 1] and keeps the 32x32x3 shape.  Identity parameters
short-circuit, so a transform drawn at its identity value is bit-exact.

Per-item randomness derives from (seed, epoch, item index), so streams are
reproducible and independent of processing order.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .data import epoch_permutation

_ITEM_NS = 1


@dataclass(frozen=True)
class AugmentSpec:
    scaling: bool = True
    horizontal_flip: bool = True
    rotation: bool = True
    zoom: bool = True
    intensity_shift: bool = True
    lighting: bool = True
    rotation_max_deg: float = 10.0
    scale_range: tuple = (0.9, 1.1)
    zoom_range: tuple = (0.9, 1.1)
    intensity_shift_range: tuple = (-0.1, 0.1)
    lighting_gamma_range: tuple = (0.8, 1.25)

    def __post_init__(self):
        if not 0.0 <= self.rotation_max_deg <= 10.0:
            raise ValueError("rotation_max_deg must lie in [0, 10]")
        for name, lo, hi, ident in (
            ("scale_range", *self.scale_range, 1.0),
            ("zoom_range", *self.zoom_range, 1.0),
            ("intensity_shift_range", *self.intensity_shift_range, 0.0),
            ("lighting_gamma_range", *self.lighting_gamma_range, 1.0),
        ):
            if not lo <= ident <= hi:
                raise ValueError(f"{name} ({lo}, {hi}) must contain {ident}")

    @classmethod
    def disabled(cls):
        return cls(scaling=False, horizontal_flip=False, rotation=False,
                   zoom=False, intensity_shift=False, lighting=False)

    @property
    def any_enabled(self):
        return any((self.scaling, self.horizontal_flip, self.rotation,
                    self.zoom, self.intensity_shift, self.lighting))


def item_rng(seed, epoch, index):
    return np.random.default_rng((int(seed), _ITEM_NS, int(epoch), int(index)))


def _affine(image, matrix, offset, output_shape=None):
    """Bilinear resample: out[o] = in[matrix @ o + offset], zero outside."""
    h, w = output_shape or image.shape[:2]
    out = np.empty((h, w, image.shape[2]), dtype=np.float32)
    for ch in range(image.shape[2]):
        out[:, :, ch] = ndimage.affine_transform(
            image[:, :, ch].astype(np.float64), matrix, offset=offset, order=1,
            mode="constant", cval=0.0, output_shape=(h, w))
    return out


def rotate(image, angle_deg):
    """Rotate about the image center; positive angles follow the grid axes."""
    if angle_deg == 0.0:
        return image
    h, w = image.shape[:2]
    center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    a = np.radians(angle_deg)
    matrix = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    return _affine(image, matrix, center - matrix @ center)


def center_zoom(image, factor):
    """Magnify (factor > 1) or shrink about the center on the fixed grid."""
    if factor == 1.0:
        return image
    h, w = image.shape[:2]
    center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    matrix = np.array([[1.0 / factor, 0.0], [0.0, 1.0 / factor]])
    return _affine(image, matrix, center - matrix @ center)


def rescale(image, factor):
    """Resize the whole image by ``factor`` then center crop or pad back."""
    h, w = image.shape[:2]
    nh, nw = max(1, round(h * factor)), max(1, round(w * factor))
    if (nh, nw) == (h, w):
        return image
    # align pixel centers of the old and new grids
    matrix = np.array([[h / nh, 0.0], [0.0, w / nw]])
    offset = np.array([0.5 * h / nh - 0.5, 0.5 * w / nw - 0.5])
    resized = _affine(image, matrix, offset, output_shape=(nh, nw))
    out = np.zeros_like(image)
    if nh >= h:
        top, left = (nh - h) // 2, (nw - w) // 2
        out[:, :, :] = resized[top : top + h, left : left + w, :]
    else:
        top, left = (h - nh) // 2, (w - nw) // 2
        out[top : top + nh, left : left + nw, :] = resized
    return out


def augment_image(image, spec, rng):
    """Apply the enabled transforms to one [0, 1] image.

    Parameter draws happen in the fixed transform order, one per enabled
    transform, so a given generator state maps to one exact output.
    """
    x = np.asarray(image, dtype=np.float32)
    if x.min() < 0.0 or x.max() > 1.0:
        raise ValueError("augment input must lie in [0, 1]")
    if spec.scaling:
        x = rescale(x, float(rng.uniform(*spec.scale_range)))
    if spec.horizontal_flip:
        if rng.random() < 0.5:
            x = x[:, ::-1, :]
    if spec.rotation:
        x = rotate(x, float(rng.uniform(-spec.rotation_max_deg, spec.rotation_max_deg)))
    if spec.zoom:
        x = center_zoom(x, float(rng.uniform(*spec.zoom_range)))
    if spec.intensity_shift:
        delta = np.float32(rng.uniform(*spec.intensity_shift_range))
        if delta != 0.0:
            x = x + delta
    if spec.lighting:
        gamma = float(rng.uniform(*spec.lighting_gamma_range))
        if gamma != 1.0:
            x = np.power(np.clip(x, 0.0, 1.0), np.float32(gamma))
    return np.clip(x, 0.0, 1.0, out=np.array(x, dtype=np.float32))


def augmented_stream(dataset, spec, seed, epoch=0):
    """One epoch of freshly augmented (image, label) pairs, shuffled.

    Only the training split may be augmented; validation and test data pass
    through evaluation untouched.
    """
    if dataset.split_tag != "train":
        raise ValueError(f"augmentation applies to the train split only, "
                         f"got '{dataset.split_tag}'")
    perm = epoch_permutation(len(dataset), seed, epoch)
    for idx in perm:
        image = dataset.images[idx]
        if spec.any_enabled:
            image = augment_image(image, spec, item_rng(seed, epoch, idx))
        yield image, dataset.labels[idx]
