"""Slope-angle random weight initialization ("eri") plus a uniform baseline.

Each unit (convolution filter or dense neuron) is initialized geometrically
rather than by drawing weights directly:

1. draw a slope angle alpha uniformly from (-90, -alpha_min) u (alpha_min, 90)
   degrees; the tangent of alpha sets how steep the unit's activation is
   along its direction,
2. draw the components of a normal vector i.i.d. from U(-1, 1) and derive the
   offset component w0 = (-1)^c * ||normal|| / tan(alpha) with a fair sign
   bit c, which amounts to rotating the unit's separating hyperplane at
   random,
3. convert to weights via w_j = -4 * normal_j / w0.

The weight formula is scale-free in the normal vector, so the U(-1, 1)
component distribution only fixes the rotation, not the magnitude.

With data alignment enabled, each unit's bias is set to the negated inner
product of its weights with a randomly chosen fan-in-shaped patch of real
input, so the unit's hyperplane passes exactly through that data point and
the initial weights land where the input distribution lives.

All randomness flows through per-unit generators derived from
(seed, layer_index, unit_index), so initialization results do not depend on
the order units are processed in.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .layers import Conv2D, Dense
from .tensor_ops import assert_finite

# namespace tags keeping the derived generator streams disjoint
_UNIT_NS = 2
_SAMPLE_NS = 3

# resample guards: tan(alpha) -> inf collapses w0, a zero normal has no direction
_MAX_TAN = 1e8
_MIN_NORM = 1e-12
_MAX_RESAMPLE = 1000


@dataclass(frozen=True)
class SlopeInterval:
    """Admissible slope angles: (-90, -alpha_min) u (alpha_min, 90) degrees."""

    alpha_min_deg: float = 30.0

    def __post_init__(self):
        if not 0.0 <= self.alpha_min_deg < 90.0:
            raise ValueError(
                f"alpha_min must lie in [0, 90) degrees, got {self.alpha_min_deg}"
            )

    def contains(self, alpha_deg):
        return self.alpha_min_deg < abs(alpha_deg) < 90.0


@dataclass
class NeuronInit:
    """Per-unit record of the geometric construction and resulting weights."""

    alpha_deg: float
    normal: np.ndarray
    w0: float
    c: int
    weights: np.ndarray
    bias: float = 0.0
    anchor: np.ndarray | None = None  # data patch the hyperplane passes through


def unit_rng(seed, layer_index, unit_index):
    """Generator for one unit, independent of processing order."""
    return np.random.default_rng((int(seed), _UNIT_NS, int(layer_index), int(unit_index)))


def sample_slope_angle(interval, rng):
    """Uniform draw from the slope-angle interval.

    Draws the magnitude from U(alpha_min, 90) and negates it with
    probability 1/2.  The result never equals +-alpha_min or +-90.
    """
    alpha = rng.uniform(interval.alpha_min_deg, 90.0)
    while alpha <= interval.alpha_min_deg:  # boundary draw, measure zero
        alpha = rng.uniform(interval.alpha_min_deg, 90.0)
    if rng.random() < 0.5:
        alpha = -alpha
    return alpha


def rotate_normal(n_dims, alpha_deg, rng):
    """Random hyperplane orientation for a unit with ``n_dims`` inputs.

    Returns (normal, w0, c): components i.i.d. U(-1, 1) (resampled if the
    vector is numerically zero), a fair sign bit c, and the offset component
    w0 = (-1)^c * ||normal|| / tan(alpha).
    """
    if n_dims < 1:
        raise ShapeError(f"unit fan-in must be >= 1, got {n_dims}")
    for _ in range(_MAX_RESAMPLE):
        normal = rng.uniform(-1.0, 1.0, size=n_dims)
        norm = float(np.sqrt(np.dot(normal, normal)))
        if norm >= _MIN_NORM:
            break
    else:
        raise RuntimeError("could not draw a non-degenerate normal vector")
    c = int(rng.integers(0, 2))
    w0 = (-1.0) ** c * norm / np.tan(np.radians(alpha_deg))
    return normal, float(w0), c


def weights_from_normal(normal, w0):
    """Weights w_j = -4 * normal_j / w0; w0 must be nonzero."""
    if w0 == 0.0:
        raise ZeroDivisionError("w0 is zero (slope angle at +-90 degrees); resample")
    return -4.0 * np.asarray(normal, dtype=np.float64) / w0


def draw_unit(n_dims, interval, rng):
    """One unit's full geometric draw, resampling degenerate angles."""
    for _ in range(_MAX_RESAMPLE):
        alpha = sample_slope_angle(interval, rng)
        if abs(np.tan(np.radians(alpha))) > _MAX_TAN:
            continue
        normal, w0, c = rotate_normal(n_dims, alpha, rng)
        if w0 == 0.0 or not np.isfinite(w0):
            continue
        weights = weights_from_normal(normal, w0)
        if np.isfinite(weights).all():
            return NeuronInit(alpha, normal, w0, c, weights)
    raise RuntimeError("could not draw a finite unit initialization")


def _unit_weights(unit, dtype):
    return unit.weights.astype(dtype)


def _aligned_bias(stored_weights, patch):
    """Bias putting the unit's response at the patch to exactly zero.

    Negates a dot product taken over the weights as stored in the layer, so
    re-measuring the response through the layer's own parameters cancels
    bitwise: dot(w, patch) + bias == 0.0 exactly.
    """
    return -np.dot(np.ascontiguousarray(stored_weights), patch)


def eri_init_layer(layer, interval, data_sample, seed, layer_index=0, data_align=True):
    """Initialize one trainable layer unit by unit.

    data_sample holds inputs *to this layer*: (h, w, in_channels) maps for a
    convolution, flat vectors for a dense layer.  Each unit anchors its bias
    on a patch drawn uniformly from a uniformly chosen sample; with
    data_align=False all biases are zero and data_sample may be empty.

    Returns the list of per-unit NeuronInit records in unit order.
    """
    if data_align and not data_sample:
        raise ValueError("data alignment requires a nonempty data sample")
    units = []
    if isinstance(layer, Conv2D):
        kh, kw = layer.kernel
        fan_in = layer.fan_in
        for o in range(layer.out_channels):
            rng = unit_rng(seed, layer_index, o)
            unit = draw_unit(fan_in, interval, rng)
            w = _unit_weights(unit, layer.dtype)
            layer.filters[:, :, :, o] = w.reshape(kh, kw, layer.in_channels)
            if data_align:
                src = np.asarray(data_sample[int(rng.integers(len(data_sample)))],
                                 dtype=layer.dtype)
                if src.shape[0] < kh or src.shape[1] < kw:
                    raise ShapeError(f"sample {src.shape} smaller than kernel {(kh, kw)}")
                top = int(rng.integers(src.shape[0] - kh + 1))
                left = int(rng.integers(src.shape[1] - kw + 1))
                patch = src[top : top + kh, left : left + kw, :].reshape(-1)
                unit.anchor = patch
                unit.bias = float(_aligned_bias(w, patch))
            layer.bias[o] = unit.bias
            units.append(unit)
    elif isinstance(layer, Dense):
        fan_in = layer.fan_in
        for o in range(layer.out_dim):
            rng = unit_rng(seed, layer_index, o)
            unit = draw_unit(fan_in, interval, rng)
            w = _unit_weights(unit, layer.dtype)
            layer.weights[:, o] = w
            if data_align:
                vec = np.asarray(data_sample[int(rng.integers(len(data_sample)))],
                                 dtype=layer.dtype).reshape(-1)
                if vec.shape[0] != fan_in:
                    raise ShapeError(f"sample width {vec.shape[0]} != fan-in {fan_in}")
                unit.anchor = vec
                unit.bias = float(_aligned_bias(w, vec))
            layer.bias[o] = unit.bias
            units.append(unit)
    else:
        raise TypeError(f"cannot initialize layer of type {type(layer).__name__}")
    assert_finite(layer.filters if isinstance(layer, Conv2D) else layer.weights,
                  "initialized weights")
    assert_finite(layer.bias, "initialized bias")
    return units


def baseline_init_layer(layer, rng):
    """Uniform U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights with zero bias."""
    if isinstance(layer, Conv2D):
        bound = 1.0 / np.sqrt(layer.fan_in)
        layer.filters[...] = rng.uniform(-bound, bound, size=layer.filters.shape)
        layer.bias[...] = 0.0
    elif isinstance(layer, Dense):
        bound = 1.0 / np.sqrt(layer.fan_in)
        layer.weights[...] = rng.uniform(-bound, bound, size=layer.weights.shape)
        layer.bias[...] = 0.0
    else:
        raise TypeError(f"cannot initialize layer of type {type(layer).__name__}")


def alignment_sample_indices(n_items, seed, cap=64):
    """Uniform subset of training items used to feed data alignment."""
    rng = np.random.default_rng((int(seed), _SAMPLE_NS))
    k = min(cap, n_items)
    return np.sort(rng.choice(n_items, size=k, replace=False))
