"""Forward and backward passes for the layer types the network uses.

Every layer accepts either a single example or a batch (leading batch axis)
and returns the matching rank.  Trainable layers cache their forward input
and store parameter gradients on themselves after ``backward``; ``backward``
returns the gradient with respect to the layer input.

Convolution is cross-correlation (no filter flip).  "same" padding is zero
padding with pad_before = (k - 1) // 2 per axis, so even kernels pad one
extra pixel on the bottom/right and stride-1 output keeps the input size.
"""

import numpy as np

from .errors import ShapeError, StateError
from .tensor_ops import DTYPE, col2im_add, matmul, window_view


def _as_batch(x, rank):
    """Promote a single example to a batch of one; report whether it was single."""
    x = np.asarray(x)
    if x.ndim == rank:
        return x[None], True
    if x.ndim == rank + 1:
        return x, False
    raise ShapeError(f"expected rank {rank} or {rank + 1} input, got shape {x.shape}")


def same_padding(kernel):
    """(before, after) zero padding that preserves size at stride 1."""
    total = kernel - 1
    before = total // 2
    return before, total - before


class Conv2D:
    """2-D cross-correlation over channels-last images.

    filters: (kh, kw, in_channels, out_channels); bias: (out_channels,).
    """

    def __init__(self, in_channels, out_channels, kernel=(3, 3), stride=1,
                 padding="same", dtype=DTYPE):
        kh, kw = kernel
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = (kh, kw)
        self.stride = stride
        if padding == "same":
            if stride != 1:
                raise ShapeError("'same' padding is defined for stride 1 only")
            self.pads = (same_padding(kh), same_padding(kw))
        else:
            self.pads = ((padding, padding), (padding, padding))
        self.dtype = np.dtype(dtype)
        self.filters = np.zeros((kh, kw, in_channels, out_channels), dtype=dtype)
        self.bias = np.zeros(out_channels, dtype=dtype)
        self.dfilters = None
        self.dbias = None
        self._cache = None

    @property
    def fan_in(self):
        kh, kw = self.kernel
        return kh * kw * self.in_channels

    def forward(self, x):
        x, single = _as_batch(x, 3)
        if x.shape[3] != self.in_channels:
            raise ShapeError(
                f"expected {self.in_channels} input channels, got {x.shape[3]}"
            )
        x = np.ascontiguousarray(x, dtype=self.dtype)
        (pt, pb), (pl, pr) = self.pads
        xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0))) if pt or pb or pl or pr else x
        kh, kw = self.kernel
        cols = window_view(xp, kh, kw, self.stride)
        b, oh, ow = cols.shape[:3]
        cols2 = cols.reshape(b * oh * ow, kh * kw * self.in_channels)
        y = matmul(cols2, self.filters.reshape(-1, self.out_channels)) + self.bias
        self._cache = (cols2, xp.shape, (b, oh, ow), single)
        y = y.reshape(b, oh, ow, self.out_channels)
        return y[0] if single else y

    def backward(self, dy):
        if self._cache is None:
            raise StateError("conv backward called before forward")
        cols2, padded_shape, (b, oh, ow), single = self._cache
        dy, dy_single = _as_batch(dy, 3)
        if dy_single != single or dy.shape != (b, oh, ow, self.out_channels):
            raise ShapeError(f"gradient shape {dy.shape} does not match forward output")
        dy = np.ascontiguousarray(dy, dtype=self.dtype)
        dyr = dy.reshape(b * oh * ow, self.out_channels)
        kh, kw = self.kernel
        self.dfilters = matmul(cols2.T, dyr).reshape(self.filters.shape)
        self.dbias = dyr.sum(axis=0)
        dcols = matmul(dyr, self.filters.reshape(-1, self.out_channels).T)
        dcols = dcols.reshape(b, oh, ow, kh, kw, self.in_channels)
        dxp = col2im_add(dcols, padded_shape, kh, kw, self.stride)
        (pt, pb), (pl, pr) = self.pads
        h, w = padded_shape[1] - pt - pb, padded_shape[2] - pl - pr
        dx = dxp[:, pt : pt + h, pl : pl + w, :]
        return dx[0] if single else dx


class MaxPool2D:
    """Non-overlapping max pooling; window (2, 2), stride = window.

    Ties route to the first element in row-major window order.  Odd trailing
    rows/columns are dropped (floor division of the spatial size).
    """

    def __init__(self, window=(2, 2)):
        self.window = window
        self._cache = None

    def forward(self, x):
        x, single = _as_batch(x, 3)
        wh, ww = self.window
        b, h, w, c = x.shape
        if h < wh or w < ww:
            raise ShapeError(f"pool window {self.window} larger than input {(h, w)}")
        oh, ow = h // wh, w // ww
        xc = x[:, : oh * wh, : ow * ww, :]
        tiles = xc.reshape(b, oh, wh, ow, ww, c).transpose(0, 1, 3, 2, 4, 5)
        tiles = tiles.reshape(b, oh, ow, wh * ww, c)
        idx = tiles.argmax(axis=3)  # first max wins ties
        out = np.take_along_axis(tiles, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
        self._cache = (idx, x.shape, single)
        return out[0] if single else out

    def backward(self, dy):
        if self._cache is None:
            raise StateError("pool backward called before forward")
        idx, in_shape, single = self._cache
        dy, dy_single = _as_batch(dy, 3)
        b, oh, ow, c = idx.shape
        if dy_single != single or dy.shape != idx.shape:
            raise ShapeError(f"gradient shape {dy.shape} does not match forward output")
        wh, ww = self.window
        buf = np.zeros((b, oh, ow, wh * ww, c), dtype=dy.dtype)
        np.put_along_axis(buf, idx[:, :, :, None, :], dy[:, :, :, None, :], axis=3)
        dx = np.zeros(in_shape, dtype=dy.dtype)
        tiles = buf.reshape(b, oh, ow, wh, ww, c).transpose(0, 1, 3, 2, 4, 5)
        dx[:, : oh * wh, : ow * ww, :] = tiles.reshape(b, oh * wh, ow * ww, c)
        return dx[0] if single else dx


class Dense:
    """Fully connected layer: y = x W + b with W of shape (in, out)."""

    def __init__(self, in_dim, out_dim, dtype=DTYPE):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.dtype = np.dtype(dtype)
        self.weights = np.zeros((in_dim, out_dim), dtype=dtype)
        self.bias = np.zeros(out_dim, dtype=dtype)
        self.dweights = None
        self.dbias = None
        self._cache = None

    @property
    def fan_in(self):
        return self.in_dim

    def forward(self, x):
        x, single = _as_batch(x, 1)
        if x.shape[1] != self.in_dim:
            raise ShapeError(f"expected input width {self.in_dim}, got {x.shape[1]}")
        x = np.ascontiguousarray(x, dtype=self.dtype)
        y = matmul(x, self.weights) + self.bias
        self._cache = (x, single)
        return y[0] if single else y

    def backward(self, dy):
        if self._cache is None:
            raise StateError("dense backward called before forward")
        x, single = self._cache
        dy, dy_single = _as_batch(dy, 1)
        if dy_single != single or dy.shape != (x.shape[0], self.out_dim):
            raise ShapeError(f"gradient shape {dy.shape} does not match forward output")
        dy = np.ascontiguousarray(dy, dtype=self.dtype)
        self.dweights = matmul(x.T, dy)
        self.dbias = dy.sum(axis=0)
        dx = matmul(dy, self.weights.T)
        return dx[0] if single else dx


class ReLU:
    """max(0, x); the derivative at exactly 0 is taken to be 0."""

    def __init__(self):
        self._mask = None

    def forward(self, x):
        x = np.asarray(x)
        self._mask = x > 0
        return np.where(self._mask, x, x.dtype.type(0))

    def backward(self, dy):
        if self._mask is None:
            raise StateError("relu backward called before forward")
        if np.shape(dy) != self._mask.shape:
            raise ShapeError("gradient shape does not match forward output")
        return np.where(self._mask, dy, np.asarray(dy).dtype.type(0))


class Sigmoid:
    """Logistic function, computed branch-wise so large |x| cannot overflow."""

    def __init__(self):
        self._out = None

    def forward(self, x):
        x = np.asarray(x)
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        self._out = out
        return out

    def backward(self, dy):
        if self._out is None:
            raise StateError("sigmoid backward called before forward")
        if np.shape(dy) != self._out.shape:
            raise ShapeError("gradient shape does not match forward output")
        return dy * self._out * (1.0 - self._out)


class Flatten:
    """Collapse (h, w, c) to a vector in row-major (h, w, c) order."""

    def __init__(self):
        self._shape = None

    def forward(self, x):
        x, single = _as_batch(x, 3)
        self._shape = (x.shape, single)
        out = x.reshape(x.shape[0], -1)
        return out[0] if single else out

    def backward(self, dy):
        if self._shape is None:
            raise StateError("flatten backward called before forward")
        shape, single = self._shape
        dy = np.asarray(dy)
        if single:
            dy = dy[None]
        return dy.reshape(shape)[0] if single else dy.reshape(shape)
