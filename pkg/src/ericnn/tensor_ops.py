"""Dense array kernels the layers are built on.

Images, feature maps, weights, and gradients are all plain numpy arrays in
row-major layout.  Images use channels-last (height, width, channels) order.
Training runs in float32; finite-difference checks use float64.
"""

import numpy as np

from .errors import NumericError, ShapeError

DTYPE = np.float32
CHECK_DTYPE = np.float64


def assert_finite(arr, what="array"):
    """Raise NumericError if any element is NaN or infinite."""
    if not np.isfinite(arr).all():
        raise NumericError(f"non-finite values in {what}")
    return arr


def matmul(a, b):
    """Product of two rank-2 arrays.

    Uses a single fixed reduction order, so results are bit-reproducible
    from run to run on the same machine.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs rank-2 operands, got {a.ndim} and {b.ndim}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dims disagree: {a.shape} x {b.shape}")
    return assert_finite(a @ b, "matmul result")


def conv_output_size(size, kernel, stride, pad_total):
    """Spatial output extent; raises if the window grid does not tile evenly."""
    span = size + pad_total - kernel
    if span < 0:
        raise ShapeError(f"kernel {kernel} larger than padded input {size + pad_total}")
    if span % stride != 0:
        raise ShapeError(
            f"non-integral output size: ({size} + {pad_total} - {kernel}) / {stride}"
        )
    return span // stride + 1


def window_view(x, kh, kw, stride=1):
    """All (kh, kw) windows of a padded batch.

    x: (b, h, w, c), already padded.  Returns a contiguous
    (b, out_h, out_w, kh, kw, c) array.
    """
    v = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    v = v[:, ::stride, ::stride]  # (b, oh, ow, c, kh, kw)
    return np.ascontiguousarray(v.transpose(0, 1, 2, 4, 5, 3))


def im2col(image, kernel, stride=1, padding=0):
    """Rearrange image patches into matrix rows.

    image: (h, w, c).  Returns (out_h * out_w, kh * kw * c) with one row per
    output location scanned row-major and columns ordered (kernel row,
    kernel column, channel), matching how filters are flattened.
    """
    x = np.asarray(image)
    if x.ndim != 3:
        raise ShapeError(f"im2col expects (h, w, c) input, got shape {x.shape}")
    kh, kw = kernel
    if stride < 1:
        raise ShapeError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ShapeError(f"padding must be >= 0, got {padding}")
    h, w, c = x.shape
    out_h = conv_output_size(h, kh, stride, 2 * padding)
    out_w = conv_output_size(w, kw, stride, 2 * padding)
    if padding:
        x = np.pad(x, ((padding, padding), (padding, padding), (0, 0)))
    cols = window_view(x[None], kh, kw, stride)
    return cols.reshape(out_h * out_w, kh * kw * c)


def col2im_add(dcols, shape, kh, kw, stride=1):
    """Scatter-add column gradients back onto a padded batch.

    dcols: (b, out_h, out_w, kh, kw, c); shape: padded (b, h, w, c) target.
    Fixed (kernel row, kernel column) accumulation order keeps the result
    deterministic.
    """
    b, oh, ow = dcols.shape[:3]
    out = np.zeros(shape, dtype=dcols.dtype)
    for i in range(kh):
        for j in range(kw):
            out[:, i : i + oh * stride : stride, j : j + ow * stride : stride, :] += (
                dcols[:, :, :, i, j, :]
            )
    return out
