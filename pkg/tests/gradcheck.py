"""Central finite-difference helpers for gradient tests (float64 only)."""

import numpy as np


def central_diff(f, x, eps=1e-5):
    """Numerical gradient of scalar f at x, perturbing one entry at a time."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f(x)
        flat[i] = orig - eps
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * eps)
    return grad


def assert_close(analytic, numeric, rtol, atol=1e-7, what="gradient"):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    err = np.abs(analytic - numeric)
    bound = atol + rtol * np.maximum(np.abs(analytic), np.abs(numeric))
    worst = np.unravel_index(np.argmax(err - bound), err.shape)
    assert (err <= bound).all(), (
        f"{what} mismatch at {worst}: analytic {analytic[worst]!r} vs "
        f"numeric {numeric[worst]!r}"
    )
