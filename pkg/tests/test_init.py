import numpy as np
import pytest

import ericnn.init as init_mod
from ericnn.init import (NeuronInit, SlopeInterval, baseline_init_layer,
                         draw_unit, eri_init_layer, rotate_normal,
                         sample_slope_angle, unit_rng, weights_from_normal)
from ericnn.layers import Conv2D, Dense


class ForcedRng:
    """Stand-in generator producing a fixed draw sequence."""

    def __init__(self, alpha=45.0, normal=(3.0, 4.0), c=0, sign=0.9, index=0):
        self._alpha = alpha
        self._normal = np.asarray(normal, dtype=np.float64)
        self._ints = [c, index, 0, 0]  # c bit, then sample/patch indices

    def uniform(self, lo, hi, size=None):
        if size is None:
            return self._alpha
        return self._normal.copy()

    def random(self):
        return 0.9  # keep the drawn angle positive

    def integers(self, lo, hi=None):
        return self._ints.pop(0)


def test_interval_validation():
    SlopeInterval(0.0)
    SlopeInterval(89.9)
    with pytest.raises(ValueError):
        SlopeInterval(90.0)
    with pytest.raises(ValueError):
        SlopeInterval(-1.0)


def test_slope_angle_membership_degenerate_interval():
    interval = SlopeInterval(0.0)
    rng = np.random.default_rng(0)
    draws = np.array([sample_slope_angle(interval, rng) for _ in range(2000)])
    assert (np.abs(draws) > 0.0).all()
    assert (np.abs(draws) < 90.0).all()


def test_slope_angle_membership_10000_draws():
    interval = SlopeInterval(30.0)
    rng = np.random.default_rng(1)
    draws = np.array([sample_slope_angle(interval, rng) for _ in range(10000)])
    assert (np.abs(draws) > 30.0).all()
    assert (np.abs(draws) < 90.0).all()


def test_slope_angle_sign_balance():
    rng = np.random.default_rng(2)
    draws = np.array([sample_slope_angle(SlopeInterval(30.0), rng)
                      for _ in range(10000)])
    frac_negative = np.mean(draws < 0)
    assert 0.47 <= frac_negative <= 0.53


def test_rotate_normal_reference_values():
    normal, w0, c = rotate_normal(2, 45.0, ForcedRng(c=0))
    np.testing.assert_array_equal(normal, [3.0, 4.0])
    assert c == 0
    assert np.isclose(w0, 5.0, rtol=1e-12)

    _, w0_flipped, c = rotate_normal(2, 45.0, ForcedRng(c=1))
    assert c == 1
    assert np.isclose(w0_flipped, -5.0, rtol=1e-12)

    _, w0_60, _ = rotate_normal(1, 60.0, ForcedRng(normal=(1.0,), c=0))
    assert np.isclose(w0_60, 1.0 / np.sqrt(3.0), rtol=1e-12)


def test_weights_from_normal_reference_values():
    np.testing.assert_allclose(weights_from_normal([3.0, 4.0], 5.0),
                               [-2.4, -3.2], rtol=1e-12)


def test_weights_from_normal_zero_w0_is_singular():
    with pytest.raises(ZeroDivisionError):
        weights_from_normal([1.0, 2.0], 0.0)


def test_weights_scale_invariance():
    normal = np.array([0.3, -0.7, 0.2])
    w0 = 1.7
    lam = 3.9
    np.testing.assert_allclose(weights_from_normal(normal, w0),
                               weights_from_normal(lam * normal, lam * w0),
                               rtol=1e-12)


def test_draw_unit_identities():
    interval = SlopeInterval(30.0)
    for u in range(200):
        unit = draw_unit(12, interval, unit_rng(123, 0, u))
        norm = np.linalg.norm(unit.normal)
        tan_a = np.tan(np.radians(unit.alpha_deg))
        # offset construction: w0 * tan(alpha) * (-1)^c == ||normal||
        assert abs(unit.w0 * tan_a * (-1.0) ** unit.c - norm) / norm < 1e-9
        # weight construction: w_j * w0 == -4 * normal_j
        np.testing.assert_allclose(unit.weights * unit.w0, -4.0 * unit.normal,
                                   rtol=1e-9)
        assert interval.contains(unit.alpha_deg)
        assert np.isfinite(unit.weights).all()


def test_eri_dense_layer_seed_pinned_chain(monkeypatch):
    # force the geometric draws and check the end-to-end composition
    monkeypatch.setattr(init_mod, "unit_rng", lambda *a: ForcedRng(index=0))
    layer = Dense(2, 1)
    sample = [np.array([0.5, 0.25], dtype=np.float32)]
    units = eri_init_layer(layer, SlopeInterval(30.0), sample, seed=0)
    np.testing.assert_allclose(layer.weights[:, 0], [-2.4, -3.2], rtol=1e-6)
    w = layer.weights[:, 0]
    expected_bias = -np.dot(w, sample[0])
    assert layer.bias[0] == expected_bias
    assert units[0].c == 0 and np.isclose(units[0].alpha_deg, 45.0)


def test_alignment_zero_sample_gives_zero_bias():
    layer = Dense(4, 3)
    sample = [np.zeros(4, dtype=np.float32)]
    eri_init_layer(layer, SlopeInterval(30.0), sample, seed=5)
    np.testing.assert_array_equal(layer.bias, np.zeros(3))


def test_alignment_response_is_exactly_zero():
    rng = np.random.default_rng(3)
    layer = Dense(16, 8)
    sample = [rng.random(16).astype(np.float32) for _ in range(5)]
    units = eri_init_layer(layer, SlopeInterval(30.0), sample, seed=9)
    for o, unit in enumerate(units):
        w = np.ascontiguousarray(layer.weights[:, o])
        response = np.dot(w, unit.anchor) + layer.bias[o]
        assert response == 0.0


def test_alignment_response_zero_for_conv_patches():
    rng = np.random.default_rng(4)
    layer = Conv2D(3, 16, kernel=(2, 2))
    sample = [rng.random((8, 8, 3)).astype(np.float32) for _ in range(4)]
    units = eri_init_layer(layer, SlopeInterval(30.0), sample, seed=11)
    for o, unit in enumerate(units):
        w = np.ascontiguousarray(layer.filters[:, :, :, o].reshape(-1))
        response = np.dot(w, unit.anchor) + layer.bias[o]
        assert response == 0.0


def test_conv_units_distinct_finite_and_flattened_in_order():
    rng = np.random.default_rng(5)
    layer = Conv2D(3, 16, kernel=(2, 2))
    sample = [rng.random((32, 32, 3)).astype(np.float32)]
    units = eri_init_layer(layer, SlopeInterval(30.0), sample, seed=21)
    assert len(units) == 16
    assert len({u.alpha_deg for u in units}) == 16  # independent draws
    assert np.isfinite(layer.filters).all()
    for o, unit in enumerate(units):
        np.testing.assert_array_equal(
            layer.filters[:, :, :, o].reshape(-1),
            unit.weights.astype(layer.dtype))


def test_eri_requires_sample_when_aligning():
    with pytest.raises(ValueError):
        eri_init_layer(Dense(2, 1), SlopeInterval(30.0), [], seed=0)
    # without alignment an empty sample is fine and biases stay zero
    layer = Dense(2, 3)
    eri_init_layer(layer, SlopeInterval(30.0), (), seed=0, data_align=False)
    np.testing.assert_array_equal(layer.bias, np.zeros(3))


def test_unit_streams_are_schedule_independent():
    interval = SlopeInterval(30.0)
    a = draw_unit(6, interval, unit_rng(7, 2, 4))
    b = draw_unit(6, interval, unit_rng(7, 2, 4))
    assert a.alpha_deg == b.alpha_deg
    np.testing.assert_array_equal(a.weights, b.weights)
    other = draw_unit(6, interval, unit_rng(7, 2, 5))
    assert other.alpha_deg != a.alpha_deg


def test_positive_homogeneity_of_construction():
    unit = draw_unit(5, SlopeInterval(30.0), unit_rng(13, 0, 0))
    lam = 2.5
    scaled = weights_from_normal(lam * unit.normal, lam * unit.w0)
    np.testing.assert_allclose(scaled, unit.weights, rtol=1e-12)


def test_baseline_init_bounds_and_determinism():
    layer = Conv2D(1, 8, kernel=(2, 2))  # fan-in 4 -> bound 0.5
    baseline_init_layer(layer, np.random.default_rng(17))
    assert np.abs(layer.filters).max() <= 0.5
    assert not layer.bias.any()
    again = Conv2D(1, 8, kernel=(2, 2))
    baseline_init_layer(again, np.random.default_rng(17))
    np.testing.assert_array_equal(layer.filters, again.filters)
