import numpy as np
import pytest

from ericnn.errors import ShapeError, StateError
from ericnn.layers import Conv2D, Dense, Flatten, MaxPool2D, ReLU, Sigmoid
from gradcheck import assert_close, central_diff

from test_tensor_ops import direct_conv

F64 = np.float64


def test_conv_unit_filter_passes_channel_through():
    layer = Conv2D(1, 1, kernel=(1, 1), dtype=F64)
    layer.filters[0, 0, 0, 0] = 1.0
    x = np.random.default_rng(0).random((4, 4, 1))
    np.testing.assert_array_equal(layer.forward(x), x)


def test_conv_zero_filters_give_constant_bias():
    layer = Conv2D(3, 2, kernel=(2, 2), dtype=F64)
    layer.bias[:] = [1.5, -2.0]
    out = layer.forward(np.random.default_rng(1).random((5, 5, 3)))
    np.testing.assert_array_equal(out[..., 0], np.full((5, 5), 1.5))
    np.testing.assert_array_equal(out[..., 1], np.full((5, 5), -2.0))


def test_conv_ones_against_direct_oracle():
    # 3x3 ones, 2x2 ones filter, same padding: full windows sum to 4,
    # bottom/right windows lose padded zeros
    layer = Conv2D(1, 1, kernel=(2, 2), dtype=F64)
    layer.filters[...] = 1.0
    x = np.ones((3, 3, 1))
    out = layer.forward(x)
    assert out.shape == (3, 3, 1)
    assert out[0, 0, 0] == 4.0
    assert out[2, 2, 0] == 1.0
    assert out[0, 2, 0] == 2.0
    # oracle comparison with the same asymmetric zero padding
    xp = np.pad(x, ((0, 1), (0, 1), (0, 0)))
    want = direct_conv(xp, layer.filters.astype(float), layer.bias.astype(float), 0)
    np.testing.assert_allclose(out, want, rtol=1e-6)


def test_conv_same_padding_preserves_reference_shapes():
    for cin, cout, k, size in ((3, 16, 2, 32), (16, 32, 2, 16), (32, 64, 3, 8),
                               (64, 128, 3, 4)):
        layer = Conv2D(cin, cout, kernel=(k, k))
        out = layer.forward(np.zeros((size, size, cin), dtype=np.float32))
        assert out.shape == (size, size, cout)


def test_conv_channel_mismatch():
    with pytest.raises(ShapeError):
        Conv2D(3, 4, kernel=(2, 2)).forward(np.zeros((8, 8, 2), dtype=np.float32))


def test_conv_backward_zero_gradient():
    layer = Conv2D(2, 3, kernel=(2, 2), dtype=F64)
    layer.filters[...] = np.random.default_rng(2).random(layer.filters.shape)
    out = layer.forward(np.random.default_rng(3).random((4, 4, 2)))
    dx = layer.backward(np.zeros_like(out))
    assert not dx.any()
    assert not layer.dfilters.any()
    assert not layer.dbias.any()


def test_conv_backward_identity_filter_routes_gradient():
    layer = Conv2D(1, 1, kernel=(1, 1), dtype=F64)
    layer.filters[0, 0, 0, 0] = 1.0
    layer.forward(np.random.default_rng(4).random((3, 3, 1)))
    g = np.random.default_rng(5).random((3, 3, 1))
    np.testing.assert_array_equal(layer.backward(g), g)


def test_conv_backward_before_forward():
    with pytest.raises(StateError):
        Conv2D(1, 1, kernel=(2, 2)).backward(np.zeros((3, 3, 1)))


@pytest.mark.parametrize("kernel", [(2, 2), (3, 3)])
def test_conv_gradients_match_finite_differences(kernel):
    rng = np.random.default_rng(11)
    layer = Conv2D(2, 3, kernel=kernel, dtype=F64)
    layer.filters[...] = rng.standard_normal(layer.filters.shape) * 0.5
    layer.bias[...] = rng.standard_normal(3) * 0.1
    x = rng.standard_normal((5, 4, 2))
    proj = rng.standard_normal((5, 4, 3))  # random linear functional of the output

    def loss_of_input(xv):
        return float(np.sum(layer.forward(xv) * proj))

    def loss_of_filters(fv):
        layer.filters[...] = fv
        return float(np.sum(layer.forward(x) * proj))

    def loss_of_bias(bv):
        layer.bias[...] = bv
        return float(np.sum(layer.forward(x) * proj))

    layer.forward(x)
    dx = layer.backward(proj)
    assert_close(dx, central_diff(loss_of_input, x), rtol=1e-4, what="conv dx")
    assert_close(layer.dfilters, central_diff(loss_of_filters, layer.filters.copy()),
                 rtol=1e-4, what="conv dfilters")
    assert_close(layer.dbias, central_diff(loss_of_bias, layer.bias.copy()),
                 rtol=1e-4, what="conv dbias")


def test_maxpool_enumerated_windows():
    x = np.arange(1.0, 17.0).reshape(4, 4, 1)
    out = MaxPool2D().forward(x)
    np.testing.assert_array_equal(out[..., 0], [[6.0, 8.0], [14.0, 16.0]])


def test_maxpool_constant_input_preserved():
    out = MaxPool2D().forward(np.full((4, 4, 2), 3.25))
    np.testing.assert_array_equal(out, np.full((2, 2, 2), 3.25))


def test_maxpool_tie_routes_to_first_position():
    layer = MaxPool2D()
    layer.forward(np.ones((2, 2, 1)))
    dx = layer.backward(np.ones((1, 1, 1)))
    np.testing.assert_array_equal(dx[..., 0], [[1.0, 0.0], [0.0, 0.0]])


def test_maxpool_window_larger_than_input():
    with pytest.raises(ShapeError):
        MaxPool2D().forward(np.zeros((1, 1, 1)))


def test_maxpool_backward_zero():
    layer = MaxPool2D()
    layer.forward(np.random.default_rng(6).random((4, 4, 3)))
    assert not layer.backward(np.zeros((2, 2, 3))).any()


def test_maxpool_backward_hits_argmax_positions():
    layer = MaxPool2D()
    x = np.arange(1.0, 17.0).reshape(4, 4, 1)
    layer.forward(x)
    dx = layer.backward(np.ones((2, 2, 1)))
    expected = np.zeros((4, 4))
    for v in (6, 8, 14, 16):
        pos = np.argwhere(x[..., 0] == v)[0]
        expected[pos[0], pos[1]] = 1.0
    np.testing.assert_array_equal(dx[..., 0], expected)


def test_maxpool_gradient_matches_finite_differences():
    # shuffled, well-separated values so no window ever ties
    rng = np.random.default_rng(8)
    x = rng.permutation(np.linspace(-2.0, 2.0, 32)).reshape(4, 4, 2)
    layer = MaxPool2D()
    proj = rng.standard_normal((2, 2, 2))

    def loss(xv):
        return float(np.sum(layer.forward(xv) * proj))

    layer.forward(x)
    dx = layer.backward(proj)
    assert_close(dx, central_diff(loss, x), rtol=1e-4, what="maxpool dx")


def test_dense_identity_and_constant():
    layer = Dense(3, 3, dtype=F64)
    layer.weights[...] = np.eye(3)
    x = np.array([1.0, -2.0, 0.5])
    np.testing.assert_array_equal(layer.forward(x), x)
    layer.weights[...] = 0.0
    layer.bias[...] = [4.0, 5.0, 6.0]
    np.testing.assert_array_equal(layer.forward(x), [4.0, 5.0, 6.0])


def test_dense_matches_matmul_oracle():
    rng = np.random.default_rng(9)
    layer = Dense(6, 4, dtype=F64)
    layer.weights[...] = rng.standard_normal((6, 4))
    layer.bias[...] = rng.standard_normal(4)
    x = rng.standard_normal((3, 6))
    want = x @ layer.weights + layer.bias
    np.testing.assert_allclose(layer.forward(x), want, rtol=1e-12)


def test_dense_backward_is_outer_product():
    layer = Dense(3, 3, dtype=F64)
    layer.weights[...] = np.eye(3)
    e1 = np.array([1.0, 0.0, 0.0])
    layer.forward(e1)
    layer.backward(e1)
    expected = np.zeros((3, 3))
    expected[0, 0] = 1.0
    np.testing.assert_array_equal(layer.dweights, expected)
    np.testing.assert_array_equal(layer.dbias, e1)


def test_dense_backward_zero():
    layer = Dense(4, 2, dtype=F64)
    layer.forward(np.ones(4))
    dx = layer.backward(np.zeros(2))
    assert not dx.any() and not layer.dweights.any() and not layer.dbias.any()


def test_dense_state_error_before_forward():
    with pytest.raises(StateError):
        Dense(2, 2).backward(np.zeros(2))


def test_dense_gradients_match_finite_differences():
    rng = np.random.default_rng(10)
    layer = Dense(5, 3, dtype=F64)
    layer.weights[...] = rng.standard_normal((5, 3))
    layer.bias[...] = rng.standard_normal(3)
    x = rng.standard_normal(5)
    proj = rng.standard_normal(3)

    def loss_of_input(xv):
        return float(np.dot(layer.forward(xv), proj))

    def loss_of_weights(wv):
        layer.weights[...] = wv
        return float(np.dot(layer.forward(x), proj))

    layer.forward(x)
    dx = layer.backward(proj)
    assert_close(dx, central_diff(loss_of_input, x), rtol=1e-4, what="dense dx")
    assert_close(layer.dweights, central_diff(loss_of_weights, layer.weights.copy()),
                 rtol=1e-4, what="dense dweights")


def test_relu_values_and_zero_derivative():
    layer = ReLU()
    np.testing.assert_array_equal(layer.forward(np.array([-1.0, 0.0, 2.0])),
                                  [0.0, 0.0, 2.0])
    # derivative at exactly 0 is defined as 0
    np.testing.assert_array_equal(layer.backward(np.ones(3)), [0.0, 0.0, 1.0])


def test_relu_positive_input_is_identity():
    layer = ReLU()
    x = np.random.default_rng(12).random((3, 3)) + 0.5
    np.testing.assert_array_equal(layer.forward(x), x)
    g = np.random.default_rng(13).random((3, 3))
    np.testing.assert_array_equal(layer.backward(g), g)


def test_relu_gradient_away_from_kink():
    rng = np.random.default_rng(14)
    x = rng.standard_normal(20)
    x += np.sign(x) * 0.1  # keep every entry away from 0
    layer = ReLU()
    proj = rng.standard_normal(20)

    def loss(xv):
        return float(np.dot(layer.forward(xv), proj))

    layer.forward(x)
    dx = layer.backward(proj)
    assert_close(dx, central_diff(loss, x), rtol=1e-4, what="relu dx")


def test_sigmoid_midpoint_and_symmetry():
    layer = Sigmoid()
    assert layer.forward(np.array([0.0]))[0] == 0.5
    x = np.linspace(-6, 6, 25)
    np.testing.assert_allclose(Sigmoid().forward(-x),
                               1.0 - Sigmoid().forward(x), atol=1e-12)


def test_sigmoid_derivative_at_zero():
    layer = Sigmoid()

    def f(xv):
        return float(Sigmoid().forward(xv)[0])

    num = central_diff(f, np.array([0.0]))[0]
    layer.forward(np.array([0.0]))
    ana = layer.backward(np.array([1.0]))[0]
    assert abs(num - 0.25) < 1e-6
    assert abs(ana - 0.25) < 1e-12


def test_sigmoid_stable_at_extremes():
    out = Sigmoid().forward(np.array([500.0, -500.0]))
    assert np.isfinite(out).all()
    assert out[0] == 1.0
    assert 0.0 <= out[1] < 1e-200


def test_flatten_round_trip_row_major():
    layer = Flatten()
    x = np.arange(24.0).reshape(2, 3, 4)
    flat = layer.forward(x)
    np.testing.assert_array_equal(flat, x.reshape(-1))
    np.testing.assert_array_equal(layer.backward(flat), x)


def test_batched_and_single_forward_agree():
    rng = np.random.default_rng(15)
    layer = Conv2D(2, 3, kernel=(2, 2), dtype=F64)
    layer.filters[...] = rng.standard_normal(layer.filters.shape)
    batch = rng.random((4, 6, 6, 2))
    out = layer.forward(batch)
    for i in range(4):
        np.testing.assert_allclose(layer.forward(batch[i]), out[i], rtol=1e-12)
