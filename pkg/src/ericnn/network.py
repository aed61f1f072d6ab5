"""The reference architecture: assembly, initialization, training, evaluation.

The stack for 32x32x3 inputs, with ReLU after every convolution and the
first dense layer:

    conv 16@2x2 -> pool
    conv 32@2x2 -> conv 32@2x2 -> pool
    conv 64@3x3 x3 -> pool
    conv 128@3x3 x3 -> pool
    flatten (2*2*128 = 512) -> dense 128 -> dense 1 -> sigmoid

Convolutions are stride 1 with size-preserving zero padding, so pooling
drives the spatial ladder 32 -> 16 -> 8 -> 4 -> 2.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import data as data_mod
from .augment import augment_image, item_rng
from .errors import NumericError, ShapeError
from .init import (SlopeInterval, alignment_sample_indices, baseline_init_layer,
                   eri_init_layer, unit_rng)
from .layers import Conv2D, Dense, Flatten, MaxPool2D, ReLU, Sigmoid
from .metrics import bce_loss, compute_metrics
from .optim import Adam
from .tensor_ops import DTYPE

_BASELINE_NS = 5

INIT_SCHEMES = ("eri", "baseline")


def standard_layers(dtype=DTYPE):
    """The fixed layer stack as (name, layer) pairs with zeroed parameters."""

    def conv(name, cin, cout, k):
        return [(name, Conv2D(cin, cout, (k, k), dtype=dtype)),
                (name.replace("conv", "relu"), ReLU())]

    stack = []
    stack += conv("conv1", 3, 16, 2) + [("pool1", MaxPool2D())]
    stack += conv("conv2", 16, 32, 2) + conv("conv3", 32, 32, 2)
    stack += [("pool2", MaxPool2D())]
    stack += conv("conv4", 32, 64, 3) + conv("conv5", 64, 64, 3)
    stack += conv("conv6", 64, 64, 3) + [("pool3", MaxPool2D())]
    stack += conv("conv7", 64, 128, 3) + conv("conv8", 128, 128, 3)
    stack += conv("conv9", 128, 128, 3) + [("pool4", MaxPool2D())]
    stack += [("flatten", Flatten()),
              ("fc1", Dense(512, 128, dtype=dtype)), ("relu_fc1", ReLU()),
              ("fc2", Dense(128, 1, dtype=dtype)), ("sigmoid", Sigmoid())]
    return stack


class Network:
    """Ordered layer stack with named parameters and attached Adam state."""

    def __init__(self, named_layers):
        self.names = [n for n, _ in named_layers]
        self.layers = [l for _, l in named_layers]
        if not isinstance(self.layers[-1], Sigmoid):
            raise ShapeError("network must end with a sigmoid output")
        self.optimizer = None

    @classmethod
    def standard(cls, dtype=DTYPE):
        return cls(standard_layers(dtype))

    def trainable(self):
        """(ordinal, name, layer) for every parameterized layer, in order."""
        out = []
        for name, layer in zip(self.names, self.layers):
            if isinstance(layer, (Conv2D, Dense)):
                out.append((len(out), name, layer))
        return out

    def forward(self, x):
        """Probability of the positive class; scalar for a single image."""
        x = np.asarray(x)
        single = x.ndim == 3
        h = x[None] if single else x
        for layer in self.layers:
            h = layer.forward(h)
        p = h[:, 0]
        return float(p[0]) if single else p

    def forward_trace(self, x):
        """(layer name, output shape) for one batched forward pass."""
        h = np.asarray(x)
        if h.ndim == 3:
            h = h[None]
        trace = []
        for name, layer in zip(self.names, self.layers):
            h = layer.forward(h)
            trace.append((name, h.shape[1:]))
        return trace

    def backward_from_logits(self, dlogits):
        """Backpropagate from the gradient w.r.t. the pre-sigmoid logits.

        The sigmoid layer is skipped because the loss gradient is already
        fused through it.  Returns (name, params, grads) triples in fixed
        forward layer order for the optimizer.
        """
        d = np.asarray(dlogits)
        if d.ndim == 1:
            d = d[:, None]
        for layer in reversed(self.layers[:-1]):
            d = layer.backward(d)
        return self.named_grads()

    def named_params(self):
        out = []
        for _, name, layer in self.trainable():
            if isinstance(layer, Conv2D):
                out.append((f"{name}.filters", layer.filters))
            else:
                out.append((f"{name}.weights", layer.weights))
            out.append((f"{name}.bias", layer.bias))
        return out

    def named_grads(self):
        out = []
        for _, name, layer in self.trainable():
            if isinstance(layer, Conv2D):
                out.append((f"{name}.filters", layer.filters, layer.dfilters))
            else:
                out.append((f"{name}.weights", layer.weights, layer.dweights))
            out.append((f"{name}.bias", layer.bias, layer.dbias))
        return out

    def param_count(self):
        return sum(int(p.size) for _, p in self.named_params())


def build_network(init="eri", interval=None, train_images=None, seed=0,
                  data_align=True, dtype=DTYPE, layers=None):
    """Assemble the standard stack and initialize every trainable layer.

    With init="eri" and data alignment on, a capped sample of training
    images is pushed through the partially built stack so each layer anchors
    its units on inputs drawn from its own input distribution.
    """
    if init not in INIT_SCHEMES:
        raise ValueError(f"unknown init scheme '{init}'; expected one of {INIT_SCHEMES}")
    net = Network(layers) if layers is not None else Network.standard(dtype)
    interval = interval or SlopeInterval()

    if init == "baseline":
        for ordinal, _, layer in net.trainable():
            baseline_init_layer(layer, np.random.default_rng(
                (int(seed), _BASELINE_NS, ordinal)))
        return net

    sample = None
    if data_align:
        if train_images is None or len(train_images) == 0:
            raise ValueError("eri init with data alignment needs training images")
        idx = alignment_sample_indices(len(train_images), seed)
        sample = np.asarray(train_images, dtype=dtype)[idx]

    ordinal = 0
    for layer in net.layers:
        if isinstance(layer, (Conv2D, Dense)):
            feed = list(sample) if sample is not None else ()
            eri_init_layer(layer, interval, feed, seed, layer_index=ordinal,
                           data_align=data_align)
            ordinal += 1
        if sample is not None:
            sample = layer.forward(sample)
    return net


@dataclass
class TrainRun:
    epochs: int
    train_loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)
    duration_s: float = 0.0

    @property
    def final_val_accuracy(self):
        return self.val_acc[-1] if self.val_acc else None

    @property
    def best_val_accuracy(self):
        return max(self.val_acc) if self.val_acc else None

    @property
    def best_val_epoch(self):
        return int(np.argmax(self.val_acc)) + 1 if self.val_acc else None


def _forward_probs(net, dataset, batch_size=256):
    probs = np.empty(len(dataset), dtype=np.float64)
    for start in range(0, len(dataset), batch_size):
        probs[start : start + batch_size] = net.forward(
            dataset.images[start : start + batch_size])
    return probs


def _loss_and_accuracy(net, dataset, batch_size=256, threshold=0.5):
    probs = _forward_probs(net, dataset, batch_size)
    loss_vec, _ = bce_loss(probs, dataset.labels)
    acc = float(np.mean((probs >= threshold) == (dataset.labels == 1)))
    return float(loss_vec.mean()), acc


def train(net, train_ds, val_ds, config, log=None):
    """Run the training protocol: augmented batches, BCE loss, Adam updates.

    config provides epochs, batch_size, lr, seed, and an augment_spec().
    Validation loss/accuracy are recorded once per epoch on the full
    validation set.  Raises NumericError with epoch/batch context if the
    loss goes non-finite.
    """
    overlap = set(train_ds.paths) & set(val_ds.paths)
    if overlap:
        raise ValueError(f"train and validation sets overlap on {len(overlap)} items")
    spec = config.augment_spec()
    if net.optimizer is None:
        net.optimizer = Adam(lr=config.lr)
    net_dtype = net.trainable()[0][2].dtype
    run = TrainRun(epochs=config.epochs)
    started = time.perf_counter()
    n = len(train_ds)
    for epoch in range(config.epochs):
        loss_sum = 0.0
        correct = 0
        for bi, batch in enumerate(data_mod.batches(train_ds, config.batch_size,
                                                    config.seed, epoch)):
            images = batch.images
            if spec.any_enabled:
                images = np.stack([
                    augment_image(img, spec, item_rng(config.seed, epoch, idx))
                    for img, idx in zip(batch.images, batch.indices)])
            probs = net.forward(images)
            loss_vec, dlogit = bce_loss(probs, batch.labels)
            if not np.isfinite(loss_vec).all():
                raise NumericError(f"non-finite loss at epoch {epoch + 1}, batch {bi}")
            loss_sum += float(loss_vec.sum())
            correct += int(np.count_nonzero((probs >= 0.5) == (batch.labels == 1)))
            grads = net.backward_from_logits(
                (dlogit / len(batch)).astype(net_dtype, copy=False))
            net.optimizer.step(grads)
        val_loss, val_acc = _loss_and_accuracy(net, val_ds, config.batch_size)
        run.train_loss.append(loss_sum / n)
        run.train_acc.append(correct / n)
        run.val_loss.append(val_loss)
        run.val_acc.append(val_acc)
        if log:
            log(f"epoch {epoch + 1}/{config.epochs}  "
                f"train_loss={run.train_loss[-1]:.4f} train_acc={run.train_acc[-1]:.4f}  "
                f"val_loss={val_loss:.4f} val_acc={val_acc:.4f}")
    run.duration_s = time.perf_counter() - started
    return run


def evaluate(net, test_ds, batch_size=256, threshold=0.5):
    """Metrics over an unaugmented dataset; never touches parameters."""
    if len(test_ds) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    probs = _forward_probs(net, test_ds, batch_size)
    return compute_metrics(probs, test_ds.labels, threshold=threshold)
