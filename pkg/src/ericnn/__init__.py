"""Small from-scratch CNN with slope-angle random weight initialization.

Library surface: dense layer kernels, the geometric initializer, Adam,
seeded augmentation, dataset handling, and the reference network with its
training and evaluation loops.  The ``ericnn`` console script exposes the
train / eval / ablate / init-stats / augment-preview workflows.
"""

from .augment import AugmentSpec, augment_image, augmented_stream
from .config import RunConfig, load_config
from .data import Batch, Dataset, batches, load_dataset, split_train_val
from .init import (NeuronInit, SlopeInterval, baseline_init_layer, draw_unit,
                   eri_init_layer, rotate_normal, sample_slope_angle,
                   weights_from_normal)
from .layers import Conv2D, Dense, Flatten, MaxPool2D, ReLU, Sigmoid
from .metrics import ConfusionMatrix, MetricsReport, bce_loss, compute_metrics
from .network import Network, TrainRun, build_network, evaluate, train
from .optim import Adam, AdamState, adam_step
from .synthetic import synthetic_dataset
from .tensor_ops import im2col, matmul
from .weights_io import load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "Adam", "AdamState", "AugmentSpec", "Batch", "ConfusionMatrix", "Conv2D",
    "Dataset", "Dense", "Flatten", "MaxPool2D", "MetricsReport", "Network",
    "NeuronInit", "ReLU", "RunConfig", "Sigmoid", "SlopeInterval", "TrainRun",
    "adam_step", "augment_image", "augmented_stream", "baseline_init_layer",
    "batches", "bce_loss", "build_network", "compute_metrics", "draw_unit",
    "eri_init_layer", "evaluate", "im2col", "load_config", "load_dataset",
    "load_weights", "matmul", "rotate_normal", "sample_slope_angle",
    "save_weights", "split_train_val", "synthetic_dataset", "train",
    "weights_from_normal", "__version__",
]
