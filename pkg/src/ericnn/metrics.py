"""Binary cross-entropy loss and the evaluation report.

The positive class is "cactus" (label 1); the decision threshold is 0.5.
Ratios with a zero denominator are reported as 0 and listed in
``MetricsReport.undefined`` rather than raising.
"""

from dataclasses import dataclass

import numpy as np

_CLAMP = 1e-7


def bce_loss(p, y):
    """Per-sample binary cross-entropy and its gradient w.r.t. the logit.

    p is the sigmoid output; it is clamped to [1e-7, 1 - 1e-7] (in float64)
    before the logs so saturated predictions keep the loss finite.  The
    gradient uses the fused sigmoid + cross-entropy form p - y.
    """
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pc = np.clip(p, _CLAMP, 1.0 - _CLAMP)
    loss = -(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))
    return loss, p - y


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    mean_loss: float
    confusion: ConfusionMatrix
    undefined: tuple = ()

    def per_class(self, positive_name="cactus", negative_name="no_cactus"):
        """Precision/recall/f1 with each class in turn treated as positive."""
        cm = self.confusion
        return {
            positive_name: _prf(cm.tp, cm.fp, cm.fn),
            negative_name: _prf(cm.tn, cm.fn, cm.fp),
        }


def _ratio(num, den):
    return (num / den, False) if den > 0 else (0.0, True)


def _prf(tp, fp, fn):
    precision, _ = _ratio(tp, tp + fp)
    recall, _ = _ratio(tp, tp + fn)
    f1, _ = _ratio(2.0 * precision * recall, precision + recall)
    return {"precision": precision, "recall": recall, "f1": f1}


def compute_metrics(predictions, labels, threshold=0.5):
    """Threshold predictions and tally the confusion matrix and derived scores.

    predictions: probabilities in [0, 1]; labels: bits.  A sample counts as
    positive when its probability is >= threshold.
    """
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1).astype(np.int64)
    if p.size == 0:
        raise ValueError("cannot compute metrics on an empty prediction set")
    if p.size != y.size:
        raise ValueError(f"{p.size} predictions vs {y.size} labels")
    pred = p >= threshold
    pos = y == 1
    tp = int(np.count_nonzero(pred & pos))
    fp = int(np.count_nonzero(pred & ~pos))
    fn = int(np.count_nonzero(~pred & pos))
    tn = int(np.count_nonzero(~pred & ~pos))
    cm = ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)

    undefined = []
    accuracy = (tp + tn) / cm.total
    precision, bad = _ratio(tp, tp + fp)
    if bad:
        undefined.append("precision")
    recall, bad = _ratio(tp, tp + fn)
    if bad:
        undefined.append("recall")
    f1, bad = _ratio(2.0 * precision * recall, precision + recall)
    if bad:
        undefined.append("f1")
    loss, _ = bce_loss(p, y)
    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        mean_loss=float(loss.mean()),
        confusion=cm,
        undefined=tuple(undefined),
    )
