"""Full-batch training loop: Adam, label-smoothed cross entropy, early stopping.

One run is fully determined by (dataset, trick config, train config, seed).
All randomness flows from disjoint substreams of Rng(seed): 0 init, 1 graph
drops, 2 feature dropout.  Per-epoch streams are derived from the epoch
number, so run histories are reproducible bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .config import TrainConfig, TrickConfig
from .dropping import build_drop_plan
from .errors import ConfigError, DivergenceError
from .model import ModelParams, build_model, model_forward, wrap_params
from .rng import Rng
from .tensor import GradTape, Tensor, backward

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def ce_loss_smoothed(logits: Tensor, labels: np.ndarray, n_classes: int,
                     smoothing: float = 0.0) -> Tensor:
    """Mean cross entropy against (1-eps) one-hot + eps/C targets."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1 or labels.shape[0] != logits.shape[0]:
        raise ConfigError(f"labels shape {labels.shape} does not match {logits.shape[0]} rows")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ConfigError(f"label outside [0, {n_classes})")
    q = np.full((labels.shape[0], n_classes), smoothing / n_classes)
    q[np.arange(labels.shape[0]), labels] += 1.0 - smoothing
    lp = T.log_softmax_rows(logits)
    return T.scale(T.sum_all(T.mul(lp, Tensor(q))), -1.0 / labels.shape[0])


def accuracy(logits: np.ndarray, labels: np.ndarray) -> float:
    return float((logits.argmax(axis=1) == labels).mean())


class AdamState:
    """First/second moment buffers plus the shared step counter."""

    def __init__(self, params: ModelParams):
        self.m = {k: np.zeros_like(params.array(k)) for k in params.names()}
        self.v = {k: np.zeros_like(params.array(k)) for k in params.names()}
        self.t = 0


def adam_step(params: ModelParams, grads: dict, state: AdamState, cfg: TrainConfig):
    """One coupled-L2 Adam update in place.

    The decay term wd * theta is added to the gradient before the moment
    updates.  Parameters in the output group use weight_decay_out when set.
    """
    state.t += 1
    t = state.t
    bc1 = 1.0 - ADAM_BETA1 ** t
    bc2 = 1.0 - ADAM_BETA2 ** t
    for name in params.names():
        theta = params.array(name)
        wd = cfg.weight_decay
        if cfg.weight_decay_out is not None and params.group(name) == "output":
            wd = cfg.weight_decay_out
        g = grads.get(name)
        g = (np.zeros_like(theta) if g is None else g) + wd * theta
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        theta -= cfg.lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)


@dataclass
class RunResult:
    seed: int
    test_acc: float
    best_val_acc: float
    best_epoch: int
    epochs_run: int
    train_loss: list = field(default_factory=list)  # per epoch
    val_acc: list = field(default_factory=list)     # per epoch
    epoch_ms: list = field(default_factory=list)    # per epoch wall time

    @property
    def mean_epoch_ms(self) -> float:
        return float(np.mean(self.epoch_ms)) if self.epoch_ms else 0.0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "test_acc": self.test_acc,
            "best_val_acc": self.best_val_acc,
            "best_epoch": self.best_epoch,
            "epochs_run": self.epochs_run,
            "mean_epoch_ms": self.mean_epoch_ms,
            "train_loss": [float(x) for x in self.train_loss],
            "val_acc": [float(x) for x in self.val_acc],
        }


def train_run(dataset, trick: TrickConfig, train_cfg: TrainConfig, seed: int) -> RunResult:
    """Train once and report test accuracy at the best-validation snapshot.

    Early stopping: patience counts epochs since the last strict validation
    accuracy improvement.  The snapshot also moves on accuracy ties that
    lower the validation loss, so the reported epoch is the tie-broken best.
    """
    trick.validate()
    train_cfg.validate()
    rng = Rng(seed)
    rng_init = rng.substream(0)
    rng_drop = rng.substream(1)
    rng_feat = rng.substream(2)

    x = Tensor(dataset.features)
    graph = dataset.graph
    graph.normalized()  # build the eval operator cache up front
    train_idx = dataset.splits["train"]
    val_idx = dataset.splits["val"]
    test_idx = dataset.splits["test"]
    labels = dataset.labels
    n_classes = dataset.num_classes

    params = build_model(trick, dataset.features.shape[1], n_classes, rng_init)
    state = AdamState(params)

    result = RunResult(seed=seed, test_acc=0.0, best_val_acc=-1.0, best_epoch=0, epochs_run=0)
    best_val_loss = np.inf
    best_snap = params.snapshot()
    since_improvement = 0

    for epoch in range(1, train_cfg.max_epochs + 1):
        t0 = time.perf_counter()
        tape = GradTape()
        tensors = wrap_params(params, tape)
        plan = build_drop_plan(trick.drop, graph, trick.depth,
                               rng_drop.substream(epoch), training=True)
        logits = model_forward(trick, tensors, x, plan,
                               rng_feat=rng_feat.substream(epoch), training=True)
        loss = ce_loss_smoothed(T.take_rows(logits, train_idx), labels[train_idx],
                                n_classes, train_cfg.label_smoothing)
        loss_val = float(loss.data[0, 0])
        if not np.isfinite(loss_val):
            raise DivergenceError(
                f"non-finite training loss at epoch {epoch} (seed {seed}): {loss_val}")
        backward(loss)
        grads = {name: tensors[name].grad for name in params.names()}
        adam_step(params, grads, state, train_cfg)

        eval_tensors = wrap_params(params, None)
        eval_plan = build_drop_plan(trick.drop, graph, trick.depth, None, training=False)
        eval_logits = model_forward(trick, eval_tensors, x, eval_plan, training=False).data
        val_acc = accuracy(eval_logits[val_idx], labels[val_idx])
        val_loss = float(ce_loss_smoothed(Tensor(eval_logits[val_idx]),
                                          labels[val_idx], n_classes, 0.0).data[0, 0])

        result.train_loss.append(loss_val)
        result.val_acc.append(val_acc)
        result.epoch_ms.append((time.perf_counter() - t0) * 1000.0)
        result.epochs_run = epoch

        if val_acc > result.best_val_acc:
            result.best_val_acc = val_acc
            result.best_epoch = epoch
            best_val_loss = val_loss
            best_snap = params.snapshot()
            since_improvement = 0
        else:
            if val_acc == result.best_val_acc and val_loss < best_val_loss:
                result.best_epoch = epoch
                best_val_loss = val_loss
                best_snap = params.snapshot()
            since_improvement += 1
            if since_improvement >= train_cfg.patience:
                break

    params.restore(best_snap)
    final_tensors = wrap_params(params, None)
    final_plan = build_drop_plan(trick.drop, graph, trick.depth, None, training=False)
    final_logits = model_forward(trick, final_tensors, x, final_plan, training=False).data
    result.test_acc = accuracy(final_logits[test_idx], labels[test_idx])
    return result


def aggregate_runs(results: list) -> dict:
    """Mean and sample standard deviation of test accuracy over runs."""
    if len(results) < 1:
        raise ConfigError("aggregate_runs needs at least one run")
    accs = np.array([r.test_acc for r in results])
    std = float(accs.std(ddof=1)) if len(results) > 1 else 0.0
    return {"mean_test_acc": float(accs.mean()), "std_test_acc": std, "n": len(results)}
