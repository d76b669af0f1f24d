"""Training loop: Adam, softmax cross-entropy, per-epoch logging.

Batch order is drawn from a generator seeded by the config, so a rerun with
the same config, model seed, and data reproduces the exact same parameter
trajectory.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .model import RcnnModel


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 8
    epochs: int = 20
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be at least 1")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta coefficients must lie in [0, 1)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


class Adam:
    """Standard Adam with bias correction, one state pair per parameter."""

    def __init__(self, params, learning_rate=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.learning_rate = learning_rate
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(p.grad)
            p.data -= self.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    n, k = logits.shape
    if labels.shape != (n,):
        raise ValueError("labels must be a vector matching the batch")
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in [0, {k})")
    probs = softmax(logits)
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())
    grad = probs
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    loss: float
    train_acc: float
    test_acc: float


def write_training_log(logs, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "train_acc", "test_acc"])
        for row in logs:
            writer.writerow([row.epoch, repr(row.loss), repr(row.train_acc),
                             repr(row.test_acc)])


def recordings_to_arrays(recordings, dtype=np.float64) -> tuple[np.ndarray, np.ndarray]:
    """Stack recording magnitudes into a (N, 1, T, S) batch plus labels."""
    if not recordings:
        raise ValueError("no recordings to stack")
    frames = np.stack([rec.magnitudes for rec in recordings]).astype(dtype)
    labels = np.array([rec.label for rec in recordings], dtype=np.int64)
    return frames[:, None, :, :], labels


def _accuracy(model: RcnnModel, frames: np.ndarray, labels: np.ndarray) -> float:
    return float((model.predict(frames) == labels).mean())


def train(model: RcnnModel, split, cfg: TrainConfig) -> list[EpochLog]:
    """Fit the model on split.train, tracking accuracy on split.test."""
    x_train, y_train = recordings_to_arrays(split.train, model.dtype)
    x_test, y_test = recordings_to_arrays(split.test, model.dtype)
    for labels in (y_train, y_test):
        if labels.max() >= model.class_count:
            raise ValueError(
                f"label {labels.max()} out of range for {model.class_count} classes"
            )
    optimizer = Adam(model.parameters(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    rng = np.random.default_rng(cfg.seed)
    n = x_train.shape[0]
    logs: list[EpochLog] = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            logits = model.forward(x_train[batch], training=True)
            loss, grad = cross_entropy(logits, y_train[batch])
            model.backward(grad)
            optimizer.step()
            loss_sum += loss * batch.size
        logs.append(EpochLog(
            epoch=epoch,
            loss=loss_sum / n,
            train_acc=_accuracy(model, x_train, y_train),
            test_acc=_accuracy(model, x_test, y_test),
        ))
    return logs
