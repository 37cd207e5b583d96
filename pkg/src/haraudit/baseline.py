"""Reference window classifier: statistical features + softmax regression.

A deliberately small, fully deterministic stand-in for the deep models whose
prediction logs the audit normally ingests. Features are per-channel mean
and standard deviation; the classifier is multinomial logistic regression
fit by full-batch gradient descent on the mean cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrainConfig:
    step_size: float = 0.1
    epochs: int = 200
    #: Recorded for provenance; training is deterministic (zero init,
    #: full-batch updates), so the seed does not influence the fit.
    seed: int = 0


@dataclass
class BaselineModel:
    weights: np.ndarray  # [num_classes, num_features]
    bias: np.ndarray  # [num_classes]
    config: TrainConfig

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]


def extract_features(block: np.ndarray) -> np.ndarray:
    """Per-channel mean and std of one [size, channels] window, concatenated
    in channel order: [mean_0, std_0, mean_1, std_1, ...]."""
    block = np.asarray(block, dtype=float)
    if block.ndim != 2:
        raise ValueError("window block must be [size, channels]")
    feats = np.empty(2 * block.shape[1])
    feats[0::2] = block.mean(axis=0)
    feats[1::2] = block.std(axis=0)
    return feats


def extract_feature_matrix(blocks: np.ndarray) -> np.ndarray:
    """Vectorized extract_features over [num_windows, size, channels]."""
    blocks = np.asarray(blocks, dtype=float)
    if blocks.ndim != 3:
        raise ValueError("blocks must be [num_windows, size, channels]")
    feats = np.empty((blocks.shape[0], 2 * blocks.shape[2]))
    feats[:, 0::2] = blocks.mean(axis=1)
    feats[:, 1::2] = blocks.std(axis=1)
    return feats


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def loss_and_gradients(
    weights: np.ndarray, bias: np.ndarray, features: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy plus its analytic gradients wrt weights and bias."""
    n = features.shape[0]
    probs = _softmax(features @ weights.T + bias)
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), labels] = 1.0
    loss = -float(np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))
    delta = (probs - onehot) / n
    return loss, delta.T @ features, delta.sum(axis=0)


def train_baseline(
    features: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    config: TrainConfig = TrainConfig(),
) -> BaselineModel:
    """Fit softmax regression from zero-initialized parameters.

    Every class in 0..num_classes-1 must appear in the training labels.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if features.ndim != 2 or features.shape[0] != labels.size:
        raise ValueError("features must be [n, f] aligned with labels")
    present = set(int(c) for c in np.unique(labels))
    missing = sorted(set(range(num_classes)) - present)
    if missing:
        raise ValueError(f"classes {missing} absent from the training split")
    weights = np.zeros((num_classes, features.shape[1]))
    bias = np.zeros(num_classes)
    for _ in range(config.epochs):
        _, grad_w, grad_b = loss_and_gradients(weights, bias, features, labels)
        weights -= config.step_size * grad_w
        bias -= config.step_size * grad_b
    return BaselineModel(weights=weights, bias=bias, config=config)


def predict_proba(model: BaselineModel, features: np.ndarray) -> np.ndarray:
    """Class probabilities [n, num_classes]; each row sums to 1."""
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        features = features[None, :]
    return _softmax(features @ model.weights.T + model.bias)
