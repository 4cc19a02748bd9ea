"""Dense ReLU multilayer perceptron with hand-written backpropagation.

Parameters live in one flat vector. For every consecutive pair of layer sizes
``(fan_in, fan_out)`` the vector holds the weight matrix ``W`` (shape
``fan_in x fan_out``, row-major) followed by the bias ``b`` (``fan_out``).
Hidden layers use ReLU with derivative 0 at 0; the output layer emits logits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NonFiniteError


@dataclass(frozen=True)
class MlpArchitecture:
    layer_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError(f"an MLP needs >= 2 positive layer sizes, got {self.layer_sizes}")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]


IRIS_ARCH = MlpArchitecture((4, 4, 4, 3))
MNIST_ARCH = MlpArchitecture((784, 20, 20, 10))


@dataclass(frozen=True)
class Batch:
    """Rows of features with integer class labels."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.labels.ndim != 1 or self.inputs.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"inconsistent batch shapes: inputs {self.inputs.shape}, labels {self.labels.shape}"
            )

    def __len__(self) -> int:
        return self.labels.shape[0]


def mlp_param_count(arch: MlpArchitecture) -> int:
    s = arch.layer_sizes
    return sum(a * b + b for a, b in zip(s[:-1], s[1:]))


def mlp_init(arch: MlpArchitecture, scale: float, seed: int) -> np.ndarray:
    """I.i.d. uniform(-scale, scale) entries for weights and biases alike."""
    if scale < 0:
        raise ValueError(f"init scale must be >= 0, got {scale}")
    rng = np.random.default_rng(seed)
    return rng.uniform(-scale, scale, size=mlp_param_count(arch))


def unflatten(arch: MlpArchitecture, theta: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Views ``[(W, b), ...]`` into ``theta`` (no copies)."""
    n = mlp_param_count(arch)
    if theta.shape != (n,):
        raise ValueError(f"parameter vector has shape {theta.shape}, architecture needs ({n},)")
    layers = []
    offset = 0
    s = arch.layer_sizes
    for fan_in, fan_out in zip(s[:-1], s[1:]):
        W = theta[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = theta[offset : offset + fan_out]
        offset += fan_out
        layers.append((W, b))
    return layers


def forward(arch: MlpArchitecture, theta: np.ndarray, inputs: np.ndarray):
    """Return (logits, pre-activations of hidden layers, layer inputs)."""
    layers = unflatten(arch, theta)
    acts = [inputs]
    pre = []
    h = inputs
    for i, (W, b) in enumerate(layers):
        z = h @ W + b
        if i < len(layers) - 1:
            pre.append(z)
            h = np.maximum(z, 0.0)
            acts.append(h)
        else:
            h = z
    return h, pre, acts


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss(arch: MlpArchitecture, theta: np.ndarray, batch: Batch) -> float:
    logits, _, _ = forward(arch, theta, batch.inputs)
    logp = _log_softmax(logits)
    value = float(-logp[np.arange(len(batch)), batch.labels].mean())
    if not np.isfinite(value):
        raise NonFiniteError("cross-entropy loss is not finite")
    return value


def loss_and_grad(arch: MlpArchitecture, theta: np.ndarray, batch: Batch) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over the batch and its exact gradient."""
    logits, pre, acts = forward(arch, theta, batch.inputs)
    if not np.all(np.isfinite(logits)):
        raise NonFiniteError("network activations are not finite")
    m = len(batch)
    rows = np.arange(m)
    logp = _log_softmax(logits)
    value = float(-logp[rows, batch.labels].mean())

    delta = np.exp(logp)
    delta[rows, batch.labels] -= 1.0
    delta /= m

    grad = np.empty_like(theta)
    grads = unflatten(arch, grad)
    layers = unflatten(arch, theta)
    for i in range(len(layers) - 1, -1, -1):
        gW, gb = grads[i]
        gW[...] = acts[i].T @ delta
        gb[...] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ layers[i][0].T) * (pre[i - 1] > 0)
    return value, grad


def predict(arch: MlpArchitecture, theta: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximal index, i.e. ties go to the lowest class
    logits, _, _ = forward(arch, theta, inputs)
    return np.argmax(logits, axis=1)


def accuracy(arch: MlpArchitecture, theta: np.ndarray, view: Batch) -> float:
    if len(view) == 0:
        raise ValueError("accuracy of an empty dataset is undefined")
    return float(np.mean(predict(arch, theta, view.inputs) == view.labels))
