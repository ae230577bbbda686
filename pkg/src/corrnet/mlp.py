"""Feed-forward network written directly on numpy.

Layers compute ``z = a_prev @ W (+ b)`` with ``W`` of shape ``(K_prev, K)``;
hidden layers apply SELU, the output layer tanh (targets in [-1, 1]) or
sigmoid (targets in [0, 1]).  Gradients are hand-derived reverse mode and are
checked against central differences by :func:`grad_check`.
"""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._binio import open_reader, pack_array, pack_header, write_atomic
from .corr import nodes_from_pairs
from .errors import ParameterError, ShapeError, ShapeMismatchError, TrainingDivergence
from .seeding import rng

log = logging.getLogger(__name__)

SELU_SCALE = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772

ACTIVATIONS = ("selu", "tanh", "sigmoid", "linear")

NN_MAGIC = b"CNNN"
NN_VERSION = 1


def selu(z):
    z = np.asarray(z, dtype=np.float64)
    return SELU_SCALE * np.where(z > 0, z, SELU_ALPHA * np.expm1(np.minimum(z, 0.0)))


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "selu":
        return selu(z)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    return z


def _activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """d a / d z, using the cached output ``a`` where that is cheaper."""
    if name == "selu":
        return np.where(z > 0, SELU_SCALE, a + SELU_SCALE * SELU_ALPHA)
    if name == "tanh":
        return 1.0 - a * a
    if name == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


@dataclass
class MlpModel:
    layer_dims: tuple[int, ...]
    weights: list[np.ndarray] = field(repr=False)
    biases: list[np.ndarray] | None = field(repr=False)
    hidden_activation: str = "selu"
    output_activation: str = "tanh"

    @property
    def use_bias(self) -> bool:
        return self.biases is not None

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def activation(self, layer: int) -> str:
        return self.output_activation if layer == len(self.weights) - 1 else self.hidden_activation

    def params(self) -> list[np.ndarray]:
        """Parameter arrays in storage order: W0, b0, W1, b1, ..."""
        out = []
        for k, w in enumerate(self.weights):
            out.append(w)
            if self.biases is not None:
                out.append(self.biases[k])
        return out

    def parameter_count(self) -> int:
        return sum(p.size for p in self.params())

    def copy(self) -> MlpModel:
        return copy.deepcopy(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MlpModel):
            return NotImplemented
        if (self.layer_dims, self.hidden_activation, self.output_activation, self.use_bias) != (
                other.layer_dims, other.hidden_activation, other.output_activation, other.use_bias):
            return False
        return all(a.tobytes() == b.tobytes() for a, b in zip(self.params(), other.params()))


def parameter_count(layer_dims, use_bias: bool = True) -> int:
    dims = list(layer_dims)
    total = sum(a * b for a, b in zip(dims[:-1], dims[1:]))
    return total + (sum(dims[1:]) if use_bias else 0)


def init_model(layer_dims, hidden_activation: str = "selu", output_activation: str = "tanh",
               init_seed: int = 0, use_bias: bool = True) -> MlpModel:
    """Gaussian weights with variance ``1 / fan_in``; zero biases."""
    dims = tuple(int(d) for d in layer_dims)
    if len(dims) < 2:
        raise ParameterError("need at least an input and an output layer")
    if min(dims) < 1:
        raise ParameterError(f"zero-sized layer in {dims}")
    for act in (hidden_activation, output_activation):
        if act not in ACTIVATIONS:
            raise ParameterError(f"unknown activation {act!r}")
    weights = []
    for k, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        weights.append(rng(init_seed, "init-weights", k).normal(0.0, 1.0 / np.sqrt(fan_in), (fan_in, fan_out)))
    biases = [np.zeros(d) for d in dims[1:]] if use_bias else None
    return MlpModel(dims, weights, biases, hidden_activation, output_activation)


@dataclass
class ForwardPass:
    pre: list[np.ndarray]    # z per layer
    acts: list[np.ndarray]   # a per layer, acts[0] is the input

    @property
    def output(self) -> np.ndarray:
        return self.acts[-1]


def forward(model: MlpModel, x) -> ForwardPass:
    """Propagate one input vector or a ``(B, input_dim)`` batch."""
    a = np.asarray(x, dtype=np.float64)
    if a.shape[-1] != model.input_dim or a.ndim > 2:
        raise ShapeError(f"input has shape {a.shape}, model expects (..., {model.input_dim})")
    if not np.isfinite(a).all():
        raise ParameterError("non-finite input")
    pre, acts = [], [a]
    for k, w in enumerate(model.weights):
        z = a @ w
        if model.biases is not None:
            z = z + model.biases[k]
        a = _activate(model.activation(k), z)
        pre.append(z)
        acts.append(a)
    return ForwardPass(pre, acts)


def backward(model: MlpModel, fp: ForwardPass, grad_out: np.ndarray) -> list[np.ndarray]:
    """Gradients of a scalar objective, given d(objective)/d(output).

    Returned in the same order as :meth:`MlpModel.params`.
    """
    g = np.asarray(grad_out, dtype=np.float64)
    grads: list[np.ndarray] = []
    for k in range(len(model.weights) - 1, -1, -1):
        delta = g * _activation_grad(model.activation(k), fp.pre[k], fp.acts[k + 1])
        a_prev = fp.acts[k]
        if a_prev.ndim == 1:
            gw = np.outer(a_prev, delta)
            gb = delta
        else:
            gw = a_prev.T @ delta
            gb = delta.sum(axis=0)
        if model.biases is not None:
            grads.append(gb)
        grads.append(gw)
        if k:
            g = delta @ model.weights[k].T
    grads.reverse()
    return grads


def loss(pred, target) -> float:
    """Mean squared difference over the ``m`` output entries."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"length mismatch: {p.shape} vs {t.shape}")
    return float(np.mean((p - t) ** 2))


def loss_grad(pred, target) -> np.ndarray:
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"length mismatch: {p.shape} vs {t.shape}")
    return 2.0 * (p - t) / p.size


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list, repr=False)
    second_moment: list[np.ndarray] = field(default_factory=list, repr=False)

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """One bias-corrected Adam update, applied in place to ``params``."""
        if not self.first_moment:
            self.first_moment = [np.zeros_like(p) for p in params]
            self.second_moment = [np.zeros_like(p) for p in params]
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1 ** t
        c2 = 1.0 - self.beta2 ** t
        for p, g, m, v in zip(params, grads, self.first_moment, self.second_moment):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.epsilon)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    lr: float = 1e-3
    shuffle_seed: int = 0
    init_seed: int = 0
    loss_log_period: int = 10

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ParameterError("epochs and batch_size must be >= 1")


def _xy(data):
    """Accept a Dataset or an ``(inputs, targets)`` pair of aligned arrays."""
    if hasattr(data, "inputs") and hasattr(data, "target_rows"):
        return data.inputs, data.targets, data.window_source
    x, y = data
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] != y.shape[0]:
        raise ShapeError("inputs and targets differ in length")
    return x, y, np.arange(x.shape[0])


def train(model: MlpModel, data, config: TrainConfig) -> tuple[MlpModel, list[float]]:
    """Mini-batch Adam on the mean squared error.

    Returns a trained copy of ``model`` and the per-epoch mean training loss.
    """
    x, targets, row = _xy(data)
    if x.shape[1] != model.input_dim or targets.shape[1] != model.output_dim:
        raise ShapeError(
            f"dataset dims ({x.shape[1]} -> {targets.shape[1]}) do not match "
            f"model ({model.input_dim} -> {model.output_dim})"
        )
    model = model.copy()
    params = model.params()
    opt = AdamState(lr=config.lr)
    n = x.shape[0]
    history: list[float] = []
    for epoch in range(config.epochs):
        perm = rng(config.shuffle_seed, "shuffle", epoch).permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, config.batch_size)):
            idx = perm[start:start + config.batch_size]
            yb = targets[row[idx]]
            fp = forward(model, x[idx])
            resid = fp.output - yb
            per_example = np.mean(resid * resid, axis=1)
            batch_loss = float(per_example.mean())
            if not np.isfinite(batch_loss):
                raise TrainingDivergence(epoch, b)
            grads = backward(model, fp, 2.0 * resid / resid.size)
            opt.step(params, grads)
            total += float(per_example.sum())
        history.append(total / n)
        if config.loss_log_period and (epoch + 1) % config.loss_log_period == 0:
            log.info("epoch %d/%d loss %.6g", epoch + 1, config.epochs, history[-1])
    return model, history


def predict(model: MlpModel, window_flat) -> np.ndarray:
    """Predicted correlation vector(s) for one flat window or a batch."""
    nodes_from_pairs(model.output_dim)
    return forward(model, window_flat).output


def dataset_loss(model: MlpModel, data, batch_size: int = 1024) -> float:
    x, targets, row = _xy(data)
    total = 0.0
    for start in range(0, x.shape[0], batch_size):
        sl = slice(start, start + batch_size)
        out = forward(model, x[sl]).output
        total += float(np.mean((out - targets[row[sl]]) ** 2, axis=1).sum())
    return total / x.shape[0]


def _objective(model: MlpModel, x, target) -> float:
    return loss(forward(model, x).output, target)


def grad_check(model: MlpModel, x, target, h: float = 1e-5) -> float:
    """Largest relative gap between analytic and central-difference partials.

    The relative error of one partial is ``|a - n| / max(|a| + |n|, 1e-12)``.
    Intended for small models; every parameter is perturbed.
    """
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    fp = forward(model, x)
    analytic = backward(model, fp, loss_grad(fp.output, target))
    worst = 0.0
    for p, g in zip(model.params(), analytic):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = _objective(model, x, target)
            flat[i] = orig - h
            down = _objective(model, x, target)
            flat[i] = orig
            num = (up - down) / (2.0 * h)
            err = abs(gflat[i] - num) / max(abs(gflat[i]) + abs(num), 1e-12)
            worst = max(worst, err)
    return worst


_ACT_CODES = {name: k for k, name in enumerate(ACTIVATIONS)}


def save_model(model: MlpModel, path: str | Path) -> None:
    dims = list(model.layer_dims)
    header = [len(dims), *dims, _ACT_CODES[model.hidden_activation],
              _ACT_CODES[model.output_activation], int(model.use_bias)]
    body = b"".join(pack_array(p, "<f8") for p in model.params())
    write_atomic(path, pack_header(NN_MAGIC, NN_VERSION, header) + body)


def load_model(path: str | Path, expected_dims=None) -> MlpModel:
    r = open_reader(path, NN_MAGIC, NN_VERSION, "model")
    (count,) = r.u32s(1)
    if count < 2 or count > 64:
        raise ShapeMismatchError(f"shape mismatch: implausible layer count {count} in {path}")
    dims = tuple(r.u32s(count))
    if expected_dims is not None and tuple(expected_dims) != dims:
        raise ShapeMismatchError(f"shape mismatch: file holds dims {dims}, expected {tuple(expected_dims)}")
    hidden, output, bias = r.u32s(3)
    names = {v: k for k, v in _ACT_CODES.items()}
    if hidden not in names or output not in names or bias > 1:
        raise ShapeMismatchError(f"unknown activation or bias tag in {path}")
    weights, biases = [], [] if bias else None
    for a, b in zip(dims[:-1], dims[1:]):
        weights.append(r.array("<f8", a * b, (a, b)))
        if bias:
            biases.append(r.array("<f8", b))
    r.finish()
    return MlpModel(dims, weights, biases, names[hidden], names[output])
