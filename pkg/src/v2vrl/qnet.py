"""Action-value network: a small dense net with rectifier hidden layers and a
linear output enumerating every (sub-band, power) action.

Everything is float64 numpy: forward, manual backprop of the squared TD loss
through the chosen output unit, plain SGD, and a text checkpoint format that
round-trips parameters exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContractError, TrainingError


@dataclass
class QNetwork:
    dims: list[int]             # [input, hidden..., n_actions]
    weights: list[np.ndarray]   # per layer, shape [out, in]
    biases: list[np.ndarray]    # per layer, shape [out]


@dataclass
class Gradient:
    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]


def init_qnetwork(dims: list[int], rng: np.random.Generator) -> QNetwork:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases."""
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ConfigError(f"bad layer dims {dims}")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, (fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return QNetwork(list(dims), weights, biases)


def _check_input(net: QNetwork, x: np.ndarray, batched: bool):
    want = net.dims[0]
    got = x.shape[-1] if x.ndim else -1
    if (x.ndim != (2 if batched else 1)) or got != want:
        raise ContractError(f"input shape {x.shape} does not match input dim {want}")


def forward(net: QNetwork, x: np.ndarray) -> np.ndarray:
    """Q-values for every action; rectifier hiddens, identity output."""
    x = np.asarray(x, dtype=float)
    _check_input(net, x, batched=False)
    a = x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = w @ a + b
        a = z if i == last else np.maximum(z, 0.0)
    return a


def forward_batch(net: QNetwork, xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    _check_input(net, xs, batched=True)
    a = xs
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        a = z if i == last else np.maximum(z, 0.0)
    return a


def _forward_trace(net: QNetwork, xs: np.ndarray):
    """Batched forward keeping layer inputs and pre-activations for backprop."""
    acts = [xs]   # inputs to each layer
    zs = []
    last = len(net.weights) - 1
    a = xs
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        zs.append(z)
        a = z if i == last else np.maximum(z, 0.0)
        acts.append(a)
    return acts, zs


def backward_batch(net: QNetwork, xs: np.ndarray, actions: np.ndarray,
                   td_errors: np.ndarray) -> Gradient:
    """Mean over the batch of the gradient of 1/2 * td_error^2, where the loss
    flows only through each sample's chosen output unit."""
    xs = np.asarray(xs, dtype=float)
    _check_input(net, xs, batched=True)
    n = xs.shape[0]
    if np.any(np.asarray(actions) >= net.dims[-1]) or np.any(np.asarray(actions) < 0):
        raise ContractError("action index out of range")
    acts, zs = _forward_trace(net, xs)
    delta = np.zeros((n, net.dims[-1]))
    delta[np.arange(n), actions] = np.asarray(td_errors, dtype=float)
    d_w = [None] * len(net.weights)
    d_b = [None] * len(net.weights)
    for layer in range(len(net.weights) - 1, -1, -1):
        d_w[layer] = delta.T @ acts[layer] / n
        d_b[layer] = delta.mean(axis=0)
        if layer > 0:
            delta = (delta @ net.weights[layer]) * (zs[layer - 1] > 0.0)
    return Gradient(d_w, d_b)


def backward(net: QNetwork, x: np.ndarray, action_index: int, td_error: float) -> Gradient:
    """Gradient of 1/2 * td_error^2 w.r.t. the parameters for one sample."""
    return backward_batch(net, np.asarray(x, dtype=float)[None, :],
                          np.array([action_index]), np.array([float(td_error)]))


def sgd_update(net: QNetwork, grad: Gradient, lr: float) -> None:
    """In-place theta <- theta - lr * grad; rejected whole if any entry is
    non-finite, so a bad batch cannot corrupt the parameters."""
    if lr <= 0:
        raise ContractError("learning rate must be > 0")
    for g in (*grad.d_weights, *grad.d_biases):
        if not np.all(np.isfinite(g)):
            raise TrainingError("non-finite gradient; update rejected")
    for w, gw in zip(net.weights, grad.d_weights):
        w -= lr * gw
    for b, gb in zip(net.biases, grad.d_biases):
        b -= lr * gb


def copy_params(net: QNetwork) -> QNetwork:
    return QNetwork(list(net.dims),
                    [w.copy() for w in net.weights],
                    [b.copy() for b in net.biases])


# -- checkpoint I/O -------------------------------------------------------

CHECKPOINT_MAGIC = "QNET v1"


def save_checkpoint(net: QNetwork, path) -> None:
    """Text format: magic line, layer dims, then one line per tensor
    (W0, b0, W1, b1, ...) row-major with 17 significant digits."""
    lines = [CHECKPOINT_MAGIC, " ".join(str(d) for d in net.dims)]
    for w, b in zip(net.weights, net.biases):
        lines.append(" ".join("%.17g" % v for v in w.ravel()))
        lines.append(" ".join("%.17g" % v for v in b))
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path) -> QNetwork:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CHECKPOINT_MAGIC:
        raise ConfigError(f"{path}: not a {CHECKPOINT_MAGIC} checkpoint")
    try:
        dims = [int(t) for t in lines[1].split()]
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}: bad dims line") from exc
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ConfigError(f"{path}: bad dims line")
    expected_lines = 2 + 2 * (len(dims) - 1)
    if len(lines) < expected_lines:
        raise ConfigError(f"{path}: truncated checkpoint")
    weights, biases = [], []
    row = 2
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        try:
            w = np.array([float(t) for t in lines[row].split()])
            b = np.array([float(t) for t in lines[row + 1].split()])
        except ValueError as exc:
            raise ConfigError(f"{path}: bad number at line {row + 1}") from exc
        if w.size != fan_out * fan_in or b.size != fan_out:
            raise ConfigError(f"{path}: tensor size mismatch at line {row + 1}")
        weights.append(w.reshape(fan_out, fan_in))
        biases.append(b)
        row += 2
    return QNetwork(dims, weights, biases)


# -- gradient verification ------------------------------------------------

def _td_loss(net: QNetwork, x: np.ndarray, action: int, target: float) -> float:
    return 0.5 * float(forward(net, x)[action] - target) ** 2


def gradient_check(n_triples: int = 100, seed: int = 0, eps: float = 1e-5,
                   rel_floor: float = 1e-3) -> float:
    """Compare backward() against central finite differences on random
    (network, input, action) triples; returns the max relative error.

    Triples whose hidden pre-activations sit within 1e-3 of the rectifier
    kink are redrawn (the loss is non-differentiable there, so finite
    differences would measure the kink, not the gradient). The relative
    error denominator is floored at rel_floor so roundoff noise on
    near-zero gradients is not scored as error.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_triples):
        for _attempt in range(200):
            n_hidden = int(rng.integers(1, 3))
            dims = [int(rng.integers(4, 11))] + \
                   [int(rng.integers(5, 13)) for _ in range(n_hidden)] + \
                   [int(rng.integers(3, 9))]
            net = init_qnetwork(dims, rng)
            x = rng.uniform(-1.0, 1.0, dims[0])
            _, zs = _forward_trace(net, x[None, :])
            if all(np.min(np.abs(z)) > 1e-3 for z in zs[:-1]):
                break
        else:
            raise TrainingError("could not draw a kink-free triple")
        action = int(rng.integers(dims[-1]))
        td_error = float(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]))
        target = float(forward(net, x)[action]) - td_error
        grad = backward(net, x, action, td_error)

        for tensors, grads in ((net.weights, grad.d_weights), (net.biases, grad.d_biases)):
            for theta, g in zip(tensors, grads):
                flat = theta.ravel()
                gflat = g.ravel()
                for i in range(flat.size):
                    orig = flat[i]
                    flat[i] = orig + eps
                    hi = _td_loss(net, x, action, target)
                    flat[i] = orig - eps
                    lo = _td_loss(net, x, action, target)
                    flat[i] = orig
                    fd = (hi - lo) / (2.0 * eps)
                    denom = max(abs(gflat[i]), abs(fd), rel_floor)
                    worst = max(worst, abs(gflat[i] - fd) / denom)
    return worst
