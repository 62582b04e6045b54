"""Minimal feed-forward network engine in float64 numpy.

Provides exactly what the rest of the library needs and nothing more:
layered affine+activation networks, reverse-mode gradients with respect
to both parameters and inputs, a bias-corrected Adam optimizer, a
central-difference gradient checker, and a JSON checkpoint format.

All functions treat parameters as values; nothing here keeps hidden
state between calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonFiniteError

ACTIVATIONS = ("tanh", "relu", "identity", "sigmoid")


def _apply_activation(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "identity":
        return z
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    raise ValueError(f"unknown activation {name!r}")


def _activation_grad(name, z, a):
    # Derivative expressed via pre-activation z or activation a, whichever
    # is cheaper. relu uses the z > 0 subgradient (0 at the kink).
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "identity":
        return np.ones_like(z)
    if name == "sigmoid":
        return a * (1.0 - a)
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class Layer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray     # (out,)
    activation: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise DimensionMismatch("layer weights must be a 2-d matrix")
        if self.bias.shape != (self.weights.shape[0],):
            raise DimensionMismatch(
                f"bias shape {self.bias.shape} does not match "
                f"{self.weights.shape[0]} output units"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def n_in(self):
        return self.weights.shape[1]

    @property
    def n_out(self):
        return self.weights.shape[0]


@dataclass
class NetworkParams:
    """Ordered affine+activation layers with a flat-vector view.

    The flat view concatenates, per layer, the row-major weight matrix
    followed by the bias vector. ``set_flat(get_flat())`` is exact.
    """

    layers: list[Layer] = field(default_factory=list)

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.n_out != nxt.n_in:
                raise DimensionMismatch(
                    f"layer dims do not chain: {prev.n_out} -> {nxt.n_in}"
                )

    @property
    def n_in(self):
        return self.layers[0].n_in

    @property
    def n_out(self):
        return self.layers[-1].n_out

    @property
    def n_params(self):
        return sum(l.weights.size + l.bias.size for l in self.layers)

    def get_flat(self):
        return np.concatenate(
            [np.concatenate([l.weights.ravel(), l.bias]) for l in self.layers]
        )

    def set_flat(self, flat):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.n_params,):
            raise DimensionMismatch(
                f"flat vector has {flat.shape} elements, expected {self.n_params}"
            )
        i = 0
        for l in self.layers:
            w = l.weights.size
            l.weights = flat[i:i + w].reshape(l.weights.shape).copy()
            i += w
            b = l.bias.size
            l.bias = flat[i:i + b].copy()
            i += b

    def copy(self):
        return NetworkParams(
            [Layer(l.weights.copy(), l.bias.copy(), l.activation) for l in self.layers]
        )


def init_network(dims, activations, rng):
    """Build a network with uniform +-1/sqrt(fan_in) weights and zero biases.

    dims is the full chain [n_in, h1, ..., n_out]; activations has one
    entry per layer (len(dims) - 1).
    """
    if len(activations) != len(dims) - 1:
        raise DimensionMismatch("need one activation per layer")
    layers = []
    for fan_in, fan_out, act in zip(dims[:-1], dims[1:], activations):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        layers.append(Layer(w, np.zeros(fan_out), act))
    return NetworkParams(layers)


def mlp_dims(n_in, n_out, hidden=(64, 64)):
    return [n_in, *hidden, n_out]


def mlp_activations(n_hidden, out_activation, hidden_activation="relu"):
    return [hidden_activation] * n_hidden + [out_activation]


def forward_batch(params, x, want_cache=False):
    """Run a (batch, n_in) matrix through the network.

    Returns the (batch, n_out) output, plus the per-layer (z, a) cache
    when want_cache is set (needed by backward_batch).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.n_in:
        raise DimensionMismatch(
            f"input shape {x.shape} does not match network input dim {params.n_in}"
        )
    a = x
    cache = [] if want_cache else None
    for l in params.layers:
        z = a @ l.weights.T + l.bias
        a_next = _apply_activation(l.activation, z)
        if want_cache:
            cache.append((a, z, a_next))
        a = a_next
    if want_cache:
        return a, cache
    return a


def forward(params, x):
    """Single-vector forward pass: real[n_in] -> real[n_out]."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.n_in,):
        raise DimensionMismatch(
            f"input shape {x.shape} does not match network input dim {params.n_in}"
        )
    return forward_batch(params, x[None, :])[0]


def backward_batch(params, x, upstream, cache=None):
    """Reverse-mode gradients for a batch.

    upstream is dL/d(output) with shape (batch, n_out). Returns
    (param_grads, input_grads): param_grads is the flat-view gradient
    summed over the batch; input_grads has shape (batch, n_in).
    """
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if cache is None:
        _, cache = forward_batch(params, x, want_cache=True)
    if upstream.shape != (x.shape[0], params.n_out):
        raise DimensionMismatch(
            f"upstream shape {upstream.shape} does not match "
            f"(batch={x.shape[0]}, n_out={params.n_out})"
        )
    flat = np.empty(params.n_params)
    offsets = []
    pos = 0
    for l in params.layers:
        offsets.append(pos)
        pos += l.weights.size + l.bias.size
    g = upstream
    for i in range(len(params.layers) - 1, -1, -1):
        l = params.layers[i]
        a_in, z, a_out = cache[i]
        dz = g * _activation_grad(l.activation, z, a_out)
        w = l.weights.size
        flat[offsets[i]:offsets[i] + w] = (dz.T @ a_in).ravel()
        flat[offsets[i] + w:offsets[i] + w + l.bias.size] = dz.sum(axis=0)
        g = dz @ l.weights
    return flat, g


def input_grad_batch(params, x, upstream, cache):
    """Input gradients only (no parameter gradients); needs a cache."""
    g = upstream
    for i in range(len(params.layers) - 1, -1, -1):
        l = params.layers[i]
        _, z, a_out = cache[i]
        g = (g * _activation_grad(l.activation, z, a_out)) @ l.weights
    return g


def backward(params, x, upstream_grad):
    """Single-vector reverse mode: gradients of upstream . output.

    Returns (param_grads flat vector, input_grad of shape (n_in,)).
    """
    x = np.asarray(x, dtype=np.float64)
    upstream_grad = np.asarray(upstream_grad, dtype=np.float64)
    if x.shape != (params.n_in,):
        raise DimensionMismatch(
            f"input shape {x.shape} does not match network input dim {params.n_in}"
        )
    if upstream_grad.shape != (params.n_out,):
        raise DimensionMismatch(
            f"upstream shape {upstream_grad.shape} does not match output dim {params.n_out}"
        )
    flat, gin = backward_batch(params, x[None, :], upstream_grad[None, :])
    return flat, gin[0]


@dataclass
class AdamState:
    """Bias-corrected Adam over a flat parameter vector."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8

    @classmethod
    def for_params(cls, n, lr, beta1=0.9, beta2=0.999, eps_adam=1e-8):
        return cls(np.zeros(n), np.zeros(n), 0, lr, beta1, beta2, eps_adam)


def adam_step(state, params, grads):
    """One Adam descent step on params.get_flat(); returns (params, state).

    Both arguments are updated functionally: fresh moment vectors and a
    fresh flat view are written back into the same params object.
    """
    grads = np.asarray(grads, dtype=np.float64)
    n = params.n_params
    if grads.shape != (n,):
        raise DimensionMismatch(f"gradient has shape {grads.shape}, expected ({n},)")
    if state.first_moment.shape != (n,):
        raise DimensionMismatch("Adam moment vectors do not match parameter count")
    if not np.all(np.isfinite(grads)):
        bad = int(np.count_nonzero(~np.isfinite(grads)))
        raise NonFiniteError(f"{bad} non-finite gradient component(s); aborting update")
    t = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads * grads
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    flat = params.get_flat() - state.lr * m_hat / (np.sqrt(v_hat) + state.eps_adam)
    params.set_flat(flat)
    new_state = AdamState(m, v, t, state.lr, state.beta1, state.beta2, state.eps_adam)
    return params, new_state


def finite_diff_check(fn, point, analytic_grad, step=1e-5):
    """Max relative error between analytic_grad and central differences.

    Relative error per coordinate uses max(|analytic|, |numeric|, 1e-8)
    as the denominator; the worst coordinate is returned.
    """
    point = np.asarray(point, dtype=np.float64)
    analytic_grad = np.asarray(analytic_grad, dtype=np.float64)
    worst = 0.0
    for i in range(point.size):
        bumped = point.copy()
        bumped[i] = point[i] + step
        hi = fn(bumped)
        bumped[i] = point[i] - step
        lo = fn(bumped)
        numeric = (hi - lo) / (2.0 * step)
        denom = max(abs(analytic_grad[i]), abs(numeric), 1e-8)
        worst = max(worst, abs(numeric - analytic_grad[i]) / denom)
    return worst


def checkpoint_dict(params, extra=None):
    doc = {
        "layers": [
            {
                "in": l.n_in,
                "out": l.n_out,
                "activation": l.activation,
                "weights": l.weights.ravel().tolist(),
                "bias": l.bias.tolist(),
            }
            for l in params.layers
        ]
    }
    if extra:
        doc.update(extra)
    return doc


def params_from_dict(doc):
    layers = []
    for spec in doc["layers"]:
        w = np.asarray(spec["weights"], dtype=np.float64)
        if w.size != spec["in"] * spec["out"]:
            raise DimensionMismatch(
                f"weights length {w.size} does not match {spec['out']}x{spec['in']}"
            )
        layers.append(
            Layer(w.reshape(spec["out"], spec["in"]), np.asarray(spec["bias"]), spec["activation"])
        )
    return NetworkParams(layers)


def save_checkpoint(params, path, extra=None):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(checkpoint_dict(params, extra), f)
        f.write("\n")


def load_checkpoint(path):
    """Load a checkpoint JSON; returns (params, full document)."""
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    return params_from_dict(doc), doc
