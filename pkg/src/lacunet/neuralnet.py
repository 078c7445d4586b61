"""Fully connected network: forward pass, backprop, and the Adam update.

The network maps a flattened source indicator (length nx_sub * nt_sub) to
a flattened lacuna score field (length Nx * Nt).  Hidden layers use
LeakyReLU (slope 0.01 on the negative side), the output layer tanh, so
every output component lies strictly in (-1, 1).

The training loss is the mean over samples of the Frobenius norm of the
residual field — the norm itself, not its square.  Its gradient is
residual / ||residual||, defined as zero at zero residual (a valid
subgradient).  All arithmetic is float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import Xoshiro256StarStar

LEAKY_SLOPE = 0.01

ACTIVATION_TAGS = {"leaky_relu": 1, "tanh": 2}
TAG_ACTIVATIONS = {v: k for k, v in ACTIVATION_TAGS.items()}


@dataclass(eq=False)
class LayerParams:
    """One affine layer: weights (w_k, w_{k-1}) and bias (w_k,)."""

    weights: np.ndarray
    bias: np.ndarray


@dataclass(eq=False)
class NetworkParams:
    """All layers plus the width list [w0, ..., w_{K+1}]."""

    layers: list[LayerParams]
    widths: tuple[int, ...]
    hidden_activation: str = "leaky_relu"
    output_activation: str = "tanh"

    def __post_init__(self):
        if len(self.widths) < 2:
            raise ValueError("need at least an input and an output width")
        if len(self.layers) != len(self.widths) - 1:
            raise ValueError("layer count must be len(widths) - 1")
        for k, layer in enumerate(self.layers):
            want = (self.widths[k + 1], self.widths[k])
            if layer.weights.shape != want or layer.bias.shape != (want[0],):
                raise ValueError(
                    f"layer {k + 1} shapes {layer.weights.shape}/{layer.bias.shape} "
                    f"do not match widths {want}"
                )

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            [LayerParams(l.weights.copy(), l.bias.copy()) for l in self.layers],
            self.widths, self.hidden_activation, self.output_activation,
        )

    def count(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)


@dataclass(eq=False)
class Gradients:
    """Loss gradients, shape-matched to NetworkParams."""

    layers: list[LayerParams]


@dataclass(eq=False)
class AdamState:
    """First/second moment accumulators plus the hyperparameters."""

    m: list[LayerParams]
    v: list[LayerParams]
    step: int
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass(eq=False)
class ForwardCache:
    """Everything backprop needs: input, pre-activations, activations."""

    activations: list[np.ndarray]  # z_0 = input .. z_{K+1} = output
    pre_activations: list[np.ndarray]  # A_1 .. A_{K+1}


def leaky_relu(x):
    return np.where(x >= 0, x, LEAKY_SLOPE * x)


def leaky_relu_prime(x):
    """Derivative; the kink at 0 takes the identity-branch value 1."""
    return np.where(x >= 0, 1.0, LEAKY_SLOPE)


def init_params(widths, rng: Xoshiro256StarStar) -> NetworkParams:
    """Uniform init on (-1/sqrt(fan_in), +1/sqrt(fan_in)) per layer.

    Draw order is fixed: per layer, all weights row-major, then the bias.
    """
    widths = tuple(int(w) for w in widths)
    layers = []
    for k in range(len(widths) - 1):
        fan_in, fan_out = widths[k], widths[k + 1]
        bound = 1.0 / math.sqrt(fan_in)
        w = np.empty(fan_out * fan_in, dtype=np.float64)
        for i in range(w.size):
            w[i] = rng.uniform(-bound, bound)
        b = np.empty(fan_out, dtype=np.float64)
        for i in range(b.size):
            b[i] = rng.uniform(-bound, bound)
        layers.append(LayerParams(w.reshape(fan_out, fan_in), b))
    return NetworkParams(layers, widths)


def _check_input(params: NetworkParams, x: np.ndarray, axis_len: int):
    if axis_len != params.widths[0]:
        raise ValueError(
            f"input length {axis_len} does not match input width {params.widths[0]}"
        )


def forward(params: NetworkParams, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Single-sample forward pass; returns the output and the cache."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("forward expects a 1-D input; use forward_batch for 2-D")
    _check_input(params, x, x.shape[0])
    activations = [x]
    pre = []
    z = x
    last = len(params.layers) - 1
    for k, layer in enumerate(params.layers):
        a = layer.weights @ z + layer.bias
        pre.append(a)
        z = np.tanh(a) if k == last else leaky_relu(a)
        activations.append(z)
    return z, ForwardCache(activations, pre)


def forward_batch(params: NetworkParams, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Batched forward pass over rows of ``x`` (shape (B, w0))."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("forward_batch expects a 2-D input")
    _check_input(params, x, x.shape[1])
    activations = [x]
    pre = []
    z = x
    last = len(params.layers) - 1
    for k, layer in enumerate(params.layers):
        a = z @ layer.weights.T + layer.bias
        pre.append(a)
        z = np.tanh(a) if k == last else leaky_relu(a)
        activations.append(z)
    return z, ForwardCache(activations, pre)


def residual_norms(outputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Frobenius norm of target - output per sample (rows)."""
    outputs = np.atleast_2d(np.asarray(outputs, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if outputs.shape != targets.shape:
        raise ValueError(f"shape mismatch {outputs.shape} vs {targets.shape}")
    diff = targets - outputs
    return np.sqrt(np.sum(diff * diff, axis=1))


def loss(outputs, targets) -> float:
    """Mean over samples of the residual Frobenius norm."""
    if isinstance(outputs, (list, tuple)):
        if len(outputs) != len(targets):
            raise ValueError(f"{len(outputs)} outputs vs {len(targets)} targets")
        outputs = np.stack([np.asarray(o).reshape(-1) for o in outputs])
        targets = np.stack([np.asarray(t).reshape(-1) for t in targets])
    return float(np.mean(residual_norms(outputs, targets)))


def _backprop(params: NetworkParams, cache: ForwardCache, d_out: np.ndarray) -> Gradients:
    """Shared chain rule; d_out is dLoss/dOutput, batched rows."""
    grads = [None] * len(params.layers)
    y = cache.activations[-1]
    delta = d_out * (1.0 - y * y)  # through tanh
    for k in range(len(params.layers) - 1, -1, -1):
        z_prev = cache.activations[k]
        dw = delta.T @ z_prev
        db = delta.sum(axis=0)
        grads[k] = LayerParams(dw, db)
        if k > 0:
            d_prev = delta @ params.layers[k].weights
            delta = d_prev * leaky_relu_prime(cache.pre_activations[k - 1])
    return Gradients(grads)


def _batch_cache(cache: ForwardCache) -> ForwardCache:
    if cache.activations[0].ndim == 1:
        return ForwardCache(
            [a[None, :] for a in cache.activations],
            [a[None, :] for a in cache.pre_activations],
        )
    return cache


def backward(params: NetworkParams, cache: ForwardCache, target: np.ndarray) -> Gradients:
    """Gradients of the per-sample norm loss for one cached forward pass.

    At zero residual the norm is not differentiable; the zero subgradient
    is used there.
    """
    cache = _batch_cache(cache)
    target = np.asarray(target, dtype=np.float64).reshape(1, -1)
    y = cache.activations[-1]
    if y.shape != target.shape:
        raise ValueError(f"target shape {target.shape} does not match output {y.shape}")
    r = y - target
    nrm = np.sqrt(np.sum(r * r))
    d_out = np.zeros_like(r) if nrm == 0.0 else r / nrm
    return _backprop(params, cache, d_out)


def backward_batch(params: NetworkParams, cache: ForwardCache, targets: np.ndarray) -> Gradients:
    """Mean of per-sample gradients over a batched cached forward pass."""
    targets = np.asarray(targets, dtype=np.float64)
    y = cache.activations[-1]
    if y.shape != targets.shape:
        raise ValueError(f"targets shape {targets.shape} does not match output {y.shape}")
    r = y - targets
    nrms = np.sqrt(np.sum(r * r, axis=1))
    scale = np.zeros_like(nrms)
    nonzero = nrms > 0.0
    scale[nonzero] = 1.0 / (nrms[nonzero] * r.shape[0])
    return _backprop(params, cache, r * scale[:, None])


def init_adam(
    params: NetworkParams,
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    zeros = lambda: [
        LayerParams(np.zeros_like(l.weights), np.zeros_like(l.bias))
        for l in params.layers
    ]
    return AdamState(zeros(), zeros(), 0, learning_rate, beta1, beta2, eps)


def adam_step(
    params: NetworkParams, grads: Gradients, state: AdamState
) -> tuple[NetworkParams, AdamState]:
    """One Adam update; returns fresh params and state."""
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    new_layers, new_m, new_v = [], [], []
    for layer, g, m, v in zip(params.layers, grads.layers, state.m, state.v):
        if g.weights.shape != layer.weights.shape or g.bias.shape != layer.bias.shape:
            raise ValueError("gradient shapes do not match parameters")
        mw = b1 * m.weights + (1.0 - b1) * g.weights
        mb = b1 * m.bias + (1.0 - b1) * g.bias
        vw = b2 * v.weights + (1.0 - b2) * g.weights * g.weights
        vb = b2 * v.bias + (1.0 - b2) * g.bias * g.bias
        w = layer.weights - state.learning_rate * (mw / bc1) / (np.sqrt(vw / bc2) + state.eps)
        b = layer.bias - state.learning_rate * (mb / bc1) / (np.sqrt(vb / bc2) + state.eps)
        new_layers.append(LayerParams(w, b))
        new_m.append(LayerParams(mw, mb))
        new_v.append(LayerParams(vw, vb))
    new_state = AdamState(
        new_m, new_v, t, state.learning_rate, state.beta1, state.beta2, state.eps
    )
    return (
        NetworkParams(
            new_layers, params.widths, params.hidden_activation, params.output_activation
        ),
        new_state,
    )
