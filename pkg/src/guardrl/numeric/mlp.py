"""Dense multilayer perceptrons with hand-derived reverse-mode gradients.

Everything here is plain float64 numpy and pure: no global state, no RNG.
The backward pass returns both parameter gradients (ParamSet-shaped) and the
gradient with respect to the network input, so callers can chain networks
together (e.g. push a value-network's action gradient into a policy head).
General graph autodiff is deliberately out of scope; losses are composed by
hand from `forward_cached` / `backward` plus the squashed-Gaussian helpers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from guardrl.errors import NonFiniteError, ShapeError

ACTIVATIONS = ("relu", "tanh")


@dataclass
class ParamSet:
    """Weights and biases of a dense net, hidden activation applied between layers.

    The final layer is always linear. weights[i] has shape (fan_in, fan_out),
    biases[i] has shape (fan_out,). Consecutive layer dimensions must chain.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"

    def __post_init__(self) -> None:
        if self.activation not in ACTIVATIONS:
            raise ShapeError(f"unknown activation {self.activation!r}, expected one of {ACTIVATIONS}")
        if len(self.weights) != len(self.biases):
            raise ShapeError(f"{len(self.weights)} weight matrices vs {len(self.biases)} bias vectors")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ShapeError(f"layer {i}: weight {w.shape} does not pair with bias {b.shape}")
            if i > 0 and self.weights[i - 1].shape[1] != w.shape[0]:
                raise ShapeError(
                    f"layer {i - 1} output {self.weights[i - 1].shape[1]} does not chain into layer {i} input {w.shape[0]}"
                )

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "ParamSet":
        return ParamSet([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.activation)

    def all_finite(self) -> bool:
        return all(np.isfinite(w).all() for w in self.weights) and all(np.isfinite(b).all() for b in self.biases)


def init_mlp(rng: np.random.Generator, sizes: list[int], activation: str = "relu") -> ParamSet:
    """He-style initialization; final layer scaled down for near-zero initial outputs."""
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        scale = np.sqrt(2.0 / fan_in)
        if i == len(sizes) - 2:
            scale = 1e-2 / np.sqrt(fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return ParamSet(weights, biases, activation)


def zeros_like_params(params: ParamSet) -> ParamSet:
    return ParamSet(
        [np.zeros_like(w) for w in params.weights],
        [np.zeros_like(b) for b in params.biases],
        params.activation,
    )


def params_add_scaled(dst: ParamSet, src: ParamSet, scale: float = 1.0) -> None:
    """dst += scale * src, in place. Shapes must match."""
    for dw, sw in zip(dst.weights, src.weights):
        if dw.shape != sw.shape:
            raise ShapeError(f"weight shape {sw.shape} does not match {dw.shape}")
        dw += scale * sw
    for db, sb in zip(dst.biases, src.biases):
        db += scale * sb


def _as_batch(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ShapeError(f"input must be a vector or a batch of vectors, got ndim={x.ndim}")


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _activate_grad(z: np.ndarray, h: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return (z > 0.0).astype(np.float64)
    return 1.0 - h * h


def forward(params: ParamSet, x: np.ndarray) -> np.ndarray:
    """Plain forward pass; accepts a single vector or a (batch, in_dim) array."""
    y, _ = forward_cached(params, x, check_finite=False)
    return y


def forward_cached(params: ParamSet, x: np.ndarray, check_finite: bool = False):
    """Forward pass that also returns the tape needed by `backward`.

    Raises ShapeError on input width mismatch, NonFiniteError (with the layer
    index) if check_finite is set and an intermediate goes non-finite.
    """
    xb, squeeze = _as_batch(x)
    if xb.shape[1] != params.in_dim:
        raise ShapeError(f"input width {xb.shape[1]} does not match first layer fan-in {params.in_dim}")
    pre: list[np.ndarray] = []
    post: list[np.ndarray] = [xb]
    h = xb
    n = len(params.weights)
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        if check_finite and not np.isfinite(z).all():
            raise NonFiniteError(f"non-finite preactivation at layer {i}")
        pre.append(z)
        h = _activate(z, params.activation) if i < n - 1 else z
        post.append(h)
    y = post[-1][0] if squeeze else post[-1]
    return y, (pre, post, squeeze)


def backward(params: ParamSet, cache, dy: np.ndarray) -> tuple[ParamSet, np.ndarray]:
    """Reverse pass. dy is dLoss/dOutput with the same shape as the forward output.

    Returns (parameter gradients, dLoss/dInput).
    """
    pre, post, squeeze = cache
    g = np.asarray(dy, dtype=np.float64)
    if squeeze:
        g = g[None, :]
    if g.shape != post[-1].shape:
        raise ShapeError(f"cotangent shape {g.shape} does not match output shape {post[-1].shape}")
    grads = zeros_like_params(params)
    n = len(params.weights)
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            g = g * _activate_grad(pre[i], post[i + 1], params.activation)
        grads.weights[i][...] = post[i].T @ g
        grads.biases[i][...] = g.sum(axis=0)
        g = g @ params.weights[i].T
    dx = g[0] if squeeze else g
    return grads, dx


def value_and_grad(params: ParamSet, x: np.ndarray, scalar_head) -> tuple[float, ParamSet, np.ndarray]:
    """Gradient of loss = scalar_head(forward(params, x)).

    scalar_head maps the network output to (loss, dloss_doutput). Covers every
    single-network loss; multi-network objectives chain `backward` calls
    directly. Raises NonFiniteError if the loss or an intermediate is non-finite.
    """
    y, cache = forward_cached(params, x, check_finite=True)
    loss, dy = scalar_head(y)
    if not np.isfinite(loss):
        raise NonFiniteError("non-finite loss value")
    grads, dx = backward(params, cache, dy)
    return float(loss), grads, dx


def flatten_params(params: ParamSet) -> np.ndarray:
    parts = []
    for w, b in zip(params.weights, params.biases):
        parts.append(w.ravel())
        parts.append(b.ravel())
    return np.concatenate(parts)


def unflatten_params(template: ParamSet, flat: np.ndarray) -> ParamSet:
    out = zeros_like_params(template)
    k = 0
    for i, (w, b) in enumerate(zip(template.weights, template.biases)):
        out.weights[i][...] = flat[k:k + w.size].reshape(w.shape)
        k += w.size
        out.biases[i][...] = flat[k:k + b.size].reshape(b.shape)
        k += b.size
    if k != flat.size:
        raise ShapeError(f"flat vector has {flat.size} entries, template needs {k}")
    return out
