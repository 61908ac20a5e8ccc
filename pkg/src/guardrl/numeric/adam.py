"""Adam optimizer and polyak target blending over ParamSet trees."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from guardrl.errors import ShapeError
from guardrl.numeric.mlp import ParamSet

log = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class OptState:
    """First/second moment accumulators mirroring a ParamSet, plus step count."""

    m_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_weights: list[np.ndarray]
    v_biases: list[np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params: ParamSet) -> "OptState":
        return cls(
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
        )

    def copy(self) -> "OptState":
        return OptState(
            [a.copy() for a in self.m_weights],
            [a.copy() for a in self.m_biases],
            [a.copy() for a in self.v_weights],
            [a.copy() for a in self.v_biases],
            self.step,
        )


def _grads_finite(grads: ParamSet) -> bool:
    return all(np.isfinite(g).all() for g in grads.weights) and all(np.isfinite(g).all() for g in grads.biases)


def adam_step(
    params: ParamSet,
    grads: ParamSet,
    opt: OptState,
    lr: float,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPS,
) -> None:
    """One bias-corrected Adam update, in place on params and opt.

    Non-finite gradients skip the update entirely (params and moments untouched)
    and log an incident instead of poisoning the parameters.
    """
    if len(grads.weights) != len(params.weights):
        raise ShapeError("gradient tree does not match parameter tree")
    if not _grads_finite(grads):
        log.warning("adam_step: non-finite gradient, update skipped")
        return
    opt.step += 1
    c1 = 1.0 - beta1 ** opt.step
    c2 = 1.0 - beta2 ** opt.step
    for p, g, m, v in zip(
        params.weights + params.biases,
        grads.weights + grads.biases,
        opt.m_weights + opt.m_biases,
        opt.v_weights + opt.v_biases,
    ):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


def adam_step_scalar(value: float, grad: float, state: dict, lr: float) -> float:
    """Adam for a lone scalar parameter (entropy temperature). state holds m, v, step."""
    if not np.isfinite(grad):
        log.warning("adam_step_scalar: non-finite gradient, update skipped")
        return value
    state["step"] += 1
    state["m"] = ADAM_BETA1 * state["m"] + (1.0 - ADAM_BETA1) * grad
    state["v"] = ADAM_BETA2 * state["v"] + (1.0 - ADAM_BETA2) * grad * grad
    mhat = state["m"] / (1.0 - ADAM_BETA1 ** state["step"])
    vhat = state["v"] / (1.0 - ADAM_BETA2 ** state["step"])
    return value - lr * mhat / (np.sqrt(vhat) + ADAM_EPS)


def polyak(target: ParamSet, online: ParamSet, tau: float) -> ParamSet:
    """Elementwise (1 - tau) * target + tau * online. Returns a new ParamSet."""
    if not 0.0 <= tau <= 1.0:
        raise ShapeError(f"tau must be in [0, 1], got {tau}")
    if len(target.weights) != len(online.weights):
        raise ShapeError("target and online parameter trees differ in depth")
    out_w, out_b = [], []
    for tw, ow in zip(target.weights, online.weights):
        if tw.shape != ow.shape:
            raise ShapeError(f"weight shape {tw.shape} vs {ow.shape}")
        out_w.append((1.0 - tau) * tw + tau * ow)
    for tb, ob in zip(target.biases, online.biases):
        if tb.shape != ob.shape:
            raise ShapeError(f"bias shape {tb.shape} vs {ob.shape}")
        out_b.append((1.0 - tau) * tb + tau * ob)
    return ParamSet(out_w, out_b, online.activation)
