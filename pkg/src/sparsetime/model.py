"""Component-fusion predictor with analytic gradients.

Forward graph for one window (rows are time steps)::

    h_i   = X_i W_i + b_i            i ∈ {s, m, g}
    alpha = softmax(theta)
    H     = Σ alpha_i h_i
    out   = ReLU(H) w_o + b_o        one output per row
    y_hat = out[-1]

Only the last row is scored against the target; the full ``out`` column is kept
in the trace for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .decompose import Decomposition, DecompositionMode
from .exceptions import ShapeError

FloatArray = NDArray[np.float64]

PARAM_NAMES: tuple[str, ...] = ("w_s", "w_m", "w_g", "b_s", "b_m", "b_g", "theta", "w_o", "b_o")
COMPONENT_NAMES: tuple[str, str, str] = ("saliency", "memory", "trend")
_WEIGHTS = ("w_s", "w_m", "w_g")
_BIASES = ("b_s", "b_m", "b_g")


@dataclass(frozen=True)
class _TensorSet:
    w_s: FloatArray
    w_m: FloatArray
    w_g: FloatArray
    b_s: FloatArray
    b_m: FloatArray
    b_g: FloatArray
    theta: FloatArray
    w_o: FloatArray
    b_o: FloatArray

    def __post_init__(self) -> None:
        if np.ndim(self.w_s) != 2:
            raise ShapeError(f"{type(self).__name__}.w_s must be 2-D, got shape {np.shape(self.w_s)}")
        d, h = np.shape(self.w_s)
        expected = {
            "w_s": (d, h),
            "w_m": (d, h),
            "w_g": (d, h),
            "b_s": (h,),
            "b_m": (h,),
            "b_g": (h,),
            "theta": (3,),
            "w_o": (h, 1),
            "b_o": (1,),
        }
        for name, shape in expected.items():
            actual = np.shape(getattr(self, name))
            if actual != shape:
                raise ShapeError(f"{type(self).__name__}.{name} has shape {actual}, expected {shape}")

    @property
    def d(self) -> int:
        return int(self.w_s.shape[0])

    @property
    def hidden_dim(self) -> int:
        return int(self.w_s.shape[1])

    def tensors(self) -> dict[str, FloatArray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ModelParams(_TensorSet):
    @property
    def alpha(self) -> FloatArray:
        return softmax_alpha(self.theta)

    @property
    def param_count(self) -> int:
        return param_count(self.d, self.hidden_dim)


@dataclass(frozen=True)
class Gradients(_TensorSet):
    pass


@dataclass(frozen=True)
class ForwardTrace:
    h_s: FloatArray
    h_m: FloatArray
    h_g: FloatArray
    alpha: FloatArray
    fused: FloatArray
    activated: FloatArray
    outputs: FloatArray
    y_hat: float


@dataclass(frozen=True)
class BatchTrace:
    """Forward trace over stacked ``(B, L, d)`` inputs."""

    h_s: FloatArray
    h_m: FloatArray
    h_g: FloatArray
    alpha: FloatArray
    fused: FloatArray
    activated: FloatArray
    outputs: FloatArray
    y_hat: FloatArray

    def sample(self, index: int) -> ForwardTrace:
        return ForwardTrace(
            h_s=self.h_s[index],
            h_m=self.h_m[index],
            h_g=self.h_g[index],
            alpha=self.alpha,
            fused=self.fused[index],
            activated=self.activated[index],
            outputs=self.outputs[index],
            y_hat=float(self.y_hat[index]),
        )


def param_count(d: int, h: int) -> int:
    return 3 * (d * h + h) + 3 + h + 1


def init_params(d: int, h: int, seed: int) -> ModelParams:
    if d < 1 or h < 1:
        raise ShapeError(f"init_params needs d >= 1 and h >= 1, got d={d}, h={h}")
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(d)
    out_bound = 1.0 / np.sqrt(h)
    return ModelParams(
        w_s=rng.uniform(-bound, bound, size=(d, h)),
        w_m=rng.uniform(-bound, bound, size=(d, h)),
        w_g=rng.uniform(-bound, bound, size=(d, h)),
        b_s=np.zeros(h),
        b_m=np.zeros(h),
        b_g=np.zeros(h),
        theta=np.zeros(3),
        w_o=rng.uniform(-out_bound, out_bound, size=(h, 1)),
        b_o=np.zeros(1),
    )


def softmax_alpha(theta: ArrayLike) -> FloatArray:
    logits = np.asarray(theta, dtype=np.float64).reshape(-1)
    if logits.shape != (3,):
        raise ShapeError(f"theta must have 3 entries, got shape {logits.shape}")
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def _check_inputs(p: ModelParams, s: FloatArray, m: FloatArray, g: FloatArray) -> None:
    for name, comp in zip(COMPONENT_NAMES, (s, m, g), strict=True):
        if comp.ndim != 3 or comp.shape[2] != p.d:
            raise ShapeError(f"{name} component has shape {comp.shape}, expected (B, L, {p.d})")
    if not (s.shape == m.shape == g.shape):
        raise ShapeError(f"component shapes differ: {s.shape}, {m.shape}, {g.shape}")


def forward_batch(p: ModelParams, s: ArrayLike, m: ArrayLike, g: ArrayLike) -> BatchTrace:
    s_arr, m_arr, g_arr = (np.asarray(c, dtype=np.float64) for c in (s, m, g))
    _check_inputs(p, s_arr, m_arr, g_arr)
    alpha = softmax_alpha(p.theta)
    h_s = s_arr @ p.w_s + p.b_s
    h_m = m_arr @ p.w_m + p.b_m
    h_g = g_arr @ p.w_g + p.b_g
    fused = alpha[0] * h_s + alpha[1] * h_m + alpha[2] * h_g
    activated = np.maximum(fused, 0.0)
    outputs = (activated @ p.w_o)[..., 0] + p.b_o[0]
    return BatchTrace(
        h_s=h_s,
        h_m=h_m,
        h_g=h_g,
        alpha=alpha,
        fused=fused,
        activated=activated,
        outputs=outputs,
        y_hat=outputs[:, -1].copy(),
    )


def forward(p: ModelParams, dec: Decomposition) -> ForwardTrace:
    if dec.mode is not DecompositionMode.EXPERIMENT:
        raise ShapeError("model consumes experiment-mode decompositions only")
    trace = forward_batch(p, dec.s[None], dec.m[None], dec.g[None])
    return trace.sample(0)


def backward_batch(
    p: ModelParams,
    s: ArrayLike,
    m: ArrayLike,
    g: ArrayLike,
    trace: BatchTrace,
    targets: ArrayLike,
) -> tuple[float, Gradients]:
    """Mean squared error over the batch and its exact gradients (ReLU'(0) = 0)."""
    inputs = tuple(np.asarray(c, dtype=np.float64) for c in (s, m, g))
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    batch = trace.y_hat.shape[0]
    if y.shape[0] != batch:
        raise ShapeError(f"targets length {y.shape[0]} != batch size {batch}")

    residual = trace.y_hat - y
    loss = float(np.mean(residual**2))

    grad_out = np.zeros_like(trace.outputs)
    grad_out[:, -1] = 2.0 * residual / batch
    grad_w_o = np.einsum("bl,blh->h", grad_out, trace.activated)[:, None]
    grad_b_o = np.array([grad_out.sum()])
    grad_fused = (grad_out[..., None] * p.w_o[:, 0]) * (trace.fused > 0.0)

    grads: dict[str, FloatArray] = {"w_o": grad_w_o, "b_o": grad_b_o}
    hidden = (trace.h_s, trace.h_m, trace.h_g)
    grad_alpha = np.empty(3)
    for i, (w_name, b_name) in enumerate(zip(_WEIGHTS, _BIASES, strict=True)):
        grad_h = trace.alpha[i] * grad_fused
        grads[w_name] = np.einsum("bld,blh->dh", inputs[i], grad_h)
        grads[b_name] = grad_h.sum(axis=(0, 1))
        grad_alpha[i] = np.sum(grad_fused * hidden[i])
    # softmax Jacobian: diag(alpha) - alpha alpha^T
    grads["theta"] = trace.alpha * (grad_alpha - np.dot(trace.alpha, grad_alpha))
    return loss, Gradients(**grads)


def backward(p: ModelParams, dec: Decomposition, trace: ForwardTrace, target: float) -> tuple[float, Gradients]:
    batch_trace = BatchTrace(
        h_s=trace.h_s[None],
        h_m=trace.h_m[None],
        h_g=trace.h_g[None],
        alpha=trace.alpha,
        fused=trace.fused[None],
        activated=trace.activated[None],
        outputs=trace.outputs[None],
        y_hat=np.array([trace.y_hat]),
    )
    return backward_batch(p, dec.s[None], dec.m[None], dec.g[None], batch_trace, [target])


def predict_batch(p: ModelParams, s: ArrayLike, m: ArrayLike, g: ArrayLike) -> FloatArray:
    return forward_batch(p, s, m, g).y_hat
