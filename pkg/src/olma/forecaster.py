"""Linear forecasters (plain and trend/seasonal-decomposed) trained by hand-derived gradients."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .data import WindowSet
from .loss import LossSpec, Objective, as_objective

CHECKPOINT_FORMAT = "olma-linear-v1"


class TrainingError(RuntimeError):
    pass


def moving_average_decompose(x: np.ndarray, kernel: int, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Split ``x`` into a centered moving-average trend and the seasonal remainder.

    Edges are padded by replicating the first/last value ``kernel // 2`` times.
    """
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"moving-average kernel must be odd and >= 1, got {kernel}")
    x = np.asarray(x, dtype=float)
    l = x.shape[axis]
    if kernel > 2 * l - 1:
        raise ValueError(f"kernel {kernel} too wide for length {l}")
    if kernel == 1:
        return x.copy(), np.zeros_like(x)
    half = kernel // 2
    xm = np.moveaxis(x, axis, -1)
    padded = np.concatenate([np.repeat(xm[..., :1], half, axis=-1), xm,
                             np.repeat(xm[..., -1:], half, axis=-1)], axis=-1)
    csum = np.cumsum(padded, axis=-1)
    csum = np.concatenate([np.zeros(csum.shape[:-1] + (1,)), csum], axis=-1)
    trend = (csum[..., kernel:] - csum[..., :-kernel]) / kernel
    trend = np.moveaxis(trend, -1, axis)
    return trend, x - trend


@dataclass
class LinearForecaster:
    """Channel-shared linear map from an ``l_in`` lookback to an ``l_out`` horizon.

    ``plain`` uses only the trend branch as its single weight matrix; ``decomposed``
    feeds the moving-average trend and the seasonal remainder through separate maps.
    """

    kind: Literal["plain", "decomposed"]
    l_in: int
    l_out: int
    c: int
    trend_weights: np.ndarray
    trend_bias: np.ndarray
    seasonal_weights: np.ndarray | None = None
    seasonal_bias: np.ndarray | None = None
    ma_kernel: int = 25

    def __post_init__(self):
        if self.kind not in ("plain", "decomposed"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        shape = (self.l_out, self.l_in)
        if self.trend_weights.shape != shape or self.trend_bias.shape != (self.l_out,):
            raise ValueError(f"weights must have shape {shape}")
        if self.kind == "decomposed":
            if self.seasonal_weights is None or self.seasonal_weights.shape != shape:
                raise ValueError(f"seasonal weights must have shape {shape}")
            if self.seasonal_bias is None or self.seasonal_bias.shape != (self.l_out,):
                raise ValueError(f"seasonal bias must have length {self.l_out}")
            if self.ma_kernel < 1 or self.ma_kernel % 2 == 0 or self.ma_kernel > 2 * self.l_in - 1:
                raise ValueError(f"ma_kernel must be odd, >= 1 and <= 2*l_in-1, got {self.ma_kernel}")

    @property
    def param_names(self) -> tuple[str, ...]:
        if self.kind == "plain":
            return ("trend_weights", "trend_bias")
        return ("trend_weights", "trend_bias", "seasonal_weights", "seasonal_bias")

    def params(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in self.param_names}

    def copy(self) -> "LinearForecaster":
        kw = {k: (v.copy() if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()}
        return LinearForecaster(**kw)

    def to_dict(self) -> dict:
        out = {"format": CHECKPOINT_FORMAT, "kind": self.kind, "l_in": self.l_in, "l_out": self.l_out,
               "c": self.c, "ma_kernel": self.ma_kernel}
        for k in self.param_names:
            out[k] = getattr(self, k).ravel().tolist()  # row-major
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "LinearForecaster":
        if d.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"unrecognized checkpoint format {d.get('format')!r}")
        l_in, l_out = int(d["l_in"]), int(d["l_out"])
        kw = dict(kind=d["kind"], l_in=l_in, l_out=l_out, c=int(d["c"]), ma_kernel=int(d["ma_kernel"]))
        for k in ("trend", "seasonal"):
            if f"{k}_weights" in d:
                kw[f"{k}_weights"] = np.asarray(d[f"{k}_weights"], dtype=float).reshape(l_out, l_in)
                kw[f"{k}_bias"] = np.asarray(d[f"{k}_bias"], dtype=float).reshape(l_out)
        return cls(**kw)


def init_model(kind: str, l_in: int, l_out: int, c: int, ma_kernel: int = 25, seed: int | None = None) -> LinearForecaster:
    """Uniform-average initialization: every weight ``1/l_in``, biases zero.

    ``seed`` is accepted for interface symmetry; initialization is deterministic.
    """
    if min(l_in, l_out, c) < 1:
        raise ValueError(f"dimensions must be >= 1, got l_in={l_in}, l_out={l_out}, c={c}")
    W = np.full((l_out, l_in), 1.0 / l_in)
    b = np.zeros(l_out)
    if kind == "plain":
        return LinearForecaster("plain", l_in, l_out, c, W, b, ma_kernel=ma_kernel)
    if kind == "decomposed":
        return LinearForecaster("decomposed", l_in, l_out, c, W, b, W.copy(), b.copy(), ma_kernel)
    raise ValueError(f"unknown model kind {kind!r}")


def _check_inputs(model: LinearForecaster, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 3 or X.shape[1] != model.l_in:
        raise ValueError(f"expected inputs of shape (B, {model.l_in}, c), got {X.shape}")
    return X


def _linear(W, b, X):
    return np.matmul(W, X) + b[None, :, None]


def forward(model: LinearForecaster, X) -> np.ndarray:
    X = _check_inputs(model, X)
    if model.kind == "plain":
        return _linear(model.trend_weights, model.trend_bias, X)
    trend, seasonal = moving_average_decompose(X, model.ma_kernel, axis=1)
    return (_linear(model.trend_weights, model.trend_bias, trend)
            + _linear(model.seasonal_weights, model.seasonal_bias, seasonal))


def parameter_gradients(model: LinearForecaster, X: np.ndarray, grad_out: np.ndarray) -> dict[str, np.ndarray]:
    """Chain rule through the linear maps given ``dL/dY_hat``."""
    if model.kind == "plain":
        branches = {"trend": X}
    else:
        trend, seasonal = moving_average_decompose(X, model.ma_kernel, axis=1)
        branches = {"trend": trend, "seasonal": seasonal}
    grads = {}
    for name, inp in branches.items():
        # sum_b G_b @ X_b^T as one matrix product over the flattened (batch, channel) axis
        G = grad_out.transpose(1, 0, 2).reshape(grad_out.shape[1], -1)
        Xf = inp.transpose(1, 0, 2).reshape(inp.shape[1], -1)
        grads[f"{name}_weights"] = G @ Xf.T
        grads[f"{name}_bias"] = grad_out.sum(axis=(0, 2))
    return grads


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 20
    batch_size: int = 32
    patience: int = 3
    seed: int = 0
    optimizer: Literal["sgd", "adaptive_moments"] = "adaptive_moments"
    moment_decays: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    lr_decay: float = 0.5  # per-epoch multiplier; halving matches common forecasting codebases

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1 or self.patience < 0:
            raise ValueError("epochs and batch_size must be >= 1, patience >= 0")
        if self.optimizer not in ("sgd", "adaptive_moments"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not 0 < self.lr_decay <= 1:
            raise ValueError("lr_decay must lie in (0, 1]")


@dataclass
class TrainHistory:
    epoch_train_loss: list[float] = field(default_factory=list)
    epoch_val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0

    def to_dict(self) -> dict:
        return {"epoch_train_loss": self.epoch_train_loss, "epoch_val_loss": self.epoch_val_loss,
                "best_epoch": self.best_epoch}


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float, decays=(0.9, 0.999), eps: float = 1e-8):
        self.lr = lr
        self.b1, self.b2 = decays
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        self.t += 1
        c1 = 1 - self.b1 ** self.t
        c2 = 1 - self.b2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


class SGD:
    def __init__(self, params, lr: float):
        self.lr = lr

    def step(self, params, grads):
        for k, g in grads.items():
            params[k] -= self.lr * g


def _make_optimizer(params, cfg: TrainConfig):
    if cfg.optimizer == "sgd":
        return SGD(params, cfg.learning_rate)
    return Adam(params, cfg.learning_rate, cfg.moment_decays, cfg.adam_eps)


def _check_windows(model: LinearForecaster, ws: WindowSet, label: str):
    if len(ws) == 0:
        raise ValueError(f"{label} window set is empty")
    if ws.inputs.shape[1:] != (model.l_in, model.c) or ws.labels.shape[1:] != (model.l_out, model.c):
        raise ValueError(f"{label} windows {ws.inputs.shape[1:]} -> {ws.labels.shape[1:]} do not match model "
                         f"({model.l_in}, {model.c}) -> ({model.l_out}, {model.c})")


def objective_value(model: LinearForecaster, ws: WindowSet, objective, chunk: int = 512) -> float:
    """Objective over a whole window set; chunked means are recombined exactly."""
    objective = as_objective(objective)
    total, n = 0.0, len(ws)
    for s in range(0, n, chunk):
        part = ws.subset(slice(s, s + chunk))
        total += objective.value(forward(model, part.inputs), part.labels) * len(part)
    return total / n


def train(model: LinearForecaster, train_windows: WindowSet, val_windows: WindowSet,
          loss: str | LossSpec | Objective = "mse", cfg: TrainConfig | None = None):
    """Mini-batch training with early stopping on the validation objective.

    Returns ``(best_model, history)`` where ``best_model`` holds the weights of
    the epoch with the lowest validation loss. ``patience=0`` disables early
    stopping.
    """
    cfg = cfg or TrainConfig()
    objective = as_objective(loss)
    _check_windows(model, train_windows, "train")
    _check_windows(model, val_windows, "validation")
    model = model.copy()
    params = model.params()
    opt = _make_optimizer(params, cfg)
    rng = np.random.default_rng(cfg.seed)
    history = TrainHistory()
    best, best_val, stale = model.copy(), math.inf, 0
    B = len(train_windows)

    for epoch in range(cfg.epochs):
        order = rng.permutation(B)
        for s in range(0, B, cfg.batch_size):
            batch = train_windows.subset(order[s:s + cfg.batch_size])
            pred = forward(model, batch.inputs)
            g_out = objective.gradient(pred, batch.labels)
            opt.step(params, parameter_gradients(model, batch.inputs, g_out))
        opt.lr *= cfg.lr_decay

        train_loss = objective_value(model, train_windows, objective)
        val_loss = objective_value(model, val_windows, objective)
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            raise TrainingError(f"non-finite loss at epoch {epoch} (train={train_loss}, val={val_loss}, "
                                f"objective={objective.name}, lr={opt.lr:g}); try a smaller learning rate")
        history.epoch_train_loss.append(train_loss)
        history.epoch_val_loss.append(val_loss)
        if val_loss < best_val:
            best_val, best, stale = val_loss, model.copy(), 0
            history.best_epoch = epoch
        else:
            stale += 1
            if cfg.patience and stale >= cfg.patience:
                break
    return best, history


def evaluate(model: LinearForecaster, windows: WindowSet, chunk: int = 512) -> tuple[float, float]:
    """Mean squared and mean absolute error over every element of every window."""
    _check_windows(model, windows, "evaluation")
    se = ae = 0.0
    for s in range(0, len(windows), chunk):
        part = windows.subset(slice(s, s + chunk))
        d = forward(model, part.inputs) - part.labels
        se += float(np.sum(d * d))
        ae += float(np.sum(np.abs(d)))
    n = windows.labels.size
    return se / n, ae / n


def save_checkpoint(model: LinearForecaster, path, extra: dict | None = None):
    payload = model.to_dict()
    if extra:
        payload["provenance"] = extra
    Path(path).write_text(json.dumps(payload, indent=1))


def load_checkpoint(path) -> LinearForecaster:
    return LinearForecaster.from_dict(json.loads(Path(path).read_text()))
