"""Time-domain losses and the OLMA frequency-domain loss with analytic gradients.

Every OLMA term is an L1 norm (sum of complex moduli) of a linear transform of
``prediction - label``. Sums run over all coefficients of one batch item; the
batch is reduced by its mean.

Shapes are ``(B, l_out, c)`` throughout: axis 1 is time, axis 2 is channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transforms import dft_adjoint_along, dft_along, haar_dwt_along, haar_idwt_along

TIME_AXIS, CHANNEL_AXIS = 1, 2


@dataclass(frozen=True)
class LossSpec:
    alpha: float = 0.34
    beta: float = 0.33
    gamma: float = 0.33
    include_channel: bool = True
    include_temporal: bool = True
    smoothing_eps: float = 1e-12

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError(f"loss weights must be non-negative: {self.weights}")
        if self.include_channel and self.include_temporal and abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"alpha + beta + gamma must equal 1, got {sum(self.weights)!r}")
        if not self.smoothing_eps > 0:
            raise ValueError("smoothing_eps must be positive")

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    @classmethod
    def equal(cls, **kw) -> "LossSpec":
        return cls(0.34, 0.33, 0.33, **kw)

    @classmethod
    def high_channel_entropy(cls, **kw) -> "LossSpec":
        """Preset that down-weights the channel term for data where the channel DFT raises entropy."""
        return cls(0.1, 0.45, 0.45, **kw)

    @classmethod
    def from_channel_share(cls, share: float, **kw) -> "LossSpec":
        """Channel weight ``share``; the remainder split evenly between the temporal terms."""
        rest = (1.0 - share) / 2
        return cls(share, rest, rest, **kw)

    @classmethod
    def from_config(cls, cfg: dict) -> "LossSpec":
        """Build from flat ``loss.*`` keys (alpha, beta, gamma, include_channel, include_temporal, eps)."""
        def flag(v):
            if isinstance(v, str):
                return v.strip().lower() in ("1", "true", "yes", "on")
            return bool(v)
        d = cls()
        return cls(
            alpha=float(cfg.get("loss.alpha", d.alpha)),
            beta=float(cfg.get("loss.beta", d.beta)),
            gamma=float(cfg.get("loss.gamma", d.gamma)),
            include_channel=flag(cfg.get("loss.include_channel", d.include_channel)),
            include_temporal=flag(cfg.get("loss.include_temporal", d.include_temporal)),
            smoothing_eps=float(cfg.get("loss.eps", d.smoothing_eps)),
        )


def _diff(prediction, label) -> np.ndarray:
    pred = np.asarray(prediction, dtype=float)
    lab = np.asarray(label, dtype=float)
    if pred.shape != lab.shape:
        raise ValueError(f"prediction shape {pred.shape} differs from label shape {lab.shape}")
    if pred.ndim != 3:
        raise ValueError(f"expected (B, l_out, c) tensors, got shape {pred.shape}")
    return pred - lab


def time_domain_loss(prediction, label, kind: str = "mse") -> float:
    d = _diff(prediction, label)
    if kind == "mse":
        return float(np.mean(d * d))
    if kind == "mae":
        return float(np.mean(np.abs(d)))
    raise ValueError(f"unknown time-domain loss {kind!r}")


def time_domain_gradient(prediction, label, kind: str = "mse") -> np.ndarray:
    d = _diff(prediction, label)
    if kind == "mse":
        return 2.0 * d / d.size
    if kind == "mae":
        return np.sign(d) / d.size
    raise ValueError(f"unknown time-domain loss {kind!r}")


# Per-item terms, shape (B,). Public losses are their batch means.

def _channel_items(d: np.ndarray) -> np.ndarray:
    return np.abs(dft_along(d, axis=CHANNEL_AXIS)).sum(axis=(1, 2))


def _fourier_items(d: np.ndarray) -> np.ndarray:
    return np.abs(dft_along(d, axis=TIME_AXIS)).sum(axis=(1, 2))


def _wavelet_items(d: np.ndarray) -> np.ndarray:
    cA, cD = haar_dwt_along(d, axis=TIME_AXIS)
    return np.abs(cA).sum(axis=(1, 2)) + np.abs(cD).sum(axis=(1, 2))


def olma_channel_loss(prediction, label) -> float:
    d = _diff(prediction, label)
    return float(np.mean(_channel_items(d)))


def olma_temporal_loss(prediction, label, wavelet: bool = True) -> tuple[float, float]:
    """Return ``(fourier_term, wavelet_term)``; the wavelet term needs an even horizon."""
    d = _diff(prediction, label)
    fourier = float(np.mean(_fourier_items(d)))
    if not wavelet:
        return fourier, 0.0
    if d.shape[TIME_AXIS] % 2:
        raise ValueError(f"wavelet term needs an even horizon, got l_out={d.shape[TIME_AXIS]}")
    return fourier, float(np.mean(_wavelet_items(d)))


def olma_items(prediction, label, spec: LossSpec) -> np.ndarray:
    """Per-batch-item OLMA objective (before the batch mean)."""
    d = _diff(prediction, label)
    total = np.zeros(d.shape[0])
    if spec.include_channel and spec.alpha:
        total += spec.alpha * _channel_items(d)
    if spec.include_temporal:
        if spec.beta:
            total += spec.beta * _fourier_items(d)
        if spec.gamma:
            if d.shape[TIME_AXIS] % 2:
                raise ValueError(f"wavelet term needs an even horizon, got l_out={d.shape[TIME_AXIS]}")
            total += spec.gamma * _wavelet_items(d)
    return total


def olma_total(prediction, label, spec: LossSpec | None = None) -> float:
    spec = spec or LossSpec()
    return float(np.mean(olma_items(prediction, label, spec)))


def _smoothed_sign(z: np.ndarray, eps: float) -> np.ndarray:
    return z / np.sqrt(np.abs(z) ** 2 + eps * eps)


def olma_gradient(prediction, label, spec: LossSpec | None = None) -> np.ndarray:
    """Gradient of ``olma_total`` with respect to ``prediction``.

    Each modulus is smoothed as ``sqrt(|z|^2 + eps^2)``, so the per-coefficient
    derivative is ``z / |z|_eps``; the transform adjoint maps it back to the
    time/channel grid and the real part is kept.
    """
    spec = spec or LossSpec()
    d = _diff(prediction, label)
    eps = spec.smoothing_eps
    grad = np.zeros_like(d)
    if spec.include_channel and spec.alpha:
        z = dft_along(d, axis=CHANNEL_AXIS)
        grad += spec.alpha * np.real(dft_adjoint_along(_smoothed_sign(z, eps), axis=CHANNEL_AXIS))
    if spec.include_temporal:
        if spec.beta:
            z = dft_along(d, axis=TIME_AXIS)
            grad += spec.beta * np.real(dft_adjoint_along(_smoothed_sign(z, eps), axis=TIME_AXIS))
        if spec.gamma:
            cA, cD = haar_dwt_along(d, axis=TIME_AXIS)
            # Haar is orthogonal: its adjoint is the inverse
            grad += spec.gamma * haar_idwt_along(_smoothed_sign(cA, eps), _smoothed_sign(cD, eps), axis=TIME_AXIS)
    return grad / d.shape[0]


class Objective:
    """Training objective: a time-domain loss name or an OLMA ``LossSpec``."""

    def __init__(self, loss: str | LossSpec = "mse"):
        if isinstance(loss, str) and loss not in ("mse", "mae"):
            raise ValueError(f"unknown loss {loss!r}")
        self.loss = loss

    @property
    def name(self) -> str:
        return self.loss if isinstance(self.loss, str) else "olma"

    def value(self, prediction, label) -> float:
        if isinstance(self.loss, LossSpec):
            return olma_total(prediction, label, self.loss)
        return time_domain_loss(prediction, label, self.loss)

    def gradient(self, prediction, label) -> np.ndarray:
        if isinstance(self.loss, LossSpec):
            return olma_gradient(prediction, label, self.loss)
        return time_domain_gradient(prediction, label, self.loss)

    def __repr__(self):
        return f"Objective({self.loss!r})"


def as_objective(loss) -> Objective:
    return loss if isinstance(loss, Objective) else Objective(loss)
