"""DFT, single-level Haar DWT and a principal-logarithm path on the unitary group."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg

Normalization = Literal["unnormalized", "orthonormal"]

_NORM = {"unnormalized": "backward", "orthonormal": "ortho"}
SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class Spectrum:
    re: np.ndarray
    im: np.ndarray
    normalization: Normalization = "unnormalized"

    def __post_init__(self):
        if self.re.shape != self.im.shape:
            raise ValueError(f"re/im length mismatch: {self.re.shape} vs {self.im.shape}")
        if self.normalization not in _NORM:
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def values(self) -> np.ndarray:
        return self.re + 1j * self.im

    def __len__(self):
        return len(self.re)


@dataclass(frozen=True)
class WaveletCoeffs:
    cA: np.ndarray
    cD: np.ndarray

    def __post_init__(self):
        if self.cA.shape != self.cD.shape:
            raise ValueError(f"cA/cD length mismatch: {self.cA.shape} vs {self.cD.shape}")

    def concat(self) -> np.ndarray:
        """Coefficients laid out as ``[cA_1..cA_n, cD_1..cD_n]``."""
        return np.concatenate([self.cA, self.cD])


def _check_norm(normalization: str) -> str:
    try:
        return _NORM[normalization]
    except KeyError:
        raise ValueError(f"unknown normalization {normalization!r}") from None


def dft_along(x: np.ndarray, axis: int = -1, normalization: Normalization = "unnormalized") -> np.ndarray:
    """Complex DFT of ``x`` along ``axis`` with the sign convention e^{-2 pi i k m / n}."""
    x = np.asarray(x)
    if x.shape[axis] == 0:
        raise ValueError("DFT of an empty sequence")
    return np.fft.fft(x, axis=axis, norm=_check_norm(normalization))


def idft_along(X: np.ndarray, axis: int = -1, normalization: Normalization = "unnormalized") -> np.ndarray:
    X = np.asarray(X)
    if X.shape[axis] == 0:
        raise ValueError("inverse DFT of an empty sequence")
    return np.fft.ifft(X, axis=axis, norm=_check_norm(normalization))


def dft_adjoint_along(W: np.ndarray, axis: int = -1, normalization: Normalization = "unnormalized") -> np.ndarray:
    """Apply the conjugate transpose of the DFT matrix along ``axis``.

    For the unnormalized transform this is ``n * idft``; for the orthonormal one
    the adjoint is the inverse.
    """
    n = W.shape[axis]
    out = idft_along(W, axis=axis, normalization=normalization)
    return out * n if normalization == "unnormalized" else out


def dft(seq, normalization: Normalization = "unnormalized") -> Spectrum:
    x = np.asarray(seq)
    if x.ndim != 1:
        raise ValueError(f"dft expects a vector, got shape {x.shape}")
    X = dft_along(x, normalization=normalization)
    return Spectrum(X.real.copy(), X.imag.copy(), normalization)


def idft(spec: Spectrum) -> np.ndarray:
    return idft_along(spec.values, normalization=spec.normalization)


def haar_dwt_along(x: np.ndarray, axis: int = -1) -> tuple[np.ndarray, np.ndarray]:
    """Single-level orthonormal Haar step over consecutive disjoint pairs along ``axis``."""
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    n = x.shape[-1]
    if n < 2 or n % 2:
        raise ValueError(f"Haar DWT needs an even length >= 2, got {n}")
    odd, even = x[..., 0::2], x[..., 1::2]
    cA = (odd + even) / SQRT2
    cD = (odd - even) / SQRT2
    return np.moveaxis(cA, -1, axis), np.moveaxis(cD, -1, axis)


def haar_idwt_along(cA: np.ndarray, cD: np.ndarray, axis: int = -1) -> np.ndarray:
    cA = np.moveaxis(np.asarray(cA, dtype=float), axis, -1)
    cD = np.moveaxis(np.asarray(cD, dtype=float), axis, -1)
    if cA.shape != cD.shape:
        raise ValueError(f"cA/cD shape mismatch: {cA.shape} vs {cD.shape}")
    out = np.empty(cA.shape[:-1] + (2 * cA.shape[-1],))
    out[..., 0::2] = (cA + cD) / SQRT2
    out[..., 1::2] = (cA - cD) / SQRT2
    return np.moveaxis(out, -1, axis)


def haar_dwt(seq) -> WaveletCoeffs:
    x = np.asarray(seq, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"haar_dwt expects a vector, got shape {x.shape}")
    cA, cD = haar_dwt_along(x)
    return WaveletCoeffs(cA, cD)


def haar_idwt(coeffs: WaveletCoeffs) -> np.ndarray:
    return haar_idwt_along(coeffs.cA, coeffs.cD)


def unitarity_defect(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))))


def is_unitary(U: np.ndarray, tol: float = 1e-9) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[0] == U.shape[1] and unitarity_defect(U) <= tol


def eigenphases(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(V, theta)`` with ``U = V diag(exp(i theta)) V*`` and theta in (-pi, pi].

    The complex Schur form of a normal matrix is diagonal, which keeps V unitary
    even when eigenvalues repeat (a plain ``eig`` call does not guarantee that).
    """
    T, V = scipy.linalg.schur(np.asarray(U, dtype=complex), output="complex")
    theta = np.angle(np.diag(T))
    theta = np.where(theta <= -np.pi + 1e-15, np.pi, theta)
    return V, theta


def unitary_log_path(U: np.ndarray, lam: float, tol: float = 1e-8) -> np.ndarray:
    """Point ``phi(lam)`` on the path ``phi(0) = I`` to ``phi(1) = U``.

    Uses the principal logarithm: ``phi(lam) = V diag(exp(i lam theta)) V*``.
    """
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {U.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if not is_unitary(U, tol):
        raise ValueError(f"matrix is not unitary (max |UU* - I| = {unitarity_defect(U):.3e})")
    if lam == 0.0:
        return np.eye(U.shape[0], dtype=complex)
    V, theta = eigenphases(U)
    return (V * np.exp(1j * lam * theta)) @ V.conj().T
