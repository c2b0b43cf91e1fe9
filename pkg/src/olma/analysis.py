"""Frequency-band error diagnostics and residual-on-residual (DML) causal correlation."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

from .transforms import dft_along

Domain = Literal["time", "frequency_real", "frequency_imag"]


@dataclass
class BandErrorReport:
    band_edges: list[tuple[int, int]]  # half-open [lo, hi) bin ranges
    band_error: list[float]
    n_bands: int

    @property
    def bin_counts(self) -> list[int]:
        return [hi - lo for lo, hi in self.band_edges]

    def to_dict(self) -> dict:
        return {"n_bands": self.n_bands, "band_edges": [list(e) for e in self.band_edges],
                "band_error": self.band_error}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment:
            for line in comment.splitlines():
                buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["band_index", "error"])
        for i, e in enumerate(self.band_error):
            w.writerow([i, repr(e)])
        return buf.getvalue()


def band_partition(n_bins: int, n_bands: int) -> list[tuple[int, int]]:
    """Contiguous near-equal ranges over ``n_bins`` bins; leftover bins go to the lowest bands."""
    if not 1 <= n_bands <= n_bins:
        raise ValueError(f"n_bands must lie in [1, {n_bins}], got {n_bands}")
    base, extra = divmod(n_bins, n_bands)
    edges, lo = [], 0
    for b in range(n_bands):
        hi = lo + base + (1 if b < extra else 0)
        edges.append((lo, hi))
        lo = hi
    return edges


def spectral_abs_error(prediction, label) -> np.ndarray:
    """``|DFT(pred) - DFT(label)|`` over non-negative frequency bins, shape ``(B, l_out//2 + 1, c)``."""
    pred = np.asarray(prediction, dtype=float)
    lab = np.asarray(label, dtype=float)
    if pred.shape != lab.shape or pred.ndim != 3:
        raise ValueError(f"expected matching (B, l_out, c) tensors, got {pred.shape} and {lab.shape}")
    n_pos = pred.shape[1] // 2 + 1
    return np.abs(dft_along(pred - lab, axis=1))[:, :n_pos, :]


def band_errors(prediction, label, n_bands: int = 4) -> BandErrorReport:
    err = spectral_abs_error(prediction, label)
    edges = band_partition(err.shape[1], n_bands)
    return BandErrorReport(edges, [float(err[:, lo:hi, :].mean()) for lo, hi in edges], n_bands)


class OLSFit(NamedTuple):
    coef: np.ndarray
    intercept: float

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept


class Residualizer:
    """Ridge-regularized least squares on a fixed design; the intercept is not penalized.

    The Gram system is factored once so many targets can be residualized
    against the same confounders cheaply.
    """

    def __init__(self, X, ridge: float = 1e-8):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        n, p = X.shape
        if n < 1 or p < 1:
            raise ValueError(f"design needs n >= 1 rows and p >= 1 columns, got {X.shape}")
        self.X = X
        self.mean = X.mean(axis=0)
        Xc = X - self.mean
        gram = Xc.T @ Xc + ridge * np.eye(p)
        try:
            self._cho = scipy.linalg.cho_factor(gram)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise np.linalg.LinAlgError("singular least-squares system; increase ridge") from exc
        self._Xc = Xc

    def fit(self, y) -> OLSFit:
        y = np.asarray(y, dtype=float)
        coef = scipy.linalg.cho_solve(self._cho, self._Xc.T @ (y - y.mean()))
        return OLSFit(coef, float(y.mean() - self.mean @ coef))

    def residuals(self, y) -> np.ndarray:
        """``prediction - y`` for the fitted model."""
        y = np.asarray(y, dtype=float)
        return self.fit(y).predict(self.X) - y


def ols_fit(X, y, ridge: float = 1e-8) -> OLSFit:
    """Least squares with an appended (unpenalized) intercept column."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(np.asarray(y)) != X.shape[0]:
        raise ValueError("X and y have different numbers of rows")
    return Residualizer(X, ridge).fit(y)


class DegenerateTreatment(ValueError):
    pass


def _design(x: np.ndarray, w: int, t: int, t_prime: int, T_vis: int):
    """Sample positions and confounder columns for one (t, t') pair.

    Positions run over ``i = w .. N - T_vis - 1``. Confounders are the ``2w``
    neighbours of ``x_i``; a neighbour is dropped when it coincides with the
    treatment ``x_{i+t}`` or the outcome ``x_{i+t'}``.
    """
    N = len(x)
    i = np.arange(w, N - T_vis)
    i = i[i + t_prime < N]
    offsets = [o for o in range(-w, w + 1) if o not in (0, t, t_prime)]
    return i, offsets


def causal_effect(series, w: int = 2, t: int = 0, t_prime: int = 1, T_vis: int = 96,
                  ridge: float = 1e-8) -> float:
    """Residual-on-residual effect ``|Cov(t~, o~) / Var(t~)|`` of ``x_{i+t}`` on ``x_{i+t'}``."""
    x = np.asarray(series, dtype=float)
    if not 0 <= t < t_prime:
        raise ValueError(f"need 0 <= t < t', got t={t}, t'={t_prime}")
    if w < 1:
        raise ValueError(f"window must be >= 1, got {w}")
    i, offsets = _design(x, w, t, t_prime, T_vis)
    if len(i) < 2 * (2 * w + 1):
        raise ValueError(f"series too short: {len(i)} samples for w={w}, T_vis={T_vis}")
    C = np.stack([x[i + o] for o in offsets], axis=1)
    return _effect(Residualizer(C, ridge), x[i + t], x[i + t_prime])


def _effect(res: Residualizer, treatment: np.ndarray, outcome: np.ndarray) -> float:
    rt = res.residuals(treatment)
    ro = res.residuals(outcome)
    var = float(np.mean((rt - rt.mean()) ** 2))
    # relative to the treatment's own spread so the guard is scale-free
    if var <= 1e-12 * float(np.var(treatment)) or var < 1e-300:
        raise DegenerateTreatment("treatment fully explained by confounders")
    cov = float(np.mean((rt - rt.mean()) * (ro - ro.mean())))
    return abs(cov / var)


@dataclass
class CausalEffectMatrix:
    effects: np.ndarray  # (max_offset+1)^2, NaN off-support or where degenerate
    w: int
    T_vis: int
    domain: str

    @property
    def max_offset(self) -> int:
        return self.effects.shape[0] - 1

    def mean_effect(self) -> float:
        return float(np.nanmean(self.effects))

    def to_dict(self) -> dict:
        rows = [[None if np.isnan(v) else float(v) for v in row] for row in self.effects]
        return {"w": self.w, "T_vis": self.T_vis, "domain": self.domain, "effects": rows}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def frequency_series(x: np.ndarray, T_vis: int, part: Literal["real", "imag"]) -> np.ndarray:
    """Concatenated orthonormal DFT coefficients of non-overlapping length-``T_vis`` windows."""
    n_win = len(x) // T_vis
    if n_win < 1:
        raise ValueError(f"series of length {len(x)} shorter than T_vis={T_vis}")
    F = dft_along(x[:n_win * T_vis].reshape(n_win, T_vis), axis=1, normalization="orthonormal")
    return (F.real if part == "real" else F.imag).ravel()


def causal_matrix(series, w: int = 2, max_offset: int = 95, T_vis: int = 96,
                  domain: Domain = "time", ridge: float = 1e-8) -> CausalEffectMatrix:
    """Effects for every ``0 <= t < t' <= max_offset``; degenerate cells are NaN."""
    if max_offset >= T_vis:
        raise ValueError(f"max_offset ({max_offset}) must be < T_vis ({T_vis})")
    x = np.asarray(series, dtype=float)
    if domain == "frequency_real":
        x = frequency_series(x, T_vis, "real")
    elif domain == "frequency_imag":
        x = frequency_series(x, T_vis, "imag")
    elif domain != "time":
        raise ValueError(f"unknown domain {domain!r}")

    K = max_offset + 1
    effects = np.full((K, K), np.nan)
    cache: dict[tuple, tuple[np.ndarray, Residualizer]] = {}
    for t in range(K):
        for tp in range(t + 1, K):
            i, offsets = _design(x, w, t, tp, T_vis)
            key = (len(i), tuple(offsets))
            if key not in cache:
                if len(i) < 2 * (2 * w + 1):
                    raise ValueError(f"series too short: {len(i)} samples for w={w}, T_vis={T_vis}")
                C = np.stack([x[i + o] for o in offsets], axis=1)
                cache[key] = (i, Residualizer(C, ridge))
            i, res = cache[key]
            try:
                effects[t, tp] = _effect(res, x[i + t], x[i + tp])
            except DegenerateTreatment:
                pass
    return CausalEffectMatrix(effects, w, T_vis, domain)
