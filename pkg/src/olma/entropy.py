"""Histogram entropy estimators and the closed-form Gaussian marginal entropy.

All entropies are in nats unless a report is converted with ``base=2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .data import TimeSeriesFrame
from .transforms import dft_along

DEFAULT_BINS = 16


def bin_indices(x: np.ndarray, M: int) -> np.ndarray:
    """Equal-width bin index of each sample over ``[min, max]``; the max lands in the last bin."""
    x = np.asarray(x, dtype=float)
    lo, hi = x.min(), x.max()
    if hi <= lo:
        return np.zeros(x.shape, dtype=np.int64)
    idx = np.floor((x - lo) / (hi - lo) * M).astype(np.int64)
    return np.clip(idx, 0, M - 1)


def _entropy_from_counts(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    # a single occupied bin gives exactly zero rather than -0.0
    if p.size <= 1:
        return 0.0
    return float(-np.sum(p * np.log(p)))


def histogram_entropy(seq, M: int = DEFAULT_BINS) -> float:
    x = np.asarray(seq, dtype=float).ravel()
    if x.size < 1:
        raise ValueError("entropy of an empty sequence")
    if M < 1:
        raise ValueError(f"bin count must be >= 1, got {M}")
    return _entropy_from_counts(np.bincount(bin_indices(x, M), minlength=M), x.size)


def joint_entropy_2d(first, second, M: int = DEFAULT_BINS) -> float:
    """Entropy of the ``M x M`` equal-width grid histogram of paired samples.

    Each axis is binned over its own ``[min, max]``.
    """
    a = np.asarray(first, dtype=float).ravel()
    b = np.asarray(second, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"pair coordinates differ in length: {a.size} vs {b.size}")
    if a.size < 1:
        raise ValueError("entropy of an empty sequence")
    if M < 1:
        raise ValueError(f"bin count must be >= 1, got {M}")
    cell = bin_indices(a, M) * M + bin_indices(b, M)
    return _entropy_from_counts(np.bincount(cell, minlength=M * M), a.size)


def complex_entropy(z, M: int = DEFAULT_BINS) -> float:
    z = np.asarray(z)
    return joint_entropy_2d(z.real, z.imag, M)


def gaussian_marginal_entropy_sum(cov, l: int) -> float:
    """Sum of the marginal differential entropies of ``c`` i.i.d.-in-time Gaussian processes.

    ``(l/2) * ln((2 pi e)^c * prod_i cov[i, i])``, computed in log space.
    """
    cov = np.asarray(cov)
    diag = np.real(np.diag(cov))
    if np.any(diag <= 0):
        raise ValueError("covariance diagonal must be positive")
    c = diag.size
    return 0.5 * l * (c * math.log(2 * math.pi * math.e) + float(np.sum(np.log(diag))))


@dataclass
class EntropyReport:
    segment_starts: list[int]
    original_entropy: list[float]
    transformed_entropy: list[float]
    bins: int
    segment_length: int
    spectrum: str = "onesided"
    base: str = "e"

    def fraction_reduced(self) -> float:
        pairs = list(zip(self.original_entropy, self.transformed_entropy))
        return sum(t < o for o, t in pairs) / len(pairs) if pairs else 0.0

    def in_base2(self) -> "EntropyReport":
        if self.base == "2":
            return self
        k = 1.0 / math.log(2.0)
        return EntropyReport(self.segment_starts, [h * k for h in self.original_entropy],
                             [h * k for h in self.transformed_entropy], self.bins,
                             self.segment_length, self.spectrum, "2")

    def to_dict(self) -> dict:
        return {
            "segment_length": self.segment_length,
            "bins": self.bins,
            "spectrum": self.spectrum,
            "log_base": self.base,
            "segments": [{"start": s, "original": o, "transformed": t} for s, o, t in
                         zip(self.segment_starts, self.original_entropy, self.transformed_entropy)],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def channel_spectrum_entropy(segment: np.ndarray, M: int = DEFAULT_BINS,
                             spectrum: Literal["onesided", "full"] = "onesided") -> float:
    """Marginal entropy after an orthonormal DFT across channels at every time step.

    Frequency index ``k`` yields a complex sequence over time, scored with the
    2-D joint histogram of its real and imaginary parts. For real input, bin
    ``c - k`` is the conjugate of bin ``k`` and carries no new information;
    ``"onesided"`` keeps only ``k = 0 .. c // 2``, ``"full"`` sums all ``c`` bins.
    """
    F = dft_along(segment, axis=1, normalization="orthonormal")
    c = segment.shape[1]
    if spectrum == "onesided":
        ks = range(c // 2 + 1)
    elif spectrum == "full":
        ks = range(c)
    else:
        raise ValueError(f"unknown spectrum mode {spectrum!r}")
    return sum(complex_entropy(F[:, k], M) for k in ks)


def segment_entropy_scan(frame: TimeSeriesFrame, seg_len: int = 96, M: int = DEFAULT_BINS,
                         spectrum: Literal["onesided", "full"] = "onesided") -> EntropyReport:
    if seg_len < 1:
        raise ValueError(f"segment length must be >= 1, got {seg_len}")
    if frame.T < seg_len:
        raise ValueError(f"series of length {frame.T} shorter than segment length {seg_len}")
    starts, orig, trans = [], [], []
    for s in range(0, frame.T - seg_len + 1, seg_len):
        seg = frame.values[s:s + seg_len]
        starts.append(s)
        orig.append(sum(histogram_entropy(seg[:, i], M) for i in range(frame.c)))
        trans.append(channel_spectrum_entropy(seg, M, spectrum))
    return EntropyReport(starts, orig, trans, M, seg_len, spectrum)
