"""Seeded synthetic series used by the CLI and the test-suite."""

from __future__ import annotations

import zlib

import numpy as np

from .data import TimeSeriesFrame, WindowSet


def sub_seed(seed: int, name: str) -> int:
    """Derive an independent named stream from one master seed."""
    return int(np.random.SeedSequence([seed, zlib.crc32(name.encode())]).generate_state(1)[0])


def shared_sinusoid_frame(T: int = 9600, c: int = 8, period: float = 24.0, noise: float = 0.1,
                          seed: int = 0, amplitude_spread: bool = False) -> TimeSeriesFrame:
    """``c`` channels carrying one common sinusoid plus small independent Gaussian noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(T)
    base = np.sin(2 * np.pi * t / period + rng.uniform(0, 2 * np.pi))
    amp = rng.uniform(0.5, 2.0, c) if amplitude_spread else np.ones(c)
    values = base[:, None] * amp[None, :] + noise * rng.standard_normal((T, c))
    return TimeSeriesFrame.from_array(values)


def trend_plus_highfreq(T: int = 2000, c: int = 1, slope: float = 0.01, hf_amp: float = 0.3,
                        hf_period: float = 4.0, noise: float = 0.1, seed: int = 0) -> TimeSeriesFrame:
    """Strong linear trend + weak high-frequency sinusoid + white noise, per channel."""
    rng = np.random.default_rng(seed)
    t = np.arange(T)[:, None]
    slopes = slope * rng.uniform(0.8, 1.2, c)
    phases = rng.uniform(0, 2 * np.pi, c)
    values = (slopes * t + hf_amp * np.sin(2 * np.pi * t / hf_period + phases)
              + noise * rng.standard_normal((T, c)))
    return TimeSeriesFrame.from_array(values)


def multi_sinusoid(T: int = 3000, c: int = 3, noise: float = 0.2, seed: int = 0) -> TimeSeriesFrame:
    """Channels mixing a daily-like and a weekly-like cycle with a slow drift and noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(T)[:, None]
    mix = rng.uniform(0.5, 1.5, (2, c))
    values = (mix[0] * np.sin(2 * np.pi * t / 24 + rng.uniform(0, 6, c))
              + mix[1] * np.sin(2 * np.pi * t / 168 + rng.uniform(0, 6, c))
              + 0.0005 * t + noise * rng.standard_normal((T, c)))
    return TimeSeriesFrame.from_array(values)


def random_walk(T: int, c: int = 1, step: float = 1.0, seed: int = 0) -> TimeSeriesFrame:
    rng = np.random.default_rng(seed)
    return TimeSeriesFrame.from_array(np.cumsum(step * rng.standard_normal((T, c)), axis=0))


def ar1(N: int, phi: float, seed: int = 0, sigma: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    e = sigma * rng.standard_normal(N + 200)
    x = np.empty_like(e)
    x[0] = e[0]
    for k in range(1, len(e)):
        x[k] = phi * x[k - 1] + e[k]
    return x[200:]  # drop burn-in


def realizable_windows(n: int, l_in: int, l_out: int, c: int, seed: int = 0,
                       weights: np.ndarray | None = None, bias: np.ndarray | None = None):
    """Windows whose labels are an exact channel-shared linear map of the inputs.

    Returns ``(windows, weights, bias)``.
    """
    rng = np.random.default_rng(seed)
    if weights is None:
        weights = rng.normal(0, 1 / np.sqrt(l_in), (l_out, l_in))
    if bias is None:
        bias = rng.normal(0, 0.1, l_out)
    X = rng.standard_normal((n, l_in, c))
    Y = np.einsum("oi,bic->boc", weights, X) + bias[None, :, None]
    return WindowSet(X, Y, np.arange(n)), weights, bias


SYNTHETIC = {
    "trend": trend_plus_highfreq,
    "sinusoid": shared_sinusoid_frame,
    "mixed": multi_sinusoid,
}


def synthetic_frame(name: str, seed: int = 0, **kw) -> TimeSeriesFrame:
    try:
        gen = SYNTHETIC[name]
    except KeyError:
        raise ValueError(f"unknown synthetic dataset {name!r}; choose from {sorted(SYNTHETIC)}") from None
    return gen(seed=seed, **kw)
