"""CSV ingestion, chronological splits, z-scoring and sliding windows."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class TimeSeriesFrame:
    """A ``T x c`` real series. ``step_index`` holds absolute row positions."""

    values: np.ndarray
    channel_names: list[str]
    step_index: np.ndarray = None
    timestamps: list[str] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DataError(f"frame needs shape (T>=1, c>=1), got {values.shape}")
        if not np.all(np.isfinite(values)):
            r, c = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {r}, channel {c}")
        if len(self.channel_names) != values.shape[1]:
            raise DataError(f"{len(self.channel_names)} channel names for {values.shape[1]} channels")
        step_index = (np.arange(values.shape[0]) if self.step_index is None
                      else np.asarray(self.step_index, dtype=int))
        if step_index.shape != (values.shape[0],):
            raise DataError("step_index length differs from number of rows")
        values.setflags(write=False)
        step_index.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "step_index", step_index)
        object.__setattr__(self, "channel_names", list(self.channel_names))

    @classmethod
    def from_array(cls, values, channel_names: Sequence[str] | None = None) -> "TimeSeriesFrame":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        names = list(channel_names) if channel_names is not None else [f"ch{i}" for i in range(values.shape[1])]
        return cls(values, names)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def c(self) -> int:
        return self.values.shape[1]

    def slice(self, start: int, stop: int) -> "TimeSeriesFrame":
        ts = self.timestamps[start:stop] if self.timestamps is not None else None
        return TimeSeriesFrame(self.values[start:stop], self.channel_names,
                               self.step_index[start:stop], ts, dict(self.meta))

    def with_values(self, values: np.ndarray, **meta) -> "TimeSeriesFrame":
        return TimeSeriesFrame(values, self.channel_names, self.step_index, self.timestamps,
                               {**self.meta, **meta})


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        if np.any(self.std <= 0):
            raise DataError("NormStats std must be positive")

    def apply(self, frame: TimeSeriesFrame) -> TimeSeriesFrame:
        return frame.with_values((frame.values - self.mean) / self.std, normalized=True)

    def invert(self, frame: TimeSeriesFrame) -> TimeSeriesFrame:
        return frame.with_values(frame.values * self.std + self.mean, normalized=False)


@dataclass(frozen=True)
class WindowSet:
    inputs: np.ndarray  # B x l_in x c
    labels: np.ndarray  # B x l_out x c
    origin_indices: np.ndarray

    def __len__(self):
        return self.inputs.shape[0]

    def subset(self, idx) -> "WindowSet":
        return WindowSet(self.inputs[idx], self.labels[idx], self.origin_indices[idx])


def load_csv(path, has_header: bool = True, date_column: int | None = None) -> TimeSeriesFrame:
    """Read a comma-separated numeric table into a frame.

    The optional ``date_column`` is kept as opaque timestamp strings and
    excluded from ``values``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header, rows = rows[0], rows[1:]
    else:
        header = None
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(rows[0])
    keep = [j for j in range(width) if j != date_column]
    if date_column is not None and not 0 <= date_column < width:
        raise DataError(f"{path}: date column {date_column} out of range for {width} columns")
    if not keep:
        raise DataError(f"{path}: no value columns")

    values = np.empty((len(rows), len(keep)))
    stamps = [] if date_column is not None else None
    data_row0 = 2 if has_header else 1  # 1-based line number of the first data row
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {i + data_row0} has {len(row)} columns, expected {width}")
        for out_j, j in enumerate(keep):
            cell = row[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: cannot parse {cell!r} at row {i + data_row0}, column {j + 1}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite value {cell!r} at row {i + data_row0}, column {j + 1}")
            values[i, out_j] = v
        if stamps is not None:
            stamps.append(row[date_column])

    if header is not None:
        if len(header) != width:
            raise DataError(f"{path}: header has {len(header)} columns, expected {width}")
        names = [header[j].strip() for j in keep]
    else:
        names = [f"ch{k}" for k in range(len(keep))]
    return TimeSeriesFrame(values, names, timestamps=stamps, meta={"source": str(path)})


def split_lengths(T: int, ratios: Sequence[float]) -> tuple[int, int, int]:
    if len(ratios) != 3:
        raise DataError(f"need three split ratios, got {len(ratios)}")
    if any(not 0 < r < 1 for r in ratios):
        raise DataError(f"split ratios must lie in (0, 1): {tuple(ratios)}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"split ratios must sum to 1: {tuple(ratios)}")
    # guard against 0.29 * 100 = 28.999999999999996
    n_train = math.floor(ratios[0] * T + 1e-9)
    n_val = math.floor(ratios[1] * T + 1e-9)
    n_test = T - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise DataError(f"split of T={T} by {tuple(ratios)} yields an empty segment "
                        f"({n_train}, {n_val}, {n_test})")
    return n_train, n_val, n_test


def chronological_split(frame: TimeSeriesFrame, ratios=(0.6, 0.2, 0.2)):
    n_train, n_val, _ = split_lengths(frame.T, ratios)
    return (frame.slice(0, n_train),
            frame.slice(n_train, n_train + n_val),
            frame.slice(n_train + n_val, frame.T))


def zscore_fit_apply(train: TimeSeriesFrame, others: Sequence[TimeSeriesFrame] = ()):
    """Fit per-channel mean/population-std on ``train`` and apply to all frames.

    Returns ``(stats, [train_normalized, *others_normalized])``.
    """
    mean = train.values.mean(axis=0)
    std = train.values.std(axis=0)
    bad = np.flatnonzero(std <= 0)
    if bad.size:
        raise DataError(f"zero-variance training channel {train.channel_names[bad[0]]!r}")
    stats = NormStats(mean, std)
    return stats, [stats.apply(f) for f in (train, *others)]


def make_windows(frame: TimeSeriesFrame, l_in: int, l_out: int, stride: int = 1,
                 history: TimeSeriesFrame | None = None) -> WindowSet:
    """Slide a (lookback, horizon) window over ``frame``.

    When ``history`` (the segment immediately preceding ``frame``) is given,
    its last ``l_in`` rows are prepended so inputs may reach back across the
    split boundary; labels always stay inside ``frame``.
    """
    if min(l_in, l_out, stride) < 1:
        raise DataError(f"l_in, l_out and stride must be >= 1, got {l_in}, {l_out}, {stride}")
    values, steps = frame.values, frame.step_index
    if history is not None:
        ctx = history.slice(max(0, history.T - l_in), history.T)
        values = np.concatenate([ctx.values, values])
        steps = np.concatenate([ctx.step_index, steps])
    T = values.shape[0]
    if T < l_in + l_out:
        raise DataError(f"series of length {T} too short for l_in={l_in} + l_out={l_out}")
    B = (T - l_in - l_out) // stride + 1
    starts = np.arange(B) * stride
    idx_in = starts[:, None] + np.arange(l_in)
    idx_out = starts[:, None] + l_in + np.arange(l_out)
    return WindowSet(values[idx_in], values[idx_out], steps[starts].copy())


def split_windows(frame: TimeSeriesFrame, ratios, l_in: int, l_out: int, stride: int = 1,
                  normalize: bool = True):
    """Split, z-score with train statistics, and window all three segments.

    Returns ``(stats, (train_ws, val_ws, test_ws))``; ``stats`` is None when
    ``normalize`` is false.
    """
    train, val, test = chronological_split(frame, ratios)
    stats = None
    if normalize:
        stats, (train, val, test) = zscore_fit_apply(train, [val, test])
    return stats, (make_windows(train, l_in, l_out, stride),
                   make_windows(val, l_in, l_out, stride, history=train),
                   make_windows(test, l_in, l_out, stride, history=val))
