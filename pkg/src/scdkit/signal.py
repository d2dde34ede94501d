"""Core time-domain types: vibration records, time vectors, segmentation.

Everything here is pure and immutable; values can be shared freely across
workers.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import InsufficientDataError

G_TO_MS2 = 9.80665  # 1 g in m/s^2

WINDOW_KINDS = ("hann", "hamming", "rectangular")


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real-valued vibration record.

    Parameters
    ----------
    samples : (N,) array_like
        Acceleration values in units of g. Stored as float64.
    sample_rate : float
        Sampling frequency in Hz, > 0.
    start_time : float
        Time of the first sample in seconds.
    label : str, optional
        Condition tag (e.g. "BPFO_03", "Healthy").
    channel : str, optional
        Sensor identifier (housing A/B, axis x/y).
    """

    samples: np.ndarray
    sample_rate: float
    start_time: float = 0.0
    label: Optional[str] = None
    channel: Optional[str] = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if arr.size == 0:
            raise ValueError("samples must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples contain NaN or Inf")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def time_vector(self) -> "TimeVector":
        return TimeVector(self.start_time, 1.0 / self.sample_rate,
                          self.samples.size)

    def with_label(self, label: str) -> "TimeSeries":
        return replace(self, label=label)


@dataclass(frozen=True)
class TimeVector:
    """Arithmetic time grid t_i = start + i * increment, i = 0..count-1."""

    start: float
    increment: float
    count: int

    def __post_init__(self):
        if not self.increment > 0:
            raise ValueError("increment must be > 0")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    def element(self, i: int) -> float:
        if not 0 <= i < self.count:
            raise IndexError(f"index {i} out of range for count {self.count}")
        return self.start + i * self.increment

    def to_array(self) -> np.ndarray:
        return self.start + np.arange(self.count, dtype=np.float64) * self.increment


def make_time_vector(start: float, increment: float, count: int) -> TimeVector:
    """Reconstruct the time grid from the header triple (start, increment, count)."""
    return TimeVector(start, increment, count)


@dataclass(frozen=True)
class SegmentSet:
    """Contiguous non-overlapping fixed-length windows cut from one record.

    segments is an (n_segments, window_length) read-only float64 array;
    row k covers source samples [k*W, (k+1)*W). The trailing remainder of
    the source is discarded.
    """

    window_length: int
    segments: np.ndarray
    sample_rate: float
    start_time: float = 0.0
    label: Optional[str] = None
    channel: Optional[str] = None

    def __len__(self):
        return self.segments.shape[0]

    def __iter__(self):
        return iter(self.segments)

    def block(self, k: int) -> np.ndarray:
        return self.segments[k]

    def block_series(self, k: int) -> TimeSeries:
        """The k-th block as a standalone TimeSeries with shifted start time."""
        return TimeSeries(
            self.segments[k].copy(),
            self.sample_rate,
            start_time=self.start_time + k * self.window_length / self.sample_rate,
            label=self.label,
            channel=self.channel,
        )


def segment(series: TimeSeries, window_length: int) -> SegmentSet:
    """Cut a record into floor(len/W) contiguous windows of W samples."""
    if window_length < 1:
        raise ValueError("window_length must be >= 1")
    n = len(series) // window_length
    if n == 0:
        raise InsufficientDataError(
            f"series of {len(series)} samples is shorter than one "
            f"{window_length}-sample window")
    blocks = series.samples[:n * window_length].reshape(n, window_length)
    blocks.setflags(write=False)
    return SegmentSet(window_length, blocks, series.sample_rate,
                      series.start_time, series.label, series.channel)


def window_function(kind: str, length: int) -> np.ndarray:
    """Analysis window w[n], n = 0..length-1.

    rectangular: w[n] = 1
    hann:        w[n] = 0.5 - 0.5*cos(2*pi*n/length)   (periodic form)
    hamming:     w[n] = 0.54 - 0.46*cos(2*pi*n/length) (periodic form)
    """
    if length < 1:
        raise ValueError("window length must be >= 1")
    if kind == "rectangular":
        return np.ones(length, dtype=np.float64)
    n = np.arange(length, dtype=np.float64)
    if kind == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)
    if kind == "hamming":
        return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / length)
    raise ValueError(f"unknown window kind {kind!r}; expected one of {WINDOW_KINDS}")
