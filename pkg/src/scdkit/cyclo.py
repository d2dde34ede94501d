"""Spectral correlation density estimation.

The estimator averages frequency-shifted products of short-time Fourier
transforms over M hopped frames:

    S_hat[alpha](f) = (1/M) * sum_m X_m(f + alpha/2) * conj(X_m(f - alpha/2))

evaluated on the discrete grid defined by the frame DFT: for a signed bin
pair (k1, k2), f = (k1 + k2)/2 * df (half-bin spacing) and
alpha = (k1 - k2) * df, with df = sample_rate / window_length.

Two evaluation strategies of the identical quantity are provided:
`scd_fam` (FFT frames, vectorized accumulation) and `scd_direct` (direct
DFT summation with explicit pair enumeration), the latter intended as a
slow reference for small inputs.

Because f is sampled on a half-bin lattice, a given (f, alpha) cell exists
only when the corresponding (k1, k2) are integers, i.e. when the f-index
and alpha-index have equal parity. Nonexistent cells hold exactly 0; the
`valid_mask` method exposes the lattice.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import CorruptFileError, InsufficientDataError, UnsupportedFormatError
from .signal import window_function

SCD_MAGIC = b"SCD1"


@dataclass(frozen=True)
class EstimatorParams:
    """Knobs of the SCD estimator.

    window_length : frame length N' (power of two)
    hop           : frame offset L, 1 <= L <= N'
    window_kind   : analysis window applied to each frame
    max_segments  : optional cap M on the number of frames averaged
    alpha_max     : optional cyclic-frequency cutoff in Hz (defaults to
                    sample_rate / 2 at estimation time)
    """

    window_length: int = 256
    hop: int = 64
    window_kind: str = "hann"
    max_segments: Optional[int] = None
    alpha_max: Optional[float] = None

    def __post_init__(self):
        n = self.window_length
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError("window_length must be a power of two >= 2")
        if not 1 <= self.hop <= n:
            raise ValueError("hop must satisfy 1 <= hop <= window_length")
        if self.max_segments is not None and self.max_segments < 1:
            raise ValueError("max_segments must be >= 1 when set")
        if self.alpha_max is not None and self.alpha_max <= 0:
            raise ValueError("alpha_max must be > 0 when set")
        # validates the kind eagerly
        window_function(self.window_kind, n)


@dataclass(frozen=True)
class StftFrame:
    """DFT coefficients of one windowed frame, bins k = 0..N'-1."""

    coefficients: np.ndarray
    segment_index: int
    bin_spacing: float


@dataclass(frozen=True)
class ScdMap:
    """Complex SCD estimate over the (f, alpha) plane.

    values has shape (len(f_grid), len(alpha_grid)); rows index spectral
    frequency, columns index cyclic frequency. f_grid is spaced df/2,
    alpha_grid is spaced df.
    """

    values: np.ndarray
    f_grid: np.ndarray
    alpha_grid: np.ndarray
    params: Optional[EstimatorParams] = None

    def valid_mask(self) -> np.ndarray:
        """Boolean mask of cells that exist on the half-bin lattice.

        A cell (f, alpha) exists when its bin pair (k1, k2) consists of
        integers inside the signed bin range [-N'/2, N'/2): equal parity
        of the f- and alpha-indices plus the diamond-shaped support
        |f| +- alpha/2 within the sampled band.
        """
        n = self.params.window_length if self.params else (len(self.f_grid) + 1) // 2
        s = (np.arange(len(self.f_grid)) - n)[:, None]
        d = self._alpha_bin_index()[None, :]
        two_k1 = s + d
        two_k2 = s - d
        return ((two_k1 % 2 == 0) &
                (two_k1 >= -n) & (two_k1 <= n - 2) &
                (two_k2 >= -n) & (two_k2 <= n - 2))

    def _alpha_bin_index(self) -> np.ndarray:
        step = self.alpha_grid[1] - self.alpha_grid[0] if len(self.alpha_grid) > 1 else 1.0
        return np.rint(self.alpha_grid / step).astype(int) if len(self.alpha_grid) > 1 \
            else np.zeros(1, dtype=int)

    @property
    def alpha_zero_index(self) -> int:
        return int(np.argmin(np.abs(self.alpha_grid)))


def _frame_count(length: int, n: int, hop: int) -> int:
    return (length - n) // hop + 1


def _frame_matrix(x: np.ndarray, params: EstimatorParams) -> np.ndarray:
    """Windowed frames stacked as rows, shape (M, N')."""
    x = np.asarray(x, dtype=np.float64)
    n, hop = params.window_length, params.hop
    if x.ndim != 1:
        raise ValueError("segment must be one-dimensional")
    if x.size < n:
        raise InsufficientDataError(
            f"segment of {x.size} samples is shorter than window_length {n}")
    m = _frame_count(x.size, n, hop)
    if params.max_segments is not None:
        m = min(m, params.max_segments)
    idx = np.arange(n)[None, :] + hop * np.arange(m)[:, None]
    return x[idx] * window_function(params.window_kind, n)[None, :]


def stft(segment, params: EstimatorParams, sample_rate: float = 1.0) -> List[StftFrame]:
    """Hopped windowed DFT frames of a sample block.

    Frame m holds sum_n x[n + m*L] * w[n] * exp(-2j*pi*k*n/N') for
    k = 0..N'-1; there are floor((len - N')/L) + 1 frames.
    """
    frames = np.fft.fft(_frame_matrix(segment, params), axis=1)
    df = sample_rate / params.window_length
    return [StftFrame(frames[m], m, df) for m in range(frames.shape[0])]


def _alpha_bin_limit(params: EstimatorParams, sample_rate: float) -> int:
    n = params.window_length
    df = sample_rate / n
    alpha_max = params.alpha_max if params.alpha_max is not None else sample_rate / 2
    # tiny slack so an on-grid alpha_max keeps its own bin
    return min(n - 1, int(np.floor(alpha_max / df + 1e-9)))


def _empty_grid(params: EstimatorParams, sample_rate: float):
    n = params.window_length
    df = sample_rate / n
    dmax = _alpha_bin_limit(params, sample_rate)
    f_grid = (np.arange(2 * n - 1) - n) * (df / 2.0)
    alpha_grid = np.arange(-dmax, dmax + 1) * df
    values = np.zeros((2 * n - 1, 2 * dmax + 1), dtype=np.complex128)
    return values, f_grid, alpha_grid, dmax


def scd_fam(segment, params: EstimatorParams, sample_rate: float = 1.0) -> ScdMap:
    """SCD estimate via FFT frames and vectorized shift-product averaging.

    The reduction over frames is a fixed-order mean, so identical inputs
    yield bit-identical maps regardless of scheduling.
    """
    frames = np.fft.fft(_frame_matrix(segment, params), axis=1)
    # reorder columns to signed bins k = -N/2 .. N/2-1
    xs = np.fft.fftshift(frames, axes=1)
    n = params.window_length
    values, f_grid, alpha_grid, dmax = _empty_grid(params, sample_rate)
    for d in range(dmax + 1):
        # pairs k1 = k2 + d; column j2 holds k2 = j2 - N/2
        prod = (xs[:, d:] * np.conj(xs[:, :n - d])).mean(axis=0)
        si = 2 * np.arange(n - d) + d  # s-index = (k1 + k2) + N
        values[si, dmax + d] = prod
        if d > 0:
            # S(f, -alpha) = conj(S(f, alpha)) by construction
            values[si, dmax - d] = np.conj(prod)
    values.setflags(write=False)
    return ScdMap(values, f_grid, alpha_grid, params)


def scd_direct(segment, params: EstimatorParams, sample_rate: float = 1.0) -> ScdMap:
    """Reference SCD: direct DFT summation and explicit pair enumeration.

    Computes the identical quantity as `scd_fam` without any FFT; cost is
    O(M * N'^2), so use small inputs only.
    """
    framed = _frame_matrix(segment, params)
    m_count, n = framed.shape
    kvals = np.arange(-n // 2, n // 2)
    nn = np.arange(n)
    # direct evaluation of the DFT sum at each signed bin
    dft = np.exp(-2j * np.pi * np.outer(kvals, nn) / n)
    acc = np.zeros((n, n), dtype=np.complex128)
    for m in range(m_count):
        coeffs = dft @ framed[m]
        acc += np.outer(coeffs, np.conj(coeffs))
    acc /= m_count
    values, f_grid, alpha_grid, dmax = _empty_grid(params, sample_rate)
    for i1, k1 in enumerate(kvals):
        for i2, k2 in enumerate(kvals):
            d = k1 - k2
            if abs(d) > dmax:
                continue
            values[(k1 + k2) + n, dmax + d] = acc[i1, i2]
    values.setflags(write=False)
    return ScdMap(values, f_grid, alpha_grid, params)


def psd_welch(segment, params: EstimatorParams, sample_rate: float = 1.0) -> np.ndarray:
    """Averaged-periodogram PSD: the real part of the alpha = 0 column.

    Shares the `scd_fam` code path, so the result matches that column
    bit-for-bit. The column lives on the half-bin f grid; odd cells are
    structural zeros (see module docstring).
    """
    scd = scd_fam(segment, params, sample_rate)
    return scd.values[:, scd.alpha_zero_index].real.copy()


# ---------------------------------------------------------------------------
# serialization: little-endian "SCD1" container
#
#   bytes 0-3   magic "SCD1"
#   bytes 4-7   n_f     (uint32)
#   bytes 8-11  n_alpha (uint32)
#   then n_f float64 f_grid values, n_alpha float64 alpha_grid values,
#   then n_f * n_alpha complex cells, row-major, interleaved re/im float64.
# ---------------------------------------------------------------------------

def save_scd(scd: ScdMap, path) -> None:
    n_f, n_alpha = scd.values.shape
    with open(path, "wb") as fh:
        fh.write(SCD_MAGIC)
        fh.write(struct.pack("<II", n_f, n_alpha))
        fh.write(np.asarray(scd.f_grid, dtype="<f8").tobytes())
        fh.write(np.asarray(scd.alpha_grid, dtype="<f8").tobytes())
        inter = np.empty((n_f, n_alpha, 2), dtype="<f8")
        inter[..., 0] = scd.values.real
        inter[..., 1] = scd.values.imag
        fh.write(inter.tobytes())


def load_scd(path) -> ScdMap:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != SCD_MAGIC:
        raise UnsupportedFormatError(f"{path}: not an SCD1 container")
    if len(raw) < 12:
        raise CorruptFileError(f"{path}: truncated header", offset=len(raw))
    n_f, n_alpha = struct.unpack_from("<II", raw, 4)
    need = 12 + 8 * (n_f + n_alpha) + 16 * n_f * n_alpha
    if len(raw) < need:
        raise CorruptFileError(f"{path}: truncated payload", offset=len(raw))
    off = 12
    f_grid = np.frombuffer(raw, dtype="<f8", count=n_f, offset=off).copy()
    off += 8 * n_f
    alpha_grid = np.frombuffer(raw, dtype="<f8", count=n_alpha, offset=off).copy()
    off += 8 * n_alpha
    inter = np.frombuffer(raw, dtype="<f8", count=2 * n_f * n_alpha, offset=off)
    inter = inter.reshape(n_f, n_alpha, 2)
    values = inter[..., 0] + 1j * inter[..., 1]
    values.setflags(write=False)
    return ScdMap(values, f_grid, alpha_grid, None)


def scd_to_csv(scd: ScdMap, path) -> None:
    """Export |S| as CSV for inspection: header row of alpha, first column f."""
    mag = np.abs(scd.values)
    with open(path, "w") as fh:
        fh.write("f_hz," + ",".join(f"{a:.9g}" for a in scd.alpha_grid) + "\n")
        for i, f in enumerate(scd.f_grid):
            fh.write(f"{f:.9g}," + ",".join(f"{v:.9g}" for v in mag[i]) + "\n")
