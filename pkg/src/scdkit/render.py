"""Rendering of |SCD| maps to fixed-resolution color rasters.

The magnitude is scaled (linear or log), min-max normalized per image,
pushed through a bundled 256-entry colormap table, and resampled to the
target resolution (area averaging when shrinking, bilinear when growing).
No axes or margins are drawn; the output is the bare data raster.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from PIL import Image

from ._viridis import VIRIDIS_LUT

LOG_EPS = 1e-20

_LUT = np.array(VIRIDIS_LUT, dtype=np.uint8)

COLORMAPS = {"viridis": _LUT}


@dataclass(frozen=True)
class ScdImage:
    """Rendered 8-bit RGB raster of an SCD magnitude map."""

    pixels: np.ndarray  # (H, W, 3) uint8
    width: int
    height: int
    colormap_id: str
    scale: str
    normalization: Tuple[float, float]


def _rasterize_lattice(mag: np.ndarray, mask: np.ndarray):
    """Resolve the half-bin lattice into a dense raster.

    Cells between two present cells (parity holes inside the estimator's
    diamond support) take the mean of their f-axis neighbors; cells
    outside the support are flagged so the caller can pin them to the
    colormap low end. Without this the structural zeros would dominate
    the per-image normalization.
    """
    up_ok = np.vstack([mask[1:], np.zeros((1, mask.shape[1]), dtype=bool)])
    down_ok = np.vstack([np.zeros((1, mask.shape[1]), dtype=bool), mask[:-1]])
    hole = ~mask & up_ok & down_ok
    up = np.vstack([mag[1:], mag[-1:]])
    down = np.vstack([mag[:1], mag[:-1]])
    out = mag.copy()
    out[hole] = 0.5 * (up[hole] + down[hole])
    return out, mask | hole


def render_scd(scd, width: int = 224, height: int = 224,
               scale: str = "log", colormap: str = "viridis") -> ScdImage:
    """Render an ScdMap to a width x height RGB image.

    Deterministic: identical map and settings give identical pixel bytes.
    A constant (zero-range) map renders at the colormap low end.
    """
    if width < 1 or height < 1:
        raise ValueError("width and height must be >= 1")
    if colormap not in COLORMAPS:
        raise ValueError(f"unknown colormap {colormap!r}")
    if scale not in ("linear", "log"):
        raise ValueError(f"scale must be 'linear' or 'log', got {scale!r}")
    values = np.asarray(scd.values)
    if values.size == 0:
        raise ValueError("cannot render an empty map")
    if np.isnan(values).any():
        raise ValueError("map contains NaN")
    mag = np.abs(values)
    mag, support = _rasterize_lattice(mag, scd.valid_mask())
    if scale == "log":
        mag = 10.0 * np.log10(mag + LOG_EPS)
    inside = mag[support] if support.any() else mag.ravel()
    vmin = float(inside.min())
    vmax = float(inside.max())
    if vmax > vmin:
        norm = (mag - vmin) / (vmax - vmin)
    else:
        norm = np.zeros_like(mag)
    norm[~support] = 0.0  # out-of-support cells render at the low end
    norm = np.clip(norm, 0.0, 1.0)
    lut = COLORMAPS[colormap]
    rgb = lut[np.rint(norm * 255.0).astype(np.intp)]
    if (width, height) != (rgb.shape[1], rgb.shape[0]):
        shrink = width < rgb.shape[1] or height < rgb.shape[0]
        resample = Image.Resampling.BOX if shrink else Image.Resampling.BILINEAR
        img = Image.fromarray(rgb, mode="RGB").resize((width, height), resample)
        rgb = np.asarray(img)
    rgb = np.ascontiguousarray(rgb)
    rgb.setflags(write=False)
    return ScdImage(rgb, width, height, colormap, scale, (vmin, vmax))


def write_png(image: ScdImage, path) -> None:
    """Write as standard non-interlaced 8-bit RGB PNG."""
    try:
        Image.fromarray(image.pixels, mode="RGB").save(path, format="PNG")
    except OSError as exc:
        raise OSError(f"failed to write PNG {path}: {exc}") from exc


def write_ppm(image: ScdImage, path) -> None:
    """Dependency-free binary PPM (P6) export, handy for golden tests."""
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(image.pixels.tobytes())
    except OSError as exc:
        raise OSError(f"failed to write PPM {path}: {exc}") from exc


def read_png(path) -> np.ndarray:
    """Load a PNG back as an (H, W, 3) uint8 array."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))
