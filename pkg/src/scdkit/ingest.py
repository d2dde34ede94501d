"""File ingestion, synthetic signal generation, and dataset assembly.

Supported inputs:
  * MAT v5 subset: real double matrices, uncompressed or zlib-compressed
    elements. v4 and v7.3 (HDF5) files are rejected with the detected
    version named.
  * raw "VIB1" binary: 16-byte header (magic, uint32 count, float64
    sample_rate) followed by little-endian float64 samples.
  * CSV: one sample per line, optional non-numeric header line.

A companion MAT writer emits the same v5 subset, used for round-trip
tests and for saving segmented blocks.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .cyclo import EstimatorParams, scd_fam
from .errors import CorruptFileError, InsufficientDataError, UnsupportedFormatError
from .render import render_scd, write_png
from .signal import TimeSeries, segment

FAULT_CLASSES = ("BPFI_03", "BPFI_10", "BPFI_30",
                 "BPFO_03", "BPFO_10", "BPFO_30", "Healthy")

LOAD_TAGS = ("0Nm", "2Nm", "4Nm")
HOUSINGS = ("A", "B")

# MAT v5 data type / array class tags (subset)
MI_INT8 = 1
MI_INT32 = 5
MI_UINT32 = 6
MI_DOUBLE = 9
MI_MATRIX = 14
MI_COMPRESSED = 15
MX_DOUBLE_CLASS = 6

VIB_MAGIC = b"VIB1"


@dataclass(frozen=True)
class MatRecord:
    """One real double matrix from a MAT file (column-major on disk)."""

    name: str
    shape: Tuple[int, int]
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("MatRecord data must be two-dimensional")
        if tuple(arr.shape) != tuple(self.shape):
            raise ValueError("shape does not match data")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "shape", tuple(arr.shape))


def _detect_version(raw: bytes, path) -> str:
    if raw[:8] == b"\x89HDF\r\n\x1a\n":
        return "v7.3"
    if len(raw) >= 128:
        endian = raw[126:128]
        if endian in (b"IM", b"MI"):
            return "v5"
    return "v4"


def read_mat(path) -> List[MatRecord]:
    """Read all real double matrices from a MAT v5 file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    version = _detect_version(raw, path)
    if version != "v5":
        raise UnsupportedFormatError(
            f"{path}: MAT {version} files are not supported (need MAT v5)")
    order = "<" if raw[126:128] == b"IM" else ">"
    records: List[MatRecord] = []
    offset = 128
    while offset < len(raw):
        offset = _read_element(raw, offset, order, records, path)
    return records


def _read_tag(raw: bytes, offset: int, order: str, path) -> Tuple[int, int, int, int]:
    """Parse an element tag; returns (type, size, data_offset, padded_end)."""
    if offset + 8 > len(raw):
        raise CorruptFileError(f"{path}: truncated element tag", offset=offset)
    word = struct.unpack_from(order + "I", raw, offset)[0]
    if word >> 16:
        # small data element: size and type packed into the first word
        dtype = word & 0xFFFF
        size = word >> 16
        return dtype, size, offset + 4, offset + 8
    dtype = word
    size = struct.unpack_from(order + "I", raw, offset + 4)[0]
    data_offset = offset + 8
    end = data_offset + size
    padded = end + (-end % 8)
    return dtype, size, data_offset, padded


def _read_element(raw, offset, order, records, path) -> int:
    dtype, size, data_offset, padded_end = _read_tag(raw, offset, order, path)
    if data_offset + size > len(raw):
        raise CorruptFileError(
            f"{path}: element of {size} bytes exceeds file end", offset=offset)
    if dtype == MI_COMPRESSED:
        try:
            inner = zlib.decompress(raw[data_offset:data_offset + size])
        except zlib.error as exc:
            raise CorruptFileError(
                f"{path}: bad zlib stream ({exc})", offset=data_offset) from exc
        _read_element(inner, 0, order, records, path)
        return padded_end
    if dtype == MI_MATRIX:
        rec = _parse_matrix(raw[data_offset:data_offset + size], order, path,
                            data_offset)
        if rec is not None:
            records.append(rec)
    # other top-level element types are skipped
    return padded_end


def _parse_matrix(buf, order, path, base) -> Optional[MatRecord]:
    # array flags
    dtype, size, doff, pos = _read_tag(buf, 0, order, path)
    if dtype != MI_UINT32 or size < 8:
        raise CorruptFileError(f"{path}: malformed array flags", offset=base)
    flags = struct.unpack_from(order + "I", buf, doff)[0]
    array_class = flags & 0xFF
    is_complex = bool(flags & 0x0800)
    if array_class != MX_DOUBLE_CLASS or is_complex:
        return None  # not a real double matrix; skip
    # dimensions
    dtype, size, doff, pos = _read_tag(buf, pos, order, path)
    if dtype != MI_INT32:
        raise CorruptFileError(f"{path}: malformed dimensions", offset=base + pos)
    dims = struct.unpack_from(order + f"{size // 4}i", buf, doff)
    if len(dims) != 2:
        return None
    rows, cols = dims
    # name
    dtype, size, doff, pos = _read_tag(buf, pos, order, path)
    if dtype != MI_INT8:
        raise CorruptFileError(f"{path}: malformed name", offset=base + pos)
    name = buf[doff:doff + size].decode("ascii", errors="replace")
    # real part
    dtype, size, doff, pos = _read_tag(buf, pos, order, path)
    if dtype != MI_DOUBLE:
        return None  # stored with a non-double element type; outside the subset
    count = rows * cols
    if size != 8 * count or doff + size > len(buf):
        raise CorruptFileError(
            f"{path}: data element truncated (expected {8 * count} bytes, "
            f"have {min(size, len(buf) - doff)})", offset=base + doff)
    data = np.frombuffer(buf, dtype=order + "f8", count=count, offset=doff)
    matrix = data.reshape((rows, cols), order="F").copy()
    return MatRecord(name, (rows, cols), matrix)


def _element(dtype: int, payload: bytes) -> bytes:
    pad = -len(payload) % 8
    return struct.pack("<II", dtype, len(payload)) + payload + b"\x00" * pad


def write_mat(path, records: Sequence[MatRecord], compress: bool = False) -> None:
    """Write records as a MAT v5 file (real double matrices only)."""
    header = b"MATLAB 5.0 MAT-file, created by scdkit"
    header = header + b" " * (116 - len(header))
    header += b"\x00" * 8 + struct.pack("<H", 0x0100) + b"IM"
    body = b""
    for rec in records:
        flags = struct.pack("<II", MX_DOUBLE_CLASS, 0)
        dims = struct.pack("<ii", *rec.shape)
        name = rec.name.encode("ascii")
        payload = (_element(MI_UINT32, flags) +
                   _element(MI_INT32, dims) +
                   _element(MI_INT8, name) +
                   _element(MI_DOUBLE, rec.data.astype("<f8").tobytes(order="F")))
        matrix = _element(MI_MATRIX, payload)
        if compress:
            compressed = zlib.compress(matrix)
            matrix = struct.pack("<II", MI_COMPRESSED, len(compressed)) + compressed
        body += matrix
    with open(path, "wb") as fh:
        fh.write(header + body)


def extract_channel(record: MatRecord, column: int, sample_rate: float,
                    start_time: float = 0.0, label: Optional[str] = None,
                    channel: Optional[str] = None) -> TimeSeries:
    """One column of a multi-channel matrix as a TimeSeries."""
    rows, cols = record.shape
    if not 0 <= column < cols:
        raise IndexError(f"column {column} out of range for {cols}-column record")
    return TimeSeries(record.data[:, column].copy(), sample_rate,
                      start_time=start_time, label=label, channel=channel)


# ---------------------------------------------------------------------------
# raw VIB1 binary and CSV
# ---------------------------------------------------------------------------

def write_vib(path, series: TimeSeries) -> None:
    with open(path, "wb") as fh:
        fh.write(VIB_MAGIC)
        fh.write(struct.pack("<Id", len(series), series.sample_rate))
        fh.write(series.samples.astype("<f8").tobytes())


def read_vib(path) -> TimeSeries:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != VIB_MAGIC:
        raise UnsupportedFormatError(f"{path}: not a VIB1 file")
    if len(raw) < 16:
        raise CorruptFileError(f"{path}: truncated header", offset=len(raw))
    count, rate = struct.unpack_from("<Id", raw, 4)
    if len(raw) < 16 + 8 * count:
        raise CorruptFileError(f"{path}: truncated samples", offset=len(raw))
    samples = np.frombuffer(raw, dtype="<f8", count=count, offset=16).copy()
    return TimeSeries(samples, rate)


def read_csv_series(path, sample_rate: float) -> TimeSeries:
    """One sample per line; a single non-numeric header line is tolerated."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                if lineno == 0:
                    continue
                raise CorruptFileError(
                    f"{path}: non-numeric value {text!r} on line {lineno + 1}")
    if not values:
        raise InsufficientDataError(f"{path}: no samples")
    return TimeSeries(np.array(values), sample_rate)


def load_series(path, sample_rate: float = 25600.0, column: int = 0) -> TimeSeries:
    """Dispatch on extension: .mat, .vib, or .csv."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".mat":
        records = read_mat(path)
        if not records:
            raise InsufficientDataError(f"{path}: no real double matrices")
        return extract_channel(records[0], column, sample_rate)
    if suffix == ".vib":
        return read_vib(path)
    if suffix == ".csv":
        return read_csv_series(path, sample_rate)
    raise UnsupportedFormatError(f"{path}: unknown extension {suffix!r}")


# ---------------------------------------------------------------------------
# synthetic bearing signals
# ---------------------------------------------------------------------------

SHAFT_RATE_HZ = 30.0

# stand-in kinematics: outer-race impacts near 90 Hz, inner-race near 120 Hz
# with shaft-rate amplitude modulation; severity gains map crack sizes
# 0.3 / 1.0 / 3.0 mm to 1x / 2x / 4x impulse amplitude.
_CLASS_DEFAULTS = {
    "BPFO_03": (90.0, 1.0), "BPFO_10": (90.0, 2.0), "BPFO_30": (90.0, 4.0),
    "BPFI_03": (120.0, 1.0), "BPFI_10": (120.0, 2.0), "BPFI_30": (120.0, 4.0),
    "Healthy": (0.0, 0.0),
}


@dataclass(frozen=True)
class FaultSpec:
    """Parameters of one synthetic bearing condition."""

    class_name: str
    fault_rate: float
    resonance: float = 4000.0
    severity_gain: float = 1.0
    snr_db: float = 6.0
    seed: int = 0

    def __post_init__(self):
        if self.class_name not in FAULT_CLASSES:
            raise ValueError(
                f"unknown class {self.class_name!r}; expected one of {FAULT_CLASSES}")

    @classmethod
    def for_class(cls, class_name: str, seed: int = 0, snr_db: float = 6.0,
                  resonance: float = 4000.0) -> "FaultSpec":
        rate, gain = _CLASS_DEFAULTS[class_name]
        return cls(class_name, rate, resonance, gain, snr_db, seed)


def synth_bearing(spec: FaultSpec, duration: float, sample_rate: float) -> TimeSeries:
    """Deterministic desk-scale stand-in for the physical rig.

    Healthy: stationary noise plus a weak shaft-rate sinusoid. Fault
    classes: an impulse train at fault_rate, each impulse driving an
    exponentially decaying burst at the resonance frequency, scaled by
    severity_gain and summed with noise. The noise level is set from
    snr_db against the unit-severity signature, so larger cracks stand
    further out of a fixed background.
    """
    n = int(round(duration * sample_rate))
    if n < 1:
        raise ValueError("duration * sample_rate must be >= 1")
    rng = np.random.default_rng(spec.seed)
    t = np.arange(n) / sample_rate
    shaft = 0.05 * np.sin(2.0 * np.pi * SHAFT_RATE_HZ * t)
    if spec.class_name == "Healthy":
        noise = rng.standard_normal(n) * 0.05
        return TimeSeries(shaft + noise, sample_rate, label=spec.class_name)
    if not 0 < spec.fault_rate < sample_rate / 2:
        raise ValueError("fault_rate must lie in (0, sample_rate / 2)")
    period = sample_rate / spec.fault_rate
    burst_len = min(n, int(round(0.005 * sample_rate)))
    bt = np.arange(burst_len) / sample_rate
    burst = np.exp(-bt / 0.0015) * np.sin(2.0 * np.pi * spec.resonance * bt)
    base = np.zeros(n)
    k = 0
    while True:
        start = int(round(k * period))
        if start >= n:
            break
        amp = 1.0
        if spec.class_name.startswith("BPFI"):
            # inner-race impacts ride the shaft rotation
            amp *= 1.0 + 0.5 * np.sin(2.0 * np.pi * SHAFT_RATE_HZ * start / sample_rate)
        stop = min(n, start + burst_len)
        base[start:stop] += amp * burst[:stop - start]
        k += 1
    base_power = np.mean(base ** 2)
    noise_std = np.sqrt(base_power / 10.0 ** (spec.snr_db / 10.0))
    noise = rng.standard_normal(n) * noise_std
    samples = spec.severity_gain * base + shaft + noise
    return TimeSeries(samples, sample_rate, label=spec.class_name)


# ---------------------------------------------------------------------------
# dataset assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    load: str
    housing: str
    block: int
    split: str = ""


@dataclass
class DatasetManifest:
    """Labeled inventory of rendered images, plus any skipped blocks."""

    entries: List[ManifestEntry] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# path\tclass\tload\thousing\tblock\tsplit\n")
            for reason in self.skipped:
                fh.write(f"# skipped: {reason}\n")
            for e in self.entries:
                fh.write(f"{e.path}\t{e.label}\t{e.load}\t{e.housing}\t"
                         f"{e.block}\t{e.split}\n")

    @classmethod
    def read(cls, path) -> "DatasetManifest":
        manifest = cls()
        with open(path) as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("# skipped: "):
                    manifest.skipped.append(line[len("# skipped: "):])
                    continue
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 6:
                    raise CorruptFileError(f"{path}: malformed manifest line {line!r}")
                manifest.entries.append(ManifestEntry(
                    parts[0], parts[1], parts[2], parts[3], int(parts[4]), parts[5]))
        return manifest


def _split_sizes(n: int, ratios: Tuple[float, float, float]) -> Tuple[int, int, int]:
    n_train = int(round(n * ratios[0]))
    n_val = int(round(n * ratios[1]))
    n_train = min(n_train, n)
    n_val = min(n_val, n - n_train)
    return n_train, n_val, n - n_train - n_val


def assign_splits(manifest: DatasetManifest,
                  ratios: Tuple[float, float, float] = (0.7, 0.2, 0.1),
                  seed: int = 0) -> None:
    """Per-class seeded shuffle into train/val/test at the given ratios."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("split ratios must sum to 1")
    rng = np.random.default_rng(seed)
    by_class = {}
    for e in manifest.entries:
        by_class.setdefault(e.label, []).append(e)
    new_entries = []
    for label in sorted(by_class):
        group = sorted(by_class[label], key=lambda e: (e.path, e.block))
        order = rng.permutation(len(group))
        n_train, n_val, _ = _split_sizes(len(group), ratios)
        for rank, idx in enumerate(order):
            split = ("train" if rank < n_train
                     else "val" if rank < n_train + n_val else "test")
            e = group[idx]
            new_entries.append(ManifestEntry(e.path, e.label, e.load,
                                             e.housing, e.block, split))
    manifest.entries = sorted(new_entries,
                              key=lambda e: (e.label, e.path, e.block))


def build_dataset(inputs: Iterable[Tuple[TimeSeries, str, str, str]],
                  out_dir, params: Optional[EstimatorParams] = None,
                  window_length: int = 10000,
                  image_size: Tuple[int, int] = (224, 224),
                  scale: str = "log", colormap: str = "viridis",
                  ratios: Tuple[float, float, float] = (0.7, 0.2, 0.1),
                  seed: int = 0, workers: int = 1) -> DatasetManifest:
    """Segment, estimate, and render each input record into a labeled tree.

    One PNG per 10,000-sample block under out_dir/<class>/, plus a
    manifest with a seeded 70/20/10 split. Re-running with the same seed
    reproduces the manifest byte for byte.
    """
    from concurrent.futures import ThreadPoolExecutor

    params = params or EstimatorParams()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest()
    jobs = []
    for series, label, load, housing in inputs:
        if label not in FAULT_CLASSES:
            raise ValueError(f"unknown class label {label!r}")
        blocks = segment(series, window_length)
        class_dir = out_dir / label
        class_dir.mkdir(exist_ok=True)
        for k in range(len(blocks)):
            name = f"{label}_{load}_{housing}_{k:05d}.png"
            jobs.append((blocks.block(k), series.sample_rate, label, load,
                         housing, k, class_dir / name))

    def run(job):
        block, rate, label, load, housing, k, path = job
        try:
            scd = scd_fam(block, params, rate)
            image = render_scd(scd, image_size[0], image_size[1], scale, colormap)
            write_png(image, path)
        except (InsufficientDataError, ValueError) as exc:
            return (None, f"{path.name}: {exc}")
        rel = str(path.relative_to(out_dir))
        return (ManifestEntry(rel, label, load, housing, k), None)

    workers = max(1, workers)
    if workers == 1:
        results = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    for entry, failure in results:
        if failure is not None:
            manifest.skipped.append(failure)
        else:
            manifest.entries.append(entry)
    assign_splits(manifest, ratios, seed)
    manifest.write(out_dir / "manifest.tsv")
    return manifest
