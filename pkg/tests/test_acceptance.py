"""Acceptance suite: one test per release criterion, each printing a
[PASS] line (run with `pytest -s tests/test_acceptance.py` to see them).
"""
import time

import numpy as np
import pytest

from scdkit.cli import run
from scdkit.cyclo import EstimatorParams, scd_direct, scd_fam, stft
from scdkit.errors import UnsupportedFormatError
from scdkit.ingest import (FAULT_CLASSES, DatasetManifest, FaultSpec,
                           MatRecord, read_mat, synth_bearing, write_mat)
from scdkit.render import render_scd, write_png
from scdkit.signal import TimeSeries, make_time_vector, segment


def _passed(name):
    print(f"\n[PASS] {name}")


def oracle_cases(count=50, seed=2024):
    """Randomized short segments across all supported frame lengths."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.choice([8, 16, 32, 64]))
        length = int(rng.integers(4 * n, 4097))
        hop = int(rng.choice([n, n // 2, max(1, n // 4)]))
        kind = str(rng.choice(["hann", "hamming", "rectangular"]))
        x = rng.standard_normal(length)
        yield x, EstimatorParams(window_length=n, hop=hop, window_kind=kind)


@pytest.fixture(scope="module")
def oracle_suite():
    start = time.perf_counter()
    cases = [(x, p, scd_fam(x, p, 1.0), scd_direct(x, p, 1.0))
             for x, p in oracle_cases()]
    elapsed = time.perf_counter() - start
    return cases, elapsed


def test_oracle_equivalence(oracle_suite):
    cases, elapsed = oracle_suite
    assert len(cases) >= 50
    for x, p, fam, direct in cases:
        scale = np.abs(direct.values).max()
        assert np.abs(fam.values - direct.values).max() / scale <= 1e-9
    assert elapsed < 60.0
    _passed(f"oracle equivalence: scd_fam == scd_direct within 1e-9 on "
            f"{len(cases)} randomized segments ({elapsed:.1f}s)")


def test_psd_identity():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.choice([16, 32, 64]))
        x = rng.standard_normal(int(rng.integers(4 * n, 2048)))
        p = EstimatorParams(window_length=n, hop=n // 2)
        m = scd_fam(x, p, 1.0)
        col = m.values[:, m.alpha_zero_index]
        cmax = np.abs(col).max()
        assert np.abs(col.imag).max() <= 1e-12 * cmax
        # averaged periodogram of the same frames, computed independently
        frames = np.array([fr.coefficients for fr in stft(x, p)])
        avg = (frames * np.conj(frames)).real.mean(axis=0)
        shifted = np.fft.fftshift(avg)  # bins k = -N/2 .. N/2-1
        on_bin = col.real[::2]  # f = k * df cells of the half-bin grid
        assert np.abs(on_bin - shifted).max() <= 1e-12 * cmax
    _passed("PSD identity: alpha=0 column equals the averaged periodogram "
            "on 20 random inputs")


def test_symmetries(oracle_suite):
    cases, _ = oracle_suite
    for x, p, fam, direct in cases:
        n = p.window_length
        for m in (fam, direct):
            v = m.values
            assert np.abs(v - np.conj(v[:, ::-1])).max() <= 1e-12
            mask = m.valid_mask()
            for si in range(v.shape[0]):
                mi = -(si - n) + n
                if not 0 <= mi < v.shape[0]:
                    continue
                both = mask[si] & mask[mi]
                if both.any():
                    assert np.abs(v[si][both] - v[mi][both]).max() <= 1e-12
    _passed("symmetries: S(f,-a)=conj(S(f,a)) and S(-f,a)=S(f,a) "
            "to 1e-12 on all oracle-suite cases")


def test_sinusoid_localization():
    fs, n, hop = 64.0, 64, 16
    f0 = 8.0  # on bin 8; 2*f0*hop/fs is an integer so frames add coherently
    t = np.arange(64 * 40) / fs
    p = EstimatorParams(window_length=n, hop=hop)
    assert (len(t) - n) // hop + 1 >= 32
    m = scd_fam(np.cos(2 * np.pi * f0 * t), p, fs)
    mag = np.abs(m.values)
    off = mag.copy()
    off[:, m.alpha_zero_index] = 0
    fi, di = np.unravel_index(np.argmax(off), off.shape)
    dalpha = m.alpha_grid[1] - m.alpha_grid[0]
    assert abs(abs(m.alpha_grid[di]) - 2 * f0) <= dalpha
    assert abs(m.f_grid[fi]) <= dalpha / 2
    background = np.median(off[m.valid_mask() & (off > 0)])
    ratio_db = 10 * np.log10(off[fi, di] / background)
    assert ratio_db >= 20.0
    _passed(f"sinusoid localization: peak at (f=0, alpha=2*f0), "
            f"{ratio_db:.0f} dB above median off-axis background")


def test_stationarity_null():
    rng = np.random.default_rng(42)
    p = EstimatorParams(window_length=64, hop=64,
                        window_kind="rectangular", max_segments=256)
    x = rng.standard_normal(256 * 64)
    m = scd_fam(x, p, 1.0)
    mag = np.abs(m.values)
    off = mag.copy()
    off[:, m.alpha_zero_index] = 0
    ratio = off.max() / mag[:, m.alpha_zero_index].max()
    assert ratio < 0.25
    _passed(f"stationarity null: white noise M=256 off-axis/on-axis "
            f"ratio {ratio:.3f} < 0.25")


def test_segmentation_arithmetic():
    ts = TimeSeries(np.zeros(7_680_000), 25600.0)
    blocks = segment(ts, 10_000)
    assert len(blocks) == 768
    tv = make_time_vector(2.6206e-5, 3.906e-5, 7_680_000)
    for i in (0, 1, 2, 999, 7_679_999):
        assert tv.element(i) == 2.6206e-5 + i * 3.906e-5
    _passed("segmentation arithmetic: 7,680,000 samples -> 768 blocks; "
            "time vector exact")


def test_mat_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    shapes = [(1, 1), (3, 2), (10_000, 1)] + \
        [tuple(rng.integers(1, 64, 2)) for _ in range(10)]
    for i, (rows, cols) in enumerate(shapes):
        rec = MatRecord("m", (rows, cols), rng.standard_normal((rows, cols)))
        path = tmp_path / f"rt{i}.mat"
        write_mat(path, [rec])
        (back,) = read_mat(path)
        assert back.data.tobytes() == rec.data.tobytes()  # bit-exact
    bad = tmp_path / "v73.mat"
    bad.write_bytes(b"\x89HDF\r\n\x1a\n" + b"\x00" * 64)
    with pytest.raises(UnsupportedFormatError, match="v7.3"):
        read_mat(bad)
    _passed(f"MAT subset round-trip: {len(shapes)} matrices bit-exact; "
            "v7.3 rejected")


def test_render_determinism(tmp_path):
    from concurrent.futures import ThreadPoolExecutor

    from scdkit._viridis import VIRIDIS_LUT
    assert VIRIDIS_LUT[0] == (68, 1, 84)
    assert VIRIDIS_LUT[255] == (253, 231, 37)
    x = np.random.default_rng(13).standard_normal(8192)
    m = scd_fam(x, EstimatorParams(window_length=128, hop=32), 25600.0)

    def render_bytes(_):
        img = render_scd(m, 224, 224)
        return img.pixels.tobytes()

    sequential = [render_bytes(i) for i in range(4)]
    for workers in (1, 4):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for b in pool.map(render_bytes, range(8)):
                assert b == sequential[0]
    paths = []
    for i in range(2):
        img = render_scd(m, 224, 224)
        path = tmp_path / f"r{i}.png"
        write_png(img, path)
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    _passed("render determinism: identical bytes across runs and thread "
            "counts; colormap endpoints pinned")


def test_synthetic_fault_signatures():
    start = time.perf_counter()
    fs = 11520.0  # 90 Hz impact period = 128 samples exactly
    spec = FaultSpec("BPFO_10", 90.0, resonance=3000.0,
                     severity_gain=2.0, snr_db=6.0, seed=3)
    ts = synth_bearing(spec, 2.0, fs)
    p = EstimatorParams(window_length=256, hop=128, window_kind="rectangular")
    m = scd_fam(ts.samples, p, fs)
    colmax = np.abs(m.values).max(axis=0)
    d0 = m.alpha_zero_index
    bg = np.median([colmax[d0 + d] for d in range(1, 13) if d % 2 == 1])
    levels = []
    for k, d in enumerate((2, 4, 6), start=1):  # alpha = k * 90 Hz
        level = 10 * np.log10(colmax[d0 + d] / bg)
        assert level >= 10.0, f"harmonic k={k}"
        levels.append(level)

    healthy = synth_bearing(FaultSpec.for_class("Healthy", seed=0),
                            256 * 64 / 25600.0 + 0.01, 25600.0)
    pn = EstimatorParams(window_length=64, hop=64,
                         window_kind="rectangular", max_segments=256)
    mh = scd_fam(healthy.samples, pn, healthy.sample_rate)
    magh = np.abs(mh.values)
    offh = magh.copy()
    offh[:, mh.alpha_zero_index] = 0
    assert offh.max() / magh[:, mh.alpha_zero_index].max() < 0.25
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    _passed(f"synthetic fault signatures: BPFO harmonics at "
            f"{', '.join(f'{v:.0f}' for v in levels)} dB; Healthy passes "
            f"null ({elapsed:.1f}s)")


def test_end_to_end_pipeline(tmp_path):
    args = ["dataset", "--synth", "--per-class", "20", "--seed", "7"]
    assert run(args + ["--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--out", str(tmp_path / "b")]) == 0
    pngs = sorted((tmp_path / "a").rglob("*.png"))
    assert len(pngs) == 140
    for name in FAULT_CLASSES:
        assert len(list((tmp_path / "a" / name).glob("*.png"))) == 20
    manifest = DatasetManifest.read(tmp_path / "a" / "manifest.tsv")
    for name in FAULT_CLASSES:
        counts = {"train": 0, "val": 0, "test": 0}
        for e in manifest.entries:
            if e.label == name:
                counts[e.split] += 1
        for got, want in zip((counts["train"], counts["val"], counts["test"]),
                             (14, 4, 2)):
            assert abs(got - want) <= 1
    assert (tmp_path / "a" / "manifest.tsv").read_bytes() == \
        (tmp_path / "b" / "manifest.tsv").read_bytes()
    for f in pngs:
        assert f.read_bytes() == \
            (tmp_path / "b" / f.relative_to(tmp_path / "a")).read_bytes()
    _passed("end-to-end: dataset --synth --per-class 20 -> 140 images, "
            "70/20/10 split, byte-identical re-run")
