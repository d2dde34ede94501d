"""Command-line pipeline: ingestion -> segmentation -> SCD -> images -> dataset.

Exit codes: 0 success, 1 usage error, 2 data error. Worker count for
dataset assembly defaults to the SCDKIT_THREADS environment variable.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import cyclo, ingest, render
from .errors import ScdKitError
from .ingest import FAULT_CLASSES, FaultSpec
from .signal import WINDOW_KINDS, segment


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _log(args, **fields):
    if args.verbose:
        sys.stderr.write(" ".join(f"{k}={v}" for k, v in fields.items()) + "\n")


def _estimator_params(args) -> cyclo.EstimatorParams:
    return cyclo.EstimatorParams(
        window_length=args.nprime, hop=args.hop,
        window_kind=args.window_kind, alpha_max=args.alpha_max)


def _add_estimator_flags(parser):
    parser.add_argument("--nprime", type=int, default=256,
                        help="STFT frame length N' (power of two)")
    parser.add_argument("--hop", type=int, default=64,
                        help="frame hop L in samples")
    parser.add_argument("--window-kind", choices=WINDOW_KINDS, default="hann")
    parser.add_argument("--alpha-max", type=float, default=None,
                        help="cyclic frequency cutoff in Hz (default fs/2)")


def _add_render_flags(parser):
    parser.add_argument("--width", type=int, default=224)
    parser.add_argument("--height", type=int, default=224)
    parser.add_argument("--scale", choices=("linear", "log"), default="log")
    parser.add_argument("--colormap", default="viridis")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scdkit", description=__doc__)
    parser.add_argument("--verbose", action="store_true",
                        help="emit key=value progress lines on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="cut a record into block MAT files")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--window", type=int, default=10000)
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--sample-rate", type=float, default=25600.0)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("scd", help="compute and serialize an SCD map")
    p.add_argument("--input", required=True, help="block file (.mat/.vib/.csv)")
    p.add_argument("--out", required=True, help="output .scd path")
    p.add_argument("--csv", default=None, help="also export |S| as CSV here")
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--sample-rate", type=float, default=25600.0)
    _add_estimator_flags(p)
    p.set_defaults(func=cmd_scd)

    p = sub.add_parser("render", help="render an SCD map (or block) to PNG")
    p.add_argument("--input", required=True, help=".scd map or a block file")
    p.add_argument("--out", required=True, help="output .png path")
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--sample-rate", type=float, default=25600.0)
    _add_estimator_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("synth", help="emit a synthetic bearing record")
    p.add_argument("--fault-class", dest="fault_class", required=True,
                   choices=FAULT_CLASSES)
    p.add_argument("--out", required=True, help=".mat or .vib output path")
    p.add_argument("--duration", type=float, default=10.0, help="seconds")
    p.add_argument("--sample-rate", type=float, default=25600.0)
    p.add_argument("--snr-db", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dataset", help="build a labeled SCD image dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--input", default=None,
                   help="directory tree with <class>/ subdirs of records")
    p.add_argument("--synth", action="store_true",
                   help="generate synthetic inputs instead of reading files")
    p.add_argument("--per-class", type=int, default=20,
                   help="blocks (= images) per class in --synth mode")
    p.add_argument("--window", type=int, default=10000)
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--sample-rate", type=float, default=25600.0)
    p.add_argument("--snr-db", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--load", choices=ingest.LOAD_TAGS, default="0Nm")
    p.add_argument("--housing", choices=ingest.HOUSINGS, default="A")
    _add_estimator_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("inspect", help="print file metadata")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_inspect)
    return parser


def cmd_segment(args) -> int:
    series = ingest.load_series(args.input, args.sample_rate, args.channel)
    blocks = segment(series, args.window)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    for k in range(len(blocks)):
        path = out / f"{stem}_block_{k:05d}.mat"
        rec = ingest.MatRecord("block", (args.window, 1),
                               blocks.block(k).reshape(-1, 1))
        ingest.write_mat(path, [rec])
        _log(args, event="block_written", path=path, block=k)
    print(f"wrote {len(blocks)} blocks of {args.window} samples to {out}")
    return 0


def cmd_scd(args) -> int:
    series = ingest.load_series(args.input, args.sample_rate, args.channel)
    params = _estimator_params(args)
    t0 = time.perf_counter()
    scd = cyclo.scd_fam(series.samples, params, series.sample_rate)
    _log(args, event="scd_done", input=args.input,
         elapsed_s=f"{time.perf_counter() - t0:.3f}",
         n_f=len(scd.f_grid), n_alpha=len(scd.alpha_grid))
    cyclo.save_scd(scd, args.out)
    if args.csv:
        cyclo.scd_to_csv(scd, args.csv)
    print(f"wrote {args.out}")
    return 0


def cmd_render(args) -> int:
    path = Path(args.input)
    if path.suffix.lower() == ".scd":
        scd = cyclo.load_scd(path)
    else:
        series = ingest.load_series(path, args.sample_rate, args.channel)
        scd = cyclo.scd_fam(series.samples, _estimator_params(args),
                            series.sample_rate)
    image = render.render_scd(scd, args.width, args.height,
                              args.scale, args.colormap)
    render.write_png(image, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_synth(args) -> int:
    spec = FaultSpec.for_class(args.fault_class, seed=args.seed,
                               snr_db=args.snr_db)
    series = ingest.synth_bearing(spec, args.duration, args.sample_rate)
    out = Path(args.out)
    if out.suffix.lower() == ".mat":
        rec = ingest.MatRecord("vibration", (len(series), 1),
                               series.samples.reshape(-1, 1))
        ingest.write_mat(out, [rec])
    else:
        ingest.write_vib(out, series)
    print(f"wrote {len(series)} samples to {out}")
    return 0


def _synth_inputs(args):
    for i, name in enumerate(sorted(FAULT_CLASSES)):
        spec = FaultSpec.for_class(name, seed=args.seed + i, snr_db=args.snr_db)
        duration = args.per_class * args.window / args.sample_rate
        yield (ingest.synth_bearing(spec, duration, args.sample_rate),
               name, args.load, args.housing)


def _tree_inputs(args):
    root = Path(args.input)
    for name in sorted(FAULT_CLASSES):
        class_dir = root / name
        if not class_dir.is_dir():
            continue
        for path in sorted(class_dir.iterdir()):
            if path.suffix.lower() in (".mat", ".vib", ".csv"):
                series = ingest.load_series(path, args.sample_rate, args.channel)
                yield series, name, args.load, args.housing


def cmd_dataset(args) -> int:
    if not args.synth and not args.input:
        return _usage_error("dataset requires --input or --synth")
    inputs = _synth_inputs(args) if args.synth else _tree_inputs(args)
    workers = int(os.environ.get("SCDKIT_THREADS", "1"))
    manifest = ingest.build_dataset(
        inputs, args.out, _estimator_params(args), window_length=args.window,
        image_size=(args.width, args.height), scale=args.scale,
        colormap=args.colormap, seed=args.seed, workers=workers)
    _log(args, event="dataset_done", images=len(manifest.entries),
         skipped=len(manifest.skipped))
    print(f"wrote {len(manifest.entries)} images "
          f"({len(manifest.skipped)} blocks skipped) to {args.out}")
    return 0


def _usage_error(message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    return 1


def cmd_inspect(args) -> int:
    path = Path(args.input)
    suffix = path.suffix.lower()
    if suffix == ".mat":
        for rec in ingest.read_mat(path):
            print(f"matrix name={rec.name!r} shape={rec.shape}")
    elif suffix == ".vib":
        series = ingest.read_vib(path)
        print(f"vib samples={len(series)} sample_rate={series.sample_rate}")
    elif suffix == ".scd":
        scd = cyclo.load_scd(path)
        print(f"scd n_f={len(scd.f_grid)} n_alpha={len(scd.alpha_grid)} "
              f"f_range=[{scd.f_grid[0]:g},{scd.f_grid[-1]:g}] "
              f"alpha_range=[{scd.alpha_grid[0]:g},{scd.alpha_grid[-1]:g}]")
    elif suffix == ".csv":
        series = ingest.read_csv_series(path, 1.0)
        print(f"csv samples={len(series)}")
    else:
        return _usage_error(f"cannot inspect {suffix!r} files")
    return 0


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ScdKitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ValueError, IndexError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
