"""Vibration-to-SCD-image pipeline for bearing condition monitoring."""

from .cyclo import (EstimatorParams, ScdMap, StftFrame, load_scd, psd_welch,
                    save_scd, scd_direct, scd_fam, scd_to_csv, stft)
from .errors import (CorruptFileError, InsufficientDataError, ScdKitError,
                     UnsupportedFormatError)
from .ingest import (FAULT_CLASSES, DatasetManifest, FaultSpec, ManifestEntry,
                     MatRecord, build_dataset, extract_channel, read_mat,
                     read_vib, synth_bearing, write_mat, write_vib)
from .render import ScdImage, read_png, render_scd, write_png, write_ppm
from .signal import (SegmentSet, TimeSeries, TimeVector, make_time_vector,
                     segment, window_function)

__version__ = "0.1.0"
