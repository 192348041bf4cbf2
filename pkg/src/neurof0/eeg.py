"""EEG data model: recordings, fixed-size frames, labels, CSV I/O, splitting.

Conventions
-----------
* Signal values are in microvolts, sampled at 1000 Hz on 10 channels.
* The control rate of the downstream actuator is 100 Hz, so a frame is a
  10 channel x 10 sample window covering 0.01 s.
* Elbow-angle kinematics, when present, are stored at the control rate:
  one value in degrees per frame.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import DataError
from .rng import SplitMix64

DEFAULT_CHANNELS = ("FP1", "FP2", "F7", "F8", "T3", "T4", "T5", "T6", "O1", "O2")
N_CHANNELS = 10
SAMPLES_PER_FRAME = 10
ANGLE_COLUMN = "angle_deg"


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, order=True)
class ActivationClass:
    """One of the ten discretized muscle-activation levels {0.1, ..., 1.0}.

    Stored as the class index k in 1..10; the level is k/10.
    """

    index: int

    def __post_init__(self):
        if not isinstance(self.index, int) or not 1 <= self.index <= 10:
            raise ValueError(f"class index must be an integer in 1..10, got {self.index!r}")

    @property
    def level(self) -> float:
        return self.index / 10.0

    @classmethod
    def from_level(cls, level: float) -> "ActivationClass":
        """Exact constructor: level must be one of the ten admissible values."""
        k = round(level * 10)
        if abs(level * 10 - k) > 1e-9 or not 1 <= k <= 10:
            raise ValueError(f"{level!r} is not an admissible activation level")
        return cls(int(k))

    @classmethod
    def nearest(cls, value: float) -> "ActivationClass":
        """Nearest class to an arbitrary activation value; ties round up.

        Values are clamped into the class range first, so 0.0 maps to the
        lowest class 0.1 (there is no class 0).
        """
        if not np.isfinite(value):
            raise ValueError("activation value must be finite")
        k = int(np.floor(value * 10.0 + 0.5))
        return cls(min(10, max(1, k)))


@dataclass(frozen=True)
class EegFrame:
    """One 10 x 10 window of EEG (channels x samples, microvolts)."""

    values: np.ndarray
    index: int = 0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != (N_CHANNELS, SAMPLES_PER_FRAME):
            raise ValueError(f"frame must be {N_CHANNELS}x{SAMPLES_PER_FRAME}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("frame contains non-finite values")
        object.__setattr__(self, "values", _readonly(arr))

    def features(self) -> np.ndarray:
        """Row-major (channel-major) flattening into a 100-vector."""
        return self.values.ravel()


@dataclass(frozen=True)
class EegRecording:
    """Multichannel EEG time series with optional elbow-angle kinematics.

    samples has shape (n_channels, n_samples); kinematics, when present,
    holds one angle in degrees per 0.01 s control step.
    """

    samples: np.ndarray
    channel_names: Sequence[str] = DEFAULT_CHANNELS
    sample_rate_hz: float = 1000.0
    kinematics: Optional[np.ndarray] = None

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2:
            raise ValueError("samples must be a 2-D channels x samples array")
        names = tuple(str(n) for n in self.channel_names)
        if arr.shape[0] != len(names):
            raise ValueError(
                f"{arr.shape[0]} channel rows but {len(names)} channel names"
            )
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", _readonly(arr))
        object.__setattr__(self, "channel_names", names)
        if self.kinematics is not None:
            object.__setattr__(self, "kinematics", _readonly(np.atleast_1d(self.kinematics)))

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    """Frames paired with activation-class labels."""

    frames: Sequence[EegFrame]
    labels: Sequence[ActivationClass]
    split_seed: int = 0
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "metadata", dict(self.metadata))
        if len(self.frames) != len(self.labels):
            raise ValueError(
                f"{len(self.frames)} frames but {len(self.labels)} labels"
            )

    def __len__(self) -> int:
        return len(self.frames)


def load_recording_csv(path) -> EegRecording:
    """Read a recording from CSV.

    Expected layout: a header row naming the 10 EEG channels, optionally
    followed by an ``angle_deg`` column; one data row per 1 ms sample.
    The angle column may be populated only on some rows (normally every
    10th row, once per control step); empty cells are skipped and the
    non-empty values become the kinematics series in row order.

    Raises DataError on a wrong channel count, ragged rows, or any
    non-numeric cell. A missing file raises FileNotFoundError.
    """
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row")
        header = [h.strip() for h in header]
        angle_col = None
        if ANGLE_COLUMN in header:
            angle_col = header.index(ANGLE_COLUMN)
            channel_names = [h for i, h in enumerate(header) if i != angle_col]
        else:
            channel_names = header
        if len(channel_names) != N_CHANNELS:
            raise DataError(
                f"{path}: expected {N_CHANNELS} signal columns, found {len(channel_names)}"
            )

        columns: list[list[float]] = [[] for _ in channel_names]
        angles: list[float] = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            ch = 0
            for i, cell in enumerate(row):
                if i == angle_col:
                    cell = cell.strip()
                    if cell:
                        angles.append(_parse_cell(cell, path, row_no))
                    continue
                columns[ch].append(_parse_cell(cell, path, row_no))
                ch += 1

    samples = np.array(columns, dtype=float)
    if samples.size == 0:
        samples = samples.reshape(N_CHANNELS, 0)
    kinematics = np.array(angles, dtype=float) if angles else None
    return EegRecording(samples=samples, channel_names=channel_names, kinematics=kinematics)


def _parse_cell(cell: str, path, row_no: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"{path}: non-numeric cell {cell!r} on row {row_no}") from None


def write_recording_csv(rec: EegRecording, path) -> None:
    """Write a recording in the format understood by load_recording_csv.

    Kinematics, when present, must hold one angle per control step
    (n_samples / 10 values); each is written on the first row of its
    0.01 s window.
    """
    kin = rec.kinematics
    if kin is not None and len(kin) * SAMPLES_PER_FRAME != rec.n_samples:
        raise DataError(
            f"kinematics length {len(kin)} does not match "
            f"{rec.n_samples} samples at one angle per {SAMPLES_PER_FRAME} rows"
        )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = list(rec.channel_names)
        if kin is not None:
            header.append(ANGLE_COLUMN)
        writer.writerow(header)
        for t in range(rec.n_samples):
            row = [repr(float(v)) for v in rec.samples[:, t]]
            if kin is not None:
                row.append(repr(float(kin[t // SAMPLES_PER_FRAME])) if t % SAMPLES_PER_FRAME == 0 else "")
            writer.writerow(row)


def window_frames(rec: EegRecording, window_s: float = 0.01) -> list[EegFrame]:
    """Cut a recording into consecutive non-overlapping 10 x 10 frames.

    The trailing partial window, if any, is dropped. window_s times the
    sample rate must be a whole number of samples (10 at the defaults).
    """
    spw_exact = window_s * rec.sample_rate_hz
    spw = int(round(spw_exact))
    if spw <= 0 or abs(spw_exact - spw) > 1e-9:
        raise ValueError(
            f"window of {window_s} s is not a whole number of samples at "
            f"{rec.sample_rate_hz} Hz"
        )
    n_frames = rec.n_samples // spw
    if n_frames == 0:
        raise ValueError(
            f"recording has {rec.n_samples} samples, fewer than one {spw}-sample window"
        )
    return [
        EegFrame(values=rec.samples[:, i * spw:(i + 1) * spw], index=i)
        for i in range(n_frames)
    ]


def split_dataset(
    ds: LabeledDataset, train_fraction: float = 0.7, seed: int = 0
) -> tuple[LabeledDataset, LabeledDataset]:
    """Deterministic shuffled train/test split.

    The permutation comes from a Fisher-Yates shuffle driven by the
    splitmix64 stream seeded with ``seed`` (see rng module and README),
    so partitions are reproducible across implementations. Train size is
    round(n * train_fraction), rounding half up.
    """
    if len(ds) == 0:
        raise ValueError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    order = list(range(len(ds)))
    SplitMix64(seed).shuffle(order)
    n_train = int(np.floor(len(ds) * train_fraction + 0.5))
    def take(indices: Iterable[int], tag: str) -> LabeledDataset:
        idx = list(indices)
        meta = dict(ds.metadata)
        meta["split"] = tag
        return LabeledDataset(
            frames=[ds.frames[i] for i in idx],
            labels=[ds.labels[i] for i in idx],
            split_seed=seed,
            metadata=meta,
        )
    return take(order[:n_train], "train"), take(order[n_train:], "test")
