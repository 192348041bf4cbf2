"""Elbow angle to pitch mapping and sine synthesis to 16-bit PCM WAV."""

from __future__ import annotations

import math
import wave
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arm import CONTROL_DT_S, AngleTrajectory

F0_MIN_HZ = 1500.0
F0_MAX_HZ = 5150.0
PCM_FULL_SCALE = 32767


@dataclass(frozen=True)
class F0Mapping:
    """Affine map from an elbow-angle range onto the pitch band."""

    angle_min_deg: float = 0.0
    angle_max_deg: float = 90.0
    f0_min_hz: float = F0_MIN_HZ
    f0_max_hz: float = F0_MAX_HZ

    def __post_init__(self):
        if not self.angle_min_deg < self.angle_max_deg:
            raise ValueError("angle_min_deg must be below angle_max_deg")
        if not 0 < self.f0_min_hz < self.f0_max_hz:
            raise ValueError("need 0 < f0_min_hz < f0_max_hz")


@dataclass(frozen=True)
class F0Trajectory:
    """Fundamental-frequency values in Hz per 0.01 s control step."""

    values_hz: Sequence[float]
    dt_s: float = CONTROL_DT_S

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.values_hz, dtype=float))
        if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0)):
            raise ValueError("f0 values must be finite and positive")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values_hz", arr)
        if self.dt_s != CONTROL_DT_S:
            raise ValueError(f"control step is fixed at {CONTROL_DT_S} s")

    def __len__(self) -> int:
        return int(self.values_hz.size)


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio, amplitude values in [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int = 44100

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.samples, dtype=float))
        if arr.size and (not np.all(np.isfinite(arr)) or np.max(np.abs(arr)) > 1.0):
            raise ValueError("samples must be finite and within [-1, 1]")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")

    def __len__(self) -> int:
        return int(self.samples.size)


def map_angle_to_f0(mapping: F0Mapping, theta_deg: float) -> float:
    """Affine angle-to-pitch map; out-of-range angles are clamped first."""
    if not math.isfinite(theta_deg):
        raise ValueError("angle must be finite")
    theta = min(mapping.angle_max_deg, max(mapping.angle_min_deg, theta_deg))
    frac = (theta - mapping.angle_min_deg) / (mapping.angle_max_deg - mapping.angle_min_deg)
    return mapping.f0_min_hz + frac * (mapping.f0_max_hz - mapping.f0_min_hz)


def map_trajectory(mapping: F0Mapping, angles: AngleTrajectory) -> F0Trajectory:
    return F0Trajectory(values_hz=[map_angle_to_f0(mapping, float(t)) for t in angles.angles_deg])


def synthesize(
    f0: F0Trajectory, sample_rate_hz: int = 44100, amplitude: float = 0.8
) -> AudioBuffer:
    """Render an F0 trajectory as a phase-continuous sine tone.

    The frequency is held constant within each 0.01 s control step; the
    oscillator accumulates phase per sample (phi[n+1] = phi[n] +
    2*pi*f0/fs, phi[0] = 0), so there are no discontinuities at step
    boundaries. Output length is len(f0) * fs / 100 samples.
    """
    if len(f0) == 0:
        raise ValueError("f0 trajectory is empty")
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError("amplitude must be within [0, 1]")
    spc_exact = sample_rate_hz * CONTROL_DT_S
    spc = int(round(spc_exact))
    if spc < 1 or abs(spc_exact - spc) > 1e-9:
        raise ValueError(
            f"sample rate {sample_rate_hz} is not a whole number of samples per control step"
        )
    if np.max(f0.values_hz) >= sample_rate_hz / 2:
        raise ValueError("f0 at or above the Nyquist frequency would alias")
    per_sample_hz = np.repeat(f0.values_hz, spc)
    increments = 2.0 * math.pi * per_sample_hz / sample_rate_hz
    phase = np.concatenate(([0.0], np.cumsum(increments[:-1])))
    return AudioBuffer(samples=amplitude * np.sin(phase), sample_rate_hz=sample_rate_hz)


def quantize_pcm16(samples: np.ndarray) -> np.ndarray:
    """Scale [-1, 1] floats by 32767, rounding half away from zero."""
    scaled = np.floor(np.abs(samples) * PCM_FULL_SCALE + 0.5) * np.sign(samples)
    return scaled.astype("<i2")


def write_wav(buf: AudioBuffer, path) -> None:
    """Write mono 16-bit little-endian PCM with a standard 44-byte header."""
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(int(buf.sample_rate_hz))
        wav.writeframes(quantize_pcm16(buf.samples).tobytes())
