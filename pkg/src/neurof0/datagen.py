"""Synthetic class-conditional EEG and kinematics generator.

Stands in for recorded data at desk scale and doubles as a ground-truth
oracle for end-to-end tests. Each activation class k is encoded as a
carrier sinusoid of amplitude k * amp_per_class microvolts on all ten
channels; independent white Gaussian noise is added per channel and
sample, scaled so each frame individually meets the configured SNR:

    snr_db = 10 * log10(P_signal / P_noise)

with P_signal the mean square of the frame's noiseless values. The
carrier phase runs continuously across the recording (sample t has phase
2*pi*carrier_hz*t/fs), as in a real multi-window recording, so a frame's
ordinal determines its phase offset. Amplitude, not frequency, encodes
the class: a least-squares projection onto the known carrier segment
recovers the amplitude analytically, which makes classifier correctness
checkable against a closed-form oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arm import ArmModel, ActivationTrajectory, equilibrium_angle, forward_dynamics
from .eeg import (
    ActivationClass,
    EegFrame,
    EegRecording,
    LabeledDataset,
    N_CHANNELS,
    SAMPLES_PER_FRAME,
)


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic generator."""

    n_samples: int = 500
    snr_db: float = 40.0
    seed: int = 0
    carrier_hz: float = 20.0
    amp_per_class: float = 5.0
    sample_rate_hz: float = 1000.0

    def __post_init__(self):
        if self.n_samples < 10:
            raise ValueError("n_samples must be at least 10 (one per class)")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if not 0 < self.carrier_hz < self.sample_rate_hz / 2:
            raise ValueError("carrier_hz must lie below the Nyquist frequency")
        if not self.amp_per_class > 0:
            raise ValueError("amp_per_class must be positive")
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must be a number (use inf for noiseless)")


def _clean_signal(cfg: SynthConfig, classes: list[ActivationClass]) -> np.ndarray:
    """Noiseless single-channel signal for a sequence of per-frame classes."""
    amps = np.repeat([c.index * cfg.amp_per_class for c in classes], SAMPLES_PER_FRAME)
    t = np.arange(len(classes) * SAMPLES_PER_FRAME) / cfg.sample_rate_hz
    return amps * np.sin(2.0 * math.pi * cfg.carrier_hz * t)


def _noisy_channels(cfg: SynthConfig, clean: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Replicate the signal on all channels and add per-frame-scaled noise."""
    out = np.tile(clean, (N_CHANNELS, 1))
    if math.isinf(cfg.snr_db):
        return out
    power = clean.reshape(-1, SAMPLES_PER_FRAME)
    frame_power = np.mean(power**2, axis=1)
    sigma = np.sqrt(frame_power / 10.0 ** (cfg.snr_db / 10.0))
    per_sample_sigma = np.repeat(sigma, SAMPLES_PER_FRAME)
    out += rng.normal(0.0, 1.0, size=out.shape) * per_sample_sigma
    return out


def generate_dataset(cfg: SynthConfig) -> LabeledDataset:
    """Balanced labeled dataset of frames, deterministic given the seed.

    Labels are assigned round-robin over the ten classes (so counts are
    balanced up to rounding) and then shuffled; frames are cut in order
    from one continuous synthetic recording, so frame index equals
    position.
    """
    rng = np.random.default_rng(cfg.seed)
    labels = [ActivationClass((i % 10) + 1) for i in range(cfg.n_samples)]
    perm = rng.permutation(cfg.n_samples)
    labels = [labels[i] for i in perm]

    samples = _noisy_channels(cfg, _clean_signal(cfg, labels), rng)
    frames = [
        EegFrame(values=samples[:, p * SAMPLES_PER_FRAME:(p + 1) * SAMPLES_PER_FRAME], index=p)
        for p in range(cfg.n_samples)
    ]
    meta = {"generator": "synthetic", "seed": str(cfg.seed), "snr_db": str(cfg.snr_db)}
    return LabeledDataset(frames=frames, labels=labels, metadata=meta)


def ramp_classes(n_steps: int) -> list[ActivationClass]:
    """Class staircase of a triangle ramp 0.1 -> 1.0 -> 0.1 over n_steps."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    out = []
    for p in range(n_steps):
        frac = p / (n_steps - 1) if n_steps > 1 else 0.0
        tri = 2.0 * frac if frac <= 0.5 else 2.0 * (1.0 - frac)
        out.append(ActivationClass.nearest(0.1 + 0.9 * tri))
    return out


def generate_movement(
    cfg: SynthConfig, n_steps: int, model: ArmModel | None = None
) -> tuple[EegRecording, list[ActivationClass]]:
    """Synthetic movement trial: ramped activations, their EEG, and kinematics.

    The activation trajectory ramps up and back down across the classes;
    each control step contributes one frame of the class-conditional EEG.
    The kinematics track is the arm model's simulated response to that
    activation trajectory starting from rest, i.e. the motion the
    (simulated) hand actually performs, which downstream evaluation treats
    as the recorded ground truth.
    """
    if model is None:
        model = ArmModel()
    classes = ramp_classes(n_steps)
    rng = np.random.default_rng(cfg.seed)
    samples = _noisy_channels(cfg, _clean_signal(cfg, classes), rng)
    angles = forward_dynamics(model, ActivationTrajectory.from_classes(classes))
    rec = EegRecording(samples=samples, kinematics=angles.angles_deg)
    return rec, classes


def oracle_classify(frame: EegFrame, cfg: SynthConfig) -> ActivationClass:
    """Closed-form amplitude-threshold oracle for synthetic frames.

    Projects the channel-averaged frame onto the unit-amplitude carrier
    segment that generated it (known from the frame ordinal), yielding the
    least-squares amplitude estimate; the class is read off by thresholding
    at the midpoints between class amplitudes. On noiseless frames this is
    exact; it is the Bayes classifier under the generator's Gaussian noise.
    """
    t = (frame.index * SAMPLES_PER_FRAME + np.arange(SAMPLES_PER_FRAME)) / cfg.sample_rate_hz
    template = np.sin(2.0 * math.pi * cfg.carrier_hz * t)
    norm = float(template @ template)
    if norm <= 0.0:
        raise ValueError("degenerate carrier segment; cannot estimate amplitude")
    amp_hat = float(template @ frame.values.mean(axis=0)) / norm
    k = int(math.floor(amp_hat / cfg.amp_per_class + 0.5))
    return ActivationClass(min(10, max(1, k)))


def dataset_to_recording(ds: LabeledDataset, model: ArmModel | None = None) -> EegRecording:
    """Concatenate a dataset into one recording with label-encoding kinematics.

    Each frame's angle is the equilibrium angle of its label, so windowing
    the recording and inverting the kinematics recovers the labels exactly.
    Frames are written in dataset order.
    """
    if model is None:
        model = ArmModel()
    if len(ds) == 0:
        raise ValueError("cannot serialize an empty dataset")
    samples = np.hstack([f.values for f in ds.frames])
    kinematics = np.array([equilibrium_angle(model, lab.level) for lab in ds.labels])
    return EegRecording(samples=samples, kinematics=kinematics)
