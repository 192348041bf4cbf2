"""Shared test utilities: independent oracles and file readers."""

import struct
import wave

import numpy as np


def count_zero_crossings(samples: np.ndarray, direction: str = "both") -> int:
    """Count sign changes of a sampled waveform.

    direction="up" counts only negative-to-nonnegative transitions
    (about f per second for a sine at f Hz); "both" counts every sign
    change (about 2f per second).
    """
    s = np.sign(samples)
    # treat exact zeros as belonging to the following sign regime
    for i in range(1, len(s)):
        if s[i] == 0:
            s[i] = s[i - 1]
    changes = s[1:] * s[:-1] < 0
    if direction == "both":
        return int(np.count_nonzero(changes))
    if direction == "up":
        return int(np.count_nonzero(changes & (s[1:] > 0)))
    raise ValueError(direction)


def read_wav(path):
    """Return (sample_rate, int16 sample array) using the stdlib reader."""
    with wave.open(str(path), "rb") as wav:
        assert wav.getnchannels() == 1
        assert wav.getsampwidth() == 2
        rate = wav.getframerate()
        data = wav.readframes(wav.getnframes())
    return rate, np.frombuffer(data, dtype="<i2")


def parse_wav_header(blob: bytes) -> dict:
    """Struct-unpack the canonical 44-byte RIFF/WAVE PCM header."""
    fields = struct.unpack("<4sI4s4sIHHIIHH4sI", blob[:44])
    return {
        "riff": fields[0],
        "riff_size": fields[1],
        "wave": fields[2],
        "fmt": fields[3],
        "fmt_size": fields[4],
        "audio_format": fields[5],
        "channels": fields[6],
        "sample_rate": fields[7],
        "byte_rate": fields[8],
        "block_align": fields[9],
        "bits_per_sample": fields[10],
        "data": fields[11],
        "data_size": fields[12],
    }


def optimal_stump(xs, labels):
    """Exhaustive-search decision stump for a 2-class, 1-feature dataset.

    Tries every midpoint between consecutive sorted unique values (plus
    the degenerate all-left/all-right stumps) and returns the classifier
    with the fewest training misclassifications, lowest threshold first.
    Returns (threshold, left_label, right_label) as a predict function.
    """
    xs = np.asarray(xs, dtype=float)
    classes = sorted(set(labels))
    assert len(classes) == 2
    uniq = np.unique(xs)
    thresholds = [uniq[0] - 1.0] + [0.5 * (a + b) for a, b in zip(uniq[:-1], uniq[1:])]
    best = None  # (errors, threshold, left, right)
    for thr in thresholds:
        for left, right in ((classes[0], classes[1]), (classes[1], classes[0])):
            errors = sum(
                1 for x, lab in zip(xs, labels)
                if (left if x <= thr else right) != lab
            )
            cand = (errors, thr, left, right)
            if best is None or cand[0] < best[0]:
                best = cand
    _, thr, left, right = best

    def predict(x):
        return left if x <= thr else right

    return predict
