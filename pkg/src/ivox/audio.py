"""PCM audio ingestion: WAV reading, pre-emphasis, framing and windowing.

All functions are pure: they take immutable value objects and return new
ones, so results are safe to share across threads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SignalTooShortError, UnsupportedFormatError

ACCEPTED_SAMPLE_RATES = (8000, 16000, 32000)

WINDOW_KINDS = ("hamming", "hanning")


@dataclass(frozen=True)
class AudioSignal:
    """Mono waveform with amplitudes normalized to [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class FrameSequence:
    """Contiguous fixed-length slices of a signal, one row per frame."""

    frames: np.ndarray
    frame_len: int
    shift: int
    sample_rate: int

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[1] != self.frame_len:
            raise ValueError(
                f"frames must be (n, {self.frame_len}), got {self.frames.shape}"
            )

    def __len__(self) -> int:
        return self.frames.shape[0]


def read_wav(path) -> AudioSignal:
    """Read a RIFF/WAVE file containing 16-bit mono PCM.

    Sample values are scaled by 1/32768 so the result lies in [-1, 1].
    Raises FileNotFoundError for a missing file and UnsupportedFormatError
    (naming the offending header field) for anything but plain 16-bit
    mono PCM at an accepted sample rate.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF":
        raise UnsupportedFormatError(f"{path}: missing RIFF chunk id")
    if data[8:12] != b"WAVE":
        raise UnsupportedFormatError(f"{path}: RIFF form type is not WAVE")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if size < 16:
                raise UnsupportedFormatError(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise UnsupportedFormatError(f"{path}: no fmt chunk")
    if payload is None:
        raise UnsupportedFormatError(f"{path}: no data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise UnsupportedFormatError(
            f"{path}: fmt.audio_format={audio_format} (only 1 = PCM supported)"
        )
    if channels != 1:
        raise UnsupportedFormatError(
            f"{path}: fmt.channels={channels} (only mono supported)"
        )
    if bits != 16:
        raise UnsupportedFormatError(
            f"{path}: fmt.bits_per_sample={bits} (only 16 supported)"
        )
    if sample_rate not in ACCEPTED_SAMPLE_RATES:
        raise UnsupportedFormatError(
            f"{path}: fmt.sample_rate={sample_rate} "
            f"(accepted: {', '.join(str(r) for r in ACCEPTED_SAMPLE_RATES)})"
        )

    raw = np.frombuffer(payload[:len(payload) - len(payload) % 2], dtype="<i2")
    return AudioSignal(raw.astype(np.float64) / 32768.0, sample_rate)


def pre_emphasize(signal: AudioSignal, coeff: float = 0.97) -> AudioSignal:
    """Apply the first-order high-pass difference y[n] = x[n] - coeff*x[n-1].

    y[0] = x[0]; length is preserved. coeff = 0 is the identity.
    """
    if not 0.0 <= coeff < 1.0:
        raise ValueError(f"pre-emphasis coeff must be in [0, 1), got {coeff}")
    x = signal.samples
    if x.size == 0:
        return AudioSignal(x.copy(), signal.sample_rate)
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - coeff * x[:-1]
    return AudioSignal(y, signal.sample_rate)


def frame_signal(
    signal: AudioSignal, frame_ms: float = 20.0, shift_ms: float = 10.0
) -> FrameSequence:
    """Slice the signal into overlapping frames of frame_ms every shift_ms.

    A trailing partial frame is dropped, never padded. Raises
    SignalTooShortError when the signal holds less than one frame.
    """
    if not frame_ms >= shift_ms > 0:
        raise ValueError(f"need frame_ms >= shift_ms > 0, got {frame_ms}/{shift_ms}")
    rate = signal.sample_rate
    frame_len = int(round(frame_ms * rate / 1000.0))
    shift = int(round(shift_ms * rate / 1000.0))
    n = signal.samples.size
    if n < frame_len:
        raise SignalTooShortError(
            f"signal has {n} samples, needs at least {frame_len} for one frame"
        )
    count = (n - frame_len) // shift + 1
    offsets = np.arange(count) * shift
    frames = signal.samples[offsets[:, None] + np.arange(frame_len)[None, :]]
    return FrameSequence(frames, frame_len, shift, rate)


def window_values(kind: str, n: int) -> np.ndarray:
    """Window weights of length n; kind is 'hamming' or 'hanning'."""
    kind = kind.lower()
    if kind not in WINDOW_KINDS:
        raise ValueError(f"unknown window kind {kind!r}, expected one of {WINDOW_KINDS}")
    if n < 1:
        raise ValueError("window length must be >= 1")
    if n == 1:
        return np.ones(1)
    t = 2.0 * np.pi * np.arange(n) / (n - 1)
    if kind == "hamming":
        return 0.54 - 0.46 * np.cos(t)
    return 0.5 * (1.0 - np.cos(t))


def apply_window(frame: np.ndarray, kind: str = "hamming") -> np.ndarray:
    """Multiply a frame elementwise by a Hamming or Hanning window."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("frame must be non-empty")
    return frame * window_values(kind, frame.size)
