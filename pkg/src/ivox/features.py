"""Cepstral feature extraction.

Frames go through FFT power spectrum, a triangular mel filterbank, log
compression and a DCT; delta and double-delta sequences are appended to
give 39-dimensional vectors (13 static + 13 + 13) per frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio import AudioSignal, frame_signal, pre_emphasize, window_values
from .errors import EmptySequenceError, InvalidConfigError

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-frame feature vectors, one row per frame."""

    rows: np.ndarray
    frame_rate: float

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2:
            raise ValueError(f"rows must be 2-D, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("feature matrix contains non-finite values")

    @property
    def n_frames(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class FilterBank:
    """Triangular mel filters over FFT bins.

    weights has shape (n_filters, nfft//2 + 1); band_edges_hz holds the
    n_filters + 2 mel-spaced edge frequencies, so filter j spans
    (edges[j], edges[j+2]) with its peak at edges[j+1].
    """

    weights: np.ndarray
    band_edges_hz: np.ndarray

    def __post_init__(self):
        if np.any(self.weights < 0):
            raise InvalidConfigError("filterbank weights must be non-negative")
        empty = np.flatnonzero(self.weights.sum(axis=1) == 0)
        if empty.size:
            raise InvalidConfigError(
                f"filter {empty[0]} has no FFT bin under it; "
                "use a larger nfft or fewer filters"
            )

    @property
    def n_filters(self) -> int:
        return self.weights.shape[0]

    @property
    def centers_hz(self) -> np.ndarray:
        return self.band_edges_hz[1:-1]

    def apply(self, power: np.ndarray) -> np.ndarray:
        """Per-filter energies of one spectrum or a batch of spectra."""
        return power @ self.weights.T


def next_pow2(n: int) -> int:
    m = 1
    while m < n:
        m *= 2
    return m


def power_spectrum(frame: np.ndarray, nfft: int | None = None) -> np.ndarray:
    """|X[k]|^2 for k = 0..nfft/2 of the zero-padded frame.

    nfft defaults to the next power of two >= the frame length.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if nfft is None:
        nfft = next_pow2(frame.size)
    if nfft & (nfft - 1) or nfft < 1:
        raise InvalidConfigError(f"nfft must be a power of two, got {nfft}")
    if frame.size > nfft:
        raise InvalidConfigError(f"frame length {frame.size} exceeds nfft {nfft}")
    spectrum = np.fft.rfft(frame, n=nfft)
    return np.abs(spectrum) ** 2


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def build_filterbank(n_filters: int = 40, nfft: int = 512, rate: int = 16000) -> FilterBank:
    """Triangular filters with centers equally spaced on the mel scale.

    The n_filters + 2 band edges span [0, rate/2]; weights are the
    triangles evaluated at the FFT bin frequencies k*rate/nfft.
    """
    if n_filters < 1:
        raise InvalidConfigError(f"n_filters must be >= 1, got {n_filters}")
    if n_filters > nfft // 2:
        raise InvalidConfigError(
            f"n_filters={n_filters} exceeds nfft/2={nfft // 2}"
        )
    edges = mel_to_hz(np.linspace(hz_to_mel(0.0), hz_to_mel(rate / 2.0), n_filters + 2))
    bin_hz = np.arange(nfft // 2 + 1) * (rate / nfft)

    weights = np.zeros((n_filters, bin_hz.size))
    for j in range(n_filters):
        lo, mid, hi = edges[j], edges[j + 1], edges[j + 2]
        rising = (bin_hz - lo) / (mid - lo)
        falling = (hi - bin_hz) / (hi - mid)
        weights[j] = np.clip(np.minimum(rising, falling), 0.0, None)
    return FilterBank(weights, edges)


@lru_cache(maxsize=8)
def _dct2_matrix(k: int, n: int) -> np.ndarray:
    # Orthonormal DCT-II: row m is scale_m * cos(pi*(2j+1)*m / (2n)).
    j = np.arange(n)
    m = np.arange(k)[:, None]
    mat = np.cos(np.pi * (2 * j + 1) * m / (2 * n))
    mat[0] *= np.sqrt(1.0 / n)
    mat[1:] *= np.sqrt(2.0 / n)
    return mat


def cepstral_coefficients(fb_log_energies: np.ndarray, k: int = 13) -> np.ndarray:
    """First k orthonormal DCT-II coefficients of the log filterbank energies.

    Accepts a single vector or a (frames, n_filters) batch.
    """
    logs = np.asarray(fb_log_energies, dtype=np.float64)
    n = logs.shape[-1]
    if n < k:
        raise InvalidConfigError(f"need at least {k} filterbank values, got {n}")
    return logs @ _dct2_matrix(k, n).T


def delta(ceps: np.ndarray, s: int = 2) -> np.ndarray:
    """Frame-difference dynamics: row m becomes ceps[m+s] - ceps[m-s].

    Indices are clamped to the sequence ends, so the output has the same
    length as the input.
    """
    if s < 1:
        raise ValueError(f"delta window s must be >= 1, got {s}")
    ceps = np.asarray(ceps, dtype=np.float64)
    n = ceps.shape[0]
    if n == 0:
        raise EmptySequenceError("delta of an empty sequence")
    idx = np.arange(n)
    hi = np.minimum(idx + s, n - 1)
    lo = np.maximum(idx - s, 0)
    return ceps[hi] - ceps[lo]


def extract_features(
    signal: AudioSignal,
    *,
    frame_ms: float = 20.0,
    shift_ms: float = 10.0,
    window: str = "hamming",
    n_filters: int = 40,
    n_ceps: int = 13,
    delta_s: int = 2,
    preemph: float = 0.97,
) -> FeatureMatrix:
    """Full front end: waveform to (frames, 3*n_ceps) cepstral features.

    Pipeline: pre-emphasis, framing, windowing, power spectrum, mel
    filterbank, floored log, DCT, then delta and double-delta appended.
    """
    emphasized = pre_emphasize(signal, preemph)
    frames = frame_signal(emphasized, frame_ms, shift_ms)
    windowed = frames.frames * window_values(window, frames.frame_len)

    nfft = next_pow2(frames.frame_len)
    power = power_spectrum_batch(windowed, nfft)
    bank = build_filterbank(n_filters, nfft, signal.sample_rate)
    energies = bank.apply(power)
    logs = np.log(np.maximum(energies, LOG_FLOOR))
    static = cepstral_coefficients(logs, n_ceps)
    d1 = delta(static, delta_s)
    d2 = delta(d1, delta_s)
    rows = np.hstack([static, d1, d2])
    return FeatureMatrix(rows, signal.sample_rate / frames.shift)


def power_spectrum_batch(frames: np.ndarray, nfft: int) -> np.ndarray:
    """power_spectrum applied to each row of a (frames, frame_len) array."""
    if frames.shape[1] > nfft:
        raise InvalidConfigError(f"frame length {frames.shape[1]} exceeds nfft {nfft}")
    return np.abs(np.fft.rfft(frames, n=nfft, axis=1)) ** 2
