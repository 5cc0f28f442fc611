"""Frame-synchronous spectral features on a shared 10 ms grid.

STFT, 80-bin log-mel spectrogram, and A-weighted loudness all share one
FrameConfig so that every per-frame track lines up with every other.
Framing is non-centered (no padding): T = 1 + (n - win) // hop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import defaults
from .audio import AudioClip
from .errors import (
    ClipTooShortError,
    InvalidParameterError,
    RateMismatchError,
    ShapeMismatchError,
)


@dataclass(frozen=True)
class FrameConfig:
    """Analysis grid: Hann window, hop/window/FFT sizes in samples."""

    sample_rate: int = defaults.SAMPLE_RATE
    hop: int = defaults.HOP
    win_length: int = defaults.WIN_LENGTH
    fft_size: int = defaults.FFT_SIZE

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise InvalidParameterError("sample_rate must be positive")
        if self.hop <= 0:
            raise InvalidParameterError("hop must be positive")
        if not 0 < self.win_length <= self.fft_size:
            raise InvalidParameterError("need 0 < win_length <= fft_size")
        if self.fft_size & (self.fft_size - 1):
            raise InvalidParameterError("fft_size must be a power of two")

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    def num_frames(self, n_samples: int) -> int:
        if n_samples < self.win_length:
            raise ClipTooShortError(
                f"{n_samples} samples < one {self.win_length}-sample window"
            )
        return 1 + (n_samples - self.win_length) // self.hop

    def window(self) -> np.ndarray:
        """Periodic Hann."""
        n = np.arange(self.win_length)
        return 0.5 - 0.5 * np.cos(2 * np.pi * n / self.win_length)

    def bin_frequencies(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.sample_rate / self.fft_size


CANONICAL_FRAME_CONFIG = FrameConfig()


def frame_signal(x: np.ndarray, cfg: FrameConfig) -> np.ndarray:
    """[T, win_length] view of non-centered frames."""
    t = cfg.num_frames(x.size)
    stride = x.strides[0]
    return np.lib.stride_tricks.as_strided(
        x, shape=(t, cfg.win_length), strides=(cfg.hop * stride, stride)
    )


def stft(clip: AudioClip, cfg: FrameConfig) -> np.ndarray:
    """One-sided complex spectrogram, shape [T, fft_size//2 + 1]."""
    if clip.sample_rate != cfg.sample_rate:
        raise RateMismatchError(
            f"clip at {clip.sample_rate} Hz, config wants {cfg.sample_rate} Hz"
        )
    frames = frame_signal(clip.samples, cfg) * cfg.window()
    return np.fft.rfft(frames, n=cfg.fft_size, axis=1)


def hz_to_mel(f_hz):
    return 2595.0 * np.log10(1.0 + np.asarray(f_hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular filters with centers uniform on the mel scale.

    weights: [n_mels, n_bins], each row nonnegative and unimodal.
    edges_hz holds the n_mels + 2 band-edge/center frequencies.
    """

    weights: np.ndarray
    edges_hz: np.ndarray
    frame_config: FrameConfig

    @property
    def center_frequencies(self) -> np.ndarray:
        return self.edges_hz[1:-1]


def build_mel_filterbank(cfg: FrameConfig, n_mels: int = defaults.N_MELS,
                         fmin: float = defaults.MEL_FMIN_HZ,
                         fmax: float = defaults.MEL_FMAX_HZ) -> MelFilterbank:
    if not (0 <= fmin < fmax <= cfg.sample_rate / 2):
        raise InvalidParameterError(
            f"need 0 <= fmin < fmax <= Nyquist, got [{fmin}, {fmax}]"
        )
    if n_mels < 1:
        raise InvalidParameterError("n_mels must be >= 1")
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    freqs = cfg.bin_frequencies()
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / np.maximum(mid - lo, 1e-12)
    falling = (hi - freqs) / np.maximum(hi - mid, 1e-12)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    if not np.all(weights.max(axis=1) > 0):
        raise InvalidParameterError(
            "mel filters narrower than one FFT bin; increase fft_size"
        )
    return MelFilterbank(weights, edges, cfg)


@dataclass(frozen=True)
class MelSpectrogram:
    """Natural-log mel energies, shape [T, n_mels]."""

    frames: np.ndarray
    frame_config: FrameConfig


def log_mel(spec: np.ndarray, fb: MelFilterbank) -> MelSpectrogram:
    """Log of (filterbank x power spectrum), floored at log(1e-10)."""
    if spec.ndim != 2 or spec.shape[1] != fb.weights.shape[1]:
        raise ShapeMismatchError(
            f"spectrogram has {spec.shape} bins, filterbank expects "
            f"{fb.weights.shape[1]}"
        )
    power = np.abs(spec) ** 2
    mel = power @ fb.weights.T
    return MelSpectrogram(np.log(np.maximum(mel, defaults.POWER_FLOOR)),
                          fb.frame_config)


def a_weight_db(f_hz):
    """A-weighting in dB, normalized so A(1 kHz) = 0; floored at -200 dB.

    Closed form: A(f) = 20 log10(R_A(f)) + 2.00 with
    R_A(f) = 12194^2 f^4 / [(f^2+20.6^2) sqrt((f^2+107.7^2)(f^2+737.9^2))
             (f^2+12194^2)].
    """
    f = np.asarray(f_hz, dtype=np.float64)
    if np.any(f < 0):
        raise InvalidParameterError("frequency must be >= 0")
    f2 = f * f
    with np.errstate(divide="ignore"):
        ra = (12194.0 ** 2 * f2 * f2) / (
            (f2 + 20.6 ** 2)
            * np.sqrt((f2 + 107.7 ** 2) * (f2 + 737.9 ** 2))
            * (f2 + 12194.0 ** 2)
        )
        out = np.maximum(20.0 * np.log10(ra) + 2.00, defaults.A_WEIGHT_FLOOR_DB)
    return float(out) if np.isscalar(f_hz) else out


@dataclass(frozen=True)
class LoudnessTrack:
    """Per-frame A-weighted loudness in dB on the FrameConfig grid."""

    values: np.ndarray
    frame_config: FrameConfig


def loudness(spec: np.ndarray, cfg: FrameConfig) -> LoudnessTrack:
    """L = 10 log10(sum_k wA(f_k) P(k) + 1e-10) per frame.

    wA is the linear-power A weight 10^(A/10); P the one-sided power
    spectrum. A zero frame therefore reads -100 dB.
    """
    if spec.ndim != 2 or spec.shape[1] != cfg.n_bins:
        raise ShapeMismatchError(
            f"spectrogram has {spec.shape[1] if spec.ndim == 2 else '?'} bins,"
            f" config expects {cfg.n_bins}"
        )
    w = 10.0 ** (a_weight_db(cfg.bin_frequencies()) / 10.0)
    power = np.abs(spec) ** 2
    vals = 10.0 * np.log10(power @ w + defaults.POWER_FLOOR)
    return LoudnessTrack(vals, cfg)
