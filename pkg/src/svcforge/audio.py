"""WAV I/O, mono mixdown, and polyphase resampling.

Everything downstream runs at the canonical 24 kHz rate; `resample` is the
only sanctioned way to get there. Clips are immutable values.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from . import defaults
from .errors import (
    InvalidParameterError,
    MalformedWavError,
    MissingFileError,
    UnsupportedEncodingError,
)
from .svcf import atomic_write_bytes


@dataclass(frozen=True)
class AudioClip:
    """Mono waveform plus its sample rate. Amplitudes nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise InvalidParameterError("clip must be mono (1-D samples)")
        if samples.size and not np.all(np.isfinite(samples)):
            raise InvalidParameterError("clip samples must be finite")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise InvalidParameterError("sample_rate must be a positive integer")
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration_sec(self) -> float:
        return self.samples.size / self.sample_rate


def read_wav(path: str | os.PathLike) -> AudioClip:
    """Read a RIFF/WAVE file (16/24-bit PCM or 32-bit float, mono or stereo).

    Stereo is averaged down to mono. Integer samples are scaled to [-1, 1]
    by 2^(bits-1). The clip keeps the file's native sample rate.
    """
    p = Path(path)
    if not p.exists():
        raise MissingFileError(f"no such file: {p}")
    blob = p.read_bytes()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise MalformedWavError(f"{p}: not a RIFF/WAVE file")

    fmt = None
    raw = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos:pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise MalformedWavError(f"{p}: truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if size < 16:
                raise MalformedWavError(f"{p}: fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            raw = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or raw is None:
        raise MalformedWavError(f"{p}: missing fmt or data chunk")
    format_tag, channels, rate, _byte_rate, block_align, bits = fmt
    if rate <= 0:
        raise MalformedWavError(f"{p}: nonsensical sample rate {rate}")
    if channels not in (1, 2):
        raise UnsupportedEncodingError(f"{p}: {channels} channels (want 1 or 2)")

    if format_tag == 1 and bits == 16:
        if len(raw) % (2 * channels):
            raise MalformedWavError(f"{p}: data not a whole number of frames")
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif format_tag == 1 and bits == 24:
        if len(raw) % (3 * channels):
            raise MalformedWavError(f"{p}: data not a whole number of frames")
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        vals = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        vals = np.where(vals & 0x800000, vals - 0x1000000, vals)
        x = vals.astype(np.float64) / 8388608.0
    elif format_tag == 3 and bits == 32:
        if len(raw) % (4 * channels):
            raise MalformedWavError(f"{p}: data not a whole number of frames")
        x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedEncodingError(
            f"{p}: format tag {format_tag} at {bits} bits is not supported"
        )

    if channels == 2:
        x = x.reshape(-1, 2).mean(axis=1)
    return AudioClip(x, int(rate))


def write_wav(clip: AudioClip, path: str | os.PathLike) -> None:
    """Write a clip as 16-bit PCM. Out-of-range samples are clamped."""
    q = np.clip(np.rint(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    data = q.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, 1, 1, clip.sample_rate, clip.sample_rate * 2, 2, 16
    )
    header += b"data" + struct.pack("<I", len(data))
    atomic_write_bytes(path, header + data)


def _lowpass_kernel(up: int, down: int) -> np.ndarray:
    """Kaiser-windowed sinc prototype for the polyphase resampler.

    64 taps per phase at the internal (upsampled) rate, cutoff at the
    narrower of the two Nyquist bands.
    """
    max_rate = max(up, down)
    half = (defaults.RESAMPLE_TAPS_PER_PHASE * max_rate) // 2
    n = np.arange(-half, half + 1)
    cutoff = 1.0 / (2.0 * max_rate)
    kernel = 2.0 * cutoff * np.sinc(2.0 * cutoff * n)
    return kernel * np.kaiser(kernel.size, defaults.RESAMPLE_KAISER_BETA)


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited rate conversion. Identity when rates already match.

    Output length is ceil(n * target / source), so duration is preserved
    to within one output sample.
    """
    if int(target_rate) != target_rate or target_rate <= 0:
        raise InvalidParameterError("target_rate must be a positive integer")
    target_rate = int(target_rate)
    if target_rate == clip.sample_rate:
        return clip
    if clip.samples.size == 0:
        return AudioClip(np.zeros(0), target_rate)
    g = gcd(clip.sample_rate, target_rate)
    up, down = target_rate // g, clip.sample_rate // g
    y = resample_poly(clip.samples, up, down, window=_lowpass_kernel(up, down))
    return AudioClip(y, target_rate)
