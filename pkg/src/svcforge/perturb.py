"""Information-perturbation transforms: formant shift, pitch randomization,
and a parametric equalizer, plus the seeded pair generator that feeds the
contrastive objective.

All three transforms alter speaker-correlated acoustics while leaving the
linguistic content (timing, F0 for formant shift/EQ) intact. Given the same
seed, `random_perturb_pair` is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from . import defaults
from .audio import AudioClip, resample
from .errors import InvalidParameterError, RateMismatchError
from .pitch import semitones_to_ratio


@dataclass(frozen=True)
class PerturbConfig:
    """Parameter ranges for the random perturbation chains."""

    formant_ratio_range: tuple = (defaults.FORMANT_RATIO_LO, defaults.FORMANT_RATIO_HI)
    pitch_semitone_range: tuple = (defaults.PITCH_SEMITONE_LO, defaults.PITCH_SEMITONE_HI)
    eq_bands: int = defaults.EQ_BANDS
    eq_gain_range_db: tuple = (defaults.EQ_GAIN_LO_DB, defaults.EQ_GAIN_HI_DB)
    eq_q_range: tuple = (defaults.EQ_Q_LO, defaults.EQ_Q_HI)
    seed: int = 0

    def __post_init__(self):
        for name in ("formant_ratio_range", "pitch_semitone_range",
                     "eq_gain_range_db", "eq_q_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidParameterError(f"{name}: lo must be <= hi")
        if self.formant_ratio_range[0] <= 0:
            raise InvalidParameterError("formant ratios must be positive")
        if self.eq_q_range[0] <= 0:
            raise InvalidParameterError("Q must be positive")
        if self.eq_bands < 1:
            raise InvalidParameterError("eq_bands must be >= 1")


@dataclass(frozen=True)
class BiquadCoeffs:
    """Normalized biquad (a0 == 1). Poles must sit inside the unit circle."""

    b0: float
    b1: float
    b2: float
    a1: float
    a2: float

    def __post_init__(self):
        roots = np.roots([1.0, self.a1, self.a2])
        if np.any(np.abs(roots) >= 1.0):
            raise InvalidParameterError("unstable biquad: pole outside unit circle")

    def response_at(self, f_hz: float, sample_rate: int) -> complex:
        """Transfer function evaluated on the unit circle at f_hz."""
        z = np.exp(-2j * np.pi * f_hz / sample_rate)
        return complex(
            (self.b0 + self.b1 * z + self.b2 * z * z)
            / (1.0 + self.a1 * z + self.a2 * z * z)
        )


def peaking_biquad(fc_hz: float, q: float, gain_db: float,
                   sample_rate: int) -> BiquadCoeffs:
    """Peaking-EQ biquad (cookbook closed form).

    |H| at fc equals 10^(gain_db/20) exactly; gain_db = 0 collapses to the
    identity filter.
    """
    if not 0 < fc_hz < sample_rate / 2:
        raise InvalidParameterError(f"fc must be in (0, Nyquist), got {fc_hz}")
    if q <= 0:
        raise InvalidParameterError("q must be positive")
    amp = 10.0 ** (gain_db / 40.0)
    w0 = 2.0 * np.pi * fc_hz / sample_rate
    alpha = np.sin(w0) / (2.0 * q)
    a0 = 1.0 + alpha / amp
    return BiquadCoeffs(
        b0=(1.0 + alpha * amp) / a0,
        b1=-2.0 * np.cos(w0) / a0,
        b2=(1.0 - alpha * amp) / a0,
        a1=-2.0 * np.cos(w0) / a0,
        a2=(1.0 - alpha / amp) / a0,
    )


def parametric_eq(clip: AudioClip, bands: list) -> AudioClip:
    """Cascade of peaking filters; bands are (fc_hz, q, gain_db) triples."""
    y = clip.samples
    for fc, q, gain_db in bands:
        c = peaking_biquad(fc, q, gain_db, clip.sample_rate)
        y = lfilter([c.b0, c.b1, c.b2], [1.0, c.a1, c.a2], y)
    return AudioClip(np.asarray(y, dtype=np.float64), clip.sample_rate)


# --- STFT machinery owned by the formant shifter -------------------------
# 1024-point frames, quarter-window hop, periodic Hann on both analysis and
# synthesis (COLA at this hop), so the rho = 1 path is a clean round trip.

_FFT = 1024
_HOP = _FFT // 4


def _hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def _stft_anal(x: np.ndarray) -> np.ndarray:
    n_frames = 1 + (len(x) - _FFT) // _HOP
    idx = np.arange(_FFT)[None, :] + _HOP * np.arange(n_frames)[:, None]
    return np.fft.rfft(x[idx] * _hann(_FFT), axis=1)


def _istft_wola(spec: np.ndarray, out_len: int) -> np.ndarray:
    win = _hann(_FFT)
    frames = np.fft.irfft(spec, n=_FFT, axis=1) * win
    y = np.zeros(out_len)
    wsum = np.zeros(out_len)
    for m in range(frames.shape[0]):
        start = m * _HOP
        stop = min(start + _FFT, out_len)
        y[start:stop] += frames[m, :stop - start]
        wsum[start:stop] += win[:stop - start] ** 2
    good = wsum > 1e-8
    y[good] /= wsum[good]
    return y


def formant_shift(clip: AudioClip, rho: float) -> AudioClip:
    """Warp the spectral envelope by `rho` while keeping F0 and timing.

    Per frame the log magnitude is split into a cepstrally smoothed envelope
    (1.25 ms quefrency cutoff) and a residual; the envelope's frequency axis
    is resampled at f / rho (clamped at the edges), recombined with the
    residual and the original phase, and overlap-added back.
    """
    if not 0.5 <= rho <= 2.0:
        raise InvalidParameterError(f"rho must be in [0.5, 2], got {rho}")
    if clip.sample_rate != defaults.SAMPLE_RATE:
        raise RateMismatchError(
            f"formant_shift expects {defaults.SAMPLE_RATE} Hz, got {clip.sample_rate}"
        )
    n = clip.samples.size
    pad = _FFT
    x = np.concatenate([np.zeros(pad), clip.samples, np.zeros(pad + _FFT)])
    spec = _stft_anal(x)
    mag = np.abs(spec)
    phase = np.angle(spec)
    log_mag = np.log(np.maximum(mag, 1e-10))

    qcut = int(round(defaults.FORMANT_QUEFRENCY_CUTOFF_SEC * clip.sample_rate))
    cep = np.fft.irfft(log_mag, n=_FFT, axis=1)
    lifter = np.zeros(_FFT)
    lifter[:qcut + 1] = 1.0
    lifter[-qcut:] = 1.0
    env = np.fft.rfft(cep * lifter, axis=1).real
    resid = log_mag - env

    n_bins = env.shape[1]
    query = np.arange(n_bins) / rho
    i0 = np.clip(np.floor(query).astype(int), 0, n_bins - 1)
    i1 = np.minimum(i0 + 1, n_bins - 1)
    frac = np.clip(query - i0, 0.0, 1.0)
    env_warped = env[:, i0] * (1.0 - frac) + env[:, i1] * frac

    new_mag = np.exp(env_warped + resid)
    y = _istft_wola(new_mag * np.exp(1j * phase), len(x))
    return AudioClip(y[pad:pad + n], clip.sample_rate)


def _wsola_stretch(x: np.ndarray, target_len: int, sample_rate: int) -> np.ndarray:
    """Waveform-similarity overlap-add time stretch to `target_len` samples.

    25 ms Hann segments at 50% synthesis overlap; each analysis segment may
    slide +/- 7.5 ms to best continue the previous one (cross-correlation).
    """
    seg = int(round(defaults.WSOLA_SEGMENT_SEC * sample_rate))
    search = int(round(defaults.WSOLA_SEARCH_SEC * sample_rate))
    hop = seg // 2
    win = _hann(seg)
    scale = len(x) / target_len

    xp = np.concatenate([x, np.zeros(seg + search + 1)])
    out = np.zeros(target_len + seg)
    wsum = np.zeros(target_len + seg)
    n_frames = int(np.ceil(target_len / hop))
    prev = 0
    for m in range(n_frames):
        nominal = int(round(m * hop * scale))
        nominal = min(nominal, len(x) - 1)
        if m == 0:
            pos = nominal
        else:
            ref = xp[prev + hop:prev + hop + seg]
            lo = max(0, nominal - search)
            hi = min(max(len(x) - 1, 1), nominal + search)
            corr = np.correlate(xp[lo:hi + seg], ref, mode="valid")
            pos = lo + int(np.argmax(corr))
        out[m * hop:m * hop + seg] += xp[pos:pos + seg] * win
        wsum[m * hop:m * hop + seg] += win
        prev = pos
    good = wsum > 1e-8
    out[good] /= wsum[good]
    return out[:target_len]


def pitch_randomize(clip: AudioClip, ratio: float) -> AudioClip:
    """Scale F0 by `ratio` while keeping the original duration.

    Resamples the waveform by 1/ratio (pitch and duration both move), then
    WSOLA-stretches back to the input length.
    """
    if not 0.5 <= ratio <= 2.0:
        raise InvalidParameterError(f"ratio must be in [0.5, 2], got {ratio}")
    if ratio == 1.0:
        return AudioClip(clip.samples.copy(), clip.sample_rate)
    inner_rate = int(round(clip.sample_rate / ratio))
    shifted = resample(clip, inner_rate)
    stretched = _wsola_stretch(shifted.samples, clip.samples.size, clip.sample_rate)
    return AudioClip(stretched, clip.sample_rate)


def eq_band_centers(n_bands: int) -> np.ndarray:
    """Fixed log-spaced EQ band centers, 60 Hz to 10 kHz."""
    return np.geomspace(defaults.EQ_FC_LO_HZ, defaults.EQ_FC_HI_HZ, n_bands)


def random_perturb_pair(clip: AudioClip, cfg: PerturbConfig) -> tuple:
    """Two independently drawn perturbation chains applied to one clip.

    Each chain draws (formant ratio, pitch semitones, per-band EQ gain and
    Q) from cfg's ranges and applies formant shift, then pitch
    randomization, then the equalizer. Draw order is fixed, so a given
    (clip, cfg) pair is bit-reproducible.
    """
    rng = np.random.default_rng(cfg.seed)
    centers = eq_band_centers(cfg.eq_bands)

    def draw():
        rho = rng.uniform(*cfg.formant_ratio_range)
        semis = rng.uniform(*cfg.pitch_semitone_range)
        bands = [
            (fc, rng.uniform(*cfg.eq_q_range), rng.uniform(*cfg.eq_gain_range_db))
            for fc in centers
        ]
        return rho, semis, bands

    def apply(params):
        rho, semis, bands = params
        out = formant_shift(clip, rho)
        out = pitch_randomize(out, semitones_to_ratio(semis))
        return parametric_eq(out, bands)

    first, second = draw(), draw()
    return apply(first), apply(second)
