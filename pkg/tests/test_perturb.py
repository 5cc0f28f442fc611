import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.signal import welch

from svcforge.audio import AudioClip
from svcforge.errors import InvalidParameterError, RateMismatchError
from svcforge.features import CANONICAL_FRAME_CONFIG as CFG, build_mel_filterbank
from svcforge.perturb import (
    BiquadCoeffs,
    PerturbConfig,
    formant_shift,
    parametric_eq,
    peaking_biquad,
    pitch_randomize,
    random_perturb_pair,
)
from svcforge.pitch import estimate_f0
from svcforge.synth import sawtooth, sine, vowel


def _rel_rms_db(out, ref):
    err = np.sqrt(np.mean((out - ref) ** 2))
    return 20 * np.log10(max(err, 1e-300) / np.sqrt(np.mean(ref ** 2)))


def _median_f0(clip):
    track = estimate_f0(clip, CFG)
    return np.median(track.f0_hz[track.vuv])


def _envelope_peak_hz(clip, lo_hz, hi_hz, nfft=1024, qcut_ms=1.25):
    """Independent envelope oracle: mean log magnitude across Hann frames,
    cepstrally low-passed, parabolic peak in [lo, hi]."""
    x = clip.samples
    hop = nfft // 2
    win = np.hanning(nfft)
    frames = [x[i:i + nfft] * win for i in range(0, len(x) - nfft, hop)]
    logmag = np.log(np.maximum(np.abs(np.fft.rfft(frames, axis=1)), 1e-10)).mean(axis=0)
    cep = np.fft.irfft(logmag, n=nfft)
    q = int(round(qcut_ms / 1000 * clip.sample_rate))
    lift = np.zeros(nfft)
    lift[:q + 1] = 1.0
    lift[-q:] = 1.0
    env = np.fft.rfft(cep * lift).real
    freqs = np.arange(env.size) * clip.sample_rate / nfft
    band = np.flatnonzero((freqs >= lo_hz) & (freqs <= hi_hz))
    k = band[np.argmax(env[band])]
    y0, y1, y2 = env[k - 1], env[k], env[k + 1]
    denom = y0 - 2 * y1 + y2
    delta = 0.5 * (y0 - y2) / denom if denom else 0.0
    return (k + delta) * clip.sample_rate / nfft


# -- peaking biquad ----------------------------------------------------------

def test_biquad_zero_gain_is_identity():
    c = peaking_biquad(1000, 1.0, 0.0, 24000)
    assert c.b0 == pytest.approx(1.0, abs=1e-15)
    assert c.b1 == pytest.approx(c.a1, abs=1e-15)
    assert c.b2 == pytest.approx(c.a2, abs=1e-15)
    for f in [10, 100, 1000, 5000, 11000]:
        assert abs(abs(c.response_at(f, 24000)) - 1.0) < 1e-9


def test_biquad_center_gain():
    c = peaking_biquad(1000, 1.0, 6.0, 24000)
    gain_db = 20 * np.log10(abs(c.response_at(1000, 24000)))
    assert abs(gain_db - 6.0) < 0.01


@given(st.floats(min_value=20, max_value=11500),
       st.floats(min_value=0.1, max_value=10.0),
       st.floats(min_value=-18.0, max_value=18.0))
def test_biquad_always_stable(fc, q, gain):
    c = peaking_biquad(fc, q, gain, 24000)
    roots = np.roots([1.0, c.a1, c.a2])
    assert np.all(np.abs(roots) < 1.0)


def test_biquad_invalid_params():
    with pytest.raises(InvalidParameterError):
        peaking_biquad(0, 1.0, 3.0, 24000)
    with pytest.raises(InvalidParameterError):
        peaking_biquad(13000, 1.0, 3.0, 24000)
    with pytest.raises(InvalidParameterError):
        peaking_biquad(1000, 0.0, 3.0, 24000)
    with pytest.raises(InvalidParameterError):
        BiquadCoeffs(1.0, 0.0, 0.0, 0.0, 1.5)  # poles outside unit circle


# -- parametric EQ -----------------------------------------------------------

def test_eq_empty_band_list_is_identity():
    clip = sine(440, 0.2)
    out = parametric_eq(clip, [])
    assert np.array_equal(out.samples, clip.samples)


def test_eq_lti_additivity_and_homogeneity():
    rng = np.random.default_rng(0)
    x = AudioClip(rng.normal(scale=0.1, size=8000), 24000)
    y = AudioClip(rng.normal(scale=0.1, size=8000), 24000)
    bands = [(500.0, 1.2, 4.0), (3000.0, 2.0, -6.0)]
    ex = parametric_eq(x, bands).samples
    ey = parametric_eq(y, bands).samples
    exy = parametric_eq(AudioClip(x.samples + y.samples, 24000), bands).samples
    assert np.max(np.abs(exy - (ex + ey))) < 1e-9
    e2x = parametric_eq(AudioClip(2.0 * x.samples, 24000), bands).samples
    assert np.max(np.abs(e2x - 2.0 * ex)) < 1e-9


def test_eq_white_noise_band_boost():
    rng = np.random.default_rng(1)
    x = AudioClip(rng.normal(scale=0.1, size=240000), 24000)
    out = parametric_eq(x, [(2000.0, 1.0, 12.0)])
    f, p_in = welch(x.samples, fs=24000, nperseg=4096)
    _, p_out = welch(out.samples, fs=24000, nperseg=4096)
    k = np.argmin(np.abs(f - 2000.0))
    boost_db = 10 * np.log10(p_out[k] / p_in[k])
    assert abs(boost_db - 12.0) < 1.0


# -- formant shift -----------------------------------------------------------

def test_formant_shift_identity():
    clip = vowel(duration_sec=0.8)
    out = formant_shift(clip, 1.0)
    assert out.samples.size == clip.samples.size
    assert _rel_rms_db(out.samples, clip.samples) < -40.0


def test_formant_shift_preserves_f0():
    clip = vowel(duration_sec=1.0)
    out = formant_shift(clip, 1.2)
    assert abs(_median_f0(out) / _median_f0(clip) - 1) < 0.03


def test_formant_shift_moves_envelope_peak():
    clip = vowel(duration_sec=1.0)
    out = formant_shift(clip, 1.2)
    peak_in = _envelope_peak_hz(clip, 400, 1100)
    peak_out = _envelope_peak_hz(out, 400, 1100)
    fb = build_mel_filterbank(CFG)
    centers = fb.center_frequencies
    i = int(np.argmin(np.abs(centers - 840.0)))
    mel_width = centers[i + 1] - centers[i - 1]
    assert 600 < peak_in < 800  # sanity: first formant found
    assert abs(peak_out - 840.0) <= mel_width


def test_formant_shift_validation():
    with pytest.raises(InvalidParameterError):
        formant_shift(vowel(duration_sec=0.2), 2.5)
    with pytest.raises(RateMismatchError):
        formant_shift(AudioClip(np.zeros(8000), 16000), 1.1)


# -- pitch randomization -----------------------------------------------------

def test_pitch_randomize_identity():
    clip = sawtooth(220, 0.5)
    out = pitch_randomize(clip, 1.0)
    assert _rel_rms_db(out.samples, clip.samples) < -40.0


@pytest.mark.parametrize("freq,ratio,synth_fn", [
    (220.0, 1.5, sawtooth),
    (440.0, 0.5, sine),
])
def test_pitch_randomize_ratio(freq, ratio, synth_fn):
    clip = synth_fn(freq, 1.0)
    out = pitch_randomize(clip, ratio)
    assert abs(out.samples.size - clip.samples.size) <= 0.01 * clip.samples.size
    assert abs(_median_f0(out) / (ratio * freq) - 1) < 0.03


def test_pitch_randomize_validation():
    with pytest.raises(InvalidParameterError):
        pitch_randomize(sine(220, 0.2), 2.4)


# -- seeded pair generator ---------------------------------------------------

def test_pair_deterministic():
    clip = vowel(duration_sec=0.4)
    cfg = PerturbConfig(seed=99)
    a1, b1 = random_perturb_pair(clip, cfg)
    a2, b2 = random_perturb_pair(clip, cfg)
    assert np.array_equal(a1.samples, a2.samples)
    assert np.array_equal(b1.samples, b2.samples)
    # the two chains differ from each other
    assert not np.array_equal(a1.samples, b1.samples)


def test_pair_degenerate_config_is_identity():
    clip = vowel(duration_sec=0.4)
    cfg = PerturbConfig(
        formant_ratio_range=(1.0, 1.0),
        pitch_semitone_range=(0.0, 0.0),
        eq_gain_range_db=(0.0, 0.0),
        seed=5,
    )
    a, b = random_perturb_pair(clip, cfg)
    assert _rel_rms_db(a.samples, clip.samples) < -40.0
    assert _rel_rms_db(b.samples, clip.samples) < -40.0


def test_pair_preserves_duration():
    clip = vowel(duration_sec=0.5)
    a, b = random_perturb_pair(clip, PerturbConfig(seed=2))
    n = clip.samples.size
    assert abs(a.samples.size - n) <= 0.01 * n
    assert abs(b.samples.size - n) <= 0.01 * n


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        PerturbConfig(formant_ratio_range=(1.4, 1.0))
    with pytest.raises(InvalidParameterError):
        PerturbConfig(eq_bands=0)
    with pytest.raises(InvalidParameterError):
        PerturbConfig(eq_q_range=(0.0, 1.0))
