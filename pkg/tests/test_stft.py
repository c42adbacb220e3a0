import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stereocue.errors import ConfigurationError
from stereocue.stft import (
    FrameAnalyzer, FrameParams, MonoSpectrum, OverlapAdd, StereoSpectrum,
    analyze, analyze_stream, synthesize, synthesize_stream,
)


def test_defaults():
    p = FrameParams()
    assert (p.n_bins, p.latency, p.frame_seconds) == (161, 160, 0.01)


@pytest.mark.parametrize("kw", [dict(hop=0), dict(hop=150), dict(window_len=160), dict(fft_len=256)])
def test_bad_params(kw):
    with pytest.raises(ConfigurationError):
        FrameParams(**kw)


def test_window_power_complementary():
    p = FrameParams()
    w2 = p.window() ** 2
    assert np.allclose(w2[:160] + w2[160:], 1.0, atol=1e-15)


def test_analyze_matches_direct_dft(rng):
    p = FrameParams()
    x = rng.standard_normal(p.window_len)
    t = np.arange(p.window_len)
    k = np.arange(p.n_bins)[:, None]
    direct = (x * p.window() * np.exp(-2j * np.pi * k * t / p.fft_len)).sum(axis=1)
    assert np.allclose(analyze(x, p).bins, direct, atol=1e-12)


def test_analyze_rejects_wrong_length():
    with pytest.raises(ConfigurationError):
        analyze(np.zeros(100), FrameParams())


def test_round_trip_delay(rng):
    p = FrameParams()
    x = rng.standard_normal((2, 16000))
    y = synthesize_stream(analyze_stream(x, p, n_frames=102), p)
    assert np.max(np.abs(y[:, p.latency : p.latency + 16000] - x)) < 1e-12


def test_streaming_equals_batch(rng):
    p = FrameParams()
    x = rng.standard_normal((2, 3200))
    batch = analyze_stream(x, p)
    an, ola = FrameAnalyzer(p), OverlapAdd(p)
    frames, out = [], []
    for l in range(batch.shape[1]):
        f = an.push(x[:, l * p.hop : (l + 1) * p.hop])
        frames.append(f)
        out.append(ola.push(f))
    assert np.allclose(np.stack(frames, axis=1), batch, atol=1e-12)
    assert np.allclose(np.concatenate(out, axis=1), synthesize_stream(batch, p), atol=1e-12)


def test_mono_synthesize(rng):
    p = FrameParams()
    x = rng.standard_normal(1600)
    spec = analyze_stream(x, p, n_frames=12)
    y = synthesize([MonoSpectrum(s, i) for i, s in enumerate(spec)], p)
    assert np.allclose(y[p.latency : 1600], x[: 1600 - p.latency], atol=1e-12)


def test_stereo_spectrum_channels(rng):
    d = rng.standard_normal((2, 161)) + 0j
    s = StereoSpectrum(d, 4)
    back = StereoSpectrum.from_channels(s.left, s.right)
    assert np.array_equal(back.data, d) and back.frame_index == 4


def test_stereo_spectrum_channel_mismatch():
    with pytest.raises(ConfigurationError):
        StereoSpectrum.from_channels(MonoSpectrum(np.zeros(161), 0), MonoSpectrum(np.zeros(161), 1))


def test_ola_rejects_wrong_shape():
    with pytest.raises(ConfigurationError):
        OverlapAdd(FrameParams()).push(np.zeros((2, 100)))


@settings(max_examples=30, deadline=None)
@given(
    hop=st.sampled_from([32, 64, 80, 160]),
    ratio=st.sampled_from([2, 4]),
    pad=st.sampled_from([0, 16, 64]),
    seed=st.integers(0, 2**31 - 1),
)
def test_round_trip_property(hop, ratio, pad, seed):
    p = FrameParams(16000, hop, hop * ratio, hop * ratio + pad)
    x = np.random.default_rng(seed).standard_normal((2, 20 * hop))
    n_frames = 20 + ratio
    y = synthesize_stream(analyze_stream(x, p, n_frames), p)[:, p.latency : p.latency + x.shape[1]]
    assert np.sqrt(np.mean((y - x) ** 2) / np.mean(x**2)) < 1e-12


def test_linearity(rng):
    p = FrameParams()
    x, y = rng.standard_normal((2, 2, 1600))
    lhs = analyze_stream(2.5 * x - 0.5 * y, p)
    assert np.allclose(lhs, 2.5 * analyze_stream(x, p) - 0.5 * analyze_stream(y, p), atol=1e-12)
    spec = analyze_stream(x, p)
    assert np.allclose(synthesize_stream(2 * spec, p), 2 * synthesize_stream(spec, p), atol=1e-12)
