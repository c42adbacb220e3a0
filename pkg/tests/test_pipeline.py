import json

import numpy as np
import pytest

from stereocue.errors import ConfigurationError, StreamOrderError, WavFormatError
from stereocue.pipeline import MODES, Pipeline, PipelineConfig, RunReport, run_stream
from stereocue.stft import StereoSpectrum

from conftest import crandn, random_unitary_pair

K = 161


def test_config_defaults():
    c = PipelineConfig()
    assert (c.sample_rate, c.n_bands, c.alpha, c.latency_samples, c.latency_ms) == (16000, 32, 0.99, 640, 40.0)
    assert PipelineConfig(lookahead=0).latency_ms == 10.0


@pytest.mark.parametrize("kw", [dict(mode="triple"), dict(alpha=1.0), dict(lookahead=-1), dict(hop=150)])
def test_config_invalid(kw):
    with pytest.raises(ConfigurationError):
        PipelineConfig(**kw)


def test_config_dict_round_trip():
    c = PipelineConfig(mode="dual-nsv", alpha=0.95)
    assert PipelineConfig.from_dict(c.to_dict()) == c
    with pytest.raises(ConfigurationError):
        PipelineConfig.from_dict({"modee": "dual-nsv"})


@pytest.mark.parametrize("mode", ["discrete", "common-single-baseline", "dual-nsv", "dual-proposed"])
def test_passthrough_reconstructs(mode, rng):
    x = rng.standard_normal((2, 8000))
    cfg = PipelineConfig(mode=mode, enhancer="passthrough")
    y, rep = run_stream(x, cfg)
    lat = cfg.latency_samples
    assert y.shape == (2, 8000 + lat)
    assert np.max(np.abs(y[:, lat:] - x)) < 1e-12
    assert np.max(np.abs(y[:, :lat])) < 1e-12


def test_single_proposed_output_is_rank_one(rng):
    pipe = Pipeline(PipelineConfig(mode="common-single-proposed", enhancer="passthrough", lookahead=0))
    for l in range(20):
        a1 = pipe.steering[0].copy()
        y = pipe.process_frame(StereoSpectrum(crandn(rng, 2, K), l)).data
        assert np.allclose(y[1] * a1[0], y[0] * a1[1], atol=1e-12)


def test_output_frame_index_and_order(rng):
    pipe = Pipeline(PipelineConfig(lookahead=2))
    out = pipe.process_frame(StereoSpectrum(crandn(rng, 2, K), 0))
    assert out.frame_index == -2
    with pytest.raises(StreamOrderError):
        pipe.process_frame(StereoSpectrum(crandn(rng, 2, K), 5))
    with pytest.raises(ConfigurationError):
        pipe.process_frame(StereoSpectrum(crandn(rng, 2, 100), 1))


def test_oracle_requires_reference(rng):
    with pytest.raises(ConfigurationError):
        run_stream(rng.standard_normal((2, 1600)), PipelineConfig(enhancer="oracle"))
    pipe = Pipeline(PipelineConfig(enhancer="oracle"))
    with pytest.raises(ConfigurationError):
        pipe.process_frame(StereoSpectrum(crandn(rng, 2, K), 0))


def test_run_stream_shape_errors(rng):
    with pytest.raises(WavFormatError):
        run_stream(rng.standard_normal((1, 100)), PipelineConfig())
    with pytest.raises(WavFormatError):
        run_stream(rng.standard_normal((2, 100)), PipelineConfig(), reference=np.zeros((2, 50)))


def test_set_steering_paths_sum(rng):
    pipe = Pipeline(PipelineConfig(mode="dual-proposed", enhancer="passthrough", lookahead=0, adapt=False))
    a1, a2 = random_unitary_pair(rng, K)
    pipe.set_steering(a1, a2)
    x = crandn(rng, 2, K)
    c = pipe.process_frame(StereoSpectrum(x, 0)).data
    z1, z2 = pipe.last_paths
    assert np.allclose(z1 + z2, x, atol=1e-13) and np.allclose(c, x, atol=1e-13)
    assert np.allclose(z1[1] / z1[0], a1[1] / a1[0], rtol=1e-12)


def test_nonadaptive_modes_keep_nsv(rng):
    pipe = Pipeline(PipelineConfig(mode="dual-nsv"))
    before = pipe.steering[0].copy()
    for l in range(10):
        pipe.process_frame(StereoSpectrum(crandn(rng, 2, K), l))
    assert np.array_equal(pipe.steering[0], before)


def test_adaptive_steering_moves(rng):
    pipe = Pipeline(PipelineConfig(mode="dual-proposed", enhancer="passthrough"))
    before = pipe.steering[0].copy()
    for l in range(10):
        pipe.process_frame(StereoSpectrum(crandn(rng, 2, K), l))
    assert not np.allclose(pipe.steering[0], before)
    assert pipe.last_mask is not None


def test_report(rng):
    _, rep = run_stream(rng.standard_normal((2, 16000)), PipelineConfig(mode="discrete"))
    d = json.loads(rep.to_json())
    assert {"mode", "frames", "rtf", "latency_ms", "per_stage_us"} <= set(d)
    assert rep.rtf > 0 and rep.latency_ms == 40.0 and rep.samples_out == 16640
    assert set(rep.per_stage_us) == {"analysis", "beamform", "enhance", "remix", "steering", "synthesis"}
    assert isinstance(rep, RunReport)


@pytest.mark.parametrize("mode", MODES)
def test_backends_agree(mode, rng):
    from stereocue._kernels import available, get_backend
    if len(available()) < 2:
        pytest.skip("extension not built")
    x = rng.standard_normal((2, 4800))
    cfg = PipelineConfig(mode=mode)
    y1, _ = run_stream(x, cfg, backend=get_backend("python"))
    y2, _ = run_stream(x, cfg, backend=get_backend("compiled"))
    assert np.allclose(y1, y2, atol=1e-10)


def test_deterministic(rng):
    x = rng.standard_normal((2, 4800))
    a, _ = run_stream(x, PipelineConfig())
    b, _ = run_stream(x, PipelineConfig())
    assert np.array_equal(a, b)
