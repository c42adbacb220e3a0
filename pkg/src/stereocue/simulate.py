"""Synthetic two-talker stereo scenes with known ground truth.

Each source reaches the two microphones with an inter-channel gain and a
(fractional) delay; channel 1 is the unmodified source.  Rendering uses a
frequency-domain phase ramp on a zero-padded FFT, so integer delays are
exact shifts.  Noise is white (independent per channel) or taken from a WAV,
and is scaled to the requested SNR against the summed speech images.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import signal

from .errors import ConfigurationError

MAX_DELAY = 10.0


@dataclass
class SourceSpec:
    delay: float = 0.0  # channel-2 delay relative to channel 1, samples
    gain: float = 1.0  # channel-2 / channel-1 amplitude ratio
    onset: float = 0.0  # seconds
    offset: float | None = None  # seconds; None = end of scene

    def __post_init__(self):
        if abs(self.delay) > MAX_DELAY:
            raise ConfigurationError(f"delay {self.delay} exceeds +/-{MAX_DELAY} samples")
        if self.gain <= 0:
            raise ConfigurationError("inter-channel gain must be positive")


@dataclass
class SceneSpec:
    sources: list[SourceSpec] = field(default_factory=lambda: [SourceSpec(-2.0, 0.8), SourceSpec(3.0, 1.25)])
    snr_db: float = 10.0
    overlap_ratio: float | None = None  # None: keep the sources' own schedules
    duration: float = 10.0
    sample_rate: int = 16000
    noise: str = "white"  # or a path to a WAV file
    seed: int = 0

    def __post_init__(self):
        self.sources = [s if isinstance(s, SourceSpec) else SourceSpec(**s) for s in self.sources]
        if not 1 <= len(self.sources) <= 2:
            raise ConfigurationError("scenes hold one or two sources")
        if self.overlap_ratio is not None:
            if not 0.0 <= self.overlap_ratio <= 1.0:
                raise ConfigurationError("overlap ratio must lie in [0, 1]")
            if len(self.sources) == 2:
                on_a, off_a, on_b, off_b = overlap_schedule(self.duration, self.overlap_ratio)
                self.sources[0].onset, self.sources[0].offset = on_a, off_a
                self.sources[1].onset, self.sources[1].offset = on_b, off_b

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    def metadata(self) -> dict:
        return {
            "sources": [
                {
                    "delay": s.delay,
                    "gain": s.gain,
                    "schedule": [s.onset, self.duration if s.offset is None else s.offset],
                }
                for s in self.sources
            ],
            "snr_db": None if np.isinf(self.snr_db) else self.snr_db,
            "overlap_ratio": self.overlap_ratio,
            "seed": self.seed,
            "sample_rate": self.sample_rate,
            "duration": self.duration,
            "noise": self.noise,
        }

    @classmethod
    def from_metadata(cls, meta: dict) -> "SceneSpec":
        sources = [
            SourceSpec(s["delay"], s["gain"], s["schedule"][0], s["schedule"][1])
            for s in meta["sources"]
        ]
        snr = meta.get("snr_db")
        return cls(
            sources=sources,
            snr_db=np.inf if snr is None else snr,
            overlap_ratio=None,
            duration=meta.get("duration", 10.0),
            sample_rate=meta.get("sample_rate", 16000),
            noise=meta.get("noise", "white"),
            seed=meta.get("seed", 0),
        )


def overlap_schedule(duration: float, ratio: float) -> tuple[float, float, float, float]:
    """Source A speaks first, B last, with one shared window of
    ``ratio * duration`` seconds in the middle."""
    a_off = 0.5 * (1.0 + ratio) * duration
    b_on = 0.5 * (1.0 - ratio) * duration
    return 0.0, a_off, b_on, duration


@dataclass
class SceneOutput:
    mixture: np.ndarray  # (2, n)
    images: list[np.ndarray]  # per source (2, n)
    noise: np.ndarray  # (2, n), already scaled
    clean_sum: np.ndarray  # (2, n)
    activity: np.ndarray  # (n_sources, n) bool, from the schedule
    spec: SceneSpec

    @property
    def metadata(self) -> dict:
        return self.spec.metadata()

    def metadata_json(self) -> str:
        return json.dumps(self.metadata, indent=2)


def true_steering(spec_or_source, source_index: int | None = None, bins=None, fft_len: int = 320) -> np.ndarray:
    """Unit-norm analytic steering vectors ``[1, g e^{-j 2 pi k d / N}] / sqrt(1 + g^2)``.

    Accepts a :class:`SceneSpec` plus ``source_index`` or a :class:`SourceSpec`.
    ``bins`` defaults to all ``fft_len // 2 + 1`` bins; returns ``(2, len(bins))``
    (or a 2-vector for a scalar bin).
    """
    src = spec_or_source.sources[source_index] if isinstance(spec_or_source, SceneSpec) else spec_or_source
    scalar = np.isscalar(bins)
    k = np.arange(fft_len // 2 + 1) if bins is None else np.atleast_1d(np.asarray(bins, dtype=np.float64))
    norm = np.sqrt(1.0 + src.gain**2)
    a = np.empty((2, k.size), dtype=np.complex128)
    a[0] = 1.0 / norm
    a[1] = src.gain * np.exp(-2j * np.pi * k * src.delay / fft_len) / norm
    return a[:, 0] if scalar else a


def fractional_delay(x: np.ndarray, delay: float) -> np.ndarray:
    """Delay by ``delay`` samples via a phase ramp on a zero-padded FFT.

    Padding exceeds the delay, so nothing wraps around for integer delays.
    """
    n = x.shape[-1]
    pad = int(np.ceil(abs(delay))) + 1
    nfft = int(2 ** np.ceil(np.log2(n + 2 * pad)))
    buf = np.zeros(nfft)
    buf[pad : pad + n] = x
    f = np.fft.rfftfreq(nfft)
    if nfft % 2 == 0:
        # keep the Nyquist term real for a real-valued result
        ramp = np.exp(-2j * np.pi * f * delay)
        ramp[-1] = np.cos(np.pi * delay)
    else:
        ramp = np.exp(-2j * np.pi * f * delay)
    y = np.fft.irfft(np.fft.rfft(buf) * ramp, nfft)
    return y[pad : pad + n]


def render_source(s: np.ndarray, src: SourceSpec) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    return np.stack([s, src.gain * fractional_delay(s, src.delay)])


def speech_like(duration: float, sample_rate: int = 16000, rng=None) -> np.ndarray:
    """Voiced/unvoiced syllable train standing in for a talker.

    Harmonic excitation on a drifting pitch, filtered through per-syllable
    formant resonators, with short pauses and occasional fricatives.  Peak
    level is normalised to 0.5.
    """
    rng = np.random.default_rng(rng)
    n = int(round(duration * sample_rate))
    out = np.zeros(n)
    t = 0
    base_f0 = rng.uniform(95.0, 210.0)
    phase = 0.0
    while t < n:
        syl = int(rng.uniform(0.12, 0.32) * sample_rate)
        gap = int(rng.uniform(0.02, 0.15) * sample_rate)
        m = min(syl, n - t)
        if m <= 0:
            break
        if rng.random() < 0.8:
            f0 = base_f0 * np.exp(np.cumsum(rng.normal(0.0, 0.002, m)))
            ph = phase + 2 * np.pi * np.cumsum(f0) / sample_rate
            phase = ph[-1]
            harmonics = np.arange(1, int(sample_rate / 2 / f0.max()))
            exc = np.sum(np.cos(np.outer(harmonics, ph)) / harmonics[:, None] ** 0.3, axis=0)
            seg = exc
            for _ in range(3):
                fc = rng.uniform(250.0, 3500.0)
                bw = rng.uniform(60.0, 200.0)
                r = np.exp(-np.pi * bw / sample_rate)
                th = 2 * np.pi * fc / sample_rate
                seg = seg + 0.5 * signal.lfilter([1 - r], [1, -2 * r * np.cos(th), r * r], exc)
        else:
            seg = signal.lfilter([1, -0.9], [1], rng.standard_normal(m)) * 0.3
        env = np.sin(np.pi * np.arange(m) / m) ** 0.6
        out[t : t + m] = seg * env * rng.uniform(0.5, 1.0)
        t += syl + gap
    peak = np.abs(out).max()
    return out * (0.5 / peak) if peak > 0 else out


def _noise(spec: SceneSpec, n: int, rng) -> np.ndarray:
    if spec.noise == "white":
        return rng.standard_normal((2, n))
    from .wavio import read_wav

    data, sr = read_wav(spec.noise)
    if sr != spec.sample_rate:
        raise ConfigurationError(f"noise WAV is {sr} Hz, scene is {spec.sample_rate} Hz")
    if data.shape[0] == 1:
        data = np.vstack([data, data])
    reps = -(-n // data.shape[1])
    return np.tile(data, (1, reps))[:2, :n]


def synthesize_scene(spec: SceneSpec, sources: Sequence[np.ndarray] | None = None,
                     source_rates: Sequence[int] | None = None) -> SceneOutput:
    """Render the scene.  Missing ``sources`` are generated with :func:`speech_like`."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_samples
    fs = spec.sample_rate
    if sources is None:
        sources = [speech_like(spec.duration, fs, rng) for _ in spec.sources]
    if len(sources) != len(spec.sources):
        raise ConfigurationError("number of source signals does not match the scene")
    if source_rates is not None and any(r != fs for r in source_rates):
        raise ConfigurationError(f"source sample rates {list(source_rates)} differ from {fs} Hz")

    images, activity = [], []
    for sig, src in zip(sources, spec.sources):
        sig = np.asarray(sig, dtype=np.float64)
        if sig.ndim != 1:
            raise ConfigurationError("source signals must be mono")
        on = int(round(src.onset * fs))
        off = n if src.offset is None else int(round(src.offset * fs))
        on, off = max(0, on), min(n, off)
        placed = np.zeros(n)
        m = min(off - on, sig.size)
        placed[on : on + m] = sig[:m]
        act = np.zeros(n, dtype=bool)
        act[on:off] = True
        images.append(render_source(placed, src))
        activity.append(act)

    clean = images[0].copy()
    for img in images[1:]:
        clean = clean + img
    if np.isinf(spec.snr_db) and spec.snr_db > 0:
        noise = np.zeros((2, n))
    else:
        raw = _noise(spec, n, rng)
        p_speech = np.mean(clean**2)
        p_noise = np.mean(raw**2)
        scale = np.sqrt(p_speech / (p_noise * 10.0 ** (spec.snr_db / 10.0))) if p_noise > 0 else 0.0
        noise = raw * scale
    return SceneOutput(clean + noise, images, noise, clean, np.array(activity), spec)
