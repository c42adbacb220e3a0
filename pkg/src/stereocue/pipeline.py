"""Frame-by-frame stereo enhancement in five configurations.

``discrete``
    each microphone channel enhanced on its own.
``common-single-baseline``
    gains estimated on the channel mean and applied to both input channels.
``common-single-proposed``
    one adaptive beamforming path; output is that path's gained spatial image.
``dual-nsv``
    two paths with the fixed steering pair ``[1, 1]``, ``[1, -1]``.
``dual-proposed``
    two paths with adaptive, mutually orthogonal steering vectors; output is
    the sum of both gained spatial images.

Gains for frame ``l`` become available ``lookahead`` frames later, so the
signals they apply to wait in a delay line of the same length.  The steering
update for the adaptive modes runs on each completed output frame and takes
effect from the next input frame.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._kernels import backend as _default_backend
from .enhance import DEFAULT_LOOKAHEAD, make_enhancer
from .erb import design_erb_filterbank
from .errors import ConfigurationError, StreamOrderError, WavFormatError
from .spatial import SteeringTracker, check_alpha, fixed_steering_nsv
from .stft import FrameAnalyzer, FrameParams, OverlapAdd, StereoSpectrum

MODES = (
    "discrete",
    "common-single-baseline",
    "common-single-proposed",
    "dual-nsv",
    "dual-proposed",
)
STAGES = ("analysis", "beamform", "enhance", "remix", "steering", "synthesis")


@dataclass
class PipelineConfig:
    mode: str = "dual-proposed"
    enhancer: str = "specsub"
    sample_rate: int = 16000
    hop: int = 160
    window_len: int = 320
    n_bands: int = 32
    alpha: float = 0.99
    lookahead: int = DEFAULT_LOOKAHEAD
    adapt: bool = True  # steering updates in the proposed modes
    enhancer_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        check_alpha(self.alpha)
        if self.lookahead < 0:
            raise ConfigurationError("look-ahead must be non-negative")
        self.frame_params  # validates framing

    @property
    def frame_params(self) -> FrameParams:
        return FrameParams(self.sample_rate, self.hop, self.window_len)

    @property
    def latency_samples(self) -> int:
        """Stereo framing latency plus the enhancer look-ahead."""
        return self.frame_params.latency + self.lookahead * self.hop

    @property
    def latency_ms(self) -> float:
        return 1000.0 * self.latency_samples / self.sample_rate

    @property
    def n_paths(self) -> int:
        return 2 if self.mode in ("dual-nsv", "dual-proposed", "discrete") else 1

    @property
    def adaptive(self) -> bool:
        return self.adapt and self.mode in ("common-single-proposed", "dual-proposed")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _Pending:
    x: np.ndarray
    signals: list  # per path: spatial image (or channel signal) awaiting gains
    steering: list  # per path: steering vector used, for inspection


class Pipeline:
    """One stream's processing state.  Feed frames in order to :meth:`process_frame`."""

    def __init__(self, config: PipelineConfig, backend=None):
        self.config = config
        self.backend = backend or _default_backend
        p = config.frame_params
        self.params = p
        self.n_bins = p.n_bins
        self.bank = design_erb_filterbank(config.n_bands, p.n_bins, p.sample_rate)
        opts = dict(config.enhancer_options)
        if config.enhancer == "specsub":
            opts.setdefault("params", p)
        self.enhancers = [
            make_enhancer(config.enhancer, self.bank, config.lookahead, **opts)
            for _ in range(config.n_paths)
        ]
        self.needs_reference = self.enhancers[0].needs_reference
        self.tracker = SteeringTracker(p.n_bins, config.alpha, self.backend)
        zero = np.zeros((2, p.n_bins), dtype=np.complex128)
        nsv = fixed_steering_nsv(p.n_bins)
        if config.mode == "discrete":
            idle = [zero[0], zero[1]]
        else:
            idle = [zero] * config.n_paths
        self._pending = deque(
            _Pending(zero, idle, list(nsv[: config.n_paths])) for _ in range(config.lookahead)
        )
        self.next_index = 0
        self.stage_ns = dict.fromkeys(STAGES, 0)
        self.last_paths: list[np.ndarray] = []
        self.last_steering: list[np.ndarray] = []
        self.last_mask: np.ndarray | None = None

    @property
    def steering(self) -> tuple[np.ndarray, np.ndarray]:
        """Current ``(a1, a2)``, applied to the next input frame."""
        return self.tracker.a1, self.tracker.a2

    def set_steering(self, a1, a2) -> None:
        self.tracker.a1[...] = a1
        self.tracker.a2[...] = a2

    def process_frame(self, x: StereoSpectrum, ref: StereoSpectrum | None = None) -> StereoSpectrum:
        """Consume input frame ``l``; return the output frame ``l - lookahead``."""
        if x.frame_index != self.next_index:
            raise StreamOrderError(f"expected frame {self.next_index}, got {x.frame_index}")
        if x.n_bins != self.n_bins:
            raise ConfigurationError(f"frame has {x.n_bins} bins, pipeline expects {self.n_bins}")
        if self.needs_reference and ref is None:
            raise ConfigurationError(f"enhancer {self.config.enhancer!r} needs a clean reference")
        out = self._step(np.ascontiguousarray(x.data), None if ref is None else np.ascontiguousarray(ref.data))
        self.next_index += 1
        return StereoSpectrum(out, x.frame_index - self.config.lookahead)

    def _step(self, x: np.ndarray, ref: np.ndarray | None) -> np.ndarray:
        kb = self.backend
        mode = self.config.mode
        bank = self.bank
        clock = time.perf_counter_ns
        t0 = clock()

        # enhancer inputs and the signals the gains will scale
        if mode == "discrete":
            inputs = [x[0], x[1]]
            refs = [None, None] if ref is None else [ref[0], ref[1]]
            signals = [x[0], x[1]]
            steering = [None, None]
        elif mode == "common-single-baseline":
            inputs = [0.5 * (x[0] + x[1])]
            refs = [None if ref is None else 0.5 * (ref[0] + ref[1])]
            signals = [x]
            steering = [None]
        else:
            a = [self.tracker.a1, self.tracker.a2][: self.config.n_paths]
            inputs, signals, refs, steering = [], [], [], []
            for ai in a:
                d, y = kb.project(x, ai)
                inputs.append(d)
                signals.append(y)
                refs.append(None if ref is None else kb.dsbf(ref, ai))
                steering.append(ai.copy())
        t1 = clock()

        gains = [enh.process(inp, r) for enh, inp, r in zip(self.enhancers, inputs, refs)]
        t2 = clock()

        self._pending.append(_Pending(x, signals, steering))
        done = self._pending.popleft()
        bin_gains = [kb.band_to_bin(g, bank.lower_band, bank.lower_weight) for g in gains]
        if mode == "discrete":
            c = np.stack([done.signals[0] * bin_gains[0], done.signals[1] * bin_gains[1]])
            paths = [c]
        elif self.config.n_paths == 2:
            paths = [done.signals[0] * bin_gains[0], done.signals[1] * bin_gains[1]]
            c = paths[0] + paths[1]
        else:
            paths = [done.signals[0] * bin_gains[0]]
            c = paths[0]
        t3 = clock()

        if self.config.adaptive:
            self.last_mask = self.tracker.update(done.x, c)
        t4 = clock()

        self.last_paths = paths
        self.last_steering = done.steering
        ns = self.stage_ns
        ns["beamform"] += t1 - t0
        ns["enhance"] += t2 - t1
        ns["remix"] += t3 - t2
        ns["steering"] += t4 - t3
        return c


@dataclass
class RunReport:
    mode: str
    frames: int
    rtf: float
    latency_ms: float
    per_stage_us: dict
    enhancer: str = ""
    backend: str = ""
    samples_in: int = 0
    samples_out: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def run_stream(x: np.ndarray, config: PipelineConfig, reference: np.ndarray | None = None,
               backend=None) -> tuple[np.ndarray, RunReport]:
    """Enhance a whole stereo signal ``(2, n)`` frame by frame.

    The output has ``n + config.latency_samples`` samples: input sample ``t``
    appears at output sample ``t + latency``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != 2:
        raise WavFormatError(f"expected a stereo signal shaped (2, n), got {x.shape}")
    if reference is not None:
        reference = np.asarray(reference, dtype=np.float64)
        if reference.shape != x.shape:
            raise WavFormatError(f"reference shape {reference.shape} differs from input {x.shape}")
    pipe = Pipeline(config, backend)
    if pipe.needs_reference and reference is None:
        raise ConfigurationError(f"enhancer {config.enhancer!r} needs a clean reference signal")
    p = pipe.params
    hop = p.hop
    n = x.shape[1]
    n_out = n + config.latency_samples
    n_frames = -(-n_out // hop)
    xin = np.zeros((2, n_frames * hop))
    xin[:, :n] = x
    rin = None
    if reference is not None:
        rin = np.zeros_like(xin)
        rin[:, :n] = reference
        ref_an = FrameAnalyzer(p)
    analyzer = FrameAnalyzer(p)
    ola = OverlapAdd(p)
    out = np.empty((2, n_frames * hop))
    clock = time.perf_counter_ns
    ns = pipe.stage_ns

    t_start = clock()
    for l in range(n_frames):
        t0 = clock()
        sl = slice(l * hop, (l + 1) * hop)
        spec = StereoSpectrum(analyzer.push(xin[:, sl]), l)
        rspec = None if rin is None else StereoSpectrum(ref_an.push(rin[:, sl]), l)
        ns["analysis"] += clock() - t0
        y = pipe.process_frame(spec, rspec)
        t1 = clock()
        out[:, sl] = ola.push(y.data)
        ns["synthesis"] += clock() - t1
    elapsed = (clock() - t_start) * 1e-9

    report = RunReport(
        mode=config.mode,
        frames=n_frames,
        rtf=elapsed / (n_frames * hop / p.sample_rate),
        latency_ms=config.latency_ms,
        per_stage_us={k: v / n_frames / 1e3 for k, v in ns.items()},
        enhancer=config.enhancer,
        backend=pipe.backend.NAME,
        samples_in=n,
        samples_out=n_out,
    )
    return out[:, :n_out], report
