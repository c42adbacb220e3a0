"""Frame analysis/synthesis with a square-root Hann window.

Framing convention: frame ``l`` covers input samples
``[(l + 1) * hop - window_len, (l + 1) * hop)``, i.e. the analysis buffer is
primed with ``window_len - hop`` zeros.  Overlap-add then emits each input
sample exactly ``window_len - hop`` samples late.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class FrameParams:
    sample_rate: int = 16000
    hop: int = 160
    window_len: int = 320
    fft_len: int | None = None

    def __post_init__(self):
        if self.fft_len is None:
            object.__setattr__(self, "fft_len", self.window_len)
        if self.hop <= 0 or self.window_len <= 0 or self.sample_rate <= 0:
            raise ConfigurationError("sample_rate, hop and window_len must be positive")
        if self.window_len % self.hop:
            raise ConfigurationError(
                f"hop ({self.hop}) must divide window_len ({self.window_len})"
            )
        if self.window_len // self.hop < 2:
            raise ConfigurationError("window_len must be at least twice the hop")
        if self.fft_len < self.window_len:
            raise ConfigurationError("fft_len must be >= window_len")

    @property
    def n_bins(self) -> int:
        return self.fft_len // 2 + 1

    @property
    def latency(self) -> int:
        """Algorithmic latency of analysis + overlap-add, in samples."""
        return self.window_len - self.hop

    @property
    def frame_seconds(self) -> float:
        return self.hop / self.sample_rate

    def window(self) -> np.ndarray:
        return sqrt_hann(self.window_len, self.hop)


def sqrt_hann(window_len: int, hop: int) -> np.ndarray:
    """Periodic square-root Hann window scaled so that ``sum(w**2)`` over the
    overlapping frames equals one at every sample (power-complementary)."""
    n = np.arange(window_len)
    hann = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / window_len)
    # periodic Hann overlap-adds to window_len / (2 * hop)
    return np.sqrt(hann * (2.0 * hop / window_len))


@dataclass
class MonoSpectrum:
    bins: np.ndarray
    frame_index: int = 0


@dataclass
class StereoSpectrum:
    """Two channels of one frame, stored as a ``(2, n_bins)`` complex array."""

    data: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2 or self.data.shape[0] != 2:
            raise ConfigurationError(
                f"stereo spectrum must have shape (2, n_bins), got {self.data.shape}"
            )

    @classmethod
    def from_channels(cls, left: MonoSpectrum, right: MonoSpectrum) -> "StereoSpectrum":
        if left.frame_index != right.frame_index:
            raise ConfigurationError("left/right spectra belong to different frames")
        if left.bins.shape != right.bins.shape:
            raise ConfigurationError("left/right spectra have different bin counts")
        return cls(np.stack([left.bins, right.bins]), left.frame_index)

    @property
    def left(self) -> MonoSpectrum:
        return MonoSpectrum(self.data[0], self.frame_index)

    @property
    def right(self) -> MonoSpectrum:
        return MonoSpectrum(self.data[1], self.frame_index)

    @property
    def n_bins(self) -> int:
        return self.data.shape[1]


def analyze(samples: np.ndarray, params: FrameParams, frame_index: int = 0) -> MonoSpectrum:
    """Windowed forward transform of one frame of ``window_len`` samples."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (params.window_len,):
        raise ConfigurationError(
            f"expected a frame of {params.window_len} samples, got shape {samples.shape}"
        )
    return MonoSpectrum(np.fft.rfft(samples * params.window(), params.fft_len), frame_index)


def synthesize(spectra: Sequence[MonoSpectrum], params: FrameParams) -> np.ndarray:
    """Overlap-add a frame sequence.

    Returns ``len(spectra) * hop`` samples: the completed part of the
    overlap-add, so ``synthesize(analyze_stream(x))`` reproduces ``x`` delayed
    by ``params.latency`` samples.
    """
    spectra = list(spectra)
    if not spectra:
        return np.zeros(0)
    n_bins = spectra[0].bins.shape
    for s in spectra:
        if s.bins.shape != n_bins:
            raise ConfigurationError("inconsistent spectrum sizes in synthesis")
    if n_bins != (params.n_bins,):
        raise ConfigurationError(
            f"spectra have {n_bins[0]} bins, params expect {params.n_bins}"
        )
    ola = OverlapAdd(params, channels=1)
    return np.concatenate([ola.push(s.bins[None, :])[0] for s in spectra])


class FrameAnalyzer:
    """Streaming analysis: push ``hop`` new samples per channel, get one frame.

    Holds a fixed ``(channels, window_len)`` buffer; nothing grows with the
    stream length.
    """

    def __init__(self, params: FrameParams, channels: int = 2):
        self.params = params
        self.channels = channels
        self._window = params.window()
        self._buf = np.zeros((channels, params.window_len))
        self.frame_index = 0

    def push(self, block: np.ndarray) -> np.ndarray:
        hop = self.params.hop
        block = np.asarray(block, dtype=np.float64)
        if block.shape != (self.channels, hop):
            raise ConfigurationError(
                f"expected block of shape {(self.channels, hop)}, got {block.shape}"
            )
        buf = self._buf
        buf[:, :-hop] = buf[:, hop:]
        buf[:, -hop:] = block
        self.frame_index += 1
        return np.fft.rfft(buf * self._window, self.params.fft_len, axis=-1)


class OverlapAdd:
    """Streaming synthesis matching :class:`FrameAnalyzer`."""

    def __init__(self, params: FrameParams, channels: int = 2):
        self.params = params
        self.channels = channels
        self._window = params.window()
        self._buf = np.zeros((channels, params.window_len))

    def push(self, spectrum: np.ndarray) -> np.ndarray:
        p = self.params
        spectrum = np.asarray(spectrum)
        if spectrum.shape != (self.channels, p.n_bins):
            raise ConfigurationError(
                f"expected spectrum of shape {(self.channels, p.n_bins)}, got {spectrum.shape}"
            )
        frame = np.fft.irfft(spectrum, p.fft_len, axis=-1)[:, : p.window_len]
        buf = self._buf
        buf += frame * self._window
        out = buf[:, : p.hop].copy()
        buf[:, : -p.hop] = buf[:, p.hop :]
        buf[:, -p.hop :] = 0.0
        return out


def n_frames_for(n_samples: int, params: FrameParams, flush: int = 0) -> int:
    """Frames needed so that ``n_samples + flush`` output samples are produced."""
    return -(-(n_samples + flush) // params.hop)


def analyze_stream(x: np.ndarray, params: FrameParams, n_frames: int | None = None) -> np.ndarray:
    """Batch version of :class:`FrameAnalyzer`.

    ``x`` has shape ``(channels, n)`` or ``(n,)``; returns ``(channels, frames,
    n_bins)`` (or ``(frames, n_bins)``).  The input is zero-padded at the end
    to ``n_frames * hop`` samples; by default just enough frames are taken to
    cover every input sample.
    """
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    hop, wl = params.hop, params.window_len
    if n_frames is None:
        n_frames = n_frames_for(x.shape[-1], params)
    total = n_frames * hop
    padded = np.zeros((x.shape[0], params.latency + total))
    n_keep = min(total, x.shape[-1])
    padded[:, params.latency : params.latency + n_keep] = x[:, :n_keep]
    frames = np.lib.stride_tricks.sliding_window_view(padded, wl, axis=-1)[:, ::hop]
    spec = np.fft.rfft(frames[:, :n_frames] * params.window(), params.fft_len, axis=-1)
    return spec[0] if squeeze else spec


def synthesize_stream(spec: np.ndarray, params: FrameParams) -> np.ndarray:
    """Batch overlap-add of ``(channels, frames, n_bins)`` (or ``(frames, n_bins)``).

    Output has ``frames * hop`` samples and equals what :class:`OverlapAdd`
    would have emitted frame by frame.
    """
    spec = np.asarray(spec)
    squeeze = spec.ndim == 2
    if squeeze:
        spec = spec[None]
    if spec.shape[-1] != params.n_bins:
        raise ConfigurationError(f"spectra have {spec.shape[-1]} bins, expected {params.n_bins}")
    ch, n_frames, _ = spec.shape
    hop, wl = params.hop, params.window_len
    frames = np.fft.irfft(spec, params.fft_len, axis=-1)[..., :wl] * params.window()
    out = np.zeros((ch, n_frames * hop + wl))
    for j in range(wl // hop):
        seg = frames[..., j * hop : (j + 1) * hop].reshape(ch, -1)
        out[:, j * hop : j * hop + n_frames * hop] += seg
    out = out[:, : n_frames * hop]
    return out[0] if squeeze else out
