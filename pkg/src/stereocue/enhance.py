"""Monaural band-gain estimators.

Any object with ``lookahead`` (frames), ``process(bins, ref=None)`` and
``reset()`` can drive the pipeline.  ``process`` is called once per input
frame and returns the ``n_bands`` gains for the frame ``lookahead`` calls
earlier, so gains for frame ``l`` may depend on inputs up to ``l +
lookahead``.  The built-in estimators are causal and honour the declared
look-ahead with a plain delay line.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .erb import BandGains, ErbFilterbank, band_energies
from .errors import ConfigurationError
from .stft import FrameParams, MonoSpectrum, StereoSpectrum

EPS = 1e-12
DEFAULT_LOOKAHEAD = 3  # 30 ms at a 10 ms hop


def _bins(spec):
    return np.asarray(getattr(spec, "bins", spec))


def oracle_wiener(spec, clean_ref, bank: ErbFilterbank) -> BandGains:
    """Band-wise ratio of clean to noisy energy, clamped to [0, 1]."""
    fi = getattr(spec, "frame_index", None)
    fr = getattr(clean_ref, "frame_index", None)
    if fi is not None and fr is not None and fi != fr:
        raise ConfigurationError(f"reference frame {fr} does not match input frame {fi}")
    noisy = _bins(spec)
    clean = _bins(clean_ref)
    if noisy.shape != clean.shape:
        raise ConfigurationError("reference and input have different bin counts")
    return BandGains(_wiener_gains(band_energies(noisy, bank), band_energies(clean, bank)))


def _wiener_gains(e_noisy, e_clean):
    return np.clip(e_clean / np.maximum(e_noisy, EPS), 0.0, 1.0)


def passthrough_enhancer(spec, n_bands: int = 32) -> BandGains:
    return BandGains(np.ones(n_bands))


def apply_common_gain(x, bin_gains) -> StereoSpectrum:
    """Multiply both channels by the same real per-bin gain."""
    data = x.data if isinstance(x, StereoSpectrum) else np.asarray(x, dtype=np.complex128)
    g = np.asarray(bin_gains)
    if np.iscomplexobj(g):
        raise ConfigurationError("common gains must be real")
    g = g.astype(np.float64)
    if g.shape != (data.shape[1],):
        raise ConfigurationError(f"expected {data.shape[1]} bin gains, got shape {g.shape}")
    if not np.all(np.isfinite(g)) or np.any(g < 0):
        raise ConfigurationError("common gains must be finite and non-negative")
    return StereoSpectrum(data * g, getattr(x, "frame_index", 0))


def band_dof(bank: ErbFilterbank, params: FrameParams | None = None) -> np.ndarray:
    """Equivalent chi-square degrees of freedom of each band energy for white
    Gaussian input, ``2 E[e]^2 / Var[e]``, from the exact bin covariances of
    the windowed transform."""
    if params is None:
        n = 2 * (bank.n_bins - 1)
        params = FrameParams(bank.sample_rate, n // 2, n)
    if params.n_bins != bank.n_bins:
        raise ConfigurationError("frame parameters do not match the filterbank")
    t = np.arange(params.window_len)
    k = np.arange(params.n_bins)
    rows = np.exp(-2j * np.pi * np.outer(k, t) / params.fft_len) * params.window()
    cov = rows @ rows.conj().T
    pcov = rows @ rows.T
    w = bank.weights
    mean = w @ cov.diagonal().real
    var = np.einsum("bk,bl,kl->b", w, w, np.abs(cov) ** 2 + np.abs(pcov) ** 2)
    return 2.0 * mean**2 / var


def dof_smoothing(dof: np.ndarray, target_dof: float = 60.0, min_smoothing: float = 0.5) -> np.ndarray:
    """Per-band recursive smoothing constants giving roughly ``target_dof``
    degrees of freedom after smoothing, ``(Q - q) / (Q + q)``."""
    dof = np.asarray(dof, dtype=np.float64)
    return np.clip((target_dof - dof) / (target_dof + dof), min_smoothing, 0.999)


@dataclass
class NoiseTrackerState:
    """Minimum-statistics noise tracker over ERB bands.

    Band energies are recursively smoothed (``smoothing`` may be per band)
    and the minimum of the smoothed energy is tracked over ``n_sub``
    sub-windows of ``sub_len`` frames, about 1.5 s at a 10 ms hop.  The noise
    estimate is ``bias`` times that minimum.  Until ``init_frames`` frames have
    been seen it is the running mean of the raw energies instead (the first
    frames are assumed to be noise).
    """

    n_bands: int
    smoothing: np.ndarray | float = 0.9
    bias: float = 3.0
    init_frames: int = 10
    n_sub: int = 8
    sub_len: int = 19
    noise: np.ndarray = field(init=False)
    smoothed: np.ndarray = field(init=False)
    frames: int = field(init=False, default=0)

    def __post_init__(self):
        self.smoothing = np.broadcast_to(np.asarray(self.smoothing, dtype=np.float64), (self.n_bands,)).copy()
        if np.any(self.smoothing < 0) or np.any(self.smoothing >= 1):
            raise ConfigurationError("smoothing constants must lie in [0, 1)")
        self.noise = np.zeros(self.n_bands)
        self.smoothed = np.zeros(self.n_bands)
        self._init_sum = np.zeros(self.n_bands)
        self._cur_min = np.full(self.n_bands, np.inf)
        self._sub_mins = deque(maxlen=self.n_sub)
        self._sub_count = 0

    def update(self, energy: np.ndarray) -> np.ndarray:
        if self.frames == 0:
            self.smoothed[:] = energy
        else:
            self.smoothed *= self.smoothing
            self.smoothed += (1.0 - self.smoothing) * energy
        self.frames += 1
        np.minimum(self._cur_min, self.smoothed, out=self._cur_min)
        self._sub_count += 1
        if self._sub_count == self.sub_len:
            self._sub_mins.append(self._cur_min.copy())
            self._cur_min.fill(np.inf)
            self._sub_count = 0
        if self.frames <= self.init_frames:
            self._init_sum += energy
            self.noise[:] = self._init_sum / self.frames
        else:
            m = self._cur_min.copy()
            for sm in self._sub_mins:
                np.minimum(m, sm, out=m)
            self.noise[:] = self.bias * m
        return self.noise


def spectral_subtraction(spec, state: NoiseTrackerState, bank: ErbFilterbank,
                         beta: float = 1.5, floor: float = 0.05) -> BandGains:
    """Power subtraction per band with over-subtraction and a gain floor.

    The rule is applied to the tracker's smoothed band energy.  Advances
    ``state`` by one frame.
    """
    noise = state.update(band_energies(_bins(spec), bank))
    return BandGains(_subtraction_gains(state.smoothed, noise, beta, floor))


def _subtraction_gains(energy, noise, beta, floor):
    g = np.maximum(energy - beta * noise, floor * energy) / np.maximum(energy, EPS)
    return np.clip(g, floor, 1.0)


class Enhancer:
    """Base class: a causal gain rule behind a ``lookahead``-frame delay line."""

    name = "base"
    needs_reference = False

    def __init__(self, bank: ErbFilterbank, lookahead: int = DEFAULT_LOOKAHEAD):
        if lookahead < 0:
            raise ConfigurationError("look-ahead must be non-negative")
        self.bank = bank
        self.lookahead = int(lookahead)
        self.reset()

    def reset(self):
        ones = np.ones(self.bank.n_bands)
        self._delay = deque([ones] * self.lookahead, maxlen=self.lookahead + 1)

    def process(self, bins, ref=None) -> np.ndarray:
        self._delay.append(self._gains(_bins(bins), ref))
        return self._delay.popleft()

    def _gains(self, bins, ref):
        raise NotImplementedError


class Passthrough(Enhancer):
    name = "passthrough"

    def _gains(self, bins, ref):
        return np.ones(self.bank.n_bands)


class OracleWiener(Enhancer):
    """Needs the clean reference projected exactly like the noisy input."""

    name = "oracle"
    needs_reference = True

    def _gains(self, bins, ref):
        if ref is None:
            raise ConfigurationError("the oracle enhancer needs a clean reference")
        return _wiener_gains(band_energies(bins, self.bank), band_energies(_bins(ref), self.bank))


class SpectralSubtraction(Enhancer):
    name = "specsub"

    def __init__(self, bank: ErbFilterbank, lookahead: int = DEFAULT_LOOKAHEAD,
                 beta: float = 1.5, floor: float = 0.05, params: FrameParams | None = None,
                 target_dof: float = 60.0, **tracker_opts):
        self.beta = beta
        self.floor = floor
        tracker_opts.setdefault("smoothing", dof_smoothing(band_dof(bank, params), target_dof))
        self._tracker_opts = tracker_opts
        super().__init__(bank, lookahead)

    def reset(self):
        super().reset()
        self.state = NoiseTrackerState(self.bank.n_bands, **self._tracker_opts)

    def _gains(self, bins, ref):
        noise = self.state.update(band_energies(bins, self.bank))
        return _subtraction_gains(self.state.smoothed, noise, self.beta, self.floor)


ENHANCERS = {cls.name: cls for cls in (Passthrough, OracleWiener, SpectralSubtraction)}


def make_enhancer(name: str, bank: ErbFilterbank, lookahead: int = DEFAULT_LOOKAHEAD, **opts) -> Enhancer:
    try:
        cls = ENHANCERS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown enhancer {name!r}; choose from {sorted(ENHANCERS)}"
        ) from None
    return cls(bank, lookahead, **opts)
