"""Triangular filterbank on the ERB-rate scale.

Each bin sits between two adjacent band centres and is shared between them
with linear (triangular) weights, so the weights of every bin sum to one.
This makes the bank cheap to store as ``(lower band index, lower weight)``
per bin, which is the form the kernels use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


def hz_to_erb_rate(f):
    """Glasberg & Moore ERB-rate (number of ERBs below ``f``)."""
    return 21.4 * np.log10(1.0 + 0.00437 * np.asarray(f, dtype=np.float64))


def erb_rate_to_hz(e):
    return (10.0 ** (np.asarray(e, dtype=np.float64) / 21.4) - 1.0) / 0.00437


@dataclass(frozen=True)
class ErbFilterbank:
    n_bands: int
    n_bins: int
    sample_rate: int
    centers_bin: np.ndarray  # fractional bin position of each band centre
    lower_band: np.ndarray  # per bin: band index b with weight lower_weight, b + 1 gets the rest
    lower_weight: np.ndarray

    @property
    def centers_hz(self) -> np.ndarray:
        return self.centers_bin * self.sample_rate / (2.0 * (self.n_bins - 1))

    @property
    def weights(self) -> np.ndarray:
        """Dense ``(n_bands, n_bins)`` weight matrix."""
        w = np.zeros((self.n_bands, self.n_bins))
        k = np.arange(self.n_bins)
        w[self.lower_band, k] = self.lower_weight
        upper = self.lower_band + 1
        has_upper = upper < self.n_bands
        w[upper[has_upper], k[has_upper]] = 1.0 - self.lower_weight[has_upper]
        return w


def design_erb_filterbank(n_bands: int = 32, n_bins: int = 161, sample_rate: int = 16000) -> ErbFilterbank:
    """Partition-of-unity triangular bank with centres equally spaced in ERB
    rate between DC and Nyquist.

    Near DC the ERB spacing is finer than one bin; there the centres are
    pushed apart to exactly one bin so that no band is empty.  Because the
    inverse ERB map is convex, the spacing only grows past that point.
    """
    if n_bands < 2:
        raise ConfigurationError("need at least 2 bands")
    if n_bins < 2:
        raise ConfigurationError("need at least 2 bins")
    if n_bands > n_bins:
        raise ConfigurationError(f"n_bands ({n_bands}) exceeds n_bins ({n_bins})")
    nyquist = sample_rate / 2.0
    erb = np.linspace(0.0, hz_to_erb_rate(nyquist), n_bands)
    ideal = erb_rate_to_hz(erb) / nyquist * (n_bins - 1)
    centers = np.maximum(ideal, np.arange(n_bands, dtype=np.float64))
    centers[0] = 0.0
    centers[-1] = n_bins - 1.0

    k = np.arange(n_bins, dtype=np.float64)
    lower = np.searchsorted(centers, k, side="right") - 1
    lower = np.clip(lower, 0, n_bands - 1)
    weight = np.ones(n_bins)
    inner = lower < n_bands - 1
    lo_c = centers[lower[inner]]
    hi_c = centers[lower[inner] + 1]
    weight[inner] = (hi_c - k[inner]) / (hi_c - lo_c)
    return ErbFilterbank(
        n_bands=n_bands,
        n_bins=n_bins,
        sample_rate=sample_rate,
        centers_bin=centers,
        lower_band=lower.astype(np.intp),
        lower_weight=weight,
    )


def _check_bins(n: int, bank: ErbFilterbank) -> None:
    if n != bank.n_bins:
        raise ConfigurationError(f"spectrum has {n} bins, filterbank expects {bank.n_bins}")


def band_energies(spec, bank: ErbFilterbank) -> np.ndarray:
    """Weighted band energies ``sum_k w[b, k] |X[k]|^2``."""
    from ._kernels import backend

    bins = getattr(spec, "bins", spec)
    bins = np.asarray(bins)
    _check_bins(bins.shape[-1], bank)
    return backend.band_energies(np.ascontiguousarray(bins, dtype=np.complex128), bank.lower_band, bank.lower_weight, bank.n_bands)


def interpolate_gains(gains, bank: ErbFilterbank) -> np.ndarray:
    """Per-bin gains ``sum_b w[b, k] g[b]``."""
    from ._kernels import backend

    g = np.asarray(getattr(gains, "gains", gains), dtype=np.float64)
    if g.shape != (bank.n_bands,):
        raise ConfigurationError(f"expected {bank.n_bands} band gains, got shape {g.shape}")
    return backend.band_to_bin(g, bank.lower_band, bank.lower_weight)


@dataclass
class BandGains:
    gains: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=np.float64)
        if not np.all(np.isfinite(g)):
            raise ConfigurationError("band gains must be finite")
        self.gains = np.clip(g, 0.0, 1.0)
