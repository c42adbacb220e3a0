import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stereocue.erb import (
    BandGains, design_erb_filterbank, band_energies, erb_rate_to_hz, hz_to_erb_rate, interpolate_gains,
)
from stereocue.errors import ConfigurationError


def test_erb_rate_reference_values():
    # Glasberg & Moore: 1 kHz is about 15.6 ERBs, 8 kHz about 33.3
    assert hz_to_erb_rate(1000.0) == pytest.approx(15.62, abs=0.01)
    assert hz_to_erb_rate(8000.0) == pytest.approx(33.29, abs=0.01)


def test_erb_rate_inverse():
    f = np.linspace(0, 8000, 101)
    assert np.allclose(erb_rate_to_hz(hz_to_erb_rate(f)), f, atol=1e-9)


def test_default_bank_shape():
    bank = design_erb_filterbank()
    assert bank.weights.shape == (32, 161)
    assert bank.centers_bin[0] == 0 and bank.centers_bin[-1] == 160
    assert np.all(np.diff(bank.centers_bin) >= 1.0 - 1e-12)
    assert np.all(bank.weights.sum(axis=1) > 0)  # no empty band
    assert bank.centers_hz[-1] == pytest.approx(8000.0)


def test_high_bands_follow_erb_spacing():
    bank = design_erb_filterbank()
    e = hz_to_erb_rate(bank.centers_hz)
    # above the one-bin floor the centres are equally spaced in ERB rate
    step = hz_to_erb_rate(8000.0) / 31
    assert np.allclose(np.diff(e[-10:]), step, atol=1e-9)


@pytest.mark.parametrize("kw", [dict(n_bands=1), dict(n_bins=1), dict(n_bands=200, n_bins=161)])
def test_bad_designs(kw):
    with pytest.raises(ConfigurationError):
        design_erb_filterbank(**kw)


@settings(max_examples=60, deadline=None)
@given(n_bins=st.integers(2, 600), data=st.data())
def test_partition_of_unity(n_bins, data):
    n_bands = data.draw(st.integers(2, n_bins))
    bank = design_erb_filterbank(n_bands, n_bins, 16000)
    w = bank.weights
    assert np.max(np.abs(w.sum(axis=0) - 1.0)) <= 1e-9
    assert w.min() >= 0.0


def test_band_energies_match_dense(rng):
    bank = design_erb_filterbank()
    x = rng.standard_normal(161) + 1j * rng.standard_normal(161)
    assert np.allclose(band_energies(x, bank), bank.weights @ np.abs(x) ** 2, rtol=1e-12)


def test_energy_conservation(rng):
    bank = design_erb_filterbank()
    x = rng.standard_normal(161) + 1j * rng.standard_normal(161)
    assert band_energies(x, bank).sum() == pytest.approx(np.sum(np.abs(x) ** 2), rel=1e-12)


def test_interpolate_gains_dense(rng):
    bank = design_erb_filterbank()
    g = rng.uniform(0, 1, 32)
    assert np.allclose(interpolate_gains(g, bank), bank.weights.T @ g, atol=1e-14)
    assert np.allclose(interpolate_gains(np.ones(32), bank), 1.0, atol=1e-12)


def test_wrong_sizes():
    bank = design_erb_filterbank()
    with pytest.raises(ConfigurationError):
        band_energies(np.zeros(100), bank)
    with pytest.raises(ConfigurationError):
        interpolate_gains(np.ones(10), bank)


def test_band_gains_clip_and_finite():
    assert np.array_equal(BandGains(np.array([-0.5, 0.5, 2.0])).gains, [0.0, 0.5, 1.0])
    with pytest.raises(ConfigurationError):
        BandGains(np.array([np.nan]))
