"""Interaural phase/level difference errors between a processed stereo
signal and a clean stereo reference.

Both signals are taken to the time-frequency domain with the pipeline's
framing.  Errors are averaged uniformly over the bins where the reference
energy (summed over both channels) lies within ``threshold_db`` of that
frame's maximum.  Time-domain inputs are first aligned by one global integer
delay found by cross-correlation.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import signal

from .errors import ConfigurationError
from .stft import FrameParams, analyze_stream

EPS = 1e-12


@dataclass(frozen=True)
class MetricParams:
    frame: FrameParams = FrameParams()
    threshold_db: float = 40.0
    max_lag: int = 1600  # samples searched either way during alignment


@dataclass
class MetricReport:
    ipd_error: float
    ild_error: float
    bins_evaluated: int
    lag: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _check_tf(out_tf, ref_tf):
    out_tf = np.asarray(out_tf)
    ref_tf = np.asarray(ref_tf)
    if out_tf.shape != ref_tf.shape or out_tf.ndim < 2 or out_tf.shape[0] != 2:
        raise ConfigurationError(
            f"need two stereo spectrograms of equal shape, got {out_tf.shape} and {ref_tf.shape}"
        )
    return out_tf, ref_tf


def evaluated_bins(ref_tf: np.ndarray, threshold_db: float = 40.0) -> np.ndarray:
    """Boolean ``(frames, K)`` selection of reference bins with energy within
    ``threshold_db`` of their frame's maximum (silent frames select nothing)."""
    ref_tf = np.asarray(ref_tf)
    energy = np.abs(ref_tf[0]) ** 2 + np.abs(ref_tf[1]) ** 2
    peak = energy.max(axis=-1, keepdims=True)
    return (energy > 0) & (energy >= peak * 10.0 ** (-threshold_db / 10.0))


def _wrap(phi):
    return np.angle(np.exp(1j * phi))


def ipd_error_tf(out_tf, ref_tf, threshold_db: float = 40.0, selection=None) -> float:
    """Mean of ``|wrap(ipd_ref - ipd_out)| / pi`` over the selected bins."""
    out_tf, ref_tf = _check_tf(out_tf, ref_tf)
    sel = evaluated_bins(ref_tf, threshold_db) if selection is None else selection
    if not sel.any():
        return float("nan")
    phi_out = np.angle(out_tf[1][sel] * np.conj(out_tf[0][sel]))
    phi_ref = np.angle(ref_tf[1][sel] * np.conj(ref_tf[0][sel]))
    return float(np.mean(np.abs(_wrap(phi_ref - phi_out)) / np.pi))


def _level_db(tf):
    return 20.0 * np.log10(np.maximum(np.abs(tf[1]), EPS) / np.maximum(np.abs(tf[0]), EPS))


def ild_error_tf(out_tf, ref_tf, threshold_db: float = 40.0, selection=None) -> float:
    """Mean of ``|20 log10 L_out - 20 log10 L_ref|`` in dB over the selected bins,
    with ``L = |ch2| / |ch1|``."""
    out_tf, ref_tf = _check_tf(out_tf, ref_tf)
    sel = evaluated_bins(ref_tf, threshold_db) if selection is None else selection
    if not sel.any():
        return float("nan")
    return float(np.mean(np.abs(_level_db(out_tf[:, sel]) - _level_db(ref_tf[:, sel]))))


def estimate_lag(out: np.ndarray, ref: np.ndarray, max_lag: int) -> int:
    """Integer ``lag`` maximising ``sum_m |xcorr(out_m, ref_m)|``; ``out[t + lag]``
    lines up with ``ref[t]``.  Absolute values make it insensitive to a
    polarity flip of one channel."""
    score = 0.0
    for m in range(2):
        score = score + np.abs(signal.correlate(out[m], ref[m], mode="full", method="fft"))
    lags = signal.correlation_lags(out.shape[1], ref.shape[1], mode="full")
    ok = np.abs(lags) <= max_lag
    return int(lags[ok][np.argmax(score[ok])])


def align(out: np.ndarray, ref: np.ndarray, max_lag: int = 1600) -> tuple[np.ndarray, np.ndarray, int]:
    out = np.atleast_2d(np.asarray(out, dtype=np.float64))
    ref = np.atleast_2d(np.asarray(ref, dtype=np.float64))
    if out.shape[0] != 2 or ref.shape[0] != 2:
        raise ConfigurationError(
            f"both signals must be stereo, got {out.shape[0]} and {ref.shape[0]} channels"
        )
    if abs(out.shape[1] - ref.shape[1]) > max_lag:
        raise ConfigurationError(
            f"lengths {out.shape[1]} and {ref.shape[1]} differ by more than the {max_lag}-sample search window"
        )
    lag = estimate_lag(out, ref, max_lag)
    if lag >= 0:
        out = out[:, lag:]
    else:
        ref = ref[:, -lag:]
    n = min(out.shape[1], ref.shape[1])
    return out[:, :n], ref[:, :n], lag


def evaluate(out: np.ndarray, ref: np.ndarray, params: MetricParams = MetricParams()) -> MetricReport:
    """Align, transform and score a processed stereo signal against a clean reference."""
    out_a, ref_a, lag = align(out, ref, params.max_lag)
    out_tf = analyze_stream(out_a, params.frame)
    ref_tf = analyze_stream(ref_a, params.frame)
    sel = evaluated_bins(ref_tf, params.threshold_db)
    return MetricReport(
        ipd_error=ipd_error_tf(out_tf, ref_tf, selection=sel),
        ild_error=ild_error_tf(out_tf, ref_tf, selection=sel),
        bins_evaluated=int(sel.sum()),
        lag=lag,
    )


def ipd_error(out, ref, params: MetricParams = MetricParams()) -> float:
    return evaluate(out, ref, params).ipd_error


def ild_error(out, ref, params: MetricParams = MetricParams()) -> float:
    return evaluate(out, ref, params).ild_error


REPORT_FIELDS = ("file", "mode", "ipd_error", "ild_error", "bins_evaluated", "lag")


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def rows_to_json(rows: list[dict]) -> str:
    return json.dumps([{k: r.get(k) for k in REPORT_FIELDS} for r in rows], indent=2)
