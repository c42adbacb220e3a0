"""WAV reading/writing on top of :mod:`scipy.io.wavfile`.

Signals are handled as ``float64`` arrays shaped ``(channels, samples)`` in
[-1, 1].  Accepted on input: 16-bit PCM and 32-bit float.
"""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

from .errors import WavFormatError


def read_wav(path) -> tuple[np.ndarray, int]:
    try:
        sr, data = wavfile.read(path)
    except (ValueError, OSError) as exc:
        raise WavFormatError(f"cannot read WAV {path}: {exc}") from exc
    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32 or data.dtype == np.float64:
        x = data.astype(np.float64)
    else:
        raise WavFormatError(f"{path}: unsupported sample format {data.dtype} (use PCM16 or float32)")
    x = x[:, None] if x.ndim == 1 else x
    return np.ascontiguousarray(x.T), int(sr)


def read_stereo(path, sample_rate: int | None = None) -> tuple[np.ndarray, int]:
    x, sr = read_wav(path)
    if x.shape[0] != 2:
        raise WavFormatError(f"{path}: expected 2 channels, found {x.shape[0]}")
    if sample_rate is not None and sr != sample_rate:
        raise WavFormatError(
            f"{path}: sample rate {sr} Hz, expected {sample_rate} Hz (resampling is not supported)"
        )
    return x, sr


def write_wav(path, x: np.ndarray, sample_rate: int, pcm16: bool = False) -> None:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if pcm16:
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    else:
        data = x.astype(np.float32)
    wavfile.write(path, sample_rate, np.ascontiguousarray(data.T))
