"""RF-to-I/Q demodulation, envelope detection and log compression."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import butter, filtfilt


@dataclass(frozen=True)
class ChannelData:
    """Per-element signals with their sampling metadata.

    ``samples`` has shape (n_samples, num_elements) or
    (n_samples, num_elements, num_frames); each column is one element's
    signal over fast time, column 0 belonging to the first element.
    ``kind`` is 'rf' (real) or 'iq' (complex baseband).
    """

    samples: np.ndarray
    kind: str
    fs: float
    fc: float
    bandwidth: float

    def __post_init__(self):
        if self.kind not in ("rf", "iq"):
            raise ValueError(f"kind must be 'rf' or 'iq', got {self.kind!r}")
        samples = np.asarray(self.samples)
        if samples.ndim not in (2, 3):
            raise ValueError(f"samples must be 2-D or 3-D, got shape {samples.shape}")
        if samples.shape[0] < 2:
            raise ValueError("need at least two fast-time samples per element")
        if self.kind == "rf" and np.iscomplexobj(samples) and np.any(samples.imag != 0):
            raise ValueError("rf samples must be real")
        if not self.fs > 0:
            raise ValueError(f"fs must be positive, got {self.fs}")
        if not self.fc > 0:
            raise ValueError(f"fc must be positive, got {self.fc}")
        if not 0 < self.bandwidth < 2 * self.fc:
            raise ValueError(
                f"bandwidth must lie in (0, 2*fc), got {self.bandwidth}"
            )
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def num_elements(self) -> int:
        return self.samples.shape[1]

    @property
    def num_frames(self) -> int:
        return self.samples.shape[2] if self.samples.ndim == 3 else 1


def iq_demodulate(data: ChannelData) -> ChannelData:
    """Demodulate RF channel data to complex baseband I/Q.

    Each column is downmixed by exp(-i 2 pi fc t), low-pass filtered with
    a zero-phase 5th-order Butterworth at half the Nyquist frequency, and
    scaled by 2 so a unit-amplitude carrier maps to unit magnitude.
    Filter transients contaminate both column ends; consumers should
    discard roughly the outer 10% of samples when comparing amplitudes.
    """
    if data.kind != "rf":
        raise ValueError("iq_demodulate expects rf data")
    if not data.fc < data.fs / 2:
        raise ValueError(
            f"center frequency {data.fc} must be below Nyquist {data.fs / 2}"
        )
    t = np.arange(data.n_samples) / data.fs
    carrier = np.exp(-2j * np.pi * data.fc * t)
    shape = (data.n_samples,) + (1,) * (data.samples.ndim - 1)
    mixed = data.samples.astype(np.complex128) * carrier.reshape(shape)
    b, a = butter(5, 0.5)
    iq = filtfilt(b, a, mixed, axis=0) * 2
    return replace(data, samples=iq, kind="iq")


def envelope(values) -> np.ndarray:
    """Real envelope sqrt(I^2 + Q^2) of complex samples or channel data."""
    if isinstance(values, ChannelData):
        values = values.samples
    return np.abs(np.asarray(values))


def log_compress(env, dynamic_range_db: float = 40.0) -> np.ndarray:
    """Map an envelope to [0, 1] on a dB scale relative to its maximum.

    The maximum maps to 1 and anything at or below -dynamic_range_db maps
    to 0, so the output is invariant to positive rescaling of the input.
    An all-zero envelope yields an all-zero image.
    """
    if not dynamic_range_db > 0:
        raise ValueError(f"dynamic_range_db must be positive, got {dynamic_range_db}")
    env = np.asarray(env, dtype=float)
    peak = env.max() if env.size else 0.0
    if peak == 0:
        return np.zeros_like(env)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(env / peak)
    return np.clip(1.0 + db / dynamic_range_db, 0.0, 1.0)
