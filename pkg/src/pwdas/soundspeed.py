"""Average speed-of-sound estimation from phase dispersion.

When the assumed speed of sound matches the medium, the delayed I/Q
samples gathered along each point's echo-arrival hyperbola share a common
phase. The estimator beamforms a coarse grid of hyperbola vertices for
candidate speeds, scores each candidate by an intensity-weighted inverse
phase variance, and returns the maximizing speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import minimize_scalar

from .aperture import ApertureConfig
from .beamformer import BeamformGrid, DasMatrix, build_das_matrix
from .geometry import ArrayGeometry, MediumParams
from .signal import ChannelData

VARIANCE_FLOOR = 1e-12
DEFAULT_BOUNDS = (1200.0, 1700.0)
_SCAN_STEP = 25.0  # m/s; compound Qp peaks are ~40 m/s wide at half maximum


@dataclass(frozen=True)
class HyperbolaSamples:
    """Per-element delayed samples along each grid point's hyperbola.

    ``values[k, i]`` is element i's interpolated, phase-rotated
    contribution to grid point k; summing each row over its present
    entries reproduces the beamformed value. ``present`` flags entries
    the DAS matrix actually supports (inside the aperture and fast-time
    window).
    """

    values: np.ndarray
    present: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.present.shape or self.values.ndim != 2:
            raise ValueError("values and present must be equal-shape 2-D arrays")


def hyperbola_samples(matrix: DasMatrix, data: ChannelData) -> HyperbolaSamples:
    """Gather the delayed per-element samples behind each beamformed value.

    The DAS matrix is applied to an (n_s*N_e, N_e) operand whose column j
    carries element j's samples in its own block and zeros elsewhere, so
    the product keeps per-element contributions separate instead of
    summing them.
    """
    if data.kind != "iq":
        raise ValueError("hyperbola phases require iq data, got rf")
    prov = matrix.provenance
    if data.n_samples != prov.n_samples or data.num_elements != prov.num_elements:
        raise ValueError(
            f"channel data shape ({data.n_samples}, {data.num_elements}) does not "
            f"match matrix provenance ({prov.n_samples}, {prov.num_elements})")
    if data.samples.ndim != 2:
        raise ValueError("hyperbola_samples expects a single frame")
    n_s, n_e = data.n_samples, data.num_elements
    operand = sparse.csc_matrix(
        (data.samples.reshape(-1, order="F"),
         np.arange(n_s * n_e, dtype=np.int64),
         np.arange(0, n_s * n_e + 1, n_s, dtype=np.int64)),
        shape=(n_s * n_e, n_e))
    values = np.asarray((matrix.weights @ operand).todense())

    csr = matrix.weights
    rows = np.repeat(np.arange(csr.shape[0], dtype=np.int64), np.diff(csr.indptr))
    present = np.zeros((csr.shape[0], n_e), dtype=bool)
    present[rows, csr.indices // n_s] = True
    return HyperbolaSamples(values=values, present=present)


def qp_metric(samples: HyperbolaSamples) -> float:
    """Intensity-weighted inverse phase variance, averaged over hyperbolas.

    Per row with at least two present entries: unwrap the phases of the
    present entries in element order, and score the row as
    |sum of entries|^2 / max(Var(phase), 1e-12) with the sample variance
    (n-1 denominator). Rows with fewer than two present entries are
    skipped; the metric is the mean over the remaining rows.
    """
    present = samples.present
    counts = present.sum(axis=1)
    eligible = counts >= 2
    if not eligible.any():
        raise ValueError("insufficient aperture for the phase-dispersion metric: "
                         "no grid point has two or more contributing elements")
    values = samples.values[eligible]
    mask = present[eligible]
    n = counts[eligible].astype(float)

    # compact present entries to the front of each row, preserving order
    order = np.argsort(~mask, axis=1, kind="stable")
    phases = np.take_along_axis(np.angle(values), order, axis=1)
    unwrapped = np.unwrap(phases, axis=1)
    slot = np.arange(mask.shape[1])[None, :]
    valid = slot < n[:, None]

    mean = (unwrapped * valid).sum(axis=1) / n
    var = ((unwrapped - mean[:, None]) ** 2 * valid).sum(axis=1) / (n - 1.0)
    intensity = np.abs(values.sum(axis=1)) ** 2
    return float(np.mean(intensity / np.maximum(var, VARIANCE_FLOOR)))


@dataclass(frozen=True)
class SosEstimate:
    """Result of a speed-of-sound search."""

    c_hat: int
    qp_curve: tuple
    bounds: tuple[float, float]
    hit_bound: bool = False


def _as_sequence(obj):
    if isinstance(obj, (list, tuple)):
        return list(obj)
    return [obj]


def estimate_sos(data, grid: BeamformGrid, geom: ArrayGeometry, scheme,
                 aperture: ApertureConfig, c0: float,
                 bounds: tuple[float, float] = DEFAULT_BOUNDS,
                 interp: str = "linear") -> SosEstimate:
    """Estimate the medium's average speed of sound from I/Q channel data.

    For each candidate speed c the grid depths are rescaled by c/c0 --
    pinning every vertex to a fixed fast-time sample while the hyperbola
    shape changes -- the DAS matrix is rebuilt with that speed, and the
    phase-dispersion metric is evaluated. A bounded scalar search
    maximizes the metric to 1 m/s and the result is rounded to the
    nearest integer.

    ``scheme`` and ``data`` may be sequences of equal length (one entry
    per transmit of a compound set); hyperbola samples are then summed
    element-wise across transmits before scoring. Multi-frame data
    contribute all frames to the sum.

    The metric curve has a low, gently rippled plateau far from the true
    speed that can trap a golden-section search started on the full
    bracket, so a coarse uniform scan locates the peak region first and
    the bounded search then refines within one scan step of it.
    """
    schemes = _as_sequence(scheme)
    datasets = _as_sequence(data)
    if len(schemes) != len(datasets):
        raise ValueError(f"got {len(schemes)} transmit schemes "
                         f"but {len(datasets)} channel datasets")
    for d in datasets:
        if d.kind != "iq":
            raise ValueError("speed-of-sound estimation requires iq data")
    c_lo, c_hi = bounds
    if not c_lo < c_hi:
        raise ValueError(f"bounds must satisfy c_lo < c_hi, got {bounds}")
    evaluations: list[tuple[float, float]] = []

    def negative_qp(c: float) -> float:
        scaled = BeamformGrid(x=grid.x, z=grid.z * (c / c0), shape=grid.shape)
        medium = MediumParams(speed_of_sound=c)
        total_values = None
        total_present = None
        for sch, ds in zip(schemes, datasets):
            matrix = build_das_matrix(
                scaled, geom, sch, medium, fs=ds.fs, fc=ds.fc,
                n_samples=ds.n_samples, is_iq=True, aperture=aperture,
                interp=interp)
            frames = (ds.samples[..., None] if ds.samples.ndim == 2
                      else ds.samples)
            for j in range(frames.shape[2]):
                frame = ChannelData(samples=frames[:, :, j], kind="iq",
                                    fs=ds.fs, fc=ds.fc, bandwidth=ds.bandwidth)
                h = hyperbola_samples(matrix, frame)
                if total_values is None:
                    total_values = h.values.copy()
                    total_present = h.present.copy()
                else:
                    total_values += h.values
                    total_present |= h.present
        qp = qp_metric(HyperbolaSamples(values=total_values, present=total_present))
        evaluations.append((float(c), qp))
        return -qp

    n_scan = max(int(np.ceil((c_hi - c_lo) / _SCAN_STEP)), 2) + 1
    scan = np.linspace(c_lo, c_hi, n_scan)
    coarse_best = scan[int(np.argmin([negative_qp(c) for c in scan]))]
    lo = max(c_lo, coarse_best - (c_hi - c_lo) / (n_scan - 1))
    hi = min(c_hi, coarse_best + (c_hi - c_lo) / (n_scan - 1))
    minimize_scalar(negative_qp, bounds=(lo, hi), method="bounded",
                    options={"xatol": 1.0})
    best_c, _ = max(evaluations, key=lambda item: item[1])
    c_hat = int(round(best_c))
    hit_bound = min(c_hat - c_lo, c_hi - c_hat) <= 2.0
    curve = tuple(sorted(evaluations))
    return SosEstimate(c_hat=c_hat, qp_curve=curve, bounds=(float(c_lo), float(c_hi)),
                       hit_bound=hit_bound)
