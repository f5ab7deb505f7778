"""Image-quality metrics: contrast-to-noise ratio and point-target width.

Both metrics operate on the envelope of a beamformed frame laid out on a
regular grid. CNR uses the dB-scaled envelope normalized to the frame
maximum, so it is invariant to global amplitude scaling; FWHM measures
the -6 dB width of the amplitude envelope through a detected peak.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamformer import BeamformedFrame, BeamformGrid
from .geometry import GridPoint

_DB_FLOOR = -400.0  # stands in for log of an exactly zero envelope pixel
_MIN_REGION_PIXELS = 25


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float

    def contains(self, x, z):
        return np.hypot(x - self.center[0], z - self.center[1]) <= self.radius


@dataclass(frozen=True)
class Annulus:
    center: tuple[float, float]
    r_inner: float
    r_outer: float

    def contains(self, x, z):
        r = np.hypot(x - self.center[0], z - self.center[1])
        return (r >= self.r_inner) & (r <= self.r_outer)


@dataclass(frozen=True)
class Rectangle:
    x_min: float
    x_max: float
    z_min: float
    z_max: float

    def contains(self, x, z):
        return ((x >= self.x_min) & (x <= self.x_max)
                & (z >= self.z_min) & (z <= self.z_max))


@dataclass(frozen=True)
class RegionSpec:
    """Interior disk and exterior reference region for contrast metrics."""

    interior: Disk
    exterior: Annulus | Rectangle


def _check_grid_match(frame: BeamformedFrame, grid: BeamformGrid):
    if frame.provenance.grid_digest != grid.digest():
        raise ValueError("frame was not beamformed on the given grid")


def cnr(frame: BeamformedFrame, grid: BeamformGrid, region: RegionSpec) -> float:
    """Contrast-to-noise ratio between the interior and exterior regions.

    |mean_in - mean_out| / sqrt(var_in + var_out), computed on the
    envelope in dB relative to the frame maximum. Requires disjoint
    regions of at least 25 pixels each and nonzero combined variance.
    """
    _check_grid_match(frame, grid)
    env = np.abs(frame.values)
    peak = env.max()
    if peak == 0:
        raise ValueError("unusable region: frame envelope is identically zero")
    db = np.full(env.shape, _DB_FLOOR)
    nonzero = env > 0
    db[nonzero] = 20.0 * np.log10(env[nonzero] / peak)

    inside = region.interior.contains(grid.x, grid.z)
    outside = region.exterior.contains(grid.x, grid.z)
    if (inside & outside).any():
        raise ValueError("interior and exterior regions overlap on this grid")
    for name, mask in (("interior", inside), ("exterior", outside)):
        if mask.sum() < _MIN_REGION_PIXELS:
            raise ValueError(f"{name} region covers only {int(mask.sum())} pixels "
                             f"(need >= {_MIN_REGION_PIXELS})")
    var_in, var_out = db[inside].var(), db[outside].var()
    if var_in + var_out == 0:
        raise ValueError("unusable region: zero variance inside and outside")
    return float(abs(db[inside].mean() - db[outside].mean())
                 / np.sqrt(var_in + var_out))


def _grid_axes(grid: BeamformGrid):
    nz, nx = grid.shape
    x2d = grid.x.reshape(nz, nx, order="F")
    z2d = grid.z.reshape(nz, nx, order="F")
    if not (np.ptp(x2d, axis=0).max() == 0 and np.ptp(z2d, axis=1).max() == 0):
        raise ValueError("profile metrics need a regular rectangular grid")
    return x2d[0, :], z2d[:, 0]


def _half_crossing(profile, coords, peak_idx, step):
    """Coordinate where the profile falls below half max, walking one way."""
    half = profile[peak_idx] / 2.0
    i = peak_idx
    while 0 <= i + step < profile.size:
        j = i + step
        if profile[j] < half:
            # linear interpolation between samples i and j
            t = (profile[i] - half) / (profile[i] - profile[j])
            return coords[i] + t * (coords[j] - coords[i])
        i = j
    side = "right" if step > 0 else "left"
    raise ValueError(f"peak not resolvable: profile never falls below half "
                     f"maximum on the {side} side")


def fwhm(frame: BeamformedFrame, grid: BeamformGrid, point: GridPoint,
         axis: str = "lateral", search_radius: float = 1e-3) -> float:
    """Full width at half maximum of the envelope peak near a point.

    The brightest pixel within ``search_radius`` of ``point`` is taken as
    the peak, the envelope profile through it along the requested axis
    ('lateral' or 'axial') is extracted, and the width is measured at 50%
    of the peak amplitude with linear interpolation between samples.
    Raises when the profile does not cross half maximum on both sides
    (peak at the grid edge, or clutter floor above -6 dB).
    """
    if axis not in ("lateral", "axial"):
        raise ValueError(f"axis must be 'lateral' or 'axial', got {axis!r}")
    _check_grid_match(frame, grid)
    xs, zs = _grid_axes(grid)
    env = np.abs(frame.image)

    near = (np.hypot(grid.x - point.x, grid.z - point.z)
            <= search_radius).reshape(grid.shape, order="F")
    if not near.any():
        raise ValueError(f"no grid pixel within {search_radius} m of "
                         f"({point.x}, {point.z})")
    masked = np.where(near, env, -np.inf)
    iz, ix = np.unravel_index(np.argmax(masked), env.shape)
    if env[iz, ix] <= 0:
        raise ValueError("peak not resolvable: zero envelope in the search window")

    if axis == "lateral":
        profile, coords, peak_idx = env[iz, :], xs, ix
    else:
        profile, coords, peak_idx = env[:, ix], zs, iz
    left = _half_crossing(profile, coords, peak_idx, -1)
    right = _half_crossing(profile, coords, peak_idx, +1)
    return float(abs(right - left))
