"""Travel-distance and travel-time math for a uniform linear array.

Coordinate convention: the x-axis runs along the transducer with x = 0 at
the array center, the z-axis points downward into the medium with z = 0 at
the element surface. All lengths are in meters, times in seconds,
frequencies in Hz; unit conversions belong at the I/O boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TRANSMIT_KINDS = ("plane", "circular", "focused")


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count, pitch and element width (m)."""

    num_elements: int
    pitch: float
    element_width: float

    def __post_init__(self):
        if self.num_elements < 2:
            raise ValueError(f"num_elements must be >= 2, got {self.num_elements}")
        if not self.pitch > 0:
            raise ValueError(f"pitch must be positive, got {self.pitch}")
        if not 0 < self.element_width <= self.pitch:
            raise ValueError(
                f"element_width must lie in (0, pitch], got {self.element_width}"
            )

    @property
    def aperture_length(self) -> float:
        """Center-to-center distance from the first to the last element."""
        return (self.num_elements - 1) * self.pitch


@dataclass(frozen=True)
class TransmitScheme:
    """One transmit event: plane, circular (diverging) or focused wave.

    Parameters
    ----------
    kind : {'plane', 'circular', 'focused'}
    tilt : float
        Steering angle in radians, counterclockwise from the z-axis.
        Must lie in (-pi/2, pi/2) for plane and circular kinds.
    width : float, optional
        Angular width in radians subtended by the array seen from the
        virtual source; circular kind only, in (0, pi).
    virtual_source : (float, float), optional
        (x0, z0) of the virtual point source in meters. Required for the
        focused kind (z0 > 0); for the circular kind it is derived from
        tilt and width when omitted (z0 < 0 when given).
    t0 : float
        Acquisition start time in seconds, subtracted from travel times.
    """

    kind: str
    tilt: float = 0.0
    width: float | None = None
    virtual_source: tuple[float, float] | None = None
    t0: float = 0.0

    def __post_init__(self):
        if self.kind not in TRANSMIT_KINDS:
            raise ValueError(f"kind must be one of {TRANSMIT_KINDS}, got {self.kind!r}")
        if self.kind in ("plane", "circular") and not -np.pi / 2 < self.tilt < np.pi / 2:
            raise ValueError(f"tilt must lie in (-pi/2, pi/2), got {self.tilt}")
        if self.kind == "circular":
            if self.width is None and self.virtual_source is None:
                raise ValueError("circular transmit needs width or virtual_source")
            if self.width is not None and not 0 < self.width < np.pi:
                raise ValueError(f"width must lie in (0, pi), got {self.width}")
            if self.virtual_source is not None and not self.virtual_source[1] < 0:
                raise ValueError("circular transmit needs a virtual source with z0 < 0")
        if self.kind == "focused":
            if self.virtual_source is None:
                raise ValueError("focused transmit needs virtual_source")
            if not self.virtual_source[1] > 0:
                raise ValueError("focused transmit needs a virtual source with z0 > 0")

    def source_for(self, geom: ArrayGeometry) -> tuple[float, float]:
        """Virtual source of this transmit for the given array."""
        if self.virtual_source is not None:
            return self.virtual_source
        if self.kind != "circular":
            raise ValueError(f"{self.kind} transmit has no virtual source to derive")
        return virtual_source(self.tilt, self.width, geom.aperture_length)


@dataclass(frozen=True)
class MediumParams:
    """Propagation medium, assumed homogeneous."""

    speed_of_sound: float

    def __post_init__(self):
        if not (np.isfinite(self.speed_of_sound) and self.speed_of_sound > 0):
            raise ValueError(f"speed_of_sound must be positive and finite, "
                             f"got {self.speed_of_sound}")


@dataclass(frozen=True)
class GridPoint:
    """A single image point below the array (z > 0)."""

    x: float
    z: float

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError(f"grid points must have z > 0, got z={self.z}")


def element_positions(geom: ArrayGeometry) -> np.ndarray:
    """Element center coordinates, shape (num_elements, 2).

    x_i = (pitch/2) * (2i - N - 1) for i = 1..N, z_i = 0: positions are
    symmetric about the array center and strictly increasing in x.
    """
    i = np.arange(1, geom.num_elements + 1)
    x = 0.5 * geom.pitch * (2 * i - geom.num_elements - 1)
    return np.column_stack([x, np.zeros_like(x)])


def virtual_source(tilt: float, width: float, aperture_length: float) -> tuple[float, float]:
    """Virtual point source (x0, z0) of a tilted diverging wave.

    ``width`` is the angle under which the virtual source sees the array
    ends; it must lie in (0, pi). The source sits behind the array
    (z0 < 0) whenever cos(width) + cos(2 tilt) > 0.
    """
    if not 0 < width < np.pi:
        raise ValueError(f"width must lie in (0, pi), got {width}")
    if not aperture_length > 0:
        raise ValueError(f"aperture_length must be positive, got {aperture_length}")
    half = aperture_length / 2
    x0 = half * np.sin(2 * tilt) / np.sin(width)
    z0 = -half * (np.cos(width) + np.cos(2 * tilt)) / np.sin(width)
    return float(x0), float(z0)


def receive_distance(xs, zs, element_x):
    """Distance from a scatterer at (xs, zs) back to an element at (element_x, 0)."""
    return np.hypot(np.asarray(element_x) - xs, zs)


def transmit_distance_plane(xs, zs, tilt: float, aperture_length: float):
    """Transmit distance of a tilted plane wave to points (xs, zs).

    The wavefront leaves the leading array edge at time zero, hence the
    sign(tilt) * L/2 offset; sign(0) = 0 keeps the unsteered wave
    continuous (distance = depth).
    """
    return (np.sign(tilt) * aperture_length / 2 - np.asarray(xs)) * np.sin(tilt) \
        + zs * np.cos(tilt)


def transmit_distance_circular(xs, zs, source: tuple[float, float],
                               aperture_length: float):
    """Transmit distance of a diverging wave from a virtual source behind the array.

    Distance from the source to the point, minus the shortest distance
    from the source to the array segment: |z0| when the source sits over
    the segment, the distance to the nearest segment end otherwise.
    Certified for points in the shadow of the array; other points get the
    same formula without a guarantee (callers own any masking).
    """
    x0, z0 = source
    edge = abs(x0) - aperture_length / 2
    # Heaviside with H(0) = 0: a source over the array end uses the |z0| branch.
    closest = np.sqrt((edge > 0) * edge**2 + z0**2)
    return np.hypot(np.asarray(xs) - x0, zs - z0) - closest


def transmit_distance_general(xs, zs, source: tuple[float, float],
                              aperture_length: float):
    """Transmit distance for diverging (z0 < 0) or focused (z0 > 0) wavefronts.

    Signed distance from the virtual source to the point, plus sign(z0)
    times the source-to-array reference distance: subtracted for a
    diverging wave (nearest point of the segment), added for a focused
    one (farthest end of the segment, where the wavefront starts with
    zero delay). Reduces exactly to the circular form when z0 < 0.
    """
    x0, z0 = source
    if z0 == 0:
        raise ValueError("virtual source must not lie on the array plane (z0 = 0)")
    s0 = np.sign(z0)
    edge = abs(x0) + s0 * aperture_length / 2
    reference = np.sqrt((edge > 0) * edge**2 + z0**2)
    to_point = np.sign(np.asarray(zs) - z0) * np.hypot(np.asarray(xs) - x0, zs - z0)
    return to_point + s0 * reference


def transmit_distance(xs, zs, scheme: TransmitScheme, geom: ArrayGeometry):
    """Transmit distance for any scheme kind, dispatching on ``scheme.kind``."""
    length = geom.aperture_length
    if scheme.kind == "plane":
        return transmit_distance_plane(xs, zs, scheme.tilt, length)
    source = scheme.source_for(geom)
    if scheme.kind == "circular":
        return transmit_distance_circular(xs, zs, source, length)
    return transmit_distance_general(xs, zs, source, length)


def travel_time(xs, zs, element_x, scheme: TransmitScheme, geom: ArrayGeometry,
                medium: MediumParams):
    """Two-way travel time from transmit to (xs, zs) and back to an element.

    tau = (d_tx + d_rx) / c - t0. Broadcasts over array-valued inputs.
    """
    d_tx = transmit_distance(xs, zs, scheme, geom)
    d_rx = receive_distance(xs, zs, element_x)
    return (d_tx + d_rx) / medium.speed_of_sound - scheme.t0


def hyperbola_residual(xs, zs, x, t, scheme: TransmitScheme, geom: ArrayGeometry,
                       medium: MediumParams):
    """Residual of the echo-arrival hyperbola of a scatterer at (xs, zs).

    Zero (up to rounding) exactly when the lateral position / fast-time
    pair (x, t) lies on the scatterer's arrival curve, i.e. when
    t = (d_tx + d_rx(x)) / c. Intended for verification, not imaging.
    """
    c = medium.speed_of_sound
    d_tx = transmit_distance(xs, zs, scheme, geom)
    shifted = np.asarray(t) - d_tx / c
    return shifted**2 / (zs**2 / c**2) - (np.asarray(x) - xs) ** 2 / zs**2 - 1.0
