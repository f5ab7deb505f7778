"""Element directivity and the directivity-derived receive f-number.

The receive f-number is the ratio of depth to receive-aperture width. A
physically motivated value follows from the directivity of a single
element: open the aperture up to the angle where the element response
falls to a chosen threshold (-3 dB by default) and no further.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

_BRACKET_STEPS = 4096


@dataclass(frozen=True)
class ApertureConfig:
    """Receive-aperture settings for beamforming.

    f_number = 0 means full aperture. ``receive_steer`` is the receive
    steering angle (radians) that widens the directivity constraint when
    angled receiving is used.
    """

    f_number: float = 0.0
    directivity_threshold: float = 0.71
    receive_steer: float = 0.0

    def __post_init__(self):
        if not self.f_number >= 0:
            raise ValueError(f"f_number must be >= 0, got {self.f_number}")
        if not 0 < self.directivity_threshold <= 1:
            raise ValueError(
                f"directivity_threshold must lie in (0, 1], "
                f"got {self.directivity_threshold}"
            )


def directivity(theta, width_over_lambda: float):
    """Directivity of a piston-like strip element in a soft baffle.

    D(theta) = cos(theta) * sinc(pi * (W/lambda) * sin(theta)) with the
    unnormalized sinc(u) = sin(u)/u. Equals 1 at normal incidence and 0
    at +-pi/2.
    """
    if not width_over_lambda > 0:
        raise ValueError(f"width_over_lambda must be positive, got {width_over_lambda}")
    u = np.pi * width_over_lambda * np.sin(theta)
    # np.sinc is the normalized variant sin(pi x)/(pi x)
    return np.cos(theta) * np.sinc(u / np.pi)


def lambda_min(c: float, fc: float, bandwidth: float) -> float:
    """Smallest significant wavelength, c / (fc + bandwidth/2)."""
    if not (c > 0 and fc > 0 and bandwidth >= 0):
        raise ValueError("c and fc must be positive, bandwidth nonnegative")
    if not bandwidth < 2 * fc:
        raise ValueError(f"bandwidth must be below 2*fc, got {bandwidth}")
    return c / (fc + bandwidth / 2)


def solve_angle_of_view(width_over_lambda: float, d_thresh: float = 0.71,
                        receive_steer: float = 0.0) -> float:
    """Half angle-of-view: smallest angle where directivity hits the threshold.

    Solves D(alpha + |receive_steer|) = d_thresh for the smallest
    alpha in [0, pi/2]. The directivity can cross the threshold more than
    once for wide elements; the first crossing (the main lobe) is the
    one that matters, so the bounded search brackets it on a fine grid
    before refining. Result is accurate to well below 1e-6 rad.
    """
    if not 0 < d_thresh <= 1:
        raise ValueError(f"d_thresh must lie in (0, 1], got {d_thresh}")
    steer = abs(receive_steer)

    def gap(alpha):
        return directivity(alpha + steer, width_over_lambda) - d_thresh

    g0 = gap(0.0)
    if g0 < 0:
        raise ValueError(
            f"directivity threshold {d_thresh} unreachable at receive steering "
            f"{receive_steer:.4f} rad (D = {g0 + d_thresh:.4f} at the steer angle)"
        )
    if g0 == 0:
        return 0.0
    alphas = np.linspace(0.0, np.pi / 2, _BRACKET_STEPS)
    values = gap(alphas)
    below = np.nonzero(values <= 0)[0]
    if below.size == 0:
        # threshold never reached before pi/2; widest admissible aperture
        return np.pi / 2
    hi = alphas[below[0]]
    lo = alphas[below[0] - 1]
    return float(brentq(gap, lo, hi, xtol=1e-9))


def fnumber_from_angle(alpha: float) -> float:
    """f-number from the half angle-of-view: 1 / (2 tan(alpha))."""
    if alpha == 0:
        raise ValueError("angle-of-view 0 gives an infinite f-number (zero aperture)")
    if not 0 < alpha < np.pi / 2:
        raise ValueError(f"alpha must lie in (0, pi/2), got {alpha}")
    return 1.0 / (2.0 * np.tan(alpha))


def derive_f_number(element_width: float, fc: float, bandwidth: float, c: float,
                    d_thresh: float = 0.71, receive_steer: float = 0.0) -> float:
    """Directivity-derived receive f-number for a probe and pulse band."""
    wol = element_width / lambda_min(c, fc, bandwidth)
    alpha = solve_angle_of_view(wol, d_thresh, receive_steer)
    return fnumber_from_angle(alpha)


def aperture_mask(xs, zs, element_xs, f_number: float) -> np.ndarray:
    """Boolean mask of elements within the receive aperture of a point.

    Element i is kept iff |xs - x_i| <= zs / (2 f_number); the boundary is
    inclusive and f_number = 0 keeps every element. Broadcasts (xs, zs)
    against ``element_xs``.
    """
    if not f_number >= 0:
        raise ValueError(f"f_number must be >= 0, got {f_number}")
    lateral = np.abs(np.asarray(xs) - np.asarray(element_xs))
    if f_number == 0:
        return np.ones(np.broadcast(lateral, np.asarray(zs)).shape, dtype=bool)
    return lateral <= np.asarray(zs) / (2.0 * f_number)
