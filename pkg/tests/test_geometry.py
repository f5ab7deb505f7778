import numpy as np
import pytest

from pwdas import (ArrayGeometry, GridPoint, MediumParams, TransmitScheme,
                   element_positions, hyperbola_residual, receive_distance,
                   transmit_distance_circular, transmit_distance_general,
                   transmit_distance_plane, travel_time, virtual_source)


def test_element_positions_three_elements_unit_pitch():
    geom = ArrayGeometry(num_elements=3, pitch=1.0, element_width=0.5)
    pos = element_positions(geom)
    np.testing.assert_array_equal(pos[:, 0], [-1.0, 0.0, 1.0])
    np.testing.assert_array_equal(pos[:, 1], 0.0)


def test_element_positions_two_elements_half_pitch_symmetry():
    geom = ArrayGeometry(num_elements=2, pitch=0.3e-3, element_width=0.2e-3)
    np.testing.assert_allclose(element_positions(geom)[:, 0], [-0.15e-3, 0.15e-3])


def test_element_positions_128_elements():
    geom = ArrayGeometry(num_elements=128, pitch=0.3e-3, element_width=0.25e-3)
    x = element_positions(geom)[:, 0]
    # (128 - 1) * 0.3 mm / 2 = 19.05 mm at each end
    np.testing.assert_allclose(x[0], -19.05e-3)
    np.testing.assert_allclose(x[-1], +19.05e-3)
    assert np.all(np.diff(x) > 0)


@pytest.mark.parametrize("n", [2, 3, 16, 127])
def test_element_positions_mirror_symmetry_exact(n):
    geom = ArrayGeometry(num_elements=n, pitch=0.42e-3, element_width=0.3e-3)
    x = element_positions(geom)[:, 0]
    np.testing.assert_array_equal(x, -x[::-1])


def test_geometry_validation():
    with pytest.raises(ValueError):
        ArrayGeometry(num_elements=1, pitch=0.3e-3, element_width=0.2e-3)
    with pytest.raises(ValueError):
        ArrayGeometry(num_elements=8, pitch=0.0, element_width=0.2e-3)
    with pytest.raises(ValueError):
        ArrayGeometry(num_elements=8, pitch=0.3e-3, element_width=0.4e-3)
    assert ArrayGeometry(8, 0.3e-3, 0.25e-3).aperture_length == pytest.approx(2.1e-3)


def test_virtual_source_on_axis_quarter_circle():
    x0, z0 = virtual_source(0.0, np.pi / 2, 2.0)
    assert x0 == pytest.approx(0.0, abs=1e-15)
    assert z0 == pytest.approx(-1.0)


@pytest.mark.parametrize("beta", [0.3, 1.0, 2.5])
@pytest.mark.parametrize("length", [0.01, 0.04])
def test_virtual_source_untilted_is_centered(beta, length):
    x0, z0 = virtual_source(0.0, beta, length)
    assert x0 == 0.0
    assert z0 < 0


def test_virtual_source_small_width_limit():
    length = 0.02
    for beta in (1e-4, 1e-5, 1e-6):
        _, z0 = virtual_source(0.0, beta, length)
        # z0 ~ -L/beta for an untilted wave as the width shrinks
        assert z0 == pytest.approx(-length / beta, rel=1e-6)


def test_virtual_source_rejects_bad_width():
    with pytest.raises(ValueError):
        virtual_source(0.0, 0.0, 0.02)
    with pytest.raises(ValueError):
        virtual_source(0.0, np.pi, 0.02)


def test_circular_distance_source_behind_center():
    # source at (0, -1): distance to (0, z) is sqrt((z+1)^2) - 1 = z
    z = np.array([0.5, 1.0, 3.7])
    d = transmit_distance_circular(np.zeros_like(z), z, (0.0, -1.0), 2.0)
    np.testing.assert_allclose(d, z, rtol=1e-12)


def test_circular_distance_source_beyond_array_end():
    # |x0| > L/2 engages the distance-to-edge branch
    d = transmit_distance_circular(0.0, 0.04, (0.013, -0.001), 0.02)
    expected = np.hypot(0.013, 0.041) - np.hypot(0.003, 0.001)
    assert d == pytest.approx(expected, rel=1e-12)


def test_circular_distance_heaviside_boundary_uses_depth_branch():
    # a source exactly over the array end keeps the |z0| reference
    length = 0.02
    d_edge = transmit_distance_circular(0.0, 0.03, (length / 2, -0.005), length)
    expected = np.hypot(length / 2, 0.035) - 0.005
    assert d_edge == pytest.approx(expected, rel=1e-12)


def test_plane_distance_unsteered_equals_depth():
    x = np.linspace(-0.02, 0.02, 11)
    d = transmit_distance_plane(x, 0.03, 0.0, 0.02)
    np.testing.assert_allclose(d, 0.03)


def test_plane_distance_thirty_degrees():
    d = transmit_distance_plane(0.0, 0.03, np.deg2rad(30.0), 0.02)
    assert d == pytest.approx(0.01 * 0.5 + 0.03 * np.sqrt(3) / 2, rel=1e-12)
    assert d == pytest.approx(0.030981, abs=1e-6)


def test_plane_distance_continuous_at_zero_tilt():
    for eps in (1e-9, 1e-12):
        d_pos = transmit_distance_plane(0.007, 0.03, +eps, 0.02)
        d_neg = transmit_distance_plane(0.007, 0.03, -eps, 0.02)
        assert d_pos == pytest.approx(0.03, abs=1e-10)
        assert d_neg == pytest.approx(0.03, abs=1e-10)


def test_plane_wave_limit_of_circular_transmit():
    # a nearly flat diverging wave must converge to the plane-wave distance
    length = 0.02
    beta = 1e-6
    xs = np.linspace(-length / 50, length / 50, 32)
    zs = np.linspace(0.2 * length, 4 * length, 32)
    X, Z = np.meshgrid(xs, zs)
    for tilt_deg in (-20.0, 0.0, 20.0):
        tilt = np.deg2rad(tilt_deg)
        source = virtual_source(tilt, beta, length)
        d_circ = transmit_distance_circular(X, Z, source, length)
        d_plane = transmit_distance_plane(X, Z, tilt, length)
        assert np.max(np.abs(d_circ - d_plane)) < 1e-6 * length


def test_general_distance_reduces_to_circular_for_diverging_sources():
    rng = np.random.default_rng(42)
    length = 0.02
    for _ in range(100):
        source = (rng.uniform(-0.05, 0.05), rng.uniform(-0.5, -1e-4))
        x = rng.uniform(-0.03, 0.03)
        z = rng.uniform(1e-3, 0.08)
        d_gen = transmit_distance_general(x, z, source, length)
        d_circ = transmit_distance_circular(x, z, source, length)
        np.testing.assert_allclose(d_gen, d_circ, rtol=1e-15, atol=0)


def test_general_distance_focused_hand_value():
    # focus behind the point: signed distance to focus plus the distance
    # from the focus to the farthest array end
    d = transmit_distance_general(0.0, 0.05, (0.0, 0.03), 0.02)
    assert d == pytest.approx(0.02 + np.hypot(0.01, 0.03), rel=1e-12)
    # point shallower than the focus gets the negative branch
    d_before = transmit_distance_general(0.0, 0.01, (0.0, 0.03), 0.02)
    assert d_before == pytest.approx(-0.02 + np.hypot(0.01, 0.03), rel=1e-12)


def test_general_distance_at_focus_is_reference_only():
    length = 0.02
    d = transmit_distance_general(0.0, 0.03, (0.0, 0.03), length)
    assert d == pytest.approx(np.hypot(length / 2, 0.03), rel=1e-12)


def test_general_distance_rejects_source_on_array_plane():
    with pytest.raises(ValueError):
        transmit_distance_general(0.0, 0.03, (0.0, 0.0), 0.02)


def test_focused_distance_matches_wave_superposition_peak():
    # independent oracle: fire every element with its focusing delay
    # (min delay zero) and locate the coherent field peak beyond the focus;
    # the formula's reference term must match that arrival time
    geom = ArrayGeometry(128, 0.3e-3, 0.25e-3)
    length = geom.aperture_length
    elem_x = element_positions(geom)[:, 0]
    c, fc, sigma, fs = 1540.0, 5e6, 2.4e-7, 200e6
    rng = np.random.default_rng(11)
    t = np.arange(int(80e-6 * fs)) / fs
    for _ in range(4):
        x0 = rng.uniform(-4e-3, 4e-3)
        z0 = rng.uniform(8e-3, 18e-3)
        d_i = np.hypot(elem_x - x0, z0)
        t_fire = (d_i.max() - d_i) / c
        pz = z0 + rng.uniform(8e-3, 25e-3)
        arrivals = t_fire + np.hypot(x0 - elem_x, pz) / c
        u = t[None, :] - arrivals[:, None]
        field = (np.exp(-0.5 * (u / sigma) ** 2)
                 * np.exp(2j * np.pi * fc * u)).sum(axis=0)
        t_peak = t[np.argmax(np.abs(field))]
        d_model = transmit_distance_general(x0, pz, (x0, z0), length)
        assert abs(t_peak * c - d_model) < c * sigma / 10


def test_receive_distance_basics():
    assert receive_distance(0.0, 0.03, 0.0) == pytest.approx(0.03)
    assert receive_distance(0.0, 0.04, 0.03) == pytest.approx(0.05)  # 3-4-5
    # lateral symmetry about the scatterer
    assert receive_distance(0.012, 0.02, 0.012 + 0.004) == \
        receive_distance(0.012, 0.02, 0.012 - 0.004)


def test_receive_distance_monotone_in_lateral_offset():
    offsets = np.linspace(0.0, 0.02, 50)
    d = receive_distance(0.0, 0.015, offsets)
    assert np.all(np.diff(d) > 0)
    assert np.all(d >= 0.015)


def test_travel_time_round_trip_arithmetic():
    geom = ArrayGeometry(2, 0.02, 0.01)
    medium = MediumParams(1500.0)
    # element at x=+0.01, scatterer giving 0.03 m each way
    scheme = TransmitScheme("circular", virtual_source=(0.0, -1.0))
    z = 0.03
    x_i = 0.01
    d_rx = np.hypot(x_i, z)
    tau = travel_time(0.0, z, x_i, scheme, geom, medium)
    assert tau == pytest.approx((z + d_rx) / 1500.0, rel=1e-12)

    shifted = TransmitScheme("circular", virtual_source=(0.0, -1.0),
                             t0=(z + d_rx) / 1500.0)
    assert travel_time(0.0, z, x_i, shifted, geom, medium) == pytest.approx(0.0, abs=1e-18)


def test_travel_time_unsteered_plane_center_element():
    geom = ArrayGeometry(3, 0.3e-3, 0.2e-3)
    medium = MediumParams(1540.0)
    scheme = TransmitScheme("plane", tilt=0.0, t0=2e-6)
    z = 0.025
    tau = travel_time(0.0, z, 0.0, scheme, geom, medium)
    assert tau == pytest.approx(2 * z / 1540.0 - 2e-6, rel=1e-12)


def test_hyperbola_residual_vanishes_on_arrival_curve():
    geom = ArrayGeometry(64, 0.3e-3, 0.25e-3)
    medium = MediumParams(1540.0)
    scheme = TransmitScheme("plane", tilt=np.deg2rad(7.0), t0=1.3e-6)
    xs, zs = 0.004, 0.027
    elem_x = element_positions(geom)[:, 0]
    tau = travel_time(xs, zs, elem_x, scheme, geom, medium)
    res = hyperbola_residual(xs, zs, elem_x, tau + scheme.t0, scheme, geom, medium)
    assert np.max(np.abs(res)) < 1e-9


def test_hyperbola_residual_vertex_and_off_curve_point():
    geom = ArrayGeometry(16, 0.3e-3, 0.25e-3)
    medium = MediumParams(1500.0)
    scheme = TransmitScheme("circular", tilt=0.1, width=1.2)
    xs, zs = -0.003, 0.02
    from pwdas import transmit_distance
    d_tx = transmit_distance(xs, zs, scheme, geom)
    c = medium.speed_of_sound
    vertex = hyperbola_residual(xs, zs, xs, (d_tx + zs) / c, scheme, geom, medium)
    assert vertex == pytest.approx(0.0, abs=1e-12)
    off = hyperbola_residual(xs, zs, xs + zs, d_tx / c, scheme, geom, medium)
    assert off == pytest.approx(-2.0, rel=1e-12)


def test_hyperbola_residual_random_configurations():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(2, 96))
        geom = ArrayGeometry(n, rng.uniform(0.1e-3, 0.5e-3), 0.1e-3)
        medium = MediumParams(rng.uniform(1300.0, 1700.0))
        kind = rng.choice(["plane", "circular"])
        if kind == "plane":
            scheme = TransmitScheme("plane", tilt=rng.uniform(-0.4, 0.4),
                                    t0=rng.uniform(0.0, 2e-6))
        else:
            scheme = TransmitScheme("circular", tilt=rng.uniform(-0.4, 0.4),
                                    width=rng.uniform(0.2, 2.5),
                                    t0=rng.uniform(0.0, 2e-6))
        xs = rng.uniform(-0.02, 0.02)
        zs = rng.uniform(2e-3, 0.08)
        elem_x = element_positions(geom)[:, 0]
        tau = travel_time(xs, zs, elem_x, scheme, geom, medium)
        res = hyperbola_residual(xs, zs, elem_x, tau + scheme.t0, scheme, geom, medium)
        assert np.max(np.abs(res)) < 1e-9


def test_transmit_scheme_validation():
    with pytest.raises(ValueError):
        TransmitScheme("plane", tilt=np.pi / 2)
    with pytest.raises(ValueError):
        TransmitScheme("circular", width=np.pi)
    with pytest.raises(ValueError):
        TransmitScheme("circular")  # needs width or a virtual source
    with pytest.raises(ValueError):
        TransmitScheme("circular", virtual_source=(0.0, 0.01))
    with pytest.raises(ValueError):
        TransmitScheme("focused", virtual_source=(0.0, -0.01))
    with pytest.raises(ValueError):
        TransmitScheme("sector")
    with pytest.raises(ValueError):
        MediumParams(0.0)
    with pytest.raises(ValueError):
        GridPoint(0.0, -0.01)
