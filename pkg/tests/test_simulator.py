import numpy as np
import pytest

from pwdas import (ArrayGeometry, BackgroundSpec, MediumParams, Phantom,
                   TransmitScheme, element_positions, iq_demodulate,
                   synth_channel_data, synth_iq, travel_time)

FC = 5e6
FS = 4 * FC
BW = 0.6 * FC
C = 1540.0


def setup():
    geom = ArrayGeometry(32, 0.3e-3, 0.25e-3)
    scheme = TransmitScheme("plane", tilt=0.0)
    return geom, scheme, MediumParams(C)


def test_echo_peaks_trace_the_travel_times():
    geom, scheme, medium = setup()
    n_s = 900
    phantom = Phantom(scatterers=((1.2e-3, 16e-3, 1.0),))
    iq = synth_iq(phantom, geom, scheme, medium, fs=FS, fc=FC, bandwidth=BW,
                  n_samples=n_s)
    elem_x = element_positions(geom)[:, 0]
    tau = travel_time(1.2e-3, 16e-3, elem_x, scheme, geom, medium)
    peaks = np.argmax(np.abs(iq.samples), axis=0)
    np.testing.assert_allclose(peaks / FS, tau, atol=1.0 / FS)


def test_phase_at_peak_cancels_under_rotator_convention():
    geom, scheme, medium = setup()
    phantom = Phantom(scatterers=((0.0, 12e-3, 1.0),))
    iq = synth_iq(phantom, geom, scheme, medium, fs=FS, fc=FC, bandwidth=BW,
                  n_samples=700)
    elem_x = element_positions(geom)[:, 0]
    tau = travel_time(0.0, 12e-3, elem_x, scheme, geom, medium)
    for i in (0, 15, 31):
        peak = np.argmax(np.abs(iq.samples[:, i]))
        rotated = iq.samples[peak, i] * np.exp(2j * np.pi * FC * tau[i])
        assert abs(np.angle(rotated)) < 1e-6


def test_zero_scatterers_and_linearity():
    geom, scheme, medium = setup()
    empty = synth_channel_data(Phantom(), geom, scheme, medium, fs=FS, fc=FC,
                               bandwidth=BW, n_samples=200)
    np.testing.assert_array_equal(empty.samples, 0)

    one = Phantom(scatterers=((0.0, 8e-3, 1.0), (2e-3, 9e-3, 0.5)))
    two = Phantom(scatterers=((0.0, 8e-3, 2.0), (2e-3, 9e-3, 1.0)))
    a = synth_channel_data(one, geom, scheme, medium, fs=FS, fc=FC, bandwidth=BW,
                           n_samples=600)
    b = synth_channel_data(two, geom, scheme, medium, fs=FS, fc=FC, bandwidth=BW,
                           n_samples=600)
    np.testing.assert_allclose(b.samples, 2 * a.samples, rtol=1e-12)


def test_baseband_synthesis_matches_demodulated_rf():
    geom, scheme, medium = setup()
    phantom = Phantom(scatterers=((0.0, 10e-3, 1.0), (1.5e-3, 13e-3, 0.8),
                                  (-2e-3, 15.5e-3, 1.2)))
    n_s = 1000
    rf = synth_channel_data(phantom, geom, scheme, medium, fs=FS, fc=FC,
                            bandwidth=BW, n_samples=n_s)
    direct = synth_iq(phantom, geom, scheme, medium, fs=FS, fc=FC, bandwidth=BW,
                      n_samples=n_s)
    via_demod = iq_demodulate(rf)
    core = slice(n_s // 10, -n_s // 10)
    err = np.sqrt(np.mean(np.abs(direct.samples[core] - via_demod.samples[core]) ** 2))
    ref = np.sqrt(np.mean(np.abs(direct.samples[core]) ** 2))
    assert err / ref < 0.01


def test_out_of_window_scatterer_is_silently_omitted():
    geom, scheme, medium = setup()
    n_s = 200  # window ends at 10 us, echo from 60 mm arrives at ~78 us
    far = Phantom(scatterers=((0.0, 60e-3, 1.0),))
    data = synth_channel_data(far, geom, scheme, medium, fs=FS, fc=FC,
                              bandwidth=BW, n_samples=n_s)
    np.testing.assert_array_equal(data.samples, 0)


def test_noise_is_seeded_and_scaled():
    geom, scheme, medium = setup()
    phantom = Phantom(scatterers=((0.0, 10e-3, 1.0),))
    kwargs = dict(fs=FS, fc=FC, bandwidth=BW, n_samples=600, noise_snr_db=10.0)
    a = synth_channel_data(phantom, geom, scheme, medium, seed=5, **kwargs)
    b = synth_channel_data(phantom, geom, scheme, medium, seed=5, **kwargs)
    c = synth_channel_data(phantom, geom, scheme, medium, seed=6, **kwargs)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert np.any(a.samples != c.samples)

    clean = synth_channel_data(phantom, geom, scheme, medium, fs=FS, fc=FC,
                               bandwidth=BW, n_samples=600)
    noise = a.samples - clean.samples
    snr = 20 * np.log10(np.sqrt(np.mean(clean.samples ** 2))
                        / np.sqrt(np.mean(noise ** 2)))
    assert snr == pytest.approx(10.0, abs=0.5)


def test_background_scatterers_are_deterministic():
    bg = BackgroundSpec(count=50, x_range=(-5e-3, 5e-3), z_range=(5e-3, 15e-3),
                        seed=3)
    a = Phantom(background=bg).all_scatterers()
    b = Phantom(background=bg).all_scatterers()
    np.testing.assert_array_equal(a, b)
    assert a.shape == (50, 3)
    assert np.all((a[:, 2] >= 0) & (a[:, 2] <= 1.0))
    assert np.all(a[:, 1] > 0)

    mixed = Phantom(scatterers=((0.0, 1e-3, 2.0),), background=bg)
    assert mixed.all_scatterers().shape == (51, 3)


def test_phantom_validation():
    with pytest.raises(ValueError):
        Phantom(scatterers=((0.0, -1e-3, 1.0),))
    with pytest.raises(ValueError):
        Phantom(scatterers=((0.0, 1e-3, -2.0),))
    with pytest.raises(ValueError):
        BackgroundSpec(count=-1, x_range=(0, 1), z_range=(1e-3, 2e-3))
    with pytest.raises(ValueError):
        BackgroundSpec(count=5, x_range=(0, 1), z_range=(-1e-3, 2e-3))


def test_receive_directivity_weights_the_aperture_edges():
    geom, scheme, medium = setup()
    # a shallow scatterer seen at a steep angle from the far elements
    phantom = Phantom(scatterers=((0.0, 3e-3, 1.0),))
    data = synth_channel_data(phantom, geom, scheme, medium, fs=FS, fc=FC,
                              bandwidth=BW, n_samples=400)
    amp = np.max(np.abs(data.samples), axis=0)
    assert amp[15] > amp[0] * 1.5  # center element sees much more than the edge


def test_synthesis_requires_adequate_sampling():
    geom, scheme, medium = setup()
    with pytest.raises(ValueError, match="4"):
        synth_channel_data(Phantom(), geom, scheme, medium, fs=3 * FC, fc=FC,
                           bandwidth=BW, n_samples=100)
