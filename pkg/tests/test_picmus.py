import numpy as np
import pytest

h5py = pytest.importorskip("h5py")

from pwdas.picmus import load_picmus


def write_picmus_like(path, n_angles=3, n_elements=16, n_samples=64, iq=True):
    rng = np.random.default_rng(1)
    real = rng.standard_normal((n_angles, n_elements, n_samples)).astype(np.float32)
    imag = rng.standard_normal((n_angles, n_elements, n_samples)).astype(np.float32)
    if not iq:
        imag = np.zeros_like(imag)
    angles = np.linspace(-0.05, 0.05, n_angles)
    xs = (np.arange(n_elements) - (n_elements - 1) / 2) * 0.3e-3
    probe = np.stack([xs, np.zeros_like(xs), np.zeros_like(xs)])
    with h5py.File(path, "w") as fh:
        group = fh.create_group("US").create_group("US_DATASET0000")
        group["angles"] = angles
        group["sampling_frequency"] = np.array([20.832e6])
        group["modulation_frequency"] = np.array([5.208e6 if iq else 0.0])
        group["sound_speed"] = np.array([1540.0])
        group["initial_time"] = np.array([0.0])
        group["probe_geometry"] = probe
        data = group.create_group("data")
        data["real"] = real
        data["imag"] = imag
    return real, imag, angles


def test_load_picmus_iq_layout(tmp_path):
    path = tmp_path / "picmus_iq.hdf5"
    real, imag, angles = write_picmus_like(path, iq=True)
    ds = load_picmus(path)
    data = ds.channel_data
    assert data.kind == "iq"
    assert data.samples.shape == (64, 16)
    # middle transmit by default, transposed to (samples, elements)
    np.testing.assert_allclose(data.samples.real, real[1].T)
    np.testing.assert_allclose(data.samples.imag, imag[1].T)
    assert ds.scheme.kind == "plane"
    assert ds.scheme.tilt == pytest.approx(angles[1])
    assert ds.geometry.num_elements == 16
    assert ds.geometry.pitch == pytest.approx(0.3e-3)
    assert ds.c0_nominal == 1540.0
    assert data.fc == pytest.approx(5.208e6)

    first = load_picmus(path, transmit_index=0)
    assert first.scheme.tilt == pytest.approx(angles[0])
    np.testing.assert_allclose(first.channel_data.samples.real, real[0].T)


def test_load_picmus_rf_layout(tmp_path):
    path = tmp_path / "picmus_rf.hdf5"
    write_picmus_like(path, iq=False)
    ds = load_picmus(path)
    assert ds.channel_data.kind == "rf"
    assert not np.iscomplexobj(ds.channel_data.samples)
    # RF files store modulation_frequency = 0; a usable fc is substituted
    assert ds.channel_data.fc > 0
