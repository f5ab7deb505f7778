"""Optional adapter for the public PICMUS challenge HDF5 files.

Converts one plane-wave transmit of a PICMUS acquisition into the
in-memory types of this package. Requires h5py; nothing in the core
library or tests depends on this module or on the external dataset.
"""

from __future__ import annotations

import numpy as np

from .geometry import ArrayGeometry, TransmitScheme
from .io import Dataset
from .signal import ChannelData

# L11-4v probe used by the challenge; element width is not stored in the files
_PICMUS_ELEMENT_WIDTH = 0.27e-3


def load_picmus(path, transmit_index: int | None = None,
                element_width: float = _PICMUS_ELEMENT_WIDTH) -> Dataset:
    """Load one transmit of a PICMUS HDF5 acquisition as a Dataset.

    ``transmit_index`` selects the plane wave (default: the middle one,
    i.e. the unsteered transmit of a symmetric sweep).
    """
    import h5py

    with h5py.File(path, "r") as fh:
        group = fh["US"]["US_DATASET0000"]
        angles = np.asarray(group["angles"])
        fs = float(np.asarray(group["sampling_frequency"]).reshape(-1)[0])
        fc = float(np.asarray(group["modulation_frequency"]).reshape(-1)[0])
        c0 = float(np.asarray(group["sound_speed"]).reshape(-1)[0])
        t0 = float(np.asarray(group["initial_time"]).reshape(-1)[0])
        probe = np.asarray(group["probe_geometry"])
        real = np.asarray(group["data"]["real"])
        imag = np.asarray(group["data"]["imag"])

    if transmit_index is None:
        transmit_index = len(angles) // 2
    # stored as (transmits, elements, samples)
    samples = (real[transmit_index] + 1j * imag[transmit_index]).T
    is_iq = np.any(imag[transmit_index] != 0)
    if not is_iq:
        samples = samples.real

    xs = probe[0] if probe.shape[0] in (2, 3) else probe[:, 0]
    pitch = float(np.mean(np.diff(np.sort(xs))))
    geometry = ArrayGeometry(num_elements=samples.shape[1], pitch=pitch,
                             element_width=element_width)
    scheme = TransmitScheme(kind="plane", tilt=float(angles[transmit_index]), t0=t0)
    if fc <= 0:  # RF files store modulation_frequency = 0
        fc = 5.208e6
    channel_data = ChannelData(samples=samples, kind="iq" if is_iq else "rf",
                               fs=fs, fc=fc, bandwidth=0.67 * fc)
    return Dataset(channel_data=channel_data, geometry=geometry, scheme=scheme,
                   c0_nominal=c0, metadata={"source": "picmus",
                                            "transmit_index": int(transmit_index)})
