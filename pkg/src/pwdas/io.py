"""Dataset container, phantom description and image/raw output files.

The dataset container is a single binary file: an 8-byte magic, a
length-prefixed UTF-8 JSON metadata document (schema versioned), then the
sample payload as raw little-endian float32. Payload ordering is
channel-major within each frame: all fast-time samples of element 0
first, then element 1, and so on; I/Q data interleave I and Q per sample.
Unknown metadata keys survive a load/save round trip untouched.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .beamformer import BeamformedFrame, BeamformGrid, MatrixProvenance
from .geometry import ArrayGeometry, TransmitScheme
from .signal import ChannelData
from .simulator import BackgroundSpec, Phantom

_DATASET_MAGIC = b"PWDASDS1"
SCHEMA_VERSION = 1

_REQUIRED_FIELDS = {
    "schema_version": int,
    "fs": (int, float),
    "fc": (int, float),
    "bandwidth": (int, float),
    "kind": str,
    "n_s": int,
    "n_e": int,
    "frames": int,
    "pitch": (int, float),
    "element_width": (int, float),
    "t0": (int, float),
    "transmit": dict,
    "c0_nominal": (int, float),
}


@dataclass
class Dataset:
    """A loaded dataset: channel data plus acquisition description."""

    channel_data: ChannelData
    geometry: ArrayGeometry
    scheme: TransmitScheme
    c0_nominal: float
    metadata: dict = field(default_factory=dict)


def _require(metadata: dict, key: str, types) -> object:
    if key not in metadata:
        raise ValueError(f"metadata field '{key}' missing")
    value = metadata[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise ValueError(f"metadata field '{key}' has invalid type "
                         f"{type(value).__name__}")
    return value


def _scheme_from_metadata(transmit: dict, t0: float) -> TransmitScheme:
    kind = _require(transmit, "kind", str)
    if kind not in ("plane", "circular", "focused"):
        raise ValueError(f"metadata field 'transmit.kind' must be plane, circular "
                         f"or focused, got {kind!r}")
    tilt = np.deg2rad(float(transmit.get("tilt_deg", 0.0)))
    width = None
    if transmit.get("beta_deg") is not None:
        width = float(np.deg2rad(float(transmit["beta_deg"])))
    source = None
    if transmit.get("source_x_m") is not None or transmit.get("source_z_m") is not None:
        source = (float(_require(transmit, "source_x_m", (int, float))),
                  float(_require(transmit, "source_z_m", (int, float))))
    return TransmitScheme(kind=kind, tilt=float(tilt), width=width,
                          virtual_source=source, t0=float(t0))


def _metadata_from_scheme(scheme: TransmitScheme) -> dict:
    transmit = {"kind": scheme.kind, "tilt_deg": float(np.rad2deg(scheme.tilt))}
    if scheme.width is not None:
        transmit["beta_deg"] = float(np.rad2deg(scheme.width))
    if scheme.virtual_source is not None:
        transmit["source_x_m"] = float(scheme.virtual_source[0])
        transmit["source_z_m"] = float(scheme.virtual_source[1])
    return transmit


def save_dataset(path, dataset: Dataset) -> None:
    """Write a dataset container file."""
    data = dataset.channel_data
    metadata = dict(dataset.metadata)
    metadata.update({
        "schema_version": SCHEMA_VERSION,
        "fs": data.fs,
        "fc": data.fc,
        "bandwidth": data.bandwidth,
        "kind": data.kind,
        "n_s": data.n_samples,
        "n_e": data.num_elements,
        "frames": data.num_frames,
        "pitch": dataset.geometry.pitch,
        "element_width": dataset.geometry.element_width,
        "t0": dataset.scheme.t0,
        "transmit": _metadata_from_scheme(dataset.scheme),
        "c0_nominal": dataset.c0_nominal,
    })
    samples = data.samples
    if samples.ndim == 2:
        samples = samples[:, :, None]
    # (n_s, n_e, F) -> frame-major, channel-major payload
    stacked = np.ascontiguousarray(samples.transpose(2, 1, 0))
    if data.kind == "iq":
        payload = np.empty(stacked.shape + (2,), dtype="<f4")
        payload[..., 0] = stacked.real
        payload[..., 1] = stacked.imag
    else:
        payload = stacked.real.astype("<f4")
    doc = json.dumps(metadata, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_DATASET_MAGIC)
        fh.write(struct.pack("<Q", len(doc)))
        fh.write(doc)
        fh.write(payload.tobytes())


def load_dataset(path) -> Dataset:
    """Read a dataset container file written by :func:`save_dataset`."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _DATASET_MAGIC:
            raise ValueError(f"not a dataset container (magic {magic!r})")
        (doc_len,) = struct.unpack("<Q", fh.read(8))
        metadata = json.loads(fh.read(doc_len).decode())
        raw = fh.read()

    for key, types in _REQUIRED_FIELDS.items():
        _require(metadata, key, types)
    if metadata["schema_version"] != SCHEMA_VERSION:
        raise ValueError(f"metadata field 'schema_version' must be "
                         f"{SCHEMA_VERSION}, got {metadata['schema_version']}")
    kind = metadata["kind"]
    if kind not in ("rf", "iq"):
        raise ValueError(f"metadata field 'kind' must be 'rf' or 'iq', got {kind!r}")
    n_s, n_e, frames = metadata["n_s"], metadata["n_e"], metadata["frames"]
    per_sample = 2 if kind == "iq" else 1
    expected = 4 * n_s * n_e * frames * per_sample
    if len(raw) != expected:
        raise ValueError(f"payload size mismatch: expected {expected} bytes "
                         f"for {frames} frame(s) of ({n_s}, {n_e}) {kind} samples, "
                         f"found {len(raw)}")

    flat = np.frombuffer(raw, dtype="<f4")
    if kind == "iq":
        pairs = flat.reshape(frames, n_e, n_s, 2)
        samples = (pairs[..., 0] + 1j * pairs[..., 1]).transpose(2, 1, 0)
        samples = samples.astype(np.complex128)
    else:
        samples = flat.reshape(frames, n_e, n_s).transpose(2, 1, 0)
        samples = samples.astype(np.float64)
    if frames == 1:
        samples = samples[:, :, 0]

    geometry = ArrayGeometry(num_elements=n_e, pitch=float(metadata["pitch"]),
                             element_width=float(metadata["element_width"]))
    scheme = _scheme_from_metadata(metadata["transmit"], float(metadata["t0"]))
    channel_data = ChannelData(samples=samples, kind=kind, fs=float(metadata["fs"]),
                               fc=float(metadata["fc"]),
                               bandwidth=float(metadata["bandwidth"]))
    return Dataset(channel_data=channel_data, geometry=geometry, scheme=scheme,
                   c0_nominal=float(metadata["c0_nominal"]), metadata=metadata)


@dataclass
class SimulationConfig:
    """Parsed phantom description file: what to simulate and how."""

    phantom: Phantom
    geometry: ArrayGeometry
    scheme: TransmitScheme
    c: float
    fs: float
    fc: float
    bandwidth: float
    n_s: int
    frames: int = 1
    seed: int = 0
    noise_snr_db: float | None = None


def load_phantom(path) -> SimulationConfig:
    """Read a JSON phantom description file.

    The document carries the same acquisition metadata as a dataset
    container plus a scatterer table ([x_m, z_m, reflectivity] rows) and
    an optional diffuse background block.
    """
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("fs", "fc", "bandwidth", "n_s", "n_e", "pitch", "element_width",
                "transmit", "c0_nominal"):
        _require(doc, key, _REQUIRED_FIELDS.get(key, (int, float)))
    background = None
    bg = doc.get("background")
    if bg is not None:
        background = BackgroundSpec(
            count=int(_require(bg, "count", int)),
            x_range=(float(_require(bg, "x_min", (int, float))),
                     float(_require(bg, "x_max", (int, float)))),
            z_range=(float(_require(bg, "z_min", (int, float))),
                     float(_require(bg, "z_max", (int, float)))),
            amplitude=float(bg.get("amplitude", 1.0)),
            seed=int(bg.get("seed", 0)),
        )
    phantom = Phantom(scatterers=tuple(tuple(row) for row in doc.get("scatterers", [])),
                      background=background)
    geometry = ArrayGeometry(num_elements=int(doc["n_e"]), pitch=float(doc["pitch"]),
                             element_width=float(doc["element_width"]))
    scheme = _scheme_from_metadata(doc["transmit"], float(doc.get("t0", 0.0)))
    noise = doc.get("noise_snr_db")
    return SimulationConfig(
        phantom=phantom, geometry=geometry, scheme=scheme,
        c=float(doc["c0_nominal"]), fs=float(doc["fs"]), fc=float(doc["fc"]),
        bandwidth=float(doc["bandwidth"]), n_s=int(doc["n_s"]),
        frames=int(doc.get("frames", 1)), seed=int(doc.get("seed", 0)),
        noise_snr_db=None if noise is None else float(noise),
    )


def write_pgm(path, image01: np.ndarray) -> None:
    """Write a [0, 1] image as an 8-bit binary PGM (P5, maxval 255)."""
    img = np.asarray(image01, dtype=float)
    if img.ndim != 2:
        raise ValueError(f"PGM image must be 2-D, got shape {img.shape}")
    pixels = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    rows, cols = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode())
        fh.write(pixels.tobytes())


def write_raw(path, frame: BeamformedFrame, grid: BeamformGrid) -> None:
    """Write beamformed complex values plus a JSON sidecar.

    The binary file holds complex128 little-endian values in grid order
    (column-major, depth varying fastest); the ``<path>.json`` sidecar
    documents dtype, ordering, shape and grid coordinates so external
    tools can reshape, and carries the matrix provenance.
    """
    values = np.ascontiguousarray(frame.values, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(values.tobytes())
    nz, nx = grid.shape
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "dtype": "complex128_le",
        "ordering": "column-major (z fastest)",
        "shape": [nz, nx],
        "x_min": float(grid.x.min()), "x_max": float(grid.x.max()),
        "z_min": float(grid.z.min()), "z_max": float(grid.z.max()),
        "provenance": asdict(frame.provenance),
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_raw(path) -> tuple[BeamformedFrame, BeamformGrid]:
    """Read a raw beamformed file and its sidecar back into memory."""
    with open(str(path) + ".json") as fh:
        sidecar = json.load(fh)
    nz, nx = sidecar["shape"]
    grid = BeamformGrid.from_bounds(sidecar["x_min"], sidecar["x_max"],
                                    sidecar["z_min"], sidecar["z_max"],
                                    nx=nx, nz=nz)
    values = np.fromfile(path, dtype="<c16")
    if values.size != nz * nx:
        raise ValueError(f"raw payload has {values.size} values, "
                         f"sidecar shape {sidecar['shape']} needs {nz * nx}")
    doc = dict(sidecar["provenance"])
    for key in ("grid_shape", "source"):
        if doc.get(key) is not None:
            doc[key] = tuple(doc[key])
    provenance = MatrixProvenance(**doc)
    return BeamformedFrame(values=values.astype(np.complex128),
                           provenance=provenance), grid
