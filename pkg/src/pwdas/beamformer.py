"""Sparse-matrix delay-and-sum beamforming.

Beamforming a fixed acquisition sequence onto a fixed pixel grid is a
linear map, so it is built once as a sparse matrix (interpolation
weights, phase rotators for I/Q data, and the aperture gating of a
positive f-number) and applied as a sparse matrix-vector product. Channel
data are flattened element-major: all fast-time samples of element 0
first, then element 1, and so on.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import sparse

from .aperture import ApertureConfig
from .geometry import (ArrayGeometry, MediumParams, TransmitScheme,
                       element_positions, transmit_distance)
from .signal import ChannelData

INTERP_ORDERS = {"nearest": 1, "linear": 2}

_CACHE_MAGIC = b"PWDASMX1"
_CACHE_VERSION = 1


@dataclass(frozen=True)
class BeamformGrid:
    """Pixel grid the channel data are beamformed onto.

    Points are stored as flat coordinate arrays ordered column-major over
    (z, x): depth varies fastest, so ``values.reshape(shape, order='F')``
    recovers the (nz, nx) image.
    """

    x: np.ndarray
    z: np.ndarray
    shape: tuple[int, int]

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        z = np.ascontiguousarray(self.z, dtype=np.float64)
        if x.ndim != 1 or z.ndim != 1 or x.size != z.size:
            raise ValueError("x and z must be 1-D arrays of equal length")
        if x.size < 1:
            raise ValueError("grid must contain at least one point")
        if not np.all(z > 0):
            raise ValueError("all grid depths must be positive")
        nz, nx = self.shape
        if nz * nx != x.size:
            raise ValueError(f"shape {self.shape} does not match {x.size} points")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "shape", (int(nz), int(nx)))

    @classmethod
    def from_bounds(cls, x_min: float, x_max: float, z_min: float, z_max: float,
                    nx: int, nz: int) -> "BeamformGrid":
        """Regular grid over [x_min, x_max] x [z_min, z_max]."""
        xs = np.linspace(x_min, x_max, nx)
        zs = np.linspace(z_min, z_max, nz)
        return cls(x=np.repeat(xs, nz), z=np.tile(zs, nx), shape=(nz, nx))

    @property
    def num_points(self) -> int:
        return self.x.size

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.shape, dtype=np.int64).tobytes())
        h.update(self.x.tobytes())
        h.update(self.z.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class MatrixProvenance:
    """Everything that determines a DAS matrix, for validation and caching."""

    grid_digest: str
    grid_shape: tuple[int, int]
    num_points: int
    num_elements: int
    pitch: float
    element_width: float
    scheme_kind: str
    tilt: float
    width: float | None
    source: tuple[float, float] | None
    t0: float
    speed_of_sound: float
    fs: float
    fc: float
    n_samples: int
    f_number: float
    interp: str
    is_iq: bool

    def digest(self) -> str:
        doc = asdict(self)
        return hashlib.sha256(
            json.dumps(doc, sort_keys=True).encode()
        ).hexdigest()

    def diff(self, other: "MatrixProvenance") -> list[str]:
        """Human-readable list of fields on which two provenances differ."""
        mine, theirs = asdict(self), asdict(other)
        return [f"{k}: {mine[k]!r} != {theirs[k]!r}"
                for k in mine if mine[k] != theirs[k]]


@dataclass
class DasMatrix:
    """Sparse map from flattened channel samples to beamformed grid values."""

    weights: sparse.csr_matrix
    provenance: MatrixProvenance
    empty: bool = field(default=False)

    @property
    def nnz(self) -> int:
        return self.weights.nnz

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape

    @property
    def interp_order(self) -> int:
        return INTERP_ORDERS[self.provenance.interp]


@dataclass(frozen=True)
class BeamformedFrame:
    """Beamformed complex values aligned with their grid ordering."""

    values: np.ndarray
    provenance: MatrixProvenance

    @property
    def image(self) -> np.ndarray:
        """Values reshaped to (nz, nx)."""
        return self.values.reshape(self.provenance.grid_shape, order="F")


def matrix_provenance(grid: BeamformGrid, geom: ArrayGeometry,
                      scheme: TransmitScheme, medium: MediumParams, fs: float,
                      fc: float, n_samples: int, is_iq: bool,
                      aperture: ApertureConfig | None = None,
                      interp: str = "linear") -> MatrixProvenance:
    """Provenance a matrix built from these inputs would carry."""
    if aperture is None:
        aperture = ApertureConfig(f_number=0.0)
    return MatrixProvenance(
        grid_digest=grid.digest(),
        grid_shape=grid.shape,
        num_points=grid.num_points,
        num_elements=geom.num_elements,
        pitch=geom.pitch,
        element_width=geom.element_width,
        scheme_kind=scheme.kind,
        tilt=scheme.tilt,
        width=scheme.width,
        source=scheme.virtual_source,
        t0=scheme.t0,
        speed_of_sound=medium.speed_of_sound,
        fs=fs,
        fc=fc,
        n_samples=n_samples,
        f_number=aperture.f_number,
        interp=interp,
        is_iq=is_iq,
    )


def build_das_matrix(grid: BeamformGrid, geom: ArrayGeometry, scheme: TransmitScheme,
                     medium: MediumParams, fs: float, fc: float, n_samples: int,
                     is_iq: bool, aperture: ApertureConfig | None = None,
                     interp: str = "linear") -> DasMatrix:
    """Build the sparse delay-and-sum matrix for one transmit and grid.

    For every grid point and every element inside its receive aperture,
    the two-way travel time is mapped to a fractional fast-time index
    u = tau * fs + 1 (1-based). Indices inside [1, n_samples - 1] emit
    interpolation entries (a single unit weight for 'nearest', the two
    straddling-sample weights for 'linear'); anything outside is silently
    dropped, and for I/Q data every weight is rotated by
    exp(+i 2 pi fc tau) to restore the carrier phase of the delayed
    baseband samples. Identical inputs produce bit-identical matrices.

    A matrix with no entries at all (a grid/start-time mismatch, usually)
    is returned with its ``empty`` flag set rather than raising.
    """
    if interp not in INTERP_ORDERS:
        raise ValueError(f"interp must be one of {sorted(INTERP_ORDERS)}, got {interp!r}")
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    if aperture is None:
        aperture = ApertureConfig(f_number=0.0)

    xs, zs = grid.x, grid.z
    c = medium.speed_of_sound
    d_tx = np.asarray(transmit_distance(xs, zs, scheme, geom), dtype=np.float64)
    elem_x = element_positions(geom)[:, 0]
    f_number = aperture.f_number

    rows_parts: list[np.ndarray] = []
    cols_parts: list[np.ndarray] = []
    weight_parts: list[np.ndarray] = []

    point_index = np.arange(grid.num_points, dtype=np.int64)
    for i, ex in enumerate(elem_x):
        tau = (d_tx + np.hypot(xs - ex, zs)) / c - scheme.t0
        u = tau * fs  # 0-based fractional index; 1-based window [1, n_s-1]
        keep = (u >= 0.0) & (u <= n_samples - 2)
        if f_number > 0:
            keep &= np.abs(xs - ex) <= zs / (2.0 * f_number)
        if not keep.any():
            continue
        rows = point_index[keep]
        u_k = u[keep]
        if is_iq:
            rotator = np.exp(2j * np.pi * fc * tau[keep])
        if interp == "nearest":
            cols = np.floor(u_k + 0.5).astype(np.int64) + i * n_samples
            w = rotator if is_iq else np.ones(u_k.size)
            rows_parts.append(rows)
            cols_parts.append(cols)
            weight_parts.append(np.asarray(w))
        else:
            lower = np.floor(u_k).astype(np.int64)
            frac = u_k - lower
            for offset, w in ((0, 1.0 - frac), (1, frac)):
                nz = w != 0.0
                if not nz.any():
                    continue
                wv = w[nz] * rotator[nz] if is_iq else w[nz]
                rows_parts.append(rows[nz])
                cols_parts.append(lower[nz] + offset + i * n_samples)
                weight_parts.append(wv)

    shape = (grid.num_points, n_samples * geom.num_elements)
    dtype = np.complex128 if is_iq else np.float64
    if rows_parts:
        rows = np.concatenate(rows_parts)
        cols = np.concatenate(cols_parts)
        weights = np.concatenate(weight_parts).astype(dtype)
        matrix = sparse.coo_matrix((weights, (rows, cols)), shape=shape).tocsr()
        matrix.sum_duplicates()
        matrix.sort_indices()
    else:
        matrix = sparse.csr_matrix(shape, dtype=dtype)

    provenance = matrix_provenance(grid, geom, scheme, medium, fs, fc, n_samples,
                                   is_iq, aperture, interp)
    return DasMatrix(weights=matrix, provenance=provenance, empty=matrix.nnz == 0)


def flatten_channels(samples: np.ndarray) -> np.ndarray:
    """Stack channel samples element-major: (n_s, N_e[, F]) -> (n_s*N_e[, F])."""
    if samples.ndim == 2:
        return samples.reshape(-1, order="F")
    n_s, n_e, n_f = samples.shape
    return samples.reshape(n_s * n_e, n_f, order="F")


def beamform(matrix: DasMatrix, data: ChannelData):
    """Apply a DAS matrix to channel data.

    Returns one :class:`BeamformedFrame` for 2-D input; 3-D (multi-frame)
    input is beamformed as a single matrix product against the stacked
    frames and returned as a list of frames.
    """
    prov = matrix.provenance
    problems = []
    if data.n_samples != prov.n_samples:
        problems.append(f"n_samples {data.n_samples} != {prov.n_samples}")
    if data.num_elements != prov.num_elements:
        problems.append(f"num_elements {data.num_elements} != {prov.num_elements}")
    if (data.kind == "iq") != prov.is_iq:
        problems.append(f"kind {data.kind!r} does not match matrix built for "
                        f"{'iq' if prov.is_iq else 'rf'}")
    if problems:
        raise ValueError("channel data does not match matrix provenance: "
                         + "; ".join(problems))
    stacked = flatten_channels(data.samples)
    out = matrix.weights @ stacked
    if out.ndim == 1:
        return BeamformedFrame(values=out, provenance=prov)
    return [BeamformedFrame(values=out[:, j], provenance=prov)
            for j in range(out.shape[1])]


# transmit parameters may differ between coherently compounded frames;
# everything else (grid, probe, sampling, aperture) must match
_TRANSMIT_FIELDS = {"scheme_kind", "tilt", "width", "source", "t0"}


def compound(frames) -> BeamformedFrame:
    """Coherent compounding: complex mean of frames sharing one grid."""
    frames = list(frames)
    if not frames:
        raise ValueError("cannot compound an empty list of frames")
    first = frames[0].provenance
    for f in frames[1:]:
        clashes = [d for d in first.diff(f.provenance)
                   if d.split(":", 1)[0] not in _TRANSMIT_FIELDS]
        if clashes:
            raise ValueError("frames do not share grid provenance: "
                             + "; ".join(clashes))
    values = np.mean([f.values for f in frames], axis=0)
    return BeamformedFrame(values=values, provenance=first)


def sparsity(matrix: DasMatrix) -> float:
    """Fraction of zero entries, 1 - nnz / (rows * cols)."""
    rows, cols = matrix.shape
    return 1.0 - matrix.nnz / (rows * cols)


def save_matrix(matrix: DasMatrix, path) -> None:
    """Write a DAS matrix to a provenance-keyed binary cache file.

    Layout (all integers little-endian):

    ========  =====================================================
    8 bytes   magic ``PWDASMX1``
    u32       format version (1)
    32 bytes  SHA-256 digest of the provenance document
    u32       flags (bit 0: complex weights, bit 1: empty warning)
    u64 x3    rows, cols, nnz
    u64 + n   length-prefixed provenance JSON (UTF-8)
    nnz i64   row indices
    nnz i64   column indices
    nnz f64/c128  weights
    ========  =====================================================
    """
    csr = matrix.weights
    is_complex = np.iscomplexobj(csr.data)
    rows = np.repeat(np.arange(csr.shape[0], dtype=np.int64),
                     np.diff(csr.indptr))
    cols = csr.indices.astype(np.int64)
    data = csr.data.astype(np.complex128 if is_complex else np.float64)
    prov_json = json.dumps(asdict(matrix.provenance), sort_keys=True).encode()
    flags = (1 if is_complex else 0) | (2 if matrix.empty else 0)
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<I", _CACHE_VERSION))
        fh.write(bytes.fromhex(matrix.provenance.digest()))
        fh.write(struct.pack("<I", flags))
        fh.write(struct.pack("<QQQ", csr.shape[0], csr.shape[1], csr.nnz))
        fh.write(struct.pack("<Q", len(prov_json)))
        fh.write(prov_json)
        fh.write(rows.astype("<i8").tobytes())
        fh.write(cols.astype("<i8").tobytes())
        fh.write(data.astype("<c16" if is_complex else "<f8").tobytes())


def load_matrix(path) -> DasMatrix:
    """Read a DAS matrix cache file written by :func:`save_matrix`."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise ValueError(f"not a DAS matrix cache file (magic {magic!r})")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _CACHE_VERSION:
            raise ValueError(f"unsupported cache version {version}")
        stored_digest = fh.read(32).hex()
        (flags,) = struct.unpack("<I", fh.read(4))
        nrows, ncols, nnz = struct.unpack("<QQQ", fh.read(24))
        (prov_len,) = struct.unpack("<Q", fh.read(8))
        prov_doc = json.loads(fh.read(prov_len).decode())
        rows = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        cols = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        is_complex = bool(flags & 1)
        itemsize = 16 if is_complex else 8
        data = np.frombuffer(fh.read(itemsize * nnz),
                             dtype="<c16" if is_complex else "<f8")
    for key in ("grid_shape", "source"):
        if prov_doc.get(key) is not None:
            prov_doc[key] = tuple(prov_doc[key])
    provenance = MatrixProvenance(**prov_doc)
    if provenance.digest() != stored_digest:
        raise ValueError("cache file provenance digest mismatch (corrupt file?)")
    matrix = sparse.coo_matrix((data, (rows, cols)), shape=(nrows, ncols)).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()
    return DasMatrix(weights=matrix, provenance=provenance, empty=bool(flags & 2))
