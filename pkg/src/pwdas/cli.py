"""Command-line interface: beamform, fnumber, sos, simulate, metrics.

Angles on the command line are in degrees and converted to radians at
this boundary only; everything else is SI (meters, seconds, Hz). Every
failure exits nonzero with a single ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import io
from .aperture import (ApertureConfig, derive_f_number, fnumber_from_angle,
                       lambda_min, solve_angle_of_view)
from .beamformer import (BeamformGrid, beamform, build_das_matrix, compound,
                         load_matrix, matrix_provenance, save_matrix)
from .geometry import GridPoint, MediumParams
from .quality import Annulus, Disk, RegionSpec, cnr, fwhm
from .signal import ChannelData, iq_demodulate, log_compress
from .simulator import synth_channel_data
from .soundspeed import DEFAULT_BOUNDS, estimate_sos


def _parse_grid(text: str, default_counts: int | None = None) -> BeamformGrid:
    parts = [p for p in text.split(",") if p]
    if len(parts) == 4 and default_counts is not None:
        parts += [str(default_counts), str(default_counts)]
    if len(parts) != 6:
        raise ValueError(f"--grid needs X0,X1,Z0,Z1,NX,NZ, got {text!r}")
    x0, x1, z0, z1 = (float(p) for p in parts[:4])
    nx, nz = int(parts[4]), int(parts[5])
    return BeamformGrid.from_bounds(x0, x1, z0, z1, nx=nx, nz=nz)


def _resolve_f_number(value: str, dataset, c: float) -> float:
    if value != "auto":
        return float(value)
    data = dataset.channel_data
    return derive_f_number(dataset.geometry.element_width, data.fc,
                           data.bandwidth, c)


def _load_iq(path):
    dataset = io.load_dataset(path)
    if dataset.channel_data.kind == "rf":
        dataset.channel_data = iq_demodulate(dataset.channel_data)
    return dataset


def cmd_beamform(args) -> int:
    dataset = _load_iq(args.infile)
    data = dataset.channel_data
    grid = _parse_grid(args.grid)
    c = args.c if args.c is not None else dataset.c0_nominal
    f_number = _resolve_f_number(args.fnumber, dataset, c)
    aperture = ApertureConfig(f_number=f_number)

    wanted = matrix_provenance(grid, dataset.geometry, dataset.scheme,
                               MediumParams(c), fs=data.fs, fc=data.fc,
                               n_samples=data.n_samples, is_iq=True,
                               aperture=aperture, interp=args.interp)
    matrix = None
    if args.matrix_cache and os.path.exists(args.matrix_cache):
        cached = load_matrix(args.matrix_cache)
        if cached.provenance == wanted:
            matrix = cached
    if matrix is None:
        matrix = build_das_matrix(grid, dataset.geometry, dataset.scheme,
                                  MediumParams(c), fs=data.fs, fc=data.fc,
                                  n_samples=data.n_samples, is_iq=True,
                                  aperture=aperture, interp=args.interp)
        if args.matrix_cache:
            save_matrix(matrix, args.matrix_cache)
    if matrix.empty:
        print("warning=das matrix is empty (grid or start time mismatch?)")

    result = beamform(matrix, data)
    if isinstance(result, list):
        frame = compound(result) if args.compound else result[0]
    else:
        frame = result
    image = log_compress(np.abs(frame.image), args.dr)
    io.write_pgm(args.out, image)
    if args.raw:
        io.write_raw(args.raw, frame, grid)
    print(f"out={args.out}")
    print(f"fnumber={f_number:.6g}")
    print(f"c={c:.6g}")
    return 0


def cmd_fnumber(args) -> int:
    lam = lambda_min(args.c, args.fc, args.bw)
    steer = float(np.deg2rad(args.steer))
    alpha = solve_angle_of_view(args.width / lam, args.thresh, steer)
    print(f"lambda_min={lam:.6g}")
    print(f"alpha_deg={np.rad2deg(alpha):.6g}")
    print(f"fnumber={fnumber_from_angle(alpha):.6g}")
    return 0


def cmd_sos(args) -> int:
    dataset = _load_iq(args.infile)
    data = dataset.channel_data
    grid = _parse_grid(args.grid, default_counts=128)
    bounds = tuple(float(b) for b in args.bounds.split(","))
    if len(bounds) != 2:
        raise ValueError(f"--bounds needs LO,HI, got {args.bounds!r}")
    f_number = _resolve_f_number(args.fnumber, dataset, dataset.c0_nominal)
    estimate = estimate_sos(data, grid, dataset.geometry, dataset.scheme,
                            ApertureConfig(f_number=f_number),
                            c0=dataset.c0_nominal, bounds=bounds)
    print(f"c_hat={estimate.c_hat}")
    if estimate.hit_bound:
        print("warning=estimate within tolerance of a search bound")
    if args.curve:
        with open(args.curve, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["c_m_per_s", "Qp"])
            for c, qp in estimate.qp_curve:
                writer.writerow([f"{c:.6f}", f"{qp:.10g}"])
        print(f"curve={args.curve}")
    return 0


def cmd_simulate(args) -> int:
    config = io.load_phantom(args.phantom)
    medium = MediumParams(config.c)
    frames = []
    for f in range(config.frames):
        data = synth_channel_data(
            config.phantom, config.geometry, config.scheme, medium,
            fs=config.fs, fc=config.fc, bandwidth=config.bandwidth,
            n_samples=config.n_s, seed=config.seed + f,
            noise_snr_db=config.noise_snr_db)
        frames.append(data.samples)
    samples = frames[0] if config.frames == 1 else np.stack(frames, axis=2)
    channel_data = ChannelData(samples=samples, kind="rf", fs=config.fs,
                               fc=config.fc, bandwidth=config.bandwidth)
    io.save_dataset(args.out, io.Dataset(
        channel_data=channel_data, geometry=config.geometry,
        scheme=config.scheme, c0_nominal=config.c))
    print(f"out={args.out}")
    print(f"n_scatterers={len(config.phantom.all_scatterers())}")
    return 0


def cmd_metrics(args) -> int:
    frame, grid = io.read_raw(args.infile)
    rows = []
    with open(args.targets, newline="") as fh:
        for i, target in enumerate(csv.DictReader(fh)):
            kind = target["kind"].strip()
            x, z = float(target["x_m"]), float(target["z_m"])
            radius = float(target["radius_m"])
            row = {"target": i, "kind": kind, "x_m": f"{x:.6g}", "z_m": f"{z:.6g}",
                   "cnr": "nan", "fwhm_lateral_m": "nan", "fwhm_axial_m": "nan"}
            try:
                if kind == "cyst":
                    region = RegionSpec(
                        interior=Disk((x, z), 0.8 * radius),
                        exterior=Annulus((x, z), 1.2 * radius, 2.0 * radius))
                    row["cnr"] = f"{cnr(frame, grid, region):.6g}"
                elif kind == "wire":
                    point = GridPoint(x=x, z=z)
                    row["fwhm_lateral_m"] = (
                        f"{fwhm(frame, grid, point, 'lateral', radius):.6g}")
                    row["fwhm_axial_m"] = (
                        f"{fwhm(frame, grid, point, 'axial', radius):.6g}")
                else:
                    raise ValueError(f"unknown target kind {kind!r}")
            except ValueError as exc:
                row["note"] = str(exc)
            rows.append(row)
    fieldnames = ["target", "kind", "x_m", "z_m", "cnr",
                  "fwhm_lateral_m", "fwhm_axial_m", "note"]
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, restval="")
        writer.writeheader()
        writer.writerows(rows)
    print(f"out={args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwdas",
        description="Delay-and-sum beamforming for plane/diverging-wave ultrasound")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("beamform", help="beamform a dataset into a B-mode PGM image")
    p.add_argument("--in", dest="infile", required=True, help="dataset container")
    p.add_argument("--grid", required=True, help="X0,X1,Z0,Z1,NX,NZ in meters")
    p.add_argument("--c", type=float, default=None,
                   help="speed of sound in m/s (default: dataset c0_nominal)")
    p.add_argument("--fnumber", default="auto",
                   help="receive f-number, or 'auto' for the directivity-derived value")
    p.add_argument("--out", required=True, help="output PGM path")
    p.add_argument("--dr", type=float, default=40.0, help="dynamic range in dB")
    p.add_argument("--raw", default=None, help="also write raw complex values here")
    p.add_argument("--compound", action="store_true",
                   help="coherently average all frames (default: first frame only)")
    p.add_argument("--interp", choices=("linear", "nearest"), default="linear")
    p.add_argument("--matrix-cache", default=None,
                   help="reuse/store the DAS matrix at this path")
    p.set_defaults(func=cmd_beamform)

    p = sub.add_parser("fnumber", help="directivity-derived receive f-number")
    p.add_argument("--width", type=float, required=True, help="element width in m")
    p.add_argument("--fc", type=float, required=True, help="center frequency in Hz")
    p.add_argument("--bw", type=float, required=True, help="bandwidth in Hz")
    p.add_argument("--c", type=float, required=True, help="speed of sound in m/s")
    p.add_argument("--steer", type=float, default=0.0,
                   help="receive steering angle in degrees")
    p.add_argument("--thresh", type=float, default=0.71,
                   help="directivity threshold in (0, 1]")
    p.set_defaults(func=cmd_fnumber)

    p = sub.add_parser("sos", help="estimate the speed of sound from a dataset")
    p.add_argument("--in", dest="infile", required=True, help="dataset container")
    p.add_argument("--grid", required=True,
                   help="X0,X1,Z0,Z1[,NX,NZ] in meters (counts default to 128)")
    p.add_argument("--bounds", default=f"{DEFAULT_BOUNDS[0]:g},{DEFAULT_BOUNDS[1]:g}",
                   help="search bounds LO,HI in m/s")
    p.add_argument("--fnumber", default="auto")
    p.add_argument("--curve", default=None, help="write the (c, Qp) sweep as CSV")
    p.set_defaults(func=cmd_sos)

    p = sub.add_parser("simulate", help="synthesize a dataset from a phantom file")
    p.add_argument("--phantom", required=True, help="phantom description JSON")
    p.add_argument("--out", required=True, help="output dataset container")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="CNR/FWHM table from a raw beamformed file")
    p.add_argument("--in", dest="infile", required=True,
                   help="raw complex file written by beamform --raw")
    p.add_argument("--targets", required=True,
                   help="CSV with columns kind,x_m,z_m,radius_m")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # single-line, machine-parsable failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
