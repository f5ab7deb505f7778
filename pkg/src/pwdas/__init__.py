"""Delay-and-sum beamforming for plane-wave and diverging-wave ultrasound.

Core workflow: describe the probe (:class:`ArrayGeometry`) and transmit
(:class:`TransmitScheme`), build a sparse DAS matrix for a pixel grid
(:func:`build_das_matrix`), and apply it to channel data
(:func:`beamform`). The receive f-number can be derived from element
directivity (:func:`derive_f_number`) and the speed of sound estimated
from phase dispersion (:func:`estimate_sos`).
"""

from .aperture import (ApertureConfig, aperture_mask, derive_f_number, directivity,
                       fnumber_from_angle, lambda_min, solve_angle_of_view)
from .beamformer import (BeamformedFrame, BeamformGrid, DasMatrix, MatrixProvenance,
                         beamform, build_das_matrix, compound, load_matrix,
                         matrix_provenance, save_matrix, sparsity)
from .geometry import (ArrayGeometry, GridPoint, MediumParams, TransmitScheme,
                       element_positions, hyperbola_residual, receive_distance,
                       transmit_distance, transmit_distance_circular,
                       transmit_distance_general, transmit_distance_plane,
                       travel_time, virtual_source)
from .io import Dataset, load_dataset, load_phantom, read_raw, save_dataset, write_pgm, write_raw
from .quality import Annulus, Disk, Rectangle, RegionSpec, cnr, fwhm
from .signal import ChannelData, envelope, iq_demodulate, log_compress
from .simulator import BackgroundSpec, Phantom, synth_channel_data, synth_iq
from .soundspeed import (HyperbolaSamples, SosEstimate, estimate_sos,
                         hyperbola_samples, qp_metric)

__version__ = "0.1.0"

__all__ = [
    "ApertureConfig", "ArrayGeometry", "Annulus", "BackgroundSpec",
    "BeamformGrid", "BeamformedFrame", "ChannelData", "DasMatrix", "Dataset",
    "Disk", "GridPoint", "HyperbolaSamples", "MatrixProvenance", "MediumParams",
    "Phantom", "Rectangle", "RegionSpec", "SosEstimate", "TransmitScheme",
    "aperture_mask", "beamform", "build_das_matrix", "cnr", "compound",
    "derive_f_number", "directivity", "element_positions", "envelope",
    "estimate_sos", "fnumber_from_angle", "fwhm", "hyperbola_residual",
    "hyperbola_samples", "iq_demodulate", "lambda_min", "load_dataset",
    "load_matrix", "load_phantom", "log_compress", "matrix_provenance",
    "qp_metric", "read_raw", "receive_distance", "save_dataset", "save_matrix",
    "solve_angle_of_view", "sparsity", "synth_channel_data", "synth_iq",
    "transmit_distance", "transmit_distance_circular", "transmit_distance_general",
    "transmit_distance_plane", "travel_time", "virtual_source", "write_pgm",
    "write_raw",
]
