"""Multiscale fusion of seismic geometric attributes.

Build a Gaussian pyramid of a seismic section or volume, compute a
geometric attribute (phase dip, dip angle, or most-positive/most-negative
curvature) at every scale, resize each coarse map back to full
resolution, and fuse the stack into a single noise-robust map.

Typical use::

    from pyrafuse import multiscale_attribute, AttributeKind
    fused = multiscale_attribute(section, AttributeKind.PHASE_DIP, scales=4)
"""

from __future__ import annotations

from .analytic import (
    AnalyticSection,
    Axis,
    analytic_section,
    guard_mask,
    hilbert_trace,
    phase_derivative,
)
from .attributes import (
    AttributeStack,
    CurvaturePair,
    DipField,
    attribute_stack,
    curvature,
    dip_angle,
    dip_slice_fields,
    dip_stack,
    phase_dip,
    worker_count,
)
from .errors import (
    BoundsError,
    ConfigError,
    FormatError,
    ParameterError,
    PyrafuseError,
    ShapeError,
    SizeError,
    UnsupportedFormatError,
)
from .fusion import (
    FusionMethod,
    FusionSpec,
    default_weights,
    fuse,
    multiscale_attribute,
)
from .grid import (
    AttributeKind,
    AttributeMap,
    Grid2,
    SeismicSection,
    SeismicVolume,
    Units,
    reassemble_volume,
)
from .gridio import describe_grid, export_pgm, parse_header, read_grid, write_grid
from .pyramid import (
    GaussianKernel,
    Pyramid,
    build_pyramid,
    expand_to,
    gaussian_samples,
    make_kernel,
    max_scales,
    reduce_grid,
)
from .segy import SegyImportOptions, decode_ibm32, encode_ibm32, read_segy
from .synth import (
    Fault,
    GroundTruth,
    NoiseDemoReport,
    PlaneEvent,
    QuadraticEvent,
    SynthSpec,
    derivative_noise_demo,
    make_synthetic,
    parse_synth_spec,
    ricker,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticSection",
    "AttributeKind",
    "AttributeMap",
    "AttributeStack",
    "Axis",
    "BoundsError",
    "ConfigError",
    "CurvaturePair",
    "DipField",
    "Fault",
    "FormatError",
    "FusionMethod",
    "FusionSpec",
    "GaussianKernel",
    "GroundTruth",
    "Grid2",
    "NoiseDemoReport",
    "ParameterError",
    "PlaneEvent",
    "Pyramid",
    "PyrafuseError",
    "QuadraticEvent",
    "SegyImportOptions",
    "SeismicSection",
    "SeismicVolume",
    "ShapeError",
    "SizeError",
    "SynthSpec",
    "Units",
    "UnsupportedFormatError",
    "analytic_section",
    "attribute_stack",
    "build_pyramid",
    "curvature",
    "decode_ibm32",
    "default_weights",
    "derivative_noise_demo",
    "describe_grid",
    "dip_angle",
    "dip_slice_fields",
    "dip_stack",
    "encode_ibm32",
    "expand_to",
    "export_pgm",
    "fuse",
    "gaussian_samples",
    "guard_mask",
    "hilbert_trace",
    "make_kernel",
    "make_synthetic",
    "max_scales",
    "multiscale_attribute",
    "parse_synth_spec",
    "phase_derivative",
    "phase_dip",
    "parse_header",
    "read_grid",
    "read_segy",
    "reassemble_volume",
    "reduce_grid",
    "ricker",
    "worker_count",
    "write_grid",
]
