"""halfsect: star-body tomography from central half-section volumes.

Simulates the volumes of k-dimensional central half-sections of star bodies
and explicitly reconstructs the radial function from that data, including a
reduced (n-1)-dimensional section family that removes the overdeterminedness
of the full Grassmannian when k < n-1.
"""

from .bodies import (
    Ball,
    Ellipsoid,
    HarmonicBody,
    ShiftedBall,
    SphericalFunction,
    StarBody,
    TabulatedBody,
    power_function,
    radial,
    tabulate,
)
from .errors import (
    DegenerateFrameError,
    DegenerateSaturationError,
    InputError,
    NumericalError,
)
from .harmonics import HarmonicSpectrum
from .inversion import (
    Convention,
    DualProfile,
    FunkInversion,
    dual_profile,
    funk_inverse_harmonic,
    funk_multiplier,
    mean_value_inverse,
    multiplier_probe,
    parse_convention,
    shifted_dual_transform,
)
from .inversion import analyze, synthesize
from .kernels import backend_name
from .reconstruct import (
    ReconstructionResult,
    ReducedFrameSet,
    build_reduced_frames,
    invert_from_hemispherical,
    reconstruct_from_reduced,
    reconstruct_radial,
)
from .sphere import Rotation, SphericalGrid, build_grid, rotate_point, rotation_to, unit_vector
from .transforms import (
    HemiDataset,
    SectionFrame,
    evenized,
    fibonacci_directions,
    full_frames,
    funk_transform,
    half_section_volume,
    hemi_funk,
    hemi_transform_dataset,
    reduced_hemi_funk,
    reflected,
    simulate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "Convention",
    "DegenerateFrameError",
    "DegenerateSaturationError",
    "DualProfile",
    "Ellipsoid",
    "FunkInversion",
    "HarmonicBody",
    "HarmonicSpectrum",
    "HemiDataset",
    "InputError",
    "NumericalError",
    "ReconstructionResult",
    "ReducedFrameSet",
    "Rotation",
    "SectionFrame",
    "ShiftedBall",
    "SphericalFunction",
    "SphericalGrid",
    "StarBody",
    "TabulatedBody",
    "analyze",
    "backend_name",
    "build_grid",
    "build_reduced_frames",
    "dual_profile",
    "evenized",
    "fibonacci_directions",
    "full_frames",
    "funk_inverse_harmonic",
    "funk_multiplier",
    "funk_transform",
    "half_section_volume",
    "hemi_funk",
    "hemi_transform_dataset",
    "invert_from_hemispherical",
    "mean_value_inverse",
    "multiplier_probe",
    "parse_convention",
    "power_function",
    "radial",
    "reconstruct_from_reduced",
    "reconstruct_radial",
    "reduced_hemi_funk",
    "reflected",
    "rotate_point",
    "rotation_to",
    "shifted_dual_transform",
    "simulate_dataset",
    "synthesize",
    "tabulate",
    "unit_vector",
]
