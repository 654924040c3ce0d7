"""Reference alpha-stable processes, continuous and discrete."""

from .reference import ReferenceJumpLaw, discrete_reference_path, reference_endpoints, total_jump_statistic
from .samplers import (
    CalibrationReport,
    StablePath,
    calibrate_scale,
    dump_samples,
    positive_stable,
    sample_isotropic_increment,
    sample_stable_1d,
    stable_path,
)

__all__ = [
    "CalibrationReport",
    "ReferenceJumpLaw",
    "StablePath",
    "calibrate_scale",
    "discrete_reference_path",
    "dump_samples",
    "total_jump_statistic",
    "positive_stable",
    "sample_isotropic_increment",
    "sample_stable_1d",
    "stable_path",
    "reference_endpoints",
]
