"""Volume engine: exact polytope volumes, Monte Carlo volumes and central sections."""

from lozvol.volume.polytopes import (
    PolytopeH,
    PolytopeV,
    VolumeEstimate,
    cross_polytope_image_volume,
    cube_image_volume,
    polar_hrep,
    polar_polytope,
    volume_hrep,
    volume_vrep,
)
from lozvol.volume.bodies import NormBall, QuotientBall, ball_volume_mc, body_volume
from lozvol.volume.sections import (
    SectionSearch,
    central_section_volume,
    max_central_section,
    parallel_section_volume,
)

__all__ = [
    "PolytopeH",
    "PolytopeV",
    "VolumeEstimate",
    "cross_polytope_image_volume",
    "cube_image_volume",
    "polar_hrep",
    "polar_polytope",
    "volume_hrep",
    "volume_vrep",
    "NormBall",
    "QuotientBall",
    "ball_volume_mc",
    "body_volume",
    "SectionSearch",
    "central_section_volume",
    "max_central_section",
    "parallel_section_volume",
]
