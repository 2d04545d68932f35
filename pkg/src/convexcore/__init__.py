"""Discrete subgroups of PGL(n, R) acting on properly convex projective domains."""

from .cloud import PointCloud
from .config import DEFAULT, Config, RunConfig
from .domains import (
    Containment,
    ConvexDomain,
    HalfspaceDomain,
    HullDomain,
    KleinBall,
    LineSection,
    boundary_intersect,
    center_of_mass,
    contains,
    delta_pseudo,
    domain_from_json,
    dual_domain,
    hilbert_distance,
    omega_max,
)
from .errors import ConvexCoreError, GeometryError, InputError, ResourceError
from .gallery import bend, block_include, build, coboundary, gallery_names
from .groups import GroupSpec, conical_profile, gap_profile, orbit, qi_defect, word_ball
from .limitsets import (
    convex_core,
    detect_pets,
    detect_segments,
    orbital_limit_set,
    proximal_limit_set,
    verdict,
)
from .pqgeom import PQForm, bn_form, negativity, sphere_flatten, tau_n
from .projlin import (
    ProjHyperplane,
    ProjMat,
    ProjPoint,
    SpectralData,
    attracting_fixed_point,
    chordal_distance,
    cross_ratio,
    is_proximal,
    is_proximal_dual,
    normalize_point,
    spectral,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
