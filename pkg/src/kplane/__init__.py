"""k-plane transforms over F_q^d with exact verification tooling."""

from .field import Field, field_inverse, field_new
from .geometry import (
    AffineSubspace,
    affine_span,
    contains,
    enumerate_planes,
    gaussian_binomial,
    num_planes,
    plane_from_rank,
    plane_rank,
    planes_through,
    planes_through_count,
    point_codec,
    point_encode,
)
from .transform import (
    GridFunction,
    PlaneFunction,
    endpoint_powers,
    endpoint_ratio,
    kplane_transform,
    lp_norm,
    lp_power,
    multilinear_norm,
)

__all__ = [
    "AffineSubspace", "Field", "GridFunction", "PlaneFunction", "affine_span", "contains", "endpoint_powers",
    "endpoint_ratio", "enumerate_planes", "field_inverse", "field_new", "gaussian_binomial", "kplane_transform",
    "lp_norm", "lp_power", "multilinear_norm", "num_planes", "plane_from_rank", "plane_rank", "planes_through",
    "planes_through_count", "point_codec", "point_encode",
]
