"""Left-invariant sub-Riemannian structures on 3D Lie groups.

Classification by the two metric invariants (chi, kappa), canonical frames,
normal geodesics on matrix-group models, and a numerically certified
isometry between the affine-line group A+(R) x S1 and SL(2).
"""

from .algebra import (
    LieAlgebra3,
    bracket,
    change_basis,
    check_jacobi,
    identify_algebra,
    is_unimodular,
    killing_form,
)
from .classify import (
    CatalogEntry,
    ClassLabel,
    catalog,
    classify,
    figure1_data,
    solvable_ratio_check,
)
from .frames import (
    AdaptedFrame,
    NotBracketGeneratingError,
    SRStructure,
    check_contact,
    frame_from_orthonormal,
    orthonormalize,
    reeb_frame,
    rotate_frame,
)
from .geodesics import (
    GeodesicState,
    GroupModel,
    Trajectory,
    build_model,
    integrate_controls,
    integrate_geodesic,
    shoot_distance,
    vertical_rhs,
)
from .invariants import (
    Invariants,
    bracket_form,
    canonical_frame,
    compute_chi,
    compute_kappa,
    normalize,
)

__all__ = [
    "AdaptedFrame",
    "CatalogEntry",
    "ClassLabel",
    "GeodesicState",
    "GroupModel",
    "Invariants",
    "LieAlgebra3",
    "NotBracketGeneratingError",
    "SRStructure",
    "Trajectory",
    "bracket",
    "bracket_form",
    "build_model",
    "canonical_frame",
    "catalog",
    "change_basis",
    "check_contact",
    "check_jacobi",
    "classify",
    "compute_chi",
    "compute_kappa",
    "figure1_data",
    "frame_from_orthonormal",
    "identify_algebra",
    "integrate_controls",
    "integrate_geodesic",
    "is_unimodular",
    "killing_form",
    "normalize",
    "orthonormalize",
    "reeb_frame",
    "rotate_frame",
    "shoot_distance",
    "solvable_ratio_check",
    "vertical_rhs",
]

__version__ = "0.1.0"
