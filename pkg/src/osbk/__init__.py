"""Outer symplectic billiards for submanifolds of standard symplectic R^{2d}.

The correspondence pairs points z, z' whose midpoint lies on a table M with
the chord z' - z symplectically orthogonal to the tangent space there. This
package provides the table zoo (trigonometric immersions, symplectic
ellipsoids, Lagrangian graphs of polynomials), single-step and iterated
correspondence solvers, variational searches for periodic and
Lagrangian-boundary orbits, wall/multiplicity analysis with the cubic
classification in R^4, and integrability checks, plus the ``osbk`` CLI.
"""

from .core import (
    AffineLagrangian,
    AffineSymplectic,
    apply_J,
    as_phase_vector,
    interleave,
    normalize_lagrangian_pair,
    omega,
    split_xy,
    symplectic_complement,
)
from .correspondence import (
    PairReport,
    StepCandidate,
    iterate_ellipsoid,
    orthogonality_residual,
    reflect,
    scan_curve_roots,
    step,
    step_cubic_graph,
    step_curve,
    step_ellipsoid,
    step_graph_numeric,
    verify_pair,
)
from .errors import (
    ClosureError,
    ConfigError,
    ConsistencyError,
    DegeneratePencilError,
    DomainError,
    ImmersionError,
    OsbkError,
    UnstableCountError,
)
from .integrability import (
    AuditReport,
    IntegralSet,
    PolyIntegral,
    audit_invariance,
    integrals_for,
    poisson_bracket,
)
from .manifolds import (
    ConditionLLReport,
    ConditionLReport,
    ConvexityProfile,
    GeneratingGraph,
    ManifoldSpec,
    SymplecticEllipsoid,
    TrigImmersion,
    chebyshev_curve,
    check_condition_L,
    check_condition_LL,
    circle,
    coordinate_lagrangian_pair,
    manifold_from_json,
    manifold_to_json,
    sphere_torus,
    spec_for,
    symplectic_convexity_profile,
)
from .poly import Poly, poly_from_pairs
from .variational import (
    BoundarySearchResult,
    EvenSearchResult,
    FoundOrbit,
    MidpointPolygon,
    OrbitPolyline,
    SearchResult,
    closure_defect,
    find_boundary_orbit,
    find_periodic_orbit,
    gen_fun_boundary,
    gen_fun_periodic,
    grad_gen_fun,
    make_orbit,
    reconstruct_boundary,
    reconstruct_periodic,
    search_even_periodic,
    stationarity_hessian,
    symplectic_area,
)
from .wall import (
    ClassificationReport,
    ConicPair,
    CubicForm2,
    WallSample,
    ZeroDivisorReport,
    classify_cubic_table,
    conic_intersections,
    cubic_discriminant,
    cubic_resultant,
    curve_wall_samples,
    curve_wall_singular,
    eta_expansion_check,
    lagrangian_delta_det,
    multiplicity_curve,
    ruled_test,
    zero_divisor_test,
)

__version__ = "0.1.0"

__all__ = [
    "AffineLagrangian",
    "AffineSymplectic",
    "AuditReport",
    "BoundarySearchResult",
    "ClassificationReport",
    "ClosureError",
    "ConditionLLReport",
    "ConditionLReport",
    "ConfigError",
    "ConicPair",
    "ConsistencyError",
    "ConvexityProfile",
    "CubicForm2",
    "DegeneratePencilError",
    "DomainError",
    "EvenSearchResult",
    "FoundOrbit",
    "GeneratingGraph",
    "ImmersionError",
    "IntegralSet",
    "ManifoldSpec",
    "MidpointPolygon",
    "OrbitPolyline",
    "OsbkError",
    "PairReport",
    "Poly",
    "PolyIntegral",
    "SearchResult",
    "StepCandidate",
    "SymplecticEllipsoid",
    "TrigImmersion",
    "UnstableCountError",
    "WallSample",
    "ZeroDivisorReport",
    "apply_J",
    "as_phase_vector",
    "audit_invariance",
    "chebyshev_curve",
    "check_condition_L",
    "check_condition_LL",
    "circle",
    "classify_cubic_table",
    "closure_defect",
    "conic_intersections",
    "coordinate_lagrangian_pair",
    "cubic_discriminant",
    "cubic_resultant",
    "curve_wall_samples",
    "curve_wall_singular",
    "eta_expansion_check",
    "find_boundary_orbit",
    "find_periodic_orbit",
    "gen_fun_boundary",
    "gen_fun_periodic",
    "grad_gen_fun",
    "integrals_for",
    "interleave",
    "iterate_ellipsoid",
    "lagrangian_delta_det",
    "make_orbit",
    "manifold_from_json",
    "manifold_to_json",
    "multiplicity_curve",
    "normalize_lagrangian_pair",
    "omega",
    "orthogonality_residual",
    "poisson_bracket",
    "poly_from_pairs",
    "reconstruct_boundary",
    "reconstruct_periodic",
    "reflect",
    "ruled_test",
    "scan_curve_roots",
    "search_even_periodic",
    "spec_for",
    "sphere_torus",
    "split_xy",
    "stationarity_hessian",
    "step",
    "step_cubic_graph",
    "step_curve",
    "step_ellipsoid",
    "step_graph_numeric",
    "symplectic_area",
    "symplectic_complement",
    "symplectic_convexity_profile",
    "verify_pair",
    "zero_divisor_test",
]
