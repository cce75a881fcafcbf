"""Weighted projective Ricci curvature of Finsler, Randers and Kropina metrics."""

from .core import (  # noqa: F401
    CurvatureBundle,
    TangentSample,
    WeaklyEinsteinSpec,
    curvature_bundle,
    distortion,
    fundamental_tensor,
    horizontal_derivative_along_spray,
    projective_ricci,
    ricci,
    riemann_curvature,
    s_curvature,
    sfrak,
    spray,
    weakly_einstein_residual,
    weighted_projective_ricci,
)
from .errors import (  # noqa: F401
    ConstructionError,
    DegenerateMetric,
    DomainError,
    ExprSyntaxError,
    FinslerError,
    NotProjectivelyFlat,
    QuadratureError,
    SamplerExhausted,
    SingularEvaluation,
)
from .expr import eval_expr, parse
from .jets import MultiJet, SeedPoint, extract_derivative, finite_difference_audit, lift_variable
from .metrics import (
    CATALOG,
    BaoShen,
    BusemannHausdorff,
    ClosedFormKropina,
    ClosedFormRanders,
    ConstantDensity,
    CSRanders,
    DensityOf,
    Euclidean,
    Funk,
    GeneralF,
    Kropina,
    OneFormSpec,
    QuarticRoot,
    Randers,
    Riemannian,
    RiemannianDensity,
    RiemannianSpec,
    load_metric_file,
    materialize_catalog,
    resolve_metric,
)
from .volume import bh_volume_density

__version__ = "0.1.0"
