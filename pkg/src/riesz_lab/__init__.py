"""Numerical audits of dimension-free Riesz transform bounds on spectral model spaces."""

from .operators import (
    BesselParams,
    LaguerreParams,
    build_bessel,
    build_hermite,
    build_laguerre,
    laguerre_distance,
    laguerre_poly,
    tensor_product,
)
from .report import AuditReport
from .riesz import (
    TestFunctionSet,
    bilinear_audit,
    integral_rep_audit,
    main_bound_audit,
    make_test_functions,
    riesz_apply,
    riesz_constant,
    sqrt_shifted,
)
from .semigroups import (
    PoissonParams,
    SubordinationRule,
    heat_apply,
    make_subordination_rule,
    poisson_spectral,
    poisson_subordinated,
    rho_a,
)
from .spectral import (
    QuadratureGrid,
    SpectralSystem,
    derivative_field,
    functional_calculus,
    lp_norm,
    project,
    synthesize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
