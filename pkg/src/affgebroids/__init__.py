"""Exact symbolic calculus for Lie algebroids, Lie affgebroids and their duals.

Everything is computed over a single coordinate patch with polynomial
coefficient functions and exact rational coefficients, so every structural
identity (Jacobi, cocycle, duality, reduction) is decided as an exact
polynomial equality.
"""

from .polyring import VarContext, Poly, ParseError, parse_poly
from .geometry import (
    Multivector,
    DiffForm,
    GerstPair,
    vector_field,
    wedge_mv,
    sn_bracket,
    lie_derivative,
    gerst_wedge,
    gerst_sn,
    gerst_eval,
)
from .algebroid import (
    AlgebroidData,
    QuasiDer,
    bracket,
    anchor_apply,
    check_jacobi,
    qder_apply,
    is_cocycle,
    complete_lift,
    vertical_lift,
    dual_linear_poisson,
    linear_field_from_qder,
)
from .affgebroid import (
    AffgebroidData,
    AffSection,
    HullAlgebroid,
    QderCochain,
    aff_bracket,
    check_affgebroid,
    chevalley_d,
    d_squared_zero_qder,
    change_reference,
    build_hull,
    restrict_hull,
    check_thm11,
    aff_lift,
    check_thm13,
)
from .reports import Check, CheckReport

__version__ = "0.1.0"
