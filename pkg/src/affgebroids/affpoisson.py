"""Aff-Poisson and aff-Jacobi brackets, and the linear aff-Poisson side
of an affgebroid on the dual of its model bundle.

Sections of a trivialized one-dimensional affine bundle are identified with
functions relative to a fixed reference section; the brackets then take the
normal form

    {f, g} = D(g - f) + {f, g}_v

with D an affine derivation (aff-Poisson) or a first-order operator
(aff-Jacobi) and {.,.}_v the vector part.  Jacobi is *decided*, not assumed:
the cyclic sum is a tri-differential operator of order at most two per slot,
so vanishing on all monomials of degree at most two per slot is a complete
test, not a sampling heuristic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .affgebroid import AffgebroidData, AffSection, aff_bracket, build_hull
from .algebroid import (
    Section,
    default_fiber_names,
    dual_context,
    dual_linear_poisson,
    linear_fiber_function,
    linear_field_from_qder,
)
from .duality import EpiData, linsec_to_fsigma
from .geometry import (
    Multivector,
    d_poly,
    pairing,
    poisson_apply,
    sn_bracket,
    vector_field,
    vf_apply,
    wedge_form,
)
from .polyring import Poly, VarContext
from .reports import CheckReport

DerPair = tuple[Multivector, Poly]  # (vector field, function) derivation pair


# -- the two one-dimensional model brackets ---------------------------------------


def _check_pair(p: DerPair) -> None:
    X, g = p
    if X.degree != 1:
        raise ValueError("pair must carry a vector field")
    if g.ctx != X.ctx:
        raise ValueError("context mismatch inside pair")


def ex1_bracket(p1: DerPair, p2: DerPair) -> DerPair:
    """Bracket of function-valued affine derivations:

        [(X, g), (Y, h)] = ([X, Y], X(h) - Y(g)).
    """
    _check_pair(p1)
    _check_pair(p2)
    X, g = p1
    Y, h = p2
    if X.ctx != Y.ctx:
        raise ValueError("context mismatch")
    return sn_bracket(X, Y), vf_apply(X, h) - vf_apply(Y, g)


def ex2_bracket(p1: DerPair, p2: DerPair) -> DerPair:
    """Commutator bracket of section-valued affine derivations:

        [(X, g), (Y, h)] = ([X, Y], X(h) - Y(g) + g - h).
    """
    _check_pair(p1)
    _check_pair(p2)
    X, g = p1
    Y, h = p2
    if X.ctx != Y.ctx:
        raise ValueError("context mismatch")
    return sn_bracket(X, Y), vf_apply(X, h) - vf_apply(Y, g) + g - h


def invariant_field_linear(p: DerPair, s_name: str = "s") -> Multivector:
    """Shift-invariant total-space model of an ex1 pair: X - g d/ds."""
    X, g = p
    total = VarContext(X.ctx.names, (s_name,))
    comps = [X.comp((i,)).in_context(total) for i in range(len(X.ctx))]
    comps.append(-g.in_context(total))
    return vector_field(total, comps)


def invariant_field_affine(p: DerPair, s_name: str = "s") -> Multivector:
    """Total-space model of an ex2 pair: X + (s - g) d/ds."""
    X, g = p
    total = VarContext(X.ctx.names, (s_name,))
    comps = [X.comp((i,)).in_context(total) for i in range(len(X.ctx))]
    comps.append(Poly.variable(total, s_name) - g.in_context(total))
    return vector_field(total, comps)


# -- aff-Poisson -------------------------------------------------------------------


@dataclass(frozen=True)
class AffPoissonData:
    """Pair (bivector, reference derivation) inducing {f,g} = D(g-f) + Lam(df,dg).

    `checked` marks data whose structure conditions have been verified; fresh
    data is dirty until :func:`check_affpoisson` passes.
    """

    bivector: Multivector
    ref_field: Multivector
    checked: bool = False

    def __post_init__(self) -> None:
        if self.bivector.degree != 2 or self.ref_field.degree != 1:
            raise ValueError("need a bivector and a vector field")
        if self.bivector.ctx != self.ref_field.ctx:
            raise ValueError("context mismatch")

    @property
    def ctx(self) -> VarContext:
        return self.bivector.ctx


def affpoisson_bracket(P: AffPoissonData, f: Poly, g: Poly) -> Poly:
    if f.ctx != P.ctx or g.ctx != P.ctx:
        raise ValueError("context mismatch")
    return vf_apply(P.ref_field, g - f) + poisson_apply(P.bivector, f, g)


def _monomials(ctx: VarContext, max_deg: int) -> list[Poly]:
    out = []
    n = len(ctx)
    for exps in product(range(max_deg + 1), repeat=n):
        if sum(exps) <= max_deg:
            out.append(Poly(ctx, {tuple(exps): Fraction(1)}))
    return out


def _jacobi_sweep(ctx: VarContext, full_bracket, linear_part) -> tuple[bool, str]:
    """Cyclic-sum sweep over all monomial triples of per-slot degree <= 2."""
    monos = _monomials(ctx, 2)
    for f1 in monos:
        for f2 in monos:
            for f3 in monos:
                total = (
                    linear_part(f1, full_bracket(f2, f3))
                    + linear_part(f2, full_bracket(f3, f1))
                    + linear_part(f3, full_bracket(f1, f2))
                )
                if not total.is_zero():
                    return False, f"({f1}; {f2}; {f3}) -> {total}"
    return True, ""


def check_affpoisson(P: AffPoissonData) -> CheckReport:
    """Structure conditions [Lam, Lam] = 0 and [D, Lam] = 0, cross-checked by
    the complete monomial Jacobi sweep of the induced bracket."""
    report = CheckReport("affpoisson")
    ll = sn_bracket(P.bivector, P.bivector)
    report.add("bivector", ll.is_zero(), "" if ll.is_zero() else str(ll))
    dl = sn_bracket(P.ref_field, P.bivector)
    report.add("ref_field", dl.is_zero(), "" if dl.is_zero() else str(dl))

    def full(f, g):
        return affpoisson_bracket(P, f, g)

    def lin(f, h):
        return vf_apply(P.ref_field, h) + poisson_apply(P.bivector, f, h)

    ok, witness = _jacobi_sweep(P.ctx, full, lin)
    report.add("jacobi_sweep", ok, witness)
    return report


def validated(P: AffPoissonData) -> AffPoissonData:
    report = check_affpoisson(P)
    if not report.ok:
        raise ValueError(f"aff-Poisson conditions fail: {report.failures[0].line(report.suite)}")
    return AffPoissonData(P.bivector, P.ref_field, checked=True)


# -- aff-Jacobi ---------------------------------------------------------------------


@dataclass(frozen=True)
class AffJacobiData:
    """Jacobi pair (bivector, jacobi_field) plus a first-order reference
    operator D(h) = ref_field(h) + ref_mult * h."""

    bivector: Multivector
    jacobi_field: Multivector
    ref_field: Multivector
    ref_mult: Poly

    def __post_init__(self) -> None:
        if self.bivector.degree != 2:
            raise ValueError("need a bivector")
        if self.jacobi_field.degree != 1 or self.ref_field.degree != 1:
            raise ValueError("need vector fields")
        ctxs = {self.bivector.ctx, self.jacobi_field.ctx, self.ref_field.ctx, self.ref_mult.ctx}
        if len(ctxs) != 1:
            raise ValueError("context mismatch")

    @property
    def ctx(self) -> VarContext:
        return self.bivector.ctx

    def jac_vector_part(self, f: Poly, g: Poly) -> Poly:
        return (
            poisson_apply(self.bivector, f, g)
            + f * vf_apply(self.jacobi_field, g)
            - g * vf_apply(self.jacobi_field, f)
        )

    def ref_apply(self, h: Poly) -> Poly:
        return vf_apply(self.ref_field, h) + self.ref_mult * h


def affjacobi_bracket(J: AffJacobiData, f: Poly, g: Poly) -> Poly:
    if f.ctx != J.ctx or g.ctx != J.ctx:
        raise ValueError("context mismatch")
    return J.ref_apply(g - f) + J.jac_vector_part(f, g)


def check_affjacobi(J: AffJacobiData) -> CheckReport:
    report = CheckReport("affjacobi")

    def full(f, g):
        return affjacobi_bracket(J, f, g)

    def lin(f, h):
        return J.ref_apply(h) + J.jac_vector_part(f, h)

    ok, witness = _jacobi_sweep(J.ctx, full, lin)
    report.add("jacobi_sweep", ok, witness)
    return report


# -- the linear aff-Poisson structure of an affgebroid -------------------------------


@dataclass(frozen=True)
class LinearAffPoisson:
    """Linear aff-Poisson data on the dual of the model bundle.

    Sections of the one-dimensional fibration over the dual are identified
    with functions f relative to the zero-matrix reference linear section;
    the bracket is {sigma+f, sigma+g} = Dbar(g - f) + <Lam0, df ^ dg>.
    """

    source: AffgebroidData
    dbar: Multivector
    bivector: Multivector

    @property
    def ctx(self) -> VarContext:
        return self.bivector.ctx

    def bracket(self, f: Poly, g: Poly) -> Poly:
        if f.ctx != self.ctx or g.ctx != self.ctx:
            raise ValueError("context mismatch")
        return vf_apply(self.dbar, g - f) + poisson_apply(self.bivector, f, g)

    def directional(self, f: Poly, h: Poly) -> Poly:
        """The affine-linear part {sigma+f, .} applied to a function h."""
        return vf_apply(self.dbar, h) + poisson_apply(self.bivector, f, h)


def from_affgebroid(
    A: AffgebroidData, fiber_names: Sequence[str] | None = None
) -> LinearAffPoisson:
    """Dual-side linear aff-Poisson data of an affgebroid."""
    names = tuple(fiber_names) if fiber_names else default_fiber_names(A.rank, "xi")
    dbar = linear_field_from_qder(A.qder, names)
    lam = dual_linear_poisson(A.model, names)
    return LinearAffPoisson(A, dbar, lam)


def section_function(P: LinearAffPoisson, eta_component: Poly) -> Poly:
    """Function representing the section with the given reference component.

    A section of the dual fibration adds `eta_component` in the reference
    direction; relative to the zero reference it is represented by the
    *negative* of that component (the model identification carries -1)."""
    return -eta_component.in_context(P.ctx)


def linear_section_function(P: LinearAffPoisson, matrix: Sequence[Poly]) -> Poly:
    """Function of the linear section with coefficient matrix f^i(x)."""
    eta_comp = linear_fiber_function(P.ctx, tuple(matrix))
    return section_function(P, eta_comp)


def check_correspondence(
    A: AffgebroidData, trials: int = 8, seed: int = 0xC0DE
) -> CheckReport:
    """Brackets of linear sections realize the affgebroid bracket exactly."""
    report = CheckReport("correspondence")
    P = from_affgebroid(A)
    rng = random.Random(seed)

    def rand_sec() -> Section:
        return tuple(_rand_poly(rng, A.base) for _ in range(A.rank))

    for trial in range(trials):
        X, Y = rand_sec(), rand_sec()
        f = linear_fiber_function(P.ctx, X)
        g = linear_fiber_function(P.ctx, Y)
        lhs = P.bracket(f, g)
        rhs = linear_fiber_function(
            P.ctx, aff_bracket(A, AffSection(X), AffSection(Y))
        )
        report.add(f"linear.{trial}", lhs == rhs, "" if lhs == rhs else f"{lhs} != {rhs}")
    return report


def _rand_poly(rng: random.Random, ctx: VarContext, max_deg: int = 2) -> Poly:
    terms = {}
    for _ in range(rng.randint(1, 2)):
        exp = [0] * len(ctx)
        for _ in range(rng.randint(0, max_deg)):
            exp[rng.randrange(len(ctx))] += 1
        terms[tuple(exp)] = Fraction(rng.randint(-3, 3))
    return Poly(ctx, terms)


def check_reductions(A: AffgebroidData, trials: int = 6, seed: int = 0xBEEF) -> CheckReport:
    """The two reductions of the hull Poisson structure, checked exactly.

    linear: pullbacks of functions on the model dual bracket to the pullback
    of their model-dual bracket; affine: pullbacks of linear sections bracket
    to the pullback of the section bracket.
    """
    report = CheckReport("reductions")
    rng = random.Random(seed)
    n = A.rank
    xi_names = default_fiber_names(n, "xi")
    P = from_affgebroid(A, xi_names)
    hull = build_hull(A)
    hull_names = ("eta",) + xi_names
    lam_hull = dual_linear_poisson(hull.alg, hull_names)
    hctx = lam_hull.ctx

    for trial in range(trials):
        f = _rand_poly(rng, P.ctx)
        g = _rand_poly(rng, P.ctx)
        lhs = poisson_apply(lam_hull, f.in_context(hctx), g.in_context(hctx))
        rhs = poisson_apply(P.bivector, f, g).in_context(hctx)
        report.add(
            f"linear.{trial}", lhs == rhs, "" if lhs == rhs else f"{lhs} != {rhs}"
        )

    epi = EpiData(A.base, xi_names, "eta")
    for trial in range(trials):
        mat1 = [_rand_poly(rng, A.base) for _ in range(n)]
        mat2 = [_rand_poly(rng, A.base) for _ in range(n)]
        fs1 = linsec_to_fsigma(epi, mat1).in_context(hctx)
        fs2 = linsec_to_fsigma(epi, mat2).in_context(hctx)
        rhs = poisson_apply(lam_hull, fs1, fs2)
        lhs = P.bracket(
            linear_section_function(P, mat1), linear_section_function(P, mat2)
        ).in_context(hctx)
        report.add(
            f"affine.{trial}", lhs == rhs, "" if lhs == rhs else f"{lhs} != {rhs}"
        )
    return report


# -- time-dependent mechanics -----------------------------------------------------


def mech_base_context(spatial_dim: int) -> VarContext:
    if spatial_dim < 1:
        raise ValueError("spatial dimension must be at least 1")
    if spatial_dim == 1:
        return VarContext(("t", "q"))
    return VarContext(("t",) + tuple(f"q{i}" for i in range(1, spatial_dim + 1)))


def phase_context(spatial_dim: int) -> VarContext:
    base = mech_base_context(spatial_dim)
    if spatial_dim == 1:
        return base.with_fibers(("p",))
    return base.with_fibers(tuple(f"p{i}" for i in range(1, spatial_dim + 1)))


def mech_affgebroid(spatial_dim: int) -> AffgebroidData:
    """First-jet affgebroid of spacetime fibred over the time axis.

    The hull is the tangent algebroid; the model bundle is spanned by the
    spatial coordinate directions and the reference section is the time
    direction."""
    from .algebroid import AlgebroidData, QuasiDer, make_algebroid

    base = mech_base_context(spatial_dim)
    zero = Poly.zero(base)
    one = Poly.const(base, 1)
    anchor = []
    for j in range(spatial_dim):
        row = [zero] * len(base)
        row[j + 1] = one
        anchor.append(row)
    model = make_algebroid(base, anchor)
    qder = QuasiDer(
        base,
        tuple(tuple(zero for _ in range(spatial_dim)) for _ in range(spatial_dim)),
        (one,) + (zero,) * spatial_dim,
    )
    return AffgebroidData(model, qder)


@dataclass
class MechanicsResult:
    report: CheckReport
    field: Multivector
    lines: list[str]
    data: LinearAffPoisson


def mechanics_demo(spatial_dim: int, hamiltonian: Poly) -> MechanicsResult:
    """Dynamics of the section of the phase fibration generated by H.

    The section adds -H in the reference direction; its bracket derivation
    is the vector field X with X(f) = Dbar(f) + {H, f}, whose time component
    is asserted to be exactly 1.  Components are emitted one per phase
    coordinate as `d<coord>/ds = <polynomial>`.
    """
    ctx = phase_context(spatial_dim)
    if hamiltonian.ctx != ctx:
        raise ValueError("hamiltonian must live in the phase context")
    A = mech_affgebroid(spatial_dim)
    P = from_affgebroid(A, ctx.fiber_vars)
    f_H = section_function(P, -hamiltonian)  # eta component of the section is -H
    comps = []
    for name in ctx.names:
        coord = Poly.variable(ctx, name)
        comps.append(P.directional(f_H, coord))
    field = vector_field(ctx, comps)
    report = CheckReport("mechdemo")
    time_comp = comps[0]
    report.add(
        "time_component",
        time_comp == Poly.const(ctx, 1),
        "" if time_comp == Poly.const(ctx, 1) else str(time_comp),
    )
    lines = [f"d{name}/ds = {comp}" for name, comp in zip(ctx.names, comps)]
    return MechanicsResult(report, field, lines, P)
