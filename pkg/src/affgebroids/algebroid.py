"""Lie algebroid structures on trivialized bundles over a polynomial base.

A rank-n bundle over the patch R^m is presented by frame data: an anchor
matrix rho[i][a] and structure functions c[i][j][k] (skew in i, j), all
polynomials in the base coordinates.  The section bracket is the Leibniz
extension of the frame bracket; every verification below reduces to exact
polynomial identities in this data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .geometry import Multivector, sn_bracket, vector_field, vf_apply, vf_comps
from .polyring import Poly, VarContext
from .reports import CheckReport

Section = tuple[Poly, ...]


@dataclass(frozen=True)
class AlgebroidData:
    """Anchor and structure functions of a Lie algebroid candidate.

    The Jacobi identity and the anchor-morphism property are *not* assumed;
    run :func:`check_jacobi` to decide them.
    """

    base: VarContext
    anchor: tuple[tuple[Poly, ...], ...]  # rank rows, dim columns
    struct: tuple[tuple[tuple[Poly, ...], ...], ...]  # c[i][j][k], skew in (i, j)

    def __post_init__(self) -> None:
        if self.base.fiber_vars:
            raise ValueError("algebroid base context must have no fiber variables")
        n = len(self.anchor)
        m = len(self.base)
        for row in self.anchor:
            if len(row) != m:
                raise ValueError("anchor row length must equal base dimension")
            for p in row:
                if p.ctx != self.base:
                    raise ValueError("anchor entries must live in the base context")
        if len(self.struct) != n or any(
            len(ci) != n or any(len(cij) != n for cij in ci) for ci in self.struct
        ):
            raise ValueError("structure array must be rank x rank x rank")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    p = self.struct[i][j][k]
                    if p.ctx != self.base:
                        raise ValueError("structure entries must live in the base context")
                    if p != -self.struct[j][i][k]:
                        raise ValueError(
                            f"structure functions not skew: c[{i}][{j}][{k}] != -c[{j}][{i}][{k}]"
                        )

    @property
    def rank(self) -> int:
        return len(self.anchor)

    @property
    def dim(self) -> int:
        return len(self.base)

    def zero_section(self) -> Section:
        return tuple(Poly.zero(self.base) for _ in range(self.rank))

    def basis_section(self, i: int) -> Section:
        return tuple(
            Poly.const(self.base, 1) if j == i else Poly.zero(self.base)
            for j in range(self.rank)
        )


def make_algebroid(
    base: VarContext,
    anchor: Sequence[Sequence[Poly]],
    struct_pairs: dict[tuple[int, int], Sequence[Poly]] | None = None,
) -> AlgebroidData:
    """Convenience builder: structure functions given only for i < j."""
    n = len(anchor)
    zero = Poly.zero(base)
    c = [[[zero for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for (i, j), comps in (struct_pairs or {}).items():
        if i == j:
            raise ValueError("diagonal structure functions must vanish")
        for k, p in enumerate(comps):
            c[i][j][k] = p
            c[j][i][k] = -p
    return AlgebroidData(
        base,
        tuple(tuple(row) for row in anchor),
        tuple(tuple(tuple(entry for entry in row) for row in plane) for plane in c),
    )


def tangent_algebroid(base: VarContext) -> AlgebroidData:
    """The tangent bundle: rank = dim, identity anchor, vanishing structure."""
    m = len(base)
    anchor = [
        [Poly.const(base, 1) if a == i else Poly.zero(base) for a in range(m)]
        for i in range(m)
    ]
    return make_algebroid(base, anchor)


def abelian_algebroid(base: VarContext, rank: int) -> AlgebroidData:
    """Zero anchor and zero bracket."""
    zero = Poly.zero(base)
    return make_algebroid(base, [[zero] * len(base) for _ in range(rank)])


# -- section arithmetic -------------------------------------------------------


def sec_add(x: Section, y: Section) -> Section:
    return tuple(a + b for a, b in zip(x, y))


def sec_sub(x: Section, y: Section) -> Section:
    return tuple(a - b for a, b in zip(x, y))


def sec_scale(h: Poly | int | Fraction, x: Section) -> Section:
    return tuple(h * a for a in x)


def sec_is_zero(x: Section) -> bool:
    return all(p.is_zero() for p in x)


def sec_str(x: Section) -> str:
    return ", ".join(str(p) for p in x)


# -- bracket and anchor --------------------------------------------------------


def anchor_field(E: AlgebroidData, X: Section) -> Multivector:
    """Base vector field rho(X) = f^i rho_i^a d/dx^a."""
    comps = []
    for a in range(E.dim):
        total = Poly.zero(E.base)
        for i in range(E.rank):
            total = total + X[i] * E.anchor[i][a]
        comps.append(total)
    return vector_field(E.base, comps)


def anchor_apply(E: AlgebroidData, X: Section, h: Poly) -> Poly:
    """Derivative rho(X)(h); a derivation in h."""
    if len(X) != E.rank:
        raise ValueError("section length must equal rank")
    out = Poly.zero(E.base)
    for i in range(E.rank):
        for a, name in enumerate(E.base.names):
            out = out + X[i] * E.anchor[i][a] * h.partial(name)
    return out


def bracket(E: AlgebroidData, X: Section, Y: Section) -> Section:
    """Leibniz extension of the frame bracket:

    [f^i e_i, g^j e_j] = f^i g^j c_ij^k e_k + f^i rho_i(g^k) e_k - g^j rho_j(f^k) e_k.
    """
    if len(X) != E.rank or len(Y) != E.rank:
        raise ValueError("section length must equal rank")
    out = [Poly.zero(E.base) for _ in range(E.rank)]
    for k in range(E.rank):
        acc = Poly.zero(E.base)
        for i in range(E.rank):
            for j in range(E.rank):
                cijk = E.struct[i][j][k]
                if not cijk.is_zero():
                    acc = acc + X[i] * Y[j] * cijk
        acc = acc + anchor_apply(E, X, Y[k]) - anchor_apply(E, Y, X[k])
        out[k] = acc
    return tuple(out)


def check_jacobi(E: AlgebroidData) -> CheckReport:
    """Decide the Lie algebroid axioms.

    PASS iff (a) the Jacobiator vanishes on all frame triples and (b) the
    anchor intertwines the frame bracket with the Lie bracket of base vector
    fields.  Both sides are differential operators of bounded order in the
    section coefficients, so this finite check implies the axioms for all
    polynomial sections.
    """
    report = CheckReport("jacobi")
    basis = [E.basis_section(i) for i in range(E.rank)]
    for i, j, k in combinations(range(E.rank), 3):
        jac = sec_add(
            bracket(E, basis[i], bracket(E, basis[j], basis[k])),
            sec_add(
                bracket(E, basis[j], bracket(E, basis[k], basis[i])),
                bracket(E, basis[k], bracket(E, basis[i], basis[j])),
            ),
        )
        report.add(
            f"cyclic.e{i + 1}.e{j + 1}.e{k + 1}",
            sec_is_zero(jac),
            "" if sec_is_zero(jac) else sec_str(jac),
        )
    for i, j in combinations(range(E.rank), 2):
        lie = sn_bracket(anchor_field(E, basis[i]), anchor_field(E, basis[j]))
        img = anchor_field(E, bracket(E, basis[i], basis[j]))
        diff = lie - img
        report.add(
            f"anchor.e{i + 1}.e{j + 1}",
            diff.is_zero(),
            "" if diff.is_zero() else str(diff),
        )
    if not report.checks:  # rank < 2: both conditions are vacuous
        report.add("vacuous", True)
    return report


# -- quasi-derivations ---------------------------------------------------------


@dataclass(frozen=True)
class QuasiDer:
    """First-order operator D(e_i) = matrix[i][j] e_j with anchor field D^.

    Acts on sections by D(f^i e_i) = f^i D(e_i) + Dhat(f^i) e_i.
    """

    base: VarContext
    matrix: tuple[tuple[Poly, ...], ...]  # rank x rank
    anchor: tuple[Poly, ...]  # dim components of Dhat

    def __post_init__(self) -> None:
        n = len(self.matrix)
        for row in self.matrix:
            if len(row) != n:
                raise ValueError("quasi-derivation matrix must be square")
            for p in row:
                if p.ctx != self.base:
                    raise ValueError("matrix entries must live in the base context")
        if len(self.anchor) != len(self.base):
            raise ValueError("anchor must have one component per base coordinate")
        for p in self.anchor:
            if p.ctx != self.base:
                raise ValueError("anchor entries must live in the base context")

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def anchor_vf(self) -> Multivector:
        return vector_field(self.base, list(self.anchor))

    def anchor_apply(self, h: Poly) -> Poly:
        out = Poly.zero(self.base)
        for a, name in enumerate(self.base.names):
            out = out + self.anchor[a] * h.partial(name)
        return out


def zero_qder(base: VarContext, rank: int) -> QuasiDer:
    zero = Poly.zero(base)
    return QuasiDer(
        base,
        tuple(tuple(zero for _ in range(rank)) for _ in range(rank)),
        tuple(zero for _ in range(len(base))),
    )


def qder_apply(D: QuasiDer, X: Section) -> Section:
    if len(X) != D.rank:
        raise ValueError("section length must equal rank")
    out = [D.anchor_apply(X[j]) for j in range(D.rank)]
    for i in range(D.rank):
        for j in range(D.rank):
            out[j] = out[j] + X[i] * D.matrix[i][j]
    return tuple(out)


def qder_add(D1: QuasiDer, D2: QuasiDer) -> QuasiDer:
    if D1.base != D2.base or D1.rank != D2.rank:
        raise ValueError("incompatible quasi-derivations")
    return QuasiDer(
        D1.base,
        tuple(
            tuple(a + b for a, b in zip(r1, r2))
            for r1, r2 in zip(D1.matrix, D2.matrix)
        ),
        tuple(a + b for a, b in zip(D1.anchor, D2.anchor)),
    )


def ad_quasider(E: AlgebroidData, X0: Section) -> QuasiDer:
    """The inner quasi-derivation [X0, .] of a (candidate) algebroid."""
    rows = []
    for i in range(E.rank):
        img = bracket(E, X0, E.basis_section(i))
        rows.append(tuple(img))
    anchor = vf_comps(anchor_field(E, X0))
    return QuasiDer(E.base, tuple(rows), anchor)


def is_cocycle(D: QuasiDer, E: AlgebroidData) -> CheckReport:
    """Decide whether D is a derivation of the bracket.

    Checks [X, D(Y)] + [D(X), Y] - D([X, Y]) = 0 on all frame pairs and on
    the pairs (e_i, x^a e_j); by the bounded-order argument this implies the
    identity for all polynomial sections.
    """
    if D.rank != E.rank or D.base != E.base:
        raise ValueError("dimension mismatch between quasi-derivation and algebroid")
    report = CheckReport("cocycle")

    def defect(X: Section, Y: Section) -> Section:
        return sec_sub(
            sec_add(
                bracket(E, X, qder_apply(D, Y)), bracket(E, qder_apply(D, X), Y)
            ),
            qder_apply(D, bracket(E, X, Y)),
        )

    basis = [E.basis_section(i) for i in range(E.rank)]
    for i in range(E.rank):
        for j in range(i + 1, E.rank):
            d = defect(basis[i], basis[j])
            report.add(
                f"basis.e{i + 1}.e{j + 1}",
                sec_is_zero(d),
                "" if sec_is_zero(d) else sec_str(d),
            )
    for i in range(E.rank):
        for j in range(E.rank):
            for name in E.base.names:
                scaled = sec_scale(Poly.variable(E.base, name), basis[j])
                d = defect(basis[i], scaled)
                report.add(
                    f"scaled.e{i + 1}.{name}e{j + 1}",
                    sec_is_zero(d),
                    "" if sec_is_zero(d) else sec_str(d),
                )
    return report


# -- lifts to the total space ---------------------------------------------------


def default_fiber_names(rank: int, prefix: str = "y", start: int = 1) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(start, start + rank))


def total_context(E: AlgebroidData, fiber_names: Sequence[str] | None = None) -> VarContext:
    names = tuple(fiber_names) if fiber_names else default_fiber_names(E.rank)
    if len(names) != E.rank:
        raise ValueError("one fiber name per frame element required")
    return E.base.with_fibers(names)


def linear_fiber_function(ctx: VarContext, mu: Sequence[Poly]) -> Poly:
    """The function sum_i mu_i(x) y^i on the total space."""
    out = Poly.zero(ctx)
    for name, comp in zip(ctx.fiber_vars, mu):
        out = out + comp.in_context(ctx) * Poly.variable(ctx, name)
    return out


def complete_lift(
    E: AlgebroidData, X: Section, fiber_names: Sequence[str] | None = None
) -> Multivector:
    """Complete lift of a section to a vector field on the total space:

        X^c = f^i rho_i^a d_{x^a} + (rho_j^a d_a f^i - f^k c_kj^i) y^j d_{y^i}.

    The defining property X^c(i_mu) = i_{L_X mu} for linear fiber functions
    (with <L_X mu, Y> = rho(X)<mu, Y> - <mu, [X, Y]>) is re-verified on the
    dual frame at every call; it is the contract, the component formula is
    only its solution.
    """
    ctx = total_context(E, fiber_names)
    base_part = vf_comps(anchor_field(E, X))
    comps = [p.in_context(ctx) for p in base_part]
    for i in range(E.rank):
        coeff = Poly.zero(ctx)
        for j in range(E.rank):
            term = Poly.zero(E.base)
            for a, name in enumerate(E.base.names):
                term = term + E.anchor[j][a] * X[i].partial(name)
            for k in range(E.rank):
                term = term - X[k] * E.struct[k][j][i]
            coeff = coeff + term.in_context(ctx) * Poly.variable(ctx, ctx.fiber_vars[j])
        comps.append(coeff)
    lifted = vector_field(ctx, comps)

    for k in range(E.rank):
        mu = [
            Poly.const(E.base, 1) if i == k else Poly.zero(E.base)
            for i in range(E.rank)
        ]
        lie_mu = []
        for j in range(E.rank):
            pair = mu[j]
            val = anchor_apply(E, X, pair)
            br = bracket(E, X, E.basis_section(j))
            val = val - br[k]
            lie_mu.append(val)
        lhs = vf_apply(lifted, linear_fiber_function(ctx, mu))
        rhs = linear_fiber_function(ctx, lie_mu)
        if lhs != rhs:
            raise RuntimeError(
                "complete lift failed its characterizing identity; "
                f"frame covector {k + 1}: {lhs} != {rhs}"
            )
    return lifted


def vertical_lift(
    E: AlgebroidData, X: Section, fiber_names: Sequence[str] | None = None
) -> Multivector:
    """Vertical lift V(X) = f^i d_{y^i}."""
    ctx = total_context(E, fiber_names)
    comps = [Poly.zero(ctx) for _ in range(E.dim)]
    comps.extend(p.in_context(ctx) for p in X)
    return vector_field(ctx, comps)


# -- dual-side constructions ----------------------------------------------------


def dual_context(E: AlgebroidData, fiber_names: Sequence[str] | None = None) -> VarContext:
    names = tuple(fiber_names) if fiber_names else default_fiber_names(E.rank, "xi")
    if len(names) != E.rank:
        raise ValueError("one dual fiber name per frame element required")
    return E.base.with_fibers(names)


def dual_linear_poisson(
    E: AlgebroidData, fiber_names: Sequence[str] | None = None
) -> Multivector:
    """Fiberwise-linear bivector field on the dual bundle encoding the bracket.

    Sign convention: with {f, g} = <Lam, df ^ dg>, linear fiber functions
    satisfy {i_X, i_Y} = i_[X,Y] and {i_X, h} = rho(X)(h) for base functions
    h.  The bivector is a Poisson tensor exactly when check_jacobi passes.
    """
    ctx = dual_context(E, fiber_names)
    m, n = E.dim, E.rank
    comps: dict[tuple[int, int], Poly] = {}
    for i in range(n):
        for j in range(i + 1, n):
            total = Poly.zero(ctx)
            for k in range(n):
                ck = E.struct[i][j][k]
                if not ck.is_zero():
                    total = total + ck.in_context(ctx) * Poly.variable(
                        ctx, ctx.fiber_vars[k]
                    )
            if not total.is_zero():
                comps[(m + i, m + j)] = total
    for i in range(n):
        for a in range(m):
            rho = E.anchor[i][a]
            if not rho.is_zero():
                # component on the increasing pair (x^a, xi_i) is -rho_i^a
                comps[(a, m + i)] = -rho.in_context(ctx)
    return Multivector(ctx, 2, comps)


def linear_field_from_qder(
    D: QuasiDer, fiber_names: Sequence[str] | None = None
) -> Multivector:
    """Linear vector field f_i^j xi_j d_{xi_i} + g^a d_{x^a} on the dual bundle,
    the unique field with i_{D(X)} = Dbar(i_X) for all sections X.
    """
    names = tuple(fiber_names) if fiber_names else default_fiber_names(D.rank, "xi")
    ctx = D.base.with_fibers(names)
    comps = [g.in_context(ctx) for g in D.anchor]
    for i in range(D.rank):
        total = Poly.zero(ctx)
        for j in range(D.rank):
            entry = D.matrix[i][j]
            if not entry.is_zero():
                total = total + entry.in_context(ctx) * Poly.variable(
                    ctx, ctx.fiber_vars[j]
                )
        comps.append(total)
    return vector_field(ctx, comps)


def qder_from_linear_field(field: Multivector, base: VarContext, rank: int) -> QuasiDer:
    """Inverse of :func:`linear_field_from_qder` (exact round trip)."""
    ctx = field.ctx
    if len(ctx.fiber_vars) != rank:
        raise ValueError("field context must carry one fiber variable per frame element")
    m = len(base)
    anchor = []
    for a in range(m):
        comp = field.comp((a,))
        anchor.append(comp.in_context(base))
    matrix = [[Poly.zero(base) for _ in range(rank)] for _ in range(rank)]
    for i in range(rank):
        comp = field.comp((m + i,))
        for j, name in enumerate(ctx.fiber_vars):
            coeff = comp.partial(name)
            if coeff.degree_in(name) or any(
                coeff.degree_in(other) for other in ctx.fiber_vars
            ):
                raise ValueError("field is not fiberwise linear")
            matrix[i][j] = coeff.in_context(base)
        remainder = comp
        for j, name in enumerate(ctx.fiber_vars):
            remainder = remainder.subs(name, Poly.zero(ctx))
        if not remainder.is_zero():
            raise ValueError("field is not fiberwise linear")
    return QuasiDer(base, tuple(tuple(row) for row in matrix), tuple(anchor))
