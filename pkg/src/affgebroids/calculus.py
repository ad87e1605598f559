"""Exterior calculus of an algebroid frame, and its affine restriction.

An :class:`AlgForm` of degree k stores polynomial components on strictly
increasing k-tuples of frame indices of an :class:`~affgebroids.algebroid.
AlgebroidData`.  The differential is the Cartan formula driven by the frame
anchors and structure functions; d^2 = 0 is *decided*, not assumed, by
:func:`d_squared_report`.

When the frame is the vector hull of an affine bundle, index 0 is the
distinguished reference slot and the frame covector phi = dual of slot 0 is
the affine 1-form with constant value 1.  Affine forms are stored as hull
forms; the evaluation/extension pair below realizes the losslessness of
that representation.
"""

from __future__ import annotations

from itertools import combinations
from typing import Mapping, Sequence

from .algebroid import AlgebroidData, Section, anchor_apply, bracket
from .geometry import _merge_sign, _sort_with_sign
from .polyring import Poly, VarContext
from .reports import CheckReport

Index = tuple[int, ...]


class AlgForm:
    """Skew frame-indexed form with base-polynomial coefficients."""

    __slots__ = ("base", "rank", "degree", "comps")

    def __init__(
        self, base: VarContext, rank: int, degree: int, comps: Mapping[Index, Poly]
    ):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        clean: dict[Index, Poly] = {}
        for idx, poly in comps.items():
            idx = tuple(idx)
            if len(idx) != degree or any(not 0 <= i < rank for i in idx):
                raise ValueError(f"bad index tuple {idx} for degree {degree}")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} not strictly increasing")
            if poly.ctx != base:
                raise ValueError("form coefficients must live in the base context")
            if not poly.is_zero():
                clean[idx] = poly
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "comps", clean)

    def __setattr__(self, name, value):
        raise AttributeError("AlgForm is immutable")

    @classmethod
    def zero(cls, base: VarContext, rank: int, degree: int) -> "AlgForm":
        return cls(base, rank, degree, {})

    def comp(self, idx: Sequence[int]) -> Poly:
        key, sign = _sort_with_sign(idx)
        if key is None:
            return Poly.zero(self.base)
        poly = self.comps.get(key, Poly.zero(self.base))
        return poly if sign == 1 else -poly

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgForm):
            return NotImplemented
        return (
            self.base == other.base
            and self.rank == other.rank
            and self.degree == other.degree
            and self.comps == other.comps
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "AlgForm") -> "AlgForm":
        if (
            not isinstance(other, AlgForm)
            or other.base != self.base
            or other.rank != self.rank
            or other.degree != self.degree
        ):
            raise ValueError("can only add forms of equal degree over the same frame")
        out = dict(self.comps)
        for idx, poly in other.comps.items():
            out[idx] = out.get(idx, Poly.zero(self.base)) + poly
        return AlgForm(self.base, self.rank, self.degree, out)

    def __neg__(self) -> "AlgForm":
        return AlgForm(
            self.base, self.rank, self.degree, {i: -p for i, p in self.comps.items()}
        )

    def __sub__(self, other: "AlgForm") -> "AlgForm":
        return self + (-other)

    def __str__(self) -> str:
        if not self.comps:
            return "0"
        pieces = []
        for idx in sorted(self.comps):
            label = ",".join(str(i) for i in idx) if idx else "1"
            pieces.append(f"[{label}] {self.comps[idx]}")
        return "; ".join(pieces)

    def __repr__(self) -> str:
        return f"AlgForm({self})"


def frame_dual_form(base: VarContext, rank: int, slot: int) -> AlgForm:
    """The 1-form dual to one frame element."""
    return AlgForm(base, rank, 1, {(slot,): Poly.const(base, 1)})


def phi_form(base: VarContext, rank: int) -> AlgForm:
    """The distinguished covector of a hull frame (dual of slot 0)."""
    return frame_dual_form(base, rank, 0)


def wedge_alg(mu: AlgForm, nu: AlgForm) -> AlgForm:
    if mu.base != nu.base or mu.rank != nu.rank:
        raise ValueError("frame mismatch")
    out: dict[Index, Poly] = {}
    for i1, p1 in mu.comps.items():
        for i2, p2 in nu.comps.items():
            key, sign = _merge_sign(i1, i2)
            if key is None:
                continue
            term = p1 * p2 if sign == 1 else -(p1 * p2)
            out[key] = out.get(key, Poly.zero(mu.base)) + term
    return AlgForm(mu.base, mu.rank, mu.degree + nu.degree, out)


def alg_form_eval(mu: AlgForm, sections: Sequence[Section]) -> Poly:
    """Tensorial evaluation of a degree-k form on k frame sections."""
    if len(sections) != mu.degree:
        raise ValueError(f"expected {mu.degree} sections, got {len(sections)}")
    base = mu.base
    if mu.degree == 0:
        return mu.comps.get((), Poly.zero(base))
    total = Poly.zero(base)

    def expand(pos: int, chosen: tuple[int, ...], coeff: Poly) -> None:
        nonlocal total
        if coeff.is_zero():
            return
        if pos == mu.degree:
            val = mu.comp(chosen)
            if not val.is_zero():
                total = total + coeff * val
            return
        for u in range(mu.rank):
            comp = sections[pos][u]
            if not comp.is_zero():
                expand(pos + 1, chosen + (u,), coeff * comp)

    expand(0, (), Poly.const(base, 1))
    return total


def alg_d(E: AlgebroidData, mu: AlgForm) -> AlgForm:
    """Cartan differential on frame forms:

        d mu(X_0..X_k) = sum_i (-1)^i rho(X_i)(mu(..omit i..))
                       + sum_{i<j} (-1)^{i+j} mu([X_i, X_j], ..omit i, j..).
    """
    if mu.base != E.base or mu.rank != E.rank:
        raise ValueError("form frame does not match the algebroid")
    k = mu.degree
    out: dict[Index, Poly] = {}
    basis = [E.basis_section(u) for u in range(E.rank)]
    for T in combinations(range(E.rank), k + 1):
        val = Poly.zero(E.base)
        for r in range(k + 1):
            rest = T[:r] + T[r + 1 :]
            inner = mu.comp(rest)
            if not inner.is_zero():
                term = anchor_apply(E, basis[T[r]], inner)
                val = val + (term if r % 2 == 0 else -term)
        for r in range(k + 1):
            for s in range(r + 1, k + 1):
                br = bracket(E, basis[T[r]], basis[T[s]])
                rest = tuple(T[t] for t in range(k + 1) if t not in (r, s))
                term = alg_form_eval(
                    AlgForm(E.base, E.rank, k, mu.comps), [br] + [basis[u] for u in rest]
                )
                if not term.is_zero():
                    val = val + (term if (r + s) % 2 == 0 else -term)
        if not val.is_zero():
            out[T] = val
    return AlgForm(E.base, E.rank, k + 1, out)


def cartan_on_sections(E: AlgebroidData, mu: AlgForm, sections: Sequence[Section]) -> Poly:
    """The Cartan formula evaluated directly on arbitrary polynomial sections.

    Used to validate that alg_d (frame components plus tensorial extension)
    agrees with the literal affine-side formula on non-frame arguments.
    """
    k = mu.degree
    if len(sections) != k + 1:
        raise ValueError(f"expected {k + 1} sections")
    total = Poly.zero(E.base)
    for r in range(k + 1):
        rest = [sections[t] for t in range(k + 1) if t != r]
        inner = alg_form_eval(mu, rest)
        term = anchor_apply(E, sections[r], inner)
        total = total + (term if r % 2 == 0 else -term)
    for r in range(k + 1):
        for s in range(r + 1, k + 1):
            br = bracket(E, sections[r], sections[s])
            rest = [sections[t] for t in range(k + 1) if t not in (r, s)]
            term = alg_form_eval(mu, [br] + rest)
            total = total + (term if (r + s) % 2 == 0 else -term)
    return total


def d_squared_report(E: AlgebroidData) -> CheckReport:
    """Decide whether the frame data defines a differential on affine forms.

    The affine differential exists only when brackets of affine sections stay
    in the model bundle (equivalently d phi = 0, with phi the slot-0 frame
    covector); given that, d^2 = 0 on the spanning family of coordinate
    0-forms and frame-dual 1-forms decides the structural identities.
    """
    report = CheckReport("dsq")
    dphi = alg_d(E, phi_form(E.base, E.rank))
    report.add("dphi", dphi.is_zero(), "" if dphi.is_zero() else str(dphi))
    for name in E.base.names:
        f = AlgForm(E.base, E.rank, 0, {(): Poly.variable(E.base, name)})
        dd = alg_d(E, alg_d(E, f))
        report.add(f"ddfun.{name}", dd.is_zero(), "" if dd.is_zero() else str(dd))
    for u in range(E.rank):
        mu = frame_dual_form(E.base, E.rank, u)
        dd = alg_d(E, alg_d(E, mu))
        report.add(f"ddual.{u}", dd.is_zero(), "" if dd.is_zero() else str(dd))
    return report


# -- affine evaluation and extension ------------------------------------------


def _vec_of(arg) -> Section:
    # accepts an AffSection or a plain tuple of model-bundle components
    return getattr(arg, "vec", arg)


def hull_section_of_affine(rank: int, arg) -> Section:
    """Hull components (1, f^1, ..., f^n) of an affine section."""
    vec = _vec_of(arg)
    if len(vec) != rank - 1:
        raise ValueError("affine section length must be hull rank - 1")
    base = vec[0].ctx if vec else None
    one = Poly.const(base, 1)
    return (one,) + tuple(vec)


def aff_form_eval(mu: AlgForm, args: Sequence) -> Poly:
    """Value of an affine k-form on k affine sections (slot-0 coefficient 1)."""
    sections = [hull_section_of_affine(mu.rank, a) for a in args]
    return alg_form_eval(mu, sections)


def aff_form_extend(
    base: VarContext, rank: int, degree: int, values: Mapping[Index, Poly]
) -> AlgForm:
    """The unique hull form with prescribed values on the affine frame.

    The affine frame is a^o_0 = w_0 and a^o_i = w_0 + w_i; values are given
    for every strictly increasing degree-tuple over {0..rank-1}.  The change
    of basis is unimodular triangular, so the solve is exact.
    """
    if degree == 0:
        return AlgForm(base, rank, 0, {(): values.get((), Poly.zero(base))})
    vals: dict[Index, Poly] = {}
    for T in combinations(range(rank), degree):
        vals[T] = values.get(T, Poly.zero(base))
    comps: dict[Index, Poly] = {}
    # tuples containing slot 0: value reads the component directly
    for T in combinations(range(rank), degree):
        if T[0] == 0:
            comps[T] = vals[T]
    # remaining tuples: subtract the single-w_0 corrections
    for T in combinations(range(rank), degree):
        if T[0] == 0:
            continue
        corr = Poly.zero(base)
        for r in range(degree):
            omitted = T[:r] + T[r + 1 :]
            key = (0,) + omitted
            term = comps.get(key, Poly.zero(base))
            corr = corr + (term if r % 2 == 0 else -term)
        comps[T] = vals[T] - corr
    return AlgForm(base, rank, degree, comps)


def aff_form_values(mu: AlgForm) -> dict[Index, Poly]:
    """Values of a hull form on the affine frame; inverse of aff_form_extend."""
    basis_aff = []
    for u in range(mu.rank):
        vec = tuple(
            Poly.const(mu.base, 1) if i + 1 == u else Poly.zero(mu.base)
            for i in range(mu.rank - 1)
        )
        basis_aff.append(vec)
    out: dict[Index, Poly] = {}
    for T in combinations(range(mu.rank), mu.degree):
        out[T] = aff_form_eval(mu, [basis_aff[u] for u in T])
    return out


def aff_d(A, mu: AlgForm) -> AlgForm:
    """Affine exterior derivative, computed through the vector hull."""
    from .affgebroid import build_hull  # deferred: affgebroid imports this module

    return alg_d(build_hull(A).alg, mu)


def reduce_mod_phi(mu: AlgForm) -> AlgForm:
    """Quotient by the ideal generated by phi: drop slot-0 components.

    The result is a form over the model-bundle frame (indices shifted down
    by one); the quotient differential is the model-algebroid differential,
    and reduce_mod_phi intertwines the two.
    """
    out: dict[Index, Poly] = {}
    for idx, poly in mu.comps.items():
        if 0 in idx:
            continue
        out[tuple(i - 1 for i in idx)] = poly
    return AlgForm(mu.base, mu.rank - 1, mu.degree, out)
