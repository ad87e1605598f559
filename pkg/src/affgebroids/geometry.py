"""Multivector fields and differential forms on a coordinate patch.

Components are stored sparsely on strictly increasing index tuples over the
variables of a :class:`~affgebroids.polyring.VarContext`; alternation is
handled by permutation-sign normalization at insertion.  Degree-0 objects
are plain polynomials stored under the empty tuple.

The Schouten-Nijenhuis bracket convention is pinned by two requirements:
on a pair of vector fields it is the Lie bracket, and on a vector field and
a function [X, f] = X(f), [f, X] = -X(f).  Every other sign then follows
from graded antisymmetry

    [P, Q] = -(-1)^{(p-1)(q-1)} [Q, P]

and the graded Leibniz rule

    [P, Q ^ R] = [P, Q] ^ R + (-1)^{(p-1) q} Q ^ [P, R].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .polyring import Poly, VarContext

Index = tuple[int, ...]


def _sort_with_sign(idx: Sequence[int]) -> tuple[Index | None, int]:
    """Sort an index tuple, returning (sorted tuple, permutation sign).

    Returns (None, 0) when an index repeats (the component vanishes).
    """
    idx = list(idx)
    sign = 1
    for i in range(1, len(idx)):  # insertion sort, counting swaps
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return None, 0
    return tuple(idx), sign


def _merge_sign(left: Index, right: Index) -> tuple[Index | None, int]:
    """Merge two increasing tuples into one, with the shuffle sign."""
    if set(left) & set(right):
        return None, 0
    return _sort_with_sign(left + right)


class _SkewTensor:
    """Shared storage/arithmetic for multivectors and forms."""

    __slots__ = ("ctx", "degree", "comps")

    def __init__(self, ctx: VarContext, degree: int, comps: Mapping[Index, Poly]):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        clean: dict[Index, Poly] = {}
        for idx, poly in comps.items():
            idx = tuple(idx)
            if len(idx) != degree or any(not 0 <= i < len(ctx) for i in idx):
                raise ValueError(f"bad index tuple {idx} for degree {degree}")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} not strictly increasing")
            if poly.ctx != ctx:
                raise ValueError("component context mismatch")
            if not poly.is_zero():
                clean[idx] = poly
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "comps", clean)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def zero(cls, ctx: VarContext, degree: int):
        return cls(ctx, degree, {})

    @classmethod
    def function(cls, f: Poly):
        return cls(f.ctx, 0, {(): f})

    @classmethod
    def from_components(cls, ctx: VarContext, degree: int, items: Mapping[Index, Poly]):
        """Build from possibly unsorted index tuples, normalizing signs."""
        acc: dict[Index, Poly] = {}
        for idx, poly in items.items():
            key, sign = _sort_with_sign(idx)
            if key is None:
                continue
            term = poly if sign == 1 else -poly
            acc[key] = acc.get(key, Poly.zero(ctx)) + term
        return cls(ctx, degree, acc)

    def comp(self, idx: Sequence[int]) -> Poly:
        """Component on an arbitrary index tuple (sign-normalized)."""
        key, sign = _sort_with_sign(idx)
        if key is None:
            return Poly.zero(self.ctx)
        poly = self.comps.get(key, Poly.zero(self.ctx))
        return poly if sign == 1 else -poly

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other) -> bool:
        if not isinstance(other, type(self)):
            return NotImplemented
        return (
            self.ctx == other.ctx
            and self.degree == other.degree
            and self.comps == other.comps
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other):
        if type(other) is not type(self) or other.ctx != self.ctx or other.degree != self.degree:
            raise ValueError("can only add like tensors over the same context")
        out = dict(self.comps)
        for idx, poly in other.comps.items():
            out[idx] = out.get(idx, Poly.zero(self.ctx)) + poly
        return type(self)(self.ctx, self.degree, out)

    def __neg__(self):
        return type(self)(self.ctx, self.degree, {i: -p for i, p in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        """Left module action of polynomials (and rational scalars)."""
        if isinstance(scalar, (int, Fraction)):
            scalar = Poly.const(self.ctx, scalar)
        if not isinstance(scalar, Poly):
            return NotImplemented
        return type(self)(
            self.ctx, self.degree, {i: scalar * p for i, p in self.comps.items()}
        )

    __rmul__ = __mul__

    def __str__(self) -> str:
        if not self.comps:
            return "0"
        names = self.ctx.names
        pieces = []
        for idx in sorted(self.comps):
            label = ",".join(names[i] for i in idx) if idx else "1"
            pieces.append(f"[{label}] {self.comps[idx]}")
        return "; ".join(pieces)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


class Multivector(_SkewTensor):
    """Skew contravariant tensor field; degree 1 is a vector field."""


class DiffForm(_SkewTensor):
    """Skew covariant tensor field; degree 1 is a one-form."""


VecField = Multivector  # degree-1 multivector, by convention


def vector_field(ctx: VarContext, comps: Sequence[Poly]) -> Multivector:
    """Vector field from one component polynomial per context variable."""
    if len(comps) != len(ctx):
        raise ValueError("one component per variable required")
    return Multivector(ctx, 1, {(i,): p for i, p in enumerate(comps)})


def vf_comps(X: Multivector) -> tuple[Poly, ...]:
    if X.degree != 1:
        raise ValueError("not a vector field")
    return tuple(X.comp((i,)) for i in range(len(X.ctx)))


def vf_apply(X: Multivector, f: Poly) -> Poly:
    """Derivative of a function along a vector field."""
    if X.degree != 1:
        raise ValueError("not a vector field")
    out = Poly.zero(X.ctx)
    for (i,), comp in X.comps.items():
        out = out + comp * f.partial(X.ctx.names[i])
    return out


def _binary_check(P: _SkewTensor, Q: _SkewTensor) -> None:
    if P.ctx != Q.ctx:
        raise ValueError("context mismatch")


def wedge_mv(P: Multivector, Q: Multivector) -> Multivector:
    """Alternating product; graded-commutative.  Degree overflow gives zero."""
    _binary_check(P, Q)
    out: dict[Index, Poly] = {}
    for i1, p1 in P.comps.items():
        for i2, p2 in Q.comps.items():
            key, sign = _merge_sign(i1, i2)
            if key is None:
                continue
            term = p1 * p2 if sign == 1 else -(p1 * p2)
            out[key] = out.get(key, Poly.zero(P.ctx)) + term
    return Multivector(P.ctx, P.degree + Q.degree, out)


def wedge_form(mu: DiffForm, nu: DiffForm) -> DiffForm:
    _binary_check(mu, nu)
    out: dict[Index, Poly] = {}
    for i1, p1 in mu.comps.items():
        for i2, p2 in nu.comps.items():
            key, sign = _merge_sign(i1, i2)
            if key is None:
                continue
            term = p1 * p2 if sign == 1 else -(p1 * p2)
            out[key] = out.get(key, Poly.zero(mu.ctx)) + term
    return DiffForm(mu.ctx, mu.degree + nu.degree, out)


def sn_bracket(P: Multivector, Q: Multivector) -> Multivector:
    """Schouten-Nijenhuis bracket of multivector fields, degree p + q - 1.

    Computed termwise in odd-coordinate form: for P of degree p and Q of
    degree q the bracket is

        sum_a [ (-1)^(p+1) dP/dth_a ^ dQ/dx_a
                + (-1)^(p(q-1)+1) dQ/dth_a ^ dP/dx_a ]

    with dth the left Grassmann derivative; the signs realize the convention
    stated in the module docstring.
    """
    _binary_check(P, Q)
    p, q = P.degree, Q.degree
    ctx = P.ctx
    names = ctx.names
    out: dict[Index, Poly] = {}
    degree = max(p + q - 1, 0)
    if p + q == 0:
        return Multivector.zero(ctx, 0)

    def accumulate(sign_const: int, A: Multivector, B: Multivector) -> None:
        # sign_const * sum_a (dA/dth_a) ^ (dB/dx_a)
        for idxA, fA in A.comps.items():
            for r, a in enumerate(idxA):
                rest = idxA[:r] + idxA[r + 1 :]
                theta_sign = -1 if r % 2 else 1
                for idxB, fB in B.comps.items():
                    d = fB.partial(names[a])
                    if d.is_zero():
                        continue
                    key, merge = _merge_sign(rest, idxB)
                    if key is None:
                        continue
                    coeff = sign_const * theta_sign * merge
                    term = fA * d
                    out[key] = out.get(key, Poly.zero(ctx)) + (
                        term if coeff == 1 else -term
                    )

    accumulate((-1) ** (p + 1), P, Q)
    accumulate((-1) ** (p * (q - 1) + 1), Q, P)
    return Multivector(ctx, degree, out)


# -- forms: d, contraction, pairing ------------------------------------------


def d_poly(f: Poly) -> DiffForm:
    """Exterior differential of a function."""
    return DiffForm(
        f.ctx, 1, {(i,): f.partial(name) for i, name in enumerate(f.ctx.names)}
    )


def d_form(mu: DiffForm) -> DiffForm:
    """De Rham differential on the coordinate patch."""
    ctx = mu.ctx
    out: dict[Index, Poly] = {}
    for idx, poly in mu.comps.items():
        for a, name in enumerate(ctx.names):
            d = poly.partial(name)
            if d.is_zero():
                continue
            key, sign = _merge_sign((a,), idx)
            if key is None:
                continue
            out[key] = out.get(key, Poly.zero(ctx)) + (d if sign == 1 else -d)
    return DiffForm(ctx, mu.degree + 1, out)


def contract(X: Multivector, mu: DiffForm) -> DiffForm:
    """Interior product of a vector field with a form."""
    if X.degree != 1:
        raise ValueError("contraction implemented for vector fields")
    _binary_check(X, mu)
    if mu.degree == 0:
        return DiffForm.zero(mu.ctx, 0)
    out: dict[Index, Poly] = {}
    for (b,), comp in X.comps.items():
        for idx, poly in mu.comps.items():
            if b not in idx:
                continue
            r = idx.index(b)
            rest = idx[:r] + idx[r + 1 :]
            sign = -1 if r % 2 else 1
            term = comp * poly
            out[rest] = out.get(rest, Poly.zero(mu.ctx)) + (
                term if sign == 1 else -term
            )
    return DiffForm(mu.ctx, mu.degree - 1, out)


def pairing(P: Multivector, mu: DiffForm) -> Poly:
    """Full contraction of a degree-k multivector with a degree-k form."""
    _binary_check(P, mu)
    if P.degree != mu.degree:
        raise ValueError("pairing requires equal degrees")
    out = Poly.zero(P.ctx)
    for idx, poly in P.comps.items():
        other = mu.comps.get(idx)
        if other is not None:
            out = out + poly * other
    return out


def poisson_apply(Lam: Multivector, f: Poly, g: Poly) -> Poly:
    """Bracket {f, g} = <Lam, df ^ dg> of a bivector field."""
    if Lam.degree != 2:
        raise ValueError("bivector field required")
    return pairing(Lam, wedge_form(d_poly(f), d_poly(g)))


def lie_derivative(X: Multivector, T: Multivector | DiffForm):
    """Lie derivative along a vector field.

    On multivectors this is sn_bracket(X, .); on forms it is computed by the
    Cartan magic formula L_X = i_X d + d i_X.  Degree is preserved, and on
    degree-0 objects both routes give X(f).
    """
    if X.degree != 1:
        raise ValueError("Lie derivative requires a vector field")
    if isinstance(T, Multivector):
        return sn_bracket(X, T)
    if isinstance(T, DiffForm):
        _binary_check(X, T)
        return contract(X, d_form(T)) + d_form(contract(X, T))
    raise TypeError(f"cannot take Lie derivative of {type(T).__name__}")


# -- Gerstenhaber pairs --------------------------------------------------------


@dataclass(frozen=True)
class GerstPair:
    """Pair (top, low) of multivectors of degrees n and n-1.

    Encodes a skew multi-affine derivation of degree n on sections of a
    trivialized one-dimensional affine bundle; low is None exactly when
    n = 0 (a plain function).
    """

    top: Multivector
    low: Multivector | None

    def __post_init__(self) -> None:
        n = self.top.degree
        if n == 0:
            if self.low is not None:
                raise ValueError("degree-0 pair carries no lower component")
        else:
            if self.low is None:
                raise ValueError(f"degree-{n} pair requires a lower component")
            if self.low.ctx != self.top.ctx:
                raise ValueError("context mismatch in pair")
            if self.low.degree != n - 1:
                raise ValueError("lower component must have degree one less")

    @property
    def degree(self) -> int:
        return self.top.degree

    @property
    def ctx(self) -> VarContext:
        return self.top.ctx

    def is_zero(self) -> bool:
        return self.top.is_zero() and (self.low is None or self.low.is_zero())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GerstPair):
            return NotImplemented
        return self.top == other.top and self.low == other.low


def gerst_pair(top: Multivector, low: Multivector | None) -> GerstPair:
    return GerstPair(top, low)


def _pair_from_parts(degree: int, ctx: VarContext, top: Multivector, low_parts):
    low = None
    if degree >= 1:
        low = Multivector.zero(ctx, degree - 1)
        for part in low_parts:
            low = low + part
    return GerstPair(top, low)


def gerst_wedge(A: GerstPair, B: GerstPair) -> GerstPair:
    """Product (X_n ^ Y_k, X_{n-1} ^ Y_k + (-1)^n X_n ^ Y_{k-1})."""
    if A.ctx != B.ctx:
        raise ValueError("context mismatch")
    n, k = A.degree, B.degree
    top = wedge_mv(A.top, B.top)
    parts = []
    if A.low is not None:
        parts.append(wedge_mv(A.low, B.top))
    if B.low is not None:
        term = wedge_mv(A.top, B.low)
        parts.append(term if n % 2 == 0 else -term)
    return _pair_from_parts(n + k, A.ctx, top, parts)


def gerst_sn(A: GerstPair, B: GerstPair) -> GerstPair:
    """Bracket ([X_n, Y_k], [X_{n-1}, Y_k] + (-1)^{n-1} [X_n, Y_{k-1}])."""
    if A.ctx != B.ctx:
        raise ValueError("context mismatch")
    n, k = A.degree, B.degree
    top = sn_bracket(A.top, B.top)
    degree = max(n + k - 1, 0)
    parts = []
    if degree >= 1:
        if A.low is not None:
            parts.append(sn_bracket(A.low, B.top))
        if B.low is not None:
            term = sn_bracket(A.top, B.low)
            parts.append(term if (n - 1) % 2 == 0 else -term)
    return _pair_from_parts(degree, A.ctx, top, parts)


def gerst_eval(A: GerstPair, args: Sequence[Poly]) -> Poly:
    """Value of the degree-n derivation on n sections given relative to a
    reference: <X_n, df_1 ^ ... ^ df_n> + sum_i (-1)^i <X_{n-1}, omit df_i>.
    """
    n = A.degree
    if len(args) != n:
        raise ValueError(f"expected {n} arguments, got {len(args)}")
    ctx = A.ctx
    dfs = [d_poly(f) for f in args]

    def wedge_all(forms: Sequence[DiffForm]) -> DiffForm:
        out = DiffForm.function(Poly.const(ctx, 1))
        for form in forms:
            out = wedge_form(out, form)
        return out

    total = pairing(A.top, wedge_all(dfs))
    if A.low is not None:
        for i in range(1, n + 1):
            omitted = dfs[: i - 1] + dfs[i:]
            term = pairing(A.low, wedge_all(omitted))
            total = total + (term if i % 2 == 0 else -term)
    return total
