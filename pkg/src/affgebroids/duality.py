"""Affine / special-vector duality: pairings, orbit models, span checks.

Fibre-level constructions (the orbit model of the dual of an affine bundle,
the one-dimensional dual with its glued vector structure, pairing
nondegeneracy, span lemmas) are evaluated pointwise over exact rationals.
Bundle-level constructions (linear sections of an epimorphism and their
pullback functions) are polynomial-global.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .polyring import Poly, VarContext
from .reports import CheckReport

FibrePoint = tuple[Fraction, ...]


def fibre_point(values: Sequence) -> FibrePoint:
    return tuple(Fraction(v) for v in values)


def _dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


# -- the orbit model of the dual of an affine fibre ------------------------------


@dataclass(frozen=True)
class DualTriple:
    """Representative (a, phi, t) of an affine function b -> phi(b - a) + t."""

    a: FibrePoint
    phi: FibrePoint
    t: Fraction

    def __post_init__(self) -> None:
        if len(self.a) != len(self.phi):
            raise ValueError("base point and covector must have equal length")
        object.__setattr__(self, "a", fibre_point(self.a))
        object.__setattr__(self, "phi", fibre_point(self.phi))
        object.__setattr__(self, "t", Fraction(self.t))


def eta_value(d: DualTriple, b: Sequence) -> Fraction:
    """Evaluate the affine function represented by the triple at b."""
    b = fibre_point(b)
    if len(b) != len(d.a):
        raise ValueError("dimension mismatch")
    return _dot(d.phi, tuple(x - y for x, y in zip(b, d.a))) + d.t


def eta_move(d: DualTriple, u: Sequence) -> DualTriple:
    """The model-bundle action (a, phi, t) -> (a + u, phi, t + phi(u))."""
    u = fibre_point(u)
    return DualTriple(
        tuple(x + y for x, y in zip(d.a, u)), d.phi, d.t + _dot(d.phi, u)
    )


def eta_orbit_equal(d1: DualTriple, d2: DualTriple) -> bool:
    """True iff the triples represent the same affine function."""
    if len(d1.a) != len(d2.a):
        raise ValueError("dimension mismatch")
    if d1.phi != d2.phi:
        return False
    shift = tuple(x - y for x, y in zip(d2.a, d1.a))
    return d2.t == d1.t + _dot(d1.phi, shift)


@dataclass(frozen=True)
class HullTriple:
    """Representative (a, v, s) of a hull element; s is the reference weight."""

    a: FibrePoint
    v: FibrePoint
    s: Fraction

    def __post_init__(self) -> None:
        if len(self.a) != len(self.v):
            raise ValueError("base point and vector must have equal length")
        object.__setattr__(self, "a", fibre_point(self.a))
        object.__setattr__(self, "v", fibre_point(self.v))
        object.__setattr__(self, "s", Fraction(self.s))


def hull_move(e: HullTriple, u: Sequence) -> HullTriple:
    """The dual action (a, v, s) -> (a - u, v + s u, s)."""
    u = fibre_point(u)
    return HullTriple(
        tuple(x - y for x, y in zip(e.a, u)),
        tuple(x + e.s * y for x, y in zip(e.v, u)),
        e.s,
    )


def pairing60(d: DualTriple, e: HullTriple) -> Fraction:
    """Canonical pairing <[(a, phi, t)], [(a', v, s)]> = phi(v) + s phi(a'-a) + s t."""
    if len(d.a) != len(e.a):
        raise ValueError("dimension mismatch")
    shift = tuple(x - y for x, y in zip(e.a, d.a))
    return _dot(d.phi, e.v) + e.s * _dot(d.phi, shift) + e.s * d.t


def embed_affine_point(b: Sequence) -> HullTriple:
    """The canonical inclusion of an affine point into the hull: b -> [(b, 0, 1)]."""
    b = fibre_point(b)
    return HullTriple(b, tuple(Fraction(0) for _ in b), Fraction(1))


# -- the one-dimensional dual in glued coordinates --------------------------------


@dataclass(frozen=True)
class ZDualElem:
    """Affine function on a one-dimensional fibre, in glued coordinates.

    coeff != 0: the function a (y - root) vanishing at `root` with slope
    `coeff`; coeff == 0: the constant function with value `root`.
    """

    root: Fraction
    coeff: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "root", Fraction(self.root))
        object.__setattr__(self, "coeff", Fraction(self.coeff))

    def value_at(self, y) -> Fraction:
        y = Fraction(y)
        if self.coeff == 0:
            return self.root
        return self.coeff * (y - self.root)


def zdual_add(u: ZDualElem, w: ZDualElem) -> ZDualElem:
    """Pointwise sum of affine functions, written in glued coordinates."""
    s, a = u.root, u.coeff
    sp, ap = w.root, w.coeff
    if a != 0 and ap != 0:
        if a + ap != 0:
            return ZDualElem(s + ap / (a + ap) * (sp - s), a + ap)
        return ZDualElem(a * (sp - s), Fraction(0))
    if a == 0 and ap == 0:
        return ZDualElem(s + sp, Fraction(0))
    if a == 0:  # constant plus sloped
        return ZDualElem(sp - s / ap, ap)
    return ZDualElem(s - sp / a, a)


def zdual_scale(lam, u: ZDualElem) -> ZDualElem:
    """Scaling; lam = 0 collapses to the zero constant function."""
    lam = Fraction(lam)
    if u.coeff == 0:
        return ZDualElem(lam * u.root, Fraction(0))
    if lam == 0:
        return ZDualElem(Fraction(0), Fraction(0))
    return ZDualElem(u.root, lam * u.coeff)


def pairing62(f: tuple, g: tuple) -> Fraction:
    """Pairing of two affine functions on a one-dimensional fibre.

    Arguments are triples (z, s, t) representing f(y) = t + s (y - z).  The
    value equals X0(g) f - X0(f) g with X0 = -d/dy, which is constant in y:

        <f, g> = s t' - s' t + s s' (z - z').
    """
    z, s, t = (Fraction(v) for v in f)
    zp, sp, tp = (Fraction(v) for v in g)
    return s * tp - sp * t + s * sp * (z - zp)


# -- exact rational linear algebra -------------------------------------------------


def _row_reduce(rows: list[list[Fraction]]) -> tuple[int, list[list[Fraction]]]:
    """In-place Gauss-Jordan elimination; returns (rank, reduced rows)."""
    rows = [list(r) for r in rows]
    if not rows:
        return 0, rows
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, len(rows)):
            if rows[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = rows[rank][col]
        rows[rank] = [v / inv for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [v - factor * w for v, w in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank, rows


def matrix_rank(rows: Sequence[Sequence]) -> int:
    rank, _ = _row_reduce([[Fraction(v) for v in row] for row in rows])
    return rank


def null_vector(rows: Sequence[Sequence]) -> tuple[Fraction, ...] | None:
    """A nonzero rational vector in the kernel of the row space, if any."""
    rows = [[Fraction(v) for v in row] for row in rows]
    if not rows:
        return None
    ncols = len(rows[0])
    rank, red = _row_reduce(rows)
    if rank == ncols:
        return None
    pivots = []
    for r in range(rank):
        for c in range(ncols):
            if red[r][c] != 0:
                pivots.append(c)
                break
    free = next(c for c in range(ncols) if c not in pivots)
    vec = [Fraction(0)] * ncols
    vec[free] = Fraction(1)
    for r, c in enumerate(pivots):
        vec[c] = -red[r][free]
    return tuple(vec)


# -- span checks for the affine level set -----------------------------------------


@dataclass
class Lemma1Report:
    """Outcome of a span check: spanned, or short of samples (never 'false')."""

    power: int
    needed: int
    achieved: int
    variant: str

    @property
    def spanned(self) -> bool:
        return self.achieved == self.needed

    @property
    def insufficient(self) -> bool:
        return not self.spanned

    def __str__(self) -> str:
        status = "PASS" if self.spanned else "INSUFFICIENT (need more samples)"
        return (
            f"span[{self.variant}] degree {self.power}: rank {self.achieved}"
            f"/{self.needed} {status}"
        )


def sample_affine_points(
    phi: Sequence, count: int, seed: int = 0
) -> list[FibrePoint]:
    """Deterministic rational samples on the level set phi(v) = 1."""
    phi = fibre_point(phi)
    if all(c == 0 for c in phi):
        raise ValueError("covector must be nonzero")
    pivot = next(i for i, c in enumerate(phi) if c != 0)
    rng = random.Random(seed)
    out: list[FibrePoint] = []
    for _ in range(count):
        v = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in phi]
        partial = sum(
            (phi[i] * v[i] for i in range(len(phi)) if i != pivot), Fraction(0)
        )
        v[pivot] = (1 - partial) / phi[pivot]
        out.append(tuple(v))
    return out


def _wedge_coords(vectors: Sequence[FibrePoint], dim: int) -> list[Fraction]:
    """Coordinates of v_1 ^ ... ^ v_k in the increasing-minor basis."""
    k = len(vectors)
    coords = []
    for cols in combinations(range(dim), k):
        coords.append(_det([[vectors[r][c] for c in cols] for r in range(k)]))
    return coords


def _det(mat: list[list[Fraction]]) -> Fraction:
    n = len(mat)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return mat[0][0]
    total = Fraction(0)
    for j in range(n):
        if mat[0][j] == 0:
            continue
        minor = [[mat[r][c] for c in range(n) if c != j] for r in range(1, n)]
        term = mat[0][j] * _det(minor)
        total += term if j % 2 == 0 else -term
    return total


def lemma1_span_check(
    dim: int, phi: Sequence, k: int, samples: Sequence[FibrePoint]
) -> tuple[Lemma1Report, Lemma1Report]:
    """Check that wedge powers built from the affine level set span.

    Variant 'affine': products a_1 ^ ... ^ a_k of level-set points.
    Variant 'mixed': a ^ v_1 ^ ... ^ v_{k-1} with v_i differences of
    level-set points (hence in the kernel of the covector).
    PASS = full rank; a deficit only requests more samples.
    """
    phi = fibre_point(phi)
    if len(phi) != dim:
        raise ValueError("covector length must equal the dimension")
    if all(c == 0 for c in phi):
        raise ValueError("covector must be nonzero: empty affine level set")
    if not 1 <= k <= dim:
        raise ValueError("wedge power out of range")
    for v in samples:
        if _dot(phi, v) != 1:
            raise ValueError(f"sample {v} is not on the level set")
    needed = len(list(combinations(range(dim), k)))

    def accumulate(row_iter) -> int:
        rows: list[list[Fraction]] = []
        rank = 0
        for row in row_iter:
            rows.append(row)
            if len(rows) % needed == 0 or len(rows) >= needed:
                rank = matrix_rank(rows)
                if rank == needed:
                    return rank
        return matrix_rank(rows) if rows else 0

    affine_rows = (
        _wedge_coords([samples[i] for i in tup], dim)
        for tup in combinations(range(len(samples)), k)
    )
    affine = Lemma1Report(k, needed, accumulate(affine_rows), "affine")

    kernel = [
        tuple(x - y for x, y in zip(samples[i], samples[0]))
        for i in range(1, len(samples))
    ]
    mixed_rows = (
        _wedge_coords([samples[a_idx]] + [kernel[i] for i in tup], dim)
        for a_idx in range(len(samples))
        for tup in combinations(range(len(kernel)), k - 1)
    )
    mixed = Lemma1Report(k, needed, accumulate(mixed_rows), "mixed")
    return affine, mixed


# -- pairing nondegeneracy (fibre level) -------------------------------------------


@dataclass(frozen=True)
class PairingData:
    """Bi-affine pairing <a, v> = sum_j (c_j + sum_i B_ij a_i) v_j at a fibre.

    B has one row per affine coordinate of the left fibre and one column per
    vector coordinate of the right fibre; phi0 is the distinguished section.
    """

    linear: tuple[tuple[Fraction, ...], ...]  # B, n_A rows x n_V cols
    constant: tuple[Fraction, ...]  # c, n_V entries
    phi0: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "linear", tuple(tuple(Fraction(v) for v in row) for row in self.linear)
        )
        object.__setattr__(self, "constant", fibre_point(self.constant))
        object.__setattr__(self, "phi0", fibre_point(self.phi0))
        for row in self.linear:
            if len(row) != len(self.constant):
                raise ValueError("linear block and constant row sizes disagree")
        if len(self.phi0) != len(self.constant):
            raise ValueError("distinguished section has wrong length")

    @property
    def n_affine(self) -> int:
        return len(self.linear)

    @property
    def n_vector(self) -> int:
        return len(self.constant)

    def value(self, a: Sequence, v: Sequence) -> Fraction:
        a = fibre_point(a)
        v = fibre_point(v)
        total = _dot(self.constant, v)
        for i in range(self.n_affine):
            total += a[i] * _dot(self.linear[i], v)
        return total


def canonical_pairing(n_affine: int) -> PairingData:
    """The evaluation pairing of an affine fibre against its dual fibre."""
    rows = []
    for i in range(n_affine):
        rows.append(
            tuple(
                Fraction(1) if j == i else Fraction(0) for j in range(n_affine + 1)
            )
        )
    constant = tuple(
        Fraction(1) if j == n_affine else Fraction(0) for j in range(n_affine + 1)
    )
    phi0 = constant
    return PairingData(tuple(rows), constant, phi0)


def pairing_iso_check(p: PairingData) -> CheckReport:
    """Decide whether the pairing induces isomorphisms on both sides.

    Unit condition: <a, phi0> = 1 for every a.  Nondegeneracy plus the
    dimension count n_V = n_A + 1 force both induced maps to be bijective;
    rank deficits are reported with an exact kernel witness.
    """
    report = CheckReport("pairing")
    unit_linear = all(_dot(row, p.phi0) == 0 for row in p.linear)
    unit_const = _dot(p.constant, p.phi0) == 1
    report.add(
        "unit",
        unit_linear and unit_const,
        "" if unit_linear and unit_const else f"<a, phi0> != 1",
    )
    report.add(
        "dimension",
        p.n_vector == p.n_affine + 1,
        f"n_V={p.n_vector}, n_A={p.n_affine}",
    )
    stacked = [list(row) for row in p.linear] + [list(p.constant)]
    rank_right = matrix_rank(stacked)
    witness = ""
    if rank_right != p.n_vector:
        kern = null_vector(stacked)
        witness = f"kernel {kern}"
    report.add("right_injective", rank_right == p.n_vector, witness)
    rank_left = matrix_rank([list(row) for row in p.linear])
    report.add(
        "left_injective",
        rank_left == p.n_affine,
        "" if rank_left == p.n_affine else f"linear block rank {rank_left}",
    )
    return report


# -- epimorphisms of vector bundles -------------------------------------------------


@dataclass(frozen=True)
class EpiData:
    """A corank-one epimorphism in adapted coordinates.

    Total-space fibre coordinates are (y_1..y_n, z); the kernel is the z
    direction, generated by the section phi = (0, .., 0, 1), and the
    projection drops z.  Linear sections are matrices f^i(x) via
    sigma(x, y) = (x, y, f^i(x) y_i).
    """

    base: VarContext
    fiber_names: tuple[str, ...]
    kernel_name: str

    def __post_init__(self) -> None:
        if self.base.fiber_vars:
            raise ValueError("base context must be fiber-free")

    @property
    def n(self) -> int:
        return len(self.fiber_names)

    @property
    def ctx(self) -> VarContext:
        return self.base.with_fibers(self.fiber_names + (self.kernel_name,))


def linsec_to_fsigma(e: EpiData, section: Sequence[Poly]) -> Poly:
    """Pullback function of a linear section: f_sigma = -f^i(x) y_i + z."""
    if len(section) != e.n:
        raise ValueError("one matrix entry per quotient fibre coordinate")
    ctx = e.ctx
    out = Poly.variable(ctx, e.kernel_name)
    for name, fi in zip(e.fiber_names, section):
        out = out - fi.in_context(ctx) * Poly.variable(ctx, name)
    return out


def a_sigma_coords(e: EpiData, section: Sequence[Poly]) -> tuple[Poly, ...]:
    """Dual-side coordinates of the section: (-f^i(x), 1)."""
    return tuple(-fi for fi in section) + (Poly.const(e.base, 1),)


def fsigma_to_linsec(e: EpiData, f: Poly) -> tuple[Poly, ...]:
    """Inverse of :func:`linsec_to_fsigma`.

    Requires f to be fiberwise linear with unit value on the kernel
    generator (coefficient 1 on z and no fibre-free part).
    """
    ctx = e.ctx
    if f.ctx != ctx:
        raise ValueError("function must live on the total space")
    rest = f
    out = []
    for name in e.fiber_names:
        coeff = f.partial(name)
        if any(coeff.degree_in(v) for v in ctx.fiber_vars):
            raise ValueError("function is not fiberwise linear")
        out.append(-coeff.in_context(e.base))
        rest = rest.subs(name, Poly.zero(ctx))
    zcoeff = rest.partial(e.kernel_name)
    if any(zcoeff.degree_in(v) for v in ctx.fiber_vars):
        raise ValueError("function is not fiberwise linear")
    if zcoeff != Poly.const(ctx, 1):
        raise ValueError("function does not take value 1 on the kernel generator")
    rest = rest.subs(e.kernel_name, Poly.zero(ctx))
    if not rest.is_zero():
        raise ValueError("function has an affine part; linear sections only")
    return tuple(out)


@dataclass(frozen=True)
class SplitData:
    """Projection/section package induced by one linear section."""

    projector: tuple[tuple[Poly, ...], ...]  # fibre matrix of E1 -> K projection
    fsigma: Poly
    a_sigma: tuple[Poly, ...]
    dual_section: tuple[Poly, ...]  # embedding K* -> E1*, coordinates of p*(1)
    dual_projector: tuple[tuple[Poly, ...], ...]  # E1* -> E1*, image = quotient duals


def thm16_chain(e: EpiData, section: Sequence[Poly]) -> SplitData:
    """All equivalent packagings of a linear section of the epimorphism."""
    n = e.n
    zero = Poly.zero(e.base)
    one = Poly.const(e.base, 1)
    proj = [[zero for _ in range(n + 1)] for _ in range(n + 1)]
    for j in range(n):
        proj[n][j] = -section[j]
    proj[n][n] = one
    dual_sec = tuple(-fi for fi in section) + (one,)
    dproj = [[zero for _ in range(n + 1)] for _ in range(n + 1)]
    for i in range(n):
        dproj[i][i] = one
        dproj[n][i] = section[i]
    return SplitData(
        tuple(tuple(row) for row in proj),
        linsec_to_fsigma(e, section),
        a_sigma_coords(e, section),
        dual_sec,
        tuple(tuple(row) for row in dproj),
    )


def matrix_compose(
    A: Sequence[Sequence[Poly]], B: Sequence[Sequence[Poly]]
) -> tuple[tuple[Poly, ...], ...]:
    """Composition (A after B) of fibre endomorphisms in row = output form."""
    size = len(A)
    base = A[0][0].ctx
    out = [[Poly.zero(base) for _ in range(size)] for _ in range(size)]
    for i in range(size):
        for j in range(size):
            acc = Poly.zero(base)
            for k in range(size):
                acc = acc + A[i][k] * B[k][j]
            out[i][j] = acc
    return tuple(tuple(row) for row in out)
