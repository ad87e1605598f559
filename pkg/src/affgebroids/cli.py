"""Batch front end: load a bundle description file, run a named computation
or verification suite, print a canonical report.

The input format is line-oriented; `#` starts a comment and `;` separates
several statements on one line.  Every statement is `key: value`:

    base.dim: <nat>            base.coords: <name> <name> ...
    bundle.rank: <nat>         bundle.frame: <name> ...
    anchor.<frame>: <poly>, ...                  # dim components
    struct.<frame>.<frame>: <poly>, ...          # rank frame components
    qder.matrix.<frame>: <poly>, ...             # row of the matrix
    qder.anchor: <poly>, ...                     # dim components
    poisson.lambda.<i>.<j>: <poly>               # 1-based coordinate pair, i < j
    poisson.d: <poly>, ...                       # dim components
    form.<k>.<frame>...: <poly>                  # k frame names, frame order
    mech.dim: <nat>            mech.H: <poly>

Missing anchor rows and structure entries default to zero.  Output is
deterministic: identical input produces byte-identical reports, and the
exit code is 0 exactly when no FAIL line was printed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .affgebroid import (
    AffgebroidData,
    AffSection,
    HullAlgebroid,
    HullRestrictionError,
    aff_bracket,
    aff_lift,
    build_hull,
    check_affgebroid,
    check_thm11,
    check_thm13,
    restrict_hull,
)
from .affpoisson import (
    AffPoissonData,
    check_affpoisson,
    check_correspondence,
    check_reductions,
    mechanics_demo,
    phase_context,
)
from .algebroid import (
    AlgebroidData,
    QuasiDer,
    bracket,
    check_jacobi,
    dual_linear_poisson,
    make_algebroid,
    sec_str,
    vf_comps,
)
from .calculus import AlgForm, alg_d, d_squared_report
from .geometry import Multivector, sn_bracket, vector_field
from .polyring import ParseError, Poly, VarContext, parse_poly, parse_poly_list
from .reports import CheckReport

COMMANDS = (
    "verify",
    "bracket",
    "affbracket",
    "hull",
    "restrict",
    "d",
    "lift",
    "dualize",
    "affpoisson",
    "reductions",
    "mechdemo",
    "thm11",
    "thm13",
)


class SpecError(ValueError):
    """Parse or semantic error in a bundle description file."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass
class SpecFile:
    """Validated in-memory model of a bundle description file."""

    base: VarContext
    frame: tuple[str, ...] = ()
    anchor_rows: dict[str, tuple[Poly, ...]] = field(default_factory=dict)
    struct_entries: dict[tuple[str, str], tuple[Poly, ...]] = field(default_factory=dict)
    qder_rows: dict[str, tuple[Poly, ...]] = field(default_factory=dict)
    qder_anchor: tuple[Poly, ...] | None = None
    poisson_lambda: dict[tuple[int, int], Poly] = field(default_factory=dict)
    poisson_d: tuple[Poly, ...] | None = None
    forms: dict[tuple[int, tuple[int, ...]], Poly] = field(default_factory=dict)
    mech_dim: int | None = None
    mech_h: Poly | None = None

    @property
    def rank(self) -> int:
        return len(self.frame)

    def has_bundle(self) -> bool:
        return bool(self.frame)

    def has_qder(self) -> bool:
        return bool(self.qder_rows) or self.qder_anchor is not None

    def algebroid(self) -> AlgebroidData:
        if not self.has_bundle():
            raise SpecError("command needs a bundle block (bundle.rank / bundle.frame)")
        zero = Poly.zero(self.base)
        anchor = []
        for name in self.frame:
            anchor.append(list(self.anchor_rows.get(name, (zero,) * len(self.base))))
        pairs = {}
        for (n1, n2), comps in self.struct_entries.items():
            i, j = self.frame.index(n1), self.frame.index(n2)
            if i < j:
                pairs[(i, j)] = list(comps)
        return make_algebroid(self.base, anchor, pairs)

    def quasider(self) -> QuasiDer:
        if not self.has_qder():
            raise SpecError("command needs a qder block (qder.matrix / qder.anchor)")
        zero = Poly.zero(self.base)
        rows = []
        for name in self.frame:
            rows.append(tuple(self.qder_rows.get(name, (zero,) * self.rank)))
        anchor = self.qder_anchor or (zero,) * len(self.base)
        return QuasiDer(self.base, tuple(rows), anchor)

    def affgebroid(self) -> AffgebroidData:
        return AffgebroidData(self.algebroid(), self.quasider())

    def hull_view(self) -> HullAlgebroid:
        return HullAlgebroid(self.algebroid())

    def poisson(self) -> AffPoissonData:
        if not self.poisson_lambda and self.poisson_d is None:
            raise SpecError("command needs a poisson block (poisson.lambda / poisson.d)")
        comps = {}
        for (i, j), poly in self.poisson_lambda.items():
            comps[(i - 1, j - 1)] = poly
        lam = Multivector(self.base, 2, comps)
        d_comps = self.poisson_d or (Poly.zero(self.base),) * len(self.base)
        return AffPoissonData(lam, vector_field(self.base, list(d_comps)))

    def mechanics(self) -> tuple[int, Poly]:
        if self.mech_dim is None or self.mech_h is None:
            raise SpecError("command needs a mech block (mech.dim / mech.H)")
        return self.mech_dim, self.mech_h


def _parse_nat(value: str, lineno: int) -> int:
    try:
        n = int(value)
    except ValueError:
        raise SpecError(f"expected a natural number, got {value!r}", lineno) from None
    if n < 0:
        raise SpecError(f"expected a natural number, got {value!r}", lineno)
    return n


def load_spec(path: str) -> SpecFile:
    """Parse and fully validate a bundle description file."""
    try:
        with open(path, encoding="utf-8") as handle:
            raw = handle.read()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc

    statements: list[tuple[int, str, str]] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = line.split("#", 1)[0]
        for piece in line.split(";"):
            piece = piece.strip()
            if not piece:
                continue
            if ":" not in piece:
                raise SpecError(f"expected 'key: value', got {piece!r}", lineno)
            key, value = piece.split(":", 1)
            statements.append((lineno, key.strip(), value.strip()))

    table = {key: (lineno, value) for lineno, key, value in statements}
    if "base.dim" not in table or "base.coords" not in table:
        raise SpecError("missing base.dim / base.coords")
    lineno, value = table["base.dim"]
    dim = _parse_nat(value, lineno)
    lineno, value = table["base.coords"]
    coords = tuple(value.split())
    if len(coords) != dim:
        raise SpecError(f"base.coords lists {len(coords)} names for base.dim {dim}", lineno)
    try:
        base = VarContext(coords)
    except ValueError as exc:
        raise SpecError(str(exc), lineno) from exc
    spec = SpecFile(base)

    frame: tuple[str, ...] = ()
    if "bundle.rank" in table or "bundle.frame" in table:
        if "bundle.rank" not in table or "bundle.frame" not in table:
            raise SpecError("bundle.rank and bundle.frame must appear together")
        lineno, value = table["bundle.rank"]
        rank = _parse_nat(value, lineno)
        lineno, value = table["bundle.frame"]
        frame = tuple(value.split())
        if len(frame) != rank:
            raise SpecError(
                f"bundle.frame lists {len(frame)} names for bundle.rank {rank}", lineno
            )
        if len(set(frame)) != len(frame):
            raise SpecError("duplicate frame names", lineno)
        spec.frame = frame

    def frame_index(name: str, lineno: int) -> int:
        if name not in frame:
            raise SpecError(f"undeclared frame name {name!r}", lineno)
        return frame.index(name)

    def polys(value: str, count: int, lineno: int) -> tuple[Poly, ...]:
        try:
            return parse_poly_list(value, base, count)
        except (ParseError, ValueError) as exc:
            raise SpecError(str(exc), lineno) from exc

    for lineno, key, value in statements:
        parts = key.split(".")
        if key in ("base.dim", "base.coords", "bundle.rank", "bundle.frame"):
            continue
        if parts[0] == "anchor" and len(parts) == 2:
            frame_index(parts[1], lineno)
            spec.anchor_rows[parts[1]] = polys(value, dim, lineno)
        elif parts[0] == "struct" and len(parts) == 3:
            i = frame_index(parts[1], lineno)
            j = frame_index(parts[2], lineno)
            if i == j:
                raise SpecError("diagonal structure functions must vanish", lineno)
            spec.struct_entries[(parts[1], parts[2])] = polys(value, len(frame), lineno)
        elif key == "qder.anchor":
            spec.qder_anchor = polys(value, dim, lineno)
        elif parts[:2] == ["qder", "matrix"] and len(parts) == 3:
            frame_index(parts[2], lineno)
            spec.qder_rows[parts[2]] = polys(value, len(frame), lineno)
        elif parts[:2] == ["poisson", "lambda"] and len(parts) == 4:
            i = _parse_nat(parts[2], lineno)
            j = _parse_nat(parts[3], lineno)
            if not (1 <= i < j <= dim):
                raise SpecError(
                    f"poisson.lambda indices must satisfy 1 <= i < j <= {dim}", lineno
                )
            spec.poisson_lambda[(i, j)] = polys(value, 1, lineno)[0]
        elif key == "poisson.d":
            spec.poisson_d = polys(value, dim, lineno)
        elif parts[0] == "form" and len(parts) >= 2:
            k = _parse_nat(parts[1], lineno)
            names = parts[2:]
            if len(names) != k:
                raise SpecError(f"form.{k} needs exactly {k} frame names", lineno)
            idx = tuple(frame_index(n, lineno) for n in names)
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise SpecError("form indices must be strictly increasing in frame order", lineno)
            spec.forms[(k, idx)] = polys(value, 1, lineno)[0]
        elif key == "mech.dim":
            spec.mech_dim = _parse_nat(value, lineno)
        elif key == "mech.H":
            if spec.mech_dim is None:
                raise SpecError("mech.dim must precede mech.H", lineno)
            ctx = phase_context(spec.mech_dim)
            try:
                spec.mech_h = parse_poly(value, ctx)
            except ParseError as exc:
                raise SpecError(str(exc), lineno) from exc
        else:
            raise SpecError(f"unknown key {key!r}", lineno)

    # skewness of explicitly given structure entries
    for (n1, n2), comps in spec.struct_entries.items():
        other = spec.struct_entries.get((n2, n1))
        if other is not None and tuple(-p for p in comps) != tuple(other):
            raise SpecError(f"struct.{n1}.{n2} is not the negative of struct.{n2}.{n1}")
    return spec


# -- commands ----------------------------------------------------------------------


def _section_arg(spec: SpecFile, text: str) -> tuple[Poly, ...]:
    return parse_poly_list(text, spec.base, spec.rank)


def _report_lines(report: CheckReport) -> list[str]:
    return report.lines()


def run_command(cmd: str, spec: SpecFile, args: list[str]) -> tuple[list[str], int]:
    """Execute one command; returns (output lines, exit code)."""
    if cmd not in COMMANDS:
        raise SpecError(f"unknown command {cmd!r}; choose from {', '.join(COMMANDS)}")
    lines: list[str] = []
    reports: list[CheckReport] = []

    if cmd == "verify":
        if spec.has_qder():
            reports.append(check_affgebroid(spec.affgebroid()))
        else:
            reports.append(check_jacobi(spec.algebroid()))
    elif cmd == "bracket":
        if len(args) != 2:
            raise SpecError("bracket needs two section arguments")
        E = spec.algebroid()
        X = _section_arg(spec, args[0])
        Y = _section_arg(spec, args[1])
        lines.append(f"bracket: {sec_str(bracket(E, X, Y))}")
    elif cmd == "affbracket":
        if len(args) != 2:
            raise SpecError("affbracket needs two section arguments")
        A = spec.affgebroid()
        a = AffSection(_section_arg(spec, args[0]))
        b = AffSection(_section_arg(spec, args[1]))
        lines.append(f"affbracket: {sec_str(aff_bracket(A, a, b))}")
    elif cmd == "hull":
        A = spec.affgebroid()
        hull = build_hull(A)
        names = ("a0",) + spec.frame
        for u, name in enumerate(names):
            lines.append(f"hull.anchor.{name}: {sec_str(hull.alg.anchor[u])}")
        for u in range(hull.rank):
            for v in range(u + 1, hull.rank):
                comps = tuple(hull.alg.struct[u][v][k] for k in range(hull.rank))
                lines.append(f"hull.struct.{names[u]}.{names[v]}: {sec_str(comps)}")
        reports.append(check_jacobi(hull.alg))
    elif cmd == "restrict":
        hull = spec.hull_view()
        jac = check_jacobi(hull.alg)
        reports.append(jac)
        if jac.ok:
            report = CheckReport("restrict")
            try:
                A = restrict_hull(hull)
            except HullRestrictionError as exc:
                report.add("closure", False, f"pair{exc.pair} {exc.witness}")
                reports.append(report)
            else:
                report.add("closure", True)
                reports.append(report)
                for j, name in enumerate(spec.frame[1:]):
                    lines.append(f"qder.matrix.{name}: {sec_str(A.qder.matrix[j])}")
                lines.append(f"qder.anchor: {sec_str(A.qder.anchor)}")
    elif cmd == "d":
        E = spec.algebroid()
        degrees = sorted({k for (k, _) in spec.forms})
        for k in degrees:
            comps = {idx: p for (kk, idx), p in spec.forms.items() if kk == k}
            mu = AlgForm(spec.base, spec.rank, k, comps)
            dmu = alg_d(E, mu)
            if dmu.is_zero():
                lines.append(f"d.form{k}: 0")
            for i2 in sorted(dmu.comps):
                label2 = ".".join(spec.frame[i] for i in i2)
                lines.append(f"d.form{k}.{label2}: {dmu.comps[i2]}")
        reports.append(d_squared_report(E))
    elif cmd == "lift":
        if not args:
            raise SpecError("lift needs a section argument")
        A = spec.affgebroid()
        kind = "complete"
        model = False
        rest = []
        for a in args:
            if a == "--vertical":
                kind = "vertical"
            elif a == "--model":
                model = True
            else:
                rest.append(a)
        if len(rest) != 1:
            raise SpecError("lift needs exactly one section argument")
        comps = _section_arg(spec, rest[0])
        arg = comps if (model or kind == "vertical") else AffSection(comps)
        lifted = aff_lift(A, arg, kind)
        for i, name in enumerate(lifted.ctx.names):
            lines.append(f"lift.{name}: {lifted.comp((i,))}")
    elif cmd == "dualize":
        E = spec.algebroid()
        lam = dual_linear_poisson(E)
        names = lam.ctx.names
        for idx in sorted(lam.comps):
            label = ".".join(names[i] for i in idx)
            lines.append(f"lambda.{label}: {lam.comps[idx]}")
        report = CheckReport("dualize")
        ll = sn_bracket(lam, lam)
        report.add("jacobi", ll.is_zero(), "" if ll.is_zero() else str(ll))
        reports.append(report)
    elif cmd == "affpoisson":
        reports.append(check_affpoisson(spec.poisson()))
    elif cmd == "reductions":
        A = spec.affgebroid()
        reports.append(check_correspondence(A))
        reports.append(check_reductions(A))
    elif cmd == "mechdemo":
        dim, ham = spec.mechanics()
        result = mechanics_demo(dim, ham)
        lines.extend(result.lines)
        reports.append(result.report)
    elif cmd == "thm11":
        reports.append(check_thm11(spec.hull_view()))
    elif cmd == "thm13":
        if len(args) != 1:
            raise SpecError("thm13 needs the candidate time function as an argument")
        A = spec.affgebroid()
        try:
            t = parse_poly(args[0], spec.base)
        except ParseError as exc:
            raise SpecError(str(exc)) from exc
        reports.append(check_thm13(A, t))

    for report in reports:
        lines.extend(_report_lines(report))
    failed = any(": FAIL" in line for line in lines)
    return lines, 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="affgebroids",
        description="Exact verification of algebroid and affgebroid bundle files.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("file", help="bundle description file")
    parser.add_argument("args", nargs="*", help="command-specific arguments")
    ns = parser.parse_args(argv)
    try:
        spec = load_spec(ns.file)
        lines, code = run_command(ns.command, spec, ns.args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
