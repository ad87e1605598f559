"""Exact sparse multivariate polynomials over the rationals.

A polynomial lives in a fixed :class:`VarContext` (an ordered list of base
coordinate names plus optional fiber coordinate names) and is stored as a
map from exponent vectors to nonzero ``Fraction`` coefficients.  There is no
floating point anywhere: equality of polynomials is exact, which is what
turns every structural identity in this package into a decidable check.

The text grammar accepted by :func:`parse_poly`:

    expr   := ['-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' NAT)?
    base   := RATIONAL | IDENT | '(' expr ')'
    RATIONAL := INT ('/' POSINT)?     IDENT := letter (letter|digit|'_')*

Whitespace is insignificant; unary minus is allowed at the head of an
expression and directly after '('.  Printing is canonical (graded-lex term
order, reduced fractions, explicit '*' and '^'), and ``parse(print(p)) == p``
for every polynomial p.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Scalar = Union[int, Fraction]
Exponent = tuple[int, ...]


@dataclass(frozen=True)
class VarContext:
    """Ordered, immutable variable set: base coordinates then fiber coordinates."""

    base_vars: tuple[str, ...]
    fiber_vars: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        names = self.base_vars + self.fiber_vars
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in context: {names}")
        for name in names:
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
                raise ValueError(f"invalid variable name: {name!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return self.base_vars + self.fiber_vars

    def __len__(self) -> int:
        return len(self.base_vars) + len(self.fiber_vars)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r} in context {self.names}") from None

    def with_fibers(self, fiber_vars: Sequence[str]) -> "VarContext":
        """Same base coordinates, different fiber block."""
        return VarContext(self.base_vars, tuple(fiber_vars))


class ParseError(ValueError):
    """Syntax or name error in polynomial text, with a 1-based position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Poly:
    """Immutable sparse polynomial with Fraction coefficients."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: VarContext, terms: Mapping[Exponent, Fraction]):
        clean: dict[Exponent, Fraction] = {}
        nvars = len(ctx)
        for exp, coeff in terms.items():
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for {nvars} variables")
            clean[exp] = coeff
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # immutability by contract
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ctx: VarContext) -> "Poly":
        return cls(ctx, {})

    @classmethod
    def const(cls, ctx: VarContext, value: Scalar) -> "Poly":
        return cls(ctx, {(0,) * len(ctx): Fraction(value)})

    @classmethod
    def variable(cls, ctx: VarContext, name: str) -> "Poly":
        i = ctx.index(name)
        exp = [0] * len(ctx)
        exp[i] = 1
        return cls(ctx, {tuple(exp): Fraction(1)})

    # -- predicates and views ----------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant polynomial: {self}")
        return self.terms.get((0,) * len(self.ctx), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, name: str) -> int:
        i = self.ctx.index(name)
        return max((e[i] for e in self.terms), default=0)

    # -- ring operations -----------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ctx != self.ctx:
                raise ValueError("polynomial context mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.ctx, other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for exp, coeff in other.terms.items():
            out[exp] = out.get(exp, Fraction(0)) + coeff
        return Poly(self.ctx, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.ctx, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                out[exp] = out.get(exp, Fraction(0)) + c1 * c2
        return Poly(self.ctx, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative exponent")
        out = Poly.const(self.ctx, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.ctx, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __ne__(self, other) -> bool:
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    __hash__ = None  # type: ignore[assignment]

    # -- calculus ------------------------------------------------------------

    def partial(self, name: str) -> "Poly":
        """Exact formal partial derivative with respect to a named variable."""
        i = self.ctx.index(name)
        out: dict[Exponent, Fraction] = {}
        for exp, coeff in self.terms.items():
            if exp[i] == 0:
                continue
            new = list(exp)
            new[i] -= 1
            key = tuple(new)
            out[key] = out.get(key, Fraction(0)) + coeff * exp[i]
        return Poly(self.ctx, out)

    def eval(self, point: Sequence[Scalar]) -> Fraction:
        """Exact evaluation at a rational point (one value per variable)."""
        if len(point) != len(self.ctx):
            raise ValueError(
                f"point length {len(point)} != variable count {len(self.ctx)}"
            )
        vals = [Fraction(v) for v in point]
        total = Fraction(0)
        for exp, coeff in self.terms.items():
            term = coeff
            for v, e in zip(vals, exp):
                if e:
                    term *= v**e
            total += term
        return total

    def subs(self, name: str, value: "Poly | Scalar") -> "Poly":
        """Substitute a polynomial (or scalar) for a named variable."""
        i = self.ctx.index(name)
        if not isinstance(value, Poly):
            value = Poly.const(self.ctx, value)
        elif value.ctx != self.ctx:
            raise ValueError("substitution value context mismatch")
        out = Poly.zero(self.ctx)
        powers: dict[int, Poly] = {0: Poly.const(self.ctx, 1)}
        for exp, coeff in self.terms.items():
            k = exp[i]
            if k not in powers:
                powers[k] = value**k
            rest = list(exp)
            rest[i] = 0
            out = out + Poly(self.ctx, {tuple(rest): coeff}) * powers[k]
        return out

    def in_context(self, ctx: VarContext) -> "Poly":
        """Reinterpret in another context containing all variables used here.

        Variables are matched by name; a variable with nonzero exponent that
        is missing from the target context is an error.
        """
        if ctx == self.ctx:
            return self
        positions = []
        for i, name in enumerate(self.ctx.names):
            if name in ctx.names:
                positions.append(ctx.index(name))
            else:
                positions.append(-1)
        out: dict[Exponent, Fraction] = {}
        for exp, coeff in self.terms.items():
            new = [0] * len(ctx)
            for i, e in enumerate(exp):
                if e == 0:
                    continue
                if positions[i] < 0:
                    raise ValueError(
                        f"variable {self.ctx.names[i]!r} not present in target context"
                    )
                new[positions[i]] = e
            key = tuple(new)
            out[key] = out.get(key, Fraction(0)) + coeff
        return Poly(ctx, out)

    # -- printing --------------------------------------------------------------

    def _sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        # graded-lex: higher total degree first, ties broken lexicographically
        # on the exponent vector in the fixed variable order (larger first)
        return sorted(
            self.terms.items(),
            key=lambda item: (-sum(item[0]), tuple(-e for e in item[0])),
        )

    def _monomial_str(self, exp: Exponent, coeff: Fraction) -> str:
        parts = []
        vars_part = []
        for name, e in zip(self.ctx.names, exp):
            if e == 1:
                vars_part.append(name)
            elif e > 1:
                vars_part.append(f"{name}^{e}")
        if not vars_part:
            return str(abs(coeff))
        if abs(coeff) != 1:
            parts.append(str(abs(coeff)))
        parts.extend(vars_part)
        return "*".join(parts)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for i, (exp, coeff) in enumerate(self._sorted_terms()):
            mono = self._monomial_str(exp, coeff)
            if i == 0:
                pieces.append(f"-{mono}" if coeff < 0 else mono)
            else:
                pieces.append(f"- {mono}" if coeff < 0 else f"+ {mono}")
        return " ".join(pieces)

    def __repr__(self) -> str:
        return f"Poly({self})"


def print_poly(p: Poly) -> str:
    """Canonical text form; inverse of :func:`parse_poly` on canonical output."""
    return str(p)


# -- parser ---------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<nat>\d+)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind
        self.text = text
        self.pos = pos  # 1-based position in the input string


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None or m.end() == i:
            stripped = text[i:].lstrip()
            if not stripped:
                break
            pos = len(text) - len(stripped) + 1
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.lastgroup == "nat":
            tokens.append(_Token("nat", m.group("nat"), m.start("nat") + 1))
        elif m.lastgroup == "ident":
            tokens.append(_Token("ident", m.group("ident"), m.start("ident") + 1))
        else:
            tokens.append(_Token(m.group("op"), m.group("op"), m.start("op") + 1))
        i = m.end()
    tokens.append(_Token("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, ctx: VarContext):
        self.tokens = _tokenize(text)
        self.ctx = ctx
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return tok

    def parse(self) -> Poly:
        p = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected {tok.text!r}", tok.pos)
        return p

    def expr(self) -> Poly:
        negate = False
        if self.peek().kind == "-":
            self.next()
            negate = True
        p = self.term()
        if negate:
            p = -p
        while self.peek().kind in ("+", "-"):
            op = self.next()
            q = self.term()
            p = p + q if op.kind == "+" else p - q
        return p

    def term(self) -> Poly:
        p = self.factor()
        while self.peek().kind == "*":
            self.next()
            p = p * self.factor()
        return p

    def factor(self) -> Poly:
        p = self.base()
        if self.peek().kind == "^":
            self.next()
            tok = self.expect("nat")
            p = p ** int(tok.text)
        return p

    def base(self) -> Poly:
        tok = self.next()
        if tok.kind == "nat":
            num = int(tok.text)
            if self.peek().kind == "/":
                self.next()
                den_tok = self.expect("nat")
                den = int(den_tok.text)
                if den == 0:
                    raise ParseError("denominator must be positive", den_tok.pos)
                return Poly.const(self.ctx, Fraction(num, den))
            return Poly.const(self.ctx, num)
        if tok.kind == "ident":
            if tok.text not in self.ctx.names:
                raise ParseError(f"unknown variable {tok.text!r}", tok.pos)
            return Poly.variable(self.ctx, tok.text)
        if tok.kind == "(":
            p = self.expr()
            self.expect(")")
            return p
        raise ParseError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)


def parse_poly(text: str, ctx: VarContext) -> Poly:
    """Parse polynomial text in the given variable context."""
    return _Parser(text, ctx).parse()


def parse_poly_list(text: str, ctx: VarContext, count: int | None = None) -> tuple[Poly, ...]:
    """Parse a comma-separated list of polynomials, optionally of fixed length."""
    parts = text.split(",")
    polys = tuple(parse_poly(part, ctx) for part in parts)
    if count is not None and len(polys) != count:
        raise ValueError(f"expected {count} comma-separated polynomials, got {len(polys)}")
    return polys
