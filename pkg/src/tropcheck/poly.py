"""Min-plus (tropical) polynomials over exact rational coefficients.

A tropical polynomial in n variables is a finite minimum of affine forms
("monomials"), each of the shape  a_0 + a_1*x_1 + ... + a_n*x_n  with
integer exponents a_1..a_n and a rational coefficient a_0.  The tropical
hypersurface of f is the set of points where that minimum is attained by
at least two monomials.

All arithmetic is exact: coefficients and evaluation points are
`fractions.Fraction` values, never floats.  An infinite coefficient or
exponent makes a monomial the identity of min, so it is dropped during
canonicalization.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "EmptyPolynomialError",
    "DimensionMismatchError",
    "ParseError",
    "TropicalMonomial",
    "TropicalPolynomial",
    "canonicalize",
    "evaluate",
    "on_hypersurface",
    "translate_by_monomial",
    "parse_polynomial",
    "format_polynomial",
    "parse_rational",
    "format_rational",
    "to_structured",
    "from_structured",
    "load_polynomial",
]


class EmptyPolynomialError(ValueError):
    """Every monomial was dropped: the polynomial is identically infinite."""


class DimensionMismatchError(ValueError):
    """Operands declare different variable counts."""


class ParseError(ValueError):
    """Syntax error in polynomial text; `position` is a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_RATIONAL_RE = re.compile(r"[+-]?\d+(?:/\d+)?")


def parse_rational(text: str) -> Fraction:
    """Parse "p" or "p/q" (optional sign) into a Fraction."""
    if not _RATIONAL_RE.fullmatch(text.strip()):
        raise ValueError(f"not a rational literal: {text!r}")
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "p" or "p/q"; inverse of parse_rational."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class TropicalMonomial:
    """One affine form: coefficient plus integer multiples of the variables."""

    exponents: tuple[int, ...]
    coeff: Fraction

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        object.__setattr__(self, "coeff", Fraction(self.coeff))

    def value_at(self, x: Sequence[Fraction]) -> Fraction:
        if len(x) != len(self.exponents):
            raise DimensionMismatchError(
                f"point has {len(x)} coordinates, monomial has {len(self.exponents)}"
            )
        return self.coeff + sum((e * xi for e, xi in zip(self.exponents, x)), Fraction(0))


@dataclass(frozen=True)
class TropicalPolynomial:
    """Canonical min of monomials: distinct exponent vectors, fixed arity n."""

    n: int
    monomials: tuple[TropicalMonomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "monomials", tuple(self.monomials))
        if self.n < 1:
            raise ValueError(f"variable count must be >= 1, got {self.n}")
        if not self.monomials:
            raise EmptyPolynomialError("polynomial has no finite monomials")
        seen = set()
        for m in self.monomials:
            if len(m.exponents) != self.n:
                raise DimensionMismatchError(
                    f"monomial arity {len(m.exponents)} != n={self.n}"
                )
            if m.exponents in seen:
                raise ValueError(f"duplicate exponent vector {m.exponents}")
            seen.add(m.exponents)

    def __str__(self) -> str:
        return format_polynomial(self)


def _is_infinite(value) -> bool:
    return isinstance(value, float) and math.isinf(value)


def canonicalize(
    raw: Iterable[tuple[Sequence, object]],
    *,
    allow_negative: bool = False,
) -> TropicalPolynomial:
    """Build a canonical polynomial from raw (exponents, coefficient) pairs.

    Any pair containing an infinity (in the coefficient or in an exponent
    slot) is dropped; duplicate exponent vectors are merged keeping the
    minimum coefficient; monomials are ordered by exponent vector.  Raises
    EmptyPolynomialError when everything is dropped.
    """
    raw = list(raw)
    if not raw:
        raise ValueError("raw monomial list is empty")
    n = None
    best: dict[tuple[int, ...], Fraction] = {}
    for exponents, coeff in raw:
        exponents = list(exponents)
        if n is None:
            n = len(exponents)
        elif len(exponents) != n:
            raise DimensionMismatchError(
                f"inconsistent exponent lengths: {len(exponents)} vs {n}"
            )
        if _is_infinite(coeff) or any(_is_infinite(e) for e in exponents):
            continue
        exp = tuple(int(e) for e in exponents)
        if any(e != orig for e, orig in zip(exp, exponents)):
            raise ValueError(f"non-integer exponent in {exponents}")
        if not allow_negative and any(e < 0 for e in exp):
            raise ValueError(f"negative exponent in {exp} (pass allow_negative=True)")
        c = Fraction(coeff)
        if exp not in best or c < best[exp]:
            best[exp] = c
    if not best:
        raise EmptyPolynomialError(
            "all monomials are infinite; the polynomial has no Newton polyhedron"
        )
    if n == 0:
        raise ValueError("variable count must be >= 1")
    monomials = tuple(
        TropicalMonomial(exp, best[exp]) for exp in sorted(best)
    )
    return TropicalPolynomial(n=n, monomials=monomials)


def _as_point(f: TropicalPolynomial, x: Sequence) -> tuple[Fraction, ...]:
    point = tuple(Fraction(v) for v in x)
    if len(point) != f.n:
        raise DimensionMismatchError(f"point has {len(point)} coordinates, expected {f.n}")
    return point


def evaluate(f: TropicalPolynomial, x: Sequence) -> tuple[Fraction, frozenset[int]]:
    """Exact min over monomials at x, with the full set of argmin indices."""
    point = _as_point(f, x)
    values = [m.value_at(point) for m in f.monomials]
    best = min(values)
    return best, frozenset(i for i, v in enumerate(values) if v == best)


def on_hypersurface(f: TropicalPolynomial, x: Sequence) -> bool:
    """True iff the minimum at x is attained by at least two monomials."""
    _, argmin = evaluate(f, x)
    return len(argmin) >= 2


def translate_by_monomial(
    f: TropicalPolynomial, m: TropicalMonomial
) -> TropicalPolynomial:
    """Tropical multiplication by a monomial: add m to every monomial.

    Shifts the Newton polyhedron by the lifted m and leaves the
    hypersurface unchanged.
    """
    if len(m.exponents) != f.n:
        raise DimensionMismatchError(f"monomial arity {len(m.exponents)} != n={f.n}")
    monomials = tuple(
        TropicalMonomial(
            tuple(a + b for a, b in zip(mono.exponents, m.exponents)),
            mono.coeff + m.coeff,
        )
        for mono in f.monomials
    )
    return TropicalPolynomial(n=f.n, monomials=tuple(sorted(monomials, key=lambda t: t.exponents)))


# ---------------------------------------------------------------------------
# Text grammar:  min( term ("," term)* )
#   term   := "inf" | part ("+" part)*
#   part   := rational | rational "*" var | var
#   var    := "x" 1-based-index
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<min>min)|(?P<inf>inf)|(?P<var>x\d+)|(?P<num>[+-]?\d+(?:/\d+)?)"
    r"|(?P<punct>[(),*+]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            rest = text[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        for kind in ("min", "inf", "var", "num", "punct"):
            value = match.group(kind)
            if value is not None:
                tokens.append((kind, value, match.start(kind)))
                break
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> list[tuple[dict[int, int], object]]:
        self.expect("min")
        self.expect("punct", "(")
        terms = [self.parse_term()]
        while True:
            tok = self.next()
            if tok[0] == "punct" and tok[1] == ",":
                terms.append(self.parse_term())
            elif tok[0] == "punct" and tok[1] == ")":
                break
            else:
                raise ParseError(f"expected ',' or ')', found {tok[1]!r}", tok[2])
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok[1]!r}", tok[2])
        return terms

    def parse_term(self) -> tuple[dict[int, int], object]:
        tok = self.peek()
        if tok is not None and tok[0] == "inf":
            self.next()
            return {}, math.inf
        coeff = Fraction(0)
        exponents: dict[int, int] = {}
        while True:
            coeff += self.parse_part(exponents)
            tok = self.peek()
            if tok is not None and tok[0] == "punct" and tok[1] == "+":
                self.next()
                continue
            break
        return exponents, coeff

    def parse_part(self, exponents: dict[int, int]) -> Fraction:
        """Consume one part; record var exponents, return the constant share."""
        tok = self.next()
        if tok[0] == "var":
            idx = self.var_index(tok)
            exponents[idx] = exponents.get(idx, 0) + 1
            return Fraction(0)
        if tok[0] != "num":
            raise ParseError(f"expected a rational or variable, found {tok[1]!r}", tok[2])
        value = Fraction(tok[1])
        nxt = self.peek()
        if nxt is not None and nxt[0] == "punct" and nxt[1] == "*":
            self.next()
            var_tok = self.next()
            if var_tok[0] != "var":
                raise ParseError(f"expected a variable after '*', found {var_tok[1]!r}", var_tok[2])
            if value.denominator != 1:
                raise ParseError(f"exponent {tok[1]} is not an integer", tok[2])
            idx = self.var_index(var_tok)
            exponents[idx] = exponents.get(idx, 0) + int(value)
            return Fraction(0)
        return value

    def var_index(self, tok: tuple[str, str, int]) -> int:
        idx = int(tok[1][1:])
        if idx < 1:
            raise ParseError(f"variable index must be >= 1 in {tok[1]!r}", tok[2])
        return idx


def parse_polynomial(
    text: str, n: int | None = None, *, allow_negative: bool = False
) -> TropicalPolynomial:
    """Parse the text grammar into a canonical polynomial.

    When n is None, the variable count is inferred as the largest index
    mentioned (at least 1).  Raises ParseError with a position on syntax
    errors, DimensionMismatchError when a variable index exceeds n, and
    EmptyPolynomialError when every term is infinite.
    """
    terms = _Parser(text).parse()
    max_index = max((max(t[0], default=0) for t in terms), default=0)
    if n is None:
        n = max(1, max_index)
    elif max_index > n:
        raise DimensionMismatchError(f"variable x{max_index} exceeds declared n={n}")
    raw = []
    for exponents, coeff in terms:
        vec = [exponents.get(j, 0) for j in range(1, n + 1)]
        raw.append((vec, coeff))
    return canonicalize(raw, allow_negative=allow_negative)


def _format_monomial(m: TropicalMonomial) -> str:
    parts = []
    if m.coeff != 0 or not any(m.exponents):
        parts.append(format_rational(m.coeff))
    for j, e in enumerate(m.exponents, start=1):
        if e == 0:
            continue
        parts.append(f"x{j}" if e == 1 else f"{e}*x{j}")
    return " + ".join(parts)


def format_polynomial(f: TropicalPolynomial) -> str:
    """Canonical text form; parse(format(f)) == f."""
    return "min(" + ", ".join(_format_monomial(m) for m in f.monomials) + ")"


def to_structured(f: TropicalPolynomial) -> dict:
    """Structured (JSON-ready) form with rationals as strings."""
    return {
        "n": f.n,
        "monomials": [
            {"coeff": format_rational(m.coeff), "exp": list(m.exponents)}
            for m in f.monomials
        ],
    }


def from_structured(obj: dict, *, allow_negative: bool = False) -> TropicalPolynomial:
    """Inverse of to_structured; accepts "inf" coefficients (dropped)."""
    try:
        n = int(obj["n"])
        entries = obj["monomials"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed structured polynomial: missing {exc}") from exc
    raw = []
    for entry in entries:
        coeff_text = str(entry["coeff"]).strip()
        coeff = math.inf if coeff_text == "inf" else parse_rational(coeff_text)
        exp = list(entry["exp"])
        if len(exp) != n:
            raise DimensionMismatchError(
                f"exponent vector {exp} has length {len(exp)}, expected n={n}"
            )
        raw.append((exp, coeff))
    if not raw:
        raise EmptyPolynomialError("structured polynomial has no monomials")
    return canonicalize(raw, allow_negative=allow_negative)


def load_polynomial(
    text: str, n: int | None = None, *, allow_negative: bool = False
) -> TropicalPolynomial:
    """Parse either input format: structured JSON (leading '{') or the grammar."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        import json

        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from exc
        poly = from_structured(obj, allow_negative=allow_negative)
        if n is not None and poly.n != n:
            raise DimensionMismatchError(f"file declares n={poly.n}, expected n={n}")
        return poly
    return parse_polynomial(text, n, allow_negative=allow_negative)
