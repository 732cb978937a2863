"""Exact polyhedral kernel over the rationals.

Two pieces live here:

* Newton polyhedra of min-plus polynomials, held in dual description
  (vertices plus the vertical recession ray on one side, facet
  inequalities plus affine-hull equalities on the other).  The facet
  description is computed by the double description method applied to the
  cone of valid inequalities, seeded with the vertical-ray constraint, in
  pure integer arithmetic.

* A small Fourier-Motzkin solver for linear feasibility systems with
  strict, non-strict and equality relations, used for witness extraction
  and for the independent cross-checks in the test suite.

Everything is deterministic: vertices and facets come out in a canonical
(lexicographic) order and feasibility samples depend only on the input
constraint order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .poly import TropicalPolynomial

__all__ = [
    "LiftedPoint",
    "Facet",
    "NewtonPolyhedron",
    "newton_polyhedron",
    "active_constraints",
    "support_min",
    "LinearConstraint",
    "LinearSystem",
    "solve_feasibility",
    "REL_GE",
    "REL_GT",
    "REL_EQ",
]

LiftedPoint = tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# Integer / rational vector helpers
# ---------------------------------------------------------------------------

def _ivec_reduce(vec: Sequence[int]) -> tuple[int, ...]:
    g = math.gcd(*vec) if vec else 0
    if g > 1:
        return tuple(v // g for v in vec)
    return tuple(vec)


def _dot_i(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _dot_q(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _scale_to_primitive(vec: Sequence[Fraction]) -> tuple[tuple[int, ...], int, int]:
    """Return (primitive integer vector, num, den) with vec * num/den primitive.

    The scale num/den is positive, so inequality directions are preserved.
    """
    den = 1
    for v in vec:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = math.gcd(*ints) if ints else 0
    if g > 1:
        ints = [v // g for v in ints]
    else:
        g = 1
    return tuple(ints), den, g


# ---------------------------------------------------------------------------
# Double description: extreme rays of {y : <row, y> >= 0 for every row}
# ---------------------------------------------------------------------------

def _extreme_rays(
    rows: Sequence[tuple[int, ...]],
) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Extreme rays (mod lineality) and a lineality basis of an H-cone.

    Constraints are processed incrementally.  While the lineality space
    still meets a new constraint, one basis vector is turned into a ray
    and the remainder is projected onto the constraint hyperplane.  Once
    the constraint is orthogonal to the lineality space, rays are split
    by sign and adjacent positive/negative pairs are combined; adjacency
    uses the standard combinatorial test on tight-constraint sets.
    """
    dim = len(rows[0])
    lineality = [tuple(1 if i == j else 0 for i in range(dim)) for j in range(dim)]
    rays: list[tuple[int, ...]] = []
    masks: list[int] = []

    def tight_mask(vec: tuple[int, ...], upto: int) -> int:
        m = 0
        for i in range(upto):
            if _dot_i(rows[i], vec) == 0:
                m |= 1 << i
        return m

    for idx, row in enumerate(rows):
        lin_prods = [_dot_i(row, l) for l in lineality]
        pivot = next((i for i, p in enumerate(lin_prods) if p != 0), None)
        if pivot is not None:
            l0, p0 = lineality[pivot], lin_prods[pivot]
            if p0 < 0:
                l0, p0 = tuple(-v for v in l0), -p0
            lineality = [
                l if p == 0 else _ivec_reduce(tuple(p0 * a - p * b for a, b in zip(l, l0)))
                for i, (l, p) in enumerate(zip(lineality, lin_prods))
                if i != pivot
            ]
            new_rays = []
            for r in rays:
                p = _dot_i(row, r)
                if p == 0:
                    new_rays.append(r)
                else:
                    new_rays.append(_ivec_reduce(tuple(p0 * a - p * b for a, b in zip(r, l0))))
            new_rays.append(l0)
            rays = new_rays
            masks = [tight_mask(r, idx + 1) for r in rays]
            continue
        prods = [_dot_i(row, r) for r in rays]
        pos = [k for k, p in enumerate(prods) if p > 0]
        zero = [k for k, p in enumerate(prods) if p == 0]
        neg = [k for k, p in enumerate(prods) if p < 0]
        if not neg:
            masks = [
                m | (1 << idx) if p == 0 else m for m, p in zip(masks, prods)
            ]
            continue
        next_rays = [rays[k] for k in pos + zero]
        next_masks = [
            masks[k] if prods[k] > 0 else masks[k] | (1 << idx) for k in pos + zero
        ]
        for kp in pos:
            for kn in neg:
                common = masks[kp] & masks[kn]
                adjacent = True
                for k2, m2 in enumerate(masks):
                    if k2 == kp or k2 == kn:
                        continue
                    if common & m2 == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                pp, pn = prods[kp], prods[kn]
                comb = _ivec_reduce(
                    tuple(pp * b - pn * a for a, b in zip(rays[kp], rays[kn]))
                )
                next_rays.append(comb)
                next_masks.append(tight_mask(comb, idx + 1))
        rays, masks = next_rays, next_masks
    return rays, lineality


def _rref(rows: Iterable[Sequence[Fraction]], width: int) -> list[tuple[Fraction, ...]]:
    """Reduced row echelon form over Q; zero rows removed."""
    mat = [list(Fraction(v) for v in r) for r in rows]
    pivots: list[int] = []
    r = 0
    for col in range(width):
        sel = next((i for i in range(r, len(mat)) if mat[i][col] != 0), None)
        if sel is None:
            continue
        mat[r], mat[sel] = mat[sel], mat[r]
        inv = 1 / mat[r][col]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    return [tuple(row) for row in mat[:r]], pivots


def _rank(vectors: Sequence[Sequence[Fraction]], width: int, stop_at: int | None = None) -> int:
    mat: list[list[Fraction]] = []
    rank = 0
    for vec in vectors:
        row = list(Fraction(v) for v in vec)
        for prow, pcol in mat_pivots(mat):
            if row[pcol] != 0:
                f = row[pcol]
                row = [a - f * b for a, b in zip(row, prow)]
        lead = next((i for i, v in enumerate(row) if v != 0), None)
        if lead is None:
            continue
        inv = 1 / row[lead]
        row = [v * inv for v in row]
        mat.append(row)
        rank += 1
        if stop_at is not None and rank >= stop_at:
            return rank
    return rank


def mat_pivots(mat: list[list[Fraction]]):
    for row in mat:
        lead = next(i for i, v in enumerate(row) if v != 0)
        yield row, lead


# ---------------------------------------------------------------------------
# Newton polyhedra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Facet:
    """One constraint of a Newton polyhedron.

    `normal` is a primitive integer vector of length n+1; inequalities
    read <normal, x> >= offset and equalities <normal, x> = offset.
    """

    normal: tuple[int, ...]
    offset: Fraction
    kind: str  # "ineq" | "eq"

    def value(self, point: Sequence[Fraction]) -> Fraction:
        return sum((c * p for c, p in zip(self.normal, point)), Fraction(0))

    def slack(self, point: Sequence[Fraction]) -> Fraction:
        return self.value(point) - self.offset

    def holds(self, point: Sequence[Fraction]) -> bool:
        s = self.slack(point)
        return s == 0 if self.kind == "eq" else s >= 0


@dataclass(frozen=True)
class NewtonPolyhedron:
    """Dual description of the Newton polyhedron of a min-plus polynomial.

    Lives in R^{n+1}: each monomial lifts to its apex (exponent vector,
    coefficient) and the recession cone is the vertical ray (last
    coordinate up).  `vertices` are the lower-hull extreme apexes,
    `facets` the complete constraint list, both in canonical order.
    """

    n: int
    apexes: tuple[LiftedPoint, ...]
    vertices: tuple[LiftedPoint, ...]
    facets: tuple[Facet, ...]

    @property
    def dim(self) -> int:
        return self.n + 1

    def validate(self) -> None:
        """Check the dual-description invariants; raises AssertionError."""
        vert = tuple(0 for _ in range(self.n)) + (1,)
        for facet in self.facets:
            v = _dot_i(facet.normal, vert)
            if facet.kind == "eq":
                assert v == 0, f"equality {facet} not vertical-invariant"
            else:
                assert v >= 0, f"inequality {facet} cuts the vertical ray"
            assert math.gcd(*facet.normal) == 1, f"non-primitive normal {facet}"
            tight = 0
            for apex in self.apexes:
                s = facet.slack(apex)
                if facet.kind == "eq":
                    assert s == 0, f"apex {apex} off equality {facet}"
                else:
                    assert s >= 0, f"apex {apex} violates {facet}"
                    if s == 0:
                        tight += 1
            if facet.kind == "ineq":
                assert tight >= 1, f"facet {facet} tight on no apex"
        for v in self.vertices:
            assert v in self.apexes, f"vertex {v} is not an apex"
            tight_normals = [
                f.normal for f in self.facets if f.kind == "eq" or f.slack(v) == 0
            ]
            assert _rank(tight_normals, self.dim) == self.dim, f"vertex {v} rank-deficient"
        for facet in self.facets:
            if facet.kind == "ineq":
                assert support_min(self, facet.normal) == facet.offset


def _facet_from_dual(y: Sequence[Fraction], kind: str) -> Facet:
    """Turn a dual vector (y0, c) meaning y0 + <c, x> >= 0 into a Facet."""
    normal_part = list(y[1:])
    ints, den, g = _scale_to_primitive(normal_part)
    offset = -y[0] * den / g
    if kind == "eq":
        lead = next(v for v in ints if v != 0)
        if lead < 0:
            ints = tuple(-v for v in ints)
            offset = -offset
    return Facet(tuple(ints), offset, kind)


def newton_polyhedron(f: TropicalPolynomial) -> NewtonPolyhedron:
    """Build the full dual description of the Newton polyhedron of f."""
    n = f.n
    apexes = tuple(
        tuple(Fraction(e) for e in m.exponents) + (m.coeff,) for m in f.monomials
    )
    # Cone of valid inequalities (y0, c): y0 + <c, apex> >= 0 and c vertical-up,
    # seeded with the vertical-ray constraint.
    rows: list[tuple[int, ...]] = [tuple(0 for _ in range(n + 1)) + (1,)]
    for apex in apexes:
        ints, _, _ = _scale_to_primitive((Fraction(1),) + apex)
        rows.append(ints)
    rays, lineality = _extreme_rays(rows)

    lin_rref, _ = _rref([tuple(Fraction(v) for v in l) for l in lineality], n + 2)
    facets = [_facet_from_dual(row, "eq") for row in lin_rref]

    pivot_cols = [next(i for i, v in enumerate(row) if v != 0) for row in lin_rref]
    for ray in rays:
        y = [Fraction(v) for v in ray]
        for row, col in zip(lin_rref, pivot_cols):
            if y[col] != 0:
                c = y[col]
                y = [a - c * b for a, b in zip(y, row)]
        if all(v == 0 for v in y[1:]):
            continue  # the vacuous inequality 1 >= 0 (lower-dimensional hulls)
        facets.append(_facet_from_dual(y, "ineq"))

    facets = sorted(set(facets), key=lambda fa: (fa.kind != "eq", fa.normal, fa.offset))

    vertices = []
    ineq_facets = [fa for fa in facets if fa.kind == "ineq"]
    eq_normals = [fa.normal for fa in facets if fa.kind == "eq"]
    for apex in apexes:
        tight = list(eq_normals)
        tight += [fa.normal for fa in ineq_facets if fa.slack(apex) == 0]
        if _rank(tight, n + 1, stop_at=n + 1) == n + 1:
            vertices.append(apex)
    vertices.sort()

    return NewtonPolyhedron(
        n=n, apexes=apexes, vertices=tuple(vertices), facets=tuple(facets)
    )


def active_constraints(p: NewtonPolyhedron, v: LiftedPoint) -> frozenset[int]:
    """Indices of the facets tight at the vertex v (equalities included)."""
    v = tuple(Fraction(c) for c in v)
    if v not in p.vertices:
        raise ValueError(f"{v} is not a vertex of the polyhedron")
    return frozenset(
        i for i, fa in enumerate(p.facets) if fa.kind == "eq" or fa.slack(v) == 0
    )


def support_min(p: NewtonPolyhedron, c: Sequence) -> Fraction | float:
    """Exact min of <c, .> over the polyhedron; -inf when unbounded below."""
    c = tuple(Fraction(v) for v in c)
    if len(c) != p.dim:
        raise ValueError(f"functional has {len(c)} coordinates, expected {p.dim}")
    if c[-1] < 0:
        return -math.inf
    return min(_dot_q(c, v) for v in p.vertices)


# ---------------------------------------------------------------------------
# Linear feasibility via exact Fourier-Motzkin elimination
# ---------------------------------------------------------------------------

REL_GE = ">="
REL_GT = ">"
REL_EQ = "="

_RELATIONS = (REL_GE, REL_GT, REL_EQ)


@dataclass(frozen=True)
class LinearConstraint:
    """<coeffs, x> rel offset with rel one of ">=", ">", "="."""

    coeffs: tuple[Fraction, ...]
    offset: Fraction
    rel: str

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "offset", Fraction(self.offset))
        if self.rel not in _RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")

    def holds(self, x: Sequence[Fraction]) -> bool:
        v = sum((c * xi for c, xi in zip(self.coeffs, x)), Fraction(0))
        if self.rel == REL_EQ:
            return v == self.offset
        if self.rel == REL_GT:
            return v > self.offset
        return v >= self.offset


@dataclass(frozen=True)
class LinearSystem:
    dim: int
    constraints: tuple[LinearConstraint, ...]

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            if len(c.coeffs) != self.dim:
                raise ValueError(
                    f"constraint arity {len(c.coeffs)} != system dimension {self.dim}"
                )

    def holds(self, x: Sequence[Fraction]) -> bool:
        return all(c.holds(x) for c in self.constraints)


_Row = tuple[tuple[Fraction, ...], Fraction, str]


def _simplify_rows(rows: Iterable[_Row]) -> list[_Row] | None:
    """Drop satisfied constants, normalize scale, merge duplicates.

    Returns None as soon as an infeasible constant row or a pair of
    contradictory equalities shows up.
    """
    ineq: dict[tuple[int, ...], dict[str, Fraction]] = {}
    eqs: dict[tuple[int, ...], Fraction] = {}
    order: list[tuple[str, tuple[int, ...]]] = []
    for coeffs, offset, rel in rows:
        if all(c == 0 for c in coeffs):
            if rel == REL_EQ and offset != 0:
                return None
            if rel == REL_GE and offset > 0:
                return None
            if rel == REL_GT and offset >= 0:
                return None
            continue
        ints, den, g = _scale_to_primitive(coeffs)
        scaled = offset * den / g
        if rel == REL_EQ:
            lead = next(v for v in ints if v != 0)
            if lead < 0:
                ints = tuple(-v for v in ints)
                scaled = -scaled
            if ints in eqs:
                if eqs[ints] != scaled:
                    return None
            else:
                eqs[ints] = scaled
                order.append(("eq", ints))
        else:
            slot = ineq.setdefault(ints, {})
            if not slot:
                order.append(("ineq", ints))
            if rel not in slot or scaled > slot[rel]:
                slot[rel] = scaled
    out: list[_Row] = []
    for tag, key in order:
        coeffs = tuple(Fraction(v) for v in key)
        if tag == "eq":
            out.append((coeffs, eqs[key], REL_EQ))
            continue
        slot = ineq[key]
        ge, gt = slot.get(REL_GE), slot.get(REL_GT)
        if ge is not None and gt is not None:
            if gt >= ge:
                ge = None
            else:
                gt = None
        if ge is not None:
            out.append((coeffs, ge, REL_GE))
        if gt is not None:
            out.append((coeffs, gt, REL_GT))
    return out


def _substitute(row: _Row, pivot: _Row, j: int) -> _Row:
    coeffs, offset, rel = row
    pcoeffs, poffset, _ = pivot
    f = coeffs[j] / pcoeffs[j]
    new_coeffs = tuple(a - f * b for a, b in zip(coeffs, pcoeffs))
    return new_coeffs, offset - f * poffset, rel


def _bounds_for(rows: Iterable[_Row], j: int, x: list) -> tuple:
    """Lower/upper bounds on x_j induced by rows, at partial assignment x."""
    lo = hi = None
    lo_strict = hi_strict = False
    for coeffs, offset, rel in rows:
        rest = offset - sum(
            (coeffs[i] * x[i] for i in range(j) if coeffs[i] != 0), Fraction(0)
        )
        c = coeffs[j]
        bound = rest / c
        strict = rel == REL_GT
        if c > 0:
            if lo is None or bound > lo:
                lo, lo_strict = bound, strict
            elif bound == lo:
                lo_strict = lo_strict or strict
        else:
            if hi is None or bound < hi:
                hi, hi_strict = bound, strict
            elif bound == hi:
                hi_strict = hi_strict or strict
    return lo, lo_strict, hi, hi_strict


def _pick_value(lo, lo_strict, hi, hi_strict) -> Fraction | None:
    if lo is None and hi is None:
        return Fraction(0)
    if hi is None:
        return lo + 1 if lo_strict else lo
    if lo is None:
        return hi - 1 if hi_strict else hi
    if lo > hi or (lo == hi and (lo_strict or hi_strict)):
        return None
    if lo == hi:
        return lo
    return (lo + hi) / 2


def solve_feasibility(system: LinearSystem) -> tuple[Fraction, ...] | None:
    """One exact solution of the system, or None when infeasible.

    Variables are eliminated from the last to the first; an equality
    involving the variable is used as a substitution pivot when present,
    otherwise lower/upper rows are pairwise combined (strictness is
    inherited).  The sample is rebuilt by back-substitution with a
    midpoint rule on two-sided intervals, so the output is deterministic
    for a fixed constraint order.
    """
    d = system.dim
    if d < 1:
        raise ValueError("system dimension must be >= 1")
    rows = _simplify_rows(
        (c.coeffs, c.offset, c.rel) for c in system.constraints
    )
    if rows is None:
        return None
    stages: list[tuple[str, int, object]] = []
    for j in range(d - 1, -1, -1):
        rows_j = [r for r in rows if r[0][j] != 0]
        rest = [r for r in rows if r[0][j] == 0]
        pivot = next((r for r in rows_j if r[2] == REL_EQ), None)
        if pivot is not None:
            produced = [_substitute(r, pivot, j) for r in rows_j if r is not pivot]
            stages.append(("eq", j, pivot))
            rows = _simplify_rows(rest + produced)
        elif j == 0:
            lo, lo_s, hi, hi_s = _bounds_for(rows_j, 0, [])
            if _pick_value(lo, lo_s, hi, hi_s) is None:
                return None
            stages.append(("ineq", j, rows_j))
            rows = _simplify_rows(rest)
        else:
            lowers = [r for r in rows_j if r[0][j] > 0]
            uppers = [r for r in rows_j if r[0][j] < 0]
            produced = []
            for clo, blo, rlo in lowers:
                for chi, bhi, rhi in uppers:
                    mlo, mhi = -chi[j], clo[j]
                    coeffs = tuple(mlo * a + mhi * b for a, b in zip(clo, chi))
                    offset = mlo * blo + mhi * bhi
                    rel = REL_GT if REL_GT in (rlo, rhi) else REL_GE
                    produced.append((coeffs, offset, rel))
            stages.append(("ineq", j, rows_j))
            rows = _simplify_rows(rest + produced)
        if rows is None:
            return None
    x: list[Fraction | None] = [None] * d
    for kind, j, data in reversed(stages):
        if kind == "eq":
            coeffs, offset, _ = data
            rest = offset - sum(
                (coeffs[i] * x[i] for i in range(d) if i != j and coeffs[i] != 0),
                Fraction(0),
            )
            x[j] = rest / coeffs[j]
        else:
            value = _pick_value(*_bounds_for(data, j, x))
            if value is None:
                return None
            x[j] = value
    return tuple(x)
