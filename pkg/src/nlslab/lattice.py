"""Exact lattice point counting in shifted disks and thin annuli.

Counts integer pairs (x, y) with r1sq <= Q(x - bx, y - by) <= r2sq for a
positive definite binary quadratic form Q.  All boundary decisions are made
in integer arithmetic after clearing denominators, so annuli of width much
smaller than 1 are counted correctly.  The hexagonal (triangular) lattice is
handled through its Gram form x^2 + xy + y^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

from .rng import stream

Rat = Fraction

CLOSED_CLOSED = "closed-closed"
CLOSED_OPEN = "closed-open"


def _rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)  # exact binary lift
    return Fraction(x)


@dataclass(frozen=True)
class QuadraticForm2:
    """Binary quadratic form a*x^2 + b*x*y + c*y^2 with exact rational
    coefficients.  Must be positive definite (a > 0 and 4ac - b^2 > 0)."""

    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", _rat(self.a))
        object.__setattr__(self, "b", _rat(self.b))
        object.__setattr__(self, "c", _rat(self.c))
        if not (self.a > 0 and 4 * self.a * self.c - self.b * self.b > 0):
            raise ValueError("form must be positive definite")

    @property
    def discriminant(self) -> Fraction:
        return 4 * self.a * self.c - self.b * self.b

    def __call__(self, x, y) -> Fraction:
        x = _rat(x)
        y = _rat(y)
        return self.a * x * x + self.b * x * y + self.c * y * y


#: Gram form of the hexagonal (triangular) lattice with unit minimal vectors.
HEX_FORM = QuadraticForm2(Fraction(1), Fraction(1), Fraction(1))
#: Gram form of the square lattice.
SQUARE_FORM = QuadraticForm2(Fraction(1), Fraction(0), Fraction(1))

#: Offsets (in lattice coordinates) realizing the two deep-hole classes of the
#: hexagonal lattice; both sit at squared form-distance 1/3 from the lattice.
DEEP_HOLE_OFFSETS = (
    (Fraction(1, 3), Fraction(1, 3)),
    (Fraction(2, 3), Fraction(2, 3)),
)


@dataclass(frozen=True)
class LatticeBasis2:
    """Planar lattice basis with exact entries.

    Entries may be rationals or exact radical expressions (anything sympy can
    keep exact, e.g. sqrt(3)/2), so the hexagonal basis (1,0), (1/2, sqrt(3)/2)
    is representable.  Counting never touches the raw coordinates: it goes
    through the (rational) Gram form.
    """

    v1: tuple
    v2: tuple

    def __post_init__(self):
        import sympy as sp

        v1 = tuple(sp.sympify(t) for t in self.v1)
        v2 = tuple(sp.sympify(t) for t in self.v2)
        if len(v1) != 2 or len(v2) != 2:
            raise ValueError("basis vectors must have 2 components")
        det = sp.simplify(v1[0] * v2[1] - v1[1] * v2[0])
        if det.is_zero:
            raise ValueError("basis vectors must be linearly independent")
        object.__setattr__(self, "v1", v1)
        object.__setattr__(self, "v2", v2)


def hex_basis() -> LatticeBasis2:
    """The standard hexagonal basis (1, 0), (1/2, sqrt(3)/2)."""
    import sympy as sp

    return LatticeBasis2((1, 0), (sp.Rational(1, 2), sp.sqrt(3) / 2))


def gram_form(basis: LatticeBasis2 | Sequence) -> QuadraticForm2:
    """Gram form |x v1 + y v2|^2 of a basis, as an exact rational form.

    Raises ValueError if a Gram entry is irrational (the squared lengths and
    inner product must simplify to rationals even when coordinates do not).
    """
    import sympy as sp

    if not isinstance(basis, LatticeBasis2):
        basis = LatticeBasis2(tuple(basis[0]), tuple(basis[1]))
    v1, v2 = basis.v1, basis.v2

    def dot(u, w):
        return sp.expand(u[0] * w[0] + u[1] * w[1])

    entries = []
    for expr in (dot(v1, v1), 2 * dot(v1, v2), dot(v2, v2)):
        expr = sp.nsimplify(sp.simplify(expr))
        if not expr.is_rational:
            raise ValueError(f"Gram entry {expr} is not rational")
        expr = sp.Rational(expr)
        entries.append(Fraction(int(expr.p), int(expr.q)))
    a, b, c = entries
    return QuadraticForm2(a, b, c)


@dataclass(frozen=True)
class AnnulusSpec:
    """Annulus r1sq <= Q <= r2sq (or < r2sq) around a rational center.

    Squared radii are exact rationals; `boundary` selects whether the outer
    boundary is included ("closed-closed", default) or not ("closed-open").
    The inner boundary is always included.
    """

    center: tuple
    r1sq: Fraction
    r2sq: Fraction
    boundary: str = CLOSED_CLOSED

    def __post_init__(self):
        cx, cy = self.center
        object.__setattr__(self, "center", (_rat(cx), _rat(cy)))
        object.__setattr__(self, "r1sq", _rat(self.r1sq))
        object.__setattr__(self, "r2sq", _rat(self.r2sq))
        if self.r1sq < 0:
            raise ValueError("r1sq must be nonnegative")
        if self.r1sq > self.r2sq:
            raise ValueError("r1sq must not exceed r2sq")
        if self.boundary not in (CLOSED_CLOSED, CLOSED_OPEN):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")

    @classmethod
    def disk(cls, center, r2sq, boundary: str = CLOSED_CLOSED) -> "AnnulusSpec":
        return cls(center, Fraction(0), r2sq, boundary)


def _count_row_le(alpha: int, beta: int, gamma: int, t: int) -> int:
    """#(integer X with alpha X^2 + beta X + gamma <= t), alpha > 0.

    Roots are (-beta +- sqrt(disc)) / (2 alpha); for integer q one has
    q <= sqrt(n) iff q <= isqrt(n), so floor/ceil of the roots come out of
    integer floor division exactly (the interval may contain no integer).
    """
    disc = beta * beta - 4 * alpha * (gamma - t)
    if disc < 0:
        return 0
    s = isqrt(disc)
    two_a = 2 * alpha
    hi = (s - beta) // two_a  # floor of the larger root
    lo = -((s + beta) // two_a)  # ceil of the smaller root
    return max(0, hi - lo + 1)


def count_points(form: QuadraticForm2, spec: AnnulusSpec) -> int:
    """Exact count of integer points (x, y) in the annulus.

    Row-by-row: for each integer y the admissible x form an interval whose
    endpoints are pinned down with integer square roots, so the cost is
    O(linear extent) regardless of annulus width.
    """
    bx, by = spec.center
    d = math.lcm(bx.denominator, by.denominator)
    px, py = bx.numerator * (d // bx.denominator), by.numerator * (d // by.denominator)
    m = math.lcm(form.a.denominator, form.b.denominator, form.c.denominator)
    A = form.a.numerator * (m // form.a.denominator)
    B = form.b.numerator * (m // form.b.denominator)
    C = form.c.numerator * (m // form.c.denominator)

    t1f = spec.r1sq * m * d * d
    t2f = spec.r2sq * m * d * d
    g = math.lcm(t1f.denominator, t2f.denominator)
    t1 = t1f.numerator * (g // t1f.denominator)
    t2 = t2f.numerator * (g // t2f.denominator)
    if spec.boundary == CLOSED_OPEN:
        t2 -= 1
    t1 -= 1  # inner boundary: strict complement of Q < r1sq
    if t2 < 0:
        return 0

    alpha = g * A * d * d
    disc4 = 4 * A * C - B * B  # > 0, scaled by m^2
    vmax = isqrt(4 * A * t2 // (g * disc4)) + 1

    y_lo = -((vmax - py) // d)  # ceil((py - vmax)/d)
    y_hi = (vmax + py) // d  # floor((py + vmax)/d)
    total = 0
    gd = g * d
    for y in range(y_lo, y_hi + 1):
        v = d * y - py
        beta = gd * (B * v - 2 * A * px)
        gamma = g * ((A * px - B * v) * px + C * v * v)
        n_out = _count_row_le(alpha, beta, gamma, t2)
        if n_out == 0:
            continue
        if t1 >= 0:
            n_out -= _count_row_le(alpha, beta, gamma, t1)
        total += n_out
    return total


def count_points_naive(form: QuadraticForm2, spec: AnnulusSpec, box_cap: int = 10**6) -> int:
    """Reference double loop over the bounding box.

    Deliberately simple — no row intervals, no root isolation; the form is
    evaluated at every candidate point.  Denominators are cleared up front so
    the inner comparisons are exact integer arithmetic.
    """
    bx, by = spec.center
    lam_min = form.discriminant / (4 * (form.a + form.c))  # lower eigenvalue bound
    r = math.sqrt(float(spec.r2sq / lam_min)) if spec.r2sq > 0 else 0.0
    x_lo, x_hi = math.floor(float(bx) - r) - 1, math.ceil(float(bx) + r) + 1
    y_lo, y_hi = math.floor(float(by) - r) - 1, math.ceil(float(by) + r) + 1
    if (x_hi - x_lo + 1) * (y_hi - y_lo + 1) > box_cap:
        raise ValueError("bounding box too large for the naive counter")
    strict_outer = spec.boundary == CLOSED_OPEN

    d = math.lcm(bx.denominator, by.denominator)
    px, py = bx.numerator * (d // bx.denominator), by.numerator * (d // by.denominator)
    m = math.lcm(form.a.denominator, form.b.denominator, form.c.denominator)
    A = form.a.numerator * (m // form.a.denominator)
    B = form.b.numerator * (m // form.b.denominator)
    C = form.c.numerator * (m // form.c.denominator)
    # Q(x-bx, y-by) compared with r^2 <=> den(r^2) * q compared with num(r^2) * m * d^2
    s1, t1 = spec.r1sq.denominator, spec.r1sq.numerator * m * d * d
    s2, t2 = spec.r2sq.denominator, spec.r2sq.numerator * m * d * d

    total = 0
    for x in range(x_lo, x_hi + 1):
        u = d * x - px
        for y in range(y_lo, y_hi + 1):
            v = d * y - py
            q = A * u * u + B * u * v + C * v * v
            if s1 * q < t1:
                continue
            w = s2 * q
            if w > t2 or (strict_outer and w == t2):
                continue
            total += 1
    return total


def gauss_error(form: QuadraticForm2, spec: AnnulusSpec) -> float:
    """Signed difference between the point count and the annulus area.

    The region {Q <= r^2} has area 2*pi*r^2 / sqrt(4ac - b^2).
    """
    area = 2.0 * math.pi * float(spec.r2sq - spec.r1sq) / math.sqrt(float(form.discriminant))
    return count_points(form, spec) - area


@dataclass(frozen=True)
class CountRecord:
    """One annulus count from a hypothesis scan."""

    n: int
    alpha: float
    center_id: str
    center: tuple
    count: int
    normalized: float
    seed: int


def adversarial_centers() -> list[tuple[str, tuple]]:
    """Centers that historically concentrate lattice points: a lattice point
    (count-equivalent to the origin), both deep-hole classes, and the edge
    midpoint."""
    out = [("origin", (Fraction(0), Fraction(0))), ("lattice", (Fraction(1), Fraction(1)))]
    out.append(("deep-hole-a", DEEP_HOLE_OFFSETS[0]))
    out.append(("deep-hole-b", DEEP_HOLE_OFFSETS[1]))
    out.append(("edge-midpoint", (Fraction(1, 2), Fraction(1, 2))))
    return out


def random_centers(k: int, seed: int, denom: int = 4096) -> list[tuple[str, tuple]]:
    """k seeded rational centers, uniform on a denominator-`denom` grid in the
    fundamental cell [0,1)^2."""
    rng = stream(seed, 0)
    out = []
    for i in range(k):
        cx = Fraction(int(rng.integers(0, denom)), denom)
        cy = Fraction(int(rng.integers(0, denom)), denom)
        out.append((f"random-{i}", (cx, cy)))
    return out


def annulus_width(n: int, alpha: float) -> Fraction:
    """Exact rational stand-in for the width N^alpha (binary-float lift, so the
    same value is used by the counter and by any reference enumeration)."""
    return Fraction(float(n) ** alpha)


def scan_hypothesis_h(
    alpha: float,
    n_list: Sequence[int],
    *,
    form: QuadraticForm2 = HEX_FORM,
    k_random: int = 8,
    seed: int = 0,
    include_adversarial: bool = True,
) -> tuple[list[CountRecord], dict[int, float]]:
    """Count lattice points in the annuli [N^2, N^2 + N^alpha] over a battery
    of shifted centers.

    Returns all count records plus, per N, the supremum over centers of
    count / N^alpha.  The center set is held fixed across N.
    """
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    if not n_list:
        raise ValueError("n_list must be nonempty")
    centers: list[tuple[str, tuple]] = []
    if include_adversarial:
        centers.extend(adversarial_centers())
    centers.extend(random_centers(k_random, seed))

    records: list[CountRecord] = []
    sups: dict[int, float] = {}
    for n in n_list:
        if n < 1:
            raise ValueError("N must be positive")
        r1sq = Fraction(n * n)
        r2sq = r1sq + annulus_width(n, alpha)
        best = 0.0
        for cid, center in centers:
            spec = AnnulusSpec(center, r1sq, r2sq, CLOSED_CLOSED)
            cnt = count_points(form, spec)
            normalized = cnt / float(n) ** alpha
            records.append(CountRecord(n, alpha, cid, center, cnt, normalized, seed))
            best = max(best, normalized)
        sups[n] = best
    return records, sups
