"""Counting and norm experiments for trilinear frequency interactions.

A trilinear configuration lives on the grid (1/lam)Z: three frequency
intervals I1, I2, I3 (scaled-integer endpoints), separation thresholds N13,
N23 between the outer intervals and the third, and a shell thickness c_tol.
The admissible set A(n, tau) collects triples (n1, n2, n3) with n1+n2+n3 = n,
n_i in I_i, the separation gaps satisfied, and |tau - (n1^2+n2^2+n3^2)| <=
c_tol.  All membership tests are exact rational comparisons; after clearing
denominators every decision is an integer comparison, so counts carry no
floating-point error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CapExceededError
from .fourier import FourierState
from .rng import stream
from .strichartz import _paired_time_integral, _product_classes

_TAU = math.tau

#: Largest I1 x I2 candidate-pair grid a single count may enumerate.
DEFAULT_BOX_CAP = 10_000_000

#: Product-of-supports cap for the exact trilinear space-time norm.
DEFAULT_MODE_CAP = 1 << 21

#: "a is much smaller than b" is read as a <= b / LL_FACTOR.
LL_FACTOR = 8


def _frac(x) -> Fraction:
    # Fraction(float) is the exact binary value, so floats stay exact too.
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class TrilinearSpec:
    """Interval data for one trilinear configuration at grid scale 1/lam.

    Each interval is stored by scaled integer endpoints: ``i1 = (a, b)`` is
    the grid set {a/lam, ..., b/lam}.  Interval lengths must be ordered
    |I1| <= |I2| <= |I3|.
    """

    lam: int
    i1: tuple[int, int]
    i2: tuple[int, int]
    i3: tuple[int, int]
    n13: Fraction
    n23: Fraction
    c_tol: Fraction = Fraction(1)
    j_radius: Fraction = Fraction(0)

    def __post_init__(self):
        if not isinstance(self.lam, int) or self.lam < 1:
            raise ValueError("lam must be a positive integer")
        for name in ("i1", "i2", "i3"):
            a, b = getattr(self, name)
            a, b = int(a), int(b)
            if a > b:
                raise ValueError(f"{name} endpoints out of order: ({a}, {b})")
            object.__setattr__(self, name, (a, b))
        for name in ("n13", "n23", "c_tol", "j_radius"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if self.n13 < 0 or self.n23 < 0:
            raise ValueError("separation thresholds must be nonnegative")
        if self.c_tol <= 0:
            raise ValueError("c_tol must be positive")
        if self.j_radius < 0:
            raise ValueError("j_radius must be nonnegative")
        l1, l2, l3 = self.lengths
        if not l1 <= l2 <= l3:
            raise ValueError(f"interval lengths must be ordered: {l1}, {l2}, {l3}")

    @property
    def lengths(self) -> tuple[Fraction, Fraction, Fraction]:
        """Real-frequency lengths (|I1|, |I2|, |I3|)."""
        return tuple(
            Fraction(b - a, self.lam) for a, b in (self.i1, self.i2, self.i3)
        )

    @classmethod
    def from_intervals(cls, lam, i1, i2, i3, **kw) -> "TrilinearSpec":
        """Build from real-frequency endpoints; each must land on the grid."""
        scaled = []
        for lo, hi in (i1, i2, i3):
            a, b = _frac(lo) * lam, _frac(hi) * lam
            if a.denominator != 1 or b.denominator != 1:
                raise ValueError(f"endpoint ({lo}, {hi}) not on the 1/{lam} grid")
            scaled.append((int(a), int(b)))
        return cls(lam, *scaled, **kw)


@dataclass(frozen=True)
class GainReport:
    m_value: Fraction
    k_value: Fraction
    enhanced: bool


def enhanced_gain_K(spec: TrilinearSpec, *, ll_factor: int = LL_FACTOR) -> GainReport:
    """Gain parameter M = |I1|(J + |I1|)/N23 and the resulting constant K.

    The enhanced branch is claimed only when M is much smaller than both |I2|
    and N23 *and* I1 is much shorter than I2 (comparable outer intervals fall
    back to the base constant K = |I2|).  "Much smaller" means a factor of
    ``ll_factor``.
    """
    if spec.n23 == 0:
        raise ValueError("N23 must be positive to form the gain parameter")
    l1, l2, _ = spec.lengths
    m = l1 * (spec.j_radius + l1) / spec.n23
    enhanced = m * ll_factor <= min(l2, spec.n23) and l1 * ll_factor <= l2
    k = max(m, l1) if enhanced else l2
    return GainReport(m_value=m, k_value=k, enhanced=enhanced)


# ---------------------------------------------------------------------------
# exact admissible-set counting


def _shell_ints(spec: TrilinearSpec, tau: Fraction) -> tuple[int, int, int]:
    """Clear denominators in |tau*lam^2 - S| <= c_tol*lam^2 (S integer).

    Returns (t_scaled, c_scaled, d) so the test reads |t_scaled - S*d| <=
    c_scaled with every quantity an integer.
    """
    lam2 = spec.lam * spec.lam
    t = tau * lam2
    c = spec.c_tol * lam2
    d = lcm(t.denominator, c.denominator)
    return t.numerator * (d // t.denominator), c.numerator * (d // c.denominator), d


def count_A_set(
    spec: TrilinearSpec,
    n,
    tau,
    *,
    box_cap: int = DEFAULT_BOX_CAP,
) -> int:
    """|A(n, tau)|: admissible triples with the given sum and shell value.

    n and tau are rationals.  The count is zero unless n lies on the 1/lam
    grid, since n3 = n - n1 - n2 must.  Raises CapExceededError when the
    I1 x I2 candidate grid exceeds ``box_cap`` pairs.
    """
    n, tau = _frac(n), _frac(tau)
    (a1, b1), (a2, b2), (a3, b3) = spec.i1, spec.i2, spec.i3
    pairs = (b1 - a1 + 1) * (b2 - a2 + 1)
    if pairs > box_cap:
        raise CapExceededError(f"candidate grid {pairs} exceeds cap {box_cap}")
    ln = n * spec.lam
    if ln.denominator != 1:
        return 0
    ln = int(ln)

    i1 = np.arange(a1, b1 + 1, dtype=np.int64)[:, None]
    i2 = np.arange(a2, b2 + 1, dtype=np.int64)[None, :]
    i3 = ln - i1 - i2
    ok = (i3 >= a3) & (i3 <= b3)

    g13 = spec.n13 * spec.lam
    ok &= g13.denominator * np.abs(i1 - i3) >= g13.numerator
    g23 = spec.n23 * spec.lam
    ok &= g23.denominator * np.abs(i2 - i3) >= g23.numerator

    t_s, c_s, d = _shell_ints(spec, tau)
    big = max(abs(a1), abs(b1), abs(a2), abs(b2), abs(ln) + abs(a1) + abs(b1) + abs(a2) + abs(b2))
    if 3 * d * big * big >= 1 << 62:  # int64 would overflow; exact slow path
        return _count_python(spec, ln, t_s, c_s, d, g13, g23)
    S = i1 * i1 + i2 * i2 + i3 * i3
    ok &= np.abs(t_s - S * d) <= c_s
    return int(np.count_nonzero(ok))


def _count_python(spec, ln, t_s, c_s, d, g13, g23) -> int:
    (a1, b1), (a2, b2), (a3, b3) = spec.i1, spec.i2, spec.i3
    total = 0
    for x in range(a1, b1 + 1):
        for y in range(a2, b2 + 1):
            z = ln - x - y
            if not a3 <= z <= b3:
                continue
            if g13.denominator * abs(x - z) < g13.numerator:
                continue
            if g23.denominator * abs(y - z) < g23.numerator:
                continue
            if abs(t_s - (x * x + y * y + z * z) * d) <= c_s:
                total += 1
    return total


# ---------------------------------------------------------------------------
# suprema over (n, tau) grids


@dataclass(frozen=True)
class SupReport:
    sup: int
    arg_n: Optional[Fraction]
    arg_tau: Optional[Fraction]
    normalized: float
    k_value: Fraction
    gap_scale: Fraction  # max(N13, N23), the normalization gap


def _valid_shell_values(spec: TrilinearSpec, ln: int) -> np.ndarray:
    """Sorted S = i1^2+i2^2+i3^2 over triples meeting sum and gap constraints."""
    (a1, b1), (a2, b2), (a3, b3) = spec.i1, spec.i2, spec.i3
    i1 = np.arange(a1, b1 + 1, dtype=np.int64)[:, None]
    i2 = np.arange(a2, b2 + 1, dtype=np.int64)[None, :]
    i3 = ln - i1 - i2
    ok = (i3 >= a3) & (i3 <= b3)
    g13 = spec.n13 * spec.lam
    ok &= g13.denominator * np.abs(i1 - i3) >= g13.numerator
    g23 = spec.n23 * spec.lam
    ok &= g23.denominator * np.abs(i2 - i3) >= g23.numerator
    if not ok.any():
        return np.empty(0, dtype=np.int64)
    S = i1 * i1 + i2 * i2 + i3 * i3
    return np.sort(S[ok])


def _box_shell_range(spec: TrilinearSpec) -> tuple[int, int]:
    lo = hi = 0
    for a, b in (spec.i1, spec.i2, spec.i3):
        sq = sorted((a * a, b * b))
        lo += 0 if a <= 0 <= b else sq[0]
        hi += sq[1]
    return lo, hi


def sup_count_A(
    spec: TrilinearSpec,
    *,
    n_grid: Optional[Iterable] = None,
    tau_grid: Optional[Iterable] = None,
    box_cap: int = DEFAULT_BOX_CAP,
    ll_factor: int = LL_FACTOR,
) -> SupReport:
    """Supremum of |A(n, tau)| over a grid of (n, tau) pairs.

    Defaults: n runs over every integer whose scaled sum is reachable from
    the box, and tau over all values with lam^2 * tau an integer in the
    shell range of the box -- that grid resolves the shell test exactly, so
    the default sup is the true maximum over rational tau.  The normalized
    value divides by lam^2 K / max(N13, N23) + lam.
    """
    gain = enhanced_gain_K(spec, ll_factor=ll_factor)
    gap = max(spec.n13, spec.n23)
    if gap == 0:
        raise ValueError("normalization needs a positive separation threshold")
    denom = float(Fraction(spec.lam**2) * gain.k_value / gap + spec.lam)

    (a1, b1), (a2, b2), _ = spec.i1, spec.i2, spec.i3
    if (b1 - a1 + 1) * (b2 - a2 + 1) > box_cap:
        raise CapExceededError("candidate grid exceeds cap")

    lam = spec.lam
    if n_grid is None:
        lo = spec.i1[0] + spec.i2[0] + spec.i3[0]
        hi = spec.i1[1] + spec.i2[1] + spec.i3[1]
        n_values: Sequence[Fraction] = [
            Fraction(v) for v in range(-((-lo) // lam), hi // lam + 1)
        ]
    else:
        n_values = [_frac(v) for v in n_grid]

    best = 0
    arg: tuple[Optional[Fraction], Optional[Fraction]] = (None, None)

    if tau_grid is None:
        # Exact fast path: for fixed n, a window |lam^2 tau - S| <= w slides
        # over the sorted integer shell values; the densest width-2w window is
        # always centered at an integer, so a two-pointer pass is exact.
        c = spec.c_tol * lam * lam
        w = c.numerator // c.denominator
        s_lo, _ = _box_shell_range(spec)
        for n in n_values:
            ln = n * lam
            if ln.denominator != 1:
                continue
            s = _valid_shell_values(spec, int(ln))
            if len(s) == 0:
                continue
            first = np.searchsorted(s, s - 2 * w, side="left")
            cnt = np.arange(1, len(s) + 1) - first
            r = int(np.argmax(cnt))
            if cnt[r] > best:
                best = int(cnt[r])
                t = max(int(s[r]) - w, s_lo)
                arg = (n, Fraction(t, lam * lam))
    else:
        taus = [_frac(t) for t in tau_grid]
        for n in n_values:
            for tau in taus:
                c = count_A_set(spec, n, tau, box_cap=box_cap)
                if c > best:
                    best, arg = c, (n, tau)

    normalized = best / denom
    return SupReport(
        sup=best,
        arg_n=arg[0],
        arg_tau=arg[1],
        normalized=normalized,
        k_value=gain.k_value,
        gap_scale=gap,
    )


# ---------------------------------------------------------------------------
# change of variables identity


@dataclass(frozen=True)
class UvReport:
    n_samples: int
    max_abs_residual: Fraction
    all_zero: bool


def _uv_residual(x: Fraction, y: Fraction, at: Fraction, bt: Fraction, lam: Fraction) -> Fraction:
    u, v = x - y, x + y
    a, b = at - bt, (at + bt) / 3
    lhs = x * x + y * y + x * y + lam * (x * at + y * bt)
    rhs = (
        Fraction(1, 4) * (u + lam * a) ** 2
        + Fraction(3, 4) * (v + lam * b) ** 2
        - lam * lam * a * a / 4
        - 3 * lam * lam * b * b / 4
    )
    return lhs - rhs


def uv_change_of_variables_check(n_samples: int = 1000, seed: int = 0) -> UvReport:
    """Check the quadratic-form diagonalization used to decouple the pair sum.

    Substituting u = x - y, v = x + y, a = a~ - b~, b = (a~ + b~)/3 must turn
    x^2 + y^2 + xy + lam(x a~ + y b~) into (1/4)(u + lam a)^2 +
    (3/4)(v + lam b)^2 minus the completing-the-square constants.  Sampled
    over random rationals; every residual must be exactly zero.
    """
    rng = stream(seed, 7)
    worst = Fraction(0)
    for _ in range(n_samples):
        nums = rng.integers(-99, 100, size=5)
        dens = rng.integers(1, 13, size=5)
        x, y, at, bt = (
            Fraction(int(p), int(q)) for p, q in zip(nums[:4], dens[:4])
        )
        lam = Fraction(int(abs(nums[4])) + 1, int(dens[4]))
        worst = max(worst, abs(_uv_residual(x, y, at, bt, lam)))
    return UvReport(n_samples=n_samples, max_abs_residual=worst, all_zero=worst == 0)


# ---------------------------------------------------------------------------
# trilinear space-time norm


def trilinear_l2_ratio(
    phi1: FourierState,
    phi2: FourierState,
    phi3: FourierState,
    T: float,
    *,
    spec: Optional[TrilinearSpec] = None,
    mode_cap: int = DEFAULT_MODE_CAP,
) -> float:
    """||prod_j e^{it D} phi_j||_{L^2([0,T] x circle)} / prod_j ||phi_j||_{L^2}.

    The numerator is evaluated exactly on the Fourier side: mixed triples
    collapse to (sigma, q) classes and pair under the resonance time kernel,
    as in the sixth-power integral.  Zero profiles are rejected, all three
    states must share a circumference, and when a spec is supplied each
    support must sit inside its interval.
    """
    states = (phi1, phi2, phi3)
    lam = phi1.lam
    if any(s.lam != lam for s in states):
        raise ValueError("profiles must share one circumference")
    if any(s.n_modes == 0 for s in states):
        raise ValueError("zero profile has no ratio")
    if T <= 0:
        raise ValueError("T must be positive")
    if phi1.n_modes * phi2.n_modes * phi3.n_modes > mode_cap:
        raise CapExceededError("support product exceeds the trilinear cap")
    if spec is not None:
        if spec.lam != lam:
            raise ValueError("spec grid scale differs from the profiles")
        for s, (a, b) in zip(states, (spec.i1, spec.i2, spec.i3)):
            if s.indices[0] < a or s.indices[-1] > b:
                raise ValueError("profile support leaves its interval")
    sig, q, P = _product_classes(
        (phi1.indices, phi2.indices, phi3.indices),
        (phi1.amps, phi2.amps, phi3.amps),
    )
    value = _paired_time_integral(sig, q, P, lam, T)
    return math.sqrt(value) / (phi1.l2_norm() * phi2.l2_norm() * phi3.l2_norm())


# ---------------------------------------------------------------------------
# reference geometries and scaling trend


def standard_geometries(lam: int = 8) -> list[tuple[str, TrilinearSpec]]:
    """Reference interval layouts with fixed real endpoints at grid scale 1/lam.

    Refining lam only densifies the admissible grid, so counts are monotone
    in lam for each layout.  lam must be a multiple of 4 (one layout has a
    quarter-integer endpoint).
    """
    if lam % 4:
        raise ValueError("lam must be a multiple of 4")
    mk = TrilinearSpec.from_intervals
    return [
        ("separated", mk(lam, (0, 2), (4, 6), (16, 18), n13=10, n23=10, j_radius=20)),
        (
            "enhanced",
            mk(lam, (0, Fraction(1, 4)), (8, 16), (64, 72), n13=48, n23=48, j_radius=80),
        ),
        ("comparable", mk(lam, (0, 4), (5, 9), (20, 24), n13=12, n23=12, j_radius=30)),
    ]


@dataclass(frozen=True)
class TrendPoint:
    lam: int
    sup: int
    normalized: float
    arg_n: Optional[Fraction]
    arg_tau: Optional[Fraction]


@dataclass(frozen=True)
class TrendReport:
    geometry: str
    points: tuple[TrendPoint, ...]
    slope: float  # of normalized sup against log lam


def normalized_sup_trend(
    geometry: str,
    lams: Sequence[int],
    *,
    box_cap: int = DEFAULT_BOX_CAP,
) -> TrendReport:
    """Normalized sup counts for one reference layout across grid scales."""
    if len(lams) < 2:
        raise ValueError("need at least two scales for a trend")
    points = []
    for lam in lams:
        spec = dict(standard_geometries(lam))[geometry]
        rep = sup_count_A(spec, box_cap=box_cap)
        points.append(
            TrendPoint(lam, rep.sup, rep.normalized, rep.arg_n, rep.arg_tau)
        )
    slope = float(
        np.polyfit(np.log([p.lam for p in points]), [p.normalized for p in points], 1)[0]
    )
    return TrendReport(geometry=geometry, points=tuple(points), slope=slope)
