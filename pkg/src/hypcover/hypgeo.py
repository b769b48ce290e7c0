"""Hyperbolic geometry of the unit disc.

Circle points are stored as angles in [0, 2pi).  Moebius maps are kept in
SU(1,1) normal form z -> (alpha z + beta) / (conj(beta) z + conj(alpha)).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-10


class DegenerateGeodesic(ValueError):
    pass


def canon_angle(t: float) -> float:
    t = math.fmod(t, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI:
        t = 0.0
    return t


def angle_of(z: complex) -> float:
    return canon_angle(math.atan2(z.imag, z.real))


def ang_diff(a: float, b: float) -> float:
    """Signed difference a - b folded into [-pi, pi)."""
    return (a - b + math.pi) % TWO_PI - math.pi


def in_arc(t: float, lo: float, hi: float) -> bool:
    """Membership in the counter-clockwise arc [lo, hi)."""
    return (t - lo) % TWO_PI < (hi - lo) % TWO_PI


def check_interior(z: complex) -> complex:
    if abs(z) >= 1.0 - 1e-12:
        raise ValueError(f"point {z} is not inside the open disc")
    return complex(z)


@dataclass(frozen=True)
class Moebius:
    alpha: complex
    beta: complex

    def __call__(self, z: complex) -> complex:
        a, b = self.alpha, self.beta
        return (a * z + b) / (b.conjugate() * z + a.conjugate())

    def inverse(self) -> "Moebius":
        return Moebius(self.alpha.conjugate(), -self.beta)

    def matrix(self):
        a, b = self.alpha, self.beta
        return ((a, b), (b.conjugate(), a.conjugate()))

    def det(self) -> float:
        return abs(self.alpha) ** 2 - abs(self.beta) ** 2

    def key(self, digits: int = 7) -> tuple:
        """Rounded entries with the sign of (alpha, beta) fixed; +-M share a key."""
        a, b = self.alpha, self.beta
        if a.real < 0 or (a.real == 0 and a.imag < 0):
            a, b = -a, -b
        s = 10.0 ** digits
        return (round(a.real * s), round(a.imag * s), round(b.real * s), round(b.imag * s))

    def __matmul__(self, other: "Moebius") -> "Moebius":
        return compose(self, other)


def normalized(alpha: complex, beta: complex) -> Moebius:
    big = abs(alpha) ** 2
    if big > 1e8:
        # |alpha|^2 - |beta|^2 is lost to cancellation here; the product is
        # already in SU(1,1) up to relative rounding, so leave it alone
        return Moebius(complex(alpha), complex(beta))
    d = big - abs(beta) ** 2
    if d <= 0:
        raise ValueError("not a disc automorphism")
    s = 1.0 / math.sqrt(d)
    return Moebius(complex(alpha) * s, complex(beta) * s)


IDENTITY = Moebius(1 + 0j, 0j)


def identity() -> Moebius:
    return IDENTITY


def rotation(theta: float) -> Moebius:
    return Moebius(cmath.exp(0.5j * theta), 0j)


def translation(theta: float, t: float) -> Moebius:
    """Hyperbolic translation of length t along the diameter in direction theta."""
    u = cmath.exp(1j * theta)
    return Moebius(complex(math.cosh(t / 2)), math.sinh(t / 2) * u)


def compose(m1: Moebius, m2: Moebius) -> Moebius:
    """m1 after m2, renormalized."""
    a1, b1, a2, b2 = m1.alpha, m1.beta, m2.alpha, m2.beta
    return normalized(a1 * a2 + b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())


def compose_all(maps) -> Moebius:
    out = IDENTITY
    for m in maps:
        out = compose(out, m)
    return out


def same_element(m1: Moebius, m2: Moebius, tol: float = 1e-8) -> bool:
    d1 = max(abs(m1.alpha - m2.alpha), abs(m1.beta - m2.beta))
    d2 = max(abs(m1.alpha + m2.alpha), abs(m1.beta + m2.beta))
    return min(d1, d2) <= tol


def apply_boundary(m: Moebius, t: float) -> float:
    xi = cmath.exp(1j * t)
    w = m(xi)
    return angle_of(w / abs(w))


def boundary_derivative(m: Moebius, t: float) -> float:
    """|m'(xi)| on the circle."""
    xi = cmath.exp(1j * t)
    return 1.0 / abs(m.beta.conjugate() * xi + m.alpha.conjugate()) ** 2


def hyp_dist(z: complex, w: complex) -> float:
    num = 2.0 * abs(z - w) ** 2
    den = (1.0 - abs(z) ** 2) * (1.0 - abs(w) ** 2)
    return math.acosh(1.0 + num / den)


def dist0(m: Moebius) -> float:
    """d(0, m(0)).

    Near the origin 2 atanh|beta/alpha| is accurate; far out the ratio rounds
    to 1, and for det 1 the same distance is 2 log(|alpha| + |beta|).
    """
    r = abs(m.beta) / abs(m.alpha)
    if r < 0.5:
        return 2.0 * math.atanh(r)
    return 2.0 * math.log(abs(m.alpha) + abs(m.beta))


def poisson_kernel(z: complex, t: float) -> float:
    xi = cmath.exp(1j * t)
    return (1.0 - abs(z) ** 2) / abs(xi - z) ** 2


@dataclass(frozen=True)
class GeodesicArc:
    """Complete geodesic with endpoints t_minus, t_plus (angles)."""
    t_minus: float
    t_plus: float
    center: complex | None   # None for a diameter
    radius: float

    @property
    def is_diameter(self) -> bool:
        return self.center is None

    def side(self, z: complex) -> float:
        """Signed quantity vanishing on the geodesic.

        Positive on the side of the circle arc running counter-clockwise
        from t_minus to t_plus.
        """
        if self.center is None:
            u = cmath.exp(1j * self.t_minus)
            return (z * u.conjugate()).imag
        val = abs(z - self.center) ** 2 - self.radius ** 2
        # inside the Euclidean circle is the small arc between the endpoints
        small_ccw = (self.t_plus - self.t_minus) % TWO_PI < math.pi
        return -val if small_ccw else val

    def point(self, s: float) -> complex:
        """Point on the arc for s in (0, 1), moving from t_minus to t_plus."""
        u = cmath.exp(1j * self.t_minus)
        v = cmath.exp(1j * self.t_plus)
        if self.center is None:
            return u * (1.0 - 2.0 * s)
        a0 = cmath.phase(u - self.center)
        a1 = cmath.phase(v - self.center)
        da = ang_diff(a1, a0)
        # the interior part of the circle is the shorter turn between endpoints
        return self.center + self.radius * cmath.exp(1j * (a0 + s * da))

    def crosses_segment(self, p: complex, q: complex, tol: float = 1e-12):
        """Whether the geodesic crosses the hyperbolic segment [p, q].

        Two distinct geodesics meet at most once in the disc, so the segment
        crosses exactly when its endpoints lie on opposite sides.  Returns
        (crosses, transversal) where transversal is False when an endpoint is
        within tol of the geodesic.
        """
        sp, sq = self.side(p), self.side(q)
        transversal = abs(sp) > tol and abs(sq) > tol
        return (sp > 0) != (sq > 0) and sp * sq < 0, transversal


def geodesic_arc(t_minus: float, t_plus: float) -> GeodesicArc:
    t_minus, t_plus = canon_angle(t_minus), canon_angle(t_plus)
    sep = abs(ang_diff(t_plus, t_minus))
    if sep <= ANGLE_TOL:
        raise DegenerateGeodesic("coincident endpoints")
    if abs(sep - math.pi) <= 1e-12:
        return GeodesicArc(t_minus, t_plus, None, math.inf)
    mid = t_minus + ang_diff(t_plus, t_minus) / 2.0
    half = sep / 2.0
    c = cmath.exp(1j * mid) / math.cos(half)
    return GeodesicArc(t_minus, t_plus, c, math.tan(half))


def geodesics_cross(t1: float, t2: float, s1: float, s2: float) -> bool:
    """Whether geodesics (t1,t2) and (s1,s2) intersect inside the disc (endpoints interleave)."""
    a = in_arc(s1, t1, t2)
    b = in_arc(s2, t1, t2)
    return a != b
