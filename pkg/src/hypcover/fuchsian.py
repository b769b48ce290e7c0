"""The genus-2 surface group of the regular octagon.

Side s of the octagon faces direction s*pi/4.  The pairing map g_s carries
F0 onto the neighbouring copy across side s, so g_s(F0) and F0 share side s.
Labels: A=g0, B=g3, C=g4, D=g7 and lowercase for inverses, which makes
[A,B][C,D] the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hypgeo as hg
from .hypgeo import Moebius

NSIDES = 8
PAIRS = {0: 2, 2: 0, 1: 3, 3: 1, 4: 6, 6: 4, 5: 7, 7: 5}
SIDE_LABEL = {0: "A", 3: "B", 4: "C", 7: "D", 2: "a", 1: "b", 6: "c", 5: "d"}
LABEL_SIDE = {v: k for k, v in SIDE_LABEL.items()}
RELATOR = "ABabCDcd"
DEFAULT_CAP = 12


class ConstructionError(RuntimeError):
    pass


def vertex_radius() -> float:
    d = math.acosh(1.0 / math.tan(math.pi / 8) ** 2)
    return math.tanh(d / 2)


def side_halfwidth() -> float:
    """Half the angular width of the shadow cut off by one side geodesic."""
    h = math.acosh(1.0 / math.tan(math.pi / 8))
    return math.acos(math.tanh(h))


@dataclass(frozen=True)
class FundamentalPolygon:
    vertices: tuple
    edges: tuple                # ((i, j), label) per side
    side_geodesics: tuple       # GeodesicArc per side, oriented so F0 is on the negative side
    radius: float

    def contains(self, z: complex, tol: float = 1e-9) -> bool:
        return all(g.side(z) < tol for g in self.side_geodesics)

    def violations(self, z: complex):
        return [s for s, g in enumerate(self.side_geodesics) if g.side(z) > 0]


@dataclass(frozen=True)
class SidePairing:
    maps: tuple                 # side -> Moebius g_s
    pairs: dict = field(default_factory=lambda: dict(PAIRS))

    def label_map(self, label: str) -> Moebius:
        return self.maps[LABEL_SIDE[label]]

    def word_map(self, sides) -> Moebius:
        return hg.compose_all(self.maps[s] for s in sides)


@dataclass(frozen=True)
class GroupWord:
    sides: tuple
    moebius: Moebius

    @property
    def length(self) -> int:
        return len(self.sides)

    @property
    def label(self) -> str:
        return "".join(SIDE_LABEL[s] for s in self.sides)

    def key(self) -> tuple:
        return self.moebius.key()


def _pairing_map(s: int) -> Moebius:
    h = math.acosh(1.0 / math.tan(math.pi / 8))
    th = s * math.pi / 4
    tp = PAIRS[s] * math.pi / 4
    return hg.compose(hg.translation(th, 2 * h), hg.rotation(th + math.pi - tp))


def build_octagon():
    R = vertex_radius()
    om = side_halfwidth()
    verts = tuple(R * complex(math.cos((2 * j - 1) * math.pi / 8), math.sin((2 * j - 1) * math.pi / 8))
                  for j in range(NSIDES))
    edges = tuple(((s, (s + 1) % NSIDES), SIDE_LABEL[s]) for s in range(NSIDES))
    # positive side of each side geodesic is its shadow, so F0 is negative
    geos = tuple(hg.geodesic_arc(s * math.pi / 4 - om, s * math.pi / 4 + om) for s in range(NSIDES))
    poly = FundamentalPolygon(verts, edges, geos, R)
    pairing = SidePairing(tuple(_pairing_map(s) for s in range(NSIDES)))
    validate_octagon(poly, pairing)
    return poly, pairing


def interior_angle(poly: FundamentalPolygon, j: int) -> float:
    """Angle at vertex j between the two incident hyperbolic edges."""
    v = poly.vertices[j]
    # move v to 0; edges become diameters, so the angle is Euclidean
    m = hg.Moebius(1 + 0j, -v)
    m = hg.normalized(m.alpha, m.beta)
    a = m(poly.vertices[(j - 1) % NSIDES])
    b = m(poly.vertices[(j + 1) % NSIDES])
    return abs(hg.ang_diff(math.atan2(a.imag, a.real), math.atan2(b.imag, b.real)))


def validate_octagon(poly: FundamentalPolygon, pairing: SidePairing) -> None:
    for j, v in enumerate(poly.vertices):
        if abs(abs(v) - poly.radius) > 1e-12:
            raise ConstructionError(f"vertex {j} off the common circle")
        if abs(interior_angle(poly, j) - math.pi / 4) > 1e-6:
            raise ConstructionError(f"interior angle at vertex {j}")
    if not poly.contains(0j):
        raise ConstructionError("0 not interior")
    for s in range(NSIDES):
        g = pairing.maps[s]
        if abs(g.det() - 1) > 1e-9:
            raise ConstructionError(f"pairing {s} not normalized")
        p = PAIRS[s]
        (i, j), _ = poly.edges[p]
        (k, l), _ = poly.edges[s]
        # the partner edge lands on side s with reversed orientation
        if abs(g(poly.vertices[i]) - poly.vertices[l]) > 1e-8 or abs(g(poly.vertices[j]) - poly.vertices[k]) > 1e-8:
            raise ConstructionError(f"pairing {s} does not carry side {p} onto side {s}")
        if not hg.same_element(hg.compose(g, pairing.maps[p]), hg.IDENTITY):
            raise ConstructionError(f"pairing {s} and {p} are not inverse")
    rel = pairing.word_map([LABEL_SIDE[c] for c in RELATOR])
    if not hg.same_element(rel, hg.IDENTITY):
        raise ConstructionError("relator [A,B][C,D] is not the identity")


def relator_map(pairing: SidePairing) -> Moebius:
    return pairing.word_map([LABEL_SIDE[c] for c in RELATOR])


def enumerate_elements(pairing: SidePairing, max_len: int, cap: int = DEFAULT_CAP):
    """Elements of word length <= max_len keyed by rounded matrix.

    Built sphere by sphere, so each element keeps a shortest word.
    """
    if max_len > cap:
        raise ValueError(f"max_len {max_len} exceeds cap {cap}")
    ident = GroupWord((), hg.IDENTITY)
    out = {ident.key(): ident}
    sphere = [ident]
    for _ in range(max_len):
        nxt = []
        for w in sphere:
            last = w.sides[-1] if w.sides else None
            for s in range(NSIDES):
                if last is not None and PAIRS[last] == s:
                    continue
                m = hg.compose(w.moebius, pairing.maps[s])
                gw = GroupWord(w.sides + (s,), m)
                k = gw.key()
                if k not in out:
                    out[k] = gw
                    nxt.append(gw)
        sphere = nxt
    return out


def counts_by_length(elements) -> list:
    L = max(w.length for w in elements.values())
    c = [0] * (L + 1)
    for w in elements.values():
        c[w.length] += 1
    return c


def theta_image(model, sides):
    g = model.identity
    for s in sides:
        g = model.mul(g, model.side_image(s))
    return g


def poincare_partial(pairing: SidePairing, delta: float, max_len: int, model=None, elements=None):
    """Partial Poincare series over elements in ker(theta) of word length <= max_len.

    Returns (total, per_length) with per_length[L] the contribution of length L.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if elements is None:
        elements = enumerate_elements(pairing, max_len)
    per = [0.0] * (max_len + 1)
    for w in elements.values():
        if w.length > max_len:
            continue
        if model is not None and not model.is_identity(theta_image(model, w.sides)):
            continue
        per[w.length] += math.exp(-delta * hg.dist0(w.moebius))
    return math.fsum(per), per


class LocateError(RuntimeError):
    pass


def locate_copy(poly: FundamentalPolygon, pairing: SidePairing, z: complex, max_steps: int = 64,
                tol: float = 1e-9) -> GroupWord:
    """gamma with gamma^{-1} z in F0, found by walking across violated sides."""
    hg.check_interior(z)
    sides = []
    m = hg.IDENTITY
    u = z
    for _ in range(max_steps):
        if poly.contains(u, tol):
            return GroupWord(tuple(sides), m)
        bad = poly.violations(u)
        # cross the violated side that brings the point closest to the origin
        best = min(bad, key=lambda s: (abs(pairing.maps[s].inverse()(u)), s))
        u = pairing.maps[best].inverse()(u)
        sides.append(best)
        m = hg.compose(m, pairing.maps[best])
    raise LocateError(f"walk from {z} did not reach F0 in {max_steps} steps")


def reduce_sides(sides) -> tuple:
    """Free reduction of a side word (cancel g_s g_{pair(s)})."""
    out = []
    for s in sides:
        if out and PAIRS[out[-1]] == s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def polygon_sample(poly: FundamentalPolygon, n: int, rng) -> np.ndarray:
    """Rejection sample of n interior points of F0."""
    pts = []
    while len(pts) < n:
        z = complex(*rng.uniform(-poly.radius, poly.radius, size=2))
        if abs(z) < poly.radius and poly.contains(z, -1e-9):
            pts.append(z)
    return np.array(pts)
