"""Cutting sequences of geodesics through the octagon tessellation.

A pair (xi-, xi+) of circle angles determines an oriented geodesic.  Tracing
uses the first-return map: find the side of F0 through which the geodesic
leaves, record it, and pull the pair back by that side pairing.  Edge s is
crossed exactly when its two vertices lie on opposite sides of the geodesic;
of the two crossed edges, the exit is the one whose shadow arc holds xi+.

Backward labels come from tracing the reversed pair, e_{-i-1} := f_i, and
copies are tracked as side words with gamma_{i+1} = gamma_i e_i for i >= 0
and gamma_i = gamma_{i+1} e_i for i < 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import mpmath as mp

from . import hypgeo as hg
from .fuchsian import NSIDES, PAIRS

PERTURB = 1e-7
MAX_PERTURB = 3
VERTEX_TOL = 1e-8


class TraceError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeodesicPair:
    xi_minus: float
    xi_plus: float

    def __post_init__(self):
        if abs(hg.ang_diff(self.xi_minus, self.xi_plus)) <= hg.ANGLE_TOL:
            raise hg.DegenerateGeodesic("coincident endpoints")

    @cached_property
    def arc(self) -> hg.GeodesicArc:
        return hg.geodesic_arc(self.xi_minus, self.xi_plus)

    def reversed(self) -> "GeodesicPair":
        return GeodesicPair(self.xi_plus, self.xi_minus)


# ---------------------------------------------------------------- mp geometry

_GEOM: dict = {}


def _geometry(dps: int):
    """Vertices, shadow arcs and side maps at the given precision."""
    if dps in _GEOM:
        return _GEOM[dps]
    from .coding import _mp_side_maps
    with mp.workdps(dps):
        d = mp.acosh(mp.cot(mp.pi / 8) ** 2)
        R = mp.tanh(d / 2)
        h = mp.acosh(mp.cot(mp.pi / 8))
        om = mp.acos(mp.tanh(h))
        verts = [R * mp.expj((2 * j - 1) * mp.pi / 8) for j in range(NSIDES)]
        # shadow of side s: points whose angle to s*pi/4 is below om
        shadows = [(mp.expj(-s * mp.pi / 4), mp.cos(om)) for s in range(NSIDES)]
        maps = _mp_side_maps(dps)
    _GEOM[dps] = (verts, shadows, maps)
    return _GEOM[dps]


def _angle(z):
    a = mp.atan2(mp.im(z), mp.re(z))
    return a + 2 * mp.pi if a < 0 else a


def _in_shadow(u, shadow):
    rot, c = shadow
    return mp.re(u * rot) > c


def _fangle(u) -> float:
    return math.atan2(float(mp.im(u)), float(mp.re(u))) % (2 * math.pi)


def _side_values(um, up, verts):
    """cos of the angle between w(v) and w(c) for each vertex v.

    w(z) = (z - xi-)/(xi+ - z) sends the geodesic to a line through 0 and
    the circle to the perpendicular line; c is the midpoint of the
    counter-clockwise arc from xi- to xi+, so positive means that side.
    """
    c = um + up
    if abs(c) < mp.mpf(10) ** (-mp.mp.dps // 2):
        c = um * 1j                        # antipodal endpoints
    c = c / abs(c)
    if mp.im(mp.conj(um) * up) < 0:       # counter-clockwise span exceeds pi
        c = -c
    wc = (c - um) / (up - c)
    out = []
    for v in verts:
        w = (v - um) / (up - v)
        out.append(mp.re(w * mp.conj(wc)) / (abs(w) * abs(wc)))
    return out


def _crossed_edges(um, up, verts, tol):
    vals = _side_values(um, up, verts)
    if min(abs(x) for x in vals) < tol:
        return None
    return [s for s in range(NSIDES) if (vals[s] > 0) != (vals[(s + 1) % NSIDES] > 0)]


def _exit_side(um, up, verts, shadows, tol):
    """Exit side of F0, [] when the geodesic misses F0, None near a vertex."""
    crossed = _crossed_edges(um, up, verts, tol)
    if crossed is None:
        return None
    if not crossed:
        return []
    ex = [s for s in crossed if _in_shadow(up, shadows[s])]
    if len(crossed) != 2 or len(ex) != 1:
        return None
    return ex[0]


def _pull(maps, s, z):
    """g_s^{-1} on a circle point."""
    al, be = maps[s]
    w = (mp.conj(al) * z - be) / (-mp.conj(be) * z + al)
    return w / abs(w)


def _default_dps(n: int) -> int:
    return int(1.5 * n) + 40


def in_R(pair: GeodesicPair, tol: float = 1e-9) -> bool:
    """Whether the geodesic meets the open polygon F0 (two edges crossed)."""
    verts, _, _ = _geometry(30)
    xp = pair.xi_plus
    for _ in range(MAX_PERTURB + 1):
        with mp.workdps(30):
            crossed = _crossed_edges(mp.expj(pair.xi_minus), mp.expj(xp), verts, tol)
        if crossed is not None:
            return len(crossed) >= 2
        xp += PERTURB
    raise TraceError("geodesic stays within tolerance of a vertex after perturbation")


def _trace_forward(xm, xp, n: int, dps: int):
    """Exit sides e_0 .. e_{n-1} and the frames visited, with perturbation."""
    verts, shadows, maps = _geometry(dps)
    perturbed = 0
    while True:
        with mp.workdps(dps):
            um, up = mp.expj(mp.mpf(xm)), mp.expj(mp.mpf(xp))
            labels, frames = [], []
            ok = True
            for _ in range(n):
                s = _exit_side(um, up, verts, shadows, VERTEX_TOL)
                if s is None:
                    ok = False
                    break
                if s == []:
                    raise TraceError("pair is not in R")
                frames.append((_fangle(um), _fangle(up)))
                labels.append(s)
                um, up = _pull(maps, s, um), _pull(maps, s, up)
            frames.append((_fangle(um), _fangle(up)))
        if ok:
            return labels, frames, perturbed, xp
        if perturbed >= MAX_PERTURB:
            raise TraceError("vertex proximity persists after perturbation")
        perturbed += 1
        xp += PERTURB


@dataclass
class CuttingWindow:
    pair: GeodesicPair
    labels: dict                 # i -> side index of e_i
    copies: dict                 # i -> side word gamma_i with F_i = gamma_i F0
    frames: dict                 # i -> (xi-, xi+) pulled back by gamma_i (forward only)
    perturbations: int = 0
    traced_plus: float = 0.0

    @property
    def n_plus(self) -> int:
        return max(self.labels)

    @property
    def n_minus(self) -> int:
        return -min(self.labels) if min(self.labels) < 0 else 0

    def forward(self, n=None) -> list:
        n = self.n_plus if n is None else n
        return [self.labels[i] for i in range(n + 1)]

    def rows(self):
        for i in sorted(self.copies):
            yield i, self.labels.get(i, ""), "".join(str(s) for s in self.copies[i])


def trace_cutting(pair: GeodesicPair, n_minus: int, n_plus: int, dps: int | None = None) -> CuttingWindow:
    """Labels e_i for -n_minus <= i <= n_plus and copies gamma_i."""
    if not in_R(pair):
        raise TraceError("pair is not in R")
    dps = dps or _default_dps(max(n_plus, n_minus) + 1)
    fwd, frames, pert, xp = _trace_forward(pair.xi_minus, pair.xi_plus, n_plus + 1, dps)
    labels = {i: s for i, s in enumerate(fwd)}
    copies = {0: ()}
    for i in range(n_plus + 1):
        copies[i + 1] = copies[i] + (labels[i],)
    if n_minus > 0:
        back, _, pert_b, _ = _trace_forward(pair.xi_plus, pair.xi_minus, n_minus, dps)
        pert += pert_b
        for i, f in enumerate(back):
            labels[-i - 1] = f
        for i in range(-1, -n_minus - 1, -1):
            copies[i] = copies[i + 1] + (labels[i],)
    return CuttingWindow(pair, labels, copies, dict(enumerate(frames)), pert, xp)


def first_return(pair: GeodesicPair, dps: int = 60) -> GeodesicPair:
    """e_0^{-1} applied to both endpoints."""
    if not in_R(pair):
        raise TraceError("pair is not in R")
    verts, shadows, maps = _geometry(dps)
    with mp.workdps(dps):
        um, up = mp.expj(mp.mpf(pair.xi_minus)), mp.expj(mp.mpf(pair.xi_plus))
        s = _exit_side(um, up, verts, shadows, VERTEX_TOL)
        if s is None or s == []:
            raise TraceError("exit side undetermined")
        a, b = _pull(maps, s, um), _pull(maps, s, up)
        return GeodesicPair(float(_angle(a)), float(_angle(b)))


def composite_image(pair: GeodesicPair, labels, pairing) -> GeodesicPair:
    """(e_{n-1}^{-1} ... e_0^{-1}) applied to both endpoints in double precision."""
    m = hg.IDENTITY
    for s in labels:
        m = hg.compose(pairing.maps[s].inverse(), m)
    return GeodesicPair(hg.apply_boundary(m, pair.xi_minus), hg.apply_boundary(m, pair.xi_plus))


def eta(window: CuttingWindow, n: int, sign: str, model):
    """eta_n^+ = theta(e_n)^{-1} ... theta(e_0)^{-1}; eta_n^- = theta(e_{-n-1})^{-1} ... theta(e_{-1})^{-1}."""
    if sign == "+":
        idx = range(0, n + 1)
    elif sign == "-":
        idx = range(-1, -n - 2, -1)
    else:
        raise ValueError("sign must be + or -")
    g = model.identity
    for i in idx:
        if i not in window.labels:
            raise ValueError("cutting window too short")
        g = model.mul(model.inv(model.side_image(window.labels[i])), g)
    return g


def eta_sequence(window: CuttingWindow, sign: str, model, n_max: int) -> list:
    """[eta_0, ..., eta_{n_max}] built incrementally."""
    out = []
    g = model.identity
    for n in range(n_max + 1):
        i = n if sign == "+" else -n - 1
        if i not in window.labels:
            raise ValueError("cutting window too short")
        g = model.mul(model.inv(model.side_image(window.labels[i])), g)
        out.append(g)
    return out


def geometric_backward(pair: GeodesicPair, n: int, dps: int | None = None) -> list:
    """Entry sides s'_i of the pulled-back frames when walking the geodesic backward.

    The copy behind F0 is g_{s'} F0, so the geometric label there is the
    inverse pairing g_{s'}^{-1}; returned as the side index of that inverse.
    """
    dps = dps or _default_dps(n)
    verts, shadows, maps = _geometry(dps)
    out = []
    with mp.workdps(dps):
        um, up = mp.expj(mp.mpf(pair.xi_minus)), mp.expj(mp.mpf(pair.xi_plus))
        for _ in range(n):
            crossed = _crossed_edges(um, up, verts, VERTEX_TOL)
            if crossed is None or len(crossed) != 2:
                raise TraceError("entry side undetermined")
            ent = [s for s in crossed if _in_shadow(um, shadows[s])]
            if len(ent) != 1:
                raise TraceError("entry side undetermined")
            s = ent[0]
            out.append(PAIRS[s])
            um, up = _pull(maps, s, um), _pull(maps, s, up)
    return out


def sample_pair_in_R(rng, max_tries: int = 1000) -> GeodesicPair:
    for _ in range(max_tries):
        a, b = rng.uniform(0.0, 2 * math.pi, size=2)
        if abs(hg.ang_diff(a, b)) < 1e-3:
            continue
        p = GeodesicPair(float(a), float(b))
        if in_R(p):
            return p
    raise TraceError("no pair in R found")


def pair_through(rng, xi_plus: float, max_tries: int = 1000) -> GeodesicPair:
    """A pair in R with the given forward endpoint."""
    for _ in range(max_tries):
        a = float(rng.uniform(0.0, 2 * math.pi))
        if abs(hg.ang_diff(a, xi_plus)) < 1e-3:
            continue
        p = GeodesicPair(a, xi_plus)
        if in_R(p):
            return p
    raise TraceError("no pair in R found")
