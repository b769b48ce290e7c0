"""Bowen-Series boundary coding of the octagon group.

States are the arcs [E_i, E_{i+1}) between consecutive partition points.
Arc i carries the generator e_a = g_s of the side s whose shadow starts
at or before it, and the boundary map is f = e_a^{-1} on arc i.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import hypgeo as hg
from .fuchsian import NSIDES, PAIRS, SIDE_LABEL, side_halfwidth, _pairing_map

TWO_PI = hg.TWO_PI
MATCH_TOL = 1e-8


class CodingError(RuntimeError):
    pass


@dataclass
class CodingTable:
    endpoints: np.ndarray       # sorted left endpoints; state i is [E_i, E_{i+1})
    gen: np.ndarray             # side index of e_a per state
    maps: tuple                 # side -> Moebius
    A: np.ndarray               # 0/1 transition matrix
    bar: np.ndarray | None = None
    anchor_depth: int = 60
    _succ: list = field(default_factory=list, repr=False)
    _anchor_pts: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self._succ = [np.flatnonzero(self.A[i]).tolist() for i in range(self.n)]
        self._inv = tuple(m.inverse() for m in self.maps)

    @property
    def n(self) -> int:
        return len(self.endpoints)

    def succ(self, a: int) -> list:
        return self._succ[a]

    def e(self, a: int) -> hg.Moebius:
        return self.maps[int(self.gen[a])]

    def e_inv(self, a: int) -> hg.Moebius:
        return self._inv[int(self.gen[a])]

    def arc(self, a: int):
        return float(self.endpoints[a]), float(self.endpoints[(a + 1) % self.n])

    def arc_length(self, a: int) -> float:
        lo, hi = self.arc(a)
        return (hi - lo) % TWO_PI

    def state_of(self, t: float) -> int:
        t = hg.canon_angle(t)
        i = int(np.searchsorted(self.endpoints, t, side="right")) - 1
        return i % self.n

    def midpoint(self, a: int) -> float:
        lo, _ = self.arc(a)
        return hg.canon_angle(lo + self.arc_length(a) / 2)

    def admissible(self, word) -> bool:
        return all(self.A[word[i], word[i + 1]] for i in range(len(word) - 1))

    # anchor continuation: repeatedly take the least admissible successor
    def anchor_chain(self, b: int, length: int) -> list:
        w = [b]
        while len(w) < length:
            w.append(self._succ[w[-1]][0])
        return w

    def anchor_point(self, b: int) -> float:
        """Angle of pi(b x_b) for the least-successor continuation x_b."""
        if self._anchor_pts is None:
            pts = np.empty(self.n)
            for c in range(self.n):
                w = self.anchor_chain(c, self.anchor_depth)
                t = self.midpoint(w[-1])
                for s in reversed(w[:-1]):
                    t = hg.apply_boundary(self.e(s), t)
                pts[c] = t
            self._anchor_pts = pts
        return float(self._anchor_pts[b])

    def default_anchor(self, word) -> int:
        return self._succ[word[-1]][0]

    def to_json(self) -> str:
        doc = {
            "n_states": self.n,
            "arc_left_endpoints": [float(x) for x in self.endpoints],
            "generator_side": [int(s) for s in self.gen],
            "generator_label": [SIDE_LABEL[int(s)] for s in self.gen],
            "side_maps": {SIDE_LABEL[s]: [[m.alpha.real, m.alpha.imag], [m.beta.real, m.beta.imag]]
                          for s, m in enumerate(self.maps)},
            "transition_matrix": self.A.astype(int).tolist(),
            "bar": None if self.bar is None else [int(x) for x in self.bar],
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CodingTable":
        doc = json.loads(text)
        from .fuchsian import LABEL_SIDE
        maps = [None] * NSIDES
        for lab, ((ar, ai), (br, bi)) in doc["side_maps"].items():
            maps[LABEL_SIDE[lab]] = hg.Moebius(complex(ar, ai), complex(br, bi))
        bar = doc["bar"]
        return cls(np.array(doc["arc_left_endpoints"]), np.array(doc["generator_side"]), tuple(maps),
                   np.array(doc["transition_matrix"], dtype=np.int8),
                   None if bar is None else np.array(bar))


def _side_start_points():
    om = side_halfwidth()
    return [hg.canon_angle(s * math.pi / 4 - om) for s in range(NSIDES)]


def _close(t, pts, tol=1e-9):
    return any(abs(hg.ang_diff(t, p)) < tol for p in pts)


def side_geodesic_endpoints():
    om = side_halfwidth()
    out = []
    for s in range(NSIDES):
        out += [hg.canon_angle(s * math.pi / 4 - om), hg.canon_angle(s * math.pi / 4 + om)]
    return out


def build_bowen_series(poly=None, pairing=None, max_points: int = 512) -> CodingTable:
    """Close the side-geodesic endpoints under f and read off the Markov table."""
    maps = tuple(pairing.maps) if pairing is not None else tuple(_pairing_map(s) for s in range(NSIDES))
    inv = [m.inverse() for m in maps]
    starts = _side_start_points()

    def side_at(t):
        for s in range(NSIDES):
            if hg.in_arc(t, starts[s], starts[(s + 1) % NSIDES]):
                return s
        raise CodingError("angle not covered by the side arcs")

    pts = side_geodesic_endpoints()
    frontier = list(pts)
    while frontier:
        nxt = []
        for t in frontier:
            # images under the branch on either side of t
            for s in {side_at(t), side_at(hg.canon_angle(t - 1e-12))}:
                u = hg.apply_boundary(inv[s], t)
                if not _close(u, pts):
                    pts.append(u)
                    nxt.append(u)
        if len(pts) > max_points:
            raise CodingError("partition orbit does not close")
        frontier = nxt
    E = np.sort(np.array([hg.canon_angle(p) for p in pts]))
    n = len(E)
    gen = np.array([side_at(hg.canon_angle(E[i] + 1e-9)) for i in range(n)])

    def nearest(t):
        d = np.abs((E - t + math.pi) % TWO_PI - math.pi)
        j = int(np.argmin(d))
        return j, float(d[j])

    A = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        s = gen[i]
        lo, hi = E[i], E[(i + 1) % n]
        j0, d0 = nearest(hg.apply_boundary(inv[s], lo))
        j1, d1 = nearest(hg.apply_boundary(inv[s], hi))
        if d0 > MATCH_TOL or d1 > MATCH_TOL:
            raise CodingError(f"(Mar) fails at state {i}: image endpoint off the partition by {max(d0, d1):.3g}")
        k = j0
        while k != j1:
            A[i, k] = 1
            k = (k + 1) % n
    table = CodingTable(E, gen, maps, A, bar=find_bar(E, gen, A))
    rep = structural_checks(table)
    for name in ("partition", "res", "mar", "tr"):
        if not rep[name]:
            raise CodingError(f"({name}) validation failed: {rep[name + '_detail']}")
    return table


def find_bar(E, gen, A):
    """Search for an involution a -> abar with e_abar = e_a^{-1} and [a,b] ~ [bbar, abar]."""
    import networkx as nx
    from networkx.algorithms import isomorphism as iso
    n = len(E)
    G = nx.DiGraph()
    R = nx.DiGraph()
    for i in range(n):
        G.add_node(i, c=int(gen[i]))
        R.add_node(i, c=int(PAIRS[int(gen[i])]))
    for i, j in zip(*np.nonzero(A)):
        G.add_edge(int(i), int(j))
        R.add_edge(int(j), int(i))
    gm = iso.DiGraphMatcher(G, R, node_match=lambda x, y: x["c"] == y["c"])
    for m in gm.isomorphisms_iter():
        bar = np.array([m[i] for i in range(n)])
        if all(bar[bar[i]] == i for i in range(n)):
            return bar
    return None


def structural_checks(table: CodingTable) -> dict:
    import networkx as nx
    n = table.n
    rep = {}
    total = math.fsum(table.arc_length(a) for a in range(n))
    rep["partition"] = abs(total - TWO_PI) < 1e-10 and bool(np.all(np.diff(table.endpoints) > 0))
    rep["partition_detail"] = f"arc length sum {total!r}"
    # (Res): on arc interiors the map acts by e_a^{-1}
    bad = []
    for a in range(n):
        lo, _ = table.arc(a)
        for frac in (0.25, 0.5, 0.75):
            t = hg.canon_angle(lo + frac * table.arc_length(a))
            b, u = bs_map(table, t)
            if b != a or abs(hg.ang_diff(u, hg.apply_boundary(table.e(a).inverse(), t))) > 1e-12:
                bad.append(a)
    rep["res"] = not bad
    rep["res_detail"] = f"offending states {sorted(set(bad))}"
    # (Mar): image of each arc is a union of arcs
    bad = []
    for a in range(n):
        lo, hi = table.arc(a)
        for t in (lo, hi):
            u = hg.apply_boundary(table.e_inv(a), t)
            if np.min(np.abs((table.endpoints - u + math.pi) % TWO_PI - math.pi)) > MATCH_TOL:
                bad.append(a)
    rep["mar"] = not bad
    rep["mar_detail"] = f"offending states {sorted(set(bad))}"
    G = nx.DiGraph()
    G.add_nodes_from(range(n))
    G.add_edges_from((int(i), int(j)) for i, j in zip(*np.nonzero(table.A)))
    ncomp = nx.number_strongly_connected_components(G)
    rep["tr"] = ncomp == 1
    rep["tr_detail"] = f"{ncomp} strongly connected components"
    rep["bar"] = table.bar is not None and bar_symmetric(table)
    rep["bar_detail"] = "no involution compatible with the transition graph" if table.bar is None else "ok"
    return rep


def bar_symmetric(table: CodingTable) -> bool:
    if table.bar is None:
        return False
    b = table.bar
    for a in range(table.n):
        if not hg.same_element(table.e(b[a]), table.e(a).inverse(), 1e-9):
            return False
        for c in range(table.n):
            if table.A[a, c] != table.A[b[c], b[a]]:
                return False
    return True


def bs_map(table: CodingTable, t: float):
    a = table.state_of(t)
    return a, hg.apply_boundary(table.e_inv(a), t)


def boundary_expansion(table: CodingTable, t: float, n: int, dps: int | None = None) -> list:
    """First n symbols of the orbit of t; dps switches to mpmath arithmetic."""
    if n < 1:
        raise ValueError("n must be positive")
    if dps is None:
        out = []
        for _ in range(n):
            a, t = bs_map(table, t)
            out.append(a)
        return out
    return _expansion_mp(table, t, n, dps)


def _mp_side_maps(dps):
    import mpmath as mp
    with mp.workdps(dps):
        h = mp.acosh(1 / mp.tan(mp.pi / 8))
        out = []
        for s in range(NSIDES):
            th = s * mp.pi / 4
            tp = PAIRS[s] * mp.pi / 4
            u = mp.expj(th)
            ta, tb = mp.cosh(h), mp.sinh(h) * u
            r = mp.expj((th + mp.pi - tp) / 2)
            # translation @ rotation, rotation has beta = 0
            out.append((ta * r, tb * mp.conj(r)))
        return out


_MP_CACHE: dict = {}


def _expansion_mp(table, t, n, dps):
    import mpmath as mp
    if dps not in _MP_CACHE:
        _MP_CACHE[dps] = _mp_side_maps(dps)
    maps = _MP_CACHE[dps]
    out = []
    with mp.workdps(dps):
        ends = [mp.mpf(float(x)) for x in table.endpoints]
        two_pi = 2 * mp.pi
        z = mp.expj(mp.mpf(t))
        for _ in range(n):
            ang = mp.atan2(mp.im(z), mp.re(z))
            if ang < 0:
                ang += two_pi
            i = max(0, _bisect(ends, ang) - 1)
            if ang < ends[0]:
                i = table.n - 1
            out.append(i)
            al, be = maps[int(table.gen[i])]
            # inverse map: (conj(al) z - be) / (-conj(be) z + al)
            z = (mp.conj(al) * z - be) / (-mp.conj(be) * z + al)
            z = z / abs(z)
    return out


def _bisect(seq, x):
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if x < seq[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def expansion_dps(table: CodingTable, n: int) -> int:
    """Digits needed to keep n steps of the expanding map accurate."""
    worst = 0.0
    for a in range(table.n):
        lo, _ = table.arc(a)
        for frac in np.linspace(0, 1, 9):
            t = lo + frac * table.arc_length(a)
            worst = max(worst, hg.boundary_derivative(table.e_inv(a), t))
    return 30 + int(math.ceil(n * math.log10(worst)))


def cylinder_map(table: CodingTable, word) -> hg.Moebius:
    """e_{w0} e_{w1} ... e_{w_{n-1}}."""
    return hg.compose_all(table.e(a) for a in word)


def pi_sigma(table: CodingTable, word, anchor: int | None = None):
    """Point of the sequence word + anchor + x_anchor, with the cylinder arc length as error bound."""
    word = list(word)
    if not word:
        raise ValueError("empty word")
    if anchor is None:
        anchor = table.default_anchor(word)
    if not table.admissible(word + [anchor]):
        raise CodingError("inadmissible word")
    # apply the maps one at a time; each is contracting on its cylinder
    t = table.anchor_point(anchor)
    lo, hi = table.arc(anchor)
    for a in reversed(word):
        m = table.e(a)
        t = hg.apply_boundary(m, t)
        lo = hg.apply_boundary(m, lo)
        hi = hg.apply_boundary(m, hi)
    return t, (hi - lo) % TWO_PI


def phi_birkhoff(table: CodingTable, word, anchor: int | None = None, delta: float = 1.0) -> float:
    """delta * log |(e_{w0} ... e_{w_{n-1}})'(y_anchor)|."""
    word = list(word)
    if anchor is None:
        anchor = table.default_anchor(word)
    if not table.admissible(word + [anchor]):
        raise CodingError("inadmissible word")
    return delta * _log_deriv(table, word, table.anchor_point(anchor))


def _log_deriv(table: CodingTable, word, t: float) -> float:
    total = 0.0
    for a in reversed(word):
        m = table.e(a)
        total += math.log(hg.boundary_derivative(m, t))
        t = hg.apply_boundary(m, t)
    return total


def random_word(table: CodingTable, length: int, rng, start: int | None = None) -> list:
    a = int(rng.integers(table.n)) if start is None else start
    w = [a]
    while len(w) < length:
        s = table.succ(w[-1])
        w.append(int(s[rng.integers(len(s))]))
    return w


def group_element_of(table: CodingTable, word) -> hg.Moebius:
    """gamma = e_{a_n}^{-1} ... e_{a_1}^{-1}, the inverse of the cylinder map."""
    return cylinder_map(table, word).inverse()


@dataclass
class CodingReport:
    partition: bool
    res: bool
    mar: bool
    tr: bool
    bar: bool
    semiconjugacy_max_err: float
    dist_B: float
    bnd_counts: dict
    var_m: list
    var_rate: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.partition and self.res and self.mar and self.tr and self.bar
                and self.semiconjugacy_max_err < 1e-6 and self.var_rate < 1)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["bnd_counts"] = {str(k): v for k, v in self.bnd_counts.items()}
        d["passed"] = self.passed
        return d


def semiconjugacy_error(table: CodingTable, rng, n_words: int = 1000, depth: int = 20) -> float:
    worst = 0.0
    for _ in range(n_words):
        w = random_word(table, depth, rng)
        x, _ = pi_sigma(table, w)
        y, _ = pi_sigma(table, w[1:])
        a, fx = bs_map(table, x)
        if a != w[0]:
            worst = max(worst, math.inf)
            continue
        worst = max(worst, abs(hg.ang_diff(fx, y)))
    return worst


def variation_estimates(table: CodingTable, rng, ms=range(2, 11), samples: int = 300, tail: int = 30):
    """max |phi(x) - phi(x')| over sampled pairs sharing an m-cylinder."""
    out = []
    for m in ms:
        worst = 0.0
        for _ in range(samples):
            u = random_word(table, m, rng)
            vals = []
            for _ in range(2):
                w = list(u)
                while len(w) < m + tail:
                    s = table.succ(w[-1])
                    w.append(int(s[rng.integers(len(s))]))
                t, _ = pi_sigma(table, w[1:])
                vals.append(math.log(hg.boundary_derivative(table.e(w[0]), t)))
            worst = max(worst, abs(vals[0] - vals[1]))
        out.append(worst)
    return list(ms), out


def fit_rate(ms, vals) -> float:
    ms = np.asarray(ms, float)
    y = np.log(np.asarray(vals, float))
    slope = np.polyfit(ms, y, 1)[0]
    return float(math.exp(slope))


def distortion_B(table: CodingTable, rng, samples: int = 1000, max_len: int = 8) -> float:
    worst = 1.0
    for _ in range(samples):
        L = int(rng.integers(1, max_len + 1))
        w = random_word(table, L, rng)
        s = table.succ(w[-1])
        b = int(s[rng.integers(len(s))])
        lo, _ = table.arc(b)
        ta = lo + rng.uniform(0, 1) * table.arc_length(b)
        tb = lo + rng.uniform(0, 1) * table.arc_length(b)
        r = math.exp(_log_deriv(table, w, ta) - _log_deriv(table, w, tb))
        worst = max(worst, r, 1 / r)
    return worst


def bnd_counts(table: CodingTable, targets, depths=(4, 5)) -> dict:
    """For each depth D, max over targets of #admissible words of length <= D with e-product = target."""
    want = {m.key(): m for m in targets}
    out = {}
    D = max(depths)
    stack = [([a], table.e(a)) for a in range(table.n)]
    per_depth = {d: {k: 0 for k in want} for d in depths}
    while stack:
        w, m = stack.pop()
        k = m.key()
        if k in want:
            for d in depths:
                if len(w) <= d:
                    per_depth[d][k] += 1
        if len(w) < D:
            for b in table.succ(w[-1]):
                stack.append((w + [b], hg.compose(m, table.e(b))))
    for d in depths:
        out[d] = max(per_depth[d].values()) if per_depth[d] else 0
    return out


def validate_coding(table: CodingTable, rng, n_words: int = 1000, var_samples: int = 200,
                    bnd_depths=(4, 5), bnd_targets=None) -> CodingReport:
    rep = structural_checks(table)
    semi = semiconjugacy_error(table, rng, n_words)
    B = distortion_B(table, rng, n_words)
    if bnd_targets is None:
        from .fuchsian import enumerate_elements, SidePairing
        els = enumerate_elements(SidePairing(table.maps), 2)
        bnd_targets = [w.moebius for w in els.values() if w.length >= 1]
    counts = bnd_counts(table, bnd_targets, bnd_depths)
    ms, var = variation_estimates(table, rng, samples=var_samples)
    rate = fit_rate(ms, var)
    return CodingReport(rep["partition"], rep["res"], rep["mar"], rep["tr"], rep["bar"], semi, B, counts,
                        var, rate, {k: v for k, v in rep.items() if k.endswith("_detail")})


def tessellation_vertex_geodesic_endpoints(poly) -> list:
    """Endpoints of all tessellation geodesics through the vertices of F0."""
    pts = []
    nv = len(poly.vertices)
    for j, v in enumerate(poly.vertices):
        m = hg.normalized(1 + 0j, -v)          # sends v to 0
        mi = m.inverse()
        w = m(poly.vertices[(j + 1) % nv])
        base = math.atan2(w.imag, w.real)
        for k in range(4):
            for t in (base + k * math.pi / 4, base + k * math.pi / 4 + math.pi):
                pts.append(hg.apply_boundary(mi, t))
    uniq = []
    for t in pts:
        if not _close(t, uniq):
            uniq.append(t)
    return sorted(uniq)


def distortion_ratio(table: CodingTable, word, delta: float = 1.0) -> float:
    """exp(phi_n) / exp(-delta d(0, gamma^{-1} 0)) with gamma^{-1} = e_{a1} ... e_{an}."""
    m = hg.IDENTITY
    for a in word:
        m = hg.compose(m, table.e(a))
    return math.exp(phi_birkhoff(table, word, delta=delta) + delta * hg.dist0(m))


def distortion_band(table: CodingTable, rng, lengths, delta: float = 1.0, n_words: int = 500) -> dict:
    """max/min of the ratio over random words with lengths drawn from the given range."""
    lengths = list(lengths)
    vals = []
    for _ in range(n_words):
        L = int(lengths[rng.integers(len(lengths))])
        vals.append(distortion_ratio(table, random_word(table, L, rng), delta))
    lo, hi = min(vals), max(vals)
    return {"min": lo, "max": hi, "width": hi / lo, "n": n_words}
