"""Graph metrics: word metric, Gromov products, thinness, and the E_G / E_X graphs.

E_G joins g to theta(e_a)^{-1} g, so it is a Cayley graph for left
multiplication and d(g, h) = |h g^{-1}|.  Seen from the identity, two
elements travel together along their common suffix.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .shift import ExtendedSystem, FreeAbelian, FreeGroup, GroupModel


class Inconclusive(RuntimeError):
    """The vertices are not connected inside the explored ball."""


# ---------------------------------------------------------------- lazy graphs

class LazyGraph:
    """Graph given by a neighbour function, with BFS caches per origin."""

    def __init__(self, neighbors, undirected: bool = True, max_depth: int = 64):
        self.neighbors = neighbors
        self.undirected = undirected
        self.max_depth = max_depth
        self._bfs = {}

    def bfs(self, origin, max_depth: int | None = None) -> dict:
        depth = self.max_depth if max_depth is None else max_depth
        got = self._bfs.get(origin)
        if got is not None and got[0] >= depth:
            return got[1]
        dist = {origin: 0}
        q = deque([origin])
        while q:
            v = q.popleft()
            if dist[v] >= depth:
                continue
            for u in self.neighbors(v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    q.append(u)
        self._bfs[origin] = (depth, dist)
        return dist

    def dist_to_set(self, a, targets, max_depth: int | None = None) -> int:
        """BFS from a that stops at the first vertex of targets."""
        depth = self.max_depth if max_depth is None else max_depth
        targets = set(targets)
        got = self._bfs.get(a)
        if got is not None:
            hits = [got[1][t] for t in targets if t in got[1]]
            if hits:
                return min(hits)
        if a in targets:
            return 0
        dist = {a: 0}
        q = deque([a])
        while q:
            v = q.popleft()
            if dist[v] >= depth:
                continue
            for u in self.neighbors(v):
                if u not in dist:
                    if u in targets:
                        return dist[v] + 1
                    dist[u] = dist[v] + 1
                    q.append(u)
        raise Inconclusive(f"no target reached from {a!r}")

    def dist(self, a, b, max_depth: int | None = None) -> int:
        return self.dist_to_set(a, (b,), max_depth)

    def geodesic(self, a, b, max_depth: int | None = None) -> list:
        """Shortest path a -> b; among equals, each step takes the least vertex key."""
        db = self.bfs(b, self.dist(a, b, max_depth))
        if a not in db:
            raise Inconclusive(f"{a!r} not reached from {b!r}")
        path = [a]
        v = a
        while v != b:
            v = min((u for u in self.neighbors(v) if db.get(u) == db[v] - 1), key=_sort_key)
            path.append(v)
        return path

    def symmetric_sample(self, vertices) -> bool:
        for v in vertices:
            for u in self.neighbors(v):
                if v not in set(self.neighbors(u)):
                    return False
        return True


def _sort_key(v):
    return repr(v)


def gromov(graph: LazyGraph, a, b, o) -> float:
    return 0.5 * (graph.dist(o, a) + graph.dist(o, b) - graph.dist(a, b))


def thinness(graph: LazyGraph, a, b, c) -> int:
    """Largest distance from a point of one side to the union of the other two."""
    sides = [graph.geodesic(a, b), graph.geodesic(b, c), graph.geodesic(c, a)]
    worst = 0
    for i, side in enumerate(sides):
        others = set(sides[(i + 1) % 3]) | set(sides[(i + 2) % 3])
        for p in side:
            worst = max(worst, graph.dist_to_set(p, others))
    return worst


def delta_estimate(graph: LazyGraph, vertices, samples: int | None = None, rng=None) -> dict:
    """Max thinness over triangles on the given vertices.

    All triangles when samples is None, else that many random triangles.
    """
    vertices = list(vertices)
    if samples is None:
        triples = itertools.combinations(vertices, 3)
        count = math.comb(len(vertices), 3)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        idx = rng.integers(len(vertices), size=(samples, 3))
        triples = ((vertices[i], vertices[j], vertices[k]) for i, j, k in idx)
        count = samples
    worst = 0
    for t in triples:
        worst = max(worst, thinness(graph, *t))
    return {"delta_hat": worst, "triangles": count, "exhaustive": samples is None}


def in_U(graph: LazyGraph, a, b, c, delta_hat: float, inflate: float = 1.0) -> bool:
    """c in U_{a,b}: |b ^ c|_a >= d(a, b) - 7 delta with delta = delta_hat + inflate."""
    delta = delta_hat + inflate
    return gromov(graph, b, c, a) >= graph.dist(a, b) - 7 * delta


# ---------------------------------------------------------------- group graphs

def group_moves(model: GroupModel, images) -> list:
    """Distinct non-identity theta(e_a)^{-1}, closed under inverses."""
    seen = {}
    for g in images:
        for s in (model.inv(g), g):
            if not model.is_identity(s):
                seen.setdefault(model.key(s), s)
    return [seen[k] for k in sorted(seen, key=repr)]


def cayley_graph(model: GroupModel, moves, max_depth: int = 64) -> LazyGraph:
    def nb(g):
        return [model.mul(s, g) for s in moves]
    return LazyGraph(nb, True, max_depth)


def build_extension_graphs(system: ExtendedSystem, max_depth: int = 64):
    """(E_G, E_X) as lazy graphs; E_X joins (a, g) to every (b, h) with h = g or h ~ g."""
    model = system.model
    moves = group_moves(model, system.images)

    def nb_g(g):
        return [model.mul(s, g) for s in moves]

    def nb_x(v):
        a, g = v
        out = [(b, g) for b in range(system.n) if b != a]
        for h in nb_g(g):
            out.extend((b, h) for b in range(system.n))
        return out

    return LazyGraph(nb_g, True, max_depth), LazyGraph(nb_x, True, max_depth)


def group_dist(model: GroupModel, g, h) -> int:
    """|h g^{-1}| in the standard word metric of the model."""
    return model.length(model.mul(h, model.inv(g)))


def ex_dist_formula(model: GroupModel, x, y) -> int:
    (a, g), (b, h) = x, y
    if not model.eq(g, h):
        return group_dist(model, g, h)
    return 0 if a == b else 1


def ex_geodesic(system: ExtendedSystem, x, y, eg: LazyGraph) -> list:
    """Group geodesic lifted with interior cells 0; ends at y."""
    (a, g), (b, h) = x, y
    if system.model.eq(g, h):
        return [x] if a == b else [x, y]
    path = eg.geodesic(g, h)
    return [x] + [(0, k) for k in path[1:-1]] + [y]


def ex_bfs(ext: ExtendedSystem, start, max_depth: int | None = None) -> np.ndarray:
    """Exact E_X distances from start = (state, ball index) inside the ball; -1 unreached."""
    n, nb = ext.n, ext.nb
    moves = [ext.ball.left_map(s) for s in ext.ball.generators]
    dist = np.full((n, nb), -1, dtype=np.int32)
    dist[start] = 0
    frontier = np.zeros((n, nb), dtype=bool)
    frontier[start] = True
    d = 0
    limit = max_depth if max_depth is not None else 4 * ext.radius + 4
    while frontier.any() and d < limit:
        d += 1
        cols = frontier.any(axis=0)
        nxt = np.zeros((n, nb), dtype=bool)
        nxt[:, cols] = True
        for mm in moves:
            tgt = mm[cols]
            nxt[:, tgt[tgt >= 0]] = True
        nxt &= dist < 0
        dist[nxt] = d
        frontier = nxt
    return dist


# ---------------------------------------------------------------- quasi-isometry

@dataclass
class QIReport:
    radius: int
    pairs: int
    lower_violations: int
    upper_violations: int
    formula_mismatches: int
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.lower_violations == 0 and self.upper_violations == 0


def quasi_isometry_check(system: ExtendedSystem, radius: int = 5, origin_state: int = 0) -> QIReport:
    """Both distance and Gromov-product chains for every pair of the radius ball.

    E_X and E_G distances are invariant under right translation, so all pairs
    x = (a, g), y = (b, h) reduce to BFS from the states (b, id) out to group
    radius 2 * radius.  Distances are true BFS values, not the formula; the
    formula is cross-checked and mismatches counted.
    """
    R = 2 * radius
    ext = system if system.radius == R else system.with_radius(R)
    ball = ext.ball
    n = ext.n
    nr = int(np.searchsorted(ball.level, radius, side="right"))
    glev = ball.level
    model = ext.model
    elems = ball.elements[:nr]
    kidx = np.empty((nr, nr), dtype=np.int64)          # kidx[h, g] = index of g h^{-1}
    for hj, h in enumerate(elems):
        hinv = model.inv(h)
        kidx[hj] = [ball.find(model.mul(g, hinv)) for g in elems]
    if (kidx < 0).any():
        raise RuntimeError("translation left the ball")
    formula = np.broadcast_to(glev, (n, len(ball))).copy()
    o = origin_state
    d_o = ex_bfs(ext, (o, 0))                          # d_X((a, k), (o, id))
    low = up = mism = pairs = 0
    witnesses = []
    for b in range(n):
        Db = d_o if b == o else ex_bfs(ext, (b, 0))    # Db[a, k] = d_X((a, k), (b, id))
        formula[:, 0] = 1
        formula[b, 0] = 0
        mism += int((Db != formula).sum())
        for hj, h in enumerate(elems):
            dG = glev[kidx[hj]]                        # d_G(g, h) over g
            dX = Db[:, kidx[hj]]                       # [a, g]
            pairs += dX.size
            bad_low = (dX < dG) | (dX > dG + 1)
            if bad_low.any():
                low += int(bad_low.sum())
                a, g = np.argwhere(bad_low)[0]
                witnesses.append(("lower", int(a), model.fmt(elems[g]), b, model.fmt(h)))
            gx = 0.5 * (d_o[:, :nr] + d_o[b, hj] - dX)
            gg = 0.5 * (glev[:nr] + glev[hj] - dG)
            bad_up = (gx - 1 > gg) | (gg > gx + 1)
            if bad_up.any():
                up += int(bad_up.sum())
                a, g = np.argwhere(bad_up)[0]
                witnesses.append(("upper", int(a), model.fmt(elems[g]), b, model.fmt(h)))
    return QIReport(radius, pairs, low, up, mism, witnesses[:10])


# ---------------------------------------------------------------- escape

def gromov_at_identity(model: GroupModel, g, h) -> float:
    return 0.5 * (model.length(g) + model.length(h) - group_dist(model, g, h))


def _gromov_rows(model: GroupModel, seq, n: int, ms) -> np.ndarray:
    return np.array([gromov_at_identity(model, seq[n], seq[m]) for m in ms])


@dataclass
class EscapeProfile:
    elements: list
    envelope: np.ndarray          # e(n) for n = 0 .. horizon
    horizon: int

    def at(self, n: int) -> float:
        return float(self.envelope[n])

    def rows(self, model: GroupModel):
        for n, e in enumerate(self.envelope):
            yield n, float(e), model.fmt(self.elements[n])


def _free_suffix_matrix(seq, n0: int, n1: int, N: int) -> np.ndarray:
    """Common-suffix lengths between seq[n] (n0 <= n < n1) and seq[m] (m <= N)."""
    L = max(len(g) for g in seq[:N + 1]) + 1
    arr = np.zeros((N + 1, L), dtype=np.int8)
    for i, g in enumerate(seq[:N + 1]):
        r = g[::-1]
        arr[i, :len(r)] = r
    lens = np.array([len(g) for g in seq[:N + 1]])
    out = np.empty((n1 - n0, N + 1))
    for n in range(n0, n1):
        eq = arr == arr[n]
        eq[:, 0] &= lens > 0
        run = np.cumprod(eq, axis=1).sum(axis=1)
        out[n - n0] = np.minimum(run, np.minimum(lens, lens[n]))
    return out


def escape_profile(model: GroupModel, seq, horizon: int) -> EscapeProfile:
    """Envelope e(n) = min_{n <= m <= N} |a_n ^ a_m|_id over the whole sequence (N = len - 1)."""
    N = len(seq) - 1
    if horizon > N:
        raise ValueError("horizon exceeds the generated sequence")
    env = np.empty(horizon + 1)
    if isinstance(model, FreeGroup):
        M = _free_suffix_matrix(seq, 0, horizon + 1, N)
        for n in range(horizon + 1):
            env[n] = M[n, n:].min()
    elif isinstance(model, FreeAbelian):
        arr = np.array(seq[:N + 1], dtype=np.int64).reshape(N + 1, -1)
        ln = np.abs(arr).sum(axis=1)
        for n in range(horizon + 1):
            d = np.abs(arr[n:] - arr[n]).sum(axis=1)
            env[n] = (0.5 * (ln[n] + ln[n:] - d)).min()
    else:
        for n in range(horizon + 1):
            env[n] = _gromov_rows(model, seq, n, range(n, N + 1)).min()
    return EscapeProfile(list(seq[:horizon + 1]), env, horizon)


def equivalent(model: GroupModel, seq_a, seq_b, horizon: int) -> dict:
    """Growth trend of |a_n ^ b_n|_id over n <= horizon (slope of a least-squares line)."""
    vals = np.array([gromov_at_identity(model, seq_a[n], seq_b[n]) for n in range(horizon + 1)])
    x = np.arange(horizon + 1, dtype=float)
    slope = float(np.polyfit(x, vals, 1)[0]) if horizon >= 1 else 0.0
    return {"values": vals.tolist(), "slope": slope, "final": float(vals[-1])}
