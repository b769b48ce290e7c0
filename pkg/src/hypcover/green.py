"""Truncated Green functions of weighted Markov shifts and their group extensions.

Path sums are computed by iterating the transfer step on a finite ball of the
group, with weights already divided by lambda, so the n-th term array holds
lambda^{-n} times the weighted count of length-n paths.  A backward run fixes
the target and yields values for every source; a forward run fixes the source.

Weights are locally constant (edge model), so a path a_0 ... a_n ending at b
contributes prod W[a_i, a_{i+1}], which plays the role of exp(phi_n(path x_b)).
"""
from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .shift import ExtendedSystem, MarkovSystem, as_extension, pressure_estimate

KINDS = ("G", "F", "L_A", "F_A")
RHO_MARGIN = 0.02


@dataclass
class GreenParams:
    lam: float = 1.0
    max_depth: int = 60
    k: int = 2              # cylinder depth of the potential approximation
    window: int = 6         # trailing window for the tail ratio

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.window < 2:
            raise ValueError("window must be at least 2")


@dataclass
class TruncatedValue:
    value: float
    depth: int
    tail: float
    terms: list
    valid: bool = True

    @property
    def upper(self) -> float:
        return self.value + self.tail


# ---------------------------------------------------------------- tails

def _ratio_hat(stack: np.ndarray) -> np.ndarray:
    """Max successive-term ratio over the window, per entry.

    Lag-2 ratios (square-rooted) are included so period-2 systems, whose odd
    terms vanish, still get an estimate.
    """
    r = np.zeros(stack.shape[1:])
    for lag in (1, 2):
        if stack.shape[0] <= lag:
            continue
        num, den = stack[lag:], stack[:-lag]
        ok = (num > 0) & (den > 0)
        q = np.zeros_like(num)
        np.divide(num, den, out=q, where=ok)
        r = np.maximum(r, (q ** (1.0 / lag)).max(axis=0))
    return r


def _tail_from_stack(stack: np.ndarray):
    r = _ratio_hat(stack)
    # last nonzero term within the window
    nz = stack > 0
    idx = np.where(nz.any(axis=0), stack.shape[0] - 1 - np.argmax(nz[::-1], axis=0), 0)
    last = np.take_along_axis(stack, idx[None], axis=0)[0]
    valid = r < 1.0
    tail = np.full(r.shape, np.inf)
    np.divide(last * r, 1.0 - r, out=tail, where=valid)
    tail = np.where(last > 0, tail, 0.0)
    valid = valid | (last == 0)
    return tail, valid


def tail_estimate(terms, window: int = 6):
    """Geometric tail last * r/(1 - r) from the trailing window; (tail, valid)."""
    if not terms:
        return 0.0, True
    stack = np.asarray(terms[-window:], dtype=float)
    tail, valid = _tail_from_stack(stack)
    return float(tail), bool(valid)


def truncated(terms, window: int = 6) -> TruncatedValue:
    tail, valid = tail_estimate(terms, window)
    return TruncatedValue(math.fsum(terms), len(terms) - 1, tail, list(terms), valid)


# ---------------------------------------------------------------- engine

class _Acc:
    """Compensated running sum of term arrays plus a trailing window."""

    def __init__(self, shape, window, track=()):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)
        self.recent = deque(maxlen=window)
        self.track = list(track)
        self.series = [[] for _ in self.track]

    def add(self, term):
        t = self.s + term
        big = np.abs(self.s) >= np.abs(term)
        self.c += np.where(big, (self.s - t) + term, (term - t) + self.s)
        self.s = t
        self.recent.append(term.copy())
        for i, idx in enumerate(self.track):
            self.series[i].append(float(term[idx]))

    def value(self):
        return self.s + self.c

    def tail(self):
        return _tail_from_stack(np.array(self.recent))


@dataclass
class PathSums:
    """Result of one run: values for every entry of the ball plus tails."""
    kind: str
    direction: str
    anchor: tuple
    values: np.ndarray
    tail: np.ndarray
    valid: np.ndarray
    depth: int
    series: list = field(default_factory=list)


def _ops(ext: ExtendedSystem, lam: float):
    wl = ext.w / lam
    args = (ext.src, ext.dst, wl, ext.mv, ext.movemap)
    return (lambda u: kernels.pull_step(u, *args)), (lambda u: kernels.push_step(u, *args))


def green_column(ext: ExtendedSystem, kind: str, target, lam: float, depth: int,
                 A=None, window: int = 6, track=()) -> PathSums:
    """kind(x, target) for every x of the ball; target and track are (state, ball index)."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind}")
    pull, _ = _ops(ext, lam)
    shape = (ext.n, ext.nb)
    acc = _Acc(shape, window, track)
    delta = np.zeros(shape)
    delta[target] = 1.0
    if kind in ("L_A", "F_A"):
        if A is None or not A.any():
            raise ValueError(f"{kind} needs a nonempty set A")
        out = ~A
    if kind == "G":
        u = delta
        acc.add(u)
        for _ in range(depth):
            u = pull(u)
            acc.add(u)
    elif kind == "F":
        u = delta
        acc.add(u)
        for _ in range(depth):
            u = pull(u)
            u[target] = 0.0          # the path may not visit the target before its end
            acc.add(u)
    elif kind == "L_A":
        v = delta * (0.0 if A[target] else 1.0)
        acc.add(delta * (1.0 if A[target] else 0.0))
        for _ in range(depth):
            p = pull(v)
            acc.add(p * A)
            v = p * out
    else:  # F_A
        u = delta * (1.0 if A[target] else 0.0)
        acc.add(u)
        for _ in range(depth):
            u = pull(u) * out
            acc.add(u)
    tail, valid = acc.tail()
    return PathSums(kind, "column", tuple(target), acc.value(), tail, valid, depth, acc.series)


def green_row(ext: ExtendedSystem, kind: str, source, lam: float, depth: int,
              A=None, window: int = 6, track=()) -> PathSums:
    """kind(source, y) for every y of the ball (kinds G, L_A, F_A)."""
    if kind not in ("G", "L_A", "F_A"):
        raise ValueError(f"kind {kind} has no forward form")
    _, push = _ops(ext, lam)
    shape = (ext.n, ext.nb)
    acc = _Acc(shape, window, track)
    delta = np.zeros(shape)
    delta[source] = 1.0
    if kind != "G":
        if A is None or not A.any():
            raise ValueError(f"{kind} needs a nonempty set A")
        out = ~A
    if kind == "G":
        u = delta
        acc.add(u)
        for _ in range(depth):
            u = push(u)
            acc.add(u)
    elif kind == "F_A":
        u = delta
        acc.add(u * A)
        for _ in range(depth):
            u = push(u * out)
            acc.add(u * A)
    else:  # L_A
        if not A[source]:
            u = np.zeros(shape)
        else:
            u = delta
        acc.add(u)
        for _ in range(depth):
            u = push(u) * out
            acc.add(u)
    tail, valid = acc.tail()
    return PathSums(kind, "row", tuple(source), acc.value(), tail, valid, depth, acc.series)


# ---------------------------------------------------------------- states

def _ext_of(system):
    return system if isinstance(system, ExtendedSystem) else as_extension(system)


def _norm_state(system, x):
    """(base state, group element) for either system type; ValueError if unknown."""
    if isinstance(system, ExtendedSystem):
        try:
            a, g = x
        except (TypeError, ValueError):
            raise ValueError(f"unknown state {x!r}") from None
        if not 0 <= int(a) < system.n:
            raise ValueError(f"unknown state {x!r}")
        return int(a), g
    if isinstance(x, (int, np.integer)) and 0 <= int(x) < system.n:
        return int(x), ()
    raise ValueError(f"unknown state {x!r}")


def translate(ext: ExtendedSystem, x, h_inv):
    """Ball index of (a, g h^{-1}); None outside the ball."""
    a, g = x
    j = ext.ball.find(ext.model.mul(g, h_inv))
    return (a, j) if j >= 0 else None


def _mask(ext, A, h_inv):
    m = np.zeros((ext.n, ext.nb), dtype=bool)
    for x in A:
        ix = translate(ext, x, h_inv)
        if ix is not None:
            m[ix] = True
    return m


def path_sum(system, kind: str, a, b, params: GreenParams, A=()) -> TruncatedValue:
    """Truncated kind(a, b | lambda); states are ints (base) or (state, element) pairs."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind}")
    ext = _ext_of(system)
    a = _norm_state(system, a)
    b = _norm_state(system, b)
    A = [_norm_state(system, x) for x in A]
    if kind in ("L_A", "F_A") and not A:
        raise ValueError(f"{kind} needs a nonempty set A")
    # right translation moves b to the identity
    h_inv = ext.model.inv(b[1]) if isinstance(system, ExtendedSystem) else ext.model.identity
    if isinstance(system, MarkovSystem):
        a, b = (a[0], ext.model.identity), (b[0], ext.model.identity)
        A = [(x[0], ext.model.identity) for x in A]
    ia = translate(ext, a, h_inv)
    ib = translate(ext, b, h_inv)
    if ia is None:
        raise ValueError("source lies outside the computed ball")
    mask = _mask(ext, A, h_inv) if A else None
    res = green_column(ext, kind, ib, params.lam, params.max_depth, mask, params.window, track=[ia])
    return truncated(res.series[0], params.window)


def rho_hat(system, max_n: int = 16) -> float:
    """Spectral radius for finite systems; exp of the last pressure term otherwise."""
    if isinstance(system, MarkovSystem):
        return system.spectral_radius()
    pr = pressure_estimate(system, 0, max_n=max_n)
    last = [t for t in pr.terms if np.isfinite(t)]
    return math.exp(last[-1]) if last else 0.0


def check_params(params: GreenParams, rho: float) -> bool:
    ok = math.log(params.lam) - math.log(rho) >= RHO_MARGIN if rho > 0 else True
    if not ok:
        warnings.warn(f"lambda {params.lam} is within the margin of the estimated rho {rho:.4f}")
    return ok


# ---------------------------------------------------------------- oracle

class OracleGreen:
    """Exact kernels of a finite locally constant system from (I - W/lambda)^{-1}."""

    def __init__(self, system: MarkovSystem, lam: float):
        self.system = system
        self.lam = lam
        rho = system.spectral_radius()
        if rho >= lam:
            raise ValueError(f"spectral radius {rho} is not below lambda {lam}")
        self.M = system.W / lam
        self.Gm = np.linalg.inv(np.eye(system.n) - self.M)

    def G(self, a, b):
        return float(self.Gm[a, b])

    def F(self, a, b):
        return float(self.Gm[a, b] / self.Gm[b, b])

    def _restricted(self, A):
        inA = np.zeros(self.system.n, dtype=bool)
        inA[list(A)] = True
        rest = np.flatnonzero(~inA)
        Gr = np.linalg.inv(np.eye(len(rest)) - self.M[np.ix_(rest, rest)]) if len(rest) else np.zeros((0, 0))
        return inA, rest, Gr

    def L_A(self, a, b, A):
        inA, rest, Gr = self._restricted(A)
        if not inA[a]:
            return 0.0
        if inA[b]:
            return float(a == b)
        j = int(np.searchsorted(rest, b))
        return float(self.M[a, rest] @ Gr[:, j])

    def F_A(self, a, b, A):
        inA, rest, Gr = self._restricted(A)
        if not inA[b]:
            return 0.0
        if inA[a]:
            return float(a == b)
        i = int(np.searchsorted(rest, a))
        return float(Gr[i, :] @ self.M[rest, b])

    def value(self, kind, a, b, A=()):
        if kind == "G":
            return self.G(a, b)
        if kind == "F":
            return self.F(a, b)
        if not A:
            raise ValueError(f"{kind} needs a nonempty set A")
        return self.L_A(a, b, A) if kind == "L_A" else self.F_A(a, b, A)


def oracle_matrix_green(system: MarkovSystem, lam: float) -> OracleGreen:
    return OracleGreen(system, lam)


# ---------------------------------------------------------------- tables

class GreenTable:
    """Lazily computed backward columns for targets (b, id), restricted to a lookup ball.

    value(kind, x, y) translates y to the identity on the right, which is
    exact because the weights do not see the group coordinate.
    """

    def __init__(self, system, params: GreenParams, lookup_radius: int | None = None,
                 iter_radius: int | None = None):
        self.system = system
        self.params = params
        ext = _ext_of(system)
        if isinstance(system, ExtendedSystem):
            lookup_radius = ext.radius if lookup_radius is None else lookup_radius
            iter_radius = max(lookup_radius, iter_radius or ext.radius)
            if ext.radius != iter_radius:
                ext = ext.with_radius(iter_radius)
        else:
            lookup_radius = 0
        self.ext = ext
        self.lookup_radius = lookup_radius
        self.nl = int(np.searchsorted(ext.ball.level, lookup_radius, side="right"))
        self._cols = {}

    def column(self, kind: str, b: int):
        key = (kind, int(b))
        if key not in self._cols:
            res = green_column(self.ext, kind, (int(b), 0), self.params.lam, self.params.max_depth,
                               window=self.params.window)
            self._cols[key] = (res.values[:, :self.nl].copy(), res.tail[:, :self.nl].copy())
        return self._cols[key]

    def _index(self, x, y):
        x = _norm_state(self.system, x)
        y = _norm_state(self.system, y)
        model = self.ext.model
        if isinstance(self.system, MarkovSystem):
            return x[0], 0, y[0]
        j = self.ext.ball.find(model.mul(x[1], model.inv(y[1])))
        if j < 0 or j >= self.nl:
            raise ValueError("pair lies outside the lookup ball")
        return x[0], j, y[0]

    def value(self, kind: str, x, y) -> float:
        a, j, b = self._index(x, y)
        return float(self.column(kind, b)[0][a, j])

    def tail(self, kind: str, x, y) -> float:
        a, j, b = self._index(x, y)
        return float(self.column(kind, b)[1][a, j])


class _OracleEvaluator:
    def __init__(self, oracle: OracleGreen):
        self.oracle = oracle

    def value(self, kind, x, y):
        return self.oracle.value(kind, int(x), int(y))


def evaluator(system, params: GreenParams, green=None):
    if green is None:
        return GreenTable(system, params)
    if isinstance(green, OracleGreen):
        return _OracleEvaluator(green)
    return green


# ---------------------------------------------------------------- Martin kernels

def continuation(system, b, length: int) -> list:
    """b followed by its anchor continuation x_b (least successors), as states."""
    ext = _ext_of(system)
    base = ext.base
    b0 = _norm_state(system, b)
    syms = [b0[0]]
    while len(syms) < length:
        syms.append(base.succ(syms[-1])[0])
    if isinstance(system, MarkovSystem):
        return syms
    return ext.replay(b0, syms[1:])


def _same(system, x, y) -> bool:
    if isinstance(system, MarkovSystem):
        return int(x) == int(y)
    return x[0] == y[0] and system.model.eq(x[1], y[1])


def _word_weight(system, word) -> float:
    base = _ext_of(system).base
    syms = [_norm_state(system, x)[0] for x in word]
    w = 1.0
    for a, b in zip(syms, syms[1:]):
        if not base.A[a, b]:
            raise ValueError("inadmissible word")
        w *= base.W[a, b]
    return w


def _check_path(system, word):
    if isinstance(system, ExtendedSystem):
        start = _norm_state(system, word[0])
        path = system.replay(start, [_norm_state(system, x)[0] for x in word[1:]])
        if not all(_same(system, p, q) for p, q in zip(path, word)):
            raise ValueError("word is not a path of the extension")


def cylinder_green(system, word, point, params: GreenParams, green) -> float:
    """G(1_[word], point) in the edge model; point is a list of states (y and its future)."""
    word = list(word)
    _check_path(system, word)
    N = len(word)
    lam = params.lam
    y = point[0]
    total = lam ** (-(N - 1)) * _word_weight(system, word) * green.value("G", word[-1], y)
    # preimages y' = word[:n] + point with n < N - 1 that still lie in [word]
    for n in range(N - 1):
        rest = word[n:]
        if len(point) < len(rest):
            point = list(point) + continuation(system, point[-1], len(rest) - len(point) + 1)[1:]
        if all(_same(system, p, q) for p, q in zip(rest, point)):
            total += lam ** (-n) * _word_weight(system, word[:n + 1])
    return total


def _as_point(system, b, length):
    pt = list(b) if isinstance(b, list) else [b]
    if len(pt) < length:
        pt = pt + continuation(system, pt[-1], length - len(pt) + 1)[1:]
    return pt


def martin_K(system, w, b, params: GreenParams, o, green=None) -> float:
    """K(1_[w], b) = G(1_[w], b)/G(1_[o], b); w a state or a word, b a state or a point."""
    green = evaluator(system, params, green)
    word = list(w) if isinstance(w, list) else [w]
    pt = _as_point(system, b, len(word) + 1)
    den = green.value("G", o, pt[0])
    if den == 0:
        raise ZeroDivisionError("G(o, b) truncation vanishes")
    if len(word) == 1 and not isinstance(w, list):
        return green.value("G", w, pt[0]) / den
    return cylinder_green(system, word, pt, params, green) / den


def martin_metric_approx(system, x, y, params: GreenParams, word_list, o=0, green=None,
                         samples: int = 3) -> float:
    """Finite-word approximation of the Martin metric between two points (symbol lists)."""
    green = evaluator(system, params, green)
    x, y = list(x), list(y)
    if x == y:
        return 0.0
    total = 0.0
    for w in word_list:
        w = list(w)
        zs = [w + continuation(system, w[-1], len(w) + 2)[1:]]
        base = _ext_of(system).base
        for c in base.succ(_norm_state(system, w[-1])[0])[:samples]:
            if isinstance(system, MarkovSystem):
                zs.append(w + continuation(system, c, len(w) + 2))
        top = max(abs(martin_K(system, list(w), z, params, o, green)) for z in zs)
        if top == 0:
            continue
        kx = martin_K(system, list(w), x, params, o, green)
        ky = martin_K(system, list(w), y, params, o, green)
        ix = float(x[:len(w)] == w)
        iy = float(y[:len(w)] == w)
        total += (abs(kx - ky) + abs(ix - iy)) / top
    return total


# ---------------------------------------------------------------- identity checks

@dataclass
class IdentityReport:
    name: str
    rows: list                    # (a, b, distance, ratio)
    by_distance: dict             # distance -> worst ratio
    one_sided: bool
    bounded: bool

    def worst(self) -> float:
        return max(self.by_distance.values()) if self.by_distance else math.nan


def _two_sided(r: float) -> float:
    if r <= 0 or not np.isfinite(r):
        return math.inf
    return max(r, 1.0 / r)


def trend_bounded(by_distance: dict, slack: float = 1e-3) -> bool:
    """Worst ratio does not increase (up to slack) when the distance parameter doubles."""
    ds = sorted(by_distance)
    for d in ds:
        if 2 * d in by_distance and by_distance[2 * d] > by_distance[d] * (1 + slack):
            return False
    return True


def _report(name, rows, one_sided, slack=1e-3):
    by = {}
    for a, b, d, r in rows:
        v = r if one_sided else _two_sided(r)
        by[d] = max(by.get(d, 0.0), v)
    return IdentityReport(name, rows, by, one_sided, trend_bounded(by, slack))


@dataclass
class SampleSpec:
    distances: tuple = (2, 4)
    pairs: int = 6
    lam2: float = 1.5
    word_len: int = 3
    seed: int = 0


def _finite_identities(system: MarkovSystem, params: GreenParams, spec: SampleSpec, rng):
    """Green identities on a finite system with path sums; distance = undirected transition-graph distance."""
    import networkx as nx
    n = system.n
    Gph = nx.Graph()
    Gph.add_nodes_from(range(n))
    Gph.add_edges_from((int(a), int(b)) for a, b in zip(*np.nonzero(system.A)) if a != b)
    dist = dict(nx.all_pairs_shortest_path_length(Gph))
    lam = params.lam
    cols = {}

    def col(kind, b, A=None, lam_=lam):
        key = (kind, b, None if A is None else tuple(np.flatnonzero(A[:, 0])), lam_)
        if key not in cols:
            ext = as_extension(system)
            cols[key] = green_column(ext, kind, (b, 0), lam_, params.max_depth, A, params.window).values[:, 0]
        return cols[key]

    rows = {i: [] for i in range(1, 8)}
    pairs = [(a, b) for a in range(n) for b in range(n)]
    for a, b in pairs:
        d = dist[a].get(b)
        if d is None:
            continue
        d = max(d, 1)
        G_b, F_b = col("G", b), col("F", b)
        if G_b[a] > 0:
            rows[1].append((a, b, d, G_b[a] / (F_b[a] * G_b[b])))
            for c in range(n):
                Fc = col("F", c)
                if F_b[a] > 0:
                    rows[2].append((a, b, d, Fc[a] * F_b[c] / F_b[a]))
        A = np.zeros((n, 1), dtype=bool)
        A[a, 0] = True                    # every path from a passes through A
        LA = col("L_A", b, A)
        FAa = [col("F_A", e, A)[a] for e in range(n)]
        lhs = sum(col("G", e)[a] * LA[e] for e in range(n) if A[e, 0])
        rhs = sum(FAa[e] * G_b[e] for e in range(n) if A[e, 0])
        if G_b[a] > 0:
            rows[3].append((a, b, d, lhs / G_b[a]))
            rows[4].append((a, b, d, lhs / rhs))
            rows[5].append((a, b, d, rhs / G_b[a]))
        l1, l2 = lam, spec.lam2
        if l2 > l1:
            G2 = col("G", b, lam_=l2)
            left = G_b[a] / l1 - G2[a] / l2
            right = (1 / l1 - 1 / l2) * sum(col("G", c)[a] * G2[c] for c in range(n))
            if right > 0:
                rows[6].append((a, b, d, left / right))
    rows[7] = _cylinder_ratio_rows(system, params, spec, rng, lambda x, y: col("G", y)[x])
    return rows


def _cylinder_ratio_rows(system, params, spec, rng, G):
    """K(1_[w], b) against lam^{-(N-1)} exp(phi_{N-1}(w x)) K(w_N, b), with exact phi when available."""
    from .coding import phi_birkhoff
    base = system if isinstance(system, MarkovSystem) else system.base
    rows = []
    o = 0
    for _ in range(spec.pairs * 4):
        w = [int(rng.integers(base.n))]
        for _ in range(spec.word_len - 1):
            w.append(int(rng.choice(base.succ(w[-1]))))
        b = int(rng.integers(base.n))
        if b in w:
            continue
        if base.table is not None:
            ephi = math.exp(phi_birkhoff(base.table, w[:-1], anchor=w[-1], delta=base.delta))
        else:
            ephi = _word_weight(base, w)
        N = len(w)
        wt = _word_weight(base, w)
        Kw = wt * params.lam ** (-(N - 1)) * G(w[-1], b) / G(o, b)
        Kn = G(w[-1], b) / G(o, b)
        if Kn > 0:
            rows.append((tuple(w), b, N, Kw / (params.lam ** (-(N - 1)) * ephi * Kn)))
    return rows


def _group_dist_array(ext, g):
    """d_G(g, h_j) = |h_j g^{-1}| for every ball element (-1 outside)."""
    model = ext.model
    ginv = model.inv(g)
    idx = ext.ball.right_map(ginv)
    out = np.where(idx >= 0, ext.ball.level[np.maximum(idx, 0)], -1)
    return out


def _ex_sphere_mask(ext, a, rho):
    """States at E_X distance exactly rho from a = (state, ball index)."""
    s, j = a
    dg = _group_dist_array(ext, ext.ball.elements[j])
    m = np.zeros((ext.n, ext.nb), dtype=bool)
    if rho == 1:
        m[:, dg == 1] = True
        m[:, j] = True
        m[s, j] = False
    else:
        m[:, dg == rho] = True
    return m


def _ext_identities(ext: ExtendedSystem, params: GreenParams, spec: SampleSpec, rng):
    """Green identities on an extension: targets b = (b_s, id), sources at group level r."""
    lam, depth, win = params.lam, params.max_depth, params.window
    need = max(spec.distances) + 3
    if ext.radius < need:
        ext = ext.with_radius(need)
    level = ext.ball.level
    rows = {i: [] for i in range(1, 8)}
    for r in spec.distances:
        cand = np.flatnonzero(level == r)
        for _ in range(spec.pairs):
            bs = int(rng.integers(ext.n))
            a = (int(rng.integers(ext.n)), int(rng.choice(cand)))
            b = (bs, 0)
            Gb = green_column(ext, "G", b, lam, depth, window=win).values
            Fb = green_column(ext, "F", b, lam, depth, window=win).values
            rows[1].append((a, b, r, Gb[a] / (Fb[a] * Gb[b])))
            # (2): c one step off the group geodesic from a to b
            g = ext.ball.elements[a[1]]
            dg = _group_dist_array(ext, g)
            near = np.flatnonzero((level <= r) & (dg >= 0) & (dg <= r))
            cj = int(rng.choice(near))
            c = (int(rng.integers(ext.n)), cj)
            # F(a, c) by right translation of c to the identity
            h_inv = ext.model.inv(ext.ball.elements[cj])
            ia = translate(ext, (a[0], g), h_inv)
            Fc = green_column(ext, "F", (c[0], 0), lam, depth, window=win).values
            if ia is not None and Fb[a] > 0:
                rows[2].append((a, b, r, Fc[ia] * Fb[c] / Fb[a]))
            # (3)-(5): A = E_X sphere around a separating it from b
            rho = max(1, r // 2)
            A = _ex_sphere_mask(ext, a, rho)
            LA = green_column(ext, "L_A", b, lam, depth, A, win).values
            Ga = green_row(ext, "G", a, lam, depth, window=win).values
            FA = green_row(ext, "F_A", a, lam, depth, A, win).values
            lhs = math.fsum((Ga * LA)[A])
            rhs = math.fsum((FA * Gb)[A])
            rows[3].append((a, b, r, lhs / Gb[a]))
            rows[4].append((a, b, r, lhs / rhs))
            rows[5].append((a, b, r, rhs / Gb[a]))
            # (6): resolvent identity with a forward run at lam and a backward run at lam2
            l2 = spec.lam2
            G2 = green_column(ext, "G", b, l2, depth, window=win).values
            left = Gb[a] / lam - G2[a] / l2
            right = (1 / lam - 1 / l2) * math.fsum((Ga * G2).ravel())
            rows[6].append((a, b, r, left / right))
    base_tab = GreenTable(ext.base, params)
    rows[7] = _cylinder_ratio_rows(ext, params, spec, rng, lambda x, y: base_tab.value("G", x, y))
    return rows


def check_identities(system, params: GreenParams, spec: SampleSpec | None = None, rng=None) -> dict:
    """Measured constants for identities (1)-(7); one IdentityReport each."""
    spec = spec or SampleSpec()
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    if isinstance(system, ExtendedSystem):
        rows = _ext_identities(system, params, spec, rng)
    else:
        rows = _finite_identities(system, params, spec, rng)
    one_sided = {2: True, 5: True}
    out = {}
    for i in range(1, 8):
        rep = _report(f"identity_{i}", rows[i], one_sided.get(i, False))
        if i == 7:
            # band max/min over the sampled words
            vals = [r for *_, r in rows[7] if r > 0]
            band = max(vals) / min(vals) if vals else math.nan
            rep.by_distance = {"band": band}
            rep.bounded = bool(np.isfinite(band))
        out[i] = rep
    return out


def oracle_identities(system: MarkovSystem, lam: float, lam2: float = None) -> dict:
    """Identities 1-6 as ratios on exact oracle values, over all pairs with A = {a}."""
    og = OracleGreen(system, lam)
    n = system.n
    worst = {i: 1.0 for i in range(1, 7)}
    for a in range(n):
        for b in range(n):
            if og.G(a, b) == 0:
                continue
            worst[1] = max(worst[1], _two_sided(og.G(a, b) / (og.F(a, b) * og.G(b, b))))
            for c in range(n):
                worst[2] = max(worst[2], og.F(a, c) * og.F(c, b) / og.F(a, b))
            A = [a]
            lhs = sum(og.G(a, e) * og.L_A(e, b, A) for e in A)
            rhs = sum(og.F_A(a, e, A) * og.G(e, b) for e in A)
            worst[3] = max(worst[3], _two_sided(lhs / og.G(a, b)))
            worst[4] = max(worst[4], _two_sided(lhs / rhs))
            worst[5] = max(worst[5], rhs / og.G(a, b))
            if lam2 is not None:
                o2 = OracleGreen(system, lam2)
                left = og.G(a, b) / lam - o2.G(a, b) / lam2
                right = (1 / lam - 1 / lam2) * sum(og.G(a, c) * o2.G(c, b) for c in range(n))
                worst[6] = max(worst[6], _two_sided(left / right))
    return worst


# ---------------------------------------------------------------- monotonicity and Harnack

@dataclass
class HarnackReport:
    violations: int
    checked: int
    zero_prefix_ok: bool
    harnack: dict                 # radius -> C' hat
    drift: float


def check_lambda_monotone(ext: ExtendedSystem, lam: float, depth: int, pairs):
    """Monotonicity in lambda term by term: lam^{-n} t_n >= lam^{-d} t_n with t_n the lambda = 1 terms.

    pairs are (a, b, d) with a, b as (state, ball index) and d = d_E(a, b); A is
    {a}.  Returns (violations, checked, prefix_ok), where prefix_ok records that
    no path shorter than d contributes.
    """
    bad = checked = 0
    prefix_ok = True
    for a, b, d in pairs:
        A = np.zeros((ext.n, ext.nb), dtype=bool)
        A[a] = True
        res = green_column(ext, "L_A", b, 1.0, depth, A, track=[a])
        t = res.series[0]
        for n, tn in enumerate(t):
            checked += 1
            if tn > 0 and n < d:
                prefix_ok = False
            if lam ** (-n) * tn < lam ** (-d) * tn:
                bad += 1
        lhs = math.fsum(lam ** (-n) * tn for n, tn in enumerate(t))
        if lhs < lam ** (-d) * math.fsum(t):
            bad += 1
    return bad, checked, prefix_ok


def harnack_constant(table: GreenTable, radius: int, targets=None) -> float:
    """max over the four kernel families of (h(x)/h(y))^{1/d} for E_X-adjacent x, y.

    Adjacent pairs suffice: a chain of d adjacent steps gives the bound for
    distance d.  x and y range over states whose group part has level <= radius.
    """
    ext = table.ext
    ball = ext.ball
    nl = int(np.searchsorted(ball.level, radius, side="right"))
    if nl > table.nl:
        raise ValueError("radius exceeds the lookup ball")
    targets = range(ext.n) if targets is None else targets
    inv_idx = np.array([ball.find(ext.model.inv(g)) for g in ball.elements[:table.nl]])
    best = 1.0
    families = []
    for c in targets:
        for kind in ("G", "F"):
            col = table.column(kind, c)[0]                # h(x) = kind(x, (c, id))
            families.append(col)
    for kind in ("G", "F"):
        cols = np.stack([table.column(kind, b)[0] for b in range(ext.n)])   # [b, a, j]
        for c in targets:
            # h(x) = kind((c, id), (x_s, x_g)) = kind((c, x_g^{-1}), (x_s, id))
            row = cols[:, c, :][:, np.where(inv_idx >= 0, inv_idx, 0)]
            row = np.where(inv_idx >= 0, row, np.nan)
            families.append(row)
    moves = [ball.left_map(s)[:nl] for s in ball.generators]
    for H in families:
        Hs = H[:, :nl]
        with np.errstate(divide="ignore", invalid="ignore"):
            hi = np.nanmax(Hs, axis=0)
            lo = np.nanmin(Hs, axis=0)
            best = max(best, float(np.nanmax(hi / lo)))
            for mm in moves:
                ok = (mm >= 0) & (mm < nl)
                best = max(best, float(np.nanmax(hi[ok] / lo[mm[ok]])))
    return best


def check_monotone_harnack(ext: ExtendedSystem, table: GreenTable, lam_sub: float, radii=(2, 3, 4, 5),
             pairs=6, depth: int = 30, rng=None) -> HarnackReport:
    rng = rng if rng is not None else np.random.default_rng(0)
    sample = []
    level = table.ext.ball.level
    e = table.ext
    for _ in range(pairs):
        r = int(rng.integers(2, 5))
        j = int(rng.choice(np.flatnonzero(level == r)))
        sample.append(((int(rng.integers(e.n)), j), (int(rng.integers(e.n)), 0), r))
    bad, checked, prefix_ok = check_lambda_monotone(e, lam_sub, depth, sample)
    harn = {r: harnack_constant(table, r) for r in radii}
    vals = list(harn.values())
    drift = (max(vals) - min(vals)) / min(vals)
    return HarnackReport(bad, checked, prefix_ok, harn, drift)
