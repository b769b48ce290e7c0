"""Markov shifts with edge weights, their group extensions, and pressure.

A base system is a finite transition graph with weights W[a, b] = exp(phi)
on admissible edges.  Its extension by a group model moves the group
coordinate by (a, g) -> (b, theta(e_a)^{-1} g).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from . import hypgeo as hg
from .fuchsian import LABEL_SIDE, PAIRS, RELATOR, SIDE_LABEL


# ---------------------------------------------------------------- group models

class GroupModel:
    """Abstract group arithmetic plus side images of a homomorphism theta."""
    name = "abstract"
    identity = None

    def __init__(self, side_images=None):
        self.side_images = dict(side_images or {})

    def mul(self, g, h):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    def key(self, g):
        return g

    def eq(self, g, h) -> bool:
        return self.key(g) == self.key(h)

    def is_identity(self, g) -> bool:
        return self.eq(g, self.identity)

    def length(self, g) -> int:
        """Word length in the standard generators."""
        raise NotImplementedError

    def side_image(self, s: int):
        return self.side_images.get(s, self.identity)

    def fmt(self, g) -> str:
        return str(g)


class TrivialGroup(GroupModel):
    name = "trivial"
    identity = ()

    def mul(self, g, h):
        return ()

    def inv(self, g):
        return ()

    def length(self, g):
        return 0

    def fmt(self, g):
        return "e"


class FreeGroup(GroupModel):
    """Free group on rank letters; elements are reduced tuples of +-(i+1)."""
    name = "f2"
    identity = ()

    def __init__(self, side_images=None, rank: int = 2):
        super().__init__(side_images)
        self.rank = rank

    @staticmethod
    def reduce(w):
        out = []
        for c in w:
            if out and out[-1] == -c:
                out.pop()
            else:
                out.append(c)
        return tuple(out)

    def mul(self, g, h):
        # cancel at the junction only
        i = 0
        while i < len(g) and i < len(h) and g[-1 - i] == -h[i]:
            i += 1
        return g[:len(g) - i] + h[i:]

    def inv(self, g):
        return tuple(-c for c in reversed(g))

    def length(self, g):
        return len(g)

    def fmt(self, g):
        letters = "xyzw"
        if not g:
            return "e"
        return "".join(letters[abs(c) - 1] if c > 0 else letters[abs(c) - 1].upper() for c in g)


class FreeAbelian(GroupModel):
    identity = None

    def __init__(self, side_images=None, dim: int = 1):
        self.dim = dim
        self.identity = (0,) * dim
        self.name = "z" if dim == 1 else f"z{dim}"
        super().__init__(side_images)

    def mul(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def inv(self, g):
        return tuple(-a for a in g)

    def length(self, g):
        return sum(abs(a) for a in g)


class Cyclic(GroupModel):
    identity = 0

    def __init__(self, side_images=None, m: int = 2):
        self.m = m
        self.name = f"zmod:{m}"
        super().__init__(side_images)

    def mul(self, g, h):
        return (g + h) % self.m

    def inv(self, g):
        return (-g) % self.m

    def length(self, g):
        return min(g % self.m, (-g) % self.m)


def _from_label_images(model: GroupModel, images: dict) -> GroupModel:
    """Install theta on all 8 sides from images of A, B, C, D."""
    side = {}
    for lab, g in images.items():
        s = LABEL_SIDE[lab]
        side[s] = g
        side[PAIRS[s]] = model.inv(g)
    model.side_images = side
    check_relator(model)
    return model


class RelatorError(ValueError):
    pass


def check_relator(model: GroupModel) -> None:
    g = model.identity
    for c in RELATOR:
        g = model.mul(g, model.side_image(LABEL_SIDE[c]))
    if not model.is_identity(g):
        raise RelatorError(f"theta([A,B][C,D]) = {model.fmt(g)} in model {model.name}")


def octagon_model(name: str) -> GroupModel:
    """Homomorphisms of the surface group used by the experiments."""
    if name == "trivial":
        return TrivialGroup({})
    if name == "f2":
        return _from_label_images(FreeGroup(), {"A": (1,), "B": (), "C": (2,), "D": ()})
    if name == "z":
        return _from_label_images(FreeAbelian(dim=1), {"A": (1,), "B": (0,), "C": (0,), "D": (0,)})
    if name == "z2":
        return _from_label_images(FreeAbelian(dim=2), {"A": (1, 0), "B": (0, 0), "C": (0, 1), "D": (0, 0)})
    if name.startswith("zmod:"):
        m = int(name.split(":", 1)[1])
        if m < 1:
            raise ValueError("modulus must be positive")
        return _from_label_images(Cyclic(m=m), {"A": 1 % m, "B": 0, "C": 0, "D": 0})
    raise ValueError(f"unknown model {name!r}")


# ---------------------------------------------------------------- base systems

@dataclass
class MarkovSystem:
    """Finite topological Markov shift with locally constant weights W = exp(phi)."""
    W: np.ndarray
    name: str = "synthetic"
    table: object = None
    delta: float = 1.0
    labels: list = field(default_factory=list)   # group image theta(e_a) per state, or side index

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        self.A = (self.W > 0).astype(np.int8)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    def succ(self, a):
        return np.flatnonzero(self.A[a]).tolist()

    def edges(self):
        src, dst = np.nonzero(self.A)
        return src.astype(np.int64), dst.astype(np.int64), self.W[src, dst]

    def spectral_radius(self) -> float:
        return float(max(abs(np.linalg.eigvals(self.W))))


def octagon_system(table, delta: float = 1.0) -> MarkovSystem:
    """Edge weights |e_a'(y_b)|^delta with y_b the anchor point of b."""
    n = table.n
    W = np.zeros((n, n))
    for a in range(n):
        for b in table.succ(a):
            W[a, b] = hg.boundary_derivative(table.e(a), table.anchor_point(b)) ** delta
    return MarkovSystem(W, name="octagon", table=table, delta=delta,
                        labels=[int(s) for s in table.gen])


def full_shift(k: int, c: float = 0.0) -> MarkovSystem:
    return MarkovSystem(np.full((k, k), math.exp(c)), name=f"full{k}")


def one_state_loop(c: float) -> MarkovSystem:
    return MarkovSystem(np.array([[math.exp(c)]]), name="loop")


def potential_error_budget(table, k: int = 2, rng=None, samples: int = 200) -> float:
    """Sum over m >= k of sampled Var_m of phi, extrapolated geometrically."""
    from .coding import variation_estimates, fit_rate
    rng = rng or np.random.default_rng(0)
    ms, var = variation_estimates(table, rng, ms=range(k, k + 6), samples=samples)
    r = fit_rate(ms, var)
    return float(sum(var) + var[-1] * r / (1 - r)) if r < 1 else math.inf


# ---------------------------------------------------------------- group balls

class GroupBall:
    """Elements within E_G-distance radius of the identity, by breadth-first search."""

    def __init__(self, model: GroupModel, generators, radius: int):
        self.model = model
        self.radius = radius
        gens = []
        seen = set()
        for s in list(generators) + [model.inv(s) for s in generators]:
            k = model.key(s)
            if model.is_identity(s) or k in seen:
                continue
            seen.add(k)
            gens.append(s)
        self.generators = sorted(gens, key=lambda g: repr(model.key(g)))
        self.elements = [model.identity]
        self.level = [0]
        self.index = {model.key(model.identity): 0}
        frontier = [model.identity]
        for r in range(1, radius + 1):
            nxt = []
            for g in frontier:
                for s in self.generators:
                    h = model.mul(s, g)
                    k = model.key(h)
                    if k not in self.index:
                        self.index[k] = len(self.elements)
                        self.elements.append(h)
                        self.level.append(r)
                        nxt.append(h)
            frontier = nxt
        self.level = np.array(self.level)

    def __len__(self):
        return len(self.elements)

    def find(self, g) -> int:
        return self.index.get(self.model.key(g), -1)

    def left_map(self, s) -> np.ndarray:
        """index map j -> index of s * g_j (or -1 outside the ball)."""
        return np.array([self.find(self.model.mul(s, g)) for g in self.elements], dtype=np.int64)

    def right_map(self, k) -> np.ndarray:
        """index map j -> index of g_j * k (or -1)."""
        return np.array([self.find(self.model.mul(g, k)) for g in self.elements], dtype=np.int64)


# ---------------------------------------------------------------- extensions

class ExtendedSystem:
    """Group extension of a base system over a ball of the group."""

    def __init__(self, base: MarkovSystem, model: GroupModel, images=None, radius: int = 8):
        self.base = base
        self.model = model
        if images is None:
            if base.table is not None:
                images = [model.side_image(int(s)) for s in base.table.gen]
            else:
                images = [model.identity] * base.n
        if len(images) != base.n:
            raise ValueError("one theta image per base state is required")
        self.images = list(images)
        self.moves = []              # distinct theta(e_a)^{-1}
        self.state_move = np.zeros(base.n, dtype=np.int64)
        keys = {}
        for a, g in enumerate(self.images):
            s = model.inv(g)
            k = model.key(s)
            if k not in keys:
                keys[k] = len(self.moves)
                self.moves.append(s)
            self.state_move[a] = keys[k]
        self.radius = radius
        self.ball = GroupBall(model, self.moves, radius)
        self.movemap = np.stack([self.ball.left_map(s) for s in self.moves])
        src, dst, w = base.edges()
        self.src, self.dst, self.w = src, dst, w
        self.mv = self.state_move[src]

    def with_radius(self, radius: int) -> "ExtendedSystem":
        return ExtendedSystem(self.base, self.model, self.images, radius)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def nb(self) -> int:
        return len(self.ball)

    def successors(self, state):
        a, g = state
        h = self.model.mul(self.model.inv(self.images[a]), g)
        return [(b, h) for b in self.base.succ(a)]

    def index(self, state):
        a, g = state
        j = self.ball.find(g)
        return (a, j) if j >= 0 else None

    def lifted_weight(self, path) -> float:
        """exp(phi_n) along an extended path: the base weights of its projection."""
        w = 1.0
        for (a, _), (b, _) in zip(path, path[1:]):
            w *= self.base.W[a, b]
        return w

    def replay(self, start, symbols):
        """Follow base symbols from start, returning the visited extended states."""
        path = [start]
        for b in symbols:
            a, g = path[-1]
            if not self.base.A[a, b]:
                raise ValueError("inadmissible step")
            path.append((b, self.model.mul(self.model.inv(self.images[a]), g)))
        return path


def extend(base: MarkovSystem, model: GroupModel, images=None, radius: int = 8) -> ExtendedSystem:
    if base.table is not None and images is None:
        check_relator(model)
    return ExtendedSystem(base, model, images, radius)


def as_extension(system) -> ExtendedSystem:
    if isinstance(system, ExtendedSystem):
        return system
    return ExtendedSystem(system, TrivialGroup({}), radius=0)


# ---------------------------------------------------------------- pressure

@dataclass
class PressureResult:
    n: list
    Z: list
    loops: list
    terms: list
    final: float
    alpha: float

    def rows(self):
        for n, z, c, t in zip(self.n, self.Z, self.loops, self.terms):
            yield n, z, c, t


def fit_pressure(ns, Z, n_min: int | None = None):
    """Slope P of log Z_n = n P + alpha log n + c over the trailing nonzero terms."""
    ns = np.asarray(ns)
    Z = np.asarray(Z, dtype=float)
    if n_min is None:
        n_min = max(2, int(ns.max()) // 4)
    sel = (Z > 0) & (ns >= n_min)
    if sel.sum() < 3:
        sel = Z > 0
    if sel.sum() == 0:
        return -math.inf, 0.0
    if sel.sum() < 3:
        k = np.flatnonzero(sel)[-1]
        return float(math.log(Z[k]) / ns[k]), 0.0
    x = ns[sel].astype(float)
    X = np.column_stack([x, np.log(x), np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(X, np.log(Z[sel]), rcond=None)
    return float(coef[0]), float(coef[1])


def pressure_estimate(system, a: int, max_n: int = 16, cap: int = 16) -> PressureResult:
    """Weighted loops through a (extensions: loops with trivial group image)."""
    if max_n > cap:
        raise ValueError(f"max_n {max_n} exceeds cap {cap}")
    ext = as_extension(system)
    need = (max_n + 1) // 2
    if isinstance(system, ExtendedSystem) and ext.radius < need:
        ext = ext.with_radius(need)
    ones = np.ones_like(ext.w)
    u = np.zeros((ext.n, ext.nb))
    u[a, 0] = 1.0
    c = u.copy()
    Z, loops, terms = [], [], []
    ns = list(range(1, max_n + 1))
    for _ in ns:
        u = kernels.pull_step(u, ext.src, ext.dst, ext.w, ext.mv, ext.movemap)
        c = kernels.pull_step(c, ext.src, ext.dst, ones, ext.mv, ext.movemap)
        Z.append(float(u[a, 0]))
        loops.append(int(round(c[a, 0])))
    for n, z in zip(ns, Z):
        terms.append(math.log(z) / n if z > 0 else -math.inf)
    final, alpha = fit_pressure(ns, Z)
    return PressureResult(ns, Z, loops, terms, final, alpha)


# ---------------------------------------------------------------- connectivity

def transitivity_witness(ext: ExtendedSystem, start, goal, max_depth: int = 12):
    """Shortest admissible symbol path from start to goal, or None when inconclusive."""
    model = ext.model
    key = lambda s: (s[0], model.key(s[1]))
    if key(start) == key(goal):
        return []
    parent = {key(start): None}
    frontier = deque([(start, 0)])
    gk = key(goal)
    while frontier:
        st, d = frontier.popleft()
        if d >= max_depth:
            continue
        for nx in ext.successors(st):
            k = key(nx)
            if k in parent:
                continue
            parent[k] = (key(st), nx[0])
            if k == gk:
                syms = []
                cur = k
                while parent[cur] is not None:
                    prev, sym = parent[cur]
                    syms.append(sym)
                    cur = prev
                syms.reverse()
                path = ext.replay(start, syms)
                assert key(path[-1]) == gk
                return syms
            frontier.append((nx, d + 1))
    return None


class IrreducibilityError(RuntimeError):
    pass


def connection_lengths(ext: ExtendedSystem, a: int, max_depth: int):
    return kernels.bfs_levels(ext.n, ext.nb, ext.src, ext.dst, ext.mv, ext.movemap, a, 0, max_depth)


def irreducibility_K(ext: ExtendedSystem, cap: int = 12):
    """K = max over base pairs and gamma in {theta(e_c)} u {id} of n_{a,b,gamma}.

    Returns (K, levels, ext) where levels[a] holds BFS lengths from (a, id).
    A path of length L ending within distance 1 of id never leaves radius
    (L + 1) // 2 + 1, so that ball makes the search exact up to cap.
    """
    need = (cap + 1) // 2 + 1
    if ext.radius < need:
        ext = ext.with_radius(need)
    targets = [0] + [ext.ball.find(g) for g in ext.ball.generators]
    K = 0
    missing = []
    levels = []
    for a in range(ext.n):
        dist = connection_lengths(ext, a, cap)
        levels.append(dist)
        for b in range(ext.n):
            for j in targets:
                if b == a and j == 0:
                    continue        # not an edge of E_X
                d = int(dist[b, j])
                if d < 0:
                    missing.append((a, b, ext.model.fmt(ext.ball.elements[j])))
                    continue
                K = max(K, d)
    if missing:
        raise IrreducibilityError(f"no connection within {cap} steps for {missing[:5]}")
    return K, levels, ext


def connection_lengths_from(ext, a, j, max_depth):
    return kernels.bfs_levels(ext.n, ext.nb, ext.src, ext.dst, ext.mv, ext.movemap, a, j, max_depth)


def potential_bounds(system: MarkovSystem):
    w = system.W[system.W > 0]
    logs = np.log(w)
    return float(logs.min()), float(logs.max())
