"""Finite windows of the graph families studied here: Z^d lattices, Cayley
balls (Z^d, discrete Heisenberg, lamplighter Z2 wr Z), pre-fractal Sierpinski
carpets and Bernoulli bond-percolation clusters on Z^d boxes.

Windows are BFS balls B(o, R) of the ambient graph with interior B(o, R-1),
so boundaries of interior subsets agree with the ambient graph.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import EmptyCluster, GraphFormatError, SizeOverflow
from .graph import Graph

DEFAULT_VERTEX_CAP = 2_000_000


# ---------------------------------------------------------------------------
# Group specifications


def _zd_generators(d):
    gens = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        gens.append(tuple(e))
        e = [0] * d
        e[i] = -1
        gens.append(tuple(e))
    return tuple(gens)


@dataclass(frozen=True)
class GroupSpec:
    """One of the supported groups with its pinned symmetric generating set.

    kind: 'free_abelian' (with dimension d), 'heisenberg3', or 'lamplighter_z2_z'.
    Heisenberg uses the elementary-matrix generators x = E12, y = E23 (degree
    4, elements canonicalised as integer triples (a, b, c)); the lamplighter
    uses {t, t^-1, a} with a the lamp toggle at the cursor (degree 3).
    """

    kind: str
    d: int = 0

    def __post_init__(self):
        if self.kind not in ("free_abelian", "heisenberg3", "lamplighter_z2_z"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind == "free_abelian" and self.d < 1:
            raise ValueError("free_abelian needs d >= 1")

    @property
    def ambient_degree(self):
        if self.kind == "free_abelian":
            return 2 * self.d
        if self.kind == "heisenberg3":
            return 4
        return 3

    def identity(self):
        if self.kind == "free_abelian":
            return (0,) * self.d
        if self.kind == "heisenberg3":
            return (0, 0, 0)
        return ((), 0)  # (sorted lit lamps, cursor)

    def apply(self, g, i):
        """Right-multiply canonical element g by generator i."""
        if self.kind == "free_abelian":
            gen = _zd_generators(self.d)[i]
            return tuple(a + b for a, b in zip(g, gen))
        if self.kind == "heisenberg3":
            a, b, c = g
            # upper triangular [[1,a,c],[0,1,b],[0,0,1]] times x/y and inverses
            if i == 0:  # x
                return (a + 1, b, c)
            if i == 1:  # x^-1
                return (a - 1, b, c)
            if i == 2:  # y
                return (a, b + 1, c + a)
            return (a, b - 1, c - a)  # y^-1
        lamps, cur = g
        if i == 0:  # t
            return (lamps, cur + 1)
        if i == 1:  # t^-1
            return (lamps, cur - 1)
        # a: toggle lamp at cursor
        s = set(lamps)
        if cur in s:
            s.remove(cur)
        else:
            s.add(cur)
        return (tuple(sorted(s)), cur)

    @property
    def generator_count(self):
        if self.kind == "free_abelian":
            return 2 * self.d
        if self.kind == "heisenberg3":
            return 4
        return 3


# ---------------------------------------------------------------------------
# Lattice windows


def lattice_window(d, R, max_vertices=DEFAULT_VERTEX_CAP):
    """l1-ball B(0, R) of Z^d with interior B(0, R-1); ambient degree 2d.

    Vertex ids follow lexicographic coordinate order; coordinates are kept in
    meta['coords'] for the box/ball candidate families.
    """
    if d < 1 or R < 1:
        raise ValueError("need d >= 1 and R >= 1")
    coords = [()]
    for _ in range(d):
        coords = [c + (x,) for c in coords for x in range(-R, R + 1)]
    coords = sorted(c for c in coords if sum(abs(x) for x in c) <= R)
    if len(coords) > max_vertices:
        raise SizeOverflow(f"window would have {len(coords)} vertices")
    index = {c: i for i, c in enumerate(coords)}
    edges = []
    for c, i in index.items():
        for axis in range(d):
            nb = list(c)
            nb[axis] += 1
            j = index.get(tuple(nb))
            if j is not None:
                edges.append((i, j))
    interior = np.array(
        [sum(abs(x) for x in c) <= R - 1 for c in coords], dtype=bool
    )
    return Graph(
        len(coords),
        np.array(edges, dtype=np.int64).reshape(-1, 2),
        interior,
        2 * d,
        label=f"lattice-d{d}-R{R}",
        meta={"coords": np.array(coords, dtype=np.int64), "d": d, "R": R},
    )


# ---------------------------------------------------------------------------
# Cayley balls


def cayley_ball(spec, R, max_vertices=DEFAULT_VERTEX_CAP, _gen_order=None):
    """BFS ball of radius R from the identity; interior = radius R-1 ball.

    Ids are assigned layer by layer with each layer sorted by canonical key,
    so the output is independent of generator application order (_gen_order
    exists so tests can check that).
    """
    if R < 1:
        raise ValueError("R >= 1 required")
    gens = list(range(spec.generator_count))
    if _gen_order is not None:
        gens = list(_gen_order)
    ident = spec.identity()
    dist = {ident: 0}
    layers = [[ident]]
    for r in range(1, R + 1):
        nxt = set()
        for g in layers[r - 1]:
            for i in gens:
                h = spec.apply(g, i)
                if h not in dist:
                    nxt.add(h)
        for h in nxt:
            dist[h] = r
        layers.append(sorted(nxt))
        if len(dist) > max_vertices:
            raise SizeOverflow(f"ball exceeded {max_vertices} vertices")
    elems = [g for layer in layers for g in layer]
    index = {g: i for i, g in enumerate(elems)}
    edges = set()
    for g, i in index.items():
        for k in gens:
            h = spec.apply(g, k)
            j = index.get(h)
            if j is not None and i != j:
                edges.add((min(i, j), max(i, j)))
    interior = np.array([dist[g] <= R - 1 for g in elems], dtype=bool)
    meta = {"layer_sizes": [len(l) for l in layers]}
    if spec.kind == "free_abelian":
        meta["coords"] = np.array(elems, dtype=np.int64)
        meta["d"] = spec.d
        meta["R"] = R
    return Graph(
        len(elems),
        np.array(sorted(edges), dtype=np.int64).reshape(-1, 2),
        interior,
        spec.ambient_degree,
        label=f"cayley-{spec.kind}{spec.d if spec.kind == 'free_abelian' else ''}-R{R}",
        meta=meta,
    )


# ---------------------------------------------------------------------------
# Pre-fractal Sierpinski carpets


@dataclass(frozen=True)
class CarpetPattern:
    """Substitution pattern: an m x ... x m cell block with some cells removed.

    The retained cells must be nonempty, a proper subset must be removed, and
    the retained cells must be face-connected.
    """

    side: int = 3
    removed: frozenset = field(default_factory=lambda: frozenset({(1, 1)}))
    dimension: int = 2

    def __post_init__(self):
        object.__setattr__(self, "removed", frozenset(tuple(c) for c in self.removed))
        cells = self.all_cells()
        if not self.removed:
            raise ValueError("pattern must remove at least one cell")
        if not self.removed < cells:
            raise ValueError("removed cells must be a proper subset of the block")
        retained = cells - self.removed
        if not retained:
            raise ValueError("pattern retains no cells")
        if not _face_connected(retained, self.dimension):
            raise ValueError("retained cells must be face-connected")

    def all_cells(self):
        cells = [()]
        for _ in range(self.dimension):
            cells = [c + (x,) for c in cells for x in range(self.side)]
        return set(cells)

    def retained(self):
        return sorted(self.all_cells() - self.removed)

    @property
    def m_f(self):
        """Retained cell count (the substitution branching factor)."""
        return self.side**self.dimension - len(self.removed)

    @property
    def sparse_axis_count(self):
        """Number of axis-0 columns containing at least one removed cell."""
        return len({c[0] for c in self.removed})

    def iso_exponent(self):
        """Reported isoperimetric exponent log(R)/log(m_F) from the pattern.

        Report-only: trusts the user's pattern choice, no validation of the
        sparse-row hypothesis.
        """
        r = self.sparse_axis_count
        if r <= 0:
            return 0.0
        return math.log(r) / math.log(self.m_f)


def _face_connected(cells, dim):
    cells = set(cells)
    start = next(iter(cells))
    seen = {start}
    stack = [start]
    while stack:
        c = stack.pop()
        for axis in range(dim):
            for step in (-1, 1):
                nb = list(c)
                nb[axis] += step
                nb = tuple(nb)
                if nb in cells and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
    return len(seen) == len(cells)


STANDARD_CARPET = CarpetPattern()


def sierpinski_carpet(pattern, level, max_vertices=DEFAULT_VERTEX_CAP):
    """Level-k pre-fractal: one vertex per retained cell of the k-fold
    substitution, edges between cells sharing a face.  All vertices interior
    (the pre-fractal is its own ambient object)."""
    if level < 1:
        raise ValueError("level >= 1 required")
    if pattern.m_f**level > max_vertices:
        raise SizeOverflow(f"level-{level} carpet would have {pattern.m_f**level} cells")
    retained = pattern.retained()
    cells = [()] * 1
    cells = retained
    for _ in range(level - 1):
        nxt = []
        for base in cells:
            for sub in retained:
                nxt.append(
                    tuple(b * pattern.side + s for b, s in zip(base, sub))
                )
        cells = nxt
    cells = sorted(cells)
    index = {c: i for i, c in enumerate(cells)}
    edges = []
    for c, i in index.items():
        for axis in range(pattern.dimension):
            nb = list(c)
            nb[axis] += 1
            j = index.get(tuple(nb))
            if j is not None:
                edges.append((i, j))
    g = Graph(
        len(cells),
        np.array(edges, dtype=np.int64).reshape(-1, 2),
        np.ones(len(cells), dtype=bool),
        2 * pattern.dimension,
        label=f"carpet-m{pattern.side}d{pattern.dimension}-L{level}",
        meta={"coords": np.array(cells, dtype=np.int64), "pattern": pattern},
    )
    if not g.is_connected():
        raise GraphFormatError("substitution produced a disconnected carpet")
    return g


# ---------------------------------------------------------------------------
# Bernoulli bond percolation


@dataclass(frozen=True)
class PercolationConfig:
    dimension: int
    box_half_width: int
    p: float
    seed: int

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("percolation needs d >= 2")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if self.box_half_width < 1:
            raise ValueError("box_half_width >= 1 required")


def _box_edges(d, L):
    """All box edges as (u_index, v_index, key) arrays; key = 2*u_index + axis
    encoding is replaced by mixed-radix u*d + axis so coins depend only on the
    min endpoint and direction."""
    side = 2 * L + 1
    nv = side**d
    idx = np.arange(nv, dtype=np.int64)
    eu, ev, keys = [], [], []
    for axis in range(d):
        stride = side ** (d - 1 - axis)
        coord = (idx // stride) % side
        ok = coord < side - 1
        u = idx[ok]
        v = u + stride
        eu.append(u)
        ev.append(v)
        keys.append(u * d + axis)
    return nv, np.concatenate(eu), np.concatenate(ev), np.concatenate(keys)


def percolation_open_edges(cfg):
    """Open-edge sample for the box; exposed for the monotone-coupling test."""
    nv, eu, ev, keys = _box_edges(cfg.dimension, cfg.box_half_width)
    mask = kernels.percolation_open(
        np.uint64(cfg.seed & (2**64 - 1)), keys.astype(np.uint64), float(cfg.p)
    )
    return nv, eu[mask], ev[mask]


def percolation_cluster(cfg, max_vertices=DEFAULT_VERTEX_CAP):
    """Largest open cluster of the box [-L, L]^d as a Graph.

    Interior vertices are those whose Z^d neighbours all lie strictly inside
    the box, so their cluster adjacency is ambient-exact.  Bit-reproducible
    for a fixed config; ties between equal-size clusters break to the
    smallest root id.
    """
    d, L = cfg.dimension, cfg.box_half_width
    side = 2 * L + 1
    nv = side**d
    if nv > max_vertices:
        raise SizeOverflow(f"box would have {nv} vertices")
    nv, eu, ev = percolation_open_edges(cfg)
    parent = kernels.union_find(np.int64(nv), eu, ev)
    sizes = np.bincount(parent, minlength=nv)
    best = int(np.argmax(sizes))  # argmax returns the smallest maximising root
    if sizes[best] <= 1:
        raise EmptyCluster("largest open cluster is a single vertex")
    members = np.nonzero(parent == best)[0]
    local = -np.ones(nv, dtype=np.int64)
    local[members] = np.arange(members.size)
    emask = parent[eu] == best
    edges = np.stack([local[eu[emask]], local[ev[emask]]], axis=1)
    # coordinates of members, mixed radix, centred at the origin
    coords = np.empty((members.size, d), dtype=np.int64)
    rem = members.copy()
    for axis in range(d - 1, -1, -1):
        coords[:, axis] = rem % side - L
        rem //= side
    interior = (np.abs(coords).max(axis=1) <= L - 2) if L >= 2 else np.zeros(
        members.size, dtype=bool
    )
    pstr = f"{cfg.p:g}".replace(".", "p")
    return Graph(
        members.size,
        edges,
        interior,
        2 * d,
        label=f"percolation-d{d}-L{L}-{pstr}-s{cfg.seed}",
        meta={"coords": coords, "config": cfg, "box_vertices": nv},
    )
