"""Immutable graph windows, boundary operators, balls and connected-subset
enumeration.

A Graph is a finite window of an infinite ambient graph.  Vertices whose full
ambient neighbourhood is present in the window are marked interior; boundary
counts touching non-interior vertices are window-relative only and flagged
with AmbientInexactWarning rather than rejected.
"""

import os
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import (
    AmbientInexactWarning,
    BudgetExceeded,
    EmptySet,
    GraphFormatError,
    NotSubset,
)

DEFAULT_BUDGET = 50_000_000


def enumeration_budget(budget=None):
    """Effective enumeration cap: explicit arg, else SEPPROF_BUDGET, else default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get("SEPPROF_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGET


class VertexSet:
    """Subset of vertex identifiers with O(1) membership and cardinality."""

    __slots__ = ("members",)

    def __init__(self, members=()):
        if isinstance(members, VertexSet):
            self.members = members.members
        else:
            self.members = frozenset(int(v) for v in members)

    @property
    def size(self):
        return len(self.members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return v in self.members

    def __eq__(self, other):
        if isinstance(other, VertexSet):
            return self.members == other.members
        return self.members == frozenset(other)

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"VertexSet({sorted(self.members)})"

    def to_array(self):
        return np.array(sorted(self.members), dtype=np.int64)

    def union(self, other):
        return VertexSet(self.members | frozenset(other))


def _as_vertexset(obj):
    return obj if isinstance(obj, VertexSet) else VertexSet(obj)


@dataclass(frozen=True)
class CutResult:
    """A cut witness: the smaller side, its boundary count, and the exact ratio."""

    part: VertexSet
    boundary_edges: int
    ratio: Fraction

    def audit(self, host, within=None):
        """Recompute the ratio independently; True iff it matches."""
        if within is None:
            b = edge_boundary(host, self.part, warn=False)
        else:
            b = internal_boundary(host, within, self.part)
        if len(self.part) == 0:
            return self.boundary_edges == 0 and self.ratio == 0
        return b == self.boundary_edges and Fraction(b, len(self.part)) == self.ratio


@dataclass(frozen=True)
class GrowthTable:
    """Ball sizes around a centre; sizes[r] = |B(center, r)| within the window."""

    center: int
    sizes: tuple
    exact_up_to: int

    def radius_for(self, n):
        """Largest r with sizes[r] <= n, or -1 when even the centre exceeds n."""
        r = -1
        for i, s in enumerate(self.sizes):
            if s <= n:
                r = i
        return r


class Graph:
    """Immutable finite graph window with CSR adjacency and interior marking.

    Construction validates simplicity (no loops or duplicates), symmetry and
    the declared degree bound.  `meta` carries generator side-channel data
    (lattice coordinates, parent ids of induced subgraphs); it never takes
    part in equality or serialization.
    """

    __slots__ = ("n", "indptr", "indices", "interior", "max_degree", "label", "meta")

    def __init__(self, n, edges, interior, max_degree, label="", meta=None):
        n = int(n)
        if n <= 0:
            raise GraphFormatError("graph needs at least one vertex")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise GraphFormatError("edge endpoint out of range")
            if (edges[:, 0] == edges[:, 1]).any():
                raise GraphFormatError("self-loop rejected")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            keys = lo * n + hi
            order = np.argsort(keys, kind="stable")
            keys = keys[order]
            if keys.size > 1 and (np.diff(keys) == 0).any():
                raise GraphFormatError("duplicate edge rejected")
            lo, hi = lo[order], hi[order]
        else:
            lo = hi = np.empty(0, dtype=np.int64)
        heads = np.concatenate([lo, hi])
        tails = np.concatenate([hi, lo])
        deg = np.bincount(heads, minlength=n).astype(np.int64)
        if deg.size and deg.max() > max_degree:
            raise GraphFormatError(
                f"vertex degree {deg.max()} exceeds declared bound {max_degree}"
            )
        order = np.lexsort((tails, heads))
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=self.indptr[1:])
        self.indices = tails[order]
        self.n = n
        interior = np.asarray(interior, dtype=bool)
        if interior.shape != (n,):
            raise GraphFormatError("interior mask must have one flag per vertex")
        self.interior = interior
        self.max_degree = int(max_degree)
        self.label = str(label)
        self.meta = dict(meta) if meta else {}
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.interior.setflags(write=False)

    # -- basic accessors ----------------------------------------------------

    @property
    def edge_count(self):
        return self.indices.size // 2

    def degree(self, v):
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v):
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degrees(self):
        return np.diff(self.indptr)

    def edges(self):
        """Undirected edge list as (u, v) pairs with u < v, sorted."""
        heads = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        mask = heads < self.indices
        return np.stack([heads[mask], self.indices[mask]], axis=1)

    def interior_vertices(self):
        return np.nonzero(self.interior)[0]

    def is_connected(self):
        if self.n == 1:
            return True
        dist = kernels.bfs_distances(self.indptr, self.indices, self.n, 0)
        return bool((dist >= 0).all())

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.max_degree == other.max_degree
            and self.label == other.label
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.interior, other.interior)
        )

    def __repr__(self):
        return (
            f"Graph(n={self.n}, edges={self.edge_count}, "
            f"max_degree={self.max_degree}, label={self.label!r})"
        )


# ---------------------------------------------------------------------------
# Boundary operators


def edge_boundary(G, A, warn=True):
    """Number of edges of G with exactly one endpoint in A.

    Warns AmbientInexact when A touches non-interior vertices: the count is
    then the window-relative boundary, possibly undercounting the ambient one.
    """
    A = _as_vertexset(A)
    if len(A) == 0:
        return 0
    arr = A.to_array()
    if arr[-1] >= G.n or arr[0] < 0:
        raise NotSubset("set contains vertices outside the graph")
    if warn and not G.interior[arr].all():
        warnings.warn(
            "set touches non-interior vertices; boundary is window-relative",
            AmbientInexactWarning,
            stacklevel=2,
        )
    mask = np.zeros(G.n, dtype=bool)
    mask[arr] = True
    count = 0
    for v in arr:
        nbrs = G.neighbors(v)
        count += int((~mask[nbrs]).sum())
    return count


def internal_boundary(G, F, A):
    """|∂_F A|: edges with one endpoint in A and the other in F \\ A."""
    F = _as_vertexset(F)
    A = _as_vertexset(A)
    if not A.members <= F.members:
        raise NotSubset("A must be contained in F")
    if len(A) == 0:
        return 0
    in_f = np.zeros(G.n, dtype=bool)
    in_f[F.to_array()] = True
    in_a = np.zeros(G.n, dtype=bool)
    arr = A.to_array()
    in_a[arr] = True
    count = 0
    for v in arr:
        nbrs = G.neighbors(v)
        count += int((in_f[nbrs] & ~in_a[nbrs]).sum())
    return count


def induced_subgraph(G, F):
    """Graph induced on F, vertices relabelled by sorted original id.

    All vertices of the result are interior: the induced graph is its own
    ambient graph for Cheeger purposes.  Original ids in meta['parent_ids'].
    """
    F = _as_vertexset(F)
    if len(F) == 0:
        raise EmptySet("cannot induce on the empty set")
    arr = F.to_array()
    if arr[-1] >= G.n:
        raise NotSubset("set contains vertices outside the graph")
    local = -np.ones(G.n, dtype=np.int64)
    local[arr] = np.arange(arr.size)
    edges = []
    for v in arr:
        for w in G.neighbors(v):
            if v < w and local[w] >= 0:
                edges.append((local[v], local[w]))
    meta = {"parent_ids": arr}
    if "coords" in G.meta:
        meta["coords"] = G.meta["coords"][arr]
    return Graph(
        arr.size,
        np.array(edges, dtype=np.int64).reshape(-1, 2),
        np.ones(arr.size, dtype=bool),
        G.max_degree,
        label=f"{G.label}|induced{arr.size}",
        meta=meta,
    )


def ball(G, v, r):
    """BFS ball of radius r around v, as a VertexSet."""
    dist = kernels.bfs_distances(G.indptr, G.indices, G.n, int(v))
    return VertexSet(np.nonzero((dist >= 0) & (dist <= r))[0])


def growth_table(G, v):
    """BFS layer cumulative sizes until the window is exhausted.

    exact_up_to is the largest radius whose ball is entirely interior; sizes
    up to exact_up_to + 1 agree with the ambient graph.
    """
    v = int(v)
    dist = kernels.bfs_distances(G.indptr, G.indices, G.n, v)
    reached = dist >= 0
    rmax = int(dist[reached].max())
    layer = np.bincount(dist[reached], minlength=rmax + 1)
    sizes = tuple(int(x) for x in np.cumsum(layer))
    exact = -1
    for r in range(rmax + 1):
        if bool(G.interior[reached & (dist <= r)].all()):
            exact = r
        else:
            break
    return GrowthTable(center=v, sizes=sizes, exact_up_to=exact)


# ---------------------------------------------------------------------------
# Connected-subset enumeration (streaming reference implementation).
#
# Canonical order (shared with the compiled kernels): roots ascending; each
# subset is grown from its minimal vertex, the frontier is consumed left to
# right, and a child frontier is the remaining siblings followed by the new
# vertex's exclusive neighbours in ascending adjacency order.


def enumerate_connected_subsets(
    G, max_size, root_restriction=None, allowed=None, budget=None
):
    """Yield every connected subset of size <= max_size exactly once.

    root_restriction limits the minimal vertex of emitted subsets; allowed
    limits membership.  Raises BudgetExceeded after the cap is reached.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    cap = enumeration_budget(budget)
    if root_restriction is not None:
        root_restriction = _as_vertexset(root_restriction)
    if allowed is None:
        allowed_mask = np.ones(G.n, dtype=bool)
    else:
        allowed_mask = np.zeros(G.n, dtype=bool)
        allowed_mask[_as_vertexset(allowed).to_array()] = True
    count = 0
    visited = np.zeros(G.n, dtype=bool)
    for root in range(G.n):
        if not allowed_mask[root]:
            continue
        if root_restriction is not None and root not in root_restriction:
            continue
        count += 1
        yield VertexSet((root,))
        if count >= cap:
            raise BudgetExceeded(cap)
        if max_size == 1:
            continue
        visited[root] = True
        ext0 = [int(u) for u in G.neighbors(root) if u > root and allowed_mask[u]]
        for u in ext0:
            visited[u] = True
        s = [root]
        stack = [(ext0, 0, len(ext0))]
        while stack:
            ext, pos, nmark = stack[-1]
            if pos >= len(ext):
                for t in range(nmark):
                    visited[ext[len(ext) - 1 - t]] = False
                stack.pop()
                s.pop()
                continue
            w = ext[pos]
            stack[-1] = (ext, pos + 1, nmark)
            s.append(w)
            count += 1
            yield VertexSet(s)
            if count >= cap:
                # unwind marks before raising
                for fext, _, fn in reversed(stack):
                    for t in range(fn):
                        visited[fext[len(fext) - 1 - t]] = False
                visited[root] = False
                raise BudgetExceeded(cap)
            if len(s) < max_size:
                new = [
                    int(u)
                    for u in G.neighbors(w)
                    if u > root and allowed_mask[u] and not visited[u]
                ]
                for u in new:
                    visited[u] = True
                stack.append((ext[pos + 1 :] + new, 0, len(new)))
            else:
                s.pop()
        visited[root] = False


def connected_subset_count(G, max_size, budget=None):
    """Per-size counts of connected subsets, via the compiled scan."""
    cap = enumeration_budget(budget)
    allowed = np.ones(G.n, dtype=bool)
    _, _, counts, _, flag = kernels.iso_scan(
        G.indptr, G.indices, G.n, allowed, int(max_size), np.int64(cap)
    )
    if flag:
        raise BudgetExceeded(cap)
    return [int(c) for c in counts]
