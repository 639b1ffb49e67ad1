"""Hot inner loops: BFS, connected-subset enumeration, exact Cheeger search,
shortest-path congestion and percolation sampling.

Every kernel is written in nopython-compatible style and compiled with numba
when available.  Setting SEPPROF_PURE_PYTHON=1 (or a failed numba import)
selects the plain-Python path; both paths run the identical code and produce
bit-identical results, which the test suite checks.

Conventions: graphs arrive as CSR arrays (indptr, indices) with sorted
adjacency rows; vertex sets inside the small-graph kernels are int64 bitmasks
(local size capped at 60 so the sign bit never participates).
"""

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("SEPPROF_PURE_PYTHON", "") not in (
    "1",
    "true",
    "yes",
)

MASK_BITS = 60  # bitmask kernels refuse larger local graphs


def _jit(fn):
    if USE_NUMBA:
        return njit(cache=True, nogil=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# BFS


def _bfs_distances(indptr, indices, n, src):
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v]
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dv + 1
                queue[tail] = w
                tail += 1
    return dist


bfs_distances = _jit(_bfs_distances)


# ---------------------------------------------------------------------------
# Connected-subset enumeration (iterative ESU).
#
# Canonical order: roots ascending; at each node the frontier is consumed
# left to right, and a child frontier is the remaining siblings followed by
# the exclusive neighbours of the new vertex in ascending adjacency order.
# Each connected set is visited exactly once, rooted at its minimal vertex.


def _iso_scan(indptr, indices, n, allowed, max_size, budget):
    """Minimum ambient edge boundary per subset size over connected subsets
    of `allowed` vertices.

    Returns (min_boundary[size], witness matrix, per-size counts, total,
    budget_flag).  Witness rows hold the lexicographically least minimiser,
    sorted ascending, padded with -1.
    """
    deg = np.empty(n, np.int64)
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]

    min_b = np.full(max_size + 1, -1, np.int64)
    witness = np.full((max_size + 1, max_size), -1, np.int64)
    counts = np.zeros(max_size + 1, np.int64)

    in_s = np.zeros(n, np.bool_)
    visited = np.zeros(n, np.bool_)
    s_buf = np.empty(max_size, np.int64)
    sorted_buf = np.empty(max_size, np.int64)
    ext_buf = np.empty((max_size + 2) * n + 4, np.int64)
    f_start = np.empty(max_size + 2, np.int64)
    f_len = np.empty(max_size + 2, np.int64)
    f_pos = np.empty(max_size + 2, np.int64)
    f_marks = np.empty(max_size + 2, np.int64)
    f_owner = np.empty(max_size + 2, np.int64)
    f_prev_b = np.empty(max_size + 2, np.int64)

    total = np.int64(0)
    over_budget = False

    for root in range(n):
        if not allowed[root]:
            continue
        if over_budget:
            break
        # size-1 set {root}
        total += 1
        counts[1] += 1
        b = deg[root]
        if min_b[1] < 0 or b < min_b[1]:
            min_b[1] = b
            witness[1, 0] = root
        if total >= budget:
            over_budget = True
        if max_size == 1:
            continue
        s_buf[0] = root
        in_s[root] = True
        visited[root] = True
        cur_b = b
        nmark = 0
        for k in range(indptr[root], indptr[root + 1]):
            u = indices[k]
            if u > root and allowed[u] and not visited[u]:
                ext_buf[nmark] = u
                visited[u] = True
                nmark += 1
        depth = 0
        f_start[0] = 0
        f_len[0] = nmark
        f_pos[0] = 0
        f_marks[0] = nmark
        f_owner[0] = root
        f_prev_b[0] = 0
        while depth >= 0:
            if over_budget or f_pos[depth] >= f_len[depth]:
                # undo this frame's marks, release its owner
                st = f_start[depth]
                ln = f_len[depth]
                for t in range(f_marks[depth]):
                    visited[ext_buf[st + ln - 1 - t]] = False
                in_s[f_owner[depth]] = False
                cur_b = f_prev_b[depth]
                depth -= 1
                continue
            w = ext_buf[f_start[depth] + f_pos[depth]]
            f_pos[depth] += 1
            links = 0
            for k in range(indptr[w], indptr[w + 1]):
                if in_s[indices[k]]:
                    links += 1
            b_new = cur_b + deg[w] - 2 * links
            size = depth + 2  # root + depth internal + w
            s_buf[size - 1] = w
            total += 1
            counts[size] += 1
            if total >= budget:
                over_budget = True
            better = False
            if min_b[size] < 0 or b_new < min_b[size]:
                better = True
            elif b_new == min_b[size]:
                # tie: keep the lexicographically least sorted vertex list
                for i in range(size):
                    sorted_buf[i] = s_buf[i]
                for i in range(1, size):
                    key = sorted_buf[i]
                    j = i - 1
                    while j >= 0 and sorted_buf[j] > key:
                        sorted_buf[j + 1] = sorted_buf[j]
                        j -= 1
                    sorted_buf[j + 1] = key
                for i in range(size):
                    if sorted_buf[i] != witness[size, i]:
                        better = sorted_buf[i] < witness[size, i]
                        break
                if better:
                    min_b[size] = b_new
                    for i in range(size):
                        witness[size, i] = sorted_buf[i]
                    better = False  # already stored
            if better:
                min_b[size] = b_new
                for i in range(size):
                    sorted_buf[i] = s_buf[i]
                for i in range(1, size):
                    key = sorted_buf[i]
                    j = i - 1
                    while j >= 0 and sorted_buf[j] > key:
                        sorted_buf[j + 1] = sorted_buf[j]
                        j -= 1
                    sorted_buf[j + 1] = key
                for i in range(size):
                    witness[size, i] = sorted_buf[i]
            if size < max_size and not over_budget:
                in_s[w] = True
                child_start = f_start[depth] + f_len[depth]
                rem = f_len[depth] - f_pos[depth]
                for t in range(rem):
                    ext_buf[child_start + t] = ext_buf[f_start[depth] + f_pos[depth] + t]
                nnew = 0
                for k in range(indptr[w], indptr[w + 1]):
                    u = indices[k]
                    if u > root and allowed[u] and not visited[u]:
                        ext_buf[child_start + rem + nnew] = u
                        visited[u] = True
                        nnew += 1
                depth += 1
                f_start[depth] = child_start
                f_len[depth] = rem + nnew
                f_pos[depth] = 0
                f_marks[depth] = nnew
                f_owner[depth] = w
                f_prev_b[depth] = cur_b
                cur_b = b_new
        # root frame cleanup happened when depth went negative

    flag = np.int64(1) if over_budget else np.int64(0)
    return min_b, witness, counts, total, flag


iso_scan = _jit(_iso_scan)


# ---------------------------------------------------------------------------
# Exact Cheeger constant on a small graph given as int64 adjacency bitmasks.


def _cheeger_mask(nbr, s, prune, max_deg):
    """min over connected A with 1 <= |A| <= s//2 of boundary_in_F(A)/|A|.

    Returns (num, den, mask).  (-1, -1, 0) when s < 2.  Tie-break keeps the
    lexicographically least vertex list (lowest differing bit wins).
    """
    half = s // 2
    best_n = np.int64(-1)
    best_d = np.int64(1)
    best_mask = np.int64(0)
    if half < 1:
        return best_n, best_d, best_mask
    deg = np.empty(s, np.int64)
    for i in range(s):
        c = 0
        m = nbr[i]
        while m != 0:
            m &= m - 1
            c += 1
        deg[i] = c

    # frames carry full state: (ext, visited, A, b)
    cap = half + 2
    fr_ext = np.empty(cap, np.int64)
    fr_vis = np.empty(cap, np.int64)
    fr_a = np.empty(cap, np.int64)
    fr_b = np.empty(cap, np.int64)

    for root in range(s):
        higher = ~((np.int64(1) << (root + 1)) - 1)
        a0 = np.int64(1) << root
        b0 = deg[root]
        if best_n < 0 or b0 * best_d < best_n:
            best_n = b0
            best_d = 1
            best_mask = a0
        elif b0 * best_d == best_n and 1 == best_d:
            x = a0 ^ best_mask
            if x != 0 and (x & (-x)) & a0 != 0:
                best_mask = a0
        if half == 1:
            continue
        ext0 = nbr[root] & higher
        depth = 0
        fr_ext[0] = ext0
        fr_vis[0] = a0 | ext0
        fr_a[0] = a0
        fr_b[0] = b0
        while depth >= 0:
            ext = fr_ext[depth]
            if ext == 0:
                depth -= 1
                continue
            wbit = ext & (-ext)
            fr_ext[depth] = ext ^ wbit
            w = 0
            t = wbit
            while t > 1:
                t >>= 1
                w += 1
            a = fr_a[depth]
            links = 0
            m = nbr[w] & a
            while m != 0:
                m &= m - 1
                links += 1
            b = fr_b[depth] + deg[w] - 2 * links
            a2 = a | wbit
            size = 0
            m = a2
            while m != 0:
                m &= m - 1
                size += 1
            if best_n < 0 or b * best_d < best_n * size:
                best_n = b
                best_d = size
                best_mask = a2
            elif b * best_d == best_n * size:
                x = a2 ^ best_mask
                if x != 0 and (x & (-x)) & a2 != 0:
                    best_mask = a2
            if size < half:
                push = True
                if prune and best_n >= 0:
                    # any completion adds t vertices, each removes <= max_deg
                    # boundary edges and a nonempty proper subset keeps >= 1
                    lo_n = b
                    lo_d = size
                    for t2 in range(1, half - size + 1):
                        bb = b - max_deg * t2
                        if bb < 1:
                            bb = 1
                        if bb * lo_d < lo_n * (size + t2):
                            lo_n = bb
                            lo_d = size + t2
                    if lo_n * best_d > best_n * lo_d:
                        push = False
                if push:
                    vis = fr_vis[depth]
                    new = nbr[w] & higher & ~vis
                    depth += 1
                    fr_ext[depth] = fr_ext[depth - 1] | new
                    fr_vis[depth] = vis | new
                    fr_a[depth] = a2
                    fr_b[depth] = b
    return best_n, best_d, best_mask


cheeger_mask = _jit(_cheeger_mask)


# ---------------------------------------------------------------------------
# Exact separation table: outer ESU over the window, inner exact Cheeger on
# each connected subset via local bitmasks.


def _sep_scan(indptr, indices, n, allowed, max_size, budget):
    """Per-size maximum of |F| * h(F) over connected subsets, exact rationals.

    Returns (best_num[size], best_den[size], witness, total, flag) where the
    tracked value for F of size s is s*hnum/hden.
    """
    deg = np.empty(n, np.int64)
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]

    best_num = np.full(max_size + 1, -1, np.int64)
    best_den = np.ones(max_size + 1, np.int64)
    witness = np.full((max_size + 1, max_size), -1, np.int64)

    in_s = np.zeros(n, np.bool_)
    pos = np.zeros(n, np.int64)
    visited = np.zeros(n, np.bool_)
    s_buf = np.empty(max_size, np.int64)
    nbr_local = np.zeros(max_size, np.int64)
    sorted_buf = np.empty(max_size, np.int64)
    ext_buf = np.empty((max_size + 2) * n + 4, np.int64)
    f_start = np.empty(max_size + 2, np.int64)
    f_len = np.empty(max_size + 2, np.int64)
    f_pos = np.empty(max_size + 2, np.int64)
    f_marks = np.empty(max_size + 2, np.int64)
    f_owner = np.empty(max_size + 2, np.int64)

    total = np.int64(0)
    over_budget = False

    for root in range(n):
        if not allowed[root]:
            continue
        if over_budget:
            break
        total += 1
        # h({v}) = 0 by the empty-min convention, contribution 0
        if best_num[1] < 0:
            best_num[1] = 0
            best_den[1] = 1
            witness[1, 0] = root
        if total >= budget:
            over_budget = True
        if max_size == 1:
            continue
        s_buf[0] = root
        in_s[root] = True
        pos[root] = 0
        nbr_local[0] = 0
        visited[root] = True
        nmark = 0
        for k in range(indptr[root], indptr[root + 1]):
            u = indices[k]
            if u > root and allowed[u] and not visited[u]:
                ext_buf[nmark] = u
                visited[u] = True
                nmark += 1
        depth = 0
        f_start[0] = 0
        f_len[0] = nmark
        f_pos[0] = 0
        f_marks[0] = nmark
        f_owner[0] = root
        while depth >= 0:
            if over_budget or f_pos[depth] >= f_len[depth]:
                st = f_start[depth]
                ln = f_len[depth]
                for t in range(f_marks[depth]):
                    visited[ext_buf[st + ln - 1 - t]] = False
                owner = f_owner[depth]
                d_owner = pos[owner]
                for k in range(indptr[owner], indptr[owner + 1]):
                    u = indices[k]
                    if in_s[u] and pos[u] < d_owner:
                        nbr_local[pos[u]] &= ~(np.int64(1) << d_owner)
                in_s[owner] = False
                depth -= 1
                continue
            w = ext_buf[f_start[depth] + f_pos[depth]]
            f_pos[depth] += 1
            size = depth + 2
            d_new = size - 1
            s_buf[d_new] = w
            in_s[w] = True
            pos[w] = d_new
            nbr_local[d_new] = 0
            for k in range(indptr[w], indptr[w + 1]):
                u = indices[k]
                if in_s[u] and pos[u] < d_new:
                    j = pos[u]
                    nbr_local[d_new] |= np.int64(1) << j
                    nbr_local[j] |= np.int64(1) << d_new
            total += 1
            if total >= budget:
                over_budget = True
            hn, hd, _ = _cheeger_mask_inner(nbr_local, size)
            if hn < 0:
                hn = 0
                hd = 1
            val_n = size * hn
            val_d = hd
            better = False
            if best_num[size] < 0 or val_n * best_den[size] > best_num[size] * val_d:
                better = True
            elif val_n * best_den[size] == best_num[size] * val_d:
                for i in range(size):
                    sorted_buf[i] = s_buf[i]
                for i in range(1, size):
                    key = sorted_buf[i]
                    j = i - 1
                    while j >= 0 and sorted_buf[j] > key:
                        sorted_buf[j + 1] = sorted_buf[j]
                        j -= 1
                    sorted_buf[j + 1] = key
                for i in range(size):
                    if sorted_buf[i] != witness[size, i]:
                        if sorted_buf[i] < witness[size, i]:
                            best_num[size] = val_n
                            best_den[size] = val_d
                            for t in range(size):
                                witness[size, t] = sorted_buf[t]
                        break
            if better:
                best_num[size] = val_n
                best_den[size] = val_d
                for i in range(size):
                    sorted_buf[i] = s_buf[i]
                for i in range(1, size):
                    key = sorted_buf[i]
                    j = i - 1
                    while j >= 0 and sorted_buf[j] > key:
                        sorted_buf[j + 1] = sorted_buf[j]
                        j -= 1
                    sorted_buf[j + 1] = key
                for i in range(size):
                    witness[size, i] = sorted_buf[i]
            if size < max_size and not over_budget:
                child_start = f_start[depth] + f_len[depth]
                rem = f_len[depth] - f_pos[depth]
                for t in range(rem):
                    ext_buf[child_start + t] = ext_buf[f_start[depth] + f_pos[depth] + t]
                nnew = 0
                for k in range(indptr[w], indptr[w + 1]):
                    u = indices[k]
                    if u > root and allowed[u] and not visited[u]:
                        ext_buf[child_start + rem + nnew] = u
                        visited[u] = True
                        nnew += 1
                depth += 1
                f_start[depth] = child_start
                f_len[depth] = rem + nnew
                f_pos[depth] = 0
                f_marks[depth] = nnew
                f_owner[depth] = w
            else:
                # immediate pop of w
                for k in range(indptr[w], indptr[w + 1]):
                    u = indices[k]
                    if in_s[u] and pos[u] < d_new:
                        nbr_local[pos[u]] &= ~(np.int64(1) << d_new)
                in_s[w] = False
        visited[root] = False  # root mark released with its frame marks

    flag = np.int64(1) if over_budget else np.int64(0)
    return best_num, best_den, witness, total, flag


def _cheeger_mask_inner(nbr, s):
    """Same contract as _cheeger_mask without pruning; callable from kernels."""
    half = s // 2
    best_n = np.int64(-1)
    best_d = np.int64(1)
    best_mask = np.int64(0)
    if half < 1:
        return best_n, best_d, best_mask
    # stack of full-state frames
    ext_st = np.empty(half + 2, np.int64)
    vis_st = np.empty(half + 2, np.int64)
    a_st = np.empty(half + 2, np.int64)
    b_st = np.empty(half + 2, np.int64)
    for root in range(s):
        higher = ~((np.int64(1) << (root + 1)) - 1)
        a0 = np.int64(1) << root
        c = 0
        m = nbr[root]
        while m != 0:
            m &= m - 1
            c += 1
        b0 = np.int64(c)
        if best_n < 0 or b0 * best_d < best_n:
            best_n = b0
            best_d = 1
            best_mask = a0
        if half == 1:
            continue
        ext0 = nbr[root] & higher
        depth = 0
        ext_st[0] = ext0
        vis_st[0] = a0 | ext0
        a_st[0] = a0
        b_st[0] = b0
        while depth >= 0:
            ext = ext_st[depth]
            if ext == 0:
                depth -= 1
                continue
            wbit = ext & (-ext)
            ext_st[depth] = ext ^ wbit
            w = 0
            t = wbit
            while t > 1:
                t >>= 1
                w += 1
            a = a_st[depth]
            links = 0
            m = nbr[w] & a
            while m != 0:
                m &= m - 1
                links += 1
            c = 0
            m = nbr[w]
            while m != 0:
                m &= m - 1
                c += 1
            b = b_st[depth] + c - 2 * links
            a2 = a | wbit
            size = 0
            m = a2
            while m != 0:
                m &= m - 1
                size += 1
            if best_n < 0 or b * best_d < best_n * size:
                best_n = b
                best_d = size
                best_mask = a2
            elif b * best_d == best_n * size:
                x = a2 ^ best_mask
                if x != 0 and (x & (-x)) & a2 != 0:
                    best_mask = a2
            if size < half:
                vis = vis_st[depth]
                new = nbr[w] & higher & ~vis
                depth += 1
                ext_st[depth] = ext_st[depth - 1] | new
                vis_st[depth] = vis | new
                a_st[depth] = a2
                b_st[depth] = b
    return best_n, best_d, best_mask


if USE_NUMBA:
    _cheeger_mask_inner = njit(cache=True, nogil=True)(_cheeger_mask_inner)
sep_scan = _jit(_sep_scan)


# ---------------------------------------------------------------------------
# Shortest-path congestion.  Routes one unit of flow for every ordered pair
# (u, v), split evenly over all shortest u-v paths (Brandes accumulation),
# and returns the maximum total load over any undirected edge.  Every unit of
# pair flow split by a cut (A, F\\A) crosses it at least once in each
# direction, so |boundary(A)| * C >= 2 |A||F\\A| and
# h(F) >= 2 ceil(|F|/2) / C.  Even splitting keeps C near its average (a
# single canonical path per pair funnels routes and inflates C).  Loop order
# is fixed, so both backends produce bit-identical doubles.


def _congestion(indptr, indices, n, edge_id, m):
    loads = np.zeros(m, np.float64)
    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    sigma = np.empty(n, np.float64)
    delta = np.empty(n, np.float64)
    for src in range(n):
        for v in range(n):
            dist[v] = -1
            sigma[v] = 0.0
            delta[v] = 0.0
        dist[src] = 0
        sigma[src] = 1.0
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            dv = dist[v]
            sv = sigma[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sv
        # dependency pass: delta[v] = sum over successors w of
        # (sigma[v]/sigma[w]) (1 + delta[w]); the same term is the flow on
        # edge (v, w) away from src
        for qi in range(tail - 1, 0, -1):
            v = queue[qi]
            dv = dist[v]
            sv = sigma[v]
            acc = 0.0
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] == dv + 1:
                    f = (sv / sigma[w]) * (1.0 + delta[w])
                    loads[edge_id[k]] += f
                    acc += f
            delta[v] = acc
        # root edges of src
        v = src
        sv = sigma[src]
        for k in range(indptr[src], indptr[src + 1]):
            w = indices[k]
            if dist[w] == 1:
                loads[edge_id[k]] += (sv / sigma[w]) * (1.0 + delta[w])
    cmax = 0.0
    for e in range(m):
        if loads[e] > cmax:
            cmax = loads[e]
    return cmax


congestion = _jit(_congestion)


# ---------------------------------------------------------------------------
# Transported box routing.  For a candidate F that is "a box minus sparse
# defects" (cluster cap box), transport the exactly-optimal axis-ordered box
# routing into F: every box lattice edge carries its closed-form ideal load,
# realised inside F as a shortest path between the mapped endpoints.  Missing
# box cells are mapped to a nearby F vertex, so defect detours stay local and
# the max load remains within a constant of the perfect-box optimum.
# Phantom pairs (through missing cells) only add load; every genuine ordered
# pair of F is routed with weight >= 1, so h(F) >= 2*ceil(|F|/2)/C stands.


def _transported_box_loads(indptr, indices, n, edge_id, m, dims, strides, phi):
    loads = np.zeros(m, np.float64)
    d = dims.shape[0]
    nbox = 1
    for j in range(d):
        nbox *= dims[j]
    # scratch with timestamps (no per-call reset); sigma counts shortest
    # paths so each segment's flow splits evenly over all detours
    stamp = np.zeros(n, np.int64)
    dist = np.empty(n, np.int64)
    sigma = np.empty(n, np.float64)
    delta = np.empty(n, np.float64)
    queue = np.empty(n, np.int64)
    cur_stamp = np.int64(0)
    for j in range(d):
        sj = dims[j]
        stride = strides[j]
        per = nbox // sj
        for b in range(nbox):
            t = (b // stride) % sj
            if t >= sj - 1:
                continue
            src = phi[b]
            dst = phi[b + stride]
            if src == dst:
                continue
            w = float(2 * (t + 1) * (sj - 1 - t) * per)
            # fast path: the direct edge is present
            direct = -1
            for k in range(indptr[src], indptr[src + 1]):
                if indices[k] == dst:
                    direct = k
                    break
            if direct >= 0:
                loads[edge_id[direct]] += w
                continue
            # level-limited BFS with path counting
            cur_stamp += 1
            stamp[src] = cur_stamp
            dist[src] = 0
            sigma[src] = 1.0
            delta[src] = 0.0
            queue[0] = src
            head = 0
            tail = 1
            dtarget = np.int64(-1)
            while head < tail:
                x = queue[head]
                head += 1
                dx = dist[x]
                if dtarget >= 0 and dx >= dtarget:
                    break
                sx = sigma[x]
                for k in range(indptr[x], indptr[x + 1]):
                    y = indices[k]
                    if stamp[y] != cur_stamp:
                        stamp[y] = cur_stamp
                        dist[y] = dx + 1
                        sigma[y] = 0.0
                        delta[y] = 0.0
                        queue[tail] = y
                        tail += 1
                        if y == dst:
                            dtarget = dx + 1
                    if stamp[y] == cur_stamp and dist[y] == dx + 1:
                        sigma[y] += sx
            if dtarget < 0:
                # disconnected mapping; certificate void, signal with -1
                return loads, np.float64(-1.0)
            # backward even-split from dst toward src
            delta[dst] = w
            for qi in range(tail - 1, 0, -1):
                y = queue[qi]
                if delta[y] <= 0.0 or dist[y] > dtarget:
                    continue
                dy = dist[y]
                sy = sigma[y]
                dl = delta[y]
                for k in range(indptr[y], indptr[y + 1]):
                    x = indices[k]
                    if stamp[x] == cur_stamp and dist[x] == dy - 1:
                        f = dl * (sigma[x] / sy)
                        loads[edge_id[k]] += f
                        delta[x] += f
    cmax = 0.0
    for e in range(m):
        if loads[e] > cmax:
            cmax = loads[e]
    return loads, cmax


transported_box_loads = _jit(_transported_box_loads)


# ---------------------------------------------------------------------------
# Percolation: counter-based per-edge coins (splitmix64) and union-find.
# Coins depend only on (seed, edge key), never on p, so the open-edge set is
# monotone in p under a fixed seed.  The numba path loops uint64 scalars; the
# fallback is the same pipeline vectorised over uint64 arrays.

_SM_GOLD = 0x9E3779B97F4A7C15
_SM_C1 = 0xBF58476D1CE4E5B9
_SM_C2 = 0x94D049BB133111EB


def _perc_open_nb(seed, keys, p):
    out = np.zeros(keys.shape[0], np.bool_)
    s = np.uint64(seed)
    gold = np.uint64(_SM_GOLD)
    c1 = np.uint64(_SM_C1)
    c2 = np.uint64(_SM_C2)
    for i in range(keys.shape[0]):
        z = np.uint64(keys[i]) + gold
        z = (z ^ (z >> np.uint64(30))) * c1
        z = (z ^ (z >> np.uint64(27))) * c2
        z = z ^ (z >> np.uint64(31))
        z = (s ^ z) + gold
        z = (z ^ (z >> np.uint64(30))) * c1
        z = (z ^ (z >> np.uint64(27))) * c2
        z = z ^ (z >> np.uint64(31))
        if (z >> np.uint64(11)) * (1.0 / 9007199254740992.0) < p:
            out[i] = True
    return out


def _perc_open_py(seed, keys, p):
    gold = np.uint64(_SM_GOLD)
    with np.errstate(over="ignore"):
        z = keys.astype(np.uint64) + gold
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_SM_C1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM_C2)
        z ^= z >> np.uint64(31)
        z = (np.uint64(seed) ^ z) + gold
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_SM_C1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM_C2)
        z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)) * (1.0 / 9007199254740992.0) < p


def _union_find(nv, eu, ev):
    parent = np.arange(nv, dtype=np.int64)
    for i in range(eu.shape[0]):
        a = eu[i]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = ev[i]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    # flatten
    for v in range(nv):
        r = v
        while parent[r] != r:
            r = parent[r]
        a = v
        while parent[a] != r:
            nxt = parent[a]
            parent[a] = r
            a = nxt
    return parent


percolation_open = njit(cache=True, nogil=True)(_perc_open_nb) if USE_NUMBA else _perc_open_py
union_find = _jit(_union_find)


# ---------------------------------------------------------------------------
# Sweep-cut prefix boundaries: boundary of the first k vertices of `order`
# inside the graph, for every k.


def _sweep_prefix_boundary(indptr, indices, n, order):
    rank = np.empty(n, np.int64)
    for i in range(n):
        rank[order[i]] = i
    out = np.empty(n, np.int64)
    b = np.int64(0)
    for k in range(n):
        v = order[k]
        links = 0
        degv = 0
        for t in range(indptr[v], indptr[v + 1]):
            degv += 1
            if rank[indices[t]] < k:
                links += 1
        b += degv - 2 * links
        out[k] = b
    return out


sweep_prefix_boundary = _jit(_sweep_prefix_boundary)
