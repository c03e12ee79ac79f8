"""Hot inner loops, each with a numba kernel and a numpy/scipy twin.

The public functions dispatch on :func:`truthy._accel.get_backend`. Both
paths return identical results; the numba kernels are only faster.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from ._accel import get_backend, njit

__all__ = [
    "gini_sorted",
    "component_labels",
    "live_edge_rounds",
    "threshold_rounds",
    "jaccard_cluster_count",
]


# --------------------------------------------------------------------- gini


@njit
def _gini_nb(x):
    n = x.shape[0]
    total = 0.0
    weighted = 0.0
    for i in range(n):
        total += x[i]
        weighted += (2.0 * (i + 1) - n - 1.0) * x[i]
    if total == 0.0:
        return 0.0
    return weighted / (n * total)


def _gini_np(x):
    n = x.shape[0]
    total = x.sum()
    if total == 0.0:
        return 0.0
    ranks = 2.0 * np.arange(1, n + 1, dtype=np.float64) - n - 1.0
    return float(ranks @ x / (n * total))


def gini_sorted(x: np.ndarray) -> float:
    """Gini coefficient of an ascending-sorted float64 array (rank form)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if get_backend() == "numba":
        return float(_gini_nb(x))
    return _gini_np(x)


# --------------------------------------------------------- weak components


@njit
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit
def _components_nb(n, src, dst):
    parent = np.arange(n)
    for e in range(src.shape[0]):
        a = _find(parent, src[e])
        b = _find(parent, dst[e])
        if a != b:
            # keep the smaller index as root so labels are canonical
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        labels[i] = _find(parent, i)
    return labels


def _canonical_labels(raw):
    # relabel each component by its smallest member index
    n = raw.shape[0]
    first = np.full(raw.max() + 1 if n else 0, n, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(n, dtype=np.int64))
    return first[raw]


def _components_np(n, src, dst):
    if n == 0:
        return np.empty(0, dtype=np.int64)
    adj = coo_matrix((np.ones(src.shape[0], dtype=np.int8), (src, dst)), shape=(n, n))
    _, raw = connected_components(adj, directed=True, connection="weak")
    return _canonical_labels(raw.astype(np.int64))


def component_labels(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Weak-component label of each of ``n`` nodes; label = smallest member index."""
    src = np.ascontiguousarray(src, dtype=np.int64)
    dst = np.ascontiguousarray(dst, dtype=np.int64)
    if get_backend() == "numba":
        return _components_nb(n, src, dst)
    return _components_np(n, src, dst)


# ------------------------------------------------- independent cascade (BFS)


@njit
def _live_edge_nb(indptr, indices, live, seeds):
    n = indptr.shape[0] - 1
    rounds = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for s in seeds:
        if rounds[s] < 0:
            rounds[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if live[e] and rounds[v] < 0:
                rounds[v] = rounds[u] + 1
                queue[tail] = v
                tail += 1
    return rounds


def _csr_edges_of(indptr, nodes):
    """Edge positions of every row in ``nodes``, concatenated."""
    starts = indptr[nodes]
    counts = indptr[nodes + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.repeat(starts - np.cumsum(counts) + counts, counts)
    return offsets + np.arange(total, dtype=np.int64)


def _live_edge_np(indptr, indices, live, seeds):
    n = indptr.shape[0] - 1
    rounds = np.full(n, -1, dtype=np.int64)
    frontier = np.unique(seeds)
    rounds[frontier] = 0
    level = 0
    while frontier.size:
        level += 1
        edges = _csr_edges_of(indptr, frontier)
        edges = edges[live[edges]]
        targets = np.unique(indices[edges])
        frontier = targets[rounds[targets] < 0]
        rounds[frontier] = level
    return rounds


def live_edge_rounds(indptr, indices, live, seeds) -> np.ndarray:
    """BFS depth from ``seeds`` over the live edges of a CSR graph (-1 = unreached).

    With one independent coin per edge this is exactly the adoption round of
    a synchronous independent-cascade run.
    """
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    live = np.ascontiguousarray(live, dtype=np.bool_)
    seeds = np.ascontiguousarray(seeds, dtype=np.int64)
    if get_backend() == "numba":
        return _live_edge_nb(indptr, indices, live, seeds)
    return _live_edge_np(indptr, indices, live, seeds)


# ------------------------------------------------------- linear threshold


@njit
def _threshold_nb(indptr, indices, theta, seeds):
    n = indptr.shape[0] - 1
    rounds = np.full(n, -1, dtype=np.int64)
    for s in seeds:
        rounds[s] = 0
    level = 0
    changed = True
    fresh = np.empty(n, dtype=np.int64)
    while changed:
        level += 1
        n_fresh = 0
        for v in range(n):
            if rounds[v] >= 0:
                continue
            k = indptr[v + 1] - indptr[v]
            if k == 0:
                continue
            cnt = 0
            for e in range(indptr[v], indptr[v + 1]):
                if rounds[indices[e]] >= 0:
                    cnt += 1
            if cnt / k >= theta[v]:
                fresh[n_fresh] = v
                n_fresh += 1
        for i in range(n_fresh):
            rounds[fresh[i]] = level
        changed = n_fresh > 0
    return rounds


def _threshold_np(indptr, indices, theta, seeds):
    n = indptr.shape[0] - 1
    rounds = np.full(n, -1, dtype=np.int64)
    rounds[seeds] = 0
    degree = np.diff(indptr)
    row = np.repeat(np.arange(n, dtype=np.int64), degree)
    has_sources = degree > 0
    safe_degree = np.where(has_sources, degree, 1)
    level = 0
    while True:
        level += 1
        adopted = rounds >= 0
        cnt = np.bincount(row, weights=adopted[indices].astype(np.float64), minlength=n)
        fire = (~adopted) & has_sources & (cnt / safe_degree >= theta)
        if not fire.any():
            return rounds
        rounds[fire] = level


def threshold_rounds(indptr, indices, theta, seeds) -> np.ndarray:
    """Synchronous linear-threshold fixed point; adoption round per node (-1 = never).

    ``indptr``/``indices`` list each node's information sources (followees).
    """
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    seeds = np.ascontiguousarray(seeds, dtype=np.int64)
    if get_backend() == "numba":
        return _threshold_nb(indptr, indices, theta, seeds)
    return _threshold_np(indptr, indices, theta, seeds)


# ------------------------------------------------ near-duplicate clustering


@njit
def _jaccard_nb(indptr, indices, threshold):
    n = indptr.shape[0] - 1
    parent = np.arange(n)
    for i in range(n):
        a0 = indptr[i]
        la = indptr[i + 1] - a0
        for j in range(i + 1, n):
            b0 = indptr[j]
            lb = indptr[j + 1] - b0
            if la == 0 and lb == 0:
                sim = 1.0
            elif la == 0 or lb == 0:
                continue
            else:
                small = min(la, lb)
                big = max(la, lb)
                # J <= small / big, skip pairs that cannot reach the threshold
                if small / big < threshold:
                    continue
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri == rj:
                    continue
                p = 0
                q = 0
                inter = 0
                while p < la and q < lb:
                    x = indices[a0 + p]
                    y = indices[b0 + q]
                    if x == y:
                        inter += 1
                        p += 1
                        q += 1
                    elif x < y:
                        p += 1
                    else:
                        q += 1
                sim = inter / (la + lb - inter)
            if sim >= threshold:
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri != rj:
                    if ri < rj:
                        parent[rj] = ri
                    else:
                        parent[ri] = rj
    count = 0
    for i in range(n):
        if _find(parent, i) == i:
            count += 1
    return count


def _jaccard_np(indptr, indices, threshold):
    n = indptr.shape[0] - 1
    if n == 0:
        return 0
    sizes = np.diff(indptr)
    n_cols = int(indices.max()) + 1 if indices.size else 1
    x = csr_matrix((np.ones(indices.size, dtype=np.int64), indices, indptr), shape=(n, n_cols))
    inter = (x @ x.T).tocoo()
    r, c, shared = inter.row, inter.col, inter.data.astype(np.float64)
    sim = shared / (sizes[r] + sizes[c] - shared)
    keep = sim >= threshold
    rows, cols = [r[keep]], [c[keep]]
    empty = np.flatnonzero(sizes == 0)
    if empty.size > 1:
        # empty sets are identical to each other
        rows.append(empty[1:])
        cols.append(np.full(empty.size - 1, empty[0]))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    links = coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n, n))
    n_comp, _ = connected_components(links, directed=False)
    return int(n_comp)


def jaccard_cluster_count(indptr, indices, threshold: float) -> int:
    """Clusters formed by linking set pairs with Jaccard >= ``threshold``.

    Each row of the CSR structure must hold sorted, unique integer ids.
    """
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if get_backend() == "numba":
        return int(_jaccard_nb(indptr, indices, float(threshold)))
    return _jaccard_np(indptr, indices, float(threshold))
