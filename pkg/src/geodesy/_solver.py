"""Label-setting shortest-path core on box graphs.

The grid topology (CSR adjacency plus edge sort keys) depends only on the
box shape and mask, so it is cached and reused across environments; each
solve gathers the current environment's weights through a precomputed
permutation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_TIE_KEY_SENTINEL = np.int64(2**62)


@njit(cache=True, nogil=True)
def _dijkstra_kernel(indptr, indices, weights, ekeys, sources, dist, pred, pkey,
                     settled, watch, n_watch):
    """Binary-heap Dijkstra with deterministic lexicographic tie-breaking.

    Returns the number of relaxations whose candidate value was exactly
    equal (at 64-bit precision) to the incumbent tentative distance. On
    such a tie the predecessor with the smaller edge key is kept.
    Stops early once all ``n_watch`` watched vertices are settled; only
    settled entries of ``dist`` are final.
    """
    cap = indices.shape[0] + sources.shape[0] + 1
    hk = np.empty(cap, np.float64)
    hv = np.empty(cap, np.int64)
    hsize = 0
    ties = 0
    remaining = n_watch

    for i in range(sources.shape[0]):
        s = sources[i]
        dist[s] = 0.0
        pkey[s] = _TIE_KEY_SENTINEL
        hk[hsize] = 0.0
        hv[hsize] = s
        hsize += 1
        j = hsize - 1
        while j > 0:
            p = (j - 1) >> 1
            if hk[j] < hk[p]:
                hk[j], hk[p] = hk[p], hk[j]
                hv[j], hv[p] = hv[p], hv[j]
                j = p
            else:
                break

    while hsize > 0:
        u = hv[0]
        hsize -= 1
        hk[0] = hk[hsize]
        hv[0] = hv[hsize]
        j = 0
        while True:
            l = 2 * j + 1
            if l >= hsize:
                break
            m = l
            r = l + 1
            if r < hsize and hk[r] < hk[l]:
                m = r
            if hk[m] < hk[j]:
                hk[j], hk[m] = hk[m], hk[j]
                hv[j], hv[m] = hv[m], hv[j]
                j = m
            else:
                break
        if settled[u]:
            continue
        settled[u] = 1
        if n_watch > 0 and watch[u] != 0:
            remaining -= 1
            if remaining == 0:
                break
        du = dist[u]
        for q in range(indptr[u], indptr[u + 1]):
            v = indices[q]
            if settled[v]:
                continue
            nd = du + weights[q]
            dv = dist[v]
            if nd < dv:
                dist[v] = nd
                pred[v] = u
                pkey[v] = ekeys[q]
                hk[hsize] = nd
                hv[hsize] = v
                hsize += 1
                j = hsize - 1
                while j > 0:
                    p = (j - 1) >> 1
                    if hk[j] < hk[p]:
                        hk[j], hk[p] = hk[p], hk[j]
                        hv[j], hv[p] = hv[p], hv[j]
                        j = p
                    else:
                        break
            elif nd == dv:
                ties += 1
                if ekeys[q] < pkey[v]:
                    pred[v] = u
                    pkey[v] = ekeys[q]
    return ties


class GridTopology:
    """CSR adjacency of a box grid, restricted to a vertex-validity mask."""

    def __init__(self, shape: tuple, valid: np.ndarray | None):
        self.shape = shape
        dim = len(shape)
        n = int(np.prod(shape))
        self.n_vertices = n
        flat = np.arange(n, dtype=np.int64).reshape(shape)

        frm_parts, to_parts, key_parts, wpos_parts = [], [], [], []
        axis_sizes = []
        w_offset = 0
        for a in range(dim):
            sl_lo = tuple(slice(0, -1) if i == a else slice(None) for i in range(dim))
            sl_hi = tuple(slice(1, None) if i == a else slice(None) for i in range(dim))
            u = flat[sl_lo].ravel()
            v = flat[sl_hi].ravel()
            m = u.size
            axis_sizes.append(m)
            wpos = np.arange(w_offset, w_offset + m, dtype=np.int64)
            w_offset += m
            if valid is not None:
                keep = valid[u] & valid[v]
                u, v, wpos = u[keep], v[keep], wpos[keep]
            # edge key: lexicographic (base vertex, axis); base = u for forward edges
            key = u * dim + a
            frm_parts.extend((u, v))
            to_parts.extend((v, u))
            key_parts.extend((key, key))
            wpos_parts.extend((wpos, wpos))

        frm = np.concatenate(frm_parts) if frm_parts else np.empty(0, np.int64)
        to = np.concatenate(to_parts) if to_parts else np.empty(0, np.int64)
        key = np.concatenate(key_parts) if key_parts else np.empty(0, np.int64)
        wpos = np.concatenate(wpos_parts) if wpos_parts else np.empty(0, np.int64)

        order = np.argsort(frm, kind="stable")
        self.indices = to[order]
        self.edge_keys = key[order]
        self.weight_perm = wpos[order]
        counts = np.bincount(frm, minlength=n)
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.indptr[1:])
        self.total_axis_size = w_offset
        self.axis_sizes = axis_sizes

    def weight_vector(self, env) -> np.ndarray:
        """Gather per-CSR-entry weights from the environment's axis arrays."""
        flat = np.empty(self.total_axis_size, dtype=np.float64)
        off = 0
        for a, m in enumerate(self.axis_sizes):
            flat[off : off + m] = env.axis_weight_array(a).ravel()
            off += m
        return flat[self.weight_perm]


_TOPOLOGY_CACHE: dict = {}
_TOPOLOGY_CACHE_MAX = 8


def grid_topology(shape: tuple, mask_key, valid: np.ndarray | None) -> GridTopology:
    key = (shape, mask_key)
    topo = _TOPOLOGY_CACHE.get(key)
    if topo is None:
        topo = GridTopology(shape, valid)
        if len(_TOPOLOGY_CACHE) >= _TOPOLOGY_CACHE_MAX:
            _TOPOLOGY_CACHE.pop(next(iter(_TOPOLOGY_CACHE)))
        _TOPOLOGY_CACHE[key] = topo
    return topo


def solve(topo: GridTopology, weights: np.ndarray, sources: np.ndarray,
          watch: np.ndarray | None = None):
    """Multi-source label-setting solve.

    Returns (dist, pred, tie_events). ``dist`` is +inf and ``pred`` is -1
    for vertices not reached (or skipped after the watch set settled).
    """
    n = topo.n_vertices
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    pkey = np.full(n, _TIE_KEY_SENTINEL, dtype=np.int64)
    if watch is None:
        watch_arr = np.zeros(0, dtype=np.uint8)
        n_watch = 0
    else:
        watch_arr = watch
        n_watch = int(watch.sum())
    ties = _dijkstra_kernel(
        topo.indptr, topo.indices, weights, topo.edge_keys,
        sources.astype(np.int64), dist, pred, pkey,
        watch_arr, n_watch,
    )
    return dist, pred, int(ties)
