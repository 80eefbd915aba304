# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dijkstra kernel for the grid metrics.

Behaviorally identical to ``_pykernel.grid_dijkstra`` (lazy-deletion binary
heap ordered by (distance, vertex), same neighbor scan order, strict
relaxation), so the two backends produce bit-identical results. Keep the
two implementations in sync.
"""

from libc.math cimport INFINITY, sqrt
from libc.stdlib cimport free, malloc, realloc


cdef int DR[8]
cdef int DC[8]
DR[0] = -1; DR[1] = 1; DR[2] = 0; DR[3] = 0
DR[4] = -1; DR[5] = -1; DR[6] = 1; DR[7] = 1
DC[0] = 0; DC[1] = 0; DC[2] = -1; DC[3] = 1
DC[4] = -1; DC[5] = 1; DC[6] = -1; DC[7] = 1


cdef struct Heap:
    double *key
    int *vert
    Py_ssize_t size
    Py_ssize_t cap


cdef inline bint _less(double ka, int va, double kb, int vb) noexcept nogil:
    return ka < kb or (ka == kb and va < vb)


cdef inline int _heap_push(Heap *h, double key, int v) noexcept nogil:
    cdef Py_ssize_t i, parent
    cdef double *nk
    cdef int *nv
    if h.size == h.cap:
        nk = <double *> realloc(h.key, 2 * h.cap * sizeof(double))
        if nk != NULL:
            h.key = nk
        nv = <int *> realloc(h.vert, 2 * h.cap * sizeof(int))
        if nv != NULL:
            h.vert = nv
        if nk == NULL or nv == NULL:
            return -1
        h.cap *= 2
    i = h.size
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(key, v, h.key[parent], h.vert[parent]):
            h.key[i] = h.key[parent]
            h.vert[i] = h.vert[parent]
            i = parent
        else:
            break
    h.key[i] = key
    h.vert[i] = v
    return 0


cdef inline void _heap_pop(Heap *h, double *out_key, int *out_vert) noexcept nogil:
    cdef Py_ssize_t i = 0, child
    cdef double lk
    cdef int lv
    out_key[0] = h.key[0]
    out_vert[0] = h.vert[0]
    h.size -= 1
    if h.size == 0:
        return
    lk = h.key[h.size]
    lv = h.vert[h.size]
    while True:
        child = 2 * i + 1
        if child >= h.size:
            break
        if child + 1 < h.size and _less(h.key[child + 1], h.vert[child + 1],
                                        h.key[child], h.vert[child]):
            child += 1
        if _less(h.key[child], h.vert[child], lk, lv):
            h.key[i] = h.key[child]
            h.vert[i] = h.vert[child]
            i = child
        else:
            break
    h.key[i] = lk
    h.vert[i] = lv


def grid_dijkstra(const double[::1] weights, int n, double spacing,
                  bint use_diag, const long long[::1] sources,
                  const unsigned char[::1] mask, double cutoff,
                  int cut_row, int cut_colsum,
                  double[::1] dist, int[::1] pred, int[::1] touched):
    """See ``_pykernel.grid_dijkstra`` for the contract. ``mask`` must be a
    length-n*n uint8 array (all ones for an unmasked run)."""
    cdef double straight = spacing
    cdef double diagonal = spacing * sqrt(2.0)
    cdef int nneigh = 8 if use_diag else 4
    cdef Py_ssize_t count = 0
    cdef Heap h
    cdef Py_ssize_t i
    cdef int s, u, v, ur, uc, vr, vc, k, rlo, rhi
    cdef double d, wu, nd, factor
    cdef int failed = 0

    h.cap = 1024
    h.size = 0
    h.key = <double *> malloc(h.cap * sizeof(double))
    h.vert = <int *> malloc(h.cap * sizeof(int))
    if h.key == NULL or h.vert == NULL:
        free(h.key)
        free(h.vert)
        raise MemoryError("heap allocation failed")

    with nogil:
        for i in range(sources.shape[0]):
            s = <int> sources[i]
            if mask[s] == 0:
                continue
            if dist[s] != 0.0:
                dist[s] = 0.0
                pred[s] = -1
                touched[count] = s
                count += 1
                if _heap_push(&h, 0.0, s) < 0:
                    failed = 1
                    break
        while h.size > 0 and not failed:
            _heap_pop(&h, &d, &u)
            if d > dist[u]:
                continue
            if d > cutoff:
                break
            ur = u / n
            uc = u - ur * n
            wu = weights[u]
            for k in range(nneigh):
                vr = ur + DR[k]
                vc = uc + DC[k]
                if vr < 0 or vr >= n or vc < 0 or vc >= n:
                    continue
                v = vr * n + vc
                if mask[v] == 0:
                    continue
                if cut_row >= 0:
                    rlo = ur if ur < vr else vr
                    rhi = ur if ur > vr else vr
                    if rlo == cut_row and rhi == cut_row + 1 \
                            and uc + vc >= cut_colsum:
                        continue
                factor = straight if k < 4 else diagonal
                nd = d + 0.5 * factor * (wu + weights[v])
                if nd < dist[v]:
                    if dist[v] == INFINITY:
                        touched[count] = v
                        count += 1
                    dist[v] = nd
                    pred[v] = u
                    if _heap_push(&h, nd, v) < 0:
                        failed = 1
                        break

    free(h.key)
    free(h.vert)
    if failed:
        raise MemoryError("heap growth failed")
    return count
