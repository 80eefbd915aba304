"""Pure-Python Dijkstra kernel (fallback when the compiled core is absent).

The compiled kernel in ``_ckernel.pyx`` implements the identical algorithm:
lazy-deletion binary heap ordered by ``(distance, vertex)``, fixed neighbor
scan order, strict-improvement relaxation. Both backends therefore produce
bit-identical distance and predecessor arrays.
"""

from __future__ import annotations

import heapq
import math

# Neighbor scan order: axis moves first, then diagonals.
_DR = (-1, 1, 0, 0, -1, -1, 1, 1)
_DC = (0, 0, -1, 1, -1, 1, -1, 1)

INF = math.inf


def grid_dijkstra(weights, n, spacing, use_diag, sources, mask,
                  cutoff, cut_row, cut_colsum, dist, pred, touched):
    """Multi-source Dijkstra on the n x n grid graph.

    Edge (u, v) costs ``|u - v| * (w[u] + w[v]) / 2`` with ``|u - v|`` equal
    to ``spacing`` for axis moves and ``sqrt(2) * spacing`` for diagonal
    moves. Ties on distance break toward the lexicographically smaller
    vertex index. Vertices with ``mask == 0`` are excluded; edges whose
    segment crosses the horizontal half-line between rows ``cut_row`` and
    ``cut_row + 1`` at column sum >= ``cut_colsum`` are removed
    (``cut_row < 0`` disables the cut). Expansion stops once the minimum
    heap key exceeds ``cutoff``.

    ``dist``/``pred`` must hold +inf / -1 at every entry this call may
    touch; the indices of modified entries are recorded in ``touched`` and
    the count is returned, so callers can cheaply reset the buffers.
    """
    straight = spacing
    diagonal = spacing * math.sqrt(2.0)
    nneigh = 8 if use_diag else 4
    count = 0
    heap = []
    for s in sources:
        s = int(s)
        if mask is not None and not mask[s]:
            continue
        if dist[s] != 0.0:
            dist[s] = 0.0
            pred[s] = -1
            touched[count] = s
            count += 1
            heapq.heappush(heap, (0.0, s))
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if d > cutoff:
            break
        ur, uc = divmod(u, n)
        wu = weights[u]
        for k in range(nneigh):
            vr = ur + _DR[k]
            vc = uc + _DC[k]
            if vr < 0 or vr >= n or vc < 0 or vc >= n:
                continue
            v = vr * n + vc
            if mask is not None and not mask[v]:
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
                if dist[v] == INF:
                    touched[count] = v
                    count += 1
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return count
