"""Backend selection for the shortest-path kernel.

The compiled Cython kernel is used when available; otherwise the
pure-Python implementation takes over. Set ``LQG_PURE_KERNEL=1`` to force
the fallback (used by the benchmark to compare both). Both backends return
bit-identical results.
"""

from __future__ import annotations

import math
import os

import numpy as np

if os.environ.get("LQG_PURE_KERNEL", "") == "1":
    from . import _pykernel as _impl
    BACKEND = "pure"
else:
    try:
        from . import _ckernel as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build
        from . import _pykernel as _impl
        BACKEND = "pure"

_FULL_MASKS: dict[int, np.ndarray] = {}


def _full_mask(n2: int) -> np.ndarray:
    m = _FULL_MASKS.get(n2)
    if m is None:
        m = np.ones(n2, dtype=np.uint8)
        m.setflags(write=False)
        _FULL_MASKS[n2] = m
        if len(_FULL_MASKS) > 8:
            _FULL_MASKS.pop(next(iter(_FULL_MASKS)))
    return m


def run_dijkstra(weights: np.ndarray, spacing: float, use_diag: bool,
                 sources: np.ndarray, mask: np.ndarray | None = None,
                 cutoff: float = math.inf,
                 cut: tuple[int, int] | None = None):
    """Run the kernel on fresh buffers and return (dist, pred) as n x n arrays.

    ``weights``: n x n vertex weights. ``sources``: array of flat vertex
    indices. ``mask``: optional n x n boolean/uint8 vertex mask. ``cut``:
    optional (cut_row, cut_colsum) edge cut (see the kernel docstring).
    """
    n = weights.shape[0]
    n2 = n * n
    wflat = np.ascontiguousarray(weights, dtype=np.float64).reshape(n2)
    src = np.ascontiguousarray(sources, dtype=np.longlong).reshape(-1)
    if mask is None:
        mflat = _full_mask(n2)
    else:
        mflat = np.ascontiguousarray(mask, dtype=np.uint8).reshape(n2)
    cut_row, cut_colsum = (-1, 0) if cut is None else cut
    dist = np.full(n2, math.inf)
    pred = np.full(n2, -1, dtype=np.int32)
    touched = np.empty(n2, dtype=np.int32)
    _impl.grid_dijkstra(wflat, n, spacing, use_diag, src, mflat, cutoff,
                        cut_row, cut_colsum, dist, pred, touched)
    return dist.reshape(n, n), pred.reshape(n, n)


class DijkstraWorkspace:
    """Reusable buffers for many small cutoff runs (greedy ball covers).

    After each :meth:`run`, :meth:`reset` must be called before the next
    one; it clears only the entries touched by the previous run.
    """

    def __init__(self, weights: np.ndarray, spacing: float, use_diag: bool):
        n = weights.shape[0]
        self.n = n
        self.spacing = spacing
        self.use_diag = use_diag
        self.weights = np.ascontiguousarray(weights, dtype=np.float64).reshape(n * n)
        self.mask = _full_mask(n * n)
        self.dist = np.full(n * n, math.inf)
        self.pred = np.full(n * n, -1, dtype=np.int32)
        self.touched = np.empty(n * n, dtype=np.int32)
        self._src = np.empty(1, dtype=np.longlong)
        self._count = 0

    def run(self, source: int, cutoff: float) -> np.ndarray:
        """Single-source run; returns the flat indices touched (their
        ``self.dist`` entries are valid until :meth:`reset`)."""
        self._src[0] = source
        self._count = _impl.grid_dijkstra(
            self.weights, self.n, self.spacing, self.use_diag, self._src,
            self.mask, cutoff, -1, 0, self.dist, self.pred, self.touched)
        return self.touched[:self._count]

    def reset(self) -> None:
        t = self.touched[:self._count]
        self.dist[t] = math.inf
        self.pred[t] = -1
        self._count = 0
