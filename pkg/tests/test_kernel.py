import math

import numpy as np
import pytest

from lqg import _pykernel
from lqg._kernel import BACKEND, DijkstraWorkspace, run_dijkstra

try:
    from lqg import _ckernel
except ImportError:  # pragma: no cover
    _ckernel = None


def _run_backend(impl, weights, n, spacing, diag, sources, mask, cutoff, cut):
    n2 = n * n
    dist = np.full(n2, math.inf)
    pred = np.full(n2, -1, dtype=np.int32)
    touched = np.empty(n2, dtype=np.int32)
    cut_row, cut_colsum = (-1, 0) if cut is None else cut
    mask_arr = np.ones(n2, dtype=np.uint8) if mask is None else \
        np.ascontiguousarray(mask, dtype=np.uint8).reshape(n2)
    count = impl.grid_dijkstra(
        np.ascontiguousarray(weights, dtype=np.float64).reshape(n2), n,
        spacing, diag, np.ascontiguousarray(sources, dtype=np.longlong),
        mask_arr, cutoff, cut_row, cut_colsum, dist, pred, touched)
    return dist, pred, count


@pytest.mark.skipif(_ckernel is None, reason="compiled kernel not built")
def test_backends_bit_identical():
    rng = np.random.default_rng(123)
    for trial in range(24):
        n = int(rng.integers(3, 14))
        w = np.exp(rng.standard_normal((n, n)))
        mask = (rng.random((n, n)) > 0.15) if trial % 2 else None
        srcs = rng.integers(0, n * n, size=int(rng.integers(1, 4)))
        if mask is not None:
            mask.flat[srcs] = True
        cut = (n // 2, n + 1) if trial % 3 == 0 else None
        cutoff = math.inf if trial % 4 else 1.5
        diag = trial % 2 == 0
        d1, p1, c1 = _run_backend(_pykernel, w, n, 0.7, diag, srcs, mask,
                                  cutoff, cut)
        d2, p2, c2 = _run_backend(_ckernel, w, n, 0.7, diag, srcs, mask,
                                  cutoff, cut)
        assert c1 == c2
        assert d1.tobytes() == d2.tobytes()
        assert p1.tobytes() == p2.tobytes()


def test_backend_reports_which_is_active():
    assert BACKEND in ("compiled", "pure")


def test_cutoff_finalizes_ball_exactly():
    rng = np.random.default_rng(9)
    n = 20
    w = np.exp(0.5 * rng.standard_normal((n, n)))
    full_dist, _ = run_dijkstra(w, 0.3, True, np.array([0]))
    cutoff = np.median(full_dist)
    cut_dist, _ = run_dijkstra(w, 0.3, True, np.array([0]), cutoff=cutoff)
    inside = full_dist <= cutoff
    assert np.array_equal(cut_dist[inside], full_dist[inside])
    assert np.all(cut_dist[~inside] >= full_dist[~inside])


def test_workspace_reset_reuses_buffers():
    rng = np.random.default_rng(11)
    n = 16
    w = np.exp(0.5 * rng.standard_normal((n, n)))
    ws = DijkstraWorkspace(w, 0.5, True)
    ref_dist, _ = run_dijkstra(w, 0.5, True, np.array([5]), cutoff=2.0)
    for _ in range(3):
        touched = ws.run(5, 2.0)
        got = ws.dist[touched]
        want = ref_dist.reshape(-1)[touched]
        assert np.array_equal(got, want)
        ws.reset()
    assert np.all(np.isinf(ws.dist))
    assert np.all(ws.pred == -1)


def test_duplicate_and_masked_sources():
    n = 6
    w = np.ones((n, n))
    mask = np.ones((n, n), dtype=bool)
    mask[0, 0] = False
    dist, pred = run_dijkstra(w, 1.0, False, np.array([0, 7, 7]), mask=mask)
    assert math.isinf(dist[0, 0])  # masked source is skipped
    assert dist[1, 1] == 0.0
    assert pred[1, 1] == -1
