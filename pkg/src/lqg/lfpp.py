"""Liouville first passage percolation on a mollified field.

A mollified field ``h`` and a parameter ``xi > 0`` induce vertex weights
``w(v) = exp(xi * h(v))``. Edge ``(u, v)`` of the grid graph costs
``|u - v| * (w(u) + w(v)) / 2`` (trapezoidal discretization of the weighted
path length), with ``|u - v|`` equal to ``spacing`` for axis neighbors and
``sqrt(2) * spacing`` for King-move diagonals. Distances are exact Dijkstra
distances on this graph with deterministic lexicographic tie-breaking.

Distances carry physical length units; no normalization is applied here
(the exponent estimators normalize where needed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ._kernel import run_dijkstra
from .errors import (DegenerateAnnulusError, InvalidFieldError,
                     InvalidParameterError, OutOfBoundsError,
                     UnreachableTargetError)
from .field import MollifiedField

__all__ = [
    "Connectivity",
    "LfppMetric",
    "DistanceMap",
    "GeodesicPath",
    "AnnulusSpec",
    "build_metric",
    "edge_cost",
    "distance_map",
    "geodesic",
    "internal_distance",
    "across_distance",
    "around_distance",
    "crossing_distance",
    "metric_ball",
]

SQRT2 = math.sqrt(2.0)


class Connectivity(IntEnum):
    AXIS4 = 4
    KING8 = 8


@dataclass(frozen=True)
class LfppMetric:
    """Weighted-graph view of a mollified field at parameter ``xi``."""

    field: MollifiedField
    xi: float
    connectivity: Connectivity
    vertex_weight: np.ndarray

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def spacing(self) -> float:
        return self.field.spacing


@dataclass(frozen=True)
class DistanceMap:
    """Distances and predecessors from a source set.

    ``dist`` is +inf at unreached vertices; ``pred`` holds the flat index
    of the predecessor vertex (-1 at sources and unreached vertices), so the
    union of all shortest paths it encodes is a tree rooted at the sources.
    """

    metric: LfppMetric
    sources: tuple[tuple[int, int], ...]
    dist: np.ndarray
    pred: np.ndarray


@dataclass(frozen=True)
class GeodesicPath:
    vertices: tuple[tuple[int, int], ...]
    length: float


@dataclass(frozen=True)
class AnnulusSpec:
    """Closed annulus ``r_in <= |v - center| <= r_out`` (physical radii)."""

    center: tuple[int, int]
    r_in: float
    r_out: float

    def __post_init__(self):
        if not (0.0 < self.r_in < self.r_out):
            raise InvalidParameterError(
                f"need 0 < r_in < r_out, got {self.r_in}, {self.r_out}")


def build_metric(field: MollifiedField, xi: float,
                 connectivity: Connectivity = Connectivity.KING8) -> LfppMetric:
    """Exponentiate the field into cached vertex weights."""
    if not (xi > 0.0):
        raise InvalidParameterError(f"xi must be > 0, got {xi}")
    with np.errstate(over="raise"):
        try:
            weights = np.exp(xi * np.asarray(field.values))
        except FloatingPointError as exc:
            raise InvalidFieldError(f"vertex weights overflow: {exc}") from None
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
        raise InvalidFieldError("vertex weights must be positive and finite")
    weights = np.ascontiguousarray(weights)
    weights.setflags(write=False)
    return LfppMetric(field, float(xi), Connectivity(connectivity), weights)


def edge_cost(metric: LfppMetric, u: tuple[int, int], v: tuple[int, int]) -> float:
    """Cost of the grid edge (u, v); raises if the vertices are not adjacent."""
    dr = abs(u[0] - v[0])
    dc = abs(u[1] - v[1])
    if max(dr, dc) != 1 or (metric.connectivity == Connectivity.AXIS4
                            and dr + dc != 1):
        raise InvalidParameterError(f"{u} and {v} are not adjacent")
    factor = metric.spacing if dr + dc == 1 else SQRT2 * metric.spacing
    w = metric.vertex_weight
    return 0.5 * factor * (w[u[0], u[1]] + w[v[0], v[1]])


def _check_vertex(n: int, v: tuple[int, int]) -> None:
    r, c = v
    if not (0 <= r < n and 0 <= c < n):
        raise InvalidParameterError(f"vertex {v} outside {n} x {n} grid")


def _flat(n: int, vertices) -> np.ndarray:
    idx = np.array([r * n + c for r, c in vertices], dtype=np.longlong)
    return idx


def distance_map(metric: LfppMetric, sources) -> DistanceMap:
    """Exact multi-source Dijkstra distances (O(n^2 log n))."""
    src = [(int(r), int(c)) for r, c in sources]
    if not src:
        raise InvalidParameterError("source set must be nonempty")
    for v in src:
        _check_vertex(metric.n, v)
    dist, pred = run_dijkstra(metric.vertex_weight, metric.spacing,
                              metric.connectivity == Connectivity.KING8,
                              _flat(metric.n, src))
    dist.setflags(write=False)
    pred.setflags(write=False)
    return DistanceMap(metric, tuple(src), dist, pred)


def geodesic(dmap: DistanceMap, target: tuple[int, int]) -> GeodesicPath:
    """Back-trace the predecessor structure from ``target`` to its source."""
    n = dmap.metric.n
    target = (int(target[0]), int(target[1]))
    _check_vertex(n, target)
    if not np.isfinite(dmap.dist[target]):
        raise UnreachableTargetError(f"vertex {target} was not reached")
    path = [target]
    pred = dmap.pred
    v = target
    while True:
        p = int(pred[v[0], v[1]])
        if p < 0:
            break
        v = (p // n, p % n)
        path.append(v)
    path.reverse()
    return GeodesicPath(tuple(path), float(dmap.dist[target]))


def internal_distance(metric: LfppMetric, mask: np.ndarray,
                      z: tuple[int, int], w: tuple[int, int]) -> float:
    """Distance using only paths inside ``mask`` (boolean vertex predicate).

    Returns +inf if ``w`` is unreachable from ``z`` inside the mask. Always
    at least the unrestricted distance.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (metric.n, metric.n):
        raise InvalidParameterError("mask shape must match the grid")
    for v in (z, w):
        _check_vertex(metric.n, v)
        if not mask[v[0], v[1]]:
            raise InvalidParameterError(f"endpoint {v} outside the mask")
    dist, _ = run_dijkstra(metric.vertex_weight, metric.spacing,
                           metric.connectivity == Connectivity.KING8,
                           _flat(metric.n, [z]), mask=mask)
    return float(dist[w[0], w[1]])


def _radius_grid(metric: LfppMetric, center: tuple[int, int]) -> np.ndarray:
    n = metric.n
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    return metric.spacing * np.hypot(rows - center[0], cols - center[1])


def _annulus_mask(metric: LfppMetric, annulus: AnnulusSpec) -> np.ndarray:
    rc, cc = annulus.center
    _check_vertex(metric.n, (rc, cc))
    extent = (metric.n - 1) * metric.spacing
    x, y = cc * metric.spacing, rc * metric.spacing
    if (x - annulus.r_out < 0 or y - annulus.r_out < 0
            or x + annulus.r_out > extent or y + annulus.r_out > extent):
        raise OutOfBoundsError("annulus not contained in the grid")
    rho = _radius_grid(metric, annulus.center)
    return (rho >= annulus.r_in) & (rho <= annulus.r_out)


def across_distance(metric: LfppMetric, annulus: AnnulusSpec) -> float:
    """Distance between the inner and outer boundary layers of the annulus,
    restricted to the closed annulus."""
    mask = _annulus_mask(metric, annulus)
    rho = _radius_grid(metric, annulus.center)
    delta = metric.spacing
    inner = mask & (rho <= annulus.r_in + delta)
    outer = mask & (rho >= annulus.r_out - delta)
    if not inner.any() or not outer.any() or (inner & outer).any():
        raise DegenerateAnnulusError(
            "annulus too thin to contain separated boundary vertex layers")
    sources = np.flatnonzero(inner.reshape(-1)).astype(np.longlong)
    dist, _ = run_dijkstra(metric.vertex_weight, delta,
                           metric.connectivity == Connectivity.KING8,
                           sources, mask=mask)
    result = float(dist[outer].min())
    if not math.isfinite(result):
        raise DegenerateAnnulusError("inner and outer layers are disconnected")
    return result


def _slit_edges(metric: LfppMetric, annulus: AnnulusSpec, mask: np.ndarray):
    """Grid edges crossing the horizontal half-line from the annulus center
    toward +x, with both endpoints in the annulus."""
    n = metric.n
    rc, cc = annulus.center
    diag = metric.connectivity == Connectivity.KING8
    edges = []
    if rc + 1 >= n:
        return edges, 2 * cc + 1
    for j in range(n):
        u = (rc, j)
        if not mask[u]:
            continue
        for dj in ((0,) if not diag else (0, -1, 1)):
            vj = j + dj
            if not (0 <= vj < n):
                continue
            if j + vj < 2 * cc + 1:
                continue
            v = (rc + 1, vj)
            if mask[v]:
                edges.append((u, v))
    return edges, 2 * cc + 1


def around_distance(metric: LfppMetric, annulus: AnnulusSpec) -> float:
    """Length of the shortest cycle in the annulus separating its boundaries.

    The annulus is cut along the radial slit from the center toward +x;
    every separating cycle crosses the slit, so the minimum over
    slit-crossing edges (u, v) of ``cost(u, v)`` plus the cut-graph distance
    from v back to u realizes the minimal separating cycle.
    """
    mask = _annulus_mask(metric, annulus)
    edges, cut_colsum = _slit_edges(metric, annulus, mask)
    if not edges:
        raise DegenerateAnnulusError("no slit-crossing edges: no separating ring")
    rc = annulus.center[0]
    cut = (rc, cut_colsum)
    use_diag = metric.connectivity == Connectivity.KING8
    # Group the crossing edges by their row rc+1 endpoint: one Dijkstra per
    # distinct endpoint serves up to three edges.
    by_lower: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for u, v in edges:
        by_lower.setdefault(v, []).append(u)
    best = math.inf
    for v, partners in by_lower.items():
        dist, _ = run_dijkstra(metric.vertex_weight, metric.spacing, use_diag,
                               _flat(metric.n, [v]), mask=mask, cut=cut)
        for u in partners:
            cand = edge_cost(metric, u, v) + float(dist[u[0], u[1]])
            if cand < best:
                best = cand
    if not math.isfinite(best):
        raise DegenerateAnnulusError("annulus contains no separating ring")
    return best


def crossing_distance(metric: LfppMetric) -> float:
    """Shortest weighted distance from the left column to the right column
    (free entry along the whole left boundary)."""
    n = metric.n
    sources = np.arange(n, dtype=np.longlong) * n  # column 0
    dist, _ = run_dijkstra(metric.vertex_weight, metric.spacing,
                           metric.connectivity == Connectivity.KING8, sources)
    return float(dist[:, n - 1].min())


def metric_ball(dmap: DistanceMap, s: float) -> np.ndarray:
    """Boolean mask of vertices within distance ``s`` of the sources."""
    if s < 0.0:
        raise InvalidParameterError(f"radius must be >= 0, got {s}")
    return np.asarray(dmap.dist) <= s
