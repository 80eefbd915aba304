"""Qualitative phenomena as reproducible experiments.

Covers geodesic confluence statistics, the annulus comparison event used in
localization arguments, thick-point maps from circle averages, and
Figure-style rasters of metric balls with geodesics overlaid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, OutOfBoundsError
from .field import FieldGrid, _bilinear
from .lfpp import (AnnulusSpec, DistanceMap, LfppMetric, across_distance,
                   around_distance, distance_map, geodesic, metric_ball)

__all__ = [
    "ConfluenceReport",
    "ThickPointMap",
    "confluence_stat",
    "annulus_event",
    "thick_point_map",
    "ball_raster",
]


@dataclass(frozen=True)
class ConfluenceReport:
    """Statistics of geodesics from one center to targets outside its s-ball.

    ``shared_prefix_fraction``: fraction of target pairs whose geodesics
    coincide until first exit of the t-ball (reported as 1.0 with
    ``trivial_pairs=True`` when there are no pairs).
    ``distinct_exit_edges``: number of distinct first steps out of the
    center among all traced geodesics.
    ``geodesic_tree``: whether the union of the traced geodesics is a tree
    (always true for predecessor back-traces; verified, not assumed).
    """

    center: tuple[int, int]
    s: float
    t: float
    num_targets: int
    targets: tuple[tuple[int, int], ...]
    prefix_lengths: tuple[int, ...]
    shared_prefix_fraction: float
    distinct_exit_edges: int
    geodesic_tree: bool
    trivial_pairs: bool


@dataclass(frozen=True)
class ThickPointMap:
    """Per-vertex flags for circle-average growth above a threshold.

    A vertex is flagged when ``max_r h_r(v) / log(1/r) > q_threshold`` over
    the radius list (radii below 1, so the denominators are positive).
    Circle averages are evaluated on the interior window where the largest
    circle fits; vertices outside the window are never flagged but still
    count in the denominator of ``flagged_fraction``.
    """

    q_threshold: float
    radii: tuple[float, ...]
    flags: np.ndarray
    flagged_fraction: float


def confluence_stat(metric: LfppMetric, center: tuple[int, int], s: float,
                    t: float, num_targets: int, seed: int) -> ConfluenceReport:
    """Trace geodesics to random targets outside the s-ball and measure how
    long they stay together near the center."""
    if not (0.0 < t < s):
        raise InvalidParameterError(f"need 0 < t < s, got t={t}, s={s}")
    if num_targets < 1:
        raise InvalidParameterError("need at least one target")
    dmap = distance_map(metric, [center])
    dist = np.asarray(dmap.dist)
    ball_s = metric_ball(dmap, s)
    if not metric_ball(dmap, t).any():
        raise InvalidParameterError("t-ball contains no vertices")
    outside = np.isfinite(dist) & ~ball_s
    candidates = np.flatnonzero(outside.reshape(-1))
    if candidates.size == 0:
        raise InvalidParameterError(
            "no reachable vertices outside the s-ball (ball too large)")
    if num_targets > candidates.size:
        raise InvalidParameterError(
            f"only {candidates.size} candidate targets for {num_targets}")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(candidates, size=num_targets, replace=False))
    n = metric.n
    targets = tuple((int(v) // n, int(v) % n) for v in chosen)

    prefixes = []
    first_steps = set()
    prev_of: dict[tuple[int, int], tuple[int, int]] = {}
    is_tree = True
    for tv in targets:
        path = geodesic(dmap, tv).vertices
        if len(path) > 1:
            first_steps.add(path[1])
        for a, b in zip(path[:-1], path[1:]):
            if prev_of.setdefault(b, a) != a:
                is_tree = False
        # Distances increase along a shortest path, so the t-ball portion is
        # an initial segment.
        prefix = []
        for v in path:
            if dist[v] > t:
                break
            prefix.append(v)
        prefixes.append(tuple(prefix))

    npairs = num_targets * (num_targets - 1) // 2
    if npairs == 0:
        shared = 1.0
    else:
        same = sum(1 for i in range(num_targets) for j in range(i + 1, num_targets)
                   if prefixes[i] == prefixes[j])
        shared = same / npairs
    return ConfluenceReport(
        center=(int(center[0]), int(center[1])), s=float(s), t=float(t),
        num_targets=num_targets, targets=targets,
        prefix_lengths=tuple(len(p) for p in prefixes),
        shared_prefix_fraction=shared,
        distinct_exit_edges=len(first_steps),
        geodesic_tree=is_tree, trivial_pairs=(npairs == 0))


def annulus_event(metric: LfppMetric, z: tuple[int, int], r: float) -> bool:
    """Whether the shortest separating cycle in the annulus between radii 2r
    and 3r is shorter than the crossing of the annulus between r and 2r.

    Invariant under adding a constant to the field (both sides scale the
    same way).
    """
    if not (r > 0.0):
        raise InvalidParameterError(f"radius must be > 0, got {r}")
    around = around_distance(metric, AnnulusSpec(z, 2.0 * r, 3.0 * r))
    across = across_distance(metric, AnnulusSpec(z, r, 2.0 * r))
    return bool(around < across)


def thick_point_map(field: FieldGrid, q_threshold: float,
                    radii) -> ThickPointMap:
    """Flag vertices whose circle averages grow faster than the threshold."""
    radii = [float(r) for r in radii]
    if not radii:
        raise InvalidParameterError("radius list is empty")
    if any(r2 >= r1 for r1, r2 in zip(radii[:-1], radii[1:])):
        raise InvalidParameterError("radii must be strictly decreasing")
    if any(not (0.0 < r < 1.0) for r in radii):
        raise InvalidParameterError("radii must lie in (0, 1)")
    n = field.n
    delta = field.spacing
    if any(r < delta for r in radii):
        raise InvalidParameterError(f"radii must be >= spacing {delta}")
    margin = math.ceil(max(radii) / delta)
    if 2 * margin >= n:
        raise OutOfBoundsError("largest circle fits nowhere in the grid")
    win = slice(margin, n - margin)
    rows = np.arange(n, dtype=float)[win]
    cols = np.arange(n, dtype=float)[win]
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    values = np.asarray(field.values)

    best = np.full(rr.shape, -math.inf)
    for r in radii:
        m = int(math.ceil(2.0 * math.pi * r / delta))
        theta = 2.0 * math.pi * np.arange(m) / m
        acc = np.zeros(rr.shape)
        r_px = r / delta
        for th in theta:
            acc += _bilinear(values, rr + r_px * math.sin(th),
                             cc + r_px * math.cos(th))
        ratio = (acc / m) / math.log(1.0 / r)
        np.maximum(best, ratio, out=best)

    flags = np.zeros((n, n), dtype=bool)
    flags[win, win] = best > q_threshold
    return ThickPointMap(float(q_threshold), tuple(radii), flags,
                         float(flags.sum()) / (n * n))


def ball_raster(dmap: DistanceMap, radius: float,
                geodesic_targets=()) -> np.ndarray:
    """8-bit grayscale raster of the metric ball with geodesics overlaid.

    Gray level is ``round(254 * dist / radius)`` inside the ball (0 = the
    sources), 255 outside; geodesic pixels are forced to 0. Unreached
    targets are skipped.
    """
    if not (radius > 0.0):
        raise InvalidParameterError(f"radius must be > 0, got {radius}")
    dist = np.asarray(dmap.dist)
    img = np.full(dist.shape, 255, dtype=np.uint8)
    inside = np.isfinite(dist) & (dist <= radius)
    gray = np.clip(np.rint(254.0 * dist[inside] / radius), 0, 254)
    img[inside] = gray.astype(np.uint8)
    for tv in geodesic_targets:
        tv = (int(tv[0]), int(tv[1]))
        if not np.isfinite(dist[tv]):
            continue
        for v in geodesic(dmap, tv).vertices:
            img[v] = 0
    return img
