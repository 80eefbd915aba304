"""Exponent estimation and the closed-form parameter relations.

The normalization constant for the metric at mollification scale epsilon is
the median left-right crossing length of the unit square. Its scaling
exponent is extracted from a log-log fit:

    log(median crossing) = (1 - xi * Q) * log(epsilon) + const ,

so ``Q = (1 - slope) / xi``. In the subcritical phase Q relates to the
surface parameter gamma by ``Q = 2 / gamma + gamma / 2``, the metric-space
dimension d satisfies ``xi = gamma / d``, and the matter central charge is
``25 - 6 Q^2``.

The dimension d is not known in closed form; the default table anchors a
heuristic interpolation ``d(gamma) = 2 + gamma^2 / 2 + gamma / sqrt(6)`` at
the single exactly-known value d(sqrt(8/3)) = 4. Estimated exponents never
depend on this table; it only feeds the convenience conversions between
gamma, xi and Q. Users can load their own empirical tables.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from ._kernel import DijkstraWorkspace
from .errors import InvalidParameterError, ResolutionError
from .field import mollify, sample_discrete_gff
from .lfpp import Connectivity, LfppMetric, build_metric, crossing_distance
from .rng import mix64

__all__ = [
    "ExponentFit",
    "ParameterTriple",
    "KpzResult",
    "estimate_a_eps",
    "fit_Q",
    "central_charge",
    "default_dimension",
    "dimension_table_from_points",
    "parameter_triple",
    "xi_to_gamma",
    "kpz",
    "cover_counts",
    "box_dimension",
]

SQRT6 = math.sqrt(6.0)
GAMMA_PURE = math.sqrt(8.0 / 3.0)  # the one gamma with exactly-known dimension


@dataclass(frozen=True)
class ExponentFit:
    """Crossing-length medians over an epsilon sweep plus the fitted exponent."""

    xi: float
    samples: tuple[tuple[float, float, int], ...]  # (epsilon, median, count)
    slope: float
    q_hat: float
    stderr: float


@dataclass(frozen=True)
class ParameterTriple:
    """Jointly consistent (gamma, xi, Q, d, central charge)."""

    gamma: float
    xi: float
    q: float
    d: float
    c_m: float


class KpzResult(NamedTuple):
    value: float
    boundary: bool  # Euclidean dimension exactly Q^2/2: untreated boundary case


def fit_Q(samples: Sequence[tuple], xi: float) -> tuple[float, float, float]:
    """Ordinary least squares in log-log coordinates.

    ``samples`` holds (epsilon, median[, count]) tuples. Returns
    (slope, q_hat, stderr_of_q_hat); the standard error is NaN for a
    two-point fit (zero residual degrees of freedom).
    """
    eps = np.array([s[0] for s in samples], dtype=float)
    med = np.array([s[1] for s in samples], dtype=float)
    if len(np.unique(eps)) < 2:
        raise InvalidParameterError("need >= 2 distinct epsilons to fit")
    if np.any(med <= 0.0):
        raise InvalidParameterError("medians must be positive for a log fit")
    x = np.log(eps)
    y = np.log(med)
    xbar = x.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float(((x - xbar) * (y - y.mean())).sum() / sxx)
    resid = y - (y.mean() + slope * (x - xbar))
    dof = len(x) - 2
    if dof > 0:
        slope_se = math.sqrt(float((resid ** 2).sum()) / dof / sxx)
    else:
        slope_se = math.nan
    q_hat = (1.0 - slope) / xi
    return slope, q_hat, slope_se / abs(xi)


def estimate_a_eps(xi: float, epsilons: Sequence[float], n: int,
                   replicates: int, seed: int,
                   connectivity: Connectivity = Connectivity.KING8,
                   threads: int = 1, sampler=None) -> ExponentFit:
    """Estimate the crossing-length normalization over an epsilon sweep.

    The grid spans the unit square (spacing 1 / (n - 1)). Replicate k draws
    ``sampler(n, spacing, mix64(seed, k))`` (the lattice free field by
    default); the same field is reused across the epsilon sweep (common
    random numbers), which reduces the variance of the fitted slope without
    biasing the medians. Medians are taken over an odd number of replicates
    so they are order statistics of the sample.
    """
    if not (xi > 0.0):
        raise InvalidParameterError(f"xi must be > 0, got {xi}")
    if n < 2:
        raise InvalidParameterError(f"need n >= 2, got {n}")
    if replicates < 1 or replicates % 2 == 0:
        raise InvalidParameterError(
            f"replicates must be odd and >= 1, got {replicates}")
    if sampler is None:
        sampler = sample_discrete_gff
    spacing = 1.0 / (n - 1)
    eps_list = [float(e) for e in epsilons]
    for e in eps_list:
        if e < 2.0 * spacing:
            raise ResolutionError(
                f"epsilon {e} below grid resolution 2 * {spacing}")
        if e > 0.25:
            raise InvalidParameterError(
                f"epsilon {e} above 0.25 (unit-square units)")

    def one_replicate(k: int) -> list[float]:
        f = sampler(n, spacing, mix64(seed, k))
        out = []
        for e in eps_list:
            metric = build_metric(mollify(f, e), xi, connectivity)
            out.append(crossing_distance(metric))
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one_replicate, range(replicates)))
    else:
        rows = [one_replicate(k) for k in range(replicates)]
    crossings = np.array(rows)  # (replicates, n_eps)
    medians = np.median(crossings, axis=0)
    samples = tuple((e, float(m), replicates) for e, m in zip(eps_list, medians))
    slope, q_hat, stderr = fit_Q(samples, xi)
    return ExponentFit(xi, samples, slope, q_hat, stderr)


# -- parameter relations ------------------------------------------------------


def central_charge(q: float) -> float:
    """Matter central charge associated with the distance exponent Q."""
    return 25.0 - 6.0 * q * q


def default_dimension(gamma: float) -> float:
    """Heuristic interpolation of the metric-space dimension, anchored at
    the exactly-known value 4 at gamma = sqrt(8/3)."""
    return 2.0 + gamma * gamma / 2.0 + gamma / SQRT6


def dimension_table_from_points(gammas: Sequence[float],
                                ds: Sequence[float]) -> Callable[[float], float]:
    """Monotone-cubic interpolant through user-supplied (gamma, d) values."""
    g = np.asarray(gammas, dtype=float)
    d = np.asarray(ds, dtype=float)
    if len(g) < 2:
        raise InvalidParameterError("need >= 2 points to interpolate")
    order = np.argsort(g)
    interp = PchipInterpolator(g[order], d[order], extrapolate=False)

    def table(gamma: float) -> float:
        val = float(interp(gamma))
        if math.isnan(val):
            raise InvalidParameterError(
                f"gamma {gamma} outside the table span [{g.min()}, {g.max()}]")
        return val

    return table


def parameter_triple(gamma: float,
                     d_table: Callable[[float], float] | None = None
                     ) -> ParameterTriple:
    """All derived parameters for a surface parameter gamma in (0, 2]."""
    if not (0.0 < gamma <= 2.0):
        raise InvalidParameterError(f"gamma must be in (0, 2], got {gamma}")
    d = (d_table or default_dimension)(gamma)
    xi = gamma / d
    q = 2.0 / gamma + gamma / 2.0
    return ParameterTriple(gamma, xi, q, d, central_charge(q))


def xi_to_gamma(xi: float,
                q_table: Sequence[tuple[float, float]] | None = None
                ) -> ParameterTriple:
    """Invert the xi -> gamma map on the subcritical range.

    With the default table, solves ``gamma / d(gamma) = xi`` for gamma in
    (0, 2] (the map is strictly increasing). With an empirical (xi, Q)
    table, interpolates Q monotonically and maps back through
    ``gamma = Q - sqrt(Q^2 - 4)``.
    """
    if not (xi > 0.0):
        raise InvalidParameterError(f"xi must be > 0, got {xi}")
    if q_table is not None:
        xs = np.array([p[0] for p in q_table], dtype=float)
        qs = np.array([p[1] for p in q_table], dtype=float)
        order = np.argsort(xs)
        interp = PchipInterpolator(xs[order], qs[order], extrapolate=False)
        q = float(interp(xi))
        if math.isnan(q):
            raise InvalidParameterError(
                f"xi {xi} outside the table span [{xs.min()}, {xs.max()}]")
        if q < 2.0:
            raise InvalidParameterError(
                f"table gives Q = {q} < 2 at xi = {xi}: no gamma in (0, 2]")
        gamma = q - math.sqrt(q * q - 4.0)
        d = gamma / xi
        return ParameterTriple(gamma, xi, q, d, central_charge(q))
    xi_max = 2.0 / default_dimension(2.0)
    if xi > xi_max:
        raise InvalidParameterError(
            f"xi {xi} beyond the subcritical span (0, {xi_max:.6f}] "
            "of the default table")
    gamma = brentq(lambda g: g / default_dimension(g) - xi, 1e-12, 2.0,
                   xtol=1e-14, rtol=8.9e-16)
    return parameter_triple(float(gamma))


def kpz(delta0: float, xi: float, q: float) -> KpzResult:
    """Quantum dimension of a field-independent set of Euclidean dimension
    ``delta0``.

    Returns +inf past the phase boundary ``delta0 > q^2 / 2``. Exactly at
    the boundary the continuity value ``q / xi`` is returned with
    ``boundary=True`` (that case is excluded from the supporting theory).
    """
    if not (0.0 <= delta0 <= 2.0):
        raise InvalidParameterError(
            f"Euclidean dimension must be in [0, 2], got {delta0}")
    disc = q * q - 2.0 * delta0
    if disc < 0.0:
        return KpzResult(math.inf, False)
    if disc == 0.0:
        return KpzResult(q / xi, True)
    return KpzResult((q - math.sqrt(disc)) / xi, False)


# -- covering-count dimension estimator ---------------------------------------


def cover_counts(metric: LfppMetric, target_set: np.ndarray,
                 radii: Sequence[float]) -> list[int]:
    """Greedy metric-ball cover counts N(s) of the target vertex set.

    For each radius: repeatedly pick the first (lexicographic) uncovered
    target vertex, remove every target vertex within metric distance s of
    it, and count the balls used. Greedy covering is within a log factor of
    optimal, which a log-log dimension fit absorbs.
    """
    target = np.asarray(target_set, dtype=bool)
    if target.shape != (metric.n, metric.n):
        raise InvalidParameterError("target set shape must match the grid")
    if not target.any():
        raise InvalidParameterError("target set is empty")
    n2 = metric.n * metric.n
    flat_target = target.reshape(n2)
    ws = DijkstraWorkspace(metric.vertex_weight, metric.spacing,
                           metric.connectivity == Connectivity.KING8)
    counts = []
    for s in radii:
        covered = ~flat_target.copy()
        ptr = 0
        nballs = 0
        while True:
            while ptr < n2 and covered[ptr]:
                ptr += 1
            if ptr >= n2:
                break
            touched = ws.run(ptr, s)
            inside = touched[ws.dist[touched] <= s]
            covered[inside] = True
            covered[ptr] = True  # guards s < 0 or numerical corner cases
            ws.reset()
            nballs += 1
        counts.append(nballs)
    return counts


def box_dimension(metric: LfppMetric, target_set: np.ndarray,
                  radii: Sequence[float]) -> float:
    """Covering-dimension estimate: slope of log N(s) against log(1/s)."""
    radii = [float(s) for s in radii]
    if len(radii) < 3:
        raise InvalidParameterError("need >= 3 radii")
    if max(radii) < 2.0 * min(radii):
        raise InvalidParameterError("radii must span at least a factor of 2")
    if any(s <= 0.0 for s in radii):
        raise InvalidParameterError("radii must be positive")
    counts = cover_counts(metric, target_set, radii)
    x = -np.log(np.array(radii))
    y = np.log(np.array(counts, dtype=float))
    xbar = x.mean()
    return float(((x - xbar) * (y - y.mean())).sum() / ((x - xbar) ** 2).sum())
