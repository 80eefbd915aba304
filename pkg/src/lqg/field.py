"""Lattice Gaussian fields and the deterministic operations on them.

Conventions used throughout the package:

* A grid holds ``n x n`` vertices. Vertex ``(i, j)`` (row ``i``, column
  ``j``) sits at the physical point ``(x, y) = (j * spacing, i * spacing)``,
  so the grid covers the square ``[0, (n-1) * spacing]^2``.
* Physical points are ``(x, y)`` float pairs; vertices are ``(row, col)``
  integer pairs.
* Samplers are pure functions of their parameters and a 64-bit seed;
  replicate streams are derived with :func:`lqg.rng.mix64`.

The zero-boundary lattice free field is sampled in the sine eigenbasis of
the interior graph Laplacian ``L = 4 I - A`` (Dirichlet boundary), so its
covariance is exactly ``L^{-1}``. With this convention the single interior
vertex of a 3 x 3 grid has variance 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import numpy as np
from scipy.fft import dstn, next_fast_len, rfft2 as _scipy_rfft2
from scipy.ndimage import gaussian_filter
from scipy.signal import fftconvolve

from .errors import InvalidParameterError, OutOfBoundsError

__all__ = [
    "FieldKind",
    "FieldGrid",
    "MollifiedField",
    "BumpSpec",
    "constant_field",
    "custom_field",
    "sample_discrete_gff",
    "sample_wn_field",
    "mollify",
    "circle_average",
    "add_bump",
    "add_constant",
    "smooth_plateau",
    "whole_plane_covariance",
]


class FieldKind(IntEnum):
    """Field provenance tag (also the code stored in the binary format)."""

    DISCRETE_GFF = 1
    WHITE_NOISE = 2
    WHITE_NOISE_TRUNCATED = 3
    CONSTANT = 4
    CUSTOM = 5


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FieldGrid:
    """A real-valued field sampled on a regular ``n x n`` lattice.

    Values are immutable after construction; all operations return new
    grids (value semantics), which makes concurrent use safe.
    """

    n: int
    spacing: float
    values: np.ndarray
    kind: FieldKind
    seed: int | None = None
    t_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"lattice size must be >= 1, got {self.n}")
        if not (self.spacing > 0.0):
            raise InvalidParameterError(f"spacing must be > 0, got {self.spacing}")
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (self.n, self.n):
            raise InvalidParameterError(
                f"values shape {v.shape} does not match n={self.n}")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("field values must all be finite")
        if self.kind == FieldKind.CONSTANT and v.size and not np.all(v == v.flat[0]):
            raise InvalidParameterError("constant field has unequal entries")
        if self.kind == FieldKind.DISCRETE_GFF and self.n >= 1:
            border = np.concatenate([v[0, :], v[-1, :], v[:, 0], v[:, -1]])
            if np.any(border != 0.0):
                raise InvalidParameterError(
                    "zero-boundary field has nonzero boundary values")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def extent(self) -> float:
        """Physical side length of the grid."""
        return (self.n - 1) * self.spacing


@dataclass(frozen=True)
class MollifiedField:
    """A field blurred by the heat kernel at scale ``epsilon``.

    ``epsilon`` is the effective scale relative to the raw base field;
    blurring an already-mollified field accumulates scales in quadrature.
    """

    base: FieldGrid
    epsilon: float
    values: np.ndarray

    def __post_init__(self):
        if not (self.epsilon > 0.0):
            raise InvalidParameterError(f"epsilon must be > 0, got {self.epsilon}")
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", _freeze(v))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def spacing(self) -> float:
        return self.base.spacing


@dataclass(frozen=True)
class BumpSpec:
    """A radially symmetric smooth bump.

    The profile equals ``height`` on the closed ball of radius
    ``inner_radius`` around ``center`` (a vertex), vanishes outside
    ``outer_radius``, and interpolates monotonically in between with a
    C-infinity plateau function.
    """

    center: tuple[int, int]
    inner_radius: float
    outer_radius: float
    height: float

    def __post_init__(self):
        if not (0.0 < self.inner_radius < self.outer_radius):
            raise InvalidParameterError(
                f"need 0 < inner_radius < outer_radius, got "
                f"{self.inner_radius}, {self.outer_radius}")


def constant_field(n: int, spacing: float, value: float) -> FieldGrid:
    return FieldGrid(n, spacing, np.full((n, n), float(value)), FieldKind.CONSTANT)


def custom_field(values: np.ndarray, spacing: float) -> FieldGrid:
    """Wrap an array (copied) as a field grid."""
    v = np.array(values, dtype=np.float64, copy=True)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise InvalidParameterError(f"values must be square 2-D, got {v.shape}")
    return FieldGrid(v.shape[0], spacing, v, FieldKind.CUSTOM)


def whole_plane_covariance(z: complex, w: complex) -> float:
    """Log-covariance of the whole-plane field, normalized so the average
    over the unit circle vanishes.

    Exposed for documentation and tests only; the samplers below use the
    zero-boundary lattice field, whose pointwise variance is finite.
    """
    z = complex(z)
    w = complex(w)
    if z == w:
        return math.inf
    return math.log(max(abs(z), 1.0) * max(abs(w), 1.0) / abs(z - w))


def sample_discrete_gff(n: int, spacing: float, seed: int) -> FieldGrid:
    """Sample the zero-boundary lattice free field.

    The interior values are drawn in the orthonormal sine basis, which
    diagonalizes the Dirichlet graph Laplacian: mode ``(j, k)`` has
    eigenvalue ``4 - 2 cos(pi j / (m+1)) - 2 cos(pi k / (m+1))`` for an
    ``m x m`` interior. Sampling costs ``O(n^2 log n)`` and the covariance
    of the result is exactly the inverse of the interior graph Laplacian.
    Boundary vertices are exactly 0.
    """
    if n < 1:
        raise InvalidParameterError(f"lattice size must be >= 1, got {n}")
    if not (spacing > 0.0):
        raise InvalidParameterError(f"spacing must be > 0, got {spacing}")
    values = np.zeros((n, n))
    m = n - 2
    if m > 0:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((m, m))
        j = np.arange(1, m + 1)
        lam_1d = 2.0 - 2.0 * np.cos(np.pi * j / (m + 1))
        lam = lam_1d[:, None] + lam_1d[None, :]
        values[1:-1, 1:-1] = dstn(z / np.sqrt(lam), type=1, norm="ortho")
    return FieldGrid(n, spacing, values, FieldKind.DISCRETE_GFF, seed=seed)


def smooth_plateau(rho, r_in: float, r_out: float):
    """C-infinity plateau profile: 1 on ``rho <= r_in``, 0 on ``rho >= r_out``,
    strictly decreasing in between. Accepts scalars or arrays."""
    rho = np.asarray(rho, dtype=np.float64)
    u = (rho - r_in) / (r_out - r_in)
    u = np.clip(u, 0.0, 1.0)

    def _s(x):
        out = np.zeros_like(x)
        pos = x > 0.0
        with np.errstate(divide="ignore", over="ignore"):
            out[pos] = np.exp(-1.0 / x[pos])
        return out

    su = _s(u)
    s1u = _s(1.0 - u)
    return s1u / (su + s1u)


# -- white-noise decomposition ----------------------------------------------
#
# The field over scale range (t_low, t_high] is a sum over a geometric grid
# of squared scales s in [t_low^2, t_high^2] (ratio 2^(1/4)) of independent
# white-noise layers blurred by the heat kernel p_{s/2}. Per layer,
#
#   layer(z) = sqrt(pi * ds) * spacing * sum_v p_{s*/2}(z - v) xi_v ,
#
# with xi_v i.i.d. standard normal on a lattice padded by the kernel radius
# (the noise lives on the whole plane, so the pad must cover the kernel
# support). The midpoint rule in s reproduces the variance integral
# 0.5 * log(t_high^2 / t_low^2) = log(t_high / t_low) to 0.3% per layer.
# The truncated variant multiplies the kernel by a smooth radial bump equal
# to 1 inside radius 1/20 and 0 outside 1/10, which makes restrictions to
# sets at distance >= 1/5 exactly independent.

_WN_RATIO = 2.0 ** 0.25
_WN_TRUNC_INNER = 1.0 / 20.0
_WN_TRUNC_OUTER = 1.0 / 10.0


def _wn_kernels(spacing: float, t_low: float, t_high: float,
                truncated: bool) -> list[np.ndarray]:
    """Per-layer convolution kernels, sampled on the lattice."""
    s_lo = t_low * t_low
    s_hi = t_high * t_high
    edges = [s_lo]
    while edges[-1] * _WN_RATIO < s_hi:
        edges.append(edges[-1] * _WN_RATIO)
    edges.append(s_hi)

    kernels = []
    for a, b in zip(edges[:-1], edges[1:]):
        ds = b - a
        if ds <= 0.0:
            continue
        s_mid = 0.5 * (a + b)
        sigma = math.sqrt(s_mid / 2.0)
        rad = 6.0 * sigma
        if truncated:
            rad = min(rad, _WN_TRUNC_OUTER)
        r_px = max(1, math.ceil(rad / spacing))
        d = np.arange(-r_px, r_px + 1) * spacing
        rho2 = d[:, None] ** 2 + d[None, :] ** 2
        # heat kernel at time s_mid/2: (1 / (pi s)) exp(-|z|^2 / s)
        kern = np.exp(-rho2 / s_mid) / (math.pi * s_mid)
        kern *= math.sqrt(math.pi * ds) * spacing
        if truncated:
            kern = kern * smooth_plateau(np.sqrt(rho2), _WN_TRUNC_INNER,
                                         _WN_TRUNC_OUTER)
        kernels.append(kern)
    return kernels


@lru_cache(maxsize=16)
def _wn_plan(n: int, spacing: float, t_low: float, t_high: float,
             truncated: bool):
    """Precomputed spectral plan: all layers share one padded transform size
    so a sample costs one batched FFT round trip.

    Layer kernels are embedded wrap-centered at the origin of the padded
    grid; the circular convolution then equals the linear one on the
    central n x n window, which is the returned field.
    """
    kernels = _wn_kernels(spacing, t_low, t_high, truncated)
    r_max = max((k.shape[0] - 1) // 2 for k in kernels)
    p = next_fast_len(n + 2 * r_max, real=True)
    spectra = []
    for kern in kernels:
        r = (kern.shape[0] - 1) // 2
        pad = np.zeros((p, p))
        rows = (np.arange(-r, r + 1)) % p
        pad[np.ix_(rows, rows)] = kern
        spectra.append(_scipy_rfft2(pad))
    khat = np.ascontiguousarray(np.stack(spectra))
    khat.setflags(write=False)
    return len(kernels), p, r_max, khat


def sample_wn_field(n: int, spacing: float, t_low: float, t_high: float,
                    truncated: bool = False, seed: int = 0) -> FieldGrid:
    """Sample the white-noise-decomposition field over scales (t_low, t_high].

    Deterministic per seed. Cost grows with ``(t_high / spacing)^2`` because
    the largest layer's kernel radius is ~``6 * t_high / sqrt(2)`` in
    physical units (the noise lattice must cover the kernel support).
    """
    if n < 1:
        raise InvalidParameterError(f"lattice size must be >= 1, got {n}")
    if not (spacing > 0.0):
        raise InvalidParameterError(f"spacing must be > 0, got {spacing}")
    if not (0.0 < t_low < t_high <= 1.0):
        raise InvalidParameterError(
            f"need 0 < t_low < t_high <= 1, got t_low={t_low}, t_high={t_high}")
    nlayers, p, r_max, khat = _wn_plan(n, spacing, t_low, t_high, truncated)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((nlayers, p, p))
    spec = (np.fft.rfft2(noise) * khat).sum(axis=0)
    full = np.fft.irfft2(spec, s=(p, p))
    values = np.ascontiguousarray(full[r_max:r_max + n, r_max:r_max + n])
    kind = FieldKind.WHITE_NOISE_TRUNCATED if truncated else FieldKind.WHITE_NOISE
    return FieldGrid(n, spacing, values, kind, seed=seed, t_range=(t_low, t_high))


# -- mollification ------------------------------------------------------------

_BLUR_TRUNCATE = 8.0  # kernel radius in sigmas; tail mass ~ 1e-15
_BLUR_FFT_SIGMA_PX = 16.0  # switch to FFT convolution above this


def heat_blur(values: np.ndarray, sigma_px: float) -> np.ndarray:
    """Gaussian blur with per-axis std ``sigma_px`` (pixels), symmetric
    (reflect) boundary handling. Preserves constants exactly."""
    if sigma_px <= 0.0:
        return values.copy()
    if sigma_px <= _BLUR_FFT_SIGMA_PX:
        return gaussian_filter(values, sigma_px, mode="reflect",
                               truncate=_BLUR_TRUNCATE)
    # Large kernels: same sampled/normalized kernel, via FFT on a
    # symmetric-padded copy.
    r = int(_BLUR_TRUNCATE * sigma_px + 0.5)  # ndimage's radius convention
    d = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-0.5 * (d / sigma_px) ** 2)
    g /= g.sum()
    padded = np.pad(values, r, mode="symmetric")
    out = fftconvolve(padded, np.outer(g, g), mode="valid")
    return np.ascontiguousarray(out)


def mollify(field: FieldGrid | MollifiedField, epsilon: float) -> MollifiedField:
    """Convolve the field with the heat kernel at time ``epsilon^2 / 2``.

    Per-coordinate standard deviation of the kernel is ``epsilon / sqrt(2)``.
    Boundary handling is reflect-padding, which preserves constants exactly.
    Mollifying an already mollified field combines the scales in quadrature.
    """
    if not (epsilon > 0.0):
        raise InvalidParameterError(f"epsilon must be > 0, got {epsilon}")
    if isinstance(field, MollifiedField):
        base = field.base
        eff = math.hypot(field.epsilon, epsilon)
    else:
        base = field
        eff = epsilon
    sigma_px = epsilon / (field.spacing * math.sqrt(2.0))
    return MollifiedField(base, eff, heat_blur(np.asarray(field.values), sigma_px))


# -- pointwise operations -----------------------------------------------------


def _bilinear(values: np.ndarray, rows, cols) -> np.ndarray:
    """Bilinear interpolation at fractional (row, col) positions inside the
    grid."""
    n = values.shape[0]
    i0 = np.clip(np.floor(rows).astype(np.int64), 0, n - 2)
    j0 = np.clip(np.floor(cols).astype(np.int64), 0, n - 2)
    fy = rows - i0
    fx = cols - j0
    v00 = values[i0, j0]
    v01 = values[i0, j0 + 1]
    v10 = values[i0 + 1, j0]
    v11 = values[i0 + 1, j0 + 1]
    return (v00 * (1 - fy) * (1 - fx) + v01 * (1 - fy) * fx
            + v10 * fy * (1 - fx) + v11 * fy * fx)


def circle_average(field: FieldGrid | MollifiedField, z: tuple[float, float],
                   r: float) -> float:
    """Average of the (bilinearly interpolated) field over the circle of
    radius ``r`` around the physical point ``z = (x, y)``.

    Uses ``ceil(2 pi r / spacing)`` equispaced sample points, so the
    quadrature error is O(spacing / r).
    """
    delta = field.spacing
    n = field.n
    x, y = float(z[0]), float(z[1])
    if r < delta:
        raise InvalidParameterError(f"radius {r} below spacing {delta}")
    extent = (n - 1) * delta
    tol = 1e-9 * max(extent, 1.0)
    if x - r < -tol or y - r < -tol or x + r > extent + tol or y + r > extent + tol:
        raise OutOfBoundsError(
            f"circle of radius {r} at ({x}, {y}) exits the grid")
    m = int(math.ceil(2.0 * math.pi * r / delta))
    theta = 2.0 * math.pi * np.arange(m) / m
    px = np.clip(x + r * np.cos(theta), 0.0, extent)
    py = np.clip(y + r * np.sin(theta), 0.0, extent)
    samples = _bilinear(np.asarray(field.values), py / delta, px / delta)
    return float(samples.mean())


def add_bump(field: FieldGrid, bump: BumpSpec) -> FieldGrid:
    """Add a smooth compactly supported bump to the field (value semantics).

    Vertices at distance > outer_radius from the bump center are unchanged
    bit-exactly; the value at the center changes by exactly ``height``.
    The profile is clipped at the grid edges.
    """
    n = field.n
    delta = field.spacing
    ci, cj = bump.center
    r_out_px = bump.outer_radius / delta
    if ci + r_out_px < 0 or cj + r_out_px < 0 or ci - r_out_px > n - 1 \
            or cj - r_out_px > n - 1:
        raise OutOfBoundsError("bump support does not intersect the grid")
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    rho = delta * np.hypot(rows - ci, cols - cj)
    profile = bump.height * smooth_plateau(rho, bump.inner_radius,
                                           bump.outer_radius)
    out = np.array(field.values, copy=True)
    nz = profile != 0.0
    out[nz] += profile[nz]
    return FieldGrid(n, delta, out, FieldKind.CUSTOM)


def add_constant(field: FieldGrid, c: float) -> FieldGrid:
    """Shift the whole field by ``c`` (value semantics)."""
    kind = FieldKind.CONSTANT if field.kind == FieldKind.CONSTANT else FieldKind.CUSTOM
    if c == 0.0:
        return FieldGrid(field.n, field.spacing, np.array(field.values, copy=True),
                         kind)
    return FieldGrid(field.n, field.spacing, field.values + float(c), kind)
