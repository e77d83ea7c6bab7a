"""Spherical grids and real spherical-harmonic basis evaluation.

The grid is a Gauss-Legendre (colatitude) x uniform (longitude) product
grid.  With ``n_theta = L + 1`` Gauss-Legendre nodes and
``n_phi >= 2L + 2`` uniform longitudes, the discrete inner product

    <f, g> = sum_i w_i f(x_i) g(x_i)

is exact for products of spherical harmonics up to degree ``L``, which
makes analysis (values -> coefficients) the exact inverse of synthesis
for band-limited fields.

Real orthonormal convention: for ``m > 0``

    Y_{l,0}  = Pbar_{l,0}(z)
    Y_{l,+m} = sqrt(2) Pbar_{l,m}(z) cos(m phi)
    Y_{l,-m} = sqrt(2) Pbar_{l,m}(z) sin(m phi)

where ``Pbar`` is the fully normalized associated Legendre function
(Condon-Shortley phase included), so that ``int Y_lm Y_l'm' dS =
delta_ll' delta_mm'``.  Coefficients are stored flat in the order
``(l, m) -> l*l + l + m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError

FOUR_PI = 4.0 * np.pi


def lm_index(l: int, m: int) -> int:
    """Flat index of the (l, m) coefficient."""
    return l * l + l + m


def lm_arrays(band_limit: int):
    """Degree and order arrays aligned with the flat coefficient layout."""
    ls = np.concatenate([np.full(2 * l + 1, l, dtype=int) for l in range(band_limit + 1)])
    ms = np.concatenate([np.arange(-l, l + 1, dtype=int) for l in range(band_limit + 1)])
    return ls, ms


def n_coeffs(band_limit: int) -> int:
    return (band_limit + 1) ** 2


def legendre_all(band_limit: int, z) -> np.ndarray:
    """Legendre polynomials P_0..P_L at ``z``; shape (L+1,) + z.shape."""
    z = np.asarray(z, dtype=float)
    out = np.empty((band_limit + 1,) + z.shape)
    out[0] = 1.0
    if band_limit >= 1:
        out[1] = z
    for l in range(1, band_limit):
        out[l + 1] = ((2 * l + 1) * z * out[l] - l * out[l - 1]) / (l + 1)
    return out


def norm_assoc_legendre(band_limit: int, z, with_dz: bool = False):
    """Fully normalized associated Legendre functions Pbar_{l,m}(z).

    Returns an array of shape (L+1, L+1) + z.shape indexed by [l, m]
    (entries with m > l are zero).  With ``with_dz`` also returns
    ``(1 - z^2) dPbar/dz`` in the same layout, which is finite at the
    poles and is the natural building block for tangential gradients.

    Upward recursion in l at fixed m; numerically benign for the band
    limits used here (<= 64).
    """
    z = np.asarray(z, dtype=float)
    L = band_limit
    shape = (L + 1, L + 1) + z.shape
    p = np.zeros(shape)
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))

    p[0, 0] = 1.0 / np.sqrt(FOUR_PI)
    for m in range(1, L + 1):
        p[m, m] = -np.sqrt(1.0 + 0.5 / m) * s * p[m - 1, m - 1]
    for m in range(L):
        p[m + 1, m] = np.sqrt(2 * m + 3.0) * z * p[m, m]
    for m in range(L + 1):
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p[l, m] = a * (z * p[l - 1, m] - b * p[l - 2, m])

    if not with_dz:
        return p

    # (1-z^2) dPbar_lm/dz = c_lm Pbar_{l-1,m} - l z Pbar_lm
    dp = np.zeros(shape)
    for m in range(L + 1):
        for l in range(m, L + 1):
            c = np.sqrt((l * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0)) if l > m else 0.0
            prev = p[l - 1, m] if l > 0 else 0.0
            dp[l, m] = c * prev - l * z * p[l, m]
    return p, dp


def sh_synthesis_matrix(band_limit: int, z, phi) -> np.ndarray:
    """Matrix Y[i, k] = Y_k(z_i, phi_i) for flat coefficient index k."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    p = norm_assoc_legendre(band_limit, z)
    npts = z.shape[0]
    out = np.zeros((npts, n_coeffs(band_limit)))
    sqrt2 = np.sqrt(2.0)
    for l in range(band_limit + 1):
        out[:, lm_index(l, 0)] = p[l, 0]
        for m in range(1, l + 1):
            plm = sqrt2 * p[l, m]
            out[:, lm_index(l, m)] = plm * np.cos(m * phi)
            out[:, lm_index(l, -m)] = plm * np.sin(m * phi)
    return out


def points_to_zphi(points: np.ndarray):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    z = np.clip(pts[:, 2] / np.linalg.norm(pts, axis=1), -1.0, 1.0)
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    return z, phi


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre x uniform product grid with spectral machinery.

    Attributes
    ----------
    band_limit : int
        Maximal spherical-harmonic degree resolved exactly.
    n_theta, n_phi : int
        Node counts in colatitude and longitude.
    nodes : (N, 3) ndarray
        Unit direction vectors.
    weights : (N,) ndarray
        Quadrature weights, summing to 4 pi.
    """

    band_limit: int
    n_theta: int
    n_phi: int
    z_nodes: np.ndarray
    z_weights: np.ndarray
    phi_nodes: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    synthesis: np.ndarray = field(repr=False)   # (N, ncoeff)
    analysis: np.ndarray = field(repr=False)    # (ncoeff, N)
    ls: np.ndarray = field(repr=False)
    ms: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_coeffs(self) -> int:
        return n_coeffs(self.band_limit)

    def eigenvalues(self) -> np.ndarray:
        """Laplace-Beltrami eigenvalues -l(l+1) per flat coefficient."""
        return -(self.ls * (self.ls + 1.0))

    def tangential_gradient_frame(self):
        """Cached per-node data for tangential gradients (see field.py)."""
        return _gradient_frame(self)


def make_grid(band_limit: int) -> SphereGrid:
    """Build the product grid for a given band limit.

    Exactness: Gauss-Legendre with ``L+1`` nodes integrates polynomials
    in z up to degree ``2L+1``; ``2(L+1)`` uniform longitudes integrate
    trigonometric polynomials up to degree ``2L+1``.  Together the grid
    integrates products ``Y_lm Y_l'm'`` exactly for ``l, l' <= L``.
    """
    if band_limit < 4:
        raise ConfigurationError(f"band_limit must be >= 4, got {band_limit}")
    L = band_limit
    n_theta = L + 1
    n_phi = 2 * (L + 1)

    z, wz = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * np.pi / n_phi

    zz = np.repeat(z, n_phi)
    pp = np.tile(phi, n_theta)
    s = np.sqrt(1.0 - zz * zz)
    nodes = np.column_stack([s * np.cos(pp), s * np.sin(pp), zz])
    weights = np.repeat(wz, n_phi) * wphi

    synthesis = sh_synthesis_matrix(L, zz, pp)
    analysis = synthesis.T * weights
    ls, ms = lm_arrays(L)
    return SphereGrid(
        band_limit=L,
        n_theta=n_theta,
        n_phi=n_phi,
        z_nodes=z,
        z_weights=wz,
        phi_nodes=phi,
        nodes=nodes,
        weights=weights,
        synthesis=synthesis,
        analysis=analysis,
        ls=ls,
        ms=ms,
    )


_GRID_CACHE: dict[int, SphereGrid] = {}
_FRAME_CACHE: dict[int, tuple] = {}


def get_grid(band_limit: int) -> SphereGrid:
    """Shared grid instance per band limit (grids are immutable)."""
    if band_limit not in _GRID_CACHE:
        _GRID_CACHE[band_limit] = make_grid(band_limit)
    return _GRID_CACHE[band_limit]


def _gradient_frame(grid: SphereGrid):
    """Per-node synthesis matrices for d/dtheta and (1/sin) d/dphi.

    Grid nodes exclude the poles, so dividing by sin(theta) is safe.
    """
    if grid.band_limit in _FRAME_CACHE:
        return _FRAME_CACHE[grid.band_limit]
    L = grid.band_limit
    zz = grid.nodes[:, 2]
    pp = np.arctan2(grid.nodes[:, 1], grid.nodes[:, 0])
    sin_t = np.sqrt(1.0 - zz * zz)
    p, dpz = norm_assoc_legendre(L, zz, with_dz=True)

    nc = n_coeffs(L)
    npts = zz.shape[0]
    d_theta = np.zeros((npts, nc))   # d Y / d theta
    d_phi = np.zeros((npts, nc))     # (1/sin theta) d Y / d phi
    sqrt2 = np.sqrt(2.0)
    for l in range(L + 1):
        # dY/dtheta = -sin(theta) dY/dz = -[(1-z^2) dPbar/dz] / sin(theta)
        d_theta[:, lm_index(l, 0)] = -dpz[l, 0] / sin_t
        for m in range(1, l + 1):
            dplm = -sqrt2 * dpz[l, m] / sin_t
            d_theta[:, lm_index(l, m)] = dplm * np.cos(m * pp)
            d_theta[:, lm_index(l, -m)] = dplm * np.sin(m * pp)
            plm_over_sin = sqrt2 * p[l, m] / sin_t
            d_phi[:, lm_index(l, m)] = -m * plm_over_sin * np.sin(m * pp)
            d_phi[:, lm_index(l, -m)] = m * plm_over_sin * np.cos(m * pp)

    cos_t = zz
    e_theta = np.column_stack([cos_t * np.cos(pp), cos_t * np.sin(pp), -sin_t])
    e_phi = np.column_stack([-np.sin(pp), np.cos(pp), np.zeros_like(pp)])
    _FRAME_CACHE[grid.band_limit] = (d_theta, d_phi, e_theta, e_phi)
    return _FRAME_CACHE[grid.band_limit]
