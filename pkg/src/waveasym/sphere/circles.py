"""Averages of sphere functions over circles of constant <sigma, omega>.

For a band-limited field the average over the circle ``<sigma, omega> = z``
has the exact spectral form

    avg(omega, z) = sum_lm f_lm P_l(z) Y_lm(omega),

which is what the default (spectral) construction uses.  The direct
route evaluates the field on the circle and applies the trapezoid rule
in the circle parameter, which is exact for band-limited fields once
the node count exceeds the trigonometric degree; it serves as the
independent cross-check of the spectral form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DataError
from .field import SphereField
from .grid import SphereGrid, legendre_all


def orthonormal_frame(omega):
    """Two unit vectors spanning the plane orthogonal to ``omega``."""
    omega = np.asarray(omega, dtype=float)
    helper = np.array([1.0, 0.0, 0.0])
    if abs(omega[0]) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    e1 = np.cross(omega, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(omega, e1)
    return e1, e2

def circle_points(omega, z, tau):
    e1, e2 = orthonormal_frame(omega)
    omega = np.asarray(omega, dtype=float)
    rho = np.sqrt(max(1.0 - z * z, 0.0))
    return (
        z * omega[None, :]
        + rho * np.cos(tau)[:, None] * e1[None, :]
        + rho * np.sin(tau)[:, None] * e2[None, :]
    )


def circle_average_brute(f: SphereField, omega, z: float, n_tau: int | None = None) -> float:
    """Average of ``f`` over the circle by trapezoid rule in the angle."""
    if n_tau is None:
        n_tau = max(4 * f.grid.band_limit, 16)
    tau = 2.0 * np.pi * np.arange(n_tau) / n_tau
    pts = circle_points(omega, z, tau)
    return float(np.mean(f.evaluate(pts)))


def spectral_averages(f: SphereField, z) -> np.ndarray:
    """avg(omega_i, z_j) for all grid directions; shape (n_nodes, len(z))."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    pl = legendre_all(f.grid.band_limit, z)          # (L+1, nz)
    weighted = f.coeffs[:, None] * pl[f.grid.ls]     # (ncoeff, nz)
    return f.grid.synthesis @ weighted


def spectral_average_single(f: SphereField, omega, z) -> np.ndarray:
    """avg(omega, z_j) at one direction, arbitrary z samples."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    pl = legendre_all(f.grid.band_limit, z)
    from .grid import points_to_zphi, sh_synthesis_matrix

    zo, po = points_to_zphi(np.asarray(omega)[None, :])
    y = sh_synthesis_matrix(f.grid.band_limit, zo, po)[0]
    return (y * f.coeffs) @ pl[f.grid.ls]


def gauss_nodes_01(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class CircleAverageTable:
    """Table of circle averages on (grid direction) x (z node).

    ``z_nodes``/``z_weights`` are Gauss-Legendre on [-1, 1]; the
    ``refine_nodes`` cluster Chebyshev points on [0.9, 1] to resolve the
    Taylor structure of the averages near the lightcone value z = 1.
    """

    directions: SphereGrid
    z_nodes: np.ndarray
    z_weights: np.ndarray
    values: np.ndarray          # (n_nodes, n_z)
    refine_nodes: np.ndarray
    refine_values: np.ndarray   # (n_nodes, n_refine)

    def row(self, i: int) -> np.ndarray:
        return self.values[i]


def circle_averages(
    f: SphereField,
    n_z: int = 64,
    method: str = "spectral",
    n_refine: int = 16,
) -> CircleAverageTable:
    """Build the circle-average table of ``f``.

    Parameters
    ----------
    f : SphereField
        Band-limited input field.
    n_z : int
        Number of Gauss-Legendre z nodes on [-1, 1] (>= 16).
    method : {"spectral", "quadrature"}
        Spectral uses the Legendre multiplier form (exact for
        band-limited fields); quadrature evaluates the defining circle
        integral by trapezoid rule with ``4 * band_limit`` angles.
    """
    if n_z < 16:
        raise ConfigurationError(f"n_z must be >= 16, got {n_z}")
    if not np.all(np.isfinite(f.values)):
        raise DataError("field values are not finite")
    z, wz = np.polynomial.legendre.leggauss(n_z)
    k = np.arange(n_refine)
    refine = 0.95 + 0.05 * np.cos(np.pi * k / max(n_refine - 1, 1))

    if method == "spectral":
        vals = spectral_averages(f, z)
        rvals = spectral_averages(f, refine)
    elif method == "quadrature":
        n_tau = max(4 * f.grid.band_limit, 16)
        vals = np.empty((f.grid.n_nodes, n_z))
        rvals = np.empty((f.grid.n_nodes, n_refine))
        for i, omega in enumerate(f.grid.nodes):
            for j, zj in enumerate(z):
                vals[i, j] = circle_average_brute(f, omega, zj, n_tau)
            for j, zj in enumerate(refine):
                rvals[i, j] = circle_average_brute(f, omega, zj, n_tau)
    else:
        raise ConfigurationError(f"unknown method {method!r}")

    return CircleAverageTable(
        directions=f.grid,
        z_nodes=z,
        z_weights=wz,
        values=vals,
        refine_nodes=refine,
        refine_values=rvals,
    )
