"""Scalar fields on the unit sphere with dual grid/spectral representation."""

from __future__ import annotations

import json

import numpy as np

from ..errors import ConfigurationError, DataError, IntegrabilityError
from . import grid as _grid
from .grid import FOUR_PI, SphereGrid, get_grid, lm_index, sh_synthesis_matrix


class SphereField:
    """A real scalar function on S^2.

    Holds grid values and spherical-harmonic coefficients, each computed
    lazily from the other.  Operations that are diagonal in coefficient
    space (Laplacian, Poisson solve, parity projection) act spectrally;
    pointwise operations act on grid values.  Instances are treated as
    immutable: arithmetic returns new fields.
    """

    __slots__ = ("grid", "_values", "_coeffs")

    def __init__(self, grid: SphereGrid, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ConfigurationError("SphereField needs values or coeffs")
        self.grid = grid
        self._values = None if values is None else np.asarray(values, dtype=float)
        self._coeffs = None if coeffs is None else np.asarray(coeffs, dtype=float)
        if self._values is not None and self._values.shape != (grid.n_nodes,):
            raise ConfigurationError("values shape does not match grid")
        if self._coeffs is not None and self._coeffs.shape != (grid.n_coeffs,):
            raise ConfigurationError("coeffs shape does not match grid")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_values(cls, grid, values):
        return cls(grid, values=values)

    @classmethod
    def from_coeffs(cls, grid, coeffs):
        return cls(grid, coeffs=coeffs)

    @classmethod
    def from_function(cls, grid, fn):
        """Sample ``fn(x, y, z)`` (vectorized over arrays) on the grid."""
        n = grid.nodes
        return cls(grid, values=fn(n[:, 0], n[:, 1], n[:, 2]))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, coeffs=np.zeros(grid.n_coeffs))

    @classmethod
    def harmonic(cls, grid, l, m, amplitude=1.0):
        """The single real harmonic Y_{l,m} scaled by ``amplitude``."""
        c = np.zeros(grid.n_coeffs)
        c[lm_index(l, m)] = amplitude
        return cls(grid, coeffs=c)

    @classmethod
    def random_band_limited(cls, grid, band_limit, rng, scale=1.0):
        """Random field with N(0, scale^2/(1+l)^2) coefficients up to ``band_limit``."""
        if band_limit > grid.band_limit:
            raise ConfigurationError("band_limit exceeds grid resolution")
        c = np.zeros(grid.n_coeffs)
        n = _grid.n_coeffs(band_limit)
        ls = grid.ls[:n]
        c[:n] = rng.standard_normal(n) * scale / (1.0 + ls)
        return cls(grid, coeffs=c)

    # -- representations ----------------------------------------------

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.grid.synthesis @ self._coeffs
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            if not np.all(np.isfinite(self._values)):
                raise DataError("field values are not finite")
            self._coeffs = self.grid.analysis @ self._values
        return self._coeffs

    def evaluate(self, points) -> np.ndarray:
        """Synthesize the field at arbitrary unit vectors (N, 3)."""
        z, phi = _grid.points_to_zphi(points)
        return sh_synthesis_matrix(self.grid.band_limit, z, phi) @ self.coeffs

    def evaluate_zphi(self, z, phi) -> np.ndarray:
        return sh_synthesis_matrix(self.grid.band_limit, z, phi) @ self.coeffs

    def on_grid(self, grid: SphereGrid) -> "SphereField":
        """Re-express on another grid by padding/truncating coefficients."""
        if grid is self.grid:
            return self
        c = np.zeros(grid.n_coeffs)
        n = min(grid.n_coeffs, self.grid.n_coeffs)
        c[:n] = self.coeffs[:n]
        return SphereField(grid, coeffs=c)

    # -- core operations ----------------------------------------------

    def mean(self) -> float:
        """Spherical mean (1/4pi) int f dS, via grid quadrature."""
        return float(self.grid.weights @ self.values) / FOUR_PI

    def laplacian(self) -> "SphereField":
        """Laplace-Beltrami operator; coefficient (l, m) times -l(l+1)."""
        return SphereField(self.grid, coeffs=self.coeffs * self.grid.eigenvalues())

    def poisson_solve(self, tol_mean: float | None = None) -> "SphereField":
        """Solve Delta_omega P = self for the unique zero-mean P.

        Raises :class:`IntegrabilityError` if the spherical mean of the
        right-hand side exceeds ``tol_mean`` (default 1e-8 * sup|rhs|).
        """
        rhs_mean = self.mean()
        scale = self.sup_norm()
        if tol_mean is None:
            tol_mean = 1e-8 * max(scale, 1e-300)
        if abs(rhs_mean) > tol_mean:
            raise IntegrabilityError(
                f"Poisson right-hand side has nonzero mean {rhs_mean:.3e} "
                f"(tolerance {tol_mean:.3e})",
                rhs_mean,
            )
        eig = self.grid.eigenvalues()
        c = np.zeros_like(self.coeffs)
        c[1:] = self.coeffs[1:] / eig[1:]
        return SphereField(self.grid, coeffs=c)

    def even_part(self) -> "SphereField":
        """Projection onto even degrees l (f(sigma) + f(-sigma))/2."""
        mask = (self.grid.ls % 2 == 0).astype(float)
        return SphereField(self.grid, coeffs=self.coeffs * mask)

    def odd_part(self) -> "SphereField":
        mask = (self.grid.ls % 2 == 1).astype(float)
        return SphereField(self.grid, coeffs=self.coeffs * mask)

    def antipodal(self) -> "SphereField":
        """f(-sigma); harmonic of degree l picks up (-1)^l."""
        sign = np.where(self.grid.ls % 2 == 0, 1.0, -1.0)
        return SphereField(self.grid, coeffs=self.coeffs * sign)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.grid.n_nodes else 0.0

    def coeff(self, l, m) -> float:
        return float(self.coeffs[lm_index(l, m)])

    def tangential_gradient(self) -> np.ndarray:
        """Ambient cartesian components of the tangential gradient at grid nodes.

        Returns (N, 3); row i is the gradient of the degree-0 homogeneous
        extension of f, evaluated at node i (a vector tangent to S^2).
        """
        d_theta, d_phi, e_theta, e_phi = self.grid.tangential_gradient_frame()
        ft = d_theta @ self.coeffs
        fp = d_phi @ self.coeffs
        return ft[:, None] * e_theta + fp[:, None] * e_phi

    # -- arithmetic ----------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, SphereField):
            if other.grid is not self.grid:
                other = other.on_grid(self.grid)
            return SphereField(self.grid, values=op(self.values, other.values))
        return SphereField(self.grid, values=op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return SphereField(self.grid, values=other - self.values)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return SphereField(self.grid, values=-self.values)

    # -- serialization --------------------------------------------------

    def to_json_dict(self) -> dict:
        L = self.grid.band_limit
        c = self.coeffs
        entries = [
            [int(l), int(m), float(c[lm_index(l, m)])]
            for l in range(L + 1)
            for m in range(-l, l + 1)
        ]
        return {"band_limit": L, "coeffs": entries}

    @classmethod
    def from_json_dict(cls, data, grid=None) -> "SphereField":
        L = int(data["band_limit"])
        if grid is None:
            grid = get_grid(max(L, 4))
        c = np.zeros(grid.n_coeffs)
        for l, m, v in data["coeffs"]:
            if l <= grid.band_limit:
                c[lm_index(int(l), int(m))] = float(v)
        return cls(grid, coeffs=c)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text, grid=None) -> "SphereField":
        return cls.from_json_dict(json.loads(text), grid=grid)

    def to_csv(self, path) -> None:
        """Node dump: colatitude, longitude, value."""
        zz = self.grid.nodes[:, 2]
        theta = np.arccos(np.clip(zz, -1, 1))
        phi = np.arctan2(self.grid.nodes[:, 1], self.grid.nodes[:, 0])
        rows = np.column_stack([theta, phi, self.values])
        np.savetxt(path, rows, delimiter=",", header="theta,phi,value", comments="")


def sphere_mean(f: SphereField) -> float:
    return f.mean()


def laplace_beltrami(f: SphereField) -> SphereField:
    return f.laplacian()


def poisson_solve(rhs: SphereField, tol_mean: float | None = None) -> SphereField:
    return rhs.poisson_solve(tol_mean=tol_mean)
