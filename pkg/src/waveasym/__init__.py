"""waveasym: asymptotics of 3+1 wave equations with lightcone-concentrated sources.

Numerical construction and cross-validation of scattering solutions for
wave equations whose sources decay polynomially off the lightcone:
lightcone expansions of interior and exterior homogeneous solutions,
sphere transforms (Funk-type) and their inverses, the radiation-field
ODE hierarchy with its matching and compatibility conditions, a glued
asymptotic solution, and the radial majorant bound on its remainder.
"""

__version__ = "0.1.0"

from .sphere import (
    SphereField,
    SphereGrid,
    circle_averages,
    get_grid,
    laplace_beltrami,
    make_grid,
    poisson_solve,
    sphere_mean,
)

__all__ = [
    "SphereField",
    "SphereGrid",
    "make_grid",
    "get_grid",
    "sphere_mean",
    "laplace_beltrami",
    "poisson_solve",
    "circle_averages",
    "__version__",
]
