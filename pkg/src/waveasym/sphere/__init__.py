from .grid import SphereGrid, get_grid, lm_index, make_grid
from .field import SphereField, laplace_beltrami, poisson_solve, sphere_mean
from .circles import CircleAverageTable, circle_average_brute, circle_averages

__all__ = [
    "SphereGrid",
    "SphereField",
    "CircleAverageTable",
    "make_grid",
    "get_grid",
    "lm_index",
    "sphere_mean",
    "laplace_beltrami",
    "poisson_solve",
    "circle_averages",
    "circle_average_brute",
]
