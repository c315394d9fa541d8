#!/usr/bin/env python3
"""
Grid Module
Uniform grids on [0,1] and grid functions with the discrete l2_h inner product
"""
import logging
from typing import Callable, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]


def _frozen(values: ArrayLike) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.flags.writeable = False
    return array


class Grid:
    """Uniform partition of [0,1] into N intervals"""

    def __init__(self, n_intervals: int):
        """
        Initialize grid

        Args:
            n_intervals: Number of intervals N (N >= 2)
        """
        if int(n_intervals) != n_intervals or n_intervals < 2:
            raise ValueError(f"Grid needs N >= 2 intervals, got {n_intervals}")

        self.n_intervals = int(n_intervals)
        self.mesh = 1.0 / self.n_intervals
        # j*h, with the right end pinned so that x_N == 1 exactly
        nodes = np.arange(self.n_intervals + 1) * self.mesh
        nodes[-1] = 1.0
        self.nodes = _frozen(nodes)

    @property
    def interior(self) -> np.ndarray:
        """Interior nodes x_1..x_{N-1}"""
        return self.nodes[1:-1]

    @property
    def size(self) -> int:
        """Number of interior unknowns N-1"""
        return self.n_intervals - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and other.n_intervals == self.n_intervals

    def __hash__(self) -> int:
        return hash(("Grid", self.n_intervals))

    def __repr__(self) -> str:
        return f"Grid(N={self.n_intervals}, h={self.mesh:g})"


class GridFunction:
    """Real values v_0..v_N on the nodes of a grid"""

    def __init__(self, grid: Grid, values: ArrayLike):
        """
        Args:
            grid: Grid the values live on
            values: N+1 node values
        """
        values = _frozen(values)
        if values.shape != (grid.n_intervals + 1,):
            raise ValueError(
                f"Expected {grid.n_intervals + 1} node values for {grid}, got shape {values.shape}"
            )
        self.grid = grid
        self.values = values

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]

    def to_homogeneous(self) -> "HomogeneousGridFunction":
        """Reinterpret as an element of l2_{h,0} (boundary values must be 0)"""
        return HomogeneousGridFunction(self.grid, self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.grid!r}, values={np.array2string(self.values, precision=6)})"


class HomogeneousGridFunction(GridFunction):
    """Grid function with v_0 = v_N = 0"""

    def __init__(self, grid: Grid, values: ArrayLike):
        super().__init__(grid, values)
        if self.values[0] != 0.0 or self.values[-1] != 0.0:
            raise ValueError(
                f"Homogeneous grid function needs v_0 = v_N = 0, got {self.values[0]!r}, {self.values[-1]!r}"
            )

    @classmethod
    def from_interior(cls, grid: Grid, interior: ArrayLike) -> "HomogeneousGridFunction":
        """Build from the N-1 interior values, padding the boundary with zeros"""
        interior = np.asarray(interior, dtype=np.float64)
        if interior.shape != (grid.size,):
            raise ValueError(f"Expected {grid.size} interior values for {grid}, got shape {interior.shape}")
        return cls(grid, np.concatenate(([0.0], interior, [0.0])))

    @classmethod
    def zeros(cls, grid: Grid) -> "HomogeneousGridFunction":
        return cls(grid, np.zeros(grid.n_intervals + 1))


def make_grid(n_intervals: int) -> Grid:
    """Create uniform grid with h = 1/N"""
    return Grid(n_intervals)


def sample(grid: Grid, f: Callable[[float], float]) -> GridFunction:
    """
    Sample a function on the grid nodes

    Args:
        grid: Target grid
        f: Real function on [0,1], called once per node

    Returns:
        GridFunction with values f(x_j)
    """
    return GridFunction(grid, [f(float(x)) for x in grid.nodes])


def sample_interior(grid: Grid, f: Callable[[float], float]) -> HomogeneousGridFunction:
    """Sample f at the interior nodes only; boundary values are set to 0.

    Forcing data for the clamped problem is only read at interior nodes, so
    this is how right-hand sides like f = 24 enter the solver.
    """
    return HomogeneousGridFunction.from_interior(grid, [f(float(x)) for x in grid.interior])


def _check_same_grid(u: GridFunction, v: GridFunction) -> None:
    if u.grid != v.grid:
        raise ValueError(f"Grid functions live on different grids: {u.grid!r} vs {v.grid!r}")


def inner_product_h(u: GridFunction, v: GridFunction) -> float:
    """(u,v)_h = h * sum_{j=0..N} u_j v_j, boundary terms with full weight"""
    _check_same_grid(u, v)
    return float(u.grid.mesh * np.dot(u.values, v.values))


def norm_h(u: GridFunction) -> float:
    return float(np.sqrt(inner_product_h(u, u)))


def sup_norm(u: GridFunction) -> float:
    return float(np.max(np.abs(u.values)))
