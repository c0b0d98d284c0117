"""One-dimensional partitions and the tensor mesh of the truncated cylinder."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError

__all__ = ["Partition1D", "uniform_partition", "graded_partition", "CylinderMesh"]


@dataclass(frozen=True, eq=False)
class Partition1D:
    """Strictly increasing nodes ``0 = t_0 < ... < t_N = L``."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("a partition needs at least two nodes")
        if np.any(np.diff(nodes) <= 0.0):
            raise DomainError("partition nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_cells(self):
        return self.nodes.size - 1

    @property
    def length(self):
        return float(self.nodes[-1] - self.nodes[0])

    @property
    def lengths(self):
        return np.diff(self.nodes)

    def locate(self, t):
        """Cell index containing each ``t`` (right end belongs to the last cell)."""
        idx = np.searchsorted(self.nodes, t, side="right") - 1
        return np.clip(idx, 0, self.n_cells - 1)

    def summary(self):
        return {"nodes": int(self.nodes.size), "length": self.length}


def uniform_partition(L, N):
    if int(N) != N or N < 1:
        raise DomainError(f"number of cells must be a positive integer, got {N!r}")
    if not L > 0:
        raise DomainError("length must be positive")
    N = int(N)
    nodes = np.arange(N + 1) * (float(L) / N)
    nodes[-1] = float(L)
    return Partition1D(nodes)


def graded_partition(Y, M, gamma=2.0):
    """Nodes ``Y (m/M)^gamma``, clustering toward ``y = 0`` for ``gamma > 1``."""
    if gamma < 1.0 or not math.isfinite(gamma):
        raise DomainError(f"grading exponent must be >= 1, got {gamma!r}")
    if int(M) != M or M < 1:
        raise DomainError(f"number of cells must be a positive integer, got {M!r}")
    if not Y > 0:
        raise DomainError("length must be positive")
    M = int(M)
    nodes = float(Y) * (np.arange(M + 1) / M) ** float(gamma)
    nodes[-1] = float(Y)
    return Partition1D(nodes)


@dataclass(frozen=True, eq=False)
class CylinderMesh:
    """Tensor mesh of ``(0,1) x (0,Y)``.

    Cell ``(i, j)`` (x-cell ``i``, y-cell ``j``) has flat id ``j * Nx + i``:
    the y index is the slow one.
    """

    x_part: Partition1D
    y_part: Partition1D
    gamma: float = 1.0

    @property
    def Y(self):
        return self.y_part.length

    @property
    def shape(self):
        return self.x_part.n_cells, self.y_part.n_cells

    def cell_id(self, i, j):
        nx, ny = self.shape
        if not (0 <= i < nx and 0 <= j < ny):
            raise IndexError(f"cell ({i}, {j}) outside {nx}x{ny} mesh")
        return j * nx + i

    def cell_index(self, cid):
        nx, ny = self.shape
        if not 0 <= cid < nx * ny:
            raise IndexError(f"cell id {cid} outside mesh")
        return cid % nx, cid // nx

    def summary(self):
        return {
            "Nx": self.x_part.n_cells,
            "M": self.y_part.n_cells,
            "x_nodes": int(self.x_part.nodes.size),
            "y_nodes": int(self.y_part.nodes.size),
            "gamma": self.gamma,
            "Y": self.Y,
        }
