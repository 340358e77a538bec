"""Structured axis-aligned grid, nodal field storage, Q1 basis and quadrature.

Nodes are indexed lexicographically x-fastest: flat index
``ix + nx*(iy + ny*iz)``. Elements are the cells between adjacent nodes;
their connectivity is implicit in the indexing. Fields reshaped with
:meth:`Grid.as_nd` have axis order (z, y, x) so that axis -1 is x.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    """Grid construction or field/grid mismatch problem."""


@dataclass(frozen=True)
class Grid:
    """Uniform node lattice in 2 or 3 dimensions.

    ``n`` is the node count per axis (>= 2 each), ``spacing`` the node
    spacing per axis, ``origin`` the coordinate of node (0, 0[, 0]).
    """

    n: tuple[int, ...]
    spacing: tuple[float, ...]
    origin: tuple[float, ...]

    def __post_init__(self):
        dim = len(self.n)
        if dim not in (2, 3):
            raise GridError(f"dim must be 2 or 3, got {dim}")
        if len(self.spacing) != dim or len(self.origin) != dim:
            raise GridError("n, spacing and origin must have equal length")
        if any(ni < 2 for ni in self.n):
            raise GridError(f"need >= 2 nodes per axis, got {self.n}")
        if any(h <= 0 for h in self.spacing):
            raise GridError(f"spacing must be positive, got {self.spacing}")

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def node_count(self) -> int:
        p = 1
        for ni in self.n:
            p *= ni
        return p

    @property
    def element_count(self) -> int:
        p = 1
        for ni in self.n:
            p *= ni - 1
        return p

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple((ni - 1) * hi for ni, hi in zip(self.n, self.spacing))

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.n[axis])

    def as_nd(self, flat: np.ndarray) -> np.ndarray:
        """View a flat nodal array with axis order (z, y, x) / (y, x)."""
        if flat.shape != (self.node_count,):
            raise GridError(f"field length {flat.shape} does not match {self.node_count} nodes")
        return flat.reshape(self.n[::-1])

    def node_volumes(self) -> np.ndarray:
        """Lumped-mass weights: integral of each nodal basis function (flat)."""
        out = None
        # outer product of per-axis trapezoid weights, assembled z,y,x
        for axis in reversed(range(self.dim)):
            w = np.full(self.n[axis], self.spacing[axis])
            w[0] *= 0.5
            w[-1] *= 0.5
            out = w if out is None else np.multiply.outer(out, w)
        return out.reshape(-1)


def make_grid(extent, dx, origin=None, dim=None) -> Grid:
    """Grid covering ``extent`` with spacing ``dx`` (scalar or per-axis).

    Extents must be integer multiples of the spacing so nodes land on the
    domain corners.
    """
    extent = tuple(float(e) for e in np.atleast_1d(extent))
    if dim is None:
        dim = len(extent)
    if len(extent) == 1:
        extent = extent * dim
    dx = np.broadcast_to(np.atleast_1d(np.asarray(dx, dtype=float)), (dim,))
    n = []
    for e, h in zip(extent, dx):
        cells = e / h
        if abs(cells - round(cells)) > 1e-9 * max(1.0, cells):
            raise GridError(f"extent {e} is not a multiple of dx {h}")
        n.append(int(round(cells)) + 1)
    if origin is None:
        origin = (0.0,) * dim
    return Grid(n=tuple(n), spacing=tuple(float(h) for h in dx), origin=tuple(origin))


@dataclass
class FieldState:
    """The two primal nodal fields at one time level.

    ``scalar_a`` holds the scaled temperature (pure melt) or the
    supersaturation (alloy); ``phi`` is the order parameter with +1 solid
    and -1 liquid.
    """

    scalar_a: np.ndarray
    phi: np.ndarray
    time: float = 0.0

    def check(self, grid: Grid) -> "FieldState":
        nc = grid.node_count
        if self.scalar_a.shape != (nc,) or self.phi.shape != (nc,):
            raise GridError(
                f"field lengths {self.scalar_a.shape}, {self.phi.shape} do not match {nc} nodes"
            )
        return self

    def copy(self) -> "FieldState":
        return FieldState(self.scalar_a.copy(), self.phi.copy(), self.time)


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor-product Gauss rule on the reference element [-1, 1]^dim."""

    points: np.ndarray  # (nq, dim)
    weights: np.ndarray  # (nq,)


def gauss_rule(dim: int) -> QuadratureRule:
    """2-point Gauss per axis: exact for polynomials of degree <= 3 per axis."""
    g = 1.0 / np.sqrt(3.0)
    pts1 = (-g, g)
    points = np.array(list(itertools.product(pts1, repeat=dim)))
    weights = np.ones(len(points))
    return QuadratureRule(points=points, weights=weights)


def _corner_signs(dim: int) -> np.ndarray:
    # corner order: x-fastest (matches node flat ordering within an element)
    signs = []
    ranges = [(-1, 1)] * dim
    for combo in itertools.product(*ranges[::-1]):
        signs.append(combo[::-1])
    return np.array(signs, dtype=float)


def eval_basis(ref_coord) -> tuple[np.ndarray, np.ndarray]:
    """Q1 basis values and reference-space gradients at one reference point.

    Returns ``(values, gradients)`` with shapes (2^dim,) and (2^dim, dim).
    Values form a partition of unity; gradients sum to the zero vector.
    """
    xi = np.asarray(ref_coord, dtype=float)
    dim = xi.shape[0]
    signs = _corner_signs(dim)
    one_plus = 1.0 + signs * xi  # (2^dim, dim)
    values = np.prod(one_plus, axis=1) / 2.0**dim
    grads = np.empty_like(signs)
    for a in range(dim):
        others = np.prod(np.delete(one_plus, a, axis=1), axis=1)
        grads[:, a] = signs[:, a] * others / 2.0**dim
    return values, grads


def _locate_cell(grid: Grid, point) -> tuple[tuple[int, ...], np.ndarray]:
    point = np.asarray(point, dtype=float)
    if point.shape != (grid.dim,):
        raise GridError(f"point {point} does not match grid dim {grid.dim}")
    cell = []
    ref = np.empty(grid.dim)
    for a in range(grid.dim):
        s = (point[a] - grid.origin[a]) / grid.spacing[a]
        if s < -1e-12 or s > grid.n[a] - 1 + 1e-12:
            raise GridError(f"point coordinate {point[a]} outside grid along axis {a}")
        ia = min(int(np.floor(s)), grid.n[a] - 2)
        ia = max(ia, 0)
        cell.append(ia)
        ref[a] = 2.0 * (s - ia) - 1.0
    return tuple(cell), ref


def _element_node_indices(grid: Grid, cell: tuple[int, ...]) -> np.ndarray:
    strides = [1, grid.n[0], grid.n[0] * grid.n[1]][: grid.dim]
    base = sum(c * s for c, s in zip(cell, strides))
    offs = []
    for combo in itertools.product(*[(0, 1)] * grid.dim):
        c = combo[::-1]  # x-fastest corner ordering, matching _corner_signs
        offs.append(sum(c[a] * strides[a] for a in range(grid.dim)))
    return base + np.array(offs)


def interpolate(state: FieldState, grid: Grid, point) -> tuple[float, float, np.ndarray]:
    """Multilinear interpolation of both fields and the phi gradient at ``point``.

    Exact at nodes and for fields linear in each coordinate. Raises on
    points outside the grid bounding box.
    """
    state.check(grid)
    cell, ref = _locate_cell(grid, point)
    idx = _element_node_indices(grid, cell)
    values, grads_ref = eval_basis(ref)
    # chain rule: d/dx = (2/h) d/dxi
    scale = 2.0 / np.asarray(grid.spacing)
    a = float(values @ state.scalar_a[idx])
    p = float(values @ state.phi[idx])
    grad_phi = (grads_ref * scale).T @ state.phi[idx]
    return a, p, grad_phi


def integrate_nodal(values: np.ndarray, grid: Grid) -> float:
    """Integral of the Q1 interpolant of a nodal array over the domain.

    For a multilinear interpolant this equals the lumped-mass weighted sum
    of the nodal values, which is what element-wise Gauss quadrature yields.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.node_count,):
        raise GridError(f"field length {values.shape} does not match {grid.node_count} nodes")
    return float(np.dot(grid.node_volumes(), values))
