"""Truncated uniform velocity lattice with midpoint quadrature and finite differences.

All integrals over velocity space are realized as plain midpoint sums on a
cube [-L, L]^3 with (N-1) intervals per axis, so that both endpoints are
nodes.  Gradients are second-order central differences in the interior and
second-order one-sided stencils on the faces; the one-sided stencil is exact
on quadratics, which several conservation identities rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridConfigError, NonFiniteFieldError

MIN_POINTS = 8


@dataclass(frozen=True, eq=False)
class VelocityGrid:
    """Uniform N^3 lattice on [-L, L]^3 with tensor-product quadrature weights.

    Interior nodes carry the full cell weight h^3; nodes on a face, edge or
    corner carry the per-axis half weights, so the weights sum to (2L)^3
    exactly.  On the default domains, the Gaussian tails make the boundary
    nodes numerically irrelevant either way.
    """

    half_extent: float
    points_per_axis: int
    spacing: float
    axis: np.ndarray          # (N,) node coordinates, -L + k*h
    quad_weight: float        # h^3, the interior-node weight
    weights: np.ndarray       # (N,N,N) per-node quadrature weights
    v1: np.ndarray            # (N,N,N) node coordinates, first velocity axis
    v2: np.ndarray
    v3: np.ndarray
    vsq: np.ndarray           # |v|^2 at the nodes
    diff: np.ndarray          # (N,N) one-axis differentiation matrix
    diff2: np.ndarray         # (N,N) one-axis second-derivative matrix

    @property
    def shape(self) -> tuple[int, int, int]:
        n = self.points_per_axis
        return (n, n, n)

    @property
    def n_nodes(self) -> int:
        return self.points_per_axis ** 3

    def bracket_sq(self) -> np.ndarray:
        """<v>^2 = 1 + |v|^2 at the nodes."""
        return 1.0 + self.vsq


def _diff_matrix(n: int, h: float) -> np.ndarray:
    d = np.zeros((n, n))
    for i in range(1, n - 1):
        d[i, i - 1] = -0.5 / h
        d[i, i + 1] = 0.5 / h
    d[0, 0], d[0, 1], d[0, 2] = -1.5 / h, 2.0 / h, -0.5 / h
    d[-1, -3], d[-1, -2], d[-1, -1] = 0.5 / h, -2.0 / h, 1.5 / h
    return d


def _diff2_matrix(n: int, h: float) -> np.ndarray:
    h2 = h * h
    d = np.zeros((n, n))
    for i in range(1, n - 1):
        d[i, i - 1] = 1.0 / h2
        d[i, i] = -2.0 / h2
        d[i, i + 1] = 1.0 / h2
    d[0, :4] = np.array([2.0, -5.0, 4.0, -1.0]) / h2
    d[-1, -4:] = np.array([-1.0, 4.0, -5.0, 2.0]) / h2
    return d


def build_grid(half_extent: float, points_per_axis: int) -> VelocityGrid:
    """Build the velocity lattice; rejects N < 8 or non-positive extent."""
    if not np.isfinite(half_extent) or half_extent <= 0:
        raise GridConfigError(
            f"half extent must be positive and finite, got {half_extent}")
    n = int(points_per_axis)
    if n != points_per_axis or n < MIN_POINTS:
        raise GridConfigError(
            f"points per axis must be an integer >= {MIN_POINTS}, got {points_per_axis}")
    L = float(half_extent)
    h = 2.0 * L / (n - 1)
    axis = -L + h * np.arange(n)
    w1 = np.full(n, h)
    w1[0] = w1[-1] = 0.5 * h
    weights = w1[:, None, None] * w1[None, :, None] * w1[None, None, :]
    v1, v2, v3 = np.meshgrid(axis, axis, axis, indexing="ij")
    vsq = v1 * v1 + v2 * v2 + v3 * v3
    return VelocityGrid(
        half_extent=L,
        points_per_axis=n,
        spacing=h,
        axis=axis,
        quad_weight=h ** 3,
        weights=weights,
        v1=v1,
        v2=v2,
        v3=v3,
        vsq=vsq,
        diff=_diff_matrix(n, h),
        diff2=_diff2_matrix(n, h),
    )


def _check_finite(grid: VelocityGrid, values: np.ndarray, what: str) -> None:
    if values.shape != grid.shape:
        raise GridConfigError(
            f"{what} has shape {values.shape}, expected {grid.shape}")
    if not np.all(np.isfinite(values)):
        idx = tuple(int(i) for i in np.argwhere(~np.isfinite(values))[0])
        node = (grid.axis[idx[0]], grid.axis[idx[1]], grid.axis[idx[2]])
        raise NonFiniteFieldError(
            f"{what} is not finite at node index {idx}, v = {node}")


def integrate(grid: VelocityGrid, values: np.ndarray) -> float:
    """Quadrature sum over the lattice (numpy pairwise summation, deterministic)."""
    _check_finite(grid, values, "integrand")
    return float((grid.weights * values).sum())


def _apply_diff(d: np.ndarray, values: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(d, values, axes=([1], [axis])), 0, axis)


def gradient(grid: VelocityGrid, values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Finite-difference gradient, one component per velocity axis.

    Exact on affine and quadratic fields (interior and faces alike).
    """
    _check_finite(grid, values, "field")
    d = grid.diff
    return (
        _apply_diff(d, values, 0),
        _apply_diff(d, values, 1),
        _apply_diff(d, values, 2),
    )


def gradient_adjoint(grid: VelocityGrid, u1: np.ndarray, u2: np.ndarray,
                     u3: np.ndarray) -> np.ndarray:
    """Adjoint of `gradient` w.r.t. the plain node inner product.

    For a vector field U it returns sum_i D_i^T U_i, so that
    sum_k (grad phi)_k . U_k == sum_k phi_k (adjoint U)_k for every phi.
    """
    dt = grid.diff.T
    return (
        _apply_diff(dt, u1, 0)
        + _apply_diff(dt, u2, 1)
        + _apply_diff(dt, u3, 2)
    )
