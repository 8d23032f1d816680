"""Domain grids for the Dirichlet problems.

Two kinds are shipped (both regular: continuous boundary data always admit
a harmonic extension):

* :class:`BoxDomain` - an axis-aligned box in R^m, m in {1, 2}, with the
  topological boundary of the grid as Dirichlet set;
* :class:`CylinderDomain` - an annulus {r0 <= |zeta| <= r1} represented in
  log-polar coordinates w = t + i*s, t = log|zeta|.  In w the annulus is a
  flat cylinder (periodic in s), which is exactly the geometry in which the
  |zeta|^{-2} base metric becomes Euclidean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Unsupported


@dataclass(frozen=True)
class BoxDomain:
    lows: tuple[float, ...]
    highs: tuple[float, ...]
    shape: tuple[int, ...]

    def __post_init__(self):
        if not (1 <= len(self.shape) <= 2):
            raise Unsupported(f"box dimension {len(self.shape)} not supported")
        if any(n < 3 for n in self.shape):
            raise ValueError("need at least 3 nodes per axis")
        if any(hi <= lo for lo, hi in zip(self.lows, self.highs)):
            raise ValueError("degenerate axis range")

    @property
    def m(self) -> int:
        return len(self.shape)

    @property
    def periodic(self) -> tuple[bool, ...]:
        return (False,) * self.m

    def axis_nodes(self, j: int) -> np.ndarray:
        return np.linspace(self.lows[j], self.highs[j], self.shape[j])

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (n - 1)
                     for lo, hi, n in zip(self.lows, self.highs, self.shape))

    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        for j in range(self.m):
            sl = [slice(None)] * self.m
            for edge in (0, -1):
                sl[j] = edge
                mask[tuple(sl)] = False
        return mask

    def boundary_indices(self) -> np.ndarray:
        return np.argwhere(~self.interior_mask())


@dataclass(frozen=True)
class CylinderDomain:
    """Annulus in log-polar grid coordinates (t, s), periodic in s."""

    r0: float
    r1: float
    n_t: int
    n_s: int

    def __post_init__(self):
        if self.r0 <= 0 or self.r1 <= self.r0:
            raise ValueError("need 0 < r0 < r1")
        if self.n_t < 3 or self.n_s < 4:
            raise ValueError("cylinder grid too small")
        if self.n_s % 2:
            raise ValueError("n_s must be even (red-black coloring)")

    @property
    def m(self) -> int:
        return 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_t, self.n_s)

    @property
    def periodic(self) -> tuple[bool, bool]:
        return (False, True)

    @property
    def t_nodes(self) -> np.ndarray:
        return np.linspace(np.log(self.r0), np.log(self.r1), self.n_t)

    @property
    def s_nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_s) / self.n_s

    @property
    def spacings(self) -> tuple[float, float]:
        return ((np.log(self.r1) - np.log(self.r0)) / (self.n_t - 1),
                2.0 * np.pi / self.n_s)

    def axis_nodes(self, j: int) -> np.ndarray:
        return self.t_nodes if j == 0 else self.s_nodes

    def w_nodes(self) -> np.ndarray:
        """Complex coordinate w = t + i s on the cylinder."""
        return self.t_nodes[:, None] + 1j * self.s_nodes[None, :]

    def zeta_nodes(self) -> np.ndarray:
        return np.exp(self.w_nodes())

    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        mask[0, :] = False
        mask[-1, :] = False
        return mask

    def boundary_indices(self) -> np.ndarray:
        return np.argwhere(~self.interior_mask())


Domain = BoxDomain | CylinderDomain


def shift_along(values: np.ndarray, axis: int, offset: int,
                periodic: bool) -> np.ndarray:
    """Neighbor values along an axis; non-periodic edges repeat themselves
    (callers mask edges out through the interior mask)."""
    if periodic:
        return np.roll(values, -offset, axis=axis)
    out = np.empty_like(values)
    n = values.shape[axis]
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if offset == 1:
        dst[axis] = slice(0, n - 1)
        src[axis] = slice(1, n)
        out[tuple(dst)] = values[tuple(src)]
        edge = [slice(None)] * values.ndim
        edge[axis] = slice(n - 1, n)
        out[tuple(edge)] = values[tuple(edge)]
    elif offset == -1:
        dst[axis] = slice(1, n)
        src[axis] = slice(0, n - 1)
        out[tuple(dst)] = values[tuple(src)]
        edge = [slice(None)] * values.ndim
        edge[axis] = slice(0, 1)
        out[tuple(edge)] = values[tuple(edge)]
    else:
        raise ValueError("offset must be +-1")
    return out


def neighbor_average_defect(values: np.ndarray, domain: Domain) -> np.ndarray:
    """Weighted neighbor average minus node value over interior nodes.

    Weights are 1/h_j^2 so the sign agrees with the anisotropic Laplacian;
    for equal spacings this is the plain 4-point (2-point in 1-D) average.
    """
    weights = [1.0 / h**2 for h in domain.spacings]
    total = 2.0 * sum(weights)
    acc = np.zeros_like(values, dtype=float)
    for j, (wj, per) in enumerate(zip(weights, domain.periodic)):
        acc += wj * (shift_along(values, j, +1, per)
                     + shift_along(values, j, -1, per))
    defect = acc / total - values
    return defect[domain.interior_mask()]


def laplace_extend(domain: Domain, boundary_values: np.ndarray) -> np.ndarray:
    """Discrete harmonic extension of Dirichlet data into the grid.

    ``boundary_values`` is a full grid array whose interior entries are
    ignored.  The extension solves the 5-point Laplace system directly.
    Supports stacked data via trailing axes.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    shape = domain.shape
    n = int(np.prod(shape))
    idx = np.arange(n).reshape(shape)
    interior = domain.interior_mask()
    weights = [1.0 / h**2 for h in domain.spacings]

    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    rhs_coeff = []  # (row, col_of_boundary, weight)
    for j, (wj, per) in enumerate(zip(weights, domain.periodic)):
        for off in (+1, -1):
            nb = shift_along(idx, j, off, per)
            rows.append(idx[interior].ravel())
            cols.append(nb[interior].ravel())
            vals.append(np.full(interior.sum(), wj))
    diag_val = 2.0 * sum(weights)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    interior_flat = interior.ravel()
    # split neighbor links into interior-interior (matrix) and
    # interior-boundary (right-hand side)
    to_interior = interior_flat[cols]
    trailing = boundary_values.shape[len(shape):]
    bvals = boundary_values.reshape(n, -1)
    renum = -np.ones(n, dtype=int)
    renum[interior_flat] = np.arange(interior_flat.sum())

    a = sp.coo_matrix(
        (vals[to_interior],
         (renum[rows[to_interior]], renum[cols[to_interior]])),
        shape=(interior_flat.sum(), interior_flat.sum())).tocsr()
    a = sp.eye(interior_flat.sum(), format="csr") * diag_val - a

    rhs = np.zeros((interior_flat.sum(), bvals.shape[1]))
    bd = ~to_interior
    np.add.at(rhs, renum[rows[bd]],
              vals[bd, None] * bvals[cols[bd]].real)

    sol = spla.spsolve(a, rhs)
    if sol.ndim == 1:
        sol = sol[:, None]
    out = bvals.real.copy()
    out[interior_flat] = sol
    return out.reshape(shape + trailing)
