"""Kaehler backend for X = P^1: charts, Fubini-Study potential, diastasis,
quadrature and finite-difference stencils.

The sphere is covered by two stereographic charts glued by ``x -> 1/x``.
In either chart the local potential is

    psi(x) = log(1 + |x|^2),

normalised so that the total mass of omega = i d dbar psi is 2*pi.  Every
constant downstream (Gram diagonals, the balanced value (k+1)/(2*pi))
depends on this normalisation.

Functions on X are represented as vectorized callables
``f(chart_ids, coords) -> values`` where ``chart_ids`` is an integer array
selecting the chart each coordinate lives in.  Closed-form fields evaluate
anywhere inside the chart margin, which lets the stencils below work at
off-grid points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from .errors import DiastasisSingular, ResolutionError, StencilError

# Chart coordinates are accepted up to this modulus; beyond it a point must
# be re-expressed in the other chart.
CHART_MARGIN = 1.25

# Total mass of the Fubini-Study form in this normalisation.
TOTAL_MASS = 2.0 * np.pi

XFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ChartPoint:
    """A point of P^1: chart id in {0, 1} plus the chart coordinate."""

    chart: int
    coord: complex

    def __post_init__(self):
        if self.chart not in (0, 1):
            raise ValueError(f"chart must be 0 or 1, got {self.chart}")
        if abs(self.coord) > CHART_MARGIN:
            raise ValueError(
                f"|coord| = {abs(self.coord):.4f} exceeds the chart margin "
                f"{CHART_MARGIN}; re-express the point via other_chart()"
            )

    def other_chart(self) -> "ChartPoint":
        """Same point in the opposite chart (coord -> 1/coord)."""
        if self.coord == 0:
            raise ValueError("the chart origin has no coordinate in the other chart")
        return ChartPoint(1 - self.chart, 1.0 / self.coord)

    def owning(self) -> "ChartPoint":
        """Representation in the chart that owns the point (|coord| <= 1)."""
        if abs(self.coord) <= 1.0:
            return self
        return self.other_chart()


def local_potential(p: ChartPoint) -> float:
    """psi(x) = log(1 + |x|^2) in the chart the point is expressed in."""
    return float(np.log1p(abs(p.coord) ** 2))


def psi_values(coords: np.ndarray) -> np.ndarray:
    """Vectorized local potential; chart-agnostic formula."""
    c = np.asarray(coords)
    return np.log1p(c.real**2 + c.imag**2)


def fs_density(coords: np.ndarray) -> np.ndarray:
    """Density of omega against Lebesgue measure of the chart: 2/(1+|x|^2)^2."""
    c = np.asarray(coords)
    return 2.0 / (1.0 + c.real**2 + c.imag**2) ** 2


def polarization(x: complex, y: complex) -> complex:
    """Polarized potential psi_C(x, y) = log(1 + x * conj(y)).

    Restricts to psi on the diagonal.  Both arguments must live in a common
    chart; the pair is antipodal (and the polarization singular) when
    1 + x*conj(y) vanishes.
    """
    t = 1.0 + x * np.conj(y)
    if abs(t) <= 1e-14 * (1.0 + abs(x) * abs(y)):
        raise DiastasisSingular(f"antipodal pair x={x}, y={y}")
    return complex(np.log(t))


def _diastasis_coords(a, b):
    """Diastasis from common-chart coordinates; +inf on antipodal pairs.

    Accepts scalars or broadcastable arrays.  Overflow-safe through
    hypot-based logarithms (coordinates transitioned from near a pole can
    be astronomically large).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    t = 1.0 + a * np.conj(b)
    mod_t = np.hypot(t.real, t.imag)
    scale = 1.0 + np.abs(a) * np.abs(b)
    out = 2.0 * (np.log(np.hypot(1.0, np.abs(a)))
                 + np.log(np.hypot(1.0, np.abs(b))))
    with np.errstate(divide="ignore"):
        out = out - 2.0 * np.log(mod_t)
    return np.where(mod_t <= 1e-14 * scale, np.inf, out)


def diastasis(x: ChartPoint, y: ChartPoint) -> float:
    """Calabi diastasis D(x, y) = psi(x) + psi(y) - 2 Re psi_C(x, y).

    Symmetric, nonnegative, zero exactly on the diagonal.  The value does
    not depend on the common chart used to evaluate it, so the points are
    moved to whichever chart keeps the coordinates representable.  The
    antipodal singularity returns +inf rather than raising.
    """
    if x.chart == y.chart:
        return float(_diastasis_coords(x.coord, y.coord))
    # Mixed charts: transition whichever point has the larger modulus,
    # which keeps 1/coord bounded.
    if abs(y.coord) >= abs(x.coord):
        if y.coord == 0:
            # y is the pole of x's chart.
            if x.coord == 0:
                return np.inf  # the two poles are antipodal
            return float(_diastasis_coords(1.0 / x.coord, y.coord))
        return float(_diastasis_coords(x.coord, 1.0 / y.coord))
    if x.coord == 0:
        return np.inf
    return float(_diastasis_coords(1.0 / x.coord, y.coord))


@dataclass(frozen=True)
class XGrid:
    """Quadrature grid on X: per chart a Gauss-Legendre (radius) x uniform
    (angle) tensor layout over the unit disc.

    Every node is owned by exactly one chart (the Gauss nodes satisfy
    0 < r < 1 strictly), so the two discs partition X up to the measure-zero
    equator.  ``weights`` integrate against omega and sum to 2*pi.
    """

    resolution: int
    radii: np.ndarray      # (n_r,) Gauss nodes in (0, 1)
    thetas: np.ndarray     # (n_theta,) uniform angles
    chart_ids: np.ndarray  # (n_nodes,)
    coords: np.ndarray     # (n_nodes,) complex chart coordinates
    weights: np.ndarray    # (n_nodes,) omega-mass per node

    @property
    def n_nodes(self) -> int:
        return self.coords.size

    @property
    def fd_step(self) -> float:
        """Stencil step tied to the local grid spacing."""
        return 1.0 / self.resolution

    def sample(self, fn: XFunction) -> np.ndarray:
        return np.asarray(fn(self.chart_ids, self.coords), dtype=float)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))

    def node(self, index: int) -> ChartPoint:
        return ChartPoint(int(self.chart_ids[index]), complex(self.coords[index]))

    def subsample(self, max_points: int, max_radius: float = 0.95,
                  seed: int = 0) -> np.ndarray:
        """Deterministic spread of node indices with |coord| <= max_radius."""
        eligible = np.flatnonzero(np.abs(self.coords) <= max_radius)
        if eligible.size <= max_points:
            return eligible
        stride = eligible.size / max_points
        picks = (np.arange(max_points) * stride + (seed % 7)).astype(int)
        return eligible[np.clip(picks, 0, eligible.size - 1)]


def quadrature_grid(resolution: int) -> XGrid:
    """Build the two-chart quadrature grid.

    ``resolution`` is the radial Gauss-Legendre order per chart; the angular
    rule uses 2*resolution equispaced nodes (exact for trigonometric
    polynomials of degree < 2*resolution).  At resolution >= 32 the total
    mass matches 2*pi to 1e-10.
    """
    if resolution < 8:
        raise ResolutionError(f"resolution {resolution} < 8")
    nodes, gl_weights = roots_legendre(resolution)
    radii = 0.5 * (nodes + 1.0)          # map [-1, 1] -> (0, 1)
    wr = 0.5 * gl_weights
    n_theta = 2 * resolution
    thetas = 2.0 * np.pi * np.arange(n_theta) / n_theta

    r_grid, th_grid = np.meshgrid(radii, thetas, indexing="ij")
    coords_chart = (r_grid * np.exp(1j * th_grid)).ravel()
    # omega-mass of a node: GL weight * dtheta * r * (omega density)
    w_radial = wr * (2.0 * np.pi / n_theta) * radii * fs_density(radii)
    w_chart = np.broadcast_to(w_radial[:, None], r_grid.shape).ravel()

    coords = np.concatenate([coords_chart, coords_chart])
    weights = np.concatenate([w_chart, w_chart])
    chart_ids = np.concatenate([
        np.zeros(coords_chart.size, dtype=np.int8),
        np.ones(coords_chart.size, dtype=np.int8),
    ])
    return XGrid(resolution=resolution, radii=radii, thetas=thetas,
                 chart_ids=chart_ids, coords=coords, weights=weights)


def _check_stencil(coord: complex, step: float) -> None:
    if abs(coord) + step > CHART_MARGIN:
        raise StencilError(
            f"stencil around |x| = {abs(coord):.3f} with step {step:.3g} "
            f"leaves the chart margin {CHART_MARGIN}"
        )


def hessian_on_X(fn: XFunction, p: ChartPoint, step: float) -> float:
    """Central finite-difference estimate of (u + psi)_{x xbar} at ``p``.

    Uses the 5-point complex-Hessian stencil in the chart of ``p``; if the
    stencil would leave that chart's margin the computation falls back to
    the other chart and transforms back with the Jacobian factor |x|^4.
    """
    try:
        _check_stencil(p.coord, step)
        chart, x0 = p.chart, p.coord
        jac = 1.0
    except StencilError:
        q = p.other_chart()
        _check_stencil(q.coord, step)  # raises StencilError if both fail
        chart, x0 = q.chart, q.coord
        # d x_other / d x = -1/x^2, so Hessians transform by |x|^-4 of the
        # original coordinate = |x_other|^4.
        jac = abs(q.coord) ** 4
    pts = np.array([x0 + step, x0 - step, x0 + 1j * step, x0 - 1j * step, x0])
    charts = np.full(5, chart, dtype=np.int8)
    vals = np.asarray(fn(charts, pts), dtype=float) + psi_values(pts)
    lap = (vals[0] + vals[1] + vals[2] + vals[3] - 4.0 * vals[4]) / step**2
    return float(jac * lap / 4.0)


def hessian_on_grid(fn: XFunction, grid: XGrid, step: float | None = None,
                    indices: np.ndarray | None = None) -> np.ndarray:
    """Vectorized (u + psi)_{x xbar} over grid nodes.

    All owned nodes satisfy |x| < 1, so the stencil never leaves the chart.
    """
    if step is None:
        step = grid.fd_step
    if indices is None:
        charts, coords = grid.chart_ids, grid.coords
    else:
        charts, coords = grid.chart_ids[indices], grid.coords[indices]
    acc = -4.0 * (np.asarray(fn(charts, coords), dtype=float) + psi_values(coords))
    for dx in (step, -step, 1j * step, -1j * step):
        pts = coords + dx
        acc = acc + np.asarray(fn(charts, pts), dtype=float) + psi_values(pts)
    return acc / (4.0 * step**2)


def omega_psh_margin(fn: XFunction, grid: XGrid,
                     step: float | None = None) -> tuple[float, int]:
    """Minimum of the grid Hessian of u + psi and its arg-min node index."""
    h = hessian_on_grid(fn, grid, step)
    i = int(np.argmin(h))
    return float(h[i]), i


def as_xfunction(value) -> XFunction:
    """Wrap constants / scalar callables into the vectorized convention."""
    if callable(value):
        return value
    const = float(value)

    def fn(chart_ids, coords):
        return np.full(np.shape(coords), const, dtype=float)

    return fn


def combine_xfunctions(terms: list[tuple[float, XFunction]]) -> XFunction:
    def fn(chart_ids, coords):
        out = np.zeros(np.shape(coords), dtype=float)
        for coef, part in terms:
            if coef != 0.0:
                out = out + coef * np.asarray(part(chart_ids, coords), dtype=float)
        return out

    return fn
