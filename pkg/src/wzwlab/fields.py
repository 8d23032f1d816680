"""Potential fields u(z, x) on (domain grid) x (X grid).

A field stores one chart-aware fiber callable per domain node plus a cached
sample array, so domain-direction derivatives are grid differences while
X-direction derivatives evaluate the fiber off-grid with small stencils.

Complex-domain calculus happens on the cylinder in w = t + i*s (the
log-polar chart of the annulus); a box field of a real variable embeds as
an s-independent cylinder field via :meth:`PotentialField.complexified`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import BoxDomain, CylinderDomain, Domain
from .errors import DiscOutOfChart, GridMismatch, Unsupported
from .geometry import (CHART_MARGIN, XFunction, XGrid, hessian_on_grid,
                       psi_values)

# margin kept between disc images and the chart boundary
DISC_SAFETY = 1.2


@dataclass(frozen=True)
class HolomorphicDisc:
    """Affine holomorphic probe f(w) = base + direction * (w - center)
    into a fixed chart of X."""

    center: complex          # w0 on the domain grid
    chart: int               # chart carrying the image
    base: complex            # x0 = f(center)
    direction: complex       # c, chart units per unit of w
    radius: float            # validity radius in w

    def __post_init__(self):
        reach = abs(self.base) + abs(self.direction) * self.radius
        if reach > DISC_SAFETY * CHART_MARGIN:
            raise DiscOutOfChart(
                f"disc reaches |x| = {reach:.3f} beyond the chart margin")

    def at(self, w: complex | np.ndarray) -> np.ndarray:
        return self.base + self.direction * (np.asarray(w) - self.center)


class PotentialField:
    """Sampled potential with per-node fiber evaluators.

    ``fiber_of(idx)`` returns the chart-aware callable of the fiber over
    domain node ``idx`` (a tuple).  ``values`` caches the samples on the
    X grid, shape (*domain.shape, n_x).
    """

    def __init__(self, domain: Domain, xgrid: XGrid, fiber_fn,
                 values: np.ndarray | None = None, *,
                 s_independent: bool = False, label: str = "",
                 singular_guard=None):
        self.domain = domain
        self.xgrid = xgrid
        self._fiber_fn = fiber_fn
        self._values = values
        self.s_independent = s_independent
        self.label = label
        # optional (idx, chart_ids, coords) -> bool mask marking points too
        # close to a log pole of the fiber; samplers skip guarded stencils
        # (the usc -infinity corner cases are out of numerical scope)
        self.singular_guard = singular_guard

    # -- evaluation --------------------------------------------------------

    def fiber_of(self, idx: tuple) -> XFunction:
        return self._fiber_fn(idx)

    def eval(self, idx: tuple, chart_ids, coords) -> np.ndarray:
        return np.asarray(self._fiber_fn(idx)(np.asarray(chart_ids),
                                              np.asarray(coords)), dtype=float)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            shape = tuple(self.domain.shape)
            out = np.empty(shape + (self.xgrid.n_nodes,))
            if self.s_independent and len(shape) == 2:
                for it in range(shape[0]):
                    row = self.eval((it, 0), self.xgrid.chart_ids,
                                    self.xgrid.coords)
                    out[it, :, :] = row[None, :]
            else:
                for idx in np.ndindex(*shape):
                    out[idx] = self.eval(idx, self.xgrid.chart_ids,
                                         self.xgrid.coords)
            self._values = out
        return self._values

    # -- structure ---------------------------------------------------------

    def check_same_grids(self, other: "PotentialField") -> None:
        if self.domain != other.domain:
            raise GridMismatch("domain grids differ")
        if (self.xgrid is not other.xgrid
                and self.xgrid.resolution != other.xgrid.resolution):
            raise GridMismatch("X grids differ")

    def node_w(self, idx: tuple) -> complex:
        """Complex coordinate w of a domain node (s = 0 for box fields)."""
        if isinstance(self.domain, CylinderDomain):
            return complex(self.domain.t_nodes[idx[0]],
                           self.domain.s_nodes[idx[1]])
        return complex(self.domain.axis_nodes(0)[idx[0]], 0.0)

    def complexified(self, n_s: int = 16) -> "PotentialField":
        """Embed a 1-D box field as an s-independent cylinder field."""
        if not isinstance(self.domain, BoxDomain) or self.domain.m != 1:
            raise GridMismatch("only 1-D box fields complexify")
        t0, t1 = self.domain.lows[0], self.domain.highs[0]
        cyl = CylinderDomain(float(np.exp(t0)), float(np.exp(t1)),
                             self.domain.shape[0], n_s)
        base = self._fiber_fn
        vals = None
        if self._values is not None:
            vals = np.broadcast_to(
                self._values[:, None, :],
                (self.domain.shape[0], n_s, self.xgrid.n_nodes)).copy()
        return PotentialField(cyl, self.xgrid,
                              lambda idx: base((idx[0],)),
                              vals, s_independent=True, label=self.label)

    def rotated(self, shift: int) -> "PotentialField":
        """Pullback under the grid rotation s -> s + shift * h_s."""
        if not isinstance(self.domain, CylinderDomain):
            raise GridMismatch("rotation acts on cylinder fields")
        n_s = self.domain.n_s
        base = self._fiber_fn
        vals = None
        if self._values is not None:
            vals = np.roll(self._values, -shift, axis=1)
        return PotentialField(self.domain, self.xgrid,
                              lambda idx: base((idx[0], (idx[1] + shift) % n_s)),
                              vals, s_independent=self.s_independent,
                              label=self.label)

    def fiberwise_psh_margin(self, step: float | None = None) -> float:
        """min over domain nodes of the grid Hessian of u(z, .) + psi."""
        shape = tuple(self.domain.shape)
        if self.s_independent and len(shape) == 2:
            indices = [(it, 0) for it in range(shape[0])]
        else:
            indices = list(np.ndindex(*shape))
        worst = np.inf
        for idx in indices:
            h = hessian_on_grid(self.fiber_of(idx), self.xgrid, step)
            worst = min(worst, float(np.min(h)))
        return worst


# -- constructors -----------------------------------------------------------


def field_from_xfunction(domain: Domain, xgrid: XGrid, fn: XFunction,
                         label: str = "") -> PotentialField:
    """z-independent field u(z, x) = fn(x)."""
    return PotentialField(domain, xgrid, lambda idx: fn,
                          s_independent=isinstance(domain, CylinderDomain),
                          label=label)


def field_from_profile_terms(domain: Domain, xgrid: XGrid,
                             terms: list[tuple[np.ndarray, XFunction]],
                             label: str = "") -> PotentialField:
    """Separable field u(z, x) = sum_a profile_a(z) * phi_a(x).

    Each profile is an array over the domain grid.
    """
    shape = tuple(domain.shape)
    profiles = [np.broadcast_to(np.asarray(p, dtype=float), shape)
                for p, _ in terms]
    fns = [fn for _, fn in terms]

    def fiber(idx):
        coeffs = [float(p[idx]) for p in profiles]

        def f(chart_ids, coords):
            out = np.zeros(np.shape(coords), dtype=float)
            for c, g in zip(coeffs, fns):
                if c != 0.0:
                    out = out + c * np.asarray(g(chart_ids, coords), dtype=float)
            return out

        return f

    s_indep = isinstance(domain, CylinderDomain) and all(
        np.allclose(p, p[:, :1]) for p in profiles)
    return PotentialField(domain, xgrid, fiber, s_independent=s_indep,
                          label=label)


def field_from_grams(domain: Domain, xgrid: XGrid, grams: np.ndarray, k: int,
                     label: str = "") -> PotentialField:
    """FS_k of a matrix field: fibers FS_k(G(z)).

    ``grams`` has shape (*domain.shape, N, N); for a cylinder an
    (n_t, N, N) stack is broadcast rotation-invariantly.
    """
    from .quantization import FSPotential

    shape = tuple(domain.shape)
    s_indep = False
    if isinstance(domain, CylinderDomain) and grams.ndim == 3:
        cache = [FSPotential(g, k) for g in grams]
        fiber = lambda idx: cache[idx[0]]
        s_indep = True
    else:
        flat = grams.reshape((-1,) + grams.shape[-2:])
        cache = [FSPotential(g, k) for g in flat]
        strides = np.arange(int(np.prod(shape))).reshape(shape)
        fiber = lambda idx: cache[int(strides[idx])]
    return PotentialField(domain, xgrid, fiber, s_independent=s_indep,
                          label=label)


def _chart0_coord(chart_ids, coords):
    """Express points in the chart-0 coordinate (1/x' for chart-1 points)."""
    coords = np.asarray(coords, dtype=complex)
    chart_ids = np.asarray(chart_ids)
    with np.errstate(divide="ignore", invalid="ignore"):
        flipped = np.where(coords == 0, np.inf, 1.0 / coords)
    return np.where(chart_ids == 0, coords, flipped)


def quadratic_field(domain: Domain, xgrid: XGrid, coeffs: dict,
                    variable: str = "zeta",
                    label: str = "quadratic") -> PotentialField:
    """Real quadratic test field in (v, x), x the chart-0 coordinate:

        u = a1|v|^2 + Re(a2 v^2) + 2Re(b v conj(x)) + 2Re(b2 v x)
            + e|x|^2 + Re(e2 x^2) + 2Re(c1 v) + 2Re(c2 x) + c0,

    where v = e^w ("zeta", default) or v = w itself.  The zeta convention
    is 2*pi-periodic in s and therefore well defined on the whole cylinder;
    the raw-w convention is only consistent away from the angular seam and
    is meant for local stencil checks.  Disc-bound audits sample well inside
    chart 0; the chart-1 extension through 1/x' keeps the field global.
    """
    if variable not in ("zeta", "w"):
        raise ValueError(f"unknown variable convention '{variable}'")
    c = {key: complex(coeffs.get(key, 0.0)) for key in
         ("a1", "a2", "b", "b2", "e", "e2", "c1", "c2", "c0")}

    def make_fiber(w):
        v = np.exp(w) if variable == "zeta" else w

        def f(chart_ids, coords):
            x = _chart0_coord(chart_ids, coords)
            val = (c["a1"].real * abs(v) ** 2 + (c["a2"] * v * v).real
                   + 2.0 * (c["b"] * v * np.conj(x)).real
                   + 2.0 * (c["b2"] * v * x).real
                   + c["e"].real * (x.real**2 + x.imag**2)
                   + (c["e2"] * x * x).real
                   + 2.0 * (c["c1"] * v).real
                   + 2.0 * (c["c2"] * x).real + c["c0"].real)
            return np.asarray(val, dtype=float)
        return f

    def fiber(idx):
        return make_fiber(_node_w(domain, idx))

    return PotentialField(domain, xgrid, fiber, label=label)


def _node_w(domain: Domain, idx: tuple) -> complex:
    if isinstance(domain, CylinderDomain):
        return complex(domain.t_nodes[idx[0]], domain.s_nodes[idx[1]])
    return complex(domain.axis_nodes(0)[idx[0]], 0.0)


def pullback_probe_field(domain: Domain, xgrid: XGrid, base: complex,
                         direction: complex = 0.0,
                         floor: float = -1e30) -> PotentialField:
    """The subsolution probe (z, x) -> 2 Re psi_C(x, conj(f(z))) - psi(x)
    along the holomorphic map f(w) = base + direction * e^w (single-valued
    on the cylinder; e^w = zeta is the annulus coordinate).

    Globally defined on X; the isolated log-singularity along 1 + x f = 0
    is clamped to ``floor`` (it never wins a supremum).  On a box domain
    only ``direction = 0`` yields a genuine graph subsolution: freezing the
    angular variable breaks the holomorphy of a moving f.
    """
    if direction != 0.0 and not isinstance(domain, CylinderDomain):
        raise Unsupported("moving pullback probes require a cylinder domain")

    def _denominator(w, chart_ids, coords):
        fz = complex(base + direction * np.exp(w))
        coords = np.asarray(coords, dtype=complex)
        return np.where(np.asarray(chart_ids) == 0,
                        1.0 + coords * fz, coords + fz)

    def make_fiber(w):
        def f(chart_ids, coords):
            t = _denominator(w, chart_ids, coords)
            mod2 = t.real**2 + t.imag**2
            with np.errstate(divide="ignore"):
                out = np.log(mod2) - psi_values(coords)
            return np.maximum(out, floor)

        return f

    def guard(idx, chart_ids, coords, dir_scale=0.0):
        # a stencil moving at chart speed ~(|c_disc| + |f'(w)|) cannot
        # resolve the log pole closer than a fixed fraction of that speed
        # (the truncation error of the 4-point rule there is h-independent
        # in Laplacian units)
        w = _node_w(domain, idx)
        t = _denominator(w, chart_ids, coords)
        speed = np.asarray(dir_scale) + abs(direction * np.exp(w))
        return np.abs(t) < np.maximum(0.05, 0.7 * speed)

    return PotentialField(domain, xgrid, lambda idx: make_fiber(_node_w(domain, idx)),
                          label="pullback-probe", singular_guard=guard)
