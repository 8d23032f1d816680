"""Pointwise calculus on D x X: Hessian blocks, the determinant residual,
the Schur-complement disc bound, graph-subharmonicity samplers, the sup
distance, and the conformality predicate.

Conventions.  The complex domain coordinate is w = t + i*s (log-polar chart
of the annulus; a real box axis t_j complexifies to w_j = t_j + i*s_j with
the field independent of s_j).  All "Laplacians" below are the complex ones,

    lap = sum_j d^2/dw_j dwbar_j = (1/4) * (real Laplacian per axis),

matching the normalisation in which the disc bound

    lap( psi(f(w)) + u(w, f(w)) )  >=  sum_j det(u+psi)_j / (u+psi)_{x xbar}

holds with equality along the optimal disc direction c = -u_{w xbar} / A.

The graph-subharmonicity tester is a necessary-condition sampler over a
finite disc family (angular net of affine discs through sampled base points
plus the data-driven optimal disc), not a universal quantifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import CylinderDomain, neighbor_average_defect
from .errors import GridMismatch, NotFiberwisePsh
from .fields import DISC_SAFETY, HolomorphicDisc, PotentialField
from .geometry import CHART_MARGIN, ChartPoint, psi_values


# ---------------------------------------------------------------------------
# stencil plumbing
# ---------------------------------------------------------------------------

def _complex_axes(field: PotentialField):
    """Per complex axis: (E-idx-shift, W, N, S, h_t, h_s) descriptors.

    A ``None`` shift means "same node" (virtual imaginary direction of a
    complexified box axis).
    """
    dom = field.domain
    if isinstance(dom, CylinderDomain):
        h_t, h_s = dom.spacings
        return [((+1, 0), (-1, 0), (0, +1), (0, -1), h_t, h_s)]
    axes = []
    for j in range(dom.m):
        h = dom.spacings[j]
        plus = tuple(+1 if i == j else 0 for i in range(dom.m))
        minus = tuple(-1 if i == j else 0 for i in range(dom.m))
        axes.append((plus, minus, None, None, h, h))
    return axes


def _shift_idx(field: PotentialField, idx: tuple, shift) -> tuple:
    if shift is None:
        return idx
    dom = field.domain
    out = tuple(i + d for i, d in zip(idx, shift))
    if isinstance(dom, CylinderDomain):
        out = (out[0], out[1] % dom.n_s)
    for j, i in enumerate(out):
        n = dom.shape[j]
        if not (0 <= i < n):
            raise IndexError(f"node {idx} has no neighbor at shift {shift}")
    return out


def _interior_idx(field: PotentialField):
    dom = field.domain
    if isinstance(dom, CylinderDomain):
        s_list = [0] if field.s_independent else range(dom.n_s)
        return [(it, is_) for it in range(1, dom.n_t - 1) for is_ in s_list]
    ranges = [range(1, n - 1) for n in dom.shape]
    import itertools
    return [tuple(i) for i in itertools.product(*ranges)]


def _x_stencil(coords: np.ndarray, h: float) -> np.ndarray:
    """(5, n) stack: center, +-h, +-ih offsets."""
    c = np.asarray(coords, dtype=complex)
    return np.stack([c, c + h, c - h, c + 1j * h, c - 1j * h])


def _eval_patch(field: PotentialField, idx: tuple, chart_ids: np.ndarray,
                coords5: np.ndarray) -> np.ndarray:
    """Fiber values on a 5-point x stencil stack, shape (5, n)."""
    fiber = field.fiber_of(idx)
    flat = coords5.reshape(-1)
    charts = np.broadcast_to(np.asarray(chart_ids)[None, :],
                             coords5.shape).reshape(-1)
    return np.asarray(fiber(charts, flat), dtype=float).reshape(coords5.shape)


def _dxbar(patch: np.ndarray, h: float) -> np.ndarray:
    """d/dxbar from a 5-point stencil patch: ((u+ - u-) + i(u+i - u-i))/4h."""
    return ((patch[1] - patch[2]) + 1j * (patch[3] - patch[4])) / (4.0 * h)


def _xx_hessian(patch: np.ndarray, psi5: np.ndarray, h: float) -> np.ndarray:
    tot = patch + psi5
    return (tot[1] + tot[2] + tot[3] + tot[4] - 4.0 * tot[0]) / (4.0 * h * h)


# ---------------------------------------------------------------------------
# Hessian block and determinant residual
# ---------------------------------------------------------------------------

def hessian_block(field: PotentialField, j: int, idx: tuple, x: ChartPoint,
                  x_step: float | None = None) -> np.ndarray:
    """2x2 complex Hessian block of u + psi in the complex direction w_j and
    the fiber coordinate at (node idx, x):

        [[ (u+psi)_{w wbar},  (u+psi)_{w xbar} ],
         [ (u+psi)_{x wbar},  (u+psi)_{x xbar} ]].

    psi is z-independent so the first row carries u only.  The off-diagonal
    pair is exactly conjugate because the difference operators commute on
    real samples.
    """
    h_x = x_step if x_step is not None else field.xgrid.fd_step
    axes = _complex_axes(field)
    if not (0 <= j < len(axes)):
        raise IndexError(f"axis {j} out of range")
    e_sh, w_sh, n_sh, s_sh, h_t, h_s = axes[j]
    charts = np.array([x.chart], dtype=np.int8)
    coords5 = _x_stencil(np.array([x.coord]), h_x)
    psi5 = psi_values(coords5)

    patch_c = _eval_patch(field, idx, charts, coords5)
    patch_e = _eval_patch(field, _shift_idx(field, idx, e_sh), charts, coords5)
    patch_w = _eval_patch(field, _shift_idx(field, idx, w_sh), charts, coords5)
    if n_sh is not None:
        patch_n = _eval_patch(field, _shift_idx(field, idx, n_sh), charts, coords5)
        patch_s = _eval_patch(field, _shift_idx(field, idx, s_sh), charts, coords5)
    else:
        patch_n = patch_s = patch_c

    u_wwbar = ((patch_e[0] + patch_w[0] - 2 * patch_c[0]) / h_t**2
               + (patch_n[0] + patch_s[0] - 2 * patch_c[0]) / h_s**2) / 4.0
    dxb = {key: _dxbar(p, h_x) for key, p in
           (("e", patch_e), ("w", patch_w), ("n", patch_n), ("s", patch_s))}
    u_wxbar = ((dxb["e"] - dxb["w"]) / (2 * h_t)
               - 1j * (dxb["n"] - dxb["s"]) / (2 * h_s)) / 2.0
    a_val = _xx_hessian(patch_c, psi5, h_x)
    return np.array([[complex(u_wwbar[0]), complex(u_wxbar[0])],
                     [np.conj(complex(u_wxbar[0])), complex(a_val[0])]])


def wzw_residual(field: PotentialField, idx: tuple, x: ChartPoint,
                 x_step: float | None = None) -> float:
    """sum_j det of the Hessian blocks at (idx, x).

    Zero characterises solutions of the WZW equation; >= 0 marks
    subsolutions (graph-subharmonic side), <= 0 the supersolution test.
    """
    total = 0.0
    for j in range(len(_complex_axes(field))):
        blk = hessian_block(field, j, idx, x, x_step)
        total += float(np.real(blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]))
    return total


def wzw_residual_field(field: PotentialField, x_indices: np.ndarray | None = None,
                       x_step: float | None = None) -> np.ndarray:
    """Vectorized residual over (interior nodes) x (X subset).

    Returns an array (n_interior, n_x); take max(abs(.)) for the sup.
    """
    grid = field.xgrid
    if x_indices is None:
        x_indices = np.arange(grid.n_nodes)
    charts = grid.chart_ids[x_indices]
    coords = grid.coords[x_indices]
    h_x = x_step if x_step is not None else grid.fd_step
    coords5 = _x_stencil(coords, h_x)
    psi5 = psi_values(coords5)

    rows = []
    for idx in _interior_idx(field):
        patch_c = _eval_patch(field, idx, charts, coords5)
        a_val = _xx_hessian(patch_c, psi5, h_x)
        total = np.zeros(coords.shape, dtype=float)
        for e_sh, w_sh, n_sh, s_sh, h_t, h_s in _complex_axes(field):
            patch_e = _eval_patch(field, _shift_idx(field, idx, e_sh), charts, coords5)
            patch_w = _eval_patch(field, _shift_idx(field, idx, w_sh), charts, coords5)
            if n_sh is not None:
                patch_n = _eval_patch(field, _shift_idx(field, idx, n_sh), charts, coords5)
                patch_s = _eval_patch(field, _shift_idx(field, idx, s_sh), charts, coords5)
            else:
                patch_n = patch_s = patch_c
            u_wwbar = ((patch_e[0] + patch_w[0] - 2 * patch_c[0]) / h_t**2
                       + (patch_n[0] + patch_s[0] - 2 * patch_c[0]) / h_s**2) / 4.0
            u_wxbar = ((_dxbar(patch_e, h_x) - _dxbar(patch_w, h_x)) / (2 * h_t)
                       - 1j * (_dxbar(patch_n, h_x) - _dxbar(patch_s, h_x)) / (2 * h_s)) / 2.0
            total += u_wwbar * a_val - np.abs(u_wxbar) ** 2
        rows.append(total)
    return np.array(rows)


# ---------------------------------------------------------------------------
# disc bound and optimal disc
# ---------------------------------------------------------------------------

def _locate_node(field: PotentialField, w0: complex) -> tuple:
    dom = field.domain
    if isinstance(dom, CylinderDomain):
        it = int(np.argmin(np.abs(dom.t_nodes - w0.real)))
        ds = np.angle(np.exp(1j * (dom.s_nodes - w0.imag)))
        is_ = int(np.argmin(np.abs(ds)))
        if abs(dom.t_nodes[it] - w0.real) + abs(ds[is_]) > 1e-9:
            raise GridMismatch(f"disc center {w0} is not a grid node")
        return (it, is_)
    if dom.m != 1:
        raise GridMismatch("disc centers on boxes require m = 1")
    t = dom.axis_nodes(0)
    it = int(np.argmin(np.abs(t - w0.real)))
    if abs(t[it] - w0.real) + abs(w0.imag) > 1e-9:
        raise GridMismatch(f"disc center {w0} is not a grid node")
    return (it,)


def disc_graph_laplacian(field: PotentialField, disc: HolomorphicDisc,
                         idx: tuple | None = None) -> float:
    """Complex Laplacian of w -> psi(f(w)) + u(w, f(w)) at the disc center."""
    if idx is None:
        idx = _locate_node(field, disc.center)
    w0 = disc.center
    charts1 = np.full(1, disc.chart, dtype=np.int8)

    def g(node_idx, w):
        xx = np.array([disc.at(w)])
        return float(field.eval(node_idx, charts1, xx)[0]
                     + psi_values(xx)[0])

    total = 0.0
    for e_sh, w_sh, n_sh, s_sh, h_t, h_s in _complex_axes(field):
        g_c = g(idx, w0)
        g_e = g(_shift_idx(field, idx, e_sh), w0 + h_t)
        g_w = g(_shift_idx(field, idx, w_sh), w0 - h_t)
        g_n = g(_shift_idx(field, idx, n_sh) if n_sh else idx, w0 + 1j * h_s)
        g_s = g(_shift_idx(field, idx, s_sh) if s_sh else idx, w0 - 1j * h_s)
        total += ((g_e + g_w - 2 * g_c) / h_t**2
                  + (g_n + g_s - 2 * g_c) / h_s**2) / 4.0
    return total


def schur_disc_bound(field: PotentialField, disc: HolomorphicDisc,
                     x_step: float | None = None) -> tuple[float, float]:
    """(lhs, rhs) of the disc bound at the disc center:

        lhs = lap( psi(f) + u(., f) ),
        rhs = sum_j det(u+psi)_j / (u+psi)_{x xbar},

    with lhs >= rhs - O(h^2) for fiberwise omega-psh fields, and equality to
    stencil order along the optimal disc.
    """
    idx = _locate_node(field, disc.center)
    lhs = disc_graph_laplacian(field, disc, idx)
    x0 = ChartPoint(disc.chart, complex(disc.base))
    a_val = None
    rhs = 0.0
    for j in range(len(_complex_axes(field))):
        blk = hessian_block(field, j, idx, x0, x_step)
        a_val = float(np.real(blk[1, 1]))
        rhs += float(np.real(blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]))
    if a_val is None or a_val <= 0:
        raise NotFiberwisePsh(f"(u+psi)_xxbar = {a_val} at the disc base")
    return lhs, rhs / a_val


def optimal_disc(field: PotentialField, idx: tuple, x: ChartPoint,
                 radius: float | None = None,
                 x_step: float | None = None) -> HolomorphicDisc:
    """Disc direction c = -u_{w xbar} / (u+psi)_{x xbar} achieving equality
    in the disc bound (m = 1 domains)."""
    axes = _complex_axes(field)
    if len(axes) != 1:
        raise GridMismatch("optimal_disc ships for m = 1 domains")
    blk = hessian_block(field, 0, idx, x, x_step)
    a_val = float(np.real(blk[1, 1]))
    if a_val <= 0:
        raise NotFiberwisePsh(f"(u+psi)_xxbar = {a_val:.3e} at {x}")
    c = -complex(blk[0, 1]) / a_val
    h_reach = max(axes[0][4], axes[0][5])
    if radius is None:
        radius = h_reach
    # stay inside the chart margin
    reach = abs(x.coord) + abs(c) * radius
    if reach > DISC_SAFETY * CHART_MARGIN and abs(c) > 0:
        c *= (DISC_SAFETY * CHART_MARGIN - abs(x.coord)) / (abs(c) * radius)
    return HolomorphicDisc(center=field.node_w(idx), chart=x.chart,
                           base=x.coord, direction=c, radius=radius)


# ---------------------------------------------------------------------------
# graph subharmonicity sampler
# ---------------------------------------------------------------------------

@dataclass
class DiscFamily:
    """Finite family of affine disc directions per base point."""

    n_angles: int = 16
    magnitudes: tuple[float, ...] = (0.5, 1.0, 2.0)
    include_zero: bool = True
    include_optimal: bool = True
    max_base_radius: float = 0.9
    max_bases: int = 64

    def directions(self) -> np.ndarray:
        angles = 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles
        dirs = np.concatenate([m * np.exp(1j * angles) for m in self.magnitudes])
        if self.include_zero:
            dirs = np.concatenate([[0.0 + 0.0j], dirs])
        return dirs


def graph_subharmonicity_defect(field: PotentialField,
                                discs: list[HolomorphicDisc] | None = None,
                                family: DiscFamily | None = None,
                                x_step: float | None = None) -> float:
    """min over sampled discs and interior nodes of the disc Laplacian.

    A field passes the subsolution sampler iff the returned defect is
    >= -tol.  Explicit ``discs`` short-circuit the default family.
    """
    if discs is not None:
        return min(disc_graph_laplacian(field, d) for d in discs)
    family = family or DiscFamily()
    grid = field.xgrid
    base_idx = grid.subsample(family.max_bases, family.max_base_radius)
    charts_b = grid.chart_ids[base_idx]
    coords_b = grid.coords[base_idx]
    dirs = family.directions()
    h_x = x_step if x_step is not None else grid.fd_step

    worst = np.inf
    for idx in _interior_idx(field):
        cand = np.broadcast_to(dirs[None, :],
                               (coords_b.size, dirs.size)).copy()
        if family.include_optimal:
            opt = _optimal_directions(field, idx, charts_b, coords_b, h_x)
            cand = np.concatenate([cand, opt[:, None]], axis=1)
        # clip directions so every disc stays inside the chart margin
        axes = _complex_axes(field)
        h_reach = max(axes[0][4], axes[0][5])
        reach = np.abs(coords_b)[:, None] + np.abs(cand) * h_reach
        over = reach > DISC_SAFETY * CHART_MARGIN
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where(
                over,
                (DISC_SAFETY * CHART_MARGIN - np.abs(coords_b)[:, None])
                / np.maximum(np.abs(cand) * h_reach, 1e-300),
                1.0)
        cand = cand * scale
        worst = min(worst, _family_min_laplacian(field, idx, charts_b,
                                                 coords_b, cand))
    return float(worst)


def _optimal_directions(field, idx, charts, coords, h_x) -> np.ndarray:
    coords5 = _x_stencil(coords, h_x)
    psi5 = psi_values(coords5)
    patch_c = _eval_patch(field, idx, charts, coords5)
    a_val = _xx_hessian(patch_c, psi5, h_x)
    (e_sh, w_sh, n_sh, s_sh, h_t, h_s) = _complex_axes(field)[0]
    patch_e = _eval_patch(field, _shift_idx(field, idx, e_sh), charts, coords5)
    patch_w = _eval_patch(field, _shift_idx(field, idx, w_sh), charts, coords5)
    if n_sh is not None:
        patch_n = _eval_patch(field, _shift_idx(field, idx, n_sh), charts, coords5)
        patch_s = _eval_patch(field, _shift_idx(field, idx, s_sh), charts, coords5)
    else:
        patch_n = patch_s = patch_c
    b = ((_dxbar(patch_e, h_x) - _dxbar(patch_w, h_x)) / (2 * h_t)
         - 1j * (_dxbar(patch_n, h_x) - _dxbar(patch_s, h_x)) / (2 * h_s)) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(a_val > 0, -b / a_val, 0.0)
    return c


def _family_min_laplacian(field, idx, charts, coords, cand) -> float:
    """Min disc Laplacian over (base, direction) combos at one node.

    Combos whose stencil touches the field's singular guard (log poles of
    probe fields) are excluded from the minimum.
    """
    (e_sh, w_sh, n_sh, s_sh, h_t, h_s) = _complex_axes(field)[0]
    base = coords[:, None]
    offs = {
        "c": (idx, base + 0.0 * cand),
        "e": (_shift_idx(field, idx, e_sh), base + cand * h_t),
        "w": (_shift_idx(field, idx, w_sh), base - cand * h_t),
        "n": (_shift_idx(field, idx, n_sh) if n_sh else idx,
              base + 1j * cand * h_s),
        "s": (_shift_idx(field, idx, s_sh) if s_sh else idx,
              base - 1j * cand * h_s),
    }
    g = {}
    guarded = np.zeros(cand.shape, dtype=bool)
    charts_full = np.broadcast_to(charts[:, None], cand.shape)
    dir_scale = np.abs(cand).reshape(-1)
    for key, (node, pts) in offs.items():
        vals = field.eval(node, charts_full.reshape(-1), pts.reshape(-1))
        g[key] = vals.reshape(pts.shape) + psi_values(pts)
        if field.singular_guard is not None:
            hit = field.singular_guard(node, charts_full.reshape(-1),
                                       pts.reshape(-1), dir_scale)
            guarded |= hit.reshape(pts.shape)
    lap = ((g["e"] + g["w"] - 2 * g["c"]) / h_t**2
           + (g["n"] + g["s"] - 2 * g["c"]) / h_s**2) / 4.0
    if np.all(guarded):
        return np.inf
    return float(np.min(np.where(guarded, np.inf, lap)))


# ---------------------------------------------------------------------------
# sup over X, distance, discrete subharmonicity
# ---------------------------------------------------------------------------

def sup_over_X(field: PotentialField, idx: tuple, refine: bool = False) -> float:
    """max over grid nodes of u(idx, .), ties broken by first grid index;
    one optional local refinement pass around the arg-max node."""
    row = field.values[idx]
    i = int(np.argmax(row))
    best = float(row[i])
    if not refine:
        return best
    grid = field.xgrid
    chart = int(grid.chart_ids[i])
    x0 = grid.coords[i]
    r0, th0 = abs(x0), np.angle(x0)
    dr = 0.5 / grid.resolution
    dth = np.pi / grid.thetas.size
    rr = np.clip(np.linspace(r0 - dr, r0 + dr, 5), 1e-6, 1.0)
    tt = np.linspace(th0 - dth, th0 + dth, 5)
    pts = (rr[:, None] * np.exp(1j * tt[None, :])).ravel()
    vals = field.eval(idx, np.full(pts.size, chart, dtype=np.int8), pts)
    return max(best, float(np.max(vals)))


def delta_dist(u: PotentialField, v: PotentialField, idx: tuple) -> float:
    """delta(u, v)(z) = sup_x ( u(z, x) - v(z, x) )."""
    u.check_same_grids(v)
    return float(np.max(u.values[idx] - v.values[idx]))


def dist(u: PotentialField, v: PotentialField, idx: tuple) -> float:
    """d(u, v)(z) = max(delta(u, v), delta(v, u)); a pointwise-in-z
    Banach-Mazur style distance."""
    return max(delta_dist(u, v, idx), delta_dist(v, u, idx))


def dist_profile(u: PotentialField, v: PotentialField) -> np.ndarray:
    """z -> d(u, v)(z) over the whole domain grid."""
    u.check_same_grids(v)
    diff = u.values - v.values
    return np.maximum(diff.max(axis=-1), (-diff).max(axis=-1))


def discrete_subharmonicity_defect(h_values: np.ndarray, domain) -> float:
    """min over interior nodes of (weighted neighbor average - value).

    Nonnegative (up to tolerance) characterises grid subharmonicity.
    """
    return float(np.min(neighbor_average_defect(np.asarray(h_values, float),
                                                domain)))


def conformality_test(a: np.ndarray, tol: float) -> bool:
    """True iff A A* = (tr(A A*)/m) I within tol (relative Frobenius)."""
    a = np.asarray(a, dtype=complex)
    m = a.shape[0]
    aa = a @ a.conj().T
    dev = aa - (np.trace(aa).real / m) * np.eye(m)
    return bool(np.linalg.norm(dev) <= tol * max(np.linalg.norm(aa), 1e-300))


def max_principle_check(u: PotentialField, v: PotentialField) -> tuple[float, float]:
    """(sup_D h, sup_boundary h) for h(z) = sup_x (u - v)(z, x).

    For graph-subharmonic u below the envelope v the interior sup does not
    exceed the boundary sup (within tolerance).
    """
    u.check_same_grids(v)
    diff = (u.values - v.values).max(axis=-1)
    interior = u.domain.interior_mask()
    return float(diff[interior].max()), float(diff[~interior].max())


def superharmonicity_probe_margin(u: PotentialField,
                                  probes: list[PotentialField]) -> float:
    """Necessary-condition test of graph superharmonicity: for every probe
    subsolution v, z -> sup_x(v - u) must be grid subharmonic.  Returns the
    worst defect over the probe family."""
    worst = np.inf
    for v in probes:
        u.check_same_grids(v)
        h = (v.values - u.values).max(axis=-1)
        worst = min(worst, discrete_subharmonicity_defect(h, u.domain))
    return float(worst)
