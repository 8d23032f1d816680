"""Diastasis-kernel Legendre transform and the forward duality check.

The transform acts fiberwise:

    uhat(z, y) = sup_x ( -D(x, conj(y)) - u(z, x) ),

with D the Calabi diastasis.  On the conjugation-symmetric Fubini-Study
sphere the dual form i d dbar psi(conj(x)) is numerically identical to the
original, and the dual grid node y_j is bookkept as the conjugate of the
source node x_j in the same chart; with that convention

    D(x_i, conj(y_j)) = D(x_i, x_j),

so the transform reduces to row maxima of (-D - u) against the precomputed
pairwise diastasis matrix of the grid.

The proved duality direction (superharmonic -> dual subharmonic) is checked
through the cancellation identity

    psi~(f(w)) + uhat(w, f(w)) = max_x ( 2 Re psi_C(x, conj(f(w))) - psi(x)
                                         - u(w, x) ),

a maximum of graph-subharmonic probe fields, evaluated with the usual disc
Laplacians.  The converse direction is a conjecture and only ever reported,
never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import PotentialField
from .geometry import XGrid, psi_values
from .wzw_calculus import (DiscFamily, _complex_axes, _interior_idx,
                           _shift_idx, discrete_subharmonicity_defect,
                           superharmonicity_probe_margin)


def diastasis_matrix(grid: XGrid) -> np.ndarray:
    """Pairwise D(x_i, x_j) over all grid nodes (both charts), with +inf on
    (numerically) antipodal pairs."""
    from .geometry import _diastasis_coords

    ch = grid.chart_ids
    x = grid.coords
    same = ch[:, None] == ch[None, :]
    # cross-chart pairs: move the second point to the first point's chart
    with np.errstate(divide="ignore"):
        flipped = 1.0 / x
    b = np.where(same, x[None, :], flipped[None, :])
    return _diastasis_coords(x[:, None], b)


def legendre_transform(field: PotentialField,
                       dmatrix: np.ndarray | None = None) -> PotentialField:
    """uhat over the conjugate grid; same domain, same X grid bookkeeping."""
    if dmatrix is None:
        dmatrix = diastasis_matrix(field.xgrid)
    vals = field.values
    # uhat[..., j] = max_i ( -D[i, j] - u[..., i] ); +inf rows never win
    neg_d = np.where(np.isfinite(dmatrix), -dmatrix, -np.inf)
    flat = vals.reshape(-1, vals.shape[-1])
    hat_flat = np.empty_like(flat)
    with np.errstate(invalid="ignore"):
        for z in range(flat.shape[0]):
            hat_flat[z] = np.max(neg_d - flat[z][:, None], axis=0)
    hat_vals = hat_flat.reshape(vals.shape)

    grid = field.xgrid
    src_charts, src_coords = grid.chart_ids, grid.coords

    def fiber(idx):
        from .geometry import _diastasis_coords

        row = field.values[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            x0 = np.where(src_charts == 0, src_coords, 1.0 / src_coords)

        def f(chart_ids, coords):
            # uhat(y) = max_i ( -D(x_i, conj(y)) - u(x_i) ); the diastasis
            # is chart-invariant, so chart-0 coordinates work globally.
            coords = np.asarray(coords, dtype=complex)
            chart_ids = np.asarray(chart_ids)
            with np.errstate(divide="ignore", invalid="ignore"):
                y0 = np.where(chart_ids == 0, coords,
                              np.where(coords == 0, np.inf, 1.0 / coords))
            d = _diastasis_coords(x0[:, None], np.conj(y0)[None, :])
            d = np.where(np.isfinite(d), d, np.inf)
            return np.max(-d - row[:, None], axis=0)

        return f

    return PotentialField(field.domain, field.xgrid, fiber, hat_vals,
                          s_independent=field.s_independent,
                          label=f"hat({field.label})")


def order_reversal_violation(u: PotentialField, v: PotentialField,
                             dmatrix: np.ndarray | None = None) -> float:
    """For u <= v pointwise the transforms satisfy uhat >= vhat; returns the
    worst violation max(vhat - uhat) (<= 0 up to roundoff when u <= v)."""
    uh = legendre_transform(u, dmatrix)
    vh = legendre_transform(v, dmatrix)
    return float(np.max(vh.values - uh.values))


# ---------------------------------------------------------------------------
# duality checks
# ---------------------------------------------------------------------------


def _dual_disc_laplacians(field: PotentialField, idx: tuple,
                          bases: np.ndarray, cand: np.ndarray) -> np.ndarray:
    """Disc Laplacians of psi~(f) + uhat(., f) for f = base + c (w - w0),
    computed through the cancellation identity (no dual-fiber stencils).

    ``bases``/``cand`` are chart-0 coordinates of the disc bases (conjugate
    grid) and direction combos per base.
    """
    (e_sh, w_sh, n_sh, s_sh, h_t, h_s) = _complex_axes(field)[0]
    grid = field.xgrid
    chart0 = grid.chart_ids == 0
    psi_x = psi_values(grid.coords)

    def g(node, f_pts):
        # max_x ( 2 Re psi_C(x, conj(f)) - psi(x) - u(node, x) ) over grid
        # x, with the probe written per chart: log|1 + x f|^2 in chart 0,
        # log|x' + f|^2 in chart 1 (f itself is a chart-0 coordinate).
        row = field.values[node]
        f_flat = f_pts.reshape(-1)[None, :]
        cross = np.where(chart0[:, None],
                         1.0 + grid.coords[:, None] * f_flat,
                         grid.coords[:, None] + f_flat)
        with np.errstate(divide="ignore"):
            val = np.log(cross.real**2 + cross.imag**2)
        val = val - (psi_x + row)[:, None]
        return np.max(val, axis=0).reshape(f_pts.shape)

    base = bases[:, None]
    g_c = g(idx, base + 0.0 * cand)
    g_e = g(_shift_idx(field, idx, e_sh), base + cand * h_t)
    g_w = g(_shift_idx(field, idx, w_sh), base - cand * h_t)
    g_n = g(_shift_idx(field, idx, n_sh) if n_sh else idx, base + 1j * cand * h_s)
    g_s = g(_shift_idx(field, idx, s_sh) if s_sh else idx, base - 1j * cand * h_s)
    return ((g_e + g_w - 2 * g_c) / h_t**2
            + (g_n + g_s - 2 * g_c) / h_s**2) / 4.0


def duality_forward_check(field: PotentialField, *,
                          probes: list[PotentialField] | None = None,
                          family: DiscFamily | None = None,
                          ) -> tuple[float, float]:
    """(probe_margin, dual_defect) for the proved duality direction.

    ``probe_margin`` is the superharmonicity precondition margin of the
    input (>= -tol required for the check to be meaningful); ``dual_defect``
    is the graph-subharmonicity defect of the transform over the sampled
    disc family, contract >= -tol.
    """
    probe_margin = np.inf
    if probes:
        probe_margin = superharmonicity_probe_margin(field, probes)
    family = family or DiscFamily(n_angles=8, magnitudes=(0.5, 1.0),
                                  max_bases=24)
    grid = field.xgrid
    base_idx = grid.subsample(family.max_bases, family.max_base_radius)
    # dual bases: conjugates of source nodes, in chart-0 coordinates
    with np.errstate(divide="ignore", invalid="ignore"):
        x0 = np.where(grid.chart_ids[base_idx] == 0, grid.coords[base_idx],
                      1.0 / grid.coords[base_idx])
    bases = np.conj(x0)
    dirs = family.directions()
    worst = np.inf
    for idx in _interior_idx(field):
        cand = np.broadcast_to(dirs[None, :], (bases.size, dirs.size))
        lap = _dual_disc_laplacians(field, idx, bases, cand)
        worst = min(worst, float(np.min(lap)))
    return float(probe_margin), float(worst)


@dataclass
class ConverseProbeReport:
    """Exploratory margins for the conjectured converse direction; emitted
    for inspection only, never asserted."""

    subharmonic_input_margin: float
    dual_superharmonic_margins: dict

    @property
    def min_margin(self) -> float:
        if not self.dual_superharmonic_margins:
            return np.nan
        return min(self.dual_superharmonic_margins.values())


def duality_converse_probe(field: PotentialField,
                           probes: list[PotentialField],
                           input_margin: float,
                           dmatrix: np.ndarray | None = None) -> ConverseProbeReport:
    """Run the superharmonicity probe family on the transform of a
    subharmonic input and report the margins."""
    hat = legendre_transform(field, dmatrix)
    margins = {}
    for i, v in enumerate(probes):
        h = (v.values - hat.values).max(axis=-1)
        margins[f"probe_{i}"] = float(
            discrete_subharmonicity_defect(h, field.domain))
    return ConverseProbeReport(subharmonic_input_margin=float(input_margin),
                               dual_superharmonic_margins=margins)
