"""Quantized Perron envelopes: boundary catalog, complexification, the
FS_k(V^k) pipeline, convergence studies, barriers and the geodesic
proportionality defect.

The envelope of boundary data nu is never searched over an abstract
subsolution family; it is computed as the quantized limit FS_k(V^k) where
V^k solves the matrix Dirichlet problem with boundary H_k(nu).  For a 1-D
interval the matrix solution is the closed-form geodesic between the
endpoint Gram matrices; boxes and annuli go through the iterative solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .domains import BoxDomain, CylinderDomain, Domain
from .errors import NotOmegaPsh, Unsupported
from .fields import PotentialField, field_from_grams
from .geometry import XFunction, XGrid, combine_xfunctions, hessian_on_grid
from .matrix_harmonic import (SolveInfo, geodesic_path, interval_boundary,
                              solve_harmonic_dirichlet)
from .quantization import PSH_TOLERANCE, FSPotential, hilbert_map
from .wzw_calculus import dist_profile, wzw_residual_field

# ---------------------------------------------------------------------------
# boundary catalog
# ---------------------------------------------------------------------------


def _phi_zero(chart_ids, coords):
    return np.zeros(np.shape(coords), dtype=float)


def _phi_radial(a: float) -> XFunction:
    # a * (log(1+|x|^2/2) - log(1+|x|^2)): bounded on X, omega-psh for
    # a in (-1, 2); reads a*log((1+2r^2)/(2(1+r^2))) in the other chart.
    def fn(chart_ids, coords):
        r2 = np.asarray(coords).real**2 + np.asarray(coords).imag**2
        c0 = np.log1p(0.5 * r2) - np.log1p(r2)
        c1 = np.log1p(2.0 * r2) - np.log(2.0) - np.log1p(r2)
        return a * np.where(np.asarray(chart_ids) == 0, c0, c1)

    return fn


def _phi_bump(eps: float) -> XFunction:
    # eps * Re(x)/(1+|x|^2): first spherical harmonic, same formula in both
    # charts; omega-psh for |eps| < 1.
    def fn(chart_ids, coords):
        c = np.asarray(coords)
        return eps * c.real / (1.0 + c.real**2 + c.imag**2)

    return fn


def catalog_potential(spec: str) -> tuple[XFunction, str]:
    """Parse a catalog entry: 'zero', 'const:c=0.5', 'radial:a=0.8',
    'bump:eps=0.3', or '+'-joined combinations."""
    from .errors import ConfigError

    parts = [p.strip() for p in spec.split("+") if p.strip()]
    if not parts:
        raise ConfigError(f"empty catalog entry {spec!r}")
    terms = []
    names = []
    for part in parts:
        name, _, argstr = part.partition(":")
        args = {}
        for kv in filter(None, argstr.split(",")):
            key, _, val = kv.partition("=")
            try:
                args[key.strip()] = float(val)
            except ValueError:
                raise ConfigError(f"bad catalog argument '{kv}' in {spec!r}")
        if name == "zero":
            terms.append((1.0, _phi_zero))
        elif name == "const":
            c = args.get("c", 0.0)
            terms.append((1.0, lambda ci, xi, c=c: np.full(np.shape(xi), c)))
        elif name == "radial":
            terms.append((1.0, _phi_radial(args.get("a", 0.5))))
        elif name == "bump":
            terms.append((1.0, _phi_bump(args.get("eps", 0.3))))
        else:
            raise ConfigError(f"unknown catalog entry '{name}'")
        names.append(part)
    return combine_xfunctions(terms), "+".join(names)


@dataclass
class BoundaryData:
    """Boundary potentials nu(t, .) on the Dirichlet set of a domain.

    ``entries`` maps each boundary node index (tuple) to a chart-aware
    callable; :meth:`interval` covers the main m=1 case.
    """

    domain: Domain
    entries: dict

    @classmethod
    def interval(cls, domain: BoxDomain, left, right) -> "BoundaryData":
        left_fn = left if callable(left) else catalog_potential(left)[0]
        right_fn = right if callable(right) else catalog_potential(right)[0]
        n = domain.shape[0]
        return cls(domain, {(0,): left_fn, (n - 1,): right_fn})

    def at(self, idx: tuple) -> XFunction:
        return self.entries[tuple(idx)]

    def check_admissible(self, grid: XGrid, tol: float = PSH_TOLERANCE) -> float:
        """omega-psh certificate at every boundary node; returns the worst
        margin or raises NotOmegaPsh naming the failing node."""
        worst = np.inf
        for idx, fn in self.entries.items():
            h = hessian_on_grid(fn, grid)
            i = int(np.argmin(h))
            if h[i] < tol:
                raise NotOmegaPsh(
                    f"boundary node {idx}: (nu+psi)_xxbar = {h[i]:.3e} at "
                    f"X node {i} (chart {int(grid.chart_ids[i])}, "
                    f"x = {grid.coords[i]:.4f})")
            worst = min(worst, float(h[i]))
        return worst


def complexify(domain: BoxDomain, n_s: int = 16) -> CylinderDomain:
    """Interval (t0, t1) -> annulus {e^t0 <= |zeta| <= e^t1} in log-polar
    grid coordinates.  Only m = 1 complexifies; use the real-grid solver
    for boxes."""
    if domain.m != 1:
        raise Unsupported("only 1-D boxes complexify to annuli")
    return CylinderDomain(float(np.exp(domain.lows[0])),
                          float(np.exp(domain.highs[0])),
                          domain.shape[0], n_s)


def extend_rotationally(nu: BoundaryData, cylinder: CylinderDomain) -> BoundaryData:
    """nu~(zeta, .) = nu(log|zeta|, .): constant along each boundary circle."""
    if not isinstance(nu.domain, BoxDomain) or nu.domain.m != 1:
        raise Unsupported("rotational extension starts from interval data")
    n = nu.domain.shape[0]
    entries = {}
    for is_ in range(cylinder.n_s):
        entries[(0, is_)] = nu.at((0,))
        entries[(cylinder.n_t - 1, is_)] = nu.at((n - 1,))
    return BoundaryData(cylinder, entries)


# ---------------------------------------------------------------------------
# the quantized envelope
# ---------------------------------------------------------------------------


@dataclass
class EnvelopeField:
    """FS_k of the matrix Dirichlet solution, with its matrix state."""

    field: PotentialField
    grams: np.ndarray          # (*domain.shape, N, N)
    k: int
    boundary: BoundaryData
    solve_info: SolveInfo | None
    psh_margin: float

    @property
    def domain(self) -> Domain:
        return self.field.domain

    @property
    def xgrid(self) -> XGrid:
        return self.field.xgrid

    def complexified(self, n_s: int = 16) -> PotentialField:
        return self.field.complexified(n_s)


def _endpoint_grams(nu: BoundaryData, k: int, grid: XGrid) -> tuple[np.ndarray, np.ndarray]:
    dom = nu.domain
    n = dom.shape[0]
    g0 = hilbert_map(nu.at((0,)), k, grid)
    g1 = hilbert_map(nu.at((n - 1,)), k, grid)
    return g0, g1


def quantized_envelope(nu: BoundaryData, k: int, grid: XGrid, *,
                       solver_tol: float = 1e-9, via: str = "auto",
                       verify_psh: bool = True,
                       solver_kwargs: dict | None = None) -> EnvelopeField:
    """Compute FS_k(V^k) for boundary data nu.

    For a 1-D interval the matrix field is the closed-form geodesic between
    the endpoint Grams (``via="geodesic"``); ``via="solver"`` forces the
    iterative relaxation (used by reiteration and uniqueness checks).
    Boxes with m = 2 always use the solver.
    """
    nu.check_admissible(grid)
    dom = nu.domain
    info = None
    if isinstance(dom, BoxDomain) and dom.m == 1:
        g0, g1 = _endpoint_grams(nu, k, grid)
        taus = (dom.axis_nodes(0) - dom.lows[0]) / (dom.highs[0] - dom.lows[0])
        if via in ("auto", "geodesic"):
            grams = geodesic_path(g0, g1, taus)
        elif via == "solver":
            boundary = interval_boundary(dom, g0, g1)
            mf, info = solve_harmonic_dirichlet(
                dom, boundary, solver_tol, **(solver_kwargs or {}))
            grams = mf.values
        else:
            raise ValueError(f"unknown via='{via}'")
    elif isinstance(dom, BoxDomain) and dom.m == 2:
        boundary = np.zeros(dom.shape + (k + 1, k + 1), dtype=complex)
        for idx, fn in nu.entries.items():
            boundary[idx] = hilbert_map(fn, k, grid)
        mf, info = solve_harmonic_dirichlet(
            dom, boundary, solver_tol, **(solver_kwargs or {}))
        grams = mf.values
    else:
        raise Unsupported("quantized_envelope runs on box domains; "
                          "complexify afterwards for annulus calculus")
    field = field_from_grams(dom, grid, grams, k, label=f"envelope-k{k}")
    margin = np.inf
    if verify_psh:
        margin = field.fiberwise_psh_margin()
        if margin < PSH_TOLERANCE - 10.0 * grid.fd_step**2:
            raise NotOmegaPsh(
                f"FS_k field failed the fiberwise psh certificate: {margin:.3e}")
    return EnvelopeField(field=field, grams=grams, k=k, boundary=nu,
                         solve_info=info, psh_margin=float(margin))


def boundary_attainment_error(env: EnvelopeField) -> float:
    """max over boundary nodes and X of |FS_k(V^k) - nu|; bounded by the
    Bergman error of the boundary potentials plus solver tolerance."""
    worst = 0.0
    for idx, fn in env.boundary.entries.items():
        diff = env.field.values[idx] - env.xgrid.sample(fn)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


# ---------------------------------------------------------------------------
# convergence study
# ---------------------------------------------------------------------------


@dataclass
class ConvergenceRow:
    k: int
    sup_cauchy_diff: float
    wzw_residual_sup: float
    boundary_attainment_err: float
    wall_seconds: float


def convergence_study(nu: BoundaryData, k_list: list[int], grid: XGrid, *,
                      solver_tol: float = 1e-9,
                      x_indices: np.ndarray | None = None) -> list[ConvergenceRow]:
    """Rows (k, ||FS_k(V^k) - FS_2k(V^2k)||_inf, sup |wzw residual|,
    boundary attainment error, wall time)."""
    import time

    cache: dict[int, EnvelopeField] = {}

    def env(k: int) -> EnvelopeField:
        if k not in cache:
            cache[k] = quantized_envelope(nu, k, grid, solver_tol=solver_tol)
        return cache[k]

    rows = []
    for k in k_list:
        t0 = time.perf_counter()
        e_k, e_2k = env(k), env(2 * k)
        cauchy = float(np.max(np.abs(e_k.field.values - e_2k.field.values)))
        res = wzw_residual_field(e_k.field, x_indices=x_indices)
        rows.append(ConvergenceRow(
            k=k,
            sup_cauchy_diff=cauchy,
            wzw_residual_sup=float(np.max(np.abs(res))),
            boundary_attainment_err=boundary_attainment_error(e_k),
            wall_seconds=time.perf_counter() - t0,
        ))
    return rows


# ---------------------------------------------------------------------------
# barriers, max principle inputs, proportionality, reiteration
# ---------------------------------------------------------------------------


def barrier_sandwich(env: EnvelopeField) -> tuple[float, float]:
    """(lower_margin, upper_margin) of the harmonic-extension barriers.

    Both barriers are built from the envelope's own boundary trace
    nu_k = FS_k(H_k(nu)) (the data the quantized field actually attains;
    using raw nu would misreport the balanced constant as a violation).
    Harmonic extensions are discrete Laplace solves on the domain grid
    (affine in t on an interval).

    upper: min over (t, x) of ( H_x(t) - V(t, x) ),  H_x from nu_k(., x);
    lower: min over boundary z0 and (t, x) of
           ( V(t, x) - H^{z0}(t) - nu_k(z0, x) ),
           H^{z0} extending P(zeta) = inf_x ( nu_k(zeta, x) - nu_k(z0, x) ).
    """
    from .domains import laplace_extend

    dom = env.domain
    if not (isinstance(dom, BoxDomain) and dom.m == 1):
        raise Unsupported("barrier_sandwich ships for interval envelopes")
    n = dom.shape[0]
    vals = env.field.values
    trace0, trace1 = vals[0], vals[-1]

    h_x = laplace_extend(dom, vals)
    upper_margin = float(np.min(h_x - vals))

    lower_margin = np.inf
    for z0, trace_z0 in (((0,), trace0), ((n - 1,), trace1)):
        p = np.zeros(n)
        p[0] = float(np.min(trace0 - trace_z0))
        p[-1] = float(np.min(trace1 - trace_z0))
        h = laplace_extend(dom, p)
        lower_margin = min(lower_margin, float(
            np.min(vals - h[:, None] - trace_z0[None, :])))
    return lower_margin, upper_margin


def proportionality_defect(env_field: PotentialField) -> float:
    """max over grid pairs (s, t) of
    | d(V(s), V(t)) - |s - t| * d(V(0), V(1)) | for an interval field."""
    dom = env_field.domain
    if not (isinstance(dom, BoxDomain) and dom.m == 1):
        raise Unsupported("proportionality ships for interval envelopes")
    vals = env_field.values
    n = dom.shape[0]
    tau = (dom.axis_nodes(0) - dom.lows[0]) / (dom.highs[0] - dom.lows[0])
    # pairwise one-sided sups via broadcasting: diff[s,t] = max_x (V_s - V_t)
    diff = vals[:, None, :] - vals[None, :, :]
    delta = diff.max(axis=-1)
    d = np.maximum(delta, np.swapaxes(delta, 0, 1))
    ref = d[0, -1]
    target = np.abs(tau[:, None] - tau[None, :]) * ref
    return float(np.max(np.abs(d - target)))


def proportionality_table(env_field: PotentialField) -> list[tuple[float, float, float, float]]:
    """(s, t, d(V(s),V(t)), defect) rows over the grid pairs."""
    dom = env_field.domain
    vals = env_field.values
    tau = (dom.axis_nodes(0) - dom.lows[0]) / (dom.highs[0] - dom.lows[0])
    diff = vals[:, None, :] - vals[None, :, :]
    delta = diff.max(axis=-1)
    d = np.maximum(delta, np.swapaxes(delta, 0, 1))
    ref = d[0, -1]
    rows = []
    for i in range(len(tau)):
        for j in range(len(tau)):
            rows.append((float(tau[i]), float(tau[j]), float(d[i, j]),
                         float(abs(d[i, j] - abs(tau[i] - tau[j]) * ref))))
    return rows


def reiteration_check(env: EnvelopeField, lo: int, hi: int, *,
                      solver_tol: float = 1e-10) -> float:
    """Re-solve the Dirichlet problem on the sub-interval [t_lo, t_hi] with
    boundary taken from the envelope's matrix state, independently through
    the iterative solver, and return the sup difference of the FS fields.

    This is the quantized form of the reiteration property (the envelope of
    the restricted data restricts the envelope); re-quantizing the scalar
    trace through H_k instead would double-count the balanced constant.
    """
    dom = env.domain
    if not (isinstance(dom, BoxDomain) and dom.m == 1):
        raise Unsupported("reiteration_check ships for interval envelopes")
    t = dom.axis_nodes(0)
    if not (0 <= lo < hi < dom.shape[0]):
        raise ValueError("need grid-aligned sub-interval 0 <= lo < hi < n")
    sub = BoxDomain((float(t[lo]),), (float(t[hi]),), (hi - lo + 1,))
    boundary = interval_boundary(sub, env.grams[lo], env.grams[hi])
    mf, _ = solve_harmonic_dirichlet(sub, boundary, solver_tol)
    worst = 0.0
    for i in range(hi - lo + 1):
        fs = FSPotential(mf.values[i], env.k)
        diff = env.xgrid.sample(fs) - env.field.values[lo + i]
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def distance_profile(env_a: EnvelopeField, env_b: EnvelopeField) -> np.ndarray:
    """t -> d(V_a(t), V_b(t)) over the shared interval grid."""
    return dist_profile(env_a.field, env_b.field)


def envelope_residual_exact(env: EnvelopeField, xgrid: XGrid | None = None,
                            interior_only: bool = True) -> np.ndarray:
    """Exact determinant residual of an interval envelope.

    Along the matrix geodesic G(t) = G0^{1/2} (G0^{-1/2} G1 G0^{-1/2})^t
    G0^{1/2} the potential satisfies

        k (u_k + psi) = log K,   K(t, x) = sum_i |y_i(x)|^2 e^{-t lam_i},

    a log of a sum of holomorphic squares, so the determinant of the mixed
    Hessian block has the closed Gram form

        det = det Gram(G, G_tau, G_x) / (k^2 K^3)  >=  0,

    free of finite differencing.  This is the determinant-identity oracle
    the FD residual is tested against; it also certifies the subsolution
    sign exactly.
    """
    from .hermitian import hermitize, inv_sqrtm_pd

    dom = env.domain
    if not (isinstance(dom, BoxDomain) and dom.m == 1):
        raise Unsupported("the exact residual ships for interval envelopes")
    grid = xgrid if xgrid is not None else env.xgrid
    k = env.k
    g0, g1 = env.grams[0], env.grams[-1]
    isq = inv_sqrtm_pd(g0)
    lam, u = np.linalg.eigh(hermitize(isq @ g1 @ isq))
    lam = np.log(lam)
    c = isq @ u  # G(t)^{-1} = C e^{-t lam} C^H
    t = dom.axis_nodes(0)
    if interior_only:
        t = t[1:-1]
    ch, x = grid.chart_ids, grid.coords
    n = k + 1
    expo = np.arange(n)[None, :]
    pows = x[:, None] ** np.arange(n)
    dpows = np.where(expo > 0, expo * x[:, None] ** np.clip(expo - 1, 0, None), 0.0)
    v = np.where((ch == 0)[:, None], pows, pows[:, ::-1])
    dv = np.where((ch == 0)[:, None], dpows, dpows[:, ::-1])
    y, dy = v @ c, dv @ c
    out = np.empty((len(t), len(x)))
    for row, tv in enumerate(t):
        e = np.exp(-tv * lam / 2.0)
        vecs = (y * e, (y * e) * (-lam / 2.0), dy * e)
        m = np.empty((len(x), 3, 3), dtype=complex)
        for a in range(3):
            for b in range(3):
                m[:, a, b] = np.einsum("pi,pi->p", vecs[a], np.conj(vecs[b]))
        kval = m[:, 0, 0].real
        out[row] = np.linalg.det(m).real / kval**3 / k**2
    return out
