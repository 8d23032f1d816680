import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wzwlab.domains import BoxDomain, CylinderDomain
from wzwlab.errors import GridMismatch, NotFiberwisePsh
from wzwlab.fields import (HolomorphicDisc, field_from_profile_terms,
                           field_from_xfunction, pullback_probe_field,
                           quadratic_field)
from wzwlab.geometry import ChartPoint
from wzwlab.envelope import catalog_potential
from wzwlab.wzw_calculus import (DiscFamily, conformality_test, delta_dist,
                                 disc_graph_laplacian,
                                 discrete_subharmonicity_defect, dist,
                                 dist_profile, graph_subharmonicity_defect,
                                 hessian_block, max_principle_check,
                                 optimal_disc, schur_disc_bound, sup_over_X,
                                 superharmonicity_probe_margin, wzw_residual,
                                 wzw_residual_field)

ONE = lambda c, x: np.ones(np.shape(x))
ZERO = lambda c, x: np.zeros(np.shape(x))


@pytest.fixture(scope="module")
def cyl():
    return CylinderDomain(1.0, np.e, 17, 16)


@pytest.fixture(scope="module")
def interval():
    return BoxDomain((0.0,), (1.0,), (17,))


def test_hessian_block_flat_field(cyl, xgrid16):
    u0 = field_from_xfunction(cyl, xgrid16, ZERO)
    blk = hessian_block(u0, 0, (8, 0), ChartPoint(0, 0.0))
    assert abs(blk[0, 0]) < 1e-12
    assert abs(blk[0, 1]) < 1e-12
    assert blk[1, 1].real == pytest.approx(1.0, abs=1e-2)


def test_hessian_block_abs_w_squared(cyl, xgrid16):
    # second differences of |w|^2 are exact away from the angular seam
    u = quadratic_field(cyl, xgrid16, {"a1": 1.0}, variable="w")
    blk = hessian_block(u, 0, (8, 4), ChartPoint(0, 0.1 - 0.2j))
    assert blk[0, 0].real == pytest.approx(1.0, abs=1e-10)
    res = wzw_residual(u, (8, 4), ChartPoint(0, 0.1 - 0.2j))
    psi_xx = 1.0 / (1.0 + abs(0.1 - 0.2j) ** 2) ** 2
    assert res == pytest.approx(psi_xx, rel=1e-2)


def test_hessian_block_cross_term(cyl, xgrid16):
    u = quadratic_field(cyl, xgrid16, {"b": 1.0}, variable="w")
    blk = hessian_block(u, 0, (8, 4), ChartPoint(0, 0.0))
    assert blk[0, 1] == pytest.approx(1.0, abs=1e-10)
    assert blk[1, 0] == pytest.approx(np.conj(blk[0, 1]), abs=1e-14)


def test_wzw_residual_constant_field(cyl, xgrid16):
    uc = field_from_xfunction(cyl, xgrid16, lambda c, x: np.full(np.shape(x), 2.2))
    assert abs(wzw_residual(uc, (8, 3), ChartPoint(0, 0.2))) < 1e-12


def test_optimal_disc_direction(cyl, xgrid16):
    u = quadratic_field(cyl, xgrid16, {"b": 1.0}, variable="w")
    d = optimal_disc(u, (8, 4), ChartPoint(0, 0.0))
    assert d.direction == pytest.approx(-1.0, abs=5e-3)
    # z-independent field: constant disc
    phi = field_from_xfunction(cyl, xgrid16, catalog_potential("radial:a=0.5")[0])
    d0 = optimal_disc(phi, (8, 4), ChartPoint(0, 0.3))
    assert abs(d0.direction) < 1e-10


def test_optimal_disc_requires_fiberwise_psh(cyl, xgrid16):
    u = quadratic_field(cyl, xgrid16, {"e": -2.0}, variable="w")
    with pytest.raises(NotFiberwisePsh):
        optimal_disc(u, (8, 4), ChartPoint(0, 0.1))


def test_schur_bound_constant_disc_flat_field(cyl, xgrid16):
    u0 = field_from_xfunction(cyl, xgrid16, ZERO)
    disc = HolomorphicDisc(u0.node_w((8, 4)), 0, 0.2 + 0.1j, 0.0, 0.5)
    lhs, rhs = schur_disc_bound(u0, disc)
    assert abs(lhs) < 1e-10 and abs(rhs) < 1e-10


def test_schur_bound_flat_field_any_disc(cyl, xgrid16):
    # for u = 0 the composite is psi(f(w)), subharmonic along holomorphic
    # discs: lhs >= 0 = rhs
    u0 = field_from_xfunction(cyl, xgrid16, ZERO)
    disc = HolomorphicDisc(u0.node_w((8, 4)), 0, 0.2 + 0.1j, 0.8 - 0.3j, 0.5)
    lhs, rhs = schur_disc_bound(u0, disc)
    assert rhs == pytest.approx(0.0, abs=1e-10)
    assert lhs >= -1e-10


def test_schur_equality_random_quadratics(cyl, xgrid16):
    rng = np.random.default_rng(42)
    h = max(cyl.spacings[0], cyl.spacings[1], xgrid16.fd_step)
    tol = 10 * h * h
    for _ in range(25):
        coeffs = {
            "a1": rng.uniform(-0.2, 0.4), "b": 0.3 * (rng.standard_normal()
                                                      + 1j * rng.standard_normal()),
            "e": rng.uniform(0.0, 0.3),
            "c2": 0.2 * (rng.standard_normal() + 1j * rng.standard_normal()),
        }
        u = quadratic_field(cyl, xgrid16, coeffs)
        x0 = ChartPoint(0, complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)))
        it, is_ = int(rng.integers(1, 16)), int(rng.integers(0, 16))
        d = optimal_disc(u, (it, is_), x0)
        lhs, rhs = schur_disc_bound(u, d)
        assert abs(lhs - rhs) <= tol
        # generic competitor respects the one-sided bound
        d2 = HolomorphicDisc(d.center, d.chart, d.base,
                             d.direction + 0.4 * (rng.standard_normal()
                                                  + 1j * rng.standard_normal()),
                             d.radius)
        lhs2, rhs2 = schur_disc_bound(u, d2)
        assert lhs2 >= rhs2 - tol


def test_schur_equality_richardson_sharpens(interval, xgrid16):
    # the optimal-disc equality gap is O(h^2): refine the t grid and watch
    # the gap contract by ~4
    gaps = []
    for n in (9, 17):
        dom = BoxDomain((0.0,), (1.0,), (n,))
        u = quadratic_field(dom, xgrid16, {"a1": 0.25, "b": 0.2 + 0.1j, "e": 0.2},
                            variable="w")
        x0 = ChartPoint(0, 0.3 - 0.1j)
        d = optimal_disc(u, (n // 2,), x0, x_step=1.0 / (2 * n))
        lhs, rhs = schur_disc_bound(u, d, x_step=1.0 / (2 * n))
        gaps.append(abs(lhs - rhs))
    assert 2.5 <= gaps[0] / gaps[1] <= 6.0


def test_graph_defect_flat_and_concave(cyl, xgrid16):
    fam = DiscFamily(n_angles=8, magnitudes=(0.5, 1.0), max_bases=12)
    u0 = field_from_xfunction(cyl, xgrid16, ZERO)
    assert graph_subharmonicity_defect(u0, family=fam) >= -1e-10
    # u = -|zeta|^2 is strictly superharmonic in w: defect < 0
    un = quadratic_field(cyl, xgrid16, {"a1": -1.0})
    assert graph_subharmonicity_defect(un, family=fam) < -0.5


def test_graph_defect_explicit_disc_laplacian(interval, xgrid16):
    # u = -t^2 on the interval: complex Laplacian along the constant disc
    # is u_wwbar = -1/2
    taus = np.linspace(0.0, 1.0, 17)
    u = field_from_profile_terms(interval, xgrid16, [(-taus**2, ONE)])
    disc = HolomorphicDisc(complex(taus[8]), 0, 0.1, 0.0, 0.2)
    lap = disc_graph_laplacian(u, disc)
    assert lap == pytest.approx(-0.5, abs=1e-10)


def test_pullback_probe_fields_pass_subharmonicity(cyl, xgrid16):
    fam = DiscFamily(n_angles=8, magnitudes=(0.5, 1.0), max_bases=12,
                     max_base_radius=0.8)
    h = max(cyl.spacings)
    for y0, c in ((0.3 + 0.2j, 0.0), (-0.4j, 0.05 + 0.02j)):
        probe = pullback_probe_field(cyl, xgrid16, y0, c)
        defect = graph_subharmonicity_defect(probe, family=fam)
        assert defect >= -10 * h * h


def test_sup_over_x_examples(interval, xgrid16):
    phi = catalog_potential("bump:eps=0.5")[0]
    u = field_from_xfunction(interval, xgrid16, phi)
    val = sup_over_X(u, (8,))
    # bump eps/2 * 2r/(1+r^2) peaks at r=1 with value eps/2
    assert val == pytest.approx(0.25, abs=1e-2)
    refined = sup_over_X(u, (8,), refine=True)
    assert refined >= val
    assert refined <= 0.25 + 1e-6


def test_dist_axioms(interval, xgrid16):
    phi_a = catalog_potential("radial:a=0.7")[0]
    phi_b = catalog_potential("bump:eps=0.4")[0]
    u = field_from_xfunction(interval, xgrid16, phi_a)
    v = field_from_xfunction(interval, xgrid16, phi_b)
    idx = (8,)
    assert dist(u, u, idx) == 0.0
    assert dist(u, v, idx) == dist(v, u, idx)
    assert dist(u, v, idx) >= abs(delta_dist(u, v, idx))
    # constants shift delta by -+c
    w = field_from_profile_terms(interval, xgrid16,
                                 [(np.ones(17), phi_a), (0.3 * np.ones(17), ONE)])
    assert dist(u, w, idx) == pytest.approx(0.3, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_dist_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    dom = BoxDomain((0.0,), (1.0,), (5,))
    from wzwlab.geometry import quadrature_grid
    grid = quadrature_grid(8)
    fields = []
    for _ in range(3):
        a = rng.uniform(-0.8, 1.5)
        eps = rng.uniform(-0.8, 0.8)
        fields.append(field_from_xfunction(
            dom, grid, catalog_potential(f"radial:a={a}+bump:eps={eps}")[0]))
    u, v, w = fields
    for idx in ((0,), (2,), (4,)):
        assert dist(u, w, idx) <= dist(u, v, idx) + dist(v, w, idx) + 1e-12


def test_dist_grid_mismatch(interval, xgrid16, xgrid32):
    u = field_from_xfunction(interval, xgrid16, ZERO)
    v = field_from_xfunction(interval, xgrid32, ZERO)
    with pytest.raises(GridMismatch):
        dist(u, v, (0,))


def test_discrete_subharmonicity(interval):
    t = interval.axis_nodes(0)
    harmonic = 0.3 + 0.7 * t
    assert discrete_subharmonicity_defect(harmonic, interval) >= -1e-14
    concave = -t * t
    h = interval.spacings[0]
    assert discrete_subharmonicity_defect(concave, interval) == pytest.approx(
        -h * h, rel=1e-10)


def test_conformality_cases():
    assert conformality_test(np.diag([np.exp(0.3j), np.exp(-1.1j)]), 1e-10)
    assert conformality_test(np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex),
                             1e-10)
    assert not conformality_test(np.diag([1.0, 2.0]).astype(complex), 1e-6)


def test_max_principle_for_probe_below_envelope(envelopes_a, envelopes_b):
    u = envelopes_b[8].field
    v = envelopes_a[8].field
    sup_d, sup_bd = max_principle_check(u, v)
    assert sup_d <= sup_bd + 1e-10
    same_d, same_bd = max_principle_check(v, v)
    assert same_d == 0.0 and same_bd == 0.0


def test_superharmonicity_probe_margin(interval, xgrid16):
    taus = np.linspace(0.0, 1.0, 17)
    phi = catalog_potential("radial:a=0.5")[0]
    # concave-in-t field: genuinely superharmonic on graphs
    u_super = field_from_profile_terms(interval, xgrid16,
                                       [(-0.4 * taus**2, ONE),
                                        (np.ones(17), phi)])
    probes = [field_from_xfunction(interval, xgrid16, phi),
              field_from_profile_terms(interval, xgrid16, [(0.5 * taus, ONE)])]
    assert superharmonicity_probe_margin(u_super, probes) >= -1e-10
    # convex-in-t field fails against the trivial probe
    u_sub = field_from_profile_terms(interval, xgrid16, [(0.4 * taus**2, ONE)])
    assert superharmonicity_probe_margin(u_sub, probes) < -1e-4


def test_residual_field_matches_pointwise(envelopes_a):
    env = envelopes_a[4]
    res = wzw_residual_field(env.field, x_indices=np.arange(0, 64))
    val = wzw_residual(env.field, (5,), env.xgrid.node(17))
    assert res[4, 17] == pytest.approx(val, rel=1e-10)


def test_sign_dichotomy_one_sweep_field(boundary_a, xgrid16):
    # a deliberately non-harmonic matrix field (flat init, one sweep) must
    # betray itself: strictly negative residual or a failed disc test
    from wzwlab.matrix_harmonic import interval_boundary, solve_harmonic_dirichlet
    from wzwlab.quantization import hilbert_map
    from wzwlab.errors import SolverDiverged
    from wzwlab.fields import field_from_grams

    dom = BoxDomain((0.0,), (1.0,), (17,))
    k = 4
    g0 = hilbert_map(boundary_a.at((0,)), k, xgrid16)
    g1 = hilbert_map(boundary_a.at((32,)), k, xgrid16)
    boundary = interval_boundary(dom, g0, g1)
    try:
        solve_harmonic_dirichlet(dom, boundary, 1e-30, max_sweeps=1,
                                 init="flat", check_every=1)
        raise AssertionError("one sweep cannot converge")
    except SolverDiverged:
        pass
    # reproduce the one-sweep state
    from wzwlab.matrix_harmonic import _init_field, _Stencil, _local_solve
    vals = _init_field(dom, boundary, "flat")
    st_ = _Stencil(dom)
    flat = vals.reshape(-1, k + 1, k + 1)
    for color in st_.color_sets:
        if color.size == 0:
            continue
        pm = []
        for plus_idx, minus_idx in st_.neighbors:
            pm.append(flat[plus_idx[color]])
            pm.append(flat[minus_idx[color]])
        x, failed = _local_solve(flat[color], pm, st_.weights)
        flat[color] = x
    field = field_from_grams(dom, xgrid16, vals, k)
    res = wzw_residual_field(field, x_indices=np.arange(0, 1024, 4))
    fam = DiscFamily(n_angles=8, magnitudes=(1.0,), max_bases=8)
    defect = graph_subharmonicity_defect(field, family=fam)
    assert res.min() < -1e-3 or defect < -1e-3


def test_dist_zero_iff_equal(interval, xgrid16):
    phi = catalog_potential("radial:a=0.7")[0]
    u = field_from_xfunction(interval, xgrid16, phi)
    v = field_from_xfunction(interval, xgrid16, catalog_potential("radial:a=0.71")[0])
    prof_same = dist_profile(u, u)
    assert np.max(prof_same) == 0.0
    # distinct fields separate at every t
    assert np.min(dist_profile(u, v)) > 0.0


def test_disc_out_of_chart_rejected():
    from wzwlab.errors import DiscOutOfChart

    with pytest.raises(DiscOutOfChart):
        HolomorphicDisc(0.5 + 0.0j, 0, 1.2, 3.0, 0.2)
