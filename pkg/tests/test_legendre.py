import numpy as np
import pytest

from wzwlab.domains import BoxDomain
from wzwlab.envelope import catalog_potential
from wzwlab.fields import (field_from_profile_terms, field_from_xfunction,
                           pullback_probe_field)
from wzwlab.legendre import (ConverseProbeReport, diastasis_matrix,
                             duality_converse_probe, duality_forward_check,
                             legendre_transform, order_reversal_violation)
from wzwlab.wzw_calculus import DiscFamily, graph_subharmonicity_defect

ONE = lambda c, x: np.ones(np.shape(x))
ZERO = lambda c, x: np.zeros(np.shape(x))


@pytest.fixture(scope="module")
def dom():
    return BoxDomain((0.0,), (1.0,), (9,))


@pytest.fixture(scope="module")
def dmat(xgrid16):
    return diastasis_matrix(xgrid16)


def test_diastasis_matrix_properties(xgrid16, dmat):
    finite = np.isfinite(dmat) & np.isfinite(dmat.T)
    assert np.all(dmat[finite] > -1e-12)
    assert np.max(np.abs(dmat[finite] - dmat.T[finite])) < 1e-12
    assert np.all(np.abs(np.diag(dmat)) < 1e-12)


def test_transform_of_zero_is_zero(dom, xgrid16, dmat):
    u0 = field_from_xfunction(dom, xgrid16, ZERO)
    hat = legendre_transform(u0, dmat)
    # the defining supremum saturates at the conjugate node
    assert np.max(np.abs(hat.values)) < 1e-12


def test_transform_constant_shift(dom, xgrid16, dmat):
    c = 0.42
    u = field_from_xfunction(dom, xgrid16, lambda ci, x: np.full(np.shape(x), c))
    hat = legendre_transform(u, dmat)
    assert np.max(np.abs(hat.values + c)) < 1e-12


def test_transform_saturates_on_diastasis_wells(dom, xgrid16, dmat):
    # u(z, x) = -D(x, y0bar-pair) for a grid node (clamped to keep the
    # field finite): uhat = 0 at the paired dual node, where the defining
    # pair saturates the sup
    j = 137
    col = np.minimum(dmat[:, j], 50.0)
    u = field_from_xfunction(dom, xgrid16, lambda ci, x, c=col: -c)
    hat = legendre_transform(u, dmat)
    assert abs(hat.values[(4,)][j]) < 1e-12


def test_order_reversal(dom, xgrid16, dmat):
    phi = catalog_potential("radial:a=0.7+bump:eps=0.2")[0]
    u = field_from_xfunction(dom, xgrid16, phi)
    v = field_from_profile_terms(dom, xgrid16,
                                 [(np.ones(9), phi), (0.25 * np.ones(9), ONE)])
    # u <= v pointwise, so vhat <= uhat
    assert order_reversal_violation(u, v, dmat) <= 1e-12


def test_one_sided_involution(dom, xgrid16, dmat):
    phi = catalog_potential("radial:a=0.6")[0]
    u = field_from_xfunction(dom, xgrid16, phi)
    double = legendre_transform(legendre_transform(u, dmat), dmat)
    # grid modulus bound: adjacent-node variation of the ingredients
    slack = 5e-3 + float(np.max(np.abs(np.diff(u.values[(4,)]))))
    assert np.min(double.values - u.values) >= -slack
    # exact involution is not asserted: the double transform can sit above
    assert np.max(double.values - u.values) < 1.0


def test_probe_identity_subharmonic(xgrid16):
    # the duality proof's probe 2 Re psi_C(x, conj(f)) - psi is a graph
    # subsolution for constant and moving f
    from wzwlab.domains import CylinderDomain

    cyl = CylinderDomain(1.0, np.e, 9, 8)
    h = max(cyl.spacings)
    fam = DiscFamily(n_angles=8, magnitudes=(0.5, 1.0), max_bases=10)
    probe = pullback_probe_field(cyl, xgrid16, 0.25 - 0.15j, 0.04j)
    assert graph_subharmonicity_defect(probe, family=fam) >= -10 * h * h


def test_forward_duality_on_superharmonic_fields(dom, xgrid16):
    taus = np.linspace(0.0, 1.0, 9)
    phi = catalog_potential("radial:a=0.6+bump:eps=0.2")[0]
    h = max(1.0 / 8, xgrid16.fd_step)
    for profile in (-0.5 * taus**2, 0.4 * taus, 0.3 * taus - 0.5 * taus**2):
        u = field_from_profile_terms(dom, xgrid16,
                                     [(profile, ONE), (np.ones(9), phi)])
        _, defect = duality_forward_check(u)
        assert defect >= -10 * h * h


def test_forward_duality_rejects_via_probe_margin(dom, xgrid16):
    # a strictly convex-in-t field fails the superharmonicity precondition
    taus = np.linspace(0.0, 1.0, 9)
    u_bad = field_from_profile_terms(dom, xgrid16, [(0.8 * taus**2, ONE)])
    probes = [field_from_xfunction(dom, xgrid16, ZERO)]
    margin, _ = duality_forward_check(u_bad, probes=probes)
    assert margin < -1e-4


def test_converse_probe_reports_only(dom, xgrid16, dmat):
    phi = catalog_potential("radial:a=0.5")[0]
    u = field_from_xfunction(dom, xgrid16, phi)
    probes = [field_from_xfunction(dom, xgrid16, ZERO)]
    report = duality_converse_probe(u, probes, input_margin=0.0, dmatrix=dmat)
    assert isinstance(report, ConverseProbeReport)
    assert np.isfinite(report.min_margin)
