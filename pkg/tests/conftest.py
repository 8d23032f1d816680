import numpy as np
import pytest

from wzwlab.domains import BoxDomain
from wzwlab.envelope import BoundaryData, quantized_envelope
from wzwlab.geometry import quadrature_grid

# acceptance catalog: two admissible boundary pairs used across the suite;
# A is the primary pipeline data, B a distinct pair for distance checks
CATALOG_A = ("zero", "radial:a=0.8+bump:eps=0.25")
CATALOG_B = ("const:c=0.4+bump:eps=-0.2", "radial:a=-0.5")


def random_pd(rng: np.random.Generator, n: int, spread: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (a + a.conj().T)
    w, u = np.linalg.eigh(h)
    w = np.exp(spread * np.tanh(w))
    return (u * w) @ u.conj().T


@pytest.fixture(scope="session")
def xgrid16():
    return quadrature_grid(16)


@pytest.fixture(scope="session")
def xgrid32():
    return quadrature_grid(32)


@pytest.fixture(scope="session")
def xgrid64():
    return quadrature_grid(64)


@pytest.fixture(scope="session")
def interval33():
    return BoxDomain((0.0,), (1.0,), (33,))


@pytest.fixture(scope="session")
def boundary_a(interval33):
    return BoundaryData.interval(interval33, *CATALOG_A)


@pytest.fixture(scope="session")
def boundary_b(interval33):
    return BoundaryData.interval(interval33, *CATALOG_B)


@pytest.fixture(scope="session")
def envelopes_a(boundary_a, xgrid32):
    """Catalog-A envelopes at k = 4, 8, 16, 32 (closed-form geodesic)."""
    return {k: quantized_envelope(boundary_a, k, xgrid32) for k in (4, 8, 16, 32)}


@pytest.fixture(scope="session")
def envelopes_b(boundary_b, xgrid32):
    return {k: quantized_envelope(boundary_b, k, xgrid32) for k in (4, 8, 16)}
