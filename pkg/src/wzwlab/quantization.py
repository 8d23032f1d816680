"""Finite-dimensional side: sections of O(k), the Hilbert map and the
Fubini-Study map.

Sections of O(k) are represented in the monomial basis s_i = x^i
(i = 0..k) of chart 0, which reads x^(k-i) in chart 1.  With the fiber
weight e^{-k psi} the pointwise pairing is

    h^k(s_i, s_j)(x) = x^i conj(x)^j (1 + |x|^2)^{-k}.

The basis is deliberately not L^2-orthonormalised: the Gram matrix carries
all metric content, so there is no hidden renormalisation between the
Hilbert and Fubini-Study directions.

For the flat potential the Gram matrix is diagonal with the beta-integral
values

    H_k(0)_ii = 2*pi * i! (k-i)! / (k+1)!,

and FS_k(H_k(0)) is the constant (1/k) log((k+1)/(2*pi)) by the binomial
identity sum_i C(k,i) |x|^{2i} = (1+|x|^2)^k.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotOmegaPsh, QuadratureTooCoarse, SingularGram
from .geometry import XGrid, as_xfunction, hessian_on_grid, psi_values
from .hermitian import hermitize

#: admission tolerance for the grid omega-psh certificate
PSH_TOLERANCE = -1e-6


class SectionBasis:
    """Monomial basis of H^0(X, O(k)) with chart-aware evaluation."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError(f"tensor power k must be >= 1, got {k}")
        self.k = k
        self.n = k + 1

    def monomials(self, chart_ids: np.ndarray, coords: np.ndarray) -> np.ndarray:
        """Matrix M[p, i] = s_i(x_p) in each point's chart."""
        coords = np.asarray(coords, dtype=complex)
        chart_ids = np.asarray(chart_ids)
        powers = coords[..., None] ** np.arange(self.n)
        # chart 1 carries the reversed exponents s_i = x^(k-i)
        return np.where((chart_ids == 0)[..., None], powers, powers[..., ::-1])

    def log_metric_weight(self, coords: np.ndarray) -> np.ndarray:
        """log of the fiber weight (1+|x|^2)^{-k}; chart-agnostic formula."""
        return -self.k * psi_values(coords)

    def pairing_diag(self, chart_ids, coords) -> np.ndarray:
        """h^k(s_i, s_i)(x) for all i: shape (..., k+1)."""
        m = self.monomials(chart_ids, coords)
        return np.abs(m) ** 2 * np.exp(self.log_metric_weight(coords))[..., None]


def flat_gram_diagonal(k: int) -> np.ndarray:
    """Closed-form H_k(0) diagonal: 2*pi * i!(k-i)!/(k+1)!."""
    i = np.arange(k + 1, dtype=float)
    # i!(k-i)!/(k+1)! computed stably through the log-gamma function
    from scipy.special import gammaln

    logv = gammaln(i + 1) + gammaln(k - i + 1) - gammaln(k + 2)
    return 2.0 * np.pi * np.exp(logv)


def balanced_constant(k: int) -> float:
    """FS_k(H_k(0)) = (1/k) log((k+1)/(2*pi)), uniform on X."""
    return float(np.log((k + 1) / (2.0 * np.pi)) / k)


def hilbert_map(phi, k: int, grid: XGrid, *, check_psh: bool = True) -> np.ndarray:
    """Gram matrix H_k(phi)_ij = int s_i conj(s_j) e^{-k(psi + phi)} omega.

    ``phi`` is a constant or a vectorized chart-aware callable.  The input
    must be omega-psh on the grid (checked with the finite-difference
    Hessian at tolerance 1e-6 unless ``check_psh`` is disabled).
    """
    phi = as_xfunction(phi)
    basis = SectionBasis(k)
    if check_psh:
        h = hessian_on_grid(phi, grid)
        imin = int(np.argmin(h))
        if h[imin] < PSH_TOLERANCE:
            raise NotOmegaPsh(
                f"potential fails the omega-psh certificate: "
                f"(phi+psi)_xxbar = {h[imin]:.3e} at node {imin} "
                f"(chart {int(grid.chart_ids[imin])}, x = {grid.coords[imin]:.4f})"
            )
    phi_vals = grid.sample(phi)
    log_w = basis.log_metric_weight(grid.coords) - k * phi_vals
    c = grid.weights * np.exp(log_w)
    m = basis.monomials(grid.chart_ids, grid.coords)
    gram = hermitize(np.einsum("p,pi,pj->ij", c, m, np.conj(m), optimize=True))
    try:
        np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise QuadratureTooCoarse(
            f"Gram matrix for k={k} failed the PD certificate at resolution "
            f"{grid.resolution}"
        )
    return gram


class FSPotential:
    """FS_k(G) as a chart-aware callable potential on X.

    The value is the closed form

        FS_k(G)(x) = (1/k) log( v(x) G^{-1} v(x)^H * (1+|x|^2)^{-k} ),

    v(x) the row of basis monomials, which realises the supremum of
    h^k(s, s)(x) over the G-unit ball of sections (the sup of |l(s)|^2 of an
    evaluation functional over the unit ball of the inner product G is
    l G^{-1} l^*; verified against direct maximisation in the test suite).
    """

    def __init__(self, gram: np.ndarray, k: int):
        gram = np.asarray(gram, dtype=complex)
        if gram.shape != (k + 1, k + 1):
            raise SingularGram(
                f"Gram matrix shape {gram.shape} does not match k={k}"
            )
        try:
            self._chol = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise SingularGram("Gram matrix is singular or not positive definite")
        self.gram = gram
        self.k = k
        self.basis = SectionBasis(k)

    def __call__(self, chart_ids: np.ndarray, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=complex)
        shape = coords.shape
        m = self.basis.monomials(np.asarray(chart_ids).ravel(), coords.ravel())
        y = solve_triangular(self._chol, m.T.conj(), lower=True, check_finite=False)
        q = np.sum(np.abs(y) ** 2, axis=0)
        vals = (np.log(q) - self.k * psi_values(coords.ravel())) / self.k
        return vals.reshape(shape)


def fubini_study(gram: np.ndarray, k: int, chart_ids, coords) -> np.ndarray:
    """Evaluate FS_k(gram) at the given points."""
    return FSPotential(gram, k)(np.asarray(chart_ids), np.asarray(coords))


def bergman_error(phi, k: int, grid: XGrid, *, check_psh: bool = True) -> float:
    """sup over the grid of |FS_k(H_k(phi)) - phi|."""
    phi = as_xfunction(phi)
    gram = hilbert_map(phi, k, grid, check_psh=check_psh)
    fs = FSPotential(gram, k)
    return float(np.max(np.abs(grid.sample(fs) - grid.sample(phi))))


def sphere_sup_reference(gram: np.ndarray, k: int, chart: int, coord: complex,
                         n_samples: int, rng: np.random.Generator) -> float:
    """Direct maximisation of h^k(s,s)(x) over the G-unit sphere.

    Independent oracle for the FSPotential closed form: random sections on
    the G-unit sphere plus the analytic maximiser are evaluated directly.
    Returns (1/k) log of the best value found.
    """
    basis = SectionBasis(k)
    n = k + 1
    v = basis.monomials(np.array([chart]), np.array([coord]))[0]
    gram_inv = np.linalg.inv(gram)
    # analytic maximiser of |v a|^2 subject to a^H G a <= 1
    a_star = gram_inv @ np.conj(v)
    a_star = a_star / np.sqrt(np.real(np.conj(a_star) @ gram @ a_star))
    samples = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    norms = np.sqrt(np.real(np.einsum("si,ij,sj->s", np.conj(samples), gram, samples)))
    samples = samples / norms[:, None]
    cand = np.vstack([samples, a_star[None, :]])
    vals = np.abs(cand @ v) ** 2
    best = float(np.max(vals)) * np.exp(-k * float(psi_values(np.array([coord]))[0]))
    return float(np.log(best) / k)
