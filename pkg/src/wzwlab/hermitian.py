"""Batched helpers for Hermitian positive-definite matrices.

All functions accept stacks shaped (..., N, N).  Matrix powers, logs and
exponentials go through the Hermitian eigendecomposition, which at the
dimensions used here (N <= 33) is exact and cheap.
"""

from __future__ import annotations

import numpy as np

from .errors import NotPositiveDefinite


def ctranspose(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + ctranspose(a))


def is_positive_definite(a: np.ndarray) -> bool:
    """Cholesky certificate, applied to every matrix in the stack."""
    try:
        np.linalg.cholesky(a)
        return True
    except np.linalg.LinAlgError:
        return False


def check_positive_definite(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape[-1] != a.shape[-2]:
        raise NotPositiveDefinite(f"{what} is not square: shape {a.shape}")
    if np.max(np.abs(a - ctranspose(a))) > 1e-10 * max(1.0, np.max(np.abs(a))):
        raise NotPositiveDefinite(f"{what} is not Hermitian")
    if not is_positive_definite(a):
        raise NotPositiveDefinite(f"{what} failed the Cholesky PD certificate")
    return a


def eig_apply(a: np.ndarray, fn) -> np.ndarray:
    """U fn(diag) U^H for Hermitian stacks."""
    w, u = np.linalg.eigh(a)
    fw = fn(w)
    return hermitize(np.einsum("...ij,...j,...kj->...ik", u, fw, np.conj(u)))


def sqrtm_pd(a: np.ndarray) -> np.ndarray:
    return eig_apply(a, np.sqrt)


def inv_sqrtm_pd(a: np.ndarray) -> np.ndarray:
    return eig_apply(a, lambda w: 1.0 / np.sqrt(w))


def logm_pd(a: np.ndarray) -> np.ndarray:
    return eig_apply(a, np.log)


def expm_herm(a: np.ndarray) -> np.ndarray:
    return eig_apply(a, np.exp)


def powm_pd(a: np.ndarray, t) -> np.ndarray:
    """a^t for PD stacks; t may be a scalar or an array broadcast over the
    stack dimensions."""
    w, u = np.linalg.eigh(a)
    t = np.asarray(t, dtype=float)
    fw = np.exp(t[..., None] * np.log(w)) if t.ndim else w ** t
    return hermitize(np.einsum("...ij,...j,...kj->...ik", u, fw, np.conj(u)))


def frobenius(a: np.ndarray) -> np.ndarray:
    """Frobenius norm over the trailing matrix axes."""
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def log_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine-invariant distance ||log(a^{-1/2} b a^{-1/2})||_F."""
    isa = inv_sqrtm_pd(a)
    return frobenius(logm_pd(hermitize(isa @ b @ isa)))
