"""Exact dense linear algebra for 2x2 and 3x3 Hermitian generators.

Eigendecomposition uses cyclic complex Jacobi rotations (one rotation is
exact for d=2). Propagators are assembled from the eigensystem so every step
is unitary to machine precision, which matters for runs of 10^4-10^6 steps.

All routines accept a single matrix of shape (d, d) or a stack (..., d, d);
each matrix in a stack is processed by the same sequence of elementwise
operations, so results do not depend on how a batch is split.
"""
from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
OFFDIAG_TOL = 1e-14
MAX_SWEEPS = 50


class NotHermitianError(ValueError):
    """Raised when a generator fails the Hermiticity check."""


def hermiticity_deviation(H: np.ndarray) -> float:
    H = np.asarray(H)
    return float(np.max(np.abs(H - np.swapaxes(H, -1, -2).conj()))) if H.size else 0.0


def _check_hermitian(H) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim < 2 or H.shape[-1] != H.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {H.shape}")
    if H.shape[-1] not in (1, 2, 3):
        raise ValueError(f"dimension {H.shape[-1]} not supported (d <= 3)")
    dev = hermiticity_deviation(H)
    if dev >= HERMITIAN_TOL:
        raise NotHermitianError(f"matrix is not Hermitian: max|H - H^dagger| = {dev:.3e}")
    return H


def _rotate(A: np.ndarray, V: np.ndarray, p: int, q: int, active: np.ndarray) -> None:
    # Zero A[:, p, q] in place: phase-align the pair, then a real Givens rotation.
    b = A[:, p, q]
    mag = np.abs(b)
    live = (mag > 0.0) & active
    phase = np.where(live, b / np.where(live, mag, 1.0), 1.0)
    theta = np.where(live, 0.5 * np.arctan2(2.0 * mag, A[:, p, p].real - A[:, q, q].real), 0.0)
    c = np.cos(theta)[:, None]
    s = np.sin(theta)[:, None]
    ph = phase[:, None]
    cph = ph.conj()
    Ap, Aq = A[:, :, p].copy(), A[:, :, q].copy()
    A[:, :, p] = c * Ap + s * cph * Aq
    A[:, :, q] = -s * Ap + c * cph * Aq
    Ap, Aq = A[:, p, :].copy(), A[:, q, :].copy()
    A[:, p, :] = c * Ap + s * ph * Aq
    A[:, q, :] = -s * Ap + c * ph * Aq
    A[live, p, q] = 0.0
    A[live, q, p] = 0.0
    Vp, Vq = V[:, :, p].copy(), V[:, :, q].copy()
    V[:, :, p] = c * Vp + s * cph * Vq
    V[:, :, q] = -s * Vp + c * cph * Vq


def hermitian_eig(H) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvector columns of Hermitian H.

    Raises NotHermitianError carrying the measured deviation for
    non-Hermitian input. Degenerate eigenspaces come back as some
    orthonormal basis; callers that need smooth tracking must use the
    analytic model eigensystems instead.
    """
    H = _check_hermitian(H)
    shape = H.shape
    d = shape[-1]
    A = H.reshape(-1, d, d)
    A = 0.5 * (A + np.swapaxes(A, -1, -2).conj())
    V = np.broadcast_to(np.eye(d, dtype=complex), A.shape).copy()
    scale = np.maximum(1.0, np.abs(A).max(axis=(-1, -2)))
    pairs = [(p, q) for p in range(d) for q in range(p + 1, d)]
    for _ in range(MAX_SWEEPS):
        if not pairs:
            break
        off = np.sqrt(sum(np.abs(A[:, p, q]) ** 2 for p, q in pairs))
        # Converged matrices are frozen, so a batch never perturbs its members.
        active = off >= OFFDIAG_TOL * scale
        if not active.any():
            break
        for p, q in pairs:
            _rotate(A, V, p, q, active)
    w = np.diagonal(A, axis1=-2, axis2=-1).real
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    V = np.take_along_axis(V, order[:, None, :], axis=-1)
    return w.reshape(shape[:-1]), V.reshape(shape)


def propagator_step(H, dt: float) -> np.ndarray:
    """exp(-i H dt) for Hermitian H (or a stack), assembled from its eigensystem."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    w, V = hermitian_eig(H)
    phased = V * np.exp(-1j * w * dt)[..., None, :]
    return matmul(phased, np.swapaxes(V, -1, -2).conj())


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Stacked small-matrix product with a fixed per-element summation order."""
    return (A[..., :, :, None] * B[..., None, :, :]).sum(axis=-2)


def matvec(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    return (A * x[..., None, :]).sum(axis=-1)


def is_unitary(U, tol: float = 1e-10) -> bool:
    U = np.asarray(U)
    eye = np.eye(U.shape[-1])
    return bool(np.max(np.abs(np.swapaxes(U, -1, -2).conj() @ U - eye)) < tol)


def check_density_matrix(rho, tol: float = 1e-9) -> None:
    """Raise ValueError unless rho is Hermitian, unit trace and PSD within tol."""
    rho = np.asarray(rho, dtype=complex)
    dev = hermiticity_deviation(rho)
    if dev > tol:
        raise ValueError(f"density matrix not Hermitian (deviation {dev:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w.min() < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {w.min():.3e}")
