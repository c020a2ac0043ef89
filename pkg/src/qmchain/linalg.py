"""Dense complex linear algebra used by the chain simulator.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_DIM = 2**22
JACOBI_THRESHOLD = 1e-14
JACOBI_MAX_SWEEPS = 100


class DimensionError(ValueError):
    """Raised when a Hilbert space would exceed the configured size guard."""


class NumericError(ArithmeticError):
    """Raised on non-finite input or a failed numerical invariant."""


class ConvergenceError(NumericError):
    """Raised when the Jacobi eigensolver hits its sweep cap."""


def max_dim() -> int:
    """Current Hilbert-dimension guard (``QMC_MAX_DIM`` overrides the default)."""
    raw = os.environ.get("QMC_MAX_DIM")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"QMC_MAX_DIM must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError("QMC_MAX_DIM must be positive")
    return value


def check_dim(total: int, what: str = "Hilbert space") -> None:
    limit = max_dim()
    if total > limit:
        raise DimensionError(f"{what} dimension {total} exceeds guard {limit} (set QMC_MAX_DIM)")


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericError(f"{name} contains NaN or Inf")
    return m


def is_hermitian(m, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def is_unitary(m, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    eye = np.eye(m.shape[0])
    return bool(np.max(np.abs(m.conj().T @ m - eye)) <= tol and np.max(np.abs(m @ m.conj().T - eye)) <= tol)


def is_psd(m, tol: float = 1e-10) -> bool:
    if not is_hermitian(m, max(tol, 1e-10)):
        return False
    return bool(hermitian_eig(m).eigenvalues[-1] >= -tol)


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    """Kronecker product, ``(a⊗b)[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    check_dim(a.shape[0] * b.shape[0], "kron row")
    check_dim(a.shape[1] * b.shape[1], "kron column")
    return np.kron(a, b)


@dataclass(frozen=True)
class HermitianEigen:
    """Eigenvalues in descending order, eigenvectors as the matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def jacobi_eigh(m, threshold: float = JACOBI_THRESHOLD, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Each pair ``(p, q)`` is annihilated by a phase fix on column ``q``
    followed by a real plane rotation. Pairs are visited row by row in a
    fixed order, so results are deterministic. Returns unsorted
    ``(eigenvalues, eigenvectors)``.
    """
    a = np.array(m, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.sqrt(np.sum(np.abs(a) ** 2))))
    for _ in range(max_sweeps):
        if _off_norm(a) <= threshold * scale:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:  # θ² would overflow; t -> 1/(2θ)
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    if _off_norm(a) <= threshold * scale:
        return np.real(np.diag(a)).copy(), v
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def default_eig_method() -> str:
    return os.environ.get("QMC_EIGEN", "lapack").strip().lower() or "lapack"


def hermitian_eig(m, tol: float = 1e-10, method: str | None = None) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    ``method`` is ``"lapack"`` (numpy ``eigh``) or ``"jacobi"``; the default
    comes from ``QMC_EIGEN`` and falls back to LAPACK.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"hermitian_eig needs a square matrix, got {m.shape}")
    if not is_hermitian(m, tol):
        raise NumericError("matrix is not Hermitian within tolerance")
    method = method or default_eig_method()
    # symmetrize so both backends see the same exact Hermitian input
    h = 0.5 * (m + m.conj().T)
    if method == "lapack":
        w, v = np.linalg.eigh(h)
    elif method == "jacobi":
        w, v = jacobi_eigh(h)
    else:
        raise ValueError(f"unknown eigen method {method!r}")
    order = np.argsort(-w, kind="stable")
    return HermitianEigen(np.asarray(w[order], dtype=float), v[:, order])


def eigvalsh(m, tol: float = 1e-10, method: str | None = None) -> np.ndarray:
    return hermitian_eig(m, tol, method).eigenvalues


def random_unitary(d: int, seed) -> np.ndarray:
    """Haar-random ``d x d`` unitary, deterministic in ``seed``.

    ``seed`` is anything ``numpy.random.default_rng`` accepts; passing a
    ``Generator`` draws from (and advances) that generator.

    QR of a complex Ginibre matrix with the phases of ``R``'s diagonal
    absorbed into ``Q``.
    """
    if d < 2:
        raise ValueError("random_unitary needs d >= 2")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_state_vector(d: int, seed) -> np.ndarray:
    """Haar-random unit vector in C^d."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)
