"""Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Everything that
needs a spectrum goes through :func:`hermitian_eigen`, which symmetrizes its
input after checking Hermiticity, so rounding noise from channel arithmetic
never leaks into eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-10
MAX_QUBITS = 12


class NotHermitianError(ValueError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class HermitianEigen:
    values: np.ndarray   # ascending, real
    vectors: np.ndarray  # unitary, eigenvectors as columns

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def hermiticity_defect(a) -> float:
    m = as_matrix(a)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(a) <= tol


def symmetrize(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return (A + A^dagger)/2, refusing inputs further than `tol` from Hermitian."""
    m = as_matrix(a)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |A - A^dagger| = {defect:.3e})")
    return 0.5 * (m + m.conj().T)


def tensor(*mats) -> np.ndarray:
    """Kronecker product; the leftmost factor is the most significant index."""
    if not mats:
        raise ValueError("tensor needs at least one factor")
    return reduce(np.kron, (as_matrix(m) for m in mats))


def commutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def jacobi_eigen(a, rel_tol: float = 1e-12, max_sweeps: int = 100) -> HermitianEigen:
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Sweeps over all (p, q) pairs in row order.  Each rotation first removes
    the phase of A[p, q] and then applies a real Givens rotation.  Stops when
    the off-diagonal Frobenius mass drops below ``rel_tol`` times the
    diagonal mass.
    """
    h = symmetrize(a).copy()
    d = h.shape[0]
    v = np.eye(d, dtype=np.complex128)

    def off_mass():
        return np.linalg.norm(h - np.diag(np.diag(h)))

    for _ in range(max_sweeps):
        diag_mass = np.linalg.norm(np.diag(h))
        if off_mass() <= rel_tol * diag_mass or off_mass() == 0.0:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = h[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                app, aqq = h[p, p].real, h[q, q].real
                theta = (aqq - app) / (2.0 * r)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # columns p, q of the unitary U = diag(.., 1, .., e^{-i phi}, ..) @ Givens
                up = np.array([c, -s * np.conj(phase)])
                uq = np.array([s, c * np.conj(phase)])
                u = np.column_stack([up, uq])
                cols = h[:, [p, q]] @ u
                h[:, p], h[:, q] = cols[:, 0], cols[:, 1]
                rows = u.conj().T @ h[[p, q], :]
                h[p, :], h[q, :] = rows[0], rows[1]
                h[p, q] = h[q, p] = 0.0
                vc = v[:, [p, q]] @ u
                v[:, p], v[:, q] = vc[:, 0], vc[:, 1]
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    values = np.diag(h).real.copy()
    order = np.argsort(values, kind="stable")
    return HermitianEigen(values[order], v[:, order])


def hermitian_eigen(a, method: str = "lapack") -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` uses
    :func:`jacobi_eigen`.  Both are deterministic for identical input.
    """
    h = symmetrize(a)
    if method == "lapack":
        values, vectors = np.linalg.eigh(h)
        return HermitianEigen(values, vectors)
    if method == "jacobi":
        return jacobi_eigen(h)
    raise ValueError(f"unknown eigen method {method!r}")


def hermitian_eigvals(a) -> np.ndarray:
    return np.linalg.eigvalsh(symmetrize(a))


def trace_norm(a) -> float:
    return float(np.sum(np.abs(hermitian_eigvals(a))))


def operator_norm(a) -> float:
    return float(np.max(np.abs(hermitian_eigvals(a))))


def sign_reflection(a) -> np.ndarray:
    """Hermitian unitary sum_k sign(l_k)|v_k><v_k| with sign(0) = +1."""
    eig = hermitian_eigen(a)
    signs = np.where(eig.values < 0.0, -1.0, 1.0)
    return (eig.vectors * signs) @ eig.vectors.conj().T


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (z + z.conj().T)


def random_hermitian_ball(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Random Hermitian matrix with operator norm <= 1.

    Built as V diag(u) V^dagger with u uniform in [-1, 1] and V the
    eigenvectors of a random Hermitian matrix.  With ``size`` given, returns a
    stack of shape (size, d, d).
    """
    shape = (d, d) if size is None else (size, d, d)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    h = 0.5 * (z + np.swapaxes(z, -1, -2).conj())
    _, vecs = np.linalg.eigh(h)
    u = rng.uniform(-1.0, 1.0, shape[:-1])
    return (vecs * u[..., None, :]) @ np.swapaxes(vecs, -1, -2).conj()
