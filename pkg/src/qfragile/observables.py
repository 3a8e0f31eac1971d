"""Single-qubit projectors, averaging observables and their moments.

An averaging observable is (1/n) sum_i a_i with a_i acting on qubit i.  The
families that matter for the fragility parameter are rank-1 projectors given
by Bloch angles; :class:`BlochFamily` holds one (theta, phi) pair per qubit.
The string ``"P"`` stands for the canonical family of projectors onto |1>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, NotHermitianError, as_matrix, random_hermitian_ball, symmetrize
from .states import check_n

CANONICAL_P = "P"
COMMUTATOR_RESIDUE_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
ID2 = np.eye(2, dtype=np.complex128)
P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)


def bloch_vector(theta, phi) -> np.ndarray:
    theta, phi = np.asarray(theta, float), np.asarray(phi, float)
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
    )


def bloch_projector(theta: float, phi: float) -> np.ndarray:
    """(I + sin(t)cos(p) X + sin(t)sin(p) Y + cos(t) Z) / 2."""
    r = bloch_vector(theta, phi)
    return 0.5 * (ID2 + np.tensordot(r, PAULIS, axes=1))


@dataclass(frozen=True)
class BlochFamily:
    angles: np.ndarray  # shape (n, 2): theta in [0, pi], phi in [0, 2 pi)

    def __post_init__(self):
        a = np.array(self.angles, dtype=float)
        if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] < 1:
            raise ValueError(f"angles must have shape (n, 2), got {a.shape}")
        check_n(a.shape[0])
        theta, phi = a[:, 0], a[:, 1]
        if np.any(theta < 0) or np.any(theta > np.pi) or np.any(phi < 0) or np.any(phi >= 2 * np.pi):
            raise ValueError("angles out of range: need theta in [0, pi] and phi in [0, 2 pi)")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @property
    def n(self) -> int:
        return self.angles.shape[0]

    @classmethod
    def from_raw(cls, raw) -> "BlochFamily":
        """Fold unconstrained angle pairs into the canonical ranges (same projectors)."""
        a = np.array(raw, dtype=float).reshape(-1, 2)
        theta = np.mod(a[:, 0], 2 * np.pi)
        phi = a[:, 1].copy()
        flip = theta > np.pi
        theta[flip] = 2 * np.pi - theta[flip]
        phi[flip] += np.pi
        phi = np.mod(phi, 2 * np.pi)
        phi[phi >= 2 * np.pi] = 0.0
        return cls(np.stack([theta, phi], axis=1))

    @classmethod
    def canonical_p(cls, n: int) -> "BlochFamily":
        return cls(np.tile([np.pi, 0.0], (n, 1)))

    @classmethod
    def canonical_z(cls, n: int) -> "BlochFamily":
        return cls(np.zeros((n, 2)))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BlochFamily":
        theta = np.arccos(rng.uniform(-1.0, 1.0, n))
        phi = rng.uniform(0.0, 2 * np.pi, n)
        return cls(np.stack([theta, phi], axis=1))

    def vectors(self) -> np.ndarray:
        return bloch_vector(self.angles[:, 0], self.angles[:, 1])

    def projectors(self) -> list[np.ndarray]:
        return [bloch_projector(t, p) for t, p in self.angles]

    def to_json(self):
        return {"angles": self.angles.tolist()}


def as_family(fam, n: int) -> BlochFamily:
    if isinstance(fam, str):
        if fam != CANONICAL_P:
            raise ValueError(f"unknown canonical family {fam!r}")
        return BlochFamily.canonical_p(n)
    if fam.n != n:
        raise DimensionError(f"family has {fam.n} qubits, state has {n}")
    return fam


def embed(op, i: int, n: int) -> np.ndarray:
    """The single-qubit operator `op` acting on qubit i (1-based) of n."""
    if not 1 <= i <= n:
        raise IndexError(f"qubit index {i} out of range 1..{n}")
    op = as_matrix(op)
    left = np.eye(2 ** (i - 1))
    right = np.eye(2 ** (n - i))
    return np.kron(np.kron(left, op), right)


def local_sum_diag(diag_ops, n: int) -> np.ndarray:
    """Diagonal of sum_i a_i for diagonal single-qubit a_i given as (n, 2) entries."""
    bits = (np.arange(2 ** n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    return np.take_along_axis(np.asarray(diag_ops), bits.T, axis=1).sum(axis=0)


def average_local(ops) -> np.ndarray:
    """(1/n) sum_i a_i for a list of n single-qubit operators."""
    ops = [as_matrix(a) for a in ops]
    n = check_n(len(ops))
    out = np.zeros((2 ** n, 2 ** n), dtype=np.complex128)
    for i, a in enumerate(ops, start=1):
        if a.shape != (2, 2):
            raise DimensionError(f"operator for qubit {i} is not 2x2")
        out += embed(a, i, n)
    return out / n


def averaging_observable(fam, n: int | None = None) -> np.ndarray:
    """Average of the family's projectors; ``fam="P"`` needs `n`."""
    if isinstance(fam, str):
        if n is None:
            raise ValueError("canonical family needs n")
        n = check_n(n)
        weights = local_sum_diag(np.tile([0.0, 1.0], (n, 1)), n) / n
        return np.diag(weights).astype(np.complex128)
    return average_local(fam.projectors())


def std_dev(a, nu) -> float:
    """sqrt(tr(nu a^2) - tr(nu a)^2), clipped at zero against rounding."""
    a, nu = as_matrix(a), as_matrix(nu)
    if a.shape != nu.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {nu.shape}")
    a = symmetrize(a)
    na = nu @ a
    mean = np.trace(na).real
    second = np.real(np.sum(na.T * a))  # tr(nu a a)
    return float(np.sqrt(max(second - mean * mean, 0.0)))


def commutator_expectation(rho, a, b) -> float:
    """The real number i tr(rho [a, b]) for Hermitian a, b."""
    rho, a, b = as_matrix(rho), as_matrix(a), as_matrix(b)
    if not rho.shape == a.shape == b.shape:
        raise DimensionError(f"dimension mismatch: {rho.shape}, {a.shape}, {b.shape}")
    k = rho @ a - a @ rho  # tr(rho[a,b]) = tr([rho,a] b)
    value = 1j * np.sum(k.T * b)
    if abs(value.imag) > COMMUTATOR_RESIDUE_TOL * max(1.0, abs(value.real)):
        raise NotHermitianError(
            f"i tr(rho[a,b]) has imaginary part {value.imag:.3e}; inputs are not Hermitian"
        )
    return float(value.real)


def random_local_ops(n: int, rng: np.random.Generator) -> list[np.ndarray]:
    """n random Hermitian single-qubit operators with operator norm <= 1."""
    return list(random_hermitian_ball(2, rng, size=n))


def random_averaging(n: int, rng: np.random.Generator) -> np.ndarray:
    return average_local(random_local_ops(n, rng))

