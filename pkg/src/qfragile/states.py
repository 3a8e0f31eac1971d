"""Binary words and the n-qubit state families used throughout the package.

Density matrices are ``(2**n, 2**n)`` complex arrays.  Qubit 1 is the leftmost
tensor factor, i.e. the most significant bit of the basis index, so the word
``"0110"`` labels basis vector number ``0b0110``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import MAX_QUBITS, HERMITIAN_TOL, as_matrix, hermiticity_defect, tensor

TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9


class StateError(ValueError):
    pass


def check_n(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or not 1 <= n <= MAX_QUBITS:
        raise StateError(f"number of qubits n must be an integer in [1, {MAX_QUBITS}], got {n!r}")
    return int(n)


def n_qubits(rho) -> int:
    d = as_matrix(rho).shape[0]
    n = d.bit_length() - 1
    if 1 << n != d or n < 1:
        raise StateError(f"matrix dimension {d} is not 2**n for n >= 1")
    return n


# ---------------------------------------------------------------- words

def parse_word(w) -> str:
    """Normalize a binary word given as a string or a 0/1 sequence."""
    s = w if isinstance(w, str) else "".join(str(int(b)) for b in w)
    if not s or set(s) - {"0", "1"}:
        raise StateError(f"not a binary word: {w!r}")
    return s


def word_index(w) -> int:
    return int(parse_word(w), 2)


def index_word(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def hamming_weight(w) -> int:
    return parse_word(w).count("1")


def hamming_distance(a, b) -> int:
    a, b = parse_word(a), parse_word(b)
    if len(a) != len(b):
        raise StateError(f"word lengths differ: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))


def basis_ket(w) -> np.ndarray:
    w = parse_word(w)
    v = np.zeros(2 ** len(w), dtype=np.complex128)
    v[int(w, 2)] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


# ---------------------------------------------------------------- constructors

def standard_state(kind: str, n: int, word=None) -> np.ndarray:
    """One of ``basis`` (needs `word`), ``cat``, ``pi`` or ``maximally_mixed``."""
    n = check_n(n)
    d = 2 ** n
    if kind == "basis":
        if word is None:
            raise StateError("basis state needs a word")
        w = parse_word(word)
        if len(w) != n:
            raise StateError(f"word {w!r} has length {len(w)}, expected n={n}")
        return projector(basis_ket(w))
    if kind == "cat":
        psi = np.zeros(d, dtype=np.complex128)
        psi[0] = psi[-1] = 1.0
        return projector(psi)
    if kind == "pi":
        return projector(np.ones(d, dtype=np.complex128))
    if kind == "maximally_mixed":
        return np.eye(d, dtype=np.complex128) / d
    raise StateError(f"unknown state kind {kind!r}")


def pair_superposition(f, g) -> np.ndarray:
    """Density matrix of (|f> + |g>)/sqrt(2) for distinct words f, g."""
    f, g = parse_word(f), parse_word(g)
    if len(f) != len(g):
        raise StateError(f"word lengths differ: {len(f)} vs {len(g)}")
    if f == g:
        raise StateError("pair superposition needs two distinct words")
    check_n(len(f))
    return projector(basis_ket(f) + basis_ket(g))


def pair_mixture(pairs) -> tuple[np.ndarray, np.ndarray]:
    """Mixture of pair superpositions over 2j mutually distinct words.

    `pairs` is a sequence of ``(f_k, g_k, weight_k)``.  Returns the density
    matrix and the witness  b = sum_k (i|f_k><g_k| - i|g_k><f_k|).
    """
    pairs = [(parse_word(f), parse_word(g), float(lam)) for f, g, lam in pairs]
    if not pairs:
        raise StateError("pair mixture needs at least one pair")
    words = [w for f, g, _ in pairs for w in (f, g)]
    n = len(words[0])
    if any(len(w) != n for w in words):
        raise StateError("all words must have the same length")
    check_n(n)
    if len(set(words)) != len(words):
        raise StateError("the 2j words of a pair mixture must be mutually distinct")
    weights = np.array([lam for _, _, lam in pairs])
    if np.any(weights <= 0.0):
        raise StateError("pair weights must be positive")
    total = weights.sum()
    if abs(total - 1.0) > 1e-12:
        raise StateError(f"pair weights must sum to 1, got {total!r}")
    weights = weights / total

    d = 2 ** n
    rho = np.zeros((d, d), dtype=np.complex128)
    b = np.zeros((d, d), dtype=np.complex128)
    for (f, g, _), lam in zip(pairs, weights):
        rho += lam * pair_superposition(f, g)
        i, j = int(f, 2), int(g, 2)
        b[i, j] += 1j
        b[j, i] -= 1j
    return rho, b


def product_state(factors) -> np.ndarray:
    factors = [as_matrix(f) for f in factors]
    check_n(len(factors))
    for k, f in enumerate(factors, start=1):
        if f.shape != (2, 2) or not validate_density(f).ok:
            raise StateError(f"factor {k} is not a valid single-qubit density matrix")
    return tensor(*factors)


def qubit_state(theta: float, phi: float) -> np.ndarray:
    """Pure single-qubit density matrix with Bloch angles (theta, phi)."""
    ket = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return np.outer(ket, ket.conj())


def random_qubit_angles(rng: np.random.Generator, size) -> np.ndarray:
    """Haar-uniform Bloch angles: cos(theta) uniform in [-1, 1], phi uniform."""
    theta = np.arccos(rng.uniform(-1.0, 1.0, size))
    phi = rng.uniform(0.0, 2 * np.pi, size)
    return np.stack([theta, phi], axis=-1)


def random_separable(n: int, terms: int, seed: int) -> np.ndarray:
    """Convex combination of `terms` Haar-random pure product states.

    Weights are normalized exponential draws (flat Dirichlet).
    """
    n = check_n(n)
    if terms < 1:
        raise StateError(f"terms must be >= 1, got {terms}")
    rng = np.random.default_rng(seed)
    weights = rng.exponential(size=terms)
    weights /= weights.sum()
    angles = random_qubit_angles(rng, (terms, n))
    d = 2 ** n
    rho = np.zeros((d, d), dtype=np.complex128)
    for lam, row in zip(weights, angles):
        rho += lam * tensor(*(qubit_state(t, p) for t, p in row))
    return rho


def random_pure(n: int, rng: np.random.Generator) -> np.ndarray:
    d = 2 ** n
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return projector(psi)


def random_mixed(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default)."""
    d = 2 ** n
    rank = d if rank is None else rank
    z = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def permute_qubits(rho, order) -> np.ndarray:
    """Relabel qubits: qubit k of the input becomes qubit order[k] of the output (0-based)."""
    n = n_qubits(rho)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise StateError(f"not a permutation of {n} qubits: {order}")
    t = np.asarray(rho).reshape((2,) * (2 * n))
    inv = np.argsort(order)
    axes = list(inv) + [n + k for k in inv]
    return t.transpose(axes).reshape(2 ** n, 2 ** n)


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class DensityReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float

    @property
    def ok(self) -> bool:
        return (
            self.hermiticity_defect <= HERMITIAN_TOL
            and self.trace_defect <= TRACE_TOL
            and self.min_eigenvalue >= -POSITIVITY_TOL
        )


def validate_density(rho) -> DensityReport:
    m = as_matrix(rho)
    herm = hermiticity_defect(m)
    trace_defect = abs(np.trace(m) - 1.0)
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    return DensityReport(herm, float(trace_defect), min_eig)


def purity(rho) -> float:
    m = as_matrix(rho)
    return float(np.real(np.trace(m @ m)))
