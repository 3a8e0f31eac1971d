"""The fragility parameter e_rho, its witnesses, and the analytic bounds on it.

    e_rho = sup_{Q, ||b|| <= 1} |tr(rho [Qbar, b])|

For a fixed family Q the inner supremum is the trace norm of i[rho, Qbar]
(duality between trace norm and operator norm), attained by the reflection
b = sign(i[rho, Qbar]).  The outer supremum over Bloch families is a
multi-start local search; what comes back is a lower bound on e_rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .channels import binomial_weight
from .linalg import (
    DimensionError,
    as_matrix,
    hermitian_eigen,
    operator_norm,
    random_hermitian_ball,
    symmetrize,
)
from .observables import (
    CANONICAL_P,
    PAULIS,
    BlochFamily,
    as_family,
    averaging_observable,
    bloch_vector,
    commutator_expectation,
)
from .states import n_qubits

WITNESS_NORM_TOL = 1e-9


class BoundError(ValueError):
    pass


# ---------------------------------------------------------------- inner supremum

def inner_sup(rho, fam=CANONICAL_P) -> tuple[float, np.ndarray]:
    """sup_{||b|| <= 1} |tr(rho [Qbar, b])| and the reflection b attaining it."""
    rho = as_matrix(rho)
    n = n_qubits(rho)
    q = averaging_observable(as_family(fam, n) if not isinstance(fam, str) else fam, n)
    if q.shape != rho.shape:
        raise DimensionError(f"dimension mismatch: {q.shape} vs {rho.shape}")
    h = symmetrize(1j * (rho @ q - q @ rho))
    eig = hermitian_eigen(h)
    signs = np.where(eig.values < 0.0, -1.0, 1.0)
    b = (eig.vectors * signs) @ eig.vectors.conj().T
    return float(np.sum(np.abs(eig.values))), b


def oracle_random_b(rho, fam=CANONICAL_P, samples: int = 2000, seed: int = 0,
                    batch: int = 500) -> float:
    """Best |i tr(rho [Qbar, b])| over random Hermitian b in the unit ball."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rho = as_matrix(rho)
    n = n_qubits(rho)
    q = averaging_observable(fam if isinstance(fam, str) else as_family(fam, n), n)
    k = 1j * (rho @ q - q @ rho)  # i tr(rho [q, b]) = tr(k b)
    rng = np.random.default_rng(seed)
    best = 0.0
    left = samples
    while left > 0:
        m = min(batch, left)
        bs = random_hermitian_ball(rho.shape[0], rng, size=m)
        vals = np.abs(np.einsum("ij,mji->m", k, bs).real)
        best = max(best, float(vals.max()))
        left -= m
    return best


class CommutatorModel:
    """i[rho, Qbar] as a linear function of the n Bloch vectors of Q.

    With Q_i = (I + r_i . sigma)/2 the commutator is
    (1/2n) sum_{i,a} r_{ia} i[rho, sigma_a^(i)].  The 3n generators are built
    once; for low-rank rho they are compressed onto span{V, sigma_a^(i) V}
    (V = range of rho), which holds the row and column space of every such
    commutator, so the nonzero spectrum is unchanged.
    """

    def __init__(self, rho, rank_tol: float = 1e-13):
        rho = symmetrize(rho)
        self.n = n = n_qubits(rho)
        d = rho.shape[0]
        evals, evecs = np.linalg.eigh(rho)
        keep = evals > rank_tol * max(evals[-1], 1e-300)
        v = evecs[:, keep]
        basis = None
        if v.shape[1] * (1 + 3 * n) < d:
            rho = (v * evals[keep]) @ v.conj().T
            parts = [v] + [self._left_pauli(v, i, a) for i in range(n) for a in range(3)]
            u, s, _ = np.linalg.svd(np.concatenate(parts, axis=1), full_matrices=False)
            basis = u[:, s > 1e-12 * s[0]]
        gens = []
        for i in range(n):
            for a in range(3):
                sr = self._left_pauli(rho, i, a)  # sigma rho; rho sigma = (sigma rho)^dagger
                c = 1j * (sr.conj().T - sr) / (2 * n)
                if basis is not None:
                    c = basis.conj().T @ c @ basis
                gens.append(c)
        self.generators = np.stack(gens)
        self.dim = self.generators.shape[1]

    def _left_pauli(self, x, i, a):
        n = self.n
        t = x.reshape(2 ** i, 2, 2 ** (n - i - 1), -1)
        return np.einsum("ab,lbrm->larm", PAULIS[a], t).reshape(x.shape)

    def matrix(self, angles) -> np.ndarray:
        a = np.asarray(angles, float).reshape(self.n, 2)
        r = bloch_vector(a[:, 0], a[:, 1]).ravel()
        return np.tensordot(r, self.generators, axes=1)

    def value(self, angles) -> float:
        return float(np.sum(np.abs(np.linalg.eigvalsh(self.matrix(angles)))))

    def ascend(self, angles, tol: float = 1e-12, max_iter: int = 5000):
        """Monotone fixed-point ascent: point every Bloch vector along its gradient.

        The objective is convex in the Bloch vectors, so moving each vector to
        the unit vector of its gradient never lowers the value.  Returns
        (angles, value, iterations, converged).
        """
        a = np.asarray(angles, float).reshape(self.n, 2)
        r = bloch_vector(a[:, 0], a[:, 1])
        last = -np.inf
        for it in range(1, max_iter + 1):
            lam, vecs = np.linalg.eigh(np.tensordot(r.ravel(), self.generators, axes=1))
            value = float(np.sum(np.abs(lam)))
            if value - last <= tol:
                return _angles_of(r), value, it, True
            last = value
            s = (vecs * np.where(lam < 0.0, -1.0, 1.0)) @ vecs.conj().T
            g = np.einsum("kij,ji->k", self.generators, s).real.reshape(self.n, 3)
            norms = np.linalg.norm(g, axis=1)
            moving = norms > 1e-300
            r[moving] = g[moving] / norms[moving, None]
        return _angles_of(r), last, max_iter, False


def _angles_of(r: np.ndarray) -> np.ndarray:
    theta = np.arccos(np.clip(r[:, 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(r[:, 1], r[:, 0]), 2 * np.pi)
    return np.stack([theta, phi], axis=1).ravel()


# ---------------------------------------------------------------- outer supremum

@dataclass(frozen=True)
class EstimateConfig:
    restarts: int = 16        # total starts, the two canonical families included
    max_evals: int = 5000
    fatol: float = 1e-9       # value tolerance of each local search
    step: float = 0.4         # initial simplex edge in radians
    seed: int = 0
    families: str = "all"     # "all" Bloch families or only the canonical "P"
    method: str = "nelder-mead"  # or "ascent"
    polish: bool = True       # finish Nelder-Mead with the monotone ascent

    def __post_init__(self):
        if self.restarts < 2 and self.families == "all":
            raise ValueError("restarts must be >= 2 (both canonical starts are always run)")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.families not in ("all", CANONICAL_P):
            raise ValueError(f"families must be 'all' or 'P', got {self.families!r}")
        if self.method not in ("nelder-mead", "ascent"):
            raise ValueError(f"method must be 'nelder-mead' or 'ascent', got {self.method!r}")


@dataclass
class FragilityReport:
    e_estimate: float
    witness_family: BlochFamily
    witness_b: np.ndarray
    starts: int
    converged: bool
    evaluations: int = 0
    start_values: list = field(default_factory=list)
    families: str = "all"

    def to_json(self) -> dict:
        return {
            "e": self.e_estimate,
            "witness_angles": self.witness_family.angles.tolist(),
            "starts": self.starts,
            "converged": self.converged,
        }


def _initial_simplex(x0: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([x0, x0 + step * np.eye(x0.size)])


def estimate_e(rho, config: EstimateConfig | None = None) -> FragilityReport:
    """Lower bound on e_rho from a multi-start local search over Bloch families.

    Each start runs Nelder-Mead on the 2n angles (then the monotone ascent of
    :meth:`CommutatorModel.ascend` as a polish), or the ascent alone with
    ``method="ascent"``.  Start 0 is the canonical P family (all theta = pi), start 1 the canonical z
    family (all theta = 0); the rest are Haar-random families drawn from
    ``config.seed``.  Ties between starts go to the lower start index.
    """
    config = config or EstimateConfig()
    rho = as_matrix(rho)
    n = n_qubits(rho)

    if config.families == CANONICAL_P:
        fam = BlochFamily.canonical_p(n)
        value, b = inner_sup(rho, fam)
        return FragilityReport(value, fam, b, 1, True, 1, [value], CANONICAL_P)

    model = CommutatorModel(rho)
    rng = np.random.default_rng(config.seed)
    starts = [BlochFamily.canonical_p(n).angles.ravel(), BlochFamily.canonical_z(n).angles.ravel()]
    for _ in range(config.restarts - 2):
        starts.append(BlochFamily.random(n, rng).angles.ravel())

    best_x, best_val, best_ok = None, -np.inf, False
    evaluations = 0
    values = []
    for x0 in starts:
        if config.method == "ascent":
            x, val, nfev, ok = model.ascend(x0, tol=config.fatol, max_iter=config.max_evals)
        else:
            res = minimize(
                lambda x: -model.value(x),
                x0,
                method="Nelder-Mead",
                options={
                    "maxfev": config.max_evals,
                    "fatol": config.fatol,
                    "xatol": np.inf,  # stop on value spread alone
                    "initial_simplex": _initial_simplex(x0, config.step),
                },
            )
            x, val, nfev, ok = res.x, -float(res.fun), res.nfev, bool(res.success)
            if config.polish:
                px, pval, pfev, _ = model.ascend(x, max_iter=config.max_evals)
                nfev += pfev
                if pval > val:
                    x, val = px, pval
        evaluations += nfev
        values.append(val)
        if val > best_val:
            best_x, best_val, best_ok = x, val, ok

    fam = BlochFamily.from_raw(best_x)
    value, b = inner_sup(rho, fam)
    return FragilityReport(value, fam, b, len(starts), best_ok, evaluations, values)


# ---------------------------------------------------------------- criteria

@dataclass(frozen=True)
class HypersurfaceResult:
    value: float
    threshold: float
    separable_consistent: bool

    @property
    def certifies_entanglement(self) -> bool:
        return not self.separable_consistent


def hypersurface_check(rho, fam, c) -> HypersurfaceResult:
    """Compare i tr(rho [abar, c]) with the separable band +-2/sqrt(n).

    `fam` is a :class:`BlochFamily`, ``"P"``, or an explicit averaging
    observable matrix.
    """
    rho, c = as_matrix(rho), as_matrix(c)
    n = n_qubits(rho)
    if isinstance(fam, (str, BlochFamily)):
        abar = averaging_observable(fam if isinstance(fam, str) else as_family(fam, n), n)
    else:
        abar = as_matrix(fam)
    norm = operator_norm(c)
    if norm > 1.0 + WITNESS_NORM_TOL:
        raise BoundError(f"witness c must have operator norm <= 1, got {norm:.12g}")
    value = commutator_expectation(rho, abar, c)
    threshold = 2.0 / math.sqrt(n)
    return HypersurfaceResult(value, threshold, abs(value) <= threshold)


# ---------------------------------------------------------------- bound functions

def cluster_bound(n: int, sizes) -> float:
    """(2/n) sqrt(sum l_i^2) for a partition into clusters of the given sizes."""
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes) or sum(sizes) != n:
        raise BoundError(f"cluster sizes {sizes} do not partition {n} qubits")
    return 2.0 / n * math.sqrt(sum(s * s for s in sizes))


def gl_bound(n: int, l: int) -> float:
    """(1/sqrt(l)) sqrt((n - l)/(n - 1)); zero for n = 1."""
    if not 1 <= l <= n:
        raise BoundError(f"need 1 <= l <= n, got n={n}, l={l}")
    if n == 1:
        return 0.0
    return math.sqrt((n - l) / (n - 1)) / math.sqrt(l)


def hypergeom_sigma(n: int, l: int, p: float) -> float:
    """Standard deviation of the fraction of ones in a random l-subset of an
    n-bit word whose fraction of ones is p."""
    if not 1 <= l <= n:
        raise BoundError(f"need 1 <= l <= n, got n={n}, l={l}")
    if not 0.0 <= p <= 1.0:
        raise BoundError(f"p must lie in [0, 1], got {p}")
    if n == 1:
        return 0.0
    return math.sqrt((n - l) / (l * (n - 1)) * p * (1.0 - p))


def r_wn(n: int, w: float) -> float:
    """sum_{l=1}^n gl_bound(n, l) B_nw(l) + (1 - w)^n."""
    if n < 1:
        raise BoundError(f"n must be >= 1, got {n}")
    if not 0.0 <= w <= 1.0:
        raise BoundError(f"w must lie in [0, 1], got {w}")
    total = math.fsum(gl_bound(n, l) * binomial_weight(n, w, l) for l in range(1, n + 1))
    return total + (1.0 - w) ** n


def asymptotic_bound(n: int, w: float, alpha: float) -> float:
    """1/(w n (1 - alpha)^2) + 1/sqrt(n w alpha), valid for any alpha in (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise BoundError(f"alpha must lie in the open interval (0, 1), got {alpha}")
    if not 0.0 < w <= 1.0:
        raise BoundError(f"w must lie in (0, 1] for the asymptotic bound, got {w}")
    if n < 1:
        raise BoundError(f"n must be >= 1, got {n}")
    return 1.0 / (w * n * (1.0 - alpha) ** 2) + 1.0 / math.sqrt(n * w * alpha)


def haupt_term(n: int, w: float, k: int) -> float:
    """(r_wk k + sqrt(n - k))/n: the ceiling when exactly k qubits saw 2-qubit gates."""
    if not 0 <= k <= n:
        raise BoundError(f"need 0 <= k <= n, got n={n}, k={k}")
    touched = 0.0 if k == 0 else r_wn(k, w) * k
    return (touched + math.sqrt(n - k)) / n


def haupt_x(n: int, w: float) -> float:
    """max_{0 <= k <= n} haupt_term(n, w, k)."""
    if n < 1:
        raise BoundError(f"n must be >= 1, got {n}")
    return max(haupt_term(n, w, k) for k in range(n + 1))


@dataclass
class BoundTable:
    alpha: float
    rows: list  # (n, w, r_wn, asymptotic or None, haupt_x)

    HEADER = ("n", "w", "r_wn", "asymptotic", "alpha", "haupt_x")

    def records(self):
        for n, w, r, asym, x in self.rows:
            yield {"n": n, "w": w, "r_wn": r, "asymptotic": asym, "alpha": self.alpha, "haupt_x": x}


def bound_table(ns, ws, alpha: float = 0.5) -> BoundTable:
    if not 0.0 < alpha < 1.0:
        raise BoundError(f"alpha must lie in the open interval (0, 1), got {alpha}")
    rows = []
    for n in sorted(set(ns)):
        for w in sorted(set(ws)):
            asym = asymptotic_bound(n, w, alpha) if w > 0 else None
            rows.append((n, w, r_wn(n, w), asym, haupt_x(n, w)))
    return BoundTable(alpha, rows)
