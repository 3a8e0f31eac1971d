"""Independent-error instruments on n-qubit density matrices.

Per qubit i (1-based):

* ``dephase``     M_i(rho) = P_i rho P_i + (1 - P_i) rho (1 - P_i)
* ``bitflip``     F_i(rho) = X_i rho X_i
* ``depolarize``  I_i = (F_i + id)/2 o M_i, which swaps qubit i's reduced
  state for the maximally mixed one

G and D apply (w * error + (1 - w) * id) on every qubit.  G_l and D_l apply the
error to a uniformly random l-element subset; G = sum_l B_nw(l) G_l and the
same for D.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix
from .states import n_qubits

KINDS = ("dephase", "bitflip", "depolarize")
EXACT_SUBSET_LIMIT = 10000
ZERO_BRANCH_TOL = 1e-14


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class InstrumentConfig:
    mode: str = "exact"  # or "monte_carlo"
    samples: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "monte_carlo"):
            raise ChannelError(f"mode must be 'exact' or 'monte_carlo', got {self.mode!r}")
        if self.samples < 1:
            raise ChannelError(f"samples must be >= 1, got {self.samples}")


@dataclass(frozen=True)
class InstrumentResult:
    rho: np.ndarray
    mode: str = "exact"
    branches: int = 1
    seed: int | None = None
    meta: dict = field(default_factory=dict)


def _split(rho: np.ndarray, i: int, n: int) -> np.ndarray:
    left, right = 2 ** (i - 1), 2 ** (n - i)
    return rho.reshape(left, 2, right, left, 2, right)


def _check_qubit(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise ChannelError(f"qubit index {i} out of range 1..{n}")


def _check_prob(w: float) -> float:
    w = float(w)
    if not 0.0 <= w <= 1.0:
        raise ChannelError(f"error probability w must lie in [0, 1], got {w}")
    return w


def apply_local(kind: str, i: int, rho) -> np.ndarray:
    rho = as_matrix(rho)
    n = n_qubits(rho)
    _check_qubit(i, n)
    t = _split(rho, i, n)
    if kind == "dephase":
        out = t.copy()
        out[:, 0, :, :, 1, :] = 0.0
        out[:, 1, :, :, 0, :] = 0.0
    elif kind == "bitflip":
        out = t[:, ::-1, :, :, ::-1, :].copy()
    elif kind == "depolarize":
        reduced = 0.5 * (t[:, 0, :, :, 0, :] + t[:, 1, :, :, 1, :])
        out = np.zeros_like(t)
        out[:, 0, :, :, 0, :] = reduced
        out[:, 1, :, :, 1, :] = reduced
    else:
        raise ChannelError(f"unknown local error kind {kind!r}; expected one of {KINDS}")
    return out.reshape(rho.shape)


def apply_subset(kind: str, subset, rho) -> np.ndarray:
    """Apply the local error on every qubit of `subset` (the factors commute)."""
    out = as_matrix(rho)
    for i in subset:
        out = apply_local(kind, i, out)
    return out


def _product(kind: str, rho, w: float, order=None) -> InstrumentResult:
    w = _check_prob(w)
    out = as_matrix(rho)
    n = n_qubits(out)
    for i in order or range(1, n + 1):
        if w > 0.0:
            out = w * apply_local(kind, i, out) + (1.0 - w) * out
    return InstrumentResult(out, "exact", 2 ** n)


def apply_G(rho, w: float, order=None) -> InstrumentResult:
    """Independent dephasing with probability w on every qubit."""
    return _product("dephase", rho, w, order)


def apply_D(rho, w: float, order=None) -> InstrumentResult:
    """Independent depolarization with probability w on every qubit."""
    return _product("depolarize", rho, w, order)


def _subset_instrument(kind: str, rho, l: int, config: InstrumentConfig | None) -> InstrumentResult:
    config = config or InstrumentConfig()
    rho = as_matrix(rho)
    n = n_qubits(rho)
    if not 0 <= l <= n:
        raise ChannelError(f"subset size l must lie in [0, {n}], got {l}")
    if l == 0:
        return InstrumentResult(rho.copy(), config.mode, 1,
                                config.seed if config.mode == "monte_carlo" else None)

    if config.mode == "exact":
        count = math.comb(n, l)
        if count > EXACT_SUBSET_LIMIT:
            raise ChannelError(f"C({n},{l}) = {count} subsets exceeds the exact limit")
        out = np.zeros_like(rho)
        for subset in itertools.combinations(range(1, n + 1), l):
            out += apply_subset(kind, subset, rho)
        return InstrumentResult(out / count, "exact", count)

    rng = np.random.default_rng(config.seed)
    draws = Counter(
        tuple(sorted(int(q) + 1 for q in rng.choice(n, size=l, replace=False)))
        for _ in range(config.samples)
    )
    out = np.zeros_like(rho)
    for subset in sorted(draws):
        out += draws[subset] * apply_subset(kind, subset, rho)
    return InstrumentResult(out / config.samples, "monte_carlo", len(draws), config.seed,
                            {"samples": config.samples})


def apply_Gl(rho, l: int, config: InstrumentConfig | None = None) -> InstrumentResult:
    """Dephase a uniformly random l-element subset of qubits."""
    return _subset_instrument("dephase", rho, l, config)


def apply_Dl(rho, l: int, config: InstrumentConfig | None = None) -> InstrumentResult:
    """Depolarize a uniformly random l-element subset of qubits."""
    return _subset_instrument("depolarize", rho, l, config)


def binomial_weight(n: int, w: float, l: int) -> float:
    """B_nw(l) = C(n, l) w^l (1 - w)^(n - l), stable for large n."""
    w = _check_prob(w)
    if n < 0 or not 0 <= l <= n:
        raise ChannelError(f"need 0 <= l <= n, got n={n}, l={l}")
    if w == 0.0:
        return 1.0 if l == 0 else 0.0
    if w == 1.0:
        return 1.0 if l == n else 0.0
    log_b = (math.lgamma(n + 1) - math.lgamma(l + 1) - math.lgamma(n - l + 1)
             + l * math.log(w) + (n - l) * math.log1p(-w))
    return math.exp(log_b)


def measurement_branches(psi, subset) -> list[tuple[str, float, np.ndarray]]:
    """Outcomes of measuring the qubits in `subset` on the pure state psi.

    Returns (g, ||P_{L,g} psi||^2, normalized P_{L,g} psi) for every outcome word
    g (bits in ascending qubit order).  Zero-probability branches are dropped.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    n = int(psi.size).bit_length() - 1
    subset = sorted(subset)
    index = np.arange(psi.size)
    restricted = np.zeros(psi.size, dtype=np.int64)
    for q in subset:
        restricted = 2 * restricted + ((index >> (n - q)) & 1)
    branches = []
    for code in range(2 ** len(subset)):
        part = np.where(restricted == code, psi, 0.0)
        prob = float(np.vdot(part, part).real)
        if prob < ZERO_BRANCH_TOL:
            continue
        g = format(code, f"0{len(subset)}b") if subset else ""
        branches.append((g, prob, part / np.sqrt(prob)))
    return branches


def gl_decomposition(psi, l: int) -> list[tuple[tuple[int, ...], str, float, np.ndarray]]:
    """Pure-state decomposition of G_l(|psi><psi|) as (L, g, p(L, g), psi_{L,g})."""
    psi = np.asarray(psi, dtype=np.complex128)
    n = int(psi.size).bit_length() - 1
    count = math.comb(n, l)
    out = []
    for subset in itertools.combinations(range(1, n + 1), l):
        for g, prob, vec in measurement_branches(psi, subset):
            out.append((subset, g, prob / count, vec))
    return out
