"""Noisy-gate circuits from separable inputs and the slice bound on their output.

Gate model: 1-qubit unitaries are perfect; a 2-qubit unitary u on (i, j) acts as

    g(rho) = (1 - w) u rho u^dagger + w (E_i o E_j)(rho)

with E the depolarizing map (``error_model="depolarizing"``) or the dephasing
measurement (``"dephasing"``).  Qubits are 1-based; for a 2-qubit gate the
first listed qubit is the more significant index of the 4x4 matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channels import apply_local
from .fragility import EstimateConfig, FragilityReport, estimate_e, haupt_term, haupt_x
from .linalg import as_matrix, random_unitary
from .observables import CANONICAL_P
from .states import check_n

UNITARY_TOL = 1e-10
ERROR_MODELS = {"depolarizing": "depolarize", "dephasing": "dephase"}
SEPARABLE_KINDS = ("basis", "pi", "maximally_mixed", "product", "separable")

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    qubits: tuple
    matrix: np.ndarray

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        m = as_matrix(self.matrix)
        if len(qubits) not in (1, 2):
            raise CircuitError(f"gates act on 1 or 2 qubits, got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"gate qubits must be distinct, got {qubits}")
        if m.shape != (2 ** len(qubits),) * 2:
            raise CircuitError(f"gate on {len(qubits)} qubit(s) needs a {2 ** len(qubits)}-dim matrix")
        defect = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if defect > UNITARY_TOL:
            raise CircuitError(f"gate matrix is not unitary (max |U^dagger U - I| = {defect:.3e})")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "matrix", m)

    @property
    def kind(self) -> str:
        return "u1" if len(self.qubits) == 1 else "u2"


@dataclass
class Circuit:
    n: int
    w: float
    error_model: str = "depolarizing"
    init: dict = field(default_factory=dict)
    gates: list = field(default_factory=list)

    def __post_init__(self):
        self.n = check_n(self.n)
        if not 0.0 <= self.w <= 1.0:
            raise CircuitError(f"w must lie in [0, 1], got {self.w}")
        if self.error_model not in ERROR_MODELS:
            raise CircuitError(f"error_model must be one of {sorted(ERROR_MODELS)}, got {self.error_model!r}")
        if not self.init:
            self.init = {"kind": "basis", "word": "0" * self.n}
        if self.init.get("kind") not in SEPARABLE_KINDS:
            raise CircuitError(
                f"init must be an explicitly separable state spec ({', '.join(SEPARABLE_KINDS)}), "
                f"got kind {self.init.get('kind')!r}"
            )
        for g in self.gates:
            if any(not 1 <= q <= self.n for q in g.qubits):
                raise CircuitError(f"gate qubits {g.qubits} out of range 1..{self.n}")

    @property
    def touched(self) -> frozenset:
        return frozenset(q for g in self.gates if g.kind == "u2" for q in g.qubits)

    @property
    def k(self) -> int:
        return len(self.touched)


def _apply_unitary(rho: np.ndarray, u: np.ndarray, qubits, n: int) -> np.ndarray:
    m = len(qubits)
    axes = [q - 1 for q in qubits]
    t = rho.reshape((2,) * (2 * n))
    ut = u.reshape((2,) * (2 * m))
    # rows: contract gate inputs with the target row axes
    t = np.tensordot(ut, t, axes=(list(range(m, 2 * m)), axes))
    t = np.moveaxis(t, list(range(m)), axes)
    # columns: multiply by u^dagger from the right
    cols = [n + a for a in axes]
    t = np.tensordot(t, ut.conj(), axes=(cols, list(range(m, 2 * m))))
    t = np.moveaxis(t, list(range(2 * n - m, 2 * n)), cols)
    return t.reshape(rho.shape)


def initial_state(c: Circuit) -> np.ndarray:
    from .specs import parse_state  # specs imports this module

    rho = parse_state(c.init)
    if rho.shape[0] != 2 ** c.n:
        raise CircuitError(f"init state has dimension {rho.shape[0]}, circuit needs {2 ** c.n}")
    return rho


def simulate(c: Circuit, rho=None) -> np.ndarray:
    """Apply the gates in order to the initial state."""
    rho = initial_state(c) if rho is None else as_matrix(rho)
    kind = ERROR_MODELS[c.error_model]
    for g in c.gates:
        rotated = _apply_unitary(rho, g.matrix, g.qubits, c.n)
        if g.kind == "u1" or c.w == 0.0:
            rho = rotated
            continue
        i, j = g.qubits
        noisy = apply_local(kind, i, apply_local(kind, j, rho))
        rho = (1.0 - c.w) * rotated + c.w * noisy
    return rho


@dataclass(frozen=True)
class HauptVerdict:
    e_estimate: float
    bound: float          # haupt_x(n, w)
    k: int                # qubits touched by 2-qubit gates
    k_bound: float        # (r_wk k + sqrt(n - k))/n for this circuit's k
    tol: float = 1e-6

    @property
    def passed(self) -> bool:
        return self.e_estimate <= self.bound + self.tol

    @property
    def passed_k(self) -> bool:
        return self.e_estimate <= self.k_bound + self.tol

    def to_json(self) -> dict:
        return {"e": self.e_estimate, "haupt_x": self.bound, "k": self.k,
                "k_bound": self.k_bound, "passed": self.passed, "passed_k": self.passed_k}


def estimate_for(c: Circuit, rho, config: EstimateConfig | None = None) -> FragilityReport:
    """e estimate with the family class the bound covers for this error model."""
    config = config or EstimateConfig()
    if c.error_model == "dephasing" and config.families != CANONICAL_P:
        config = replace(config, families=CANONICAL_P)
    return estimate_e(rho, config)


def verify_haupt(c: Circuit, report: FragilityReport, tol: float = 1e-6) -> HauptVerdict:
    if report.witness_family.n != c.n:
        raise CircuitError(f"report is for {report.witness_family.n} qubits, circuit has {c.n}")
    if c.error_model == "dephasing" and report.families != CANONICAL_P:
        raise CircuitError("dephasing circuits are bounded only along the canonical P family; "
                           "estimate with families='P'")
    return HauptVerdict(report.e_estimate, haupt_x(c.n, c.w), c.k, haupt_term(c.n, c.w, c.k), tol)


def run_circuit(c: Circuit, config: EstimateConfig | None = None):
    rho = simulate(c)
    report = estimate_for(c, rho, config)
    return rho, report, verify_haupt(c, report)


def cat_circuit(n: int, w: float = 0.0, error_model: str = "depolarizing") -> Circuit:
    """Hadamard on qubit 1 then a CNOT chain 1->2->...->n, from |0...0>."""
    gates = [Gate((1,), HADAMARD)] + [Gate((q, q + 1), CNOT) for q in range(1, n)]
    return Circuit(n, w, error_model, {"kind": "basis", "word": "0" * n}, gates)


def random_circuit(n: int, w: float, error_model: str, seed: int) -> Circuit:
    """Haar-random gates; count geometric with mean 3n, each a u2 with probability 1/2."""
    rng = np.random.default_rng(seed)
    count = int(rng.geometric(1.0 / (3 * n)))
    gates = []
    for _ in range(count):
        if n >= 2 and rng.random() < 0.5:
            i, j = (int(q) + 1 for q in rng.choice(n, size=2, replace=False))
            gates.append(Gate((i, j), random_unitary(4, rng)))
        else:
            gates.append(Gate((int(rng.integers(n)) + 1,), random_unitary(2, rng)))
    init = {"kind": "separable", "n": n, "terms": int(rng.integers(1, 5)),
            "seed": int(rng.integers(2 ** 31))}
    return Circuit(n, w, error_model, init, gates)

