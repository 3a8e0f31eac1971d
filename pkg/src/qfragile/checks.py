"""Numerical verification suite for the bounds and identities.

Each check draws its instances from a seeded generator, evaluates one
inequality or identity over all of them, and returns a :class:`CheckResult`
whose ``worst`` field is the largest observed violation margin (lhs minus
bound; negative means slack).  ``level="full"`` uses the acceptance sizes,
``level="quick"`` a reduced grid for CI.

Checks 1-11 are the acceptance criteria; the ``I*`` checks are the remaining
module invariants.
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from dataclasses import dataclass

import numpy as np

from . import states
from .channels import (
    InstrumentConfig,
    apply_D,
    apply_Dl,
    apply_G,
    apply_Gl,
    binomial_weight,
    gl_decomposition,
)
from .circuits import cat_circuit, random_circuit, run_circuit
from .fragility import (
    EstimateConfig,
    asymptotic_bound,
    cluster_bound,
    estimate_e,
    gl_bound,
    haupt_x,
    hypergeom_sigma,
    hypersurface_check,
    inner_sup,
    oracle_random_b,
    r_wn,
)
from .linalg import operator_norm, random_hermitian, random_hermitian_ball, random_unitary
from .observables import (
    CANONICAL_P,
    BlochFamily,
    average_local,
    averaging_observable,
    commutator_expectation,
    random_local_ops,
    std_dev,
)

LEVELS = ("quick", "full")
ASCENT = EstimateConfig(method="ascent")


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    cases: int
    worst: float
    detail: str = ""
    seconds: float = 0.0

    def line(self, timing: bool = False) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.key:>3}  {self.title}: {self.cases} cases, worst margin {self.worst:+.3e}"
        if self.detail:
            text += f"; {self.detail}"
        return text + (f" ({self.seconds:.1f}s)" if timing else "")

    def to_json(self) -> dict:
        # wall time is left out so reruns are byte-identical
        return {"key": self.key, "title": self.title, "passed": self.passed, "cases": self.cases,
                "worst": self.worst, "detail": self.detail}


CHECKS: dict = {}


def _check(key: str, title: str):
    def register(fn):
        def run(level: str = "quick", seed: int = 0) -> CheckResult:
            if level not in LEVELS:
                raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
            rng = np.random.default_rng([seed, zlib.crc32(key.encode())])
            start = time.perf_counter()
            passed, cases, worst, detail = fn(level == "full", rng)
            return CheckResult(key, title, bool(passed), int(cases), float(worst), detail,
                               time.perf_counter() - start)
        run.__name__, run.__doc__ = fn.__name__, fn.__doc__
        run.key, run.title = key, title
        CHECKS[key] = run
        return run
    return register


def run_checks(level: str = "quick", seed: int = 0, only=None, on_result=None) -> list[CheckResult]:
    results = []
    for key, fn in CHECKS.items():
        if only and key not in only:
            continue
        res = fn(level, seed)
        if on_result:
            on_result(res)
        results.append(res)
    return results


class _Worst:
    """Running maximum of violation margins."""

    def __init__(self):
        self.value = -math.inf
        self.cases = 0

    def add(self, margin) -> None:
        margin = np.max(margin)
        self.value = max(self.value, float(margin))
        self.cases += 1


def _random_state(n: int, rng, kinds=("pure", "mixed", "low_rank")) -> np.ndarray:
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "pure":
        return states.random_pure(n, rng)
    if kind == "mixed":
        return states.random_mixed(n, rng)
    return states.random_mixed(n, rng, rank=int(rng.integers(1, 2 ** n + 1)))


def _commutator_values(rho, abar, bs) -> np.ndarray:
    """i tr(rho [abar, b]) for a stack of Hermitian b, as reals."""
    k = 1j * (rho @ abar - abar @ rho)
    return np.einsum("ij,mji->m", k, bs).real


# ---------------------------------------------------------------- acceptance criteria

@_check("1", "range lemma: e(cat)=1, e(mixed)=0, e(t cat + (1-t) mixed)=t")
def check_range_lemma(full, rng):
    worst = _Worst()
    ns = range(2, 9) if full else range(2, 6)
    for n in ns:
        worst.add(abs(estimate_e(states.standard_state("cat", n)).e_estimate - 1.0) - 1e-6)
    for n in ([1, 2, 4, 6] if full else [1, 3]):
        worst.add(estimate_e(states.standard_state("maximally_mixed", n)).e_estimate - 1e-9)
    for n in ([2, 4, 6] if full else [3]):
        cat, mixed = states.standard_state("cat", n), states.standard_state("maximally_mixed", n)
        for t in (0.25, 0.5, 0.75):
            worst.add(abs(estimate_e(t * cat + (1 - t) * mixed).e_estimate - t) - 1e-5)
    return worst.value <= 0, worst.cases, worst.value, "tolerances 1e-6 / 1e-9 / 1e-5"


@_check("2", "commutator vs standard deviation, pure and decomposed states")
def check_lemma1(full, rng):
    worst = _Worst()
    count = 500 if full else 100
    for _ in range(count):
        n = int(rng.integers(1, 5))
        d = 2 ** n
        nu = states.random_pure(n, rng)
        b = random_hermitian(d, rng) * rng.uniform(0.1, 3.0)
        if rng.random() < 0.5:
            c = random_hermitian_ball(d, rng)
        else:  # general contraction
            c = random_unitary(d, rng) @ np.diag(rng.uniform(0, 1, d)) @ random_unitary(d, rng)
        lhs = abs(np.trace(nu @ (b @ c - c @ b)))
        worst.add(lhs - 2 * std_dev(b, nu) - 1e-9)
    # mean standard deviation over an explicit pure-state decomposition
    for _ in range(count // 5):
        n = int(rng.integers(1, 5))
        d = 2 ** n
        parts = [states.random_pure(n, rng) for _ in range(int(rng.integers(1, 6)))]
        lam = rng.exponential(size=len(parts))
        lam /= lam.sum()
        rho = sum(l * p for l, p in zip(lam, parts))
        b = random_hermitian(d, rng)
        c = random_hermitian_ball(d, rng)
        mean_sd = sum(l * std_dev(b, p) for l, p in zip(lam, parts))
        worst.add(0.5 * abs(np.trace(rho @ (b @ c - c @ b))) - mean_sd - 1e-9)
    return worst.value <= 0, worst.cases, worst.value, "slack >= -1e-9"


@_check("3", "separable states lie between the hypersurfaces +-2/sqrt(n)")
def check_hypersurface(full, rng):
    worst = _Worst()
    count, draws = (1000, 100) if full else (100, 20)
    for k in range(count):
        n = 2 + k % 5
        rho = states.random_separable(n, int(rng.integers(1, 9)), int(rng.integers(2 ** 31)))
        d = 2 ** n
        cs = random_hermitian_ball(d, rng, size=draws)
        vals = np.array([
            _commutator_values(rho, average_local(random_local_ops(n, rng)), cs[j:j + 1])[0]
            for j in range(draws)
        ])
        worst.add(np.abs(vals) - 2 / math.sqrt(n) - 1e-9)
    # the cat state leaves the band for n >= 5
    cat_margin = -math.inf
    for n in range(5, 9 if full else 7):
        words = [("0" * n, "1" * n, 1.0)]
        rho, b = states.pair_mixture(words)
        res = hypersurface_check(rho, CANONICAL_P, b)
        cat_margin = max(cat_margin, (2 / math.sqrt(n) + 0.1) - abs(res.value))
        if res.separable_consistent or abs(abs(res.value) - 1.0) > 1e-12:
            cat_margin = max(cat_margin, 1.0)
    ok = worst.value <= 0 and cat_margin <= 0
    return ok, worst.cases, worst.value, f"cat violation margin {-cat_margin:.4f} above 2/sqrt(n)+0.1"


def _cluster_state(n, rng):
    sizes = []
    left = n
    while left:
        s = int(rng.integers(1, left + 1))
        sizes.append(s)
        left -= s
    blocks = [_random_state(s, rng) for s in sizes]
    rho = blocks[0]
    for blk in blocks[1:]:
        rho = np.kron(rho, blk)
    order = rng.permutation(n)
    return states.permute_qubits(rho, order), sizes


@_check("4", "cluster bound (2/n) sqrt(sum l_i^2) on partial product states")
def check_cluster(full, rng):
    worst = _Worst()
    count, draws = (200, 50) if full else (40, 20)
    for k in range(count):
        n = 2 + k % 5
        rho, sizes = _cluster_state(n, rng)
        bound = cluster_bound(n, sizes)
        d = 2 ** n
        for _ in range(4):
            abar = average_local(random_local_ops(n, rng))
            vals = _commutator_values(rho, abar, random_hermitian_ball(d, rng, size=draws))
            worst.add(np.abs(vals) - bound - 1e-9)
            # the dual supremum over b for this abar
            worst.add(np.sum(np.abs(np.linalg.eigvalsh(1j * (rho @ abar - abar @ rho)))) - bound - 1e-9)
        # the optimized projector family
        worst.add(estimate_e(rho, ASCENT).e_estimate - bound - 1e-9)
    return worst.value <= 0, worst.cases, worst.value, "random b, dual sup and optimized families"


@_check("5", "G_l outputs obey (1/sqrt l) sqrt((n-l)/(n-1))")
def check_gl(full, rng):
    worst = _Worst()
    count, draws = (100, 200) if full else (15, 50)
    mean_sd = -math.inf
    for n in range(2, 7):
        pbar = averaging_observable(CANONICAL_P, n)
        for _ in range(count):
            psi = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
            psi /= np.linalg.norm(psi)
            rho = np.outer(psi, psi.conj())
            for l in range(1, n + 1):
                out = apply_Gl(rho, l).rho
                bound = gl_bound(n, l)
                bs = random_hermitian_ball(2 ** n, rng, size=draws)
                worst.add(np.abs(_commutator_values(out, pbar, bs)) - bound - 1e-9)
                worst.add(inner_sup(out, CANONICAL_P)[0] - bound - 1e-9)
                if l < n:
                    decomposition = gl_decomposition(psi, l)
                    total = sum(p * std_dev(pbar, np.outer(v, v.conj())) for _, _, p, v in decomposition)
                    mean_sd = max(mean_sd, total - 0.5 * bound - 1e-9)
    ok = worst.value <= 0 and mean_sd <= 0
    return ok, worst.cases, worst.value, f"mean std-dev margin {mean_sd:+.3e}"


@_check("6", "binomial decompositions G = sum B_nw(l) G_l and D = sum B_nw(l) D_l")
def check_decomposition(full, rng):
    worst = _Worst()
    n = 4
    inputs = [states.standard_state("cat", n), states.random_pure(n, rng), states.random_mixed(n, rng)]
    if full:
        inputs += [states.random_mixed(n, rng, rank=2), states.random_separable(n, 3, 5)]
    for w in (0.2, 0.5):
        for rho in inputs:
            g = sum(binomial_weight(n, w, l) * apply_Gl(rho, l).rho for l in range(n + 1))
            d = sum(binomial_weight(n, w, l) * apply_Dl(rho, l).rho for l in range(n + 1))
            worst.add(np.max(np.abs(g - apply_G(rho, w).rho)) - 1e-9)
            worst.add(np.max(np.abs(d - apply_D(rho, w).rho)) - 1e-9)
    return worst.value <= 0, worst.cases, worst.value, "entrywise 1e-9, n=4"


@_check("7", "e(D(rho)) <= r_wn, and e(D(cat)) decays in n")
def check_theorem2(full, rng):
    worst = _Worst()
    per_cell = 50 if full else 4
    ws = (0.05, 0.1, 0.3, 0.6)
    for n in range(2, 7):
        for w in ws:
            bound = r_wn(n, w)
            for _ in range(per_cell):
                rho = apply_D(_random_state(n, rng), w).rho
                worst.add(estimate_e(rho, ASCENT).e_estimate - bound - 1e-6)
    cat_e = [estimate_e(apply_D(states.standard_state("cat", n), 0.1).rho).e_estimate for n in range(2, 7)]
    monotone = all(b <= a + 1e-9 for a, b in zip(cat_e, cat_e[1:]))
    below = cat_e[-1] < r_wn(6, 0.1)
    detail = "e(D(cat)) at w=0.1, n=2..6: " + ", ".join(f"{v:.4f}" for v in cat_e)
    return worst.value <= 0 and monotone and below, worst.cases, worst.value, detail


@_check("8", "r_wn under the Chebyshev bound; r_{w,4n}/r_{w,n} -> 1/2")
def check_chebyshev(full, rng):
    worst = _Worst()
    ws = [round(0.1 * k, 1) for k in range(1, 10)]
    for alpha in (0.25, 0.5, 0.75):
        for n in range(2, 13):
            for w in ws:
                worst.add(r_wn(n, w) - asymptotic_bound(n, w, alpha) - 1e-12)
    ns = (8, 32, 128, 512) if full else (8, 32, 128)
    trend_ok = True
    ratios = {}
    for w in (0.1, 0.5):
        dev = [abs(r_wn(4 * n, w) / r_wn(n, w) - 0.5) for n in ns]
        ratios[w] = r_wn(4 * ns[-1], w) / r_wn(ns[-1], w)
        trend_ok &= all(b < a for a, b in zip(dev, dev[1:])) and dev[-1] < 0.05
    detail = "ratio at n={}: ".format(ns[-1]) + ", ".join(f"w={w}: {r:.4f}" for w, r in ratios.items())
    return worst.value <= 0 and trend_ok, worst.cases, worst.value, detail


@_check("9", "noisy-gate circuits stay inside the slice x")
def check_theorem3(full, rng):
    worst = _Worst()
    per_model = 200 if full else 20
    worst_k = -math.inf
    for model in ("depolarizing", "dephasing"):
        for k in range(per_model):
            n = 2 + k % 5
            w = (0.1, 0.3, 0.6)[(k // 5) % 3]
            c = random_circuit(n, w, model, int(rng.integers(2 ** 31)))
            _, _, verdict = run_circuit(c, ASCENT)
            worst.add(verdict.e_estimate - verdict.bound - 1e-6)
            worst_k = max(worst_k, verdict.e_estimate - verdict.k_bound - 1e-6)
    cat_margin = -math.inf
    for n in (range(2, 7) if full else (4,)):
        _, rep0, _ = run_circuit(cat_circuit(n, 0.0))
        _, rep3, v3 = run_circuit(cat_circuit(n, 0.3))
        cat_margin = max(cat_margin, abs(rep0.e_estimate - 1.0) - 1e-6)
        cat_margin = max(cat_margin, rep3.e_estimate - haupt_x(n, 0.3) + 1e-12)
        cat_margin = max(cat_margin, rep3.e_estimate - rep0.e_estimate + 1e-12)
    ok = worst.value <= 0 and cat_margin <= 0
    detail = f"k-refined margin {worst_k:+.3e}; cat circuit margin {cat_margin:+.3e}"
    return ok, worst.cases, worst.value, detail


@_check("10", "inner supremum equals its witness and dominates random witnesses")
def check_duality(full, rng):
    worst = _Worst()
    count, samples = (200, 2000) if full else (30, 500)
    for k in range(count):
        n = 1 + k % 4
        rho = _random_state(n, rng)
        fam = CANONICAL_P if k % 5 == 0 else BlochFamily.random(n, rng)
        value, b = inner_sup(rho, fam)
        q = averaging_observable(fam, n)
        worst.add(abs(commutator_expectation(rho, q, b) - value) - 1e-9)
        worst.add(abs(operator_norm(b) - 1.0) - 1e-9)
        worst.add(oracle_random_b(rho, fam, samples, int(rng.integers(2 ** 31))) - value - 1e-9)
    return worst.value <= 0, worst.cases, worst.value, f"{samples} random b per instance"


@_check("11", "hypergeometric sigma matches subset enumeration")
def check_hypergeom(full, rng):
    worst = _Worst()
    for n in range(1, 9):
        for word in range(2 ** n):
            bits = [(word >> (n - 1 - i)) & 1 for i in range(n)]
            p = sum(bits) / n
            for l in range(1, n + 1):
                fractions = np.array([sum(bits[i] for i in sub) / l
                                      for sub in itertools.combinations(range(n), l)])
                brute = math.sqrt(max(np.mean(fractions ** 2) - np.mean(fractions) ** 2, 0.0))
                worst.add(abs(brute - hypergeom_sigma(n, l, p)) - 1e-12)
    return worst.value <= 0, worst.cases, worst.value, "all words, n <= 8"


# ---------------------------------------------------------------- module invariants

@_check("I1", "product states: std dev of averages <= 1/sqrt(n)")
def check_product_sd(full, rng):
    worst = _Worst()
    for k in range(200 if full else 50):
        n = 2 + k % 7
        angles = states.random_qubit_angles(rng, n)
        rho = states.product_state([states.qubit_state(t, p) for t, p in angles])
        abar = average_local(random_local_ops(n, rng))
        worst.add(std_dev(abar, rho) - 1 / math.sqrt(n) - 1e-12)
    return worst.value <= 0, worst.cases, worst.value, "n = 2..8"


@_check("I2", "inner supremum is convex in rho")
def check_convexity(full, rng):
    worst = _Worst()
    for k in range(100 if full else 25):
        n = 1 + k % 4
        r1, r2 = _random_state(n, rng), _random_state(n, rng)
        fam = BlochFamily.random(n, rng)
        t = rng.uniform()
        lhs = inner_sup(t * r1 + (1 - t) * r2, fam)[0]
        worst.add(lhs - t * inner_sup(r1, fam)[0] - (1 - t) * inner_sup(r2, fam)[0] - 1e-9)
    return worst.value <= 0, worst.cases, worst.value, ""


@_check("I3", "e is invariant under local unitaries")
def check_local_unitary(full, rng):
    worst = _Worst()
    for k in range(20 if full else 6):
        n = 1 + k % 4
        rho = _random_state(n, rng)
        u = random_unitary(2, rng)
        for _ in range(n - 1):
            u = np.kron(u, random_unitary(2, rng))
        a = estimate_e(rho, ASCENT).e_estimate
        b = estimate_e(u @ rho @ u.conj().T, ASCENT).e_estimate
        worst.add(abs(a - b) - 1e-4)
    return worst.value <= 0, worst.cases, worst.value, "optimizer tolerance 1e-4"


@_check("I4", "G and D do not depend on the qubit order")
def check_factor_order(full, rng):
    worst = _Worst()
    for k in range(20 if full else 6):
        n = 2 + k % 4
        rho = _random_state(n, rng)
        w = rng.uniform()
        order = [int(q) + 1 for q in rng.permutation(n)]
        for fn in (apply_G, apply_D):
            worst.add(np.max(np.abs(fn(rho, w).rho - fn(rho, w, order).rho)) - 1e-10)
    return worst.value <= 0, worst.cases, worst.value, ""


@_check("I5", "Monte Carlo subset instruments approach the exact ones")
def check_monte_carlo(full, rng):
    worst = _Worst()
    rho = states.standard_state("cat", 4)
    for samples in ((2000, 20000) if full else (2000,)):
        for fn in (apply_Gl, apply_Dl):
            mc = fn(rho, 2, InstrumentConfig("monte_carlo", samples, 7)).rho
            worst.add(np.max(np.abs(mc - fn(rho, 2).rho)) - 5 / math.sqrt(samples))
    return worst.value <= 0, worst.cases, worst.value, "entrywise 5/sqrt(samples)"


@_check("I6", "instrument outputs are density matrices")
def check_instrument_validity(full, rng):
    worst = _Worst()
    for k in range(40 if full else 10):
        n = 1 + k % 5
        rho = _random_state(n, rng)
        w = rng.uniform()
        outs = [apply_G(rho, w).rho, apply_D(rho, w).rho]
        l = int(rng.integers(0, n + 1))
        outs += [apply_Gl(rho, l).rho, apply_Dl(rho, l).rho]
        for out in outs:
            rep = states.validate_density(out)
            worst.add(max(rep.hermiticity_defect - 1e-10, rep.trace_defect - 1e-10,
                          -rep.min_eigenvalue - 1e-9))
    return worst.value <= 0, worst.cases, worst.value, ""
