import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfragile import states
from qfragile.channels import apply_D
from qfragile.fragility import (
    BoundError,
    CommutatorModel,
    EstimateConfig,
    asymptotic_bound,
    bound_table,
    cluster_bound,
    estimate_e,
    gl_bound,
    haupt_term,
    haupt_x,
    hypergeom_sigma,
    hypersurface_check,
    inner_sup,
    oracle_random_b,
    r_wn,
)
from qfragile.linalg import operator_norm, random_unitary, trace_norm
from qfragile.observables import CANONICAL_P, BlochFamily, averaging_observable, commutator_expectation

ASCENT = EstimateConfig(method="ascent")


def test_inner_sup_examples():
    for n in (1, 3, 5):
        value, b = inner_sup(states.standard_state("cat", n))
        assert value == pytest.approx(1.0)
        assert operator_norm(b) == pytest.approx(1.0)
        assert inner_sup(states.standard_state("maximally_mixed", n), BlochFamily.canonical_z(n))[0] == 0.0
    # equal mixture of the two cat phases is diagonal
    plus = states.standard_state("cat", 3)
    minus = plus.copy()
    minus[0, -1] = minus[-1, 0] = -0.5
    assert inner_sup(0.5 * (plus + minus))[0] == pytest.approx(0.0, abs=1e-15)


def test_inner_sup_witness_achieves_value(rng):
    for n in (1, 2, 4):
        rho = states.random_mixed(n, rng)
        fam = BlochFamily.random(n, rng)
        value, b = inner_sup(rho, fam)
        q = averaging_observable(fam)
        assert commutator_expectation(rho, q, b) == pytest.approx(value, abs=1e-9)
        assert value == pytest.approx(trace_norm(1j * (rho @ q - q @ rho)))
        np.testing.assert_allclose(b @ b, np.eye(2 ** n), atol=1e-12)


def test_oracle_random_b(rng):
    cat = states.standard_state("cat", 3)
    v = oracle_random_b(cat, CANONICAL_P, samples=2000, seed=1)
    assert 0.5 <= v <= 1.0 + 1e-9
    assert oracle_random_b(states.standard_state("maximally_mixed", 2), CANONICAL_P, 500) <= 1e-10
    for _ in range(20):
        rho = states.random_mixed(2, rng)
        fam = BlochFamily.random(2, rng)
        assert oracle_random_b(rho, fam, 300, int(rng.integers(100))) <= inner_sup(rho, fam)[0] + 1e-9


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_estimate_cat(n):
    rep = estimate_e(states.standard_state("cat", n))
    assert rep.e_estimate == pytest.approx(1.0, abs=1e-6)
    q = averaging_observable(rep.witness_family)
    assert commutator_expectation(states.standard_state("cat", n), q, rep.witness_b) == pytest.approx(
        rep.e_estimate, abs=1e-8)


def test_estimate_simple_states():
    assert estimate_e(states.standard_state("maximally_mixed", 3)).e_estimate <= 1e-9
    assert estimate_e(np.diag([1.0, 0.0])).e_estimate == pytest.approx(1.0, abs=1e-6)
    cat, mixed = states.standard_state("cat", 3), states.standard_state("maximally_mixed", 3)
    for t in (0.25, 0.5, 0.75):
        assert estimate_e(t * cat + (1 - t) * mixed).e_estimate == pytest.approx(t, abs=1e-6)


def test_pure_product_state_value():
    # each qubit contributes an independent rotation; the optimum is 1/sqrt(n)
    for n in (2, 3, 4):
        rep = estimate_e(states.standard_state("basis", n, "0" * n))
        assert rep.e_estimate == pytest.approx(1 / math.sqrt(n), abs=1e-6)


def test_ascent_agrees_with_nelder_mead(rng):
    for n in (2, 3, 4):
        rho = states.random_mixed(n, rng, rank=2)
        nm = estimate_e(rho).e_estimate
        asc = estimate_e(rho, ASCENT).e_estimate
        assert asc == pytest.approx(nm, abs=1e-6)


def test_commutator_model_matches_direct(rng):
    for n, rank in ((3, 1), (3, None), (5, 2)):
        rho = states.random_mixed(n, rng, rank=rank)
        model = CommutatorModel(rho)
        for _ in range(5):
            fam = BlochFamily.random(n, rng)
            assert model.value(fam.angles.ravel()) == pytest.approx(inner_sup(rho, fam)[0], abs=1e-12)


def test_ascent_is_monotone(rng):
    rho = states.random_mixed(3, rng)
    model = CommutatorModel(rho)
    x0 = BlochFamily.random(3, rng).angles.ravel()
    start = model.value(x0)
    for iters in (1, 2, 5, 50):
        _, val, _, _ = model.ascend(x0, max_iter=iters)
        assert val >= start - 1e-15
        start = val


def test_estimate_is_deterministic(rng):
    rho = states.random_mixed(2, rng)
    a, b = estimate_e(rho), estimate_e(rho)
    assert a.e_estimate == b.e_estimate
    np.testing.assert_array_equal(a.witness_family.angles, b.witness_family.angles)
    assert a.to_json().keys() == {"e", "witness_angles", "starts", "converged"}
    assert a.starts == 16


def test_local_unitary_invariance(rng):
    rho = states.random_mixed(3, rng, rank=2)
    u = np.kron(np.kron(random_unitary(2, rng), random_unitary(2, rng)), random_unitary(2, rng))
    a = estimate_e(rho, ASCENT).e_estimate
    b = estimate_e(u @ rho @ u.conj().T, ASCENT).e_estimate
    assert a == pytest.approx(b, abs=1e-5)


def test_estimate_in_unit_interval(rng):
    for n in (1, 2, 3):
        e = estimate_e(states.random_mixed(n, rng), ASCENT).e_estimate
        assert 0.0 <= e <= 1.0 + 1e-9


def test_D_cat_below_r_wn():
    rho = apply_D(states.standard_state("cat", 4), 0.2).rho
    assert estimate_e(rho).e_estimate <= r_wn(4, 0.2) + 1e-6


def test_hypersurface_examples(rng):
    for n in (5, 6):
        rho, b = states.pair_mixture([("0" * n, "1" * n, 1.0)])
        res = hypersurface_check(rho, CANONICAL_P, b)
        assert abs(res.value) == pytest.approx(1.0)
        assert res.threshold == pytest.approx(2 / math.sqrt(n))
        assert res.certifies_entanglement
    res = hypersurface_check(states.standard_state("maximally_mixed", 3), CANONICAL_P, np.eye(8))
    assert res.value == 0.0 and res.separable_consistent
    for seed in range(5):
        rho = states.random_separable(4, 5, seed)
        assert hypersurface_check(rho, BlochFamily.random(4, rng), inner_sup(rho)[1]).separable_consistent
    with pytest.raises(BoundError):
        hypersurface_check(rho, CANONICAL_P, 2 * np.eye(16))


def test_cluster_bound():
    assert cluster_bound(5, [1] * 5) == pytest.approx(2 / math.sqrt(5))
    assert cluster_bound(6, [6]) == pytest.approx(2.0)
    assert cluster_bound(4, [2, 2]) == pytest.approx(1.41421356237, abs=1e-10)
    with pytest.raises(BoundError):
        cluster_bound(4, [2, 1])


def test_gl_bound():
    assert gl_bound(5, 5) == 0.0
    assert gl_bound(2, 1) == pytest.approx(1.0)
    assert gl_bound(1, 1) == 0.0
    for n in range(2, 15):
        vals = [gl_bound(n, l) for l in range(1, n + 1)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))


def brute_sigma(word, l):
    fractions = [sum(word[i] for i in sub) / l for sub in itertools.combinations(range(len(word)), l)]
    return float(np.std(fractions))


def test_hypergeom_sigma():
    assert hypergeom_sigma(6, 6, 0.5) == 0.0
    assert hypergeom_sigma(6, 2, 0.0) == 0.0 and hypergeom_sigma(6, 2, 1.0) == 0.0
    assert hypergeom_sigma(6, 2, 0.5) == pytest.approx(brute_sigma([1, 1, 1, 0, 0, 0], 2), abs=1e-12)
    # sqrt((6-2)/(2*5) * 1/4) by hand
    assert hypergeom_sigma(6, 2, 0.5) == pytest.approx(math.sqrt(0.1), abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(bits=st.lists(st.integers(0, 1), min_size=2, max_size=9), data=st.data())
def test_hypergeom_sigma_property(bits, data):
    l = data.draw(st.integers(1, len(bits)))
    want = brute_sigma(bits, l)
    assert hypergeom_sigma(len(bits), l, sum(bits) / len(bits)) == pytest.approx(want, abs=1e-12)


def test_r_wn():
    assert r_wn(5, 0.0) == pytest.approx(1.0)
    assert r_wn(5, 1.0) == pytest.approx(0.0, abs=1e-15)
    # n=2: l=1 term 2w(1-w) * 1, l=2 term 0, plus (1-w)^2
    assert r_wn(2, 0.3) == pytest.approx(2 * 0.3 * 0.7 + 0.49)
    for n in range(2, 11):
        for w in np.arange(0.1, 1.0, 0.1):
            assert 0.0 <= r_wn(n, w) <= asymptotic_bound(n, w, 0.5)


def test_asymptotic_bound():
    assert asymptotic_bound(10, 0.5, 0.5) == pytest.approx(0.8 + 1 / math.sqrt(2.5))
    ratios = [asymptotic_bound(4 * n, 0.3, 0.5) / asymptotic_bound(n, 0.3, 0.5) for n in (10, 1000, 10 ** 6)]
    assert abs(ratios[-1] - 0.5) < abs(ratios[0] - 0.5)
    assert ratios[-1] == pytest.approx(0.5, abs=2e-3)


def test_haupt_x():
    for n in (1, 3, 8):
        assert haupt_x(n, 0.0) == pytest.approx(1.0)
        assert haupt_x(n, 1.0) == pytest.approx(1 / math.sqrt(n))
        for w in (0.1, 0.5):
            assert haupt_x(n, w) >= 1 / math.sqrt(n)
            assert haupt_x(n, w) == pytest.approx(max(haupt_term(n, w, k) for k in range(n + 1)))
    assert haupt_term(4, 0.3, 0) == pytest.approx(0.5)
    assert haupt_term(4, 0.3, 4) == pytest.approx(r_wn(4, 0.3))


def test_bound_table():
    table = bound_table([3, 2], [0.3, 0.0, 0.1], alpha=0.5)
    assert [(r[0], r[1]) for r in table.rows] == [(2, 0.0), (2, 0.1), (2, 0.3), (3, 0.0), (3, 0.1), (3, 0.3)]
    assert table.rows[0][3] is None
    rec = next(iter(table.records()))
    assert tuple(rec) == table.HEADER
    with pytest.raises(BoundError):
        bound_table([2], [0.1], alpha=1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        EstimateConfig(restarts=1)
    with pytest.raises(ValueError):
        EstimateConfig(method="bfgs")
    rep = estimate_e(states.standard_state("cat", 3), EstimateConfig(families="P"))
    assert rep.e_estimate == pytest.approx(1.0) and rep.families == "P"
