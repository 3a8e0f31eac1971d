import itertools
import math

import numpy as np
import pytest

from qfragile import states
from qfragile.channels import (
    ChannelError,
    InstrumentConfig,
    apply_D,
    apply_Dl,
    apply_G,
    apply_Gl,
    apply_local,
    binomial_weight,
    gl_decomposition,
    measurement_branches,
)
from qfragile.observables import CANONICAL_P, SIGMA_X, SIGMA_Y, SIGMA_Z, averaging_observable, embed


def kraus(kind, i, n):
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    if kind == "dephase":
        return [embed(p0, i, n), embed(p1, i, n)]
    if kind == "bitflip":
        return [embed(SIGMA_X, i, n)]
    # Pauli twirl: (rho + X rho X + Y rho Y + Z rho Z)/4
    return [0.5 * embed(p, i, n) for p in (np.eye(2), SIGMA_X, SIGMA_Y, SIGMA_Z)]


def apply_kraus(ops, rho):
    return sum(k @ rho @ k.conj().T for k in ops)


@pytest.mark.parametrize("kind", ["dephase", "bitflip", "depolarize"])
def test_local_matches_kraus(kind, rng):
    for n in (1, 2, 4):
        rho = states.random_mixed(n, rng)
        for i in range(1, n + 1):
            np.testing.assert_allclose(apply_local(kind, i, rho), apply_kraus(kraus(kind, i, n), rho), atol=1e-14)


def test_local_examples():
    np.testing.assert_allclose(apply_local("dephase", 1, states.standard_state("cat", 2)), np.diag([0.5, 0, 0, 0.5]))
    rho = states.standard_state("pi", 3)
    np.testing.assert_allclose(apply_local("bitflip", 2, apply_local("bitflip", 2, rho)), rho)
    np.testing.assert_allclose(apply_local("depolarize", 1, np.diag([1.0, 0.0])), np.eye(2) / 2)
    with pytest.raises(ChannelError):
        apply_local("dephase", 3, rho.reshape(8, 8)[:4, :4])
    with pytest.raises(ChannelError):
        apply_local("amplitude", 1, np.eye(2) / 2)


def test_depolarize_is_twirl_of_dephase(rng):
    rho = states.random_mixed(3, rng)
    for i in (1, 2, 3):
        m = apply_local("dephase", i, rho)
        np.testing.assert_allclose(apply_local("depolarize", i, rho), 0.5 * (apply_local("bitflip", i, m) + m), atol=1e-15)


def test_G_examples(rng):
    rho = states.random_mixed(3, rng)
    np.testing.assert_allclose(apply_G(rho, 0.0).rho, rho)
    full = apply_G(rho, 1.0).rho
    np.testing.assert_allclose(full, np.diag(np.diag(full)), atol=1e-15)
    for n in (2, 3):
        for w in (0.2, 0.7):
            out = apply_G(states.standard_state("cat", n), w).rho
            assert out[0, -1] == pytest.approx(0.5 * (1 - w) ** n)


def test_D_examples(rng):
    rho = states.random_mixed(3, rng)
    np.testing.assert_allclose(apply_D(rho, 0.0).rho, rho)
    np.testing.assert_allclose(apply_D(rho, 1.0).rho, np.eye(8) / 8, atol=1e-15)
    with pytest.raises(ChannelError):
        apply_D(rho, 1.2)


def test_G_matches_kraus_product(rng):
    n, w = 3, 0.35
    rho = states.random_mixed(n, rng)
    want = rho
    for i in range(1, n + 1):
        want = w * apply_kraus(kraus("dephase", i, n), want) + (1 - w) * want
    np.testing.assert_allclose(apply_G(rho, w).rho, want, atol=1e-14)


def test_subset_instruments(rng):
    n = 4
    rho = states.random_mixed(n, rng)
    for fn in (apply_Gl, apply_Dl):
        np.testing.assert_allclose(fn(rho, 0).rho, rho)
    full = rho
    for i in range(1, n + 1):
        full = apply_local("dephase", i, full)
    np.testing.assert_allclose(apply_Gl(rho, n).rho, full)
    np.testing.assert_allclose(apply_Dl(rho, n).rho, np.eye(16) / 16, atol=1e-15)
    with pytest.raises(ChannelError):
        apply_Gl(rho, 5)


def test_subset_average_by_hand(rng):
    rho = states.random_mixed(3, rng)
    want = sum(apply_local("depolarize", i, apply_local("depolarize", j, rho))
               for i, j in itertools.combinations(range(1, 4), 2)) / 3
    res = apply_Dl(rho, 2)
    np.testing.assert_allclose(res.rho, want, atol=1e-15)
    assert res.branches == 3


@pytest.mark.parametrize("w", [0.2, 0.3, 0.5])
def test_binomial_decomposition(w, rng):
    n = 4
    rho = states.random_mixed(n, rng)
    g = sum(binomial_weight(n, w, l) * apply_Gl(rho, l).rho for l in range(n + 1))
    d = sum(binomial_weight(n, w, l) * apply_Dl(rho, l).rho for l in range(n + 1))
    np.testing.assert_allclose(g, apply_G(rho, w).rho, atol=1e-9)
    np.testing.assert_allclose(d, apply_D(rho, w).rho, atol=1e-9)


def test_binomial_weight():
    assert binomial_weight(4, 0.5, 2) == pytest.approx(0.375)
    assert binomial_weight(5, 0.0, 0) == 1.0 and binomial_weight(5, 0.0, 2) == 0.0
    for n in (1, 7, 30):
        for w in (0.05, 0.5, 0.93):
            assert math.fsum(binomial_weight(n, w, l) for l in range(n + 1)) == pytest.approx(1.0, abs=1e-12)
            assert binomial_weight(n, w, 1) == pytest.approx(math.comb(n, 1) * w * (1 - w) ** (n - 1))


def test_monte_carlo_mode():
    rho = states.standard_state("cat", 4)
    cfg = InstrumentConfig("monte_carlo", samples=4000, seed=11)
    a, b = apply_Dl(rho, 2, cfg), apply_Dl(rho, 2, cfg)
    np.testing.assert_array_equal(a.rho, b.rho)
    assert a.mode == "monte_carlo" and a.seed == 11
    assert np.max(np.abs(a.rho - apply_Dl(rho, 2).rho)) < 5 / np.sqrt(4000)
    assert np.trace(a.rho).real == pytest.approx(1.0)
    with pytest.raises(ChannelError):
        InstrumentConfig("sampled")


def test_measurement_branches():
    psi = np.zeros(8, dtype=complex)
    psi[0] = psi[7] = 1 / np.sqrt(2)
    branches = measurement_branches(psi, [2])
    assert [(g, round(p, 12)) for g, p, _ in branches] == [("0", 0.5), ("1", 0.5)]
    np.testing.assert_allclose(np.abs(branches[1][2]), np.eye(8)[7])


def test_gl_decomposition_reassembles(rng):
    n = 4
    psi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    for l in range(1, n + 1):
        parts = gl_decomposition(psi, l)
        assert math.fsum(p for _, _, p, _ in parts) == pytest.approx(1.0)
        back = sum(p * np.outer(v, v.conj()) for _, _, p, v in parts)
        np.testing.assert_allclose(back, apply_Gl(rho, l).rho, atol=1e-13)


def test_instrument_outputs_are_states(rng):
    for n in (1, 3):
        rho = states.random_mixed(n, rng)
        for out in (apply_G(rho, 0.3).rho, apply_D(rho, 0.6).rho, apply_Gl(rho, 1).rho, apply_Dl(rho, n).rho):
            assert states.validate_density(out).ok


def test_order_independence(rng):
    rho = states.random_mixed(3, rng)
    np.testing.assert_allclose(apply_D(rho, 0.4, [3, 1, 2]).rho, apply_D(rho, 0.4).rho, atol=1e-15)


def test_canonical_observable_unchanged_by_dephasing(rng):
    # dephasing in the canonical basis commutes with P-bar
    rho = states.random_mixed(3, rng)
    out = apply_G(rho, 1.0).rho
    pbar = averaging_observable(CANONICAL_P, 3)
    np.testing.assert_allclose(out @ pbar, pbar @ out, atol=1e-15)
