import json
import math

import jsonschema
import numpy as np
import pytest

from qpmpc import adversary
from qpmpc.adversary import (
    attack_direct,
    attack_post_period,
    attack_pre_period,
    estimate_leak_probability,
    leak_trials,
    leakage_probe,
    residue_law,
)
from qpmpc.errors import InvalidInputError, OwnershipError, PhaseError
from qpmpc.harness import ATTACK_SCHEMA, LEAKAGE_SCHEMA, render
from qpmpc.protocols.config import lcm_width, vote_width


def dirichlet_copy_law(T, N, k):
    """QFT law of the attacker's copy once P0 has seen k, before any e_i is measured.

    Residue class c holds n_c = ceil((N - c)/T) indices spaced T apart; its
    contribution at offset d = l - k is the Dirichlet kernel sin^2(pi n_c T d/N) / sin^2(pi T d/N).
    """
    d = (np.arange(N) - k) % N
    x = np.pi * T * d / N
    law = np.zeros(N)
    for c in range(T):
        nc = -(-(N - c) // T)
        s = np.sin(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            ker = np.where(np.abs(s) < 1e-12, float(nc * nc), np.sin(nc * x) ** 2 / s**2)
        law += ker
    return law / law.sum()


def counted_residue_law(x, u, width):
    counts = np.zeros(1 << width)
    for j in range(1 << u):
        counts[j % x] += 1
    return counts / (1 << u)


# direct measurement

@pytest.mark.parametrize("inputs", [(2, 3), (3, 5), (7, 6)])
@pytest.mark.parametrize("attacker", [0, 1])
def test_direct_before_matches_preimage_counts(inputs, attacker):
    rep = attack_direct(list(inputs), 3, attacker, "before")
    u = lcm_width(2, 3)
    expected = counted_residue_law(inputs[attacker], u, 3)
    np.testing.assert_allclose(rep.observed.probs, expected, atol=1e-12)
    assert rep.max_deviation < 1e-12


def test_residue_law_closed_form():
    for x in range(1, 8):
        np.testing.assert_allclose(residue_law(x, 7, 3).probs, counted_residue_law(x, 7, 3), atol=1e-15)


def test_direct_before_on_h_is_uniform():
    rep = attack_direct([2, 3], 3, 0, "before", register="h")
    assert rep.max_deviation < 1e-12


def test_direct_after_when_period_divides():
    rep = attack_direct([2, 4], 3, 1, "after", seed=3)
    np.testing.assert_allclose(rep.observed.probs[:4], 0.25, atol=1e-12)
    assert rep.max_deviation < 1e-12


def test_direct_phase_and_ownership_errors():
    with pytest.raises(PhaseError):
        attack_direct([2, 3], 3, 0, "after", register="h")
    with pytest.raises(OwnershipError):
        attack_direct([2, 3], 3, 1, "before", register="e0")
    with pytest.raises(InvalidInputError):
        attack_direct([2, 3], 3, 1, "during")


# pre-period

@pytest.mark.parametrize("inputs", [(2, 3), (2, 4), (3, 5)])
@pytest.mark.parametrize("attacker,instant", [(0, "prepared"), (0, "after_oracle"), (1, "after_oracle"), (1, "received"), (0, "received")])
def test_pre_period_uniform(inputs, attacker, instant):
    rep = attack_pre_period(list(inputs), 3, attacker, instant)
    assert rep.max_deviation < 1e-9
    assert rep.observed.total() == pytest.approx(1.0)


def test_pre_period_rejects_late_instant():
    with pytest.raises(PhaseError):
        attack_pre_period([2, 3], 3, 0, "qpa_completed")
    with pytest.raises(PhaseError):
        attack_pre_period([2, 3], 3, 1, "prepared")


# post-period

@pytest.mark.parametrize("inputs", [(2, 4), (1, 2), (4, 4)])
@pytest.mark.parametrize("attacker", [0, 1])
def test_post_period_exact_when_period_divides(inputs, attacker):
    rep = attack_post_period(list(inputs), 3, attacker, seed=5)
    T = math.lcm(*inputs)
    N = 1 << lcm_width(2, 3)
    assert rep.test_only["exact"] and rep.test_only["period"] == T
    k = rep.test_only["k"]
    assert rep.observed.support(1e-12) == sorted((k + r * N // T) % N for r in range(T))
    assert rep.max_deviation < 1e-9


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_post_period_t6_matches_dirichlet_oracle(seed):
    rep = attack_post_period([2, 3], 3, 1, seed=seed)
    N = 1 << lcm_width(2, 3)
    k = rep.test_only["k"]
    oracle = dirichlet_copy_law(6, N, k)
    np.testing.assert_allclose(rep.observed.probs, oracle, atol=1e-10)
    mass = rep.mass_near([k + r * N / 6 for r in range(6)], radius=1)
    assert mass == pytest.approx(oracle[[int(round(k + r * N / 6 + d)) % N for r in range(6) for d in (-1, 0, 1)]].sum(), abs=1e-10)
    assert 0.9 < mass < 0.99


def test_post_period_requires_copy():
    with pytest.raises(PhaseError):
        attack_post_period([2, 4], 3, 1, copy=False)


def test_attack_report_schema():
    for rep in (
        attack_direct([2, 3], 3, 1, "before"),
        attack_pre_period([2, 3], 3, 1, "after_oracle"),
        attack_post_period([2, 4], 3, 1),
    ):
        jsonschema.validate(json.loads(render(rep)), ATTACK_SCHEMA)


# leakage

def test_leakage_probe_examples():
    assert leakage_probe(0, 6, 16, 2).vote_passed
    odd = leakage_probe(5, 6, 16, 2)
    assert (odd.m1, odd.leak_flag, odd.lambda_bounds) == (0, False, (1, 2))
    big = leakage_probe(32, 8, 16, 8)
    assert (big.m1, big.leak_flag, big.lambda_bounds) == (5, True, (2, 8))
    edge = leakage_probe(16, 8, 16, 8)
    assert not edge.leak_flag
    with pytest.raises(InvalidInputError):
        leakage_probe(64, 6, 16, 2)


def test_leakage_schema():
    for z in (0, 3, 32):
        jsonschema.validate(json.loads(render(leakage_probe(z, 8, 16, 8))), LEAKAGE_SCHEMA)


@pytest.mark.parametrize("n,M,lam", [(8, 16, 3), (4, 4, 1), (8, 8, 5), (3, 2, 3)])
def test_leak_trials_ground_truth(n, M, lam):
    m = vote_width(n, M)
    for t in leak_trials(n, M, lam, 500, seed=lam):
        assert t.z == (t.q * t.total) % (1 << m)
        assert t.s % 2 == 1 and t.s << t.report.m1 == t.total
        assert t.s * t.q * (1 << t.report.m1) - t.z == t.a << m
        lo, hi = t.report.lambda_bounds
        assert lo <= lam <= hi
        assert t.report.leak_flag == ((1 << t.report.m1) > M)


def test_leak_diagnostic_mode_sum_is_lambda():
    for t in leak_trials(8, 4, 4, 50, diagnostic=True):
        assert t.total == 4 and t.report.m1 == 2


def test_leak_estimate_via_protocol_agrees():
    classical = estimate_leak_probability(4, 2, 4, 400, seed=1)
    quantum = estimate_leak_probability(4, 2, 4, 400, seed=2, via_protocol=True)
    assert abs(classical - quantum) < 0.12
    with pytest.raises(InvalidInputError):
        estimate_leak_probability(4, 2, 4, 10, diagnostic=True, via_protocol=True)


def test_leak_rejects_bad_lambda():
    with pytest.raises(InvalidInputError):
        leak_trials(4, 4, 5, 10)
