import numpy as np
import pytest

from qpmpc.errors import InvalidInputError, RoundsExhausted
from qpmpc.numtheory import brute_force_period
from qpmpc.qpa import (
    QpaConfig,
    choose_u,
    exact_single_round_success,
    phi_law,
    run_qpa,
    single_round_success_rate,
)


def direct_phi_law(T, u):
    """|sum over j = c mod T of e^{-2 pi i j k / N}|^2 / N^2, summed over residues c."""
    N = 1 << u
    j = np.arange(N)
    k = np.arange(N)[:, None]
    phase = np.exp(-2j * np.pi * j * k / N)
    probs = np.zeros(N)
    for c in range(T):
        probs += np.abs(phase[:, j % T == c].sum(axis=1)) ** 2
    return probs / N**2


def test_choose_u():
    assert choose_u(4) == 9
    assert choose_u(1) == 3
    with pytest.raises(InvalidInputError):
        choose_u(0)


def test_config_validation():
    assert QpaConfig(v=3).u == 7
    with pytest.raises(InvalidInputError):
        QpaConfig(v=3, u=6)
    with pytest.raises(InvalidInputError):
        QpaConfig(v=3, max_rounds=0)


@pytest.mark.parametrize("T", [1, 3, 5, 6, 7, 12, 15])
def test_phi_law_matches_direct_sum(T):
    np.testing.assert_allclose(phi_law(T, 4), direct_phi_law(T, 9), atol=1e-12)


@pytest.mark.parametrize("T", [1, 2, 4, 8])
def test_phi_law_exact_for_power_of_two_period(T):
    law = phi_law(T, 4)
    support = np.flatnonzero(law > 1e-12)
    assert list(support) == [r * 512 // T for r in range(T)]
    np.testing.assert_allclose(law[support], 1 / T, atol=1e-12)


@pytest.mark.parametrize("T", range(1, 16))
def test_run_qpa_recovers_period(T):
    f = lambda j: j % T
    for seed in range(3):
        res = run_qpa(f, QpaConfig(v=4, seed=seed))
        assert res.period == brute_force_period(f, 9).period
        assert res.rounds_used == len(res.phi_samples) == len(res.candidates)


def test_run_qpa_is_deterministic():
    cfg = QpaConfig(v=4, seed=11)
    a = run_qpa(lambda j: j % 13, cfg)
    b = run_qpa(lambda j: j % 13, cfg)
    assert a == b


def test_rounds_exhausted_when_period_out_of_range():
    # the period 16 is not below 2^v, so no candidate can verify
    with pytest.raises(RoundsExhausted) as info:
        run_qpa(lambda j: j % 16, QpaConfig(v=4, max_rounds=5, seed=0))
    assert len(info.value.history) == 5
    assert info.value.best_candidate in info.value.history


@pytest.mark.parametrize("T", [1, 2, 3, 7, 13])
def test_single_round_rate_agrees_with_exact_law(T):
    trials = 10_000
    p = exact_single_round_success(T, 4)
    rate = single_round_success_rate(T, 4, trials, seed=T)
    sigma = max(np.sqrt(p * (1 - p) / trials), 1 / trials)
    assert abs(rate - p) < 5 * sigma


def test_single_round_rate_rejects_bad_period():
    with pytest.raises(InvalidInputError):
        single_round_success_rate(16, 4, 10)
