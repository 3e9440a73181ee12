"""Quantum period finding with continued-fraction post-processing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError, RoundsExhausted
from .numtheory import cf_recover
from .qsim import (
    FOURIER_INVERSE,
    RegisterLayout,
    apply_hadamard_uniform,
    apply_oracle,
    distribution_of,
    fourier_measure,
    new_state,
)

DEFAULT_MAX_ROUNDS = 64


def choose_u(v: int) -> int:
    """Input width with 2^u >= 2 * (2^v)^2 + 1, i.e. u = 2v + 1."""
    if v < 1:
        raise InvalidInputError("v must be >= 1")
    return 2 * v + 1


@dataclass
class QpaConfig:
    v: int
    u: int | None = None
    max_rounds: int = DEFAULT_MAX_ROUNDS
    seed: int = 0

    def __post_init__(self):
        if self.u is None:
            self.u = choose_u(self.v)
        if self.u < 2 * self.v + 1:
            raise InvalidInputError(f"u={self.u} violates u >= 2v+1 for v={self.v}")
        if self.max_rounds < 1:
            raise InvalidInputError("max_rounds must be >= 1")


@dataclass
class QpaResult:
    period: int
    rounds_used: int
    phi_samples: list[int] = field(default_factory=list)
    candidates: list[int] = field(default_factory=list)


def prepare(f: Callable[[int], int], u: int, v: int):
    """|0>|0> -> H on h -> U_f; the state just before the Fourier measurement."""
    layout = RegisterLayout([("h", u), ("t", v)])
    state = apply_hadamard_uniform(new_state(layout, phase_bits=u), "h")
    return apply_oracle(state, "h", "t", f)


def run_qpa(f: Callable[[int], int], config: QpaConfig) -> QpaResult:
    u, v = config.u, config.v
    rng = np.random.default_rng(config.seed)
    prepared = prepare(f, u, v)
    f0 = f(0)
    phis, candidates = [], []
    for rounds in range(1, config.max_rounds + 1):
        phi, _ = fourier_measure(prepared, "h", FOURIER_INVERSE, rng)
        candidate = cf_recover(phi, 1 << u, 1 << v).denominator
        phis.append(phi)
        candidates.append(candidate)
        # f(T) = f(0) holds for the true period; the candidate is the only thing we can test
        if f(candidate) == f0:
            return QpaResult(candidate, rounds, phis, candidates)
    best = max(candidates, key=candidates.count)
    raise RoundsExhausted(
        f"no verified period after {config.max_rounds} rounds", best_candidate=best, history=candidates
    )


def phi_law(period: int, v: int, u: int | None = None) -> np.ndarray:
    """Exact law of the measured phi for f(j) = j mod period."""
    u = choose_u(v) if u is None else u
    return distribution_of(prepare(lambda j: j % period, u, v), "h", FOURIER_INVERSE).probs


def exact_single_round_success(period: int, v: int, u: int | None = None) -> float:
    """Probability that one round's continued fraction yields denominator exactly ``period``."""
    u = choose_u(v) if u is None else u
    law = phi_law(period, v, u)
    hits = [k for k in np.flatnonzero(law > 0) if cf_recover(int(k), 1 << u, 1 << v).denominator == period]
    return float(law[hits].sum())


def single_round_success_rate(period: int, v: int, trials: int, seed: int = 0) -> float:
    """Empirical fraction of single rounds whose recovered denominator equals ``period``.

    The prepared state is identical in every round, so rounds are drawn from
    its exact phi law rather than re-simulated.
    """
    if not 1 <= period < (1 << v):
        raise InvalidInputError(f"period {period} must lie in [1, 2^v)")
    u = choose_u(v)
    law = phi_law(period, v, u)
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(np.where(law > 1e-13, law, 0.0))
    phis = np.searchsorted(cdf, rng.random(trials) * cdf[-1], side="right")
    denominators = {}
    hits = 0
    for phi in phis.tolist():
        d = denominators.get(phi)
        if d is None:
            d = denominators[phi] = cf_recover(phi, 1 << u, 1 << v).denominator
        hits += d == period
    return hits / trials
