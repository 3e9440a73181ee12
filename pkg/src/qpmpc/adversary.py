"""Semi-honest attack simulations and vote-count leakage analysis.

Attacks are observers attached to a live round of the LCM protocol: at the
chosen hook point the attacker inspects (or copies) registers it holds, and
the resulting outcome law is compared with what the attacker would see if
the other parties' inputs carried no signal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, OwnershipError, PhaseError
from .numtheory import lcm_many, random_odd, two_adic_valuation
from .protocols.config import DEFAULT_M, lcm_width, vote_width
from .protocols.lcm import lcm_round
from .protocols.session import spawn_rngs
from .protocols.transcript import Transcript
from .protocols.voting import run_qov
from .qsim import (
    COMPUTATIONAL,
    FOURIER,
    FOURIER_INVERSE,
    MeasurementDistribution,
    Register,
    apply_cnot_copy,
    distribution_of,
)

DIRECT = "direct"
PRE_PERIOD = "pre_period"
POST_PERIOD = "post_period"


@dataclass
class AttackReport:
    kind: str
    attacker: int
    register: str
    instant: str
    observed: MeasurementDistribution
    reference: MeasurementDistribution
    max_deviation: float
    tv_distance: float
    # quantities the attacker cannot know in the protocol (e.g. P0's outcome k)
    test_only: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, kind, attacker, register, instant, observed, reference, test_only=None):
        if len(observed) != len(reference):
            raise ValueError("observed and reference laws live on different outcome spaces")
        diff = np.abs(observed.probs - reference.probs)
        return cls(
            kind, attacker, register, instant, observed, reference,
            float(diff.max()), float(0.5 * diff.sum()), dict(test_only or {}),
        )

    def mass_near(self, points: Sequence[float], radius: int = 1) -> float:
        """Observed probability within ``radius`` outcomes of any of ``points`` (cyclically)."""
        size = len(self.observed)
        picked = set()
        for p in points:
            centre = int(round(p))
            picked.update((centre + d) % size for d in range(-radius, radius + 1))
        return float(self.observed.probs[sorted(picked)].sum())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "attacker": self.attacker,
            "register": self.register,
            "instant": self.instant,
            "basis": self.observed.basis,
            "observed": _sparse_law(self.observed),
            "reference": _sparse_law(self.reference),
            "max_deviation": self.max_deviation,
            "tv_distance": self.tv_distance,
            "test_only": {k: v for k, v in self.test_only.items()},
        }


def _sparse_law(dist: MeasurementDistribution, limit: int = 4096) -> dict[str, float]:
    law = dist.as_dict(tol=1e-12)
    if len(law) > limit:
        return {}
    return {str(k): v for k, v in law.items()}


def _uniform(size: int, basis: str, support: Sequence[int] | None = None) -> MeasurementDistribution:
    probs = np.zeros(size)
    if support is None:
        probs[:] = 1.0 / size
    else:
        probs[list(support)] = 1.0 / len(support)
    return MeasurementDistribution(probs, basis)


def residue_law(x: int, u: int, width: int) -> MeasurementDistribution:
    """Law of j mod x for j uniform on [0, 2^u): residue Y has ceil((2^u - Y)/x) preimages."""
    size = 1 << u
    probs = np.zeros(1 << width)
    for y in range(min(x, size)):
        probs[y] = -(-(size - y) // x) / size
    return MeasurementDistribution(probs, COMPUTATIONAL)


def _run_round(inputs, m, seed, observer, extra=()):
    rngs = spawn_rngs(seed, len(inputs) + 1)
    return lcm_round(inputs, m, Transcript(), rngs[0], rngs[1:], DEFAULT_M, [observer], extra)


def attack_direct(
    inputs: Sequence[int], m: int, attacker: int, when: str = "before", register: str | None = None, seed=0
) -> AttackReport:
    """Attacker measures a register it holds, before or after period finding."""
    n = len(inputs)
    u = lcm_width(n, m)
    register = register or f"e{attacker}"
    if when not in ("before", "after"):
        raise InvalidInputError("when must be 'before' or 'after'")
    if when == "after" and register in ("h", "t"):
        raise PhaseError("after period finding h and t are definite; only e_i can be attacked")
    hook = ("after_oracle", attacker) if when == "before" else ("qpa_completed", 0)
    captured: list[AttackReport] = []

    def observer(event, party, session):
        if (event, party) != hook:
            return
        if not session.holds(attacker, register):
            raise OwnershipError(f"P{attacker} does not hold {register!r} at {event}")
        observed = distribution_of(session.state, register, COMPUTATIONAL)
        if register.startswith("e"):
            x = inputs[int(register[1:])]
            if when == "before":
                reference = residue_law(x, u, m)
            else:
                reference = _uniform(1 << m, COMPUTATIONAL, range(x))
        else:
            reference = _uniform(1 << u, COMPUTATIONAL)
        captured.append(AttackReport.compare(DIRECT, attacker, register, event, observed, reference))

    _run_round(inputs, m, seed, observer)
    return captured[0]


PRE_INSTANTS = ("prepared", "after_oracle", "received")


def attack_pre_period(
    inputs: Sequence[int], m: int, attacker: int, instant: str = "after_oracle", register: str | None = None, seed=0
) -> AttackReport:
    """Attacker applies QFT^dagger to h or t mid-protocol and reads the outcome law.

    ``instant='received'`` with attacker 0 is the moment t returns to P0 after
    every oracle and before the uncompute.
    """
    if instant not in PRE_INSTANTS:
        raise PhaseError(f"pre-period attacks happen before period finding, not at {instant!r}")
    if instant == "prepared" and attacker != 0:
        raise PhaseError("only P0 acts at the preparation step")
    n = len(inputs)
    u = lcm_width(n, m)
    captured: list[AttackReport] = []

    def observer(event, party, session):
        if event != instant or party != attacker or captured:
            return
        reg = register or ("t" if session.holds(attacker, "t") else "h")
        if not session.holds(attacker, reg):
            raise OwnershipError(f"P{attacker} does not hold {reg!r} at {event}")
        observed = distribution_of(session.state, reg, FOURIER_INVERSE)
        reference = _uniform(1 << u, FOURIER_INVERSE)
        captured.append(AttackReport.compare(PRE_PERIOD, attacker, reg, event, observed, reference))

    _run_round(inputs, m, seed, observer)
    if not captured:
        raise PhaseError(f"P{attacker} never reached {instant!r}")
    return captured[0]


def attack_post_period(inputs: Sequence[int], m: int, attacker: int, seed=0, copy: bool = True) -> AttackReport:
    """Attacker CNOT-copies t on its turn, then applies QFT to the copy after P0 measures h.

    The reference law is uniform over the T points k + r*2^u/T; k (P0's outcome)
    and T are recorded as test-only knowledge.
    """
    n = len(inputs)
    u = lcm_width(n, m)
    size = 1 << u
    period = lcm_many(inputs)
    take_at = ("prepared", 0) if attacker == 0 else ("received", attacker)
    state = {"copied": False}
    captured: list[AttackReport] = []

    def observer(event, party, session):
        if (event, party) == take_at and copy and not state["copied"]:
            session.apply(attacker, "cnot", apply_cnot_copy, ("t", "copy"))
            state["copied"] = True
        elif event == "qpa_completed":
            if not state["copied"]:
                raise PhaseError("no copy of t was taken before period finding")
            k = session.facts["phi"]
            observed = distribution_of(session.state, "copy", FOURIER)
            ideal = [(k + r * size / period) % size for r in range(period)]
            support = sorted({int(round(p)) % size for p in ideal})
            reference = _uniform(size, FOURIER, support)
            captured.append(
                AttackReport.compare(
                    POST_PERIOD, attacker, "copy", event, observed, reference,
                    {"k": k, "period": period, "exact": size % period == 0},
                )
            )

    _run_round(inputs, m, seed, observer, extra=[Register("copy", u, attacker)])
    return captured[0]


@dataclass(frozen=True)
class LeakageReport:
    z: int
    m1: int | None
    leak_flag: bool
    lambda_bounds: tuple[int, int]
    vote_passed: bool = False

    def to_dict(self) -> dict:
        return {
            "z": self.z,
            "m1": self.m1,
            "leak_flag": self.leak_flag,
            "lambda_bounds": list(self.lambda_bounds),
            "vote_passed": self.vote_passed,
        }


def leakage_probe(z: int, m_vote: int, M: int, n: int) -> LeakageReport:
    """What P0 can infer about the number of "no" votes from z.

    v2(z) equals v2(sum x_k) because q is odd and the sum is below 2^m_vote;
    a sum divisible by 2^m1 needs at least ceil(2^m1 / M) nonzero terms.
    """
    if not 0 <= z < (1 << m_vote):
        raise InvalidInputError(f"z={z} outside [0, 2^{m_vote})")
    if z == 0:
        return LeakageReport(0, None, False, (0, 0), vote_passed=True)
    m1 = two_adic_valuation(z)
    lo = max(1, -(-(1 << m1) // M))
    return LeakageReport(z, m1, (1 << m1) > M, (lo, n))


@dataclass(frozen=True)
class LeakTrial:
    """Ground truth for one Monte Carlo trial; ``a`` and ``s`` are never attacker-visible."""

    lam: int
    total: int
    q: int
    z: int
    s: int
    a: int
    report: LeakageReport


def leak_trials(
    n: int, M: int, lam: int, trials: int, seed=0, diagnostic: bool = False
) -> list[LeakTrial]:
    if not 1 <= lam <= n:
        raise InvalidInputError("need 1 <= lambda <= n")
    m = vote_width(n, M)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        if diagnostic:
            total = lam
        else:
            total = int(rng.integers(1, M + 1, size=lam).sum())
        q = random_odd(m, rng)
        z = (q * total) % (1 << m)
        m1 = two_adic_valuation(total)
        s = total >> m1
        a = (s * q * (1 << m1) - z) >> m
        out.append(LeakTrial(lam, total, q, z, s, a, leakage_probe(z, m, M, n)))
    return out


def estimate_leak_probability(
    n: int, M: int, lam: int, trials: int, seed=0, diagnostic: bool = False, via_protocol: bool = False
) -> float:
    """Fraction of trials in which z lets P0 narrow the count of "no" votes."""
    if not via_protocol:
        recs = leak_trials(n, M, lam, trials, seed, diagnostic)
        return sum(r.report.leak_flag for r in recs) / trials
    if diagnostic:
        raise InvalidInputError("diagnostic mode forces x_i = 1 and bypasses the protocol")
    votes = [0] * lam + [1] * (n - lam)
    seeds = np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64)
    hits = 0
    for s in seeds:
        outcome, _ = run_qov(votes, M, int(s))
        hits += leakage_probe(outcome.z, outcome.m_vote, M, n).leak_flag
    return hits / trials
