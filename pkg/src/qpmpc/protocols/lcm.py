"""Secure multiparty LCM via period finding on the connected residue function."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import GuardError, InvalidInputError, ProtocolReject, RoundsExhausted
from ..numtheory import cf_recover
from ..qsim import (
    FOURIER_INVERSE,
    Register,
    RegisterLayout,
    apply_cnot_copy,
    apply_hadamard_uniform,
    apply_oracle,
)
from .config import DEFAULT_M, DEFAULT_MAX_ROUNDS, GUARD_MAX_U, LcmOutcome, lcm_width
from .session import Session, spawn_rngs
from .transcript import END, ROUND, Transcript
from .voting import qov

SECTION = "lcm"


def vote_bit(x: int, candidate: int) -> int:
    if x < 1 or candidate < 1:
        raise InvalidInputError("vote_bit expects positive integers")
    return int(candidate % x == 0)


def residue_function(x: int) -> Callable[[int], int]:
    return lambda j: j % x


def connected_function(xs: Sequence[int], m: int) -> Callable[[int], int]:
    """f(j) = (j mod x_0) || (j mod x_1) || ... as m-bit fields, x_0 most significant."""
    xs = list(xs)
    if any(not 1 <= x < (1 << m) for x in xs):
        raise InvalidInputError(f"moduli must lie in [1, 2^{m})")
    n = len(xs)

    def f(j: int) -> int:
        out = 0
        for x in xs:
            out = (out << m) | (j % x)
        return out

    f.fields = lambda value: tuple((value >> (m * (n - 1 - i))) & ((1 << m) - 1) for i in range(n))
    return f


def lcm_layout(n: int, m: int, extra: Sequence[Register] = ()) -> RegisterLayout:
    u = lcm_width(n, m)
    regs = [Register("h", u, 0), Register("t", u, 0)]
    regs += [Register(f"e{i}", m, i) for i in range(n)]
    return RegisterLayout(regs + list(extra))


@dataclass
class RoundRecord:
    phi: int | None
    candidate: int | None
    votes: list[int]
    accepted: bool
    z: int | None = None


def lcm_round(
    inputs: Sequence[int],
    m: int,
    transcript: Transcript,
    nature: np.random.Generator,
    party_rngs: Sequence[np.random.Generator],
    M: int = DEFAULT_M,
    observers=(),
    extra_registers: Sequence[Register] = (),
) -> RoundRecord:
    """One repetition: period finding, measurement of every e_i, broadcast, vote."""
    n = len(inputs)
    u = lcm_width(n, m)
    s = Session(lcm_layout(n, m, extra_registers), u, transcript, nature, SECTION, observers)

    s.apply(0, "hadamard", apply_hadamard_uniform, ("h",))
    s.apply(0, "cnot", apply_cnot_copy, ("h", "t"))
    s.notify("prepared", 0)
    s.apply(0, "oracle", apply_oracle, ("t", "e0"), residue_function(inputs[0]))
    s.notify("after_oracle", 0)
    s.send(0, 1 % n, "t")
    for i in range(1, n):
        s.apply(i, "oracle", apply_oracle, ("t", f"e{i}"), residue_function(inputs[i]))
        s.notify("after_oracle", i)
        s.send(i, (i + 1) % n, "t")

    s.apply(0, "cnot", apply_cnot_copy, ("h", "t"))
    s.check_zero(0, "t")
    phi = s.fourier_measure(0, "h", FOURIER_INVERSE)
    candidate = cf_recover(phi, 1 << u, 1 << (n * m)).denominator
    s.facts.update(phi=phi, candidate=candidate)
    s.notify("qpa_completed", 0)

    # every party measures its e_i and discards the outcome
    for i in range(n):
        s.measure(i, f"e{i}")
    s.notify("step5_done", 0)

    s.broadcast(0, "candidate", candidate)
    votes = [vote_bit(x, candidate) for x in inputs]
    outcome = qov(votes, M, transcript, nature, party_rngs)
    return RoundRecord(phi, candidate, votes, bool(outcome.y), outcome.z)


def check_guard(n: int, m: int, force: bool = False):
    u = lcm_width(n, m)
    if u > GUARD_MAX_U and not force:
        raise GuardError(
            f"2nm+1 = {u} exceeds {GUARD_MAX_U}: 2^{u} basis terms per round; pass force=True to run anyway"
        )


def run_smqlcmc(
    inputs: Sequence[int],
    m: int,
    seed=0,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    M: int = DEFAULT_M,
    force: bool = False,
    observers=(),
    extra_registers: Sequence[Register] = (),
) -> tuple[LcmOutcome, Transcript]:
    """Repeat rounds until the vote accepts; the accepted candidate is the output."""
    n = len(inputs)
    if n < 2:
        raise InvalidInputError("the LCM protocol needs at least two parties")
    if any(not 1 <= x < (1 << m) for x in inputs):
        raise InvalidInputError(f"inputs must lie in [1, 2^{m})")
    check_guard(n, m, force)
    rngs = spawn_rngs(seed, n + 1)
    transcript = Transcript()
    history: list[int | None] = []
    phis: list[int] = []
    for r in range(1, max_rounds + 1):
        transcript.record(ROUND, 0, section=SECTION, payload=(r,))
        try:
            rec = lcm_round(inputs, m, transcript, rngs[0], rngs[1:], M, observers, extra_registers)
        except ProtocolReject:
            history.append(None)
            continue
        history.append(rec.candidate)
        phis.append(rec.phi)
        if rec.accepted:
            transcript.record(END, 0, section=SECTION)
            return LcmOutcome(rec.candidate, r, history, phis), transcript
    transcript.record(END, 0, section=SECTION)
    seen = [c for c in history if c is not None]
    raise RoundsExhausted(
        f"vote never passed in {max_rounds} rounds",
        best_candidate=max(seen, key=seen.count) if seen else None,
        history=history,
    )
