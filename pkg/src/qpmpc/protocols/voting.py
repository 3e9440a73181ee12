"""Quantum one-vote-down vote built on the summation protocol."""
from __future__ import annotations

from functools import partial
from typing import Sequence

import numpy as np

from ..errors import InvalidInputError
from ..numtheory import mod_inverse, random_odd
from ..qsim import (
    FOURIER,
    FOURIER_INVERSE,
    RegisterLayout,
    apply_cnot_copy,
    apply_fourier,
    apply_mod_mult,
    apply_phase_power,
)
from .config import VoteOutcome, vote_width
from .session import Session, spawn_rngs
from .transcript import END, Transcript

SECTION = "qov"


def mask_vote(c: int, M: int, rng: np.random.Generator) -> int:
    """A "no" vote becomes a random value in [1, M]; a "yes" vote becomes 0."""
    return 0 if c else int(rng.integers(1, M + 1))


def qov(
    votes: Sequence[int],
    M: int,
    transcript: Transcript,
    nature: np.random.Generator,
    party_rngs: Sequence[np.random.Generator],
    observers=(),
) -> VoteOutcome:
    n = len(votes)
    if n < 2:
        raise InvalidInputError("the quantum vote needs at least two parties")
    if M < 2:
        raise InvalidInputError("M must be >= 2")
    if any(c not in (0, 1) for c in votes):
        raise InvalidInputError("votes must be bits")
    m = vote_width(n, M)
    xs = [mask_vote(c, M, party_rngs[i]) for i, c in enumerate(votes)]

    layout = RegisterLayout([("h", m, 0), ("t", m, 0)])
    s = Session(layout, m, transcript, nature, SECTION, observers)
    s.apply(0, "qft", partial(apply_fourier, direction=FOURIER), ("h",))
    s.apply(0, "cnot", apply_cnot_copy, ("h", "t"))
    s.send(0, 1, "t")

    q = random_odd(m, party_rngs[1])
    s.apply(1, "mult", apply_mod_mult, ("t",), q)
    s.apply(1, "phase", apply_phase_power, ("t",), xs[1], m)
    s.send(1, 0, "t")
    s.apply(0, "phase", apply_phase_power, ("t",), xs[0], m)
    if n == 2:
        s.send(0, 1, "t")
    else:
        s.send(0, 2, "t")
        for i in range(2, n):
            s.apply(i, "phase", apply_phase_power, ("t",), xs[i], m)
            s.send(i, i + 1 if i <= n - 2 else 1, "t")
    s.apply(1, "mult", apply_mod_mult, ("t",), mod_inverse(q, 1 << m))
    s.send(1, 0, "t")

    s.apply(0, "cnot", apply_cnot_copy, ("h", "t"))
    s.check_zero(0, "t")
    z = s.fourier_measure(0, "h", FOURIER_INVERSE)
    y = int(z == 0)
    s.broadcast(0, "vote", y)
    return VoteOutcome(z, y, m)


def run_qov(votes: Sequence[int], M: int, seed=0, observers=()) -> tuple[VoteOutcome, Transcript]:
    """y = AND(votes); only P0 sees z = q * sum(x) mod 2^m_vote."""
    rngs = spawn_rngs(seed, len(votes) + 1)
    transcript = Transcript()
    outcome = qov(votes, M, transcript, rngs[0], rngs[1:], observers)
    transcript.record(END, 0, section=SECTION)
    return outcome, transcript
