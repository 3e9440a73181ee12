"""Secure multiparty quantum summation (phase accumulation on a shared register)."""
from __future__ import annotations

from functools import partial
from typing import Sequence

from ..errors import InvalidInputError
from ..qsim import (
    FOURIER,
    FOURIER_INVERSE,
    Register,
    RegisterLayout,
    apply_cnot_copy,
    apply_fourier,
    apply_phase_power,
)
from .session import Session, spawn_rngs
from .transcript import END, Transcript

SECTION = "smqs"


def run_smqs(inputs: Sequence[int], m: int, seed=0, observers=()) -> tuple[int, Transcript]:
    """Sum of ``inputs`` mod 2^m; P0 learns it from the returned register.

    Each P_i (i >= 1) folds its x_i in as a phase controlled by t; the x_i
    never enter a register another party can read.
    """
    n = len(inputs)
    if n < 2:
        raise InvalidInputError("summation needs at least two parties")
    if any(not 0 <= x < (1 << m) for x in inputs):
        raise InvalidInputError(f"inputs must lie in [0, 2^{m})")
    (nature,) = spawn_rngs(seed, 1)
    layout = RegisterLayout([Register("h", m, 0, inputs[0]), Register("t", m, 0)])
    transcript = Transcript()
    s = Session(layout, m, transcript, nature, SECTION, observers)

    s.apply(0, "qft", partial(apply_fourier, direction=FOURIER), ("h",))
    s.apply(0, "cnot", apply_cnot_copy, ("h", "t"))
    s.send(0, 1, "t")
    for i in range(1, n):
        s.apply(i, "phase", apply_phase_power, ("t",), inputs[i], m)
        s.send(i, (i + 1) % n, "t")
    s.apply(0, "cnot", apply_cnot_copy, ("h", "t"))
    s.check_zero(0, "t")
    y = s.fourier_measure(0, "h", FOURIER_INVERSE)
    s.broadcast(0, "sum", y)
    transcript.record(END, 0, section=SECTION)
    return y, transcript
