"""Shared runtime for the protocols: engine state, register ownership and logging."""
from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from ..errors import OwnershipError, ProtocolReject
from ..qsim import ExactSparseState, RegisterLayout, fourier_measure, measure_register, new_state
from .transcript import BROADCAST, MEASURE, OP, REJECT, SEND, Transcript

# observer(event_name, party_id, session); called synchronously at hook points
Observer = Callable[[str, int, "Session"], None]


class Session:
    """One execution of a protocol, or one round of the LCM protocol.

    Every operator application goes through :meth:`apply`, which enforces
    that the acting party currently holds each register it touches.
    """

    def __init__(
        self,
        layout: RegisterLayout,
        phase_bits: int,
        transcript: Transcript,
        nature: np.random.Generator,
        section: str,
        observers: Iterable[Observer] = (),
    ):
        self.layout = layout
        self.state: ExactSparseState = new_state(layout, phase_bits)
        self.owner = {r.name: r.owner for r in layout}
        self.transcript = transcript
        self.nature = nature
        self.section = section
        self.observers = list(observers)
        self.facts: dict[str, object] = {}

    def holds(self, party: int, reg: str) -> bool:
        return self.owner.get(reg) == party

    def _require(self, party: int, regs: Iterable[str]):
        for reg in regs:
            if reg not in self.owner:
                raise OwnershipError(f"register {reg!r} does not exist")
            if self.owner[reg] != party:
                raise OwnershipError(f"P{party} does not hold {reg!r} (held by P{self.owner[reg]})")

    def apply(self, party: int, tag: str, fn, regs: tuple[str, ...], *args):
        self._require(party, regs)
        self.state = fn(self.state, *regs, *args)
        self.transcript.record(OP, party, regs, tag, self.section)

    def send(self, sender: int, receiver: int, reg: str):
        self._require(sender, [reg])
        self.owner[reg] = receiver
        self.transcript.record(SEND, sender, [reg], "", self.section, (receiver, self.layout.width(reg)))
        self.notify("received", receiver)

    def measure(self, party: int, reg: str) -> int:
        self._require(party, [reg])
        value, self.state = measure_register(self.state, reg, self.nature)
        self.transcript.record(MEASURE, party, [reg], "computational", self.section, (value,))
        return value

    def fourier_measure(self, party: int, reg: str, direction: str) -> int:
        self._require(party, [reg])
        value, self.state = fourier_measure(self.state, reg, direction, self.nature)
        self.transcript.record(MEASURE, party, [reg], direction, self.section, (value,))
        return value

    def check_zero(self, party: int, reg: str):
        """Measure ``reg`` and reject unless it is |0>."""
        value = self.measure(party, reg)
        if value != 0:
            self.transcript.record(REJECT, party, [reg], "", self.section, (value,))
            raise ProtocolReject(f"P{party} found {reg}={value}, expected 0", outcome=value)

    def broadcast(self, party: int, topic: str, value: int):
        self.transcript.record(BROADCAST, party, (), topic, self.section, (value,))

    def notify(self, event: str, party: int):
        for obs in self.observers:
            obs(event, party, self)


def spawn_rngs(seed, count: int) -> list[np.random.Generator]:
    """Independent generators for nature and each party, derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]
