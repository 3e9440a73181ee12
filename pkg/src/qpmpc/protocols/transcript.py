"""Ordered event log of a protocol run and its line-oriented serialisation.

One event per line, tab-separated fields in this order::

    kind  party  registers  tag  section  payload...

``registers`` is a comma-joined list (``-`` when empty), ``tag`` names the
operator or the broadcast topic (``-`` when empty), ``section`` is the
sub-protocol (``smqs``, ``qov``, ``lcm``) and the payload is zero or more
decimal integers, each in its own field. See docs/formats.md.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

OP = "op"
SEND = "send"
BROADCAST = "broadcast"
MEASURE = "measure"
ROUND = "round"
REJECT = "reject"
END = "end"
KINDS = (OP, SEND, BROADCAST, MEASURE, ROUND, REJECT, END)


@dataclass(frozen=True)
class Event:
    kind: str
    party: int
    registers: tuple[str, ...] = ()
    tag: str = ""
    section: str = ""
    payload: tuple[int, ...] = ()

    def to_line(self) -> str:
        fields = [
            self.kind,
            str(self.party),
            ",".join(self.registers) or "-",
            self.tag or "-",
            self.section or "-",
            *(str(int(p)) for p in self.payload),
        ]
        return "\t".join(fields)

    @classmethod
    def from_line(cls, line: str) -> "Event":
        kind, party, regs, tag, section, *payload = line.rstrip("\n").split("\t")
        if kind not in KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        return cls(
            kind,
            int(party),
            () if regs == "-" else tuple(regs.split(",")),
            "" if tag == "-" else tag,
            "" if section == "-" else section,
            tuple(int(p) for p in payload),
        )


@dataclass
class Transcript:
    events: list[Event] = field(default_factory=list)

    def record(self, kind, party, registers=(), tag="", section="", payload=()) -> Event:
        ev = Event(kind, party, tuple(registers), tag, section, tuple(int(p) for p in payload))
        self.events.append(ev)
        return ev

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of_kind(self, kind: str, section: str | None = None) -> list[Event]:
        return [e for e in self.events if e.kind == kind and (section is None or e.section == section)]

    @property
    def complete(self) -> bool:
        return bool(self.events) and self.events[-1].kind == END

    def rounds(self) -> list["Transcript"]:
        """Split at ``round`` markers; events before the first marker are dropped."""
        out: list[Transcript] = []
        for ev in self.events:
            if ev.kind == ROUND:
                out.append(Transcript())
            elif out and ev.kind != END:
                out[-1].events.append(ev)
        return out

    def dumps(self) -> str:
        return "".join(e.to_line() + "\n" for e in self.events)

    @classmethod
    def loads(cls, text: str | Iterable[str]) -> "Transcript":
        lines = text.splitlines() if isinstance(text, str) else text
        return cls([Event.from_line(l) for l in lines if l.strip()])
