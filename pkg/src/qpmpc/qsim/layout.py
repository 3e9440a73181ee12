from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from ..errors import LayoutError


@dataclass(frozen=True)
class Register:
    name: str
    width: int
    owner: int = 0
    initial: int = 0


class RegisterLayout:
    """Ordered, named quantum registers; basis keys store one integer per register."""

    def __init__(self, registers: Iterable[Register | tuple]):
        regs = [r if isinstance(r, Register) else Register(*r) for r in registers]
        names = [r.name for r in regs]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate register names in {names}")
        for r in regs:
            if r.width < 1:
                raise LayoutError(f"register {r.name!r} has width {r.width}")
            if not 0 <= r.initial < (1 << r.width):
                raise LayoutError(f"initial value {r.initial} does not fit {r.name!r}")
        if not regs:
            raise LayoutError("layout has total width 0")
        self.registers = tuple(regs)
        self._index = {r.name: i for i, r in enumerate(regs)}

    def __iter__(self) -> Iterator[Register]:
        return iter(self.registers)

    def __len__(self) -> int:
        return len(self.registers)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, RegisterLayout) and self.registers == other.registers

    def __repr__(self) -> str:
        inner = ", ".join(f"{r.name}:{r.width}@P{r.owner}" for r in self.registers)
        return f"RegisterLayout({inner})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise LayoutError(f"unknown register {name!r}") from None

    def width(self, name: str) -> int:
        return self.registers[self.index(name)].width

    def owner(self, name: str) -> int:
        return self.registers[self.index(name)].owner

    @property
    def total_width(self) -> int:
        return sum(r.width for r in self.registers)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers)
