from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError

DEFAULT_M = 16
DEFAULT_MAX_ROUNDS = 64
# 2^17 basis terms is the largest sparse state simulated without --force
GUARD_MAX_U = 17


def vote_width(n: int, M: int) -> int:
    """floor(log2(n*M)) + 1, so that 2^m > n*M >= any masked vote sum."""
    return (n * M).bit_length()


def lcm_width(n: int, m: int) -> int:
    return 2 * n * m + 1


@dataclass
class ProtocolConfig:
    n: int
    m: int
    M: int = DEFAULT_M
    seed: int = 0
    max_rounds: int = DEFAULT_MAX_ROUNDS

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise InvalidInputError("n and m must be >= 1")
        if self.M < 2:
            raise InvalidInputError("M must be >= 2")
        if self.max_rounds < 1:
            raise InvalidInputError("max_rounds must be >= 1")

    @property
    def m_vote(self) -> int:
        return vote_width(self.n, self.M)

    @property
    def u(self) -> int:
        return lcm_width(self.n, self.m)


@dataclass
class Party:
    id: int
    secret: int
    rng: np.random.Generator | None = None
    registers: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class VoteOutcome:
    z: int
    y: int
    m_vote: int = 0

    def __post_init__(self):
        if self.y != int(self.z == 0):
            raise ValueError("y must be 1 exactly when z == 0")


@dataclass
class LcmOutcome:
    y: int
    rounds: int
    candidate_history: list[int | None] = field(default_factory=list)
    phi_history: list[int] = field(default_factory=list)
