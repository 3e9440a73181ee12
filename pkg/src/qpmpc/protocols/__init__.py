"""The three multiparty protocols, run as sequential state machines over the engine."""
from .config import (
    GUARD_MAX_U,
    LcmOutcome,
    Party,
    ProtocolConfig,
    VoteOutcome,
    lcm_width,
    vote_width,
)
from .lcm import connected_function, lcm_layout, lcm_round, run_smqlcmc, vote_bit
from .session import Session, spawn_rngs
from .summation import run_smqs
from .transcript import Event, Transcript
from .voting import run_qov

__all__ = [
    "GUARD_MAX_U",
    "Event",
    "LcmOutcome",
    "Party",
    "ProtocolConfig",
    "Session",
    "Transcript",
    "VoteOutcome",
    "connected_function",
    "lcm_layout",
    "lcm_round",
    "lcm_width",
    "run_qov",
    "run_smqlcmc",
    "run_smqs",
    "spawn_rngs",
    "vote_bit",
    "vote_width",
]
