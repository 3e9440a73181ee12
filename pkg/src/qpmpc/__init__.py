"""Simulator for secure multiparty quantum summation, one-vote-down voting and LCM computation."""
from .numtheory import cf_recover, gcd, lcm_many, mod_inverse
from .protocols import run_qov, run_smqlcmc, run_smqs
from .qpa import QpaConfig, run_qpa

__version__ = "0.1.0"

__all__ = [
    "QpaConfig",
    "cf_recover",
    "gcd",
    "lcm_many",
    "mod_inverse",
    "run_qov",
    "run_qpa",
    "run_smqlcmc",
    "run_smqs",
]
