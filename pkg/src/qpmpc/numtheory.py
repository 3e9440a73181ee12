"""Integer kernel: gcd/lcm, inverses mod 2^m, continued fractions and period oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import InvalidInputError, NoPeriodError, NotInvertibleError

__all__ = [
    "Fraction",
    "PeriodOracleResult",
    "gcd",
    "lcm_many",
    "mod_inverse",
    "convergents",
    "cf_recover",
    "brute_force_period",
    "random_odd",
    "two_adic_valuation",
    "euler_phi",
]


@dataclass(frozen=True)
class PeriodOracleResult:
    period: int
    verified: bool


def gcd(a: int, b: int) -> int:
    if a < 0 or b < 0:
        raise InvalidInputError("gcd expects non-negative integers")
    if a == 0 and b == 0:
        raise InvalidInputError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def lcm_many(xs: Sequence[int]) -> int:
    """Least common multiple of ``xs``, folded pairwise as ab/gcd(a, b)."""
    xs = list(xs)
    if not xs:
        raise InvalidInputError("lcm of an empty sequence")
    y = 1
    for x in xs:
        if x < 1:
            raise InvalidInputError(f"lcm inputs must be positive, got {x}")
        y = y * x // math.gcd(y, x)
    return y


def mod_inverse(q: int, modulus: int) -> int:
    if modulus < 2 or modulus & (modulus - 1):
        raise InvalidInputError(f"modulus must be a power of two >= 2, got {modulus}")
    if q % 2 == 0:
        raise NotInvertibleError(f"{q} has no inverse modulo {modulus}")
    return pow(q, -1, modulus)


def convergents(numerator: int, denominator: int) -> Iterator[Fraction]:
    """Yield the continued-fraction convergents of numerator/denominator in order."""
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    a, b = numerator, denominator
    while b:
        q, r = divmod(a, b)
        h_prev, h = h, q * h + h_prev
        k_prev, k = k, q * k + k_prev
        yield Fraction(h, k)
        a, b = b, r


def cf_recover(phi: int, two_pow_u: int, denom_bound: int) -> Fraction:
    """Last convergent of phi/two_pow_u whose denominator is below ``denom_bound``.

    ``phi == 0`` yields 0/1; the caller's verification step decides whether
    a period of 1 is acceptable.
    """
    if two_pow_u < 1 or two_pow_u & (two_pow_u - 1):
        raise InvalidInputError("two_pow_u must be a power of two")
    if not 0 <= phi < two_pow_u:
        raise InvalidInputError(f"phi={phi} outside [0, {two_pow_u})")
    if denom_bound < 1:
        raise InvalidInputError("denom_bound must be >= 1")
    best = Fraction(0, 1)
    for c in convergents(phi, two_pow_u):
        if c.denominator >= denom_bound:
            break
        best = c
    return best


def brute_force_period(f: Callable[[int], int], u: int) -> PeriodOracleResult:
    """Smallest T with f(j) == f(j mod T) on [0, 2^u), by linear scan.

    Independent of any quantum routine; used as the verification oracle.
    """
    size = 1 << u
    values = [f(j) for j in range(size)]
    for period in range(1, size):
        if values[period:] == values[: size - period]:
            return PeriodOracleResult(period, values[period] == values[0])
    raise NoPeriodError(f"no repetition within a domain of {size} points")


def random_odd(m: int, rng: np.random.Generator) -> int:
    """Uniform odd residue in [1, 2^m)."""
    if m < 1:
        raise InvalidInputError("bit width must be >= 1")
    return 2 * int(rng.integers(0, 1 << (m - 1))) + 1


def two_adic_valuation(z: int) -> int:
    if z <= 0:
        raise InvalidInputError("valuation is defined for positive integers only")
    return (z & -z).bit_length() - 1


def euler_phi(n: int) -> int:
    return sum(1 for k in range(n) if math.gcd(k, n) == 1)
