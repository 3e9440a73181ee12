"""Exact sparse state engine.

A state is a map from basis assignments (one integer per register) to a
multiset of phase numerators ``r`` in ``[0, 2^P)``; the amplitude of a term is
``global_scale * sum(exp(2*pi*i*r / 2^P))``. Every operator the protocols use
either permutes basis keys or shifts numerators, so phases stay integral and
floating point only enters when probabilities are evaluated.

Fourier transforms are fused with measurement: the outcome law on a w-bit
register is computed class by class (one class per joint value of the other
registers) without building the transformed state.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from ..errors import (
    InvariantBreach,
    LayoutError,
    NonUnitaryError,
    NormalizationError,
    UnsupportedSuperpositionError,
    WidthError,
)
from .layout import RegisterLayout

COMPUTATIONAL = "computational"
FOURIER = "fourier"
FOURIER_INVERSE = "fourier_inverse"
DIRECTIONS = (COMPUTATIONAL, FOURIER, FOURIER_INVERSE)

NORM_TOL = 1e-9
# classes at most this large use direct summation instead of an FFT
_DIRECT_CLASS_LIMIT = 32
# outcomes below this probability are never sampled (numerical zeros of the DFT)
_SAMPLE_FLOOR = 1e-13


@lru_cache(maxsize=32)
def roots_of_unity(bits: int) -> np.ndarray:
    size = 1 << bits
    return np.exp(2j * np.pi * np.arange(size) / size)


class PhaseSum:
    """Sum of 2^bits-th roots of unity, stored as integer numerators."""

    __slots__ = ("bits", "numerators")

    def __init__(self, bits: int, numerators: Iterable[int] = (0,)):
        mask = (1 << bits) - 1
        self.bits = bits
        self.numerators = tuple(sorted(r & mask for r in numerators))

    @property
    def denominator(self) -> int:
        return 1 << self.bits

    def shifted(self, s: int) -> "PhaseSum":
        return PhaseSum(self.bits, (r + s for r in self.numerators))

    def value(self) -> complex:
        table = roots_of_unity(self.bits)
        return complex(table[list(self.numerators)].sum()) if self.numerators else 0j

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PhaseSum)
            and self.bits == other.bits
            and self.numerators == other.numerators
        )

    def __hash__(self) -> int:
        return hash((self.bits, self.numerators))

    def __repr__(self) -> str:
        return f"PhaseSum(D=2^{self.bits}, {list(self.numerators)})"


def cancel_antipodes(nums: Iterable[int], bits: int) -> tuple[int, ...]:
    """Remove pairs r, r + D/2 (which sum to zero) from a numerator multiset.

    For D a power of two these are the only integer relations among D-th roots
    of unity, so an empty result means the amplitude is exactly zero.
    """
    counts = Counter(nums)
    if bits == 0:
        return tuple(sorted(counts.elements()))
    half = 1 << (bits - 1)
    for r in [r for r in counts if r < half]:
        c = min(counts[r], counts.get(r + half, 0))
        if c:
            counts[r] -= c
            counts[r + half] -= c
    return tuple(sorted(counts.elements()))


@dataclass
class MeasurementDistribution:
    """Outcome law of one register; ``probs[k]`` is the probability of outcome k."""

    probs: np.ndarray
    basis: str = COMPUTATIONAL

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.basis not in DIRECTIONS:
            raise ValueError(f"unknown basis {self.basis!r}")

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, outcome: int) -> float:
        return float(self.probs[outcome])

    def support(self, tol: float = 1e-12) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.probs > tol)]

    def as_dict(self, tol: float = 1e-12) -> dict[int, float]:
        return {k: float(self.probs[k]) for k in self.support(tol)}

    def total(self) -> float:
        return float(self.probs.sum())


class ExactSparseState:
    """Structured superposition with exact phase arithmetic.

    Operator functions in this module return new states; a state is never
    mutated after construction.
    """

    __slots__ = ("layout", "phase_bits", "_terms", "global_scale")

    def __init__(self, layout: RegisterLayout, phase_bits: int, terms: dict, global_scale: float = 1.0):
        self.layout = layout
        self.phase_bits = phase_bits
        self._terms = terms
        self.global_scale = global_scale

    @property
    def denominator(self) -> int:
        return 1 << self.phase_bits

    @property
    def term_count(self) -> int:
        return len(self._terms)

    @property
    def terms(self) -> dict[tuple[int, ...], PhaseSum]:
        return {k: PhaseSum(self.phase_bits, v) for k, v in self._terms.items()}

    def keys(self) -> list[tuple[int, ...]]:
        return list(self._terms)

    def raw_terms(self):
        return self._terms.items()

    def amplitudes(self) -> tuple[list[tuple[int, ...]], np.ndarray]:
        keys = list(self._terms)
        if not keys:
            return keys, np.zeros(0, dtype=complex)
        table = roots_of_unity(self.phase_bits)
        lengths = np.fromiter((len(v) for v in self._terms.values()), dtype=np.int64, count=len(keys))
        if np.all(lengths == 1):
            flat = np.fromiter((v[0] for v in self._terms.values()), dtype=np.int64, count=len(keys))
            return keys, self.global_scale * table[flat]
        flat = np.fromiter(
            (r for v in self._terms.values() for r in v), dtype=np.int64, count=int(lengths.sum())
        )
        vals = table[flat]
        starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
        sums = np.add.reduceat(vals, starts) if len(vals) else np.zeros(len(keys), complex)
        sums[lengths == 0] = 0
        return keys, self.global_scale * sums

    def amplitude(self, key: tuple[int, ...]) -> complex:
        nums = self._terms.get(tuple(key))
        if nums is None:
            return 0j
        return self.global_scale * PhaseSum(self.phase_bits, nums).value()

    def norm_squared(self) -> float:
        _, amps = self.amplitudes()
        return float(np.sum(np.abs(amps) ** 2))

    def values_of(self, reg: str) -> set[int]:
        i = self.layout.index(reg)
        return {k[i] for k in self._terms}

    def is_exact(self) -> bool:
        """Structural check: every numerator is an integer in [0, D)."""
        d = self.denominator
        return all(
            isinstance(r, (int, np.integer)) and 0 <= r < d for v in self._terms.values() for r in v
        )

    def __repr__(self) -> str:
        return f"ExactSparseState({self.layout!r}, terms={self.term_count}, D=2^{self.phase_bits})"


def _replace(key: tuple, i: int, value: int) -> tuple:
    return key[:i] + (value,) + key[i + 1 :]


def _derive(state: ExactSparseState, terms: dict, scale: float | None = None) -> ExactSparseState:
    return ExactSparseState(
        state.layout, state.phase_bits, terms, state.global_scale if scale is None else scale
    )


def new_state(layout: RegisterLayout, phase_bits: int | None = None) -> ExactSparseState:
    """Product state with every register at its declared initial value."""
    if not isinstance(layout, RegisterLayout):
        layout = RegisterLayout(layout)
    if phase_bits is None:
        phase_bits = max(r.width for r in layout)
    key = tuple(r.initial for r in layout)
    return ExactSparseState(layout, phase_bits, {key: (0,)})


def apply_hadamard_uniform(state: ExactSparseState, reg: str) -> ExactSparseState:
    """H on every qubit of ``reg``, which must hold |0> in every term."""
    i = state.layout.index(reg)
    size = 1 << state.layout.width(reg)
    if any(k[i] != 0 for k in state._terms):
        raise UnsupportedSuperpositionError(f"register {reg!r} is not definitely |0>")
    terms = {}
    for key, nums in state._terms.items():
        head, tail = key[:i], key[i + 1 :]
        for j in range(size):
            terms[head + (j,) + tail] = nums
    return _derive(state, terms, state.global_scale / math.sqrt(size))


def apply_fourier(state: ExactSparseState, reg: str, direction: str = FOURIER) -> ExactSparseState:
    """Exact QFT (or its inverse) on ``reg``; cost is O(terms * 2^width).

    The protocols only need it on definite registers (e.g. |x0> before summation).
    """
    if direction not in (FOURIER, FOURIER_INVERSE):
        raise ValueError(f"bad direction {direction!r}")
    i = state.layout.index(reg)
    w = state.layout.width(reg)
    if w > state.phase_bits:
        raise WidthError(f"phase denominator 2^{state.phase_bits} too coarse for a {w}-bit QFT")
    size = 1 << w
    step = (1 if direction == FOURIER else -1) << (state.phase_bits - w)
    mask = state.denominator - 1
    acc: dict[tuple, list[int]] = defaultdict(list)
    for key, nums in state._terms.items():
        head, tail, c = key[:i], key[i + 1 :], key[i]
        for j in range(size):
            s = step * c * j
            acc[head + (j,) + tail].extend((r + s) & mask for r in nums)
    terms = _canonical_terms(acc, state.phase_bits)
    return _derive(state, terms, state.global_scale / math.sqrt(size))


def apply_cnot_copy(state: ExactSparseState, src: str, dst: str) -> ExactSparseState:
    """Bitwise CNOT from ``src`` onto ``dst``: dst <- dst XOR src."""
    if src == dst:
        raise LayoutError("source and destination must differ")
    if state.layout.width(src) != state.layout.width(dst):
        raise WidthError(f"width mismatch between {src!r} and {dst!r}")
    a, b = state.layout.index(src), state.layout.index(dst)
    terms = {}
    for key, nums in state._terms.items():
        terms[_replace(key, b, key[b] ^ key[a])] = nums
    return _derive(state, terms)


def apply_phase_power(state: ExactSparseState, ctrl: str, x: int, modulus_bits: int) -> ExactSparseState:
    """Multiply each term by exp(2*pi*i * x * value(ctrl) / 2^modulus_bits)."""
    if modulus_bits > state.phase_bits:
        raise WidthError(f"2^{modulus_bits} exceeds the state's phase denominator")
    i = state.layout.index(ctrl)
    unit = 1 << (state.phase_bits - modulus_bits)
    mask = state.denominator - 1
    terms = {}
    for key, nums in state._terms.items():
        s = (x * key[i] * unit) & mask
        terms[key] = nums if s == 0 else tuple((r + s) & mask for r in nums)
    return _derive(state, terms)


def apply_mod_mult(state: ExactSparseState, reg: str, q: int) -> ExactSparseState:
    """|j> -> |j*q mod 2^width>; only odd q is a permutation."""
    if q % 2 == 0:
        raise NonUnitaryError(f"multiplication by even q={q} is not unitary")
    i = state.layout.index(reg)
    mask = (1 << state.layout.width(reg)) - 1
    terms = {}
    for key, nums in state._terms.items():
        terms[_replace(key, i, (key[i] * q) & mask)] = nums
    return _derive(state, terms)


def apply_oracle(state: ExactSparseState, in_reg: str, out_reg: str, f: Callable[[int], int]) -> ExactSparseState:
    """U_f: |j>|y> -> |j>|y XOR f(j)>."""
    if in_reg == out_reg:
        raise LayoutError("oracle input and output registers must differ")
    a, b = state.layout.index(in_reg), state.layout.index(out_reg)
    limit = 1 << state.layout.width(out_reg)
    cache: dict[int, int] = {}
    terms = {}
    for key, nums in state._terms.items():
        j = key[a]
        fj = cache.get(j)
        if fj is None:
            fj = int(f(j))
            if not 0 <= fj < limit:
                raise WidthError(f"f({j})={fj} does not fit {out_reg!r}")
            cache[j] = fj
        terms[_replace(key, b, key[b] ^ fj)] = nums
    return _derive(state, terms)


def _canonical_terms(acc: dict, bits: int) -> dict:
    terms = {}
    for key, nums in acc.items():
        nums = cancel_antipodes(nums, bits) if len(nums) > 1 else tuple(nums)
        if nums:
            terms[key] = nums
    return terms


def _check_normalized(state: ExactSparseState):
    total = state.norm_squared()
    if abs(total - 1.0) > NORM_TOL:
        raise NormalizationError(f"state norm^2 = {total!r}")


def _classes(state: ExactSparseState, i: int):
    """Group amplitudes by the joint value of every register except index i."""
    keys, amps = state.amplitudes()
    index: dict[tuple, int] = {}
    cls = np.empty(len(keys), dtype=np.int64)
    vals = np.empty(len(keys), dtype=np.int64)
    for n, key in enumerate(keys):
        rest = key[:i] + key[i + 1 :]
        c = index.get(rest)
        if c is None:
            c = index[rest] = len(index)
        cls[n] = c
        vals[n] = key[i]
    return cls, vals, amps


def _fourier_law(state: ExactSparseState, i: int, direction: str) -> np.ndarray:
    w = state.layout.registers[i].width
    size = 1 << w
    sign = 1 if direction == FOURIER else -1
    cls, vals, amps = _classes(state, i)
    probs = np.zeros(size)
    flat = 0.0
    order = np.argsort(cls, kind="stable")
    cls, vals, amps = cls[order], vals[order], amps[order]
    bounds = np.flatnonzero(np.diff(cls)) + 1
    starts = np.concatenate(([0], bounds))
    ends = np.concatenate((bounds, [len(cls)]))
    table = roots_of_unity(w)
    k = np.arange(size, dtype=np.int64)
    for s, e in zip(starts, ends):
        if e - s == 1:
            # a single basis term is Fourier-flat
            flat += abs(amps[s]) ** 2
        elif e - s <= _DIRECT_CLASS_LIMIT:
            kernel = table[(sign * np.outer(vals[s:e], k)) % size]
            probs += np.abs(amps[s:e] @ kernel) ** 2
        else:
            vec = np.zeros(size, dtype=complex)
            vec[vals[s:e]] = amps[s:e]
            spec = np.fft.fft(vec) if sign < 0 else np.fft.ifft(vec) * size
            probs += np.abs(spec) ** 2
    return (probs + flat) / size


def distribution_of(state: ExactSparseState, reg: str, direction: str = COMPUTATIONAL) -> MeasurementDistribution:
    """Exact outcome law of ``reg`` in the given basis; the state is untouched."""
    if direction not in DIRECTIONS:
        raise ValueError(f"bad direction {direction!r}")
    i = state.layout.index(reg)
    if direction == COMPUTATIONAL:
        keys, amps = state.amplitudes()
        probs = np.zeros(1 << state.layout.registers[i].width)
        np.add.at(probs, np.fromiter((k[i] for k in keys), dtype=np.int64, count=len(keys)), np.abs(amps) ** 2)
        return MeasurementDistribution(probs, COMPUTATIONAL)
    return MeasurementDistribution(_fourier_law(state, i, direction), direction)


def sample_outcome(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from an exact outcome law."""
    p = np.where(probs > _SAMPLE_FLOOR, probs, 0.0)
    cdf = np.cumsum(p)
    r = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, r, side="right"), len(p) - 1))


def measure_register(
    state: ExactSparseState, reg: str, rng: np.random.Generator | None = None, outcome: int | None = None
) -> tuple[int, ExactSparseState]:
    """Computational-basis measurement; ``outcome`` forces a post-selection."""
    _check_normalized(state)
    law = distribution_of(state, reg).probs
    if outcome is None:
        outcome = sample_outcome(law, rng)
    p = law[outcome]
    if p <= 0:
        raise InvariantBreach(f"outcome {outcome} has probability zero")
    i = state.layout.index(reg)
    terms = {k: v for k, v in state._terms.items() if k[i] == outcome}
    return outcome, _derive(state, terms, state.global_scale / math.sqrt(p))


def fourier_measure(
    state: ExactSparseState,
    reg: str,
    direction: str = FOURIER_INVERSE,
    rng: np.random.Generator | None = None,
    outcome: int | None = None,
) -> tuple[int, ExactSparseState]:
    """Apply QFT/QFT^dagger to ``reg`` and measure it, without materialising the transform.

    The residual amplitudes on the other registers stay exact phase sums.
    """
    if direction not in (FOURIER, FOURIER_INVERSE):
        raise ValueError(f"bad direction {direction!r}")
    _check_normalized(state)
    i = state.layout.index(reg)
    w = state.layout.registers[i].width
    if w > state.phase_bits:
        raise WidthError(f"phase denominator 2^{state.phase_bits} too coarse for a {w}-bit QFT")
    law = _fourier_law(state, i, direction)
    if outcome is None:
        outcome = sample_outcome(law, rng)
    p = law[outcome]
    step = (1 if direction == FOURIER else -1) * outcome << (state.phase_bits - w)
    mask = state.denominator - 1
    acc: dict[tuple, list[int]] = defaultdict(list)
    for key, nums in state._terms.items():
        s = (step * key[i]) & mask
        acc[_replace(key, i, outcome)].extend((r + s) & mask for r in nums)
    terms = _canonical_terms(acc, state.phase_bits)
    if not terms or p <= 0:
        raise InvariantBreach(f"outcome {outcome} has probability zero")
    collapsed = _derive(state, terms, state.global_scale / math.sqrt((1 << w) * p))
    drift = abs(collapsed.norm_squared() - 1.0)
    if drift > 1e-6:
        raise InvariantBreach(f"collapsed state off normalisation by {drift:.3g}")
    return outcome, collapsed
