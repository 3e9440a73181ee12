"""Dense amplitude-vector backend, used only to cross-check the sparse engine.

Registers map to tensor axes in layout order (first register most
significant). Transforms here are written independently of the sparse
module: Fourier steps use explicit DFT matrices, Hadamards act qubit by qubit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonUnitaryError, WidthError
from .layout import RegisterLayout
from .sparse import COMPUTATIONAL, FOURIER, ExactSparseState, MeasurementDistribution

MAX_DENSE_WIDTH = 20
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass
class DenseState:
    layout: RegisterLayout
    amps: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(1 << r.width for r in self.layout)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def _check_width(layout: RegisterLayout):
    if layout.total_width > MAX_DENSE_WIDTH:
        raise WidthError(f"dense backend limited to {MAX_DENSE_WIDTH} qubits, got {layout.total_width}")


def dense_new(layout: RegisterLayout) -> DenseState:
    _check_width(layout)
    amps = np.zeros(1 << layout.total_width, dtype=complex)
    shape = tuple(1 << r.width for r in layout)
    amps[np.ravel_multi_index(tuple(r.initial for r in layout), shape)] = 1.0
    return DenseState(layout, amps)


def _grids(state: DenseState) -> list[np.ndarray]:
    return list(np.unravel_index(np.arange(state.amps.size), state.shape))


def _permute(state: DenseState, new_values: list[np.ndarray]) -> DenseState:
    out = np.zeros_like(state.amps)
    out[np.ravel_multi_index(tuple(new_values), state.shape)] = state.amps
    return DenseState(state.layout, out)


def _along(state: DenseState, reg: str, matrix: np.ndarray) -> DenseState:
    axis = state.layout.index(reg)
    t = np.moveaxis(state.tensor(), axis, -1) @ matrix.T
    return DenseState(state.layout, np.moveaxis(t, -1, axis).reshape(-1))


def hadamard(state: DenseState, reg: str) -> DenseState:
    axis = state.layout.index(reg)
    w = state.layout.width(reg)
    shape = state.shape
    t = state.tensor()
    split = shape[:axis] + (2,) * w + shape[axis + 1 :]
    t = t.reshape(split)
    for q in range(w):
        t = np.moveaxis(np.tensordot(_H, t, axes=([1], [axis + q])), 0, axis + q)
    return DenseState(state.layout, t.reshape(-1))


def dft_matrix(size: int, sign: int) -> np.ndarray:
    jk = np.outer(np.arange(size), np.arange(size)) % size
    return np.exp(sign * 2j * np.pi * jk / size) / np.sqrt(size)


def fourier(state: DenseState, reg: str, direction: str = FOURIER) -> DenseState:
    size = 1 << state.layout.width(reg)
    sign = 1 if direction == FOURIER else -1
    # matrix[k, j] = exp(sign 2 pi i jk / N) / sqrt(N)
    return _along(state, reg, dft_matrix(size, sign))


def cnot_copy(state: DenseState, src: str, dst: str) -> DenseState:
    vals = _grids(state)
    a, b = state.layout.index(src), state.layout.index(dst)
    vals[b] = vals[b] ^ vals[a]
    return _permute(state, vals)


def phase_power(state: DenseState, ctrl: str, x: int, modulus_bits: int) -> DenseState:
    vals = _grids(state)[state.layout.index(ctrl)]
    phase = np.exp(2j * np.pi * ((x * vals) % (1 << modulus_bits)) / (1 << modulus_bits))
    return DenseState(state.layout, state.amps * phase)


def mod_mult(state: DenseState, reg: str, q: int) -> DenseState:
    if q % 2 == 0:
        raise NonUnitaryError(f"even multiplier {q}")
    vals = _grids(state)
    i = state.layout.index(reg)
    vals[i] = (vals[i] * q) % (1 << state.layout.width(reg))
    return _permute(state, vals)


def oracle(state: DenseState, in_reg: str, out_reg: str, f) -> DenseState:
    vals = _grids(state)
    a, b = state.layout.index(in_reg), state.layout.index(out_reg)
    table = np.array([f(j) for j in range(1 << state.layout.width(in_reg))], dtype=np.int64)
    vals[b] = vals[b] ^ table[vals[a]]
    return _permute(state, vals)


def project(state: DenseState, reg: str, value: int) -> DenseState:
    vals = _grids(state)[state.layout.index(reg)]
    amps = np.where(vals == value, state.amps, 0)
    return DenseState(state.layout, amps / np.linalg.norm(amps))


def distribution(state: DenseState, reg: str, direction: str = COMPUTATIONAL) -> MeasurementDistribution:
    if direction != COMPUTATIONAL:
        state = fourier(state, reg, direction)
    axis = state.layout.index(reg)
    p = np.abs(state.tensor()) ** 2
    other = tuple(a for a in range(p.ndim) if a != axis)
    return MeasurementDistribution(p.sum(axis=other), direction)


def dense_mirror(state: ExactSparseState) -> DenseState:
    """Numeric evaluation of a sparse state as a full amplitude vector."""
    _check_width(state.layout)
    shape = tuple(1 << r.width for r in state.layout)
    amps = np.zeros(1 << state.layout.total_width, dtype=complex)
    keys, values = state.amplitudes()
    if keys:
        idx = np.ravel_multi_index(tuple(np.array(keys, dtype=np.int64).T), shape)
        amps[idx] = values
    return DenseState(state.layout, amps)


def backend_deviation(sparse: ExactSparseState, dense: DenseState) -> float:
    """Max absolute amplitude difference after aligning the global phase."""
    if sparse.layout != dense.layout:
        raise ValueError("layouts differ")
    mirror = dense_mirror(sparse).amps
    ref = dense.amps
    pivot = int(np.argmax(np.abs(ref)))
    if abs(mirror[pivot]) > 0 and abs(ref[pivot]) > 0:
        phase = mirror[pivot] / ref[pivot]
        phase /= abs(phase)
    else:
        phase = 1.0
    return float(np.max(np.abs(mirror - phase * ref)))
