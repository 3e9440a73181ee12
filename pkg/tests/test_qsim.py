import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpmpc.errors import (
    InvariantBreach,
    LayoutError,
    NonUnitaryError,
    UnsupportedSuperpositionError,
    WidthError,
)
from qpmpc.qsim import (
    COMPUTATIONAL,
    FOURIER,
    FOURIER_INVERSE,
    PhaseSum,
    Register,
    RegisterLayout,
    apply_cnot_copy,
    apply_fourier,
    apply_hadamard_uniform,
    apply_mod_mult,
    apply_oracle,
    apply_phase_power,
    backend_deviation,
    dense_mirror,
    distribution_of,
    fourier_measure,
    measure_register,
    new_state,
)
from qpmpc.qsim import dense
from qpmpc.qsim.sparse import cancel_antipodes

from _circuits import random_case


def amps(state):
    return dense_mirror(state).amps


def basis(layout, **values):
    regs = [Register(r.name, r.width, r.owner, values.get(r.name, r.initial)) for r in layout]
    return new_state(RegisterLayout(regs))


# layout

@pytest.mark.parametrize(
    "regs",
    [[("a", 2), ("a", 3)], [("a", 0)], [Register("a", 2, 0, 4)], []],
)
def test_layout_rejects(regs):
    with pytest.raises(LayoutError):
        RegisterLayout(regs)


def test_layout_accessors():
    lay = RegisterLayout([Register("h", 5, 0), Register("e1", 3, 1)])
    assert lay.total_width == 8
    assert lay.names == ("h", "e1")
    assert lay.owner("e1") == 1 and lay.width("h") == 5 and lay.index("e1") == 1
    with pytest.raises(LayoutError):
        lay.index("nope")


def test_initial_values_form_one_basis_term():
    lay = RegisterLayout([Register("a", 3, 0, 5), Register("b", 2)])
    s = new_state(lay)
    assert s.terms == {(5, 0): PhaseSum(s.phase_bits, (0,))}
    assert s.norm_squared() == pytest.approx(1.0)


# phase arithmetic

def test_cancel_antipodes_exact_zero():
    assert cancel_antipodes([0, 4, 1, 5, 2], 3) == (2,)
    assert cancel_antipodes([1, 5, 5, 1], 3) == ()


def test_phase_sum_value():
    assert PhaseSum(2, [0, 1]).value() == pytest.approx(1 + 1j)
    assert PhaseSum(3, [3]).shifted(6).numerators == (1,)


# operators

def test_hadamard_uniform():
    lay = RegisterLayout([("h", 4), ("t", 2)])
    s = apply_hadamard_uniform(new_state(lay), "h")
    assert s.term_count == 16
    np.testing.assert_allclose(distribution_of(s, "h").probs, np.full(16, 1 / 16), atol=1e-15)


def test_hadamard_needs_zero_register():
    lay = RegisterLayout([Register("h", 3, 0, 1)])
    with pytest.raises(UnsupportedSuperpositionError):
        apply_hadamard_uniform(new_state(lay), "h")


@pytest.mark.parametrize("w", [1, 3, 5])
@pytest.mark.parametrize("k", [0, 1, 6])
def test_fourier_of_basis_state_matches_fft(w, k):
    k %= 1 << w
    lay = RegisterLayout([Register("a", w, 0, k)])
    N = 1 << w
    e = np.zeros(N)
    e[k] = 1
    forward = amps(apply_fourier(new_state(lay), "a", FOURIER))
    inverse = amps(apply_fourier(new_state(lay), "a", FOURIER_INVERSE))
    np.testing.assert_allclose(forward, np.fft.ifft(e) * math.sqrt(N), atol=1e-12)
    np.testing.assert_allclose(inverse, np.fft.fft(e) / math.sqrt(N), atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_fourier_then_inverse_is_identity(seed):
    # exact cancellation leaves precisely the original support
    lay, _, s, _ = random_case(seed, max_total=10, length=5)
    for reg in lay.names:
        back = apply_fourier(apply_fourier(s, reg, FOURIER), reg, FOURIER_INVERSE)
        assert set(back.terms) == set(s.terms)
        np.testing.assert_allclose(amps(back), amps(s), atol=1e-12)


def test_cnot_copy_is_involution():
    lay = RegisterLayout([("a", 3), ("b", 3)])
    s = apply_hadamard_uniform(new_state(lay), "a")
    s1 = apply_cnot_copy(s, "a", "b")
    assert all(k[0] == k[1] for k in s1.terms)
    assert apply_cnot_copy(s1, "a", "b").terms == s.terms


def test_cnot_copy_width_mismatch():
    lay = RegisterLayout([("a", 3), ("b", 2)])
    with pytest.raises(WidthError):
        apply_cnot_copy(new_state(lay), "a", "b")


def test_phase_power_adds_multiple_of_value():
    lay = RegisterLayout([Register("a", 3, 0, 3)])
    s = apply_phase_power(new_state(lay), "a", 5, 3)
    assert s.amplitude((3,)) == pytest.approx(np.exp(2j * np.pi * 15 / 8))


def test_phase_power_too_fine():
    lay = RegisterLayout([("a", 3)])
    with pytest.raises(WidthError):
        apply_phase_power(new_state(lay, phase_bits=3), "a", 1, 4)


@given(st.integers(1, 7), st.integers(0, 127), st.integers(0, 63))
def test_mod_mult_permutes_basis(w, k, qh):
    k %= 1 << w
    q = (2 * qh + 1) % (1 << w)
    lay = RegisterLayout([Register("a", w, 0, k)])
    s = apply_mod_mult(new_state(lay), "a", q)
    assert list(s.terms) == [((q * k) % (1 << w),)]


def test_mod_mult_even_rejected():
    lay = RegisterLayout([("a", 3)])
    with pytest.raises(NonUnitaryError):
        apply_mod_mult(new_state(lay), "a", 2)
    with pytest.raises(NonUnitaryError):
        dense.mod_mult(dense.dense_new(lay), "a", 4)


def test_oracle_xor_semantics():
    lay = RegisterLayout([Register("a", 2, 0, 3), Register("b", 2, 0, 1)])
    s = apply_oracle(new_state(lay), "a", "b", lambda j: 2)
    assert list(s.terms) == [(3, 3)]
    assert list(apply_oracle(s, "a", "b", lambda j: 2).terms) == [(3, 1)]


def test_oracle_output_too_wide():
    lay = RegisterLayout([("a", 2), ("b", 1)])
    s = apply_hadamard_uniform(new_state(lay), "a")
    with pytest.raises(WidthError):
        apply_oracle(s, "a", "b", lambda j: j)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_operators_preserve_norm(seed):
    _, _, s, d = random_case(seed, max_total=10, length=6)
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-10)
    assert d.norm() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("seed", range(40))
def test_sparse_matches_dense(seed):
    _, _, s, d = random_case(seed, max_total=12, length=8)
    assert backend_deviation(s, d) < 1e-10


# measurement

@pytest.mark.parametrize("seed", range(15))
@pytest.mark.parametrize("direction", [COMPUTATIONAL, FOURIER, FOURIER_INVERSE])
def test_distributions_match_dense(seed, direction):
    lay, _, s, d = random_case(seed, max_total=12, length=6)
    for reg in lay.names:
        np.testing.assert_allclose(
            distribution_of(s, reg, direction).probs, dense.distribution(d, reg, direction).probs, atol=1e-12
        )


def test_fourier_class_sizes_cover_both_paths():
    # one class with more than 32 terms uses the FFT path, singletons contribute flat mass
    lay = RegisterLayout([("h", 7), ("t", 3)])
    s = apply_oracle(apply_hadamard_uniform(new_state(lay), "h"), "h", "t", lambda j: j % 5 if j < 100 else 7)
    d = dense_mirror(s)
    np.testing.assert_allclose(
        distribution_of(s, "h", FOURIER_INVERSE).probs,
        dense.distribution(d, "h", FOURIER_INVERSE).probs,
        atol=1e-12,
    )


@pytest.mark.parametrize("seed", range(10))
def test_fourier_measure_residual_matches_dense_projection(seed):
    lay, _, s, d = random_case(seed, max_total=12, length=6)
    reg = lay.names[0]
    rng = np.random.default_rng(seed)
    k, post = fourier_measure(s, reg, FOURIER_INVERSE, rng)
    expected = dense.project(dense.fourier(d, reg, FOURIER_INVERSE), reg, k)
    assert backend_deviation(post, expected) < 1e-10
    assert post.values_of(reg) == {k}


def test_measure_register_collapses():
    lay = RegisterLayout([("a", 3), ("b", 3)])
    s = apply_cnot_copy(apply_hadamard_uniform(new_state(lay), "a"), "a", "b")
    k, post = measure_register(s, "a", np.random.default_rng(1))
    assert post.values_of("b") == {k}
    assert post.norm_squared() == pytest.approx(1.0)


def test_forced_zero_probability_outcome():
    lay = RegisterLayout([Register("a", 2, 0, 1)])
    with pytest.raises(InvariantBreach):
        measure_register(new_state(lay), "a", outcome=2)


def test_sampling_frequencies():
    lay = RegisterLayout([("a", 2)])
    s = apply_hadamard_uniform(new_state(lay), "a")
    rng = np.random.default_rng(7)
    draws = [measure_register(s, "a", rng)[0] for _ in range(4000)]
    np.testing.assert_allclose(np.bincount(draws, minlength=4) / 4000, 0.25, atol=0.03)


def test_dense_width_limit():
    lay = RegisterLayout([("a", 11), ("b", 10)])
    with pytest.raises(WidthError):
        dense.dense_new(lay)


def test_sparse_handles_wide_registers():
    # 40 qubits, far beyond the dense limit, stays a handful of terms
    lay = RegisterLayout([("h", 20), ("t", 20)])
    s = apply_hadamard_uniform(new_state(lay), "h")
    assert s.term_count == 1 << 20
    k, post = fourier_measure(s, "h", FOURIER_INVERSE, np.random.default_rng(0))
    assert k == 0 and post.term_count == 1
