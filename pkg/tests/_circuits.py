"""Random operator sequences applied in lockstep to the sparse and dense backends."""
import numpy as np

from qpmpc.qsim import (
    FOURIER,
    FOURIER_INVERSE,
    Register,
    RegisterLayout,
    apply_cnot_copy,
    apply_fourier,
    apply_hadamard_uniform,
    apply_mod_mult,
    apply_oracle,
    apply_phase_power,
    new_state,
)
from qpmpc.qsim import dense


def random_layout(rng, max_total=16):
    count = int(rng.integers(2, 4))
    widths = []
    for _ in range(count):
        room = max_total - sum(widths) - (count - len(widths) - 1)
        widths.append(int(rng.integers(1, min(6, room) + 1)))
    regs = []
    for k, w in enumerate(widths):
        init = int(rng.integers(0, 1 << w)) if rng.random() < 0.3 else 0
        regs.append(Register(f"r{k}", w, 0, init))
    return RegisterLayout(regs)


def random_sequence(rng, layout, length):
    """A list of (sparse_fn, dense_fn, label) triples valid for ``layout``."""
    fresh = {r.name for r in layout if r.initial == 0}
    names = list(layout.names)
    ops = []
    for _ in range(length):
        kind = rng.choice(["h", "qft", "cnot", "phase", "mult", "oracle"])
        reg = names[int(rng.integers(len(names)))]
        w = layout.width(reg)
        if kind == "h":
            if reg not in fresh:
                continue
            ops.append((lambda s, r=reg: apply_hadamard_uniform(s, r), lambda d, r=reg: dense.hadamard(d, r), f"H {reg}"))
        elif kind == "qft":
            d = FOURIER if rng.random() < 0.5 else FOURIER_INVERSE
            ops.append((lambda s, r=reg, d=d: apply_fourier(s, r, d), lambda x, r=reg, d=d: dense.fourier(x, r, d), f"{d} {reg}"))
        elif kind == "cnot":
            same = [n for n in names if n != reg and layout.width(n) == w]
            if not same:
                continue
            dst = same[int(rng.integers(len(same)))]
            ops.append((lambda s, a=reg, b=dst: apply_cnot_copy(s, a, b), lambda x, a=reg, b=dst: dense.cnot_copy(x, a, b), f"CNOT {reg}->{dst}"))
        elif kind == "phase":
            bits = int(rng.integers(1, max(layout.width(n) for n in names) + 1))
            c = int(rng.integers(0, 1 << bits))
            ops.append(
                (
                    lambda s, r=reg, c=c, b=bits: apply_phase_power(s, r, c, b),
                    lambda x, r=reg, c=c, b=bits: dense.phase_power(x, r, c, b),
                    f"phase {reg} x={c} bits={bits}",
                )
            )
        elif kind == "mult":
            q = 2 * int(rng.integers(0, 1 << (w - 1))) + 1
            ops.append((lambda s, r=reg, q=q: apply_mod_mult(s, r, q), lambda x, r=reg, q=q: dense.mod_mult(x, r, q), f"mult {reg} q={q}"))
        else:
            out = names[int(rng.integers(len(names)))]
            if out == reg:
                continue
            table = rng.integers(0, 1 << layout.width(out), size=1 << w).tolist()
            f = table.__getitem__
            ops.append((lambda s, a=reg, b=out, f=f: apply_oracle(s, a, b, f), lambda x, a=reg, b=out, f=f: dense.oracle(x, a, b, f), f"U_f {reg}->{out}"))
        fresh.discard(reg)
        if kind in ("cnot", "oracle"):
            fresh.discard(ops[-1][2].split("->")[-1])
    return ops


def run_both(layout, ops):
    sparse = new_state(layout)
    mirror = dense.dense_new(layout)
    for sf, df, _ in ops:
        sparse = sf(sparse)
        mirror = df(mirror)
    return sparse, mirror


def random_case(seed, max_total=16, length=8):
    rng = np.random.default_rng(seed)
    layout = random_layout(rng, max_total)
    ops = random_sequence(rng, layout, length)
    sparse, mirror = run_both(layout, ops)
    return layout, ops, sparse, mirror
