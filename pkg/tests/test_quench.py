import math
from math import comb

import numpy as np
import pytest

from oedkit.closure import generate_class
from oedkit.dynamics import InitialState
from oedkit.models import XYCouplings, build_kitaev, build_xy, kitaev_chain
from oedkit.oracle import exact_heisenberg, gate_unitary, pauli_decompose, to_dense
from oedkit.pauli import DimensionError, parse, single
from oedkit.quench import (
    QuenchGate,
    conjugate,
    extended_class,
    parse_schedule,
    quenched_evolution,
    scheduled_class,
    swap_growth_counts,
    swap_growth_study,
)

GATES = [QuenchGate.swap(1, 3), QuenchGate.swap(2, 3), QuenchGate.pauli("x", 2), QuenchGate.pauli("y", 1),
         QuenchGate.pauli("z", 3), QuenchGate.phase_s(2), QuenchGate.axis_w(2, 0.37), QuenchGate.axis_w(1, -1.2)]


def test_documented_images():
    img = conjugate(QuenchGate.swap(1, 2), parse("X1", 2)).outputs
    assert img == ((1.0, parse("X2", 2)),)
    assert conjugate(QuenchGate.phase_s(1), parse("X1", 1)).outputs == ((-1.0, parse("Y1", 1)),)
    out = dict((p, c) for c, p in conjugate(QuenchGate.axis_w(1, math.pi / 8), parse("X1", 1)).outputs)
    assert out[parse("X1", 1)] == pytest.approx(math.sqrt(0.5))
    assert out[parse("Y1", 1)] == pytest.approx(math.sqrt(0.5))


@pytest.mark.parametrize("gate", GATES, ids=lambda g: f"{g.kind}{g.sites}")
def test_conjugation_matches_dense(gate):
    L = 3
    W = gate_unitary(gate, L)
    for word in ("XYZ", "IXI", "ZYX", "IZI", "YIY", "III"):
        p = parse(word, L)
        dense = pauli_decompose(W.conj().T @ to_dense(p) @ W, L)
        img = {q.word(): c for c, q in conjugate(gate, p).outputs}
        assert set(dense) == set(img)
        assert all(abs(dense[w] - img[w]) < 1e-12 for w in img)
        assert sum(c * c for c in img.values()) == pytest.approx(1.0, abs=1e-12)
        if gate.kind != "axisw":
            assert len(img) == 1


def test_involutions():
    p = parse("X1 Y2 Z3", 3)
    for gate in GATES[:5]:
        ((c, q),) = conjugate(gate, p).outputs
        ((c2, r),) = conjugate(gate, q).outputs
        assert r == p and c * c2 == 1


def test_gate_validation():
    with pytest.raises(ValueError):
        QuenchGate.swap(2, 2)
    with pytest.raises(ValueError):
        QuenchGate("cnot", (1, 2))
    with pytest.raises(DimensionError):
        conjugate(QuenchGate.pauli("x", 5), parse("X1", 3))


def test_schedule_json():
    sched = parse_schedule([{"t": 1.0, "gate": "swap", "sites": [2, 3]},
                            {"t": 2.0, "gate": "axisw", "site": 1, "alpha": 0.3927}])
    assert sched[0] == (1.0, QuenchGate.swap(2, 3))
    assert sched[1][1].alpha == pytest.approx(0.3927)


def test_extended_contains_plain_class():
    L = 5
    h = build_xy(XYCouplings.random(L, seed=0))
    plain = generate_class(h, single("Z", 1, L)).member_set()
    for gates in ([QuenchGate.swap(2, 3)], [QuenchGate.axis_w(2, 0.4)], [QuenchGate.swap(1, 4)]):
        assert plain <= extended_class(h, gates, single("Z", 1, L)).member_set()


def test_pauli_and_phase_gates_preserve_onsager_class():
    L = 6
    h = build_xy(XYCouplings.random(L, seed=3))
    gates = [QuenchGate.pauli(k, s) for k in "xyz" for s in range(1, L + 1)] + [QuenchGate.phase_s(3)]
    assert extended_class(h, gates, single("Z", 1, L)).same_members(generate_class(h, single("Z", 1, L)))


def test_repeated_swap_escapes_polynomial_growth():
    # with unlimited reuse one SWAP reaches every even-parity string except I and the Z string
    L = 5
    h = build_xy(XYCouplings.random(L, seed=1))
    assert extended_class(h, [QuenchGate.swap(2, 3)], single("Z", 1, L)).size == 2 ** (2 * L - 1) - 2


def test_single_swap_merges_two_classes():
    L = 6
    h = build_xy(XYCouplings.random(L, seed=2))
    merged = scheduled_class(h, [QuenchGate.swap(2, 3)], single("Z", 1, L)).member_set()
    expect = generate_class(h, single("Z", 1, L)).member_set() | generate_class(h, parse("Z1 Z2", L)).member_set()
    assert merged == expect


def test_swap_growth_degrees():
    assert swap_growth_study(range(3, 8), 0).effective_degree == 2
    assert swap_growth_study(range(3, 9), 1).effective_degree == 4
    # two SWAPs on separate bonds join the classes of sizes C(2L, 2), C(2L, 4), C(2L, 6)
    assert swap_growth_counts([5, 6, 7], 2) == [comb(2 * L, 2) + comb(2 * L, 4) + comb(2 * L, 6) for L in (5, 6, 7)]


def test_no_gates_matches_plain_oracle():
    L = 5
    h = build_xy(XYCouplings.random(L, seed=7))
    t = np.linspace(0, 3, 13)
    init = InitialState.from_label(2, "+")
    r = quenched_evolution(h, [], single("X", 2, L), init, t)
    assert np.abs(r.values - exact_heisenberg(h, single("X", 2, L), t, init)).max() < 1e-10


def test_cancelling_swaps():
    L = 6
    h = build_xy(XYCouplings.random(L, seed=3))
    t = np.linspace(0, 3, 7)
    init = InitialState.from_label(1, "0")
    a = quenched_evolution(h, [], single("Z", 1, L), init, t).values
    b = quenched_evolution(h, [(1.0, QuenchGate.swap(2, 3)), (1.0, QuenchGate.swap(2, 3))],
                           single("Z", 1, L), init, t).values
    assert np.abs(a - b).max() < 1e-12


@pytest.mark.parametrize("sched", [
    [(1.0, QuenchGate.swap(2, 3))],
    [(0.5, QuenchGate.pauli("y", 1)), (2.0, QuenchGate.axis_w(1, 0.4)), (2.0, QuenchGate.phase_s(4))],
])
def test_quench_matches_oracle(sched):
    L = 6
    h = build_xy(XYCouplings.random(L, seed=3))
    t = np.linspace(0, 4, 41)
    for seed, init in ((single("Z", 1, L), InitialState.from_label(1, "0")),
                       (single("Y", 2, L), InitialState.from_label(2, "-i"))):
        r = quenched_evolution(h, sched, seed, init, t)
        assert np.abs(r.values - exact_heisenberg(h, seed, t, init, gates=sched)).max() < 1e-8


def test_kitaev_quench_matches_oracle():
    L = 6
    h = build_kitaev(kitaev_chain(L, [0.9, 1.2, 0.7, 1.1, 1.3]))
    sched = [(1.2, QuenchGate.axis_w(3, 0.3)), (2.0, QuenchGate.swap(1, 2))]
    t = np.linspace(0, 3, 16)
    init = InitialState.from_label(3, "0")
    r = quenched_evolution(h, sched, single("Z", 3, L), init, t)
    assert np.abs(r.values - exact_heisenberg(h, single("Z", 3, L), t, init, gates=sched)).max() < 1e-8


def test_parameter_quench_keeps_members():
    L = 6
    for seed in ("Z2", "X1 Z2", "Y3"):
        a = generate_class(build_xy(XYCouplings.random(L, seed=1)), parse(seed, L))
        b = generate_class(build_xy(XYCouplings.random(L, seed=2, lo=-2.0, hi=-0.1)), parse(seed, L))
        assert a.same_members(b)
