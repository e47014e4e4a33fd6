import numpy as np
import pytest

from oedkit.closure import generate_class
from oedkit.dynamics import (
    InitialState,
    IntegrationError,
    build_generator,
    evolve,
    expectation_weights,
    observable,
    run_relaxation_experiment,
)
from oedkit.models import XYCouplings, XYZZCouplings, build_kitaev, build_xy, build_xyzz, kitaev_chain
from oedkit.oracle import dense_generator, exact_heisenberg
from oedkit.pauli import parse, single


def _f0(cls, seed):
    f = np.zeros(cls.size)
    f[cls.index_of(seed)] = 1.0
    return f


def test_generator_matches_dense_trace_formula():
    L = 5
    for h in (build_xy(XYCouplings.random(L, seed=1)), build_xyzz(XYZZCouplings.random(L, seed=2))):
        cls = generate_class(h, single("Z", 2, L))
        G = build_generator(h, cls).matrix.toarray()
        assert np.abs(G - dense_generator(h, cls.members)).max() < 1e-12
        assert np.array_equal(G, -G.T)


def test_single_spin_precession():
    # H = h Z, A = X: dX/dt = i h [Z, X] = -2 h Y
    h = build_xy(XYCouplings.uniform(1, h=0.7))
    cls = generate_class(h, single("X", 1, 1))
    t = np.linspace(0, 3, 31)
    traj = evolve(build_generator(h, cls), _f0(cls, single("X", 1, 1)), t)
    assert np.allclose(traj.column(cls.index_of(single("X", 1, 1))), np.cos(1.4 * t))
    assert np.allclose(traj.column(cls.index_of(single("Y", 1, 1))), -np.sin(1.4 * t))


@pytest.mark.parametrize("method", ["eig", "expm", "rk4"])
def test_methods_agree_with_oracle(method):
    L = 6
    h = build_kitaev(kitaev_chain(L, [0.7, 1.1, 0.9, 1.3, 0.8]))
    seed = single("Z", 2, L)
    init = InitialState.from_label(2, "0")
    cls = generate_class(h, seed)
    t = np.linspace(0, 4, 21)
    traj = evolve(build_generator(h, cls), _f0(cls, seed), t, method=method)
    tol = 1e-7 if method == "rk4" else 1e-10
    assert np.abs(observable(cls, traj, init) - exact_heisenberg(h, seed, t, init)).max() < tol


def test_norm_is_conserved():
    L = 8
    h = build_xy(XYCouplings.random(L, seed=5))
    cls = generate_class(h, parse("X2 Z3", L))
    traj = evolve(build_generator(h, cls), _f0(cls, parse("X2 Z3", L)), np.linspace(0, 10, 11))
    assert traj.norm_drift < 1e-10


def test_drift_guard_trips_on_coarse_rk4():
    L = 4
    h = build_xy(XYCouplings.uniform(L, h=5.0))
    cls = generate_class(h, single("X", 1, L))
    with pytest.raises(IntegrationError):
        evolve(build_generator(h, cls), _f0(cls, single("X", 1, L)), [0.0, 5.0], method="rk4", step=0.2)


def test_weights_only_on_site_strings():
    L = 4
    h = build_xy(XYCouplings.random(L, seed=0))
    cls = generate_class(h, single("X", 1, L))
    w = expectation_weights(cls, InitialState.from_label(1, "+"))
    assert w == {cls.index_of(single("X", 1, L)): 1.0}


def test_initial_state_validation():
    with pytest.raises(ValueError):
        InitialState(1, (1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        InitialState.from_label(1, "up")


def test_relaxation_rows():
    rows = run_relaxation_experiment(build_xy(XYCouplings.random(5, seed=3)), [1, 3], ["+"], 1.0, 0.5)
    assert [r[:3] for r in rows[:3]] == [(0.0, 1, "X1"), (0.5, 1, "X1"), (1.0, 1, "X1")]
    assert rows[0][3] == pytest.approx(1.0)
    assert len(rows) == 6
