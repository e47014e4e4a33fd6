import numpy as np
import pytest

from oedkit.dynamics import InitialState
from oedkit.models import XYCouplings, build_xy
from oedkit.oracle import CapExceededError, exact_heisenberg, initial_density, pauli_decompose, to_dense
from oedkit.pauli import parse


def test_kron_order_site_one_most_significant():
    Z1 = to_dense(parse("Z1", 2))
    assert np.allclose(np.diag(Z1), [1, 1, -1, -1])


def test_decompose_round_trip():
    L = 3
    h = build_xy(XYCouplings.random(L, seed=4))
    coeffs = pauli_decompose(to_dense(h), L)
    expect = {p.word(): c for c, p in h.terms}
    assert set(coeffs) == set(expect)
    assert all(abs(coeffs[w] - expect[w]) < 1e-12 for w in expect)


def test_initial_density_trace_and_purity_on_site():
    rho = initial_density(InitialState.from_label(2, "+i"), 3)
    assert np.isclose(np.trace(rho), 1)
    assert np.isclose(np.trace(rho @ to_dense(parse("Y2", 3))).real, 1)


def test_time_zero_expectation():
    L = 4
    h = build_xy(XYCouplings.random(L, seed=1))
    v = exact_heisenberg(h, parse("X1", L), [0.0], InitialState.from_label(1, "-"))
    assert v[0] == pytest.approx(-1.0)


def test_cap_enforced():
    with pytest.raises(CapExceededError):
        to_dense(parse("X1", 11))
