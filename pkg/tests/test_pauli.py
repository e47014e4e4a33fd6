import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oedkit.oracle import to_dense
from oedkit.pauli import (
    DimensionError,
    PauliParseError,
    PauliString,
    commutator,
    commutes_with,
    format_pauli,
    multiply,
    parse,
    single,
)


def strings(max_sites=8):
    return st.integers(1, max_sites).flatmap(
        lambda L: st.tuples(
            st.builds(PauliString, st.just(L), st.integers(0, 2**L - 1), st.integers(0, 2**L - 1)),
            st.builds(PauliString, st.just(L), st.integers(0, 2**L - 1), st.integers(0, 2**L - 1)),
        )
    )


def test_single_site_products():
    X, Y, Z = (single(s, 1, 1) for s in "XYZ")
    xy = multiply(X, Y)
    assert xy.string == Z and xy.coefficient == 1j
    yx = multiply(Y, X)
    assert yx.string == Z and yx.coefficient == -1j
    assert multiply(Z, X).coefficient == 1j and multiply(Z, X).string == Y


def test_commutator_examples():
    L = 2
    c = commutator(parse("X1 X2", L), parse("Z1", L))
    assert c.string == parse("Y1 X2", L)
    assert c.coefficient == -2j
    assert commutator(parse("X1 X2", L), parse("Z1 Z2", L)).is_zero


@pytest.mark.parametrize("L", [1, 2])
def test_products_match_dense_exhaustively(L):
    words = ["".join(w) for w in itertools.product("IXYZ", repeat=L)]
    for a, b in itertools.product(words, repeat=2):
        p, q = parse(a, L), parse(b, L)
        P, Q = to_dense(p), to_dense(q)
        r = multiply(p, q)
        assert np.allclose(P @ Q, r.coefficient * to_dense(r.string))
        c = commutator(p, q)
        expect = P @ Q - Q @ P
        got = np.zeros_like(expect) if c.is_zero else c.coefficient * to_dense(c.string)
        assert np.allclose(expect, got)


@settings(max_examples=300, deadline=None)
@given(strings())
def test_commutation_is_symmetric(pq):
    p, q = pq
    assert commutes_with(p, q) == commutes_with(q, p)
    assert multiply(p, p).string.is_identity()


@settings(max_examples=300, deadline=None)
@given(strings())
def test_anticommuting_products_flip_sign(pq):
    p, q = pq
    a, b = multiply(p, q), multiply(q, p)
    assert a.string == b.string
    if commutes_with(p, q):
        assert a.coefficient == b.coefficient
    else:
        assert a.coefficient == -b.coefficient


@settings(max_examples=200, deadline=None)
@given(strings(12))
def test_parse_format_round_trip(pq):
    p, _ = pq
    assert parse(format_pauli(p), p.num_sites) == p
    assert parse(p.word(), p.num_sites) == p


def test_parse_forms():
    assert parse("Z1 Z2 X3", 3) == parse("ZZX", 3)
    assert parse("", 4).is_identity()
    assert parse("I", 4).is_identity()
    assert format_pauli(parse("", 3)) == "I"


@pytest.mark.parametrize("text", ["Q1", "X0", "X5", "X1 Z1", "XZ"])
def test_parse_rejects(text):
    with pytest.raises(PauliParseError):
        parse(text, 4)


def test_size_mismatch():
    with pytest.raises(DimensionError):
        multiply(single("X", 1, 2), single("X", 1, 3))


def test_mask_validation():
    with pytest.raises(ValueError):
        PauliString(2, 0b100, 0)
