from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oedkit.closure import IncompleteClassError, class_membership, closure, generate_class, oed, partition_all
from oedkit.models import XYCouplings, XYZZCouplings, build_kitaev, build_xy, build_xyzz, kitaev_chain
from oedkit.oracle import exact_class_projection
from oedkit.pauli import PauliString, commutator, parse, single


def majorana_strings(L):
    out = set()
    for k in range(1, L + 1):
        z = (1 << (k - 1)) - 1
        out.add(PauliString(L, 1 << (k - 1), z))
        out.add(PauliString(L, 1 << (k - 1), z | 1 << (k - 1)))
    return out


def is_closed(h, cls):
    members = cls.member_set()
    for p in members:
        for q in h.strings:
            c = commutator(q, p)
            if not c.is_zero and c.string not in members:
                return False
    return True


def test_majorana_class_members():
    for L in (2, 5, 9):
        h = build_xy(XYCouplings.random(L, seed=L))
        c = generate_class(h, single("X", 1, L))
        assert c.member_set() == majorana_strings(L)
        assert c.oed == 2 * L


def test_xy_class_sizes_are_binomials():
    # class N of the open chain holds C(2L, N) strings
    L = 7
    h = build_xy(XYCouplings.random(L, seed=0))
    assert generate_class(h, parse("X1 Z2 Z3", L)).size in {comb(2 * L, n) for n in range(2 * L + 1)}
    assert generate_class(h, parse("Z1 Z2", L)).size == comb(2 * L, 4)


@pytest.mark.parametrize("make", [
    lambda: build_xy(XYCouplings.random(5, seed=4)),
    lambda: build_kitaev(kitaev_chain(5, list(np.linspace(0.6, 1.4, 4)))),
    lambda: build_xyzz(XYZZCouplings.random(6, seed=2)),
])
@pytest.mark.parametrize("seed", ["X1", "Z2"])
def test_engine_matches_dense_projection(make, seed):
    h = make()
    L = h.num_sites
    c = generate_class(h, parse(seed, L))
    assert c.member_set() == exact_class_projection(h, parse(seed, L))


def test_engine_matches_dense_projection_two_site_seed():
    h = build_xy(XYCouplings.random(4, seed=8))
    for seed in ("Y3", "X1 Y2", "Z1 Z4"):
        assert generate_class(h, parse(seed, 4)).member_set() == exact_class_projection(h, parse(seed, 4))


def test_closed_under_commutation():
    h = build_xy(XYCouplings.random(5, seed=9))
    for seed in ("Z3", "X2 Z3", "Y1 Y2"):
        assert is_closed(h, generate_class(h, parse(seed, 5)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4**5 - 1))
def test_class_is_seed_independent(k):
    L = 5
    h = build_xy(XYCouplings.random(L, seed=1))
    p = PauliString(L, k >> L, k & (2**L - 1))
    a = generate_class(h, p)
    other = a.members[len(a.members) // 2]
    assert generate_class(h, other).same_members(a)


def test_partition_disjoint_and_complete():
    h = build_xy(XYCouplings.random(4, seed=3))
    part = partition_all(h)
    keys = np.concatenate([c.keys for c in part.classes])
    assert keys.size == 4**4
    assert np.unique(keys).size == keys.size
    assert part.class_of(parse("X1", 4)).size == 8


def test_budget_exhaustion_is_flagged():
    h = build_xy(XYCouplings.random(8, seed=0))
    c = generate_class(h, parse("Z1", 8), budget=10)
    assert not c.complete and c.oed is None
    assert oed(h, parse("Z1", 8), budget=10).exact is False
    with pytest.raises(IncompleteClassError):
        class_membership(c, parse("Z1", 8))


def test_multi_source_closure_is_union():
    L = 5
    h = build_xy(XYCouplings.random(L, seed=2))
    a, b = parse("X1", L), parse("Z1", L)
    both = closure(h, [a, b])
    assert both.member_set() == generate_class(h, a).member_set() | generate_class(h, b).member_set()


def test_wide_layout_matches_packed_counts():
    # beyond 32 sites the keys switch to multi-word rows
    for L in (31, 33, 40):
        h = build_xy(XYCouplings.random(L, seed=L))
        assert generate_class(h, single("X", 1, L)).size == 2 * L
        assert generate_class(h, single("Z", 3, L)).size == 2 * L * L - L
    h = build_kitaev(kitaev_chain(36))
    # the end-site sum of a Kitaev chain is 2L + 1
    assert sum(generate_class(h, single(s, 1, 36)).size for s in "XYZ") == 73


def test_wide_membership_and_members():
    L = 70
    h = build_xy(XYCouplings.random(L, seed=1))
    c = generate_class(h, single("X", 1, L))
    assert c.member_set() == majorana_strings(L)
    assert single("Y", 70, L) not in c
    assert parse("Z1 X2", L) in c
