from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction
from math import comb, factorial, gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from butson.orbits import (
    BoundsExceeded,
    canonical_perm,
    canonical_psg,
    canonical_z,
    enumerate_ort_classes,
    enumerate_z_classes,
    is_in_ort,
    orbit_size_perm,
    orbit_size_psg,
    ort_size,
    psg_closure,
)
from butson.spectrum import orbit_power_sum


def _units(q):
    return [r for r in range(1, q) if gcd(r, q) == 1] or [1]


def _brute_ort(n, q):
    """ORT vectors by a floating-point vanishing test, and their class keys."""
    V = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64).reshape(-1, n)
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    S = V[np.abs(roots[V].sum(axis=1)) < 1e-9]
    if not len(S):
        return S, np.empty(0, dtype=np.int64)
    weights = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    key = None
    for s in range(q):
        for r in _units(q):
            img = np.sort((r * (S + s)) % q, axis=1) @ weights
            key = img if key is None else np.minimum(key, img)
    return S, key


SMALL = [(n, q) for q in range(2, 9) for n in range(1, 7)]


@pytest.mark.parametrize("n,q", SMALL)
def test_classes_match_brute_force(n, q):
    S, key = _brute_ort(n, q)
    classes = enumerate_ort_classes(n, q)
    assert ort_size(classes) == len(S)
    sizes = sorted(Counter(key.tolist()).values())
    assert sorted(cl.psg_orbit_size for cl in classes) == sizes
    # every class representative lands in its own brute-force class
    weights = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    by_key = Counter(key.tolist())
    for cl in classes:
        v = np.array(cl.rep.vector())
        k = min(int(np.sort((r * (v + s)) % q) @ weights) for s in range(q) for r in _units(q))
        assert by_key[k] == cl.psg_orbit_size
        assert Fraction(n - 1, cl.psg_orbit_size) >= 0


@pytest.mark.parametrize("n,q", [(n, q) for (n, q) in SMALL if q ** n <= 50000])
def test_power_sums_match_brute_force(n, q):
    S, key = _brute_ort(n, q)
    classes = enumerate_ort_classes(n, q)
    if not classes:
        return
    zs = [zc.rep for zc in enumerate_z_classes(n, q)][:12]
    weights = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for cl in classes:
        v = np.array(cl.rep.vector())
        k = min(int(np.sort((r * (v + s)) % q) @ weights) for s in range(q) for r in _units(q))
        members = S[key == k]
        for z in zs:
            val = np.exp(2j * np.pi * ((members @ np.array(z)) % q) / q).sum()
            assert abs(val.imag) < 1e-6
            assert orbit_power_sum(cl, z) == round(val.real)


@pytest.mark.parametrize("n,q", [(n, q) for n in range(1, 6) for q in range(2, 9)])
def test_z_classes_match_brute_force(n, q):
    Z = [z for z in itertools.product(range(q), repeat=n) if sum(z) % q == 0]
    keys = Counter(min(tuple(sorted((r * e) % q for e in z)) for r in _units(q)) for z in Z)
    zcs = enumerate_z_classes(n, q)
    assert len(zcs) == len(keys)
    assert sum(zc.class_size for zc in zcs) == q ** (n - 1)
    assert sorted(zc.class_size for zc in zcs) == sorted(keys.values())
    assert zcs[0].rep == (0,) * n


def test_examples():
    assert canonical_perm([0, 0, 0], 3).counts == (3, 0, 0)
    assert canonical_perm([0, 2, 1, 2], 3).counts == (1, 1, 2)
    omega1 = [0] * 5 + [1] * 5 + [2] * 5
    assert canonical_perm(omega1, 3).counts == (5, 5, 5)
    consts = {canonical_psg([a] * 4, 6) for a in range(6)}
    assert len(consts) == 1
    w1, w2 = canonical_psg([0, 4, 8, 0, 6], 12), canonical_psg([0, 4, 8, 1, 7], 12)
    assert w1 != w2
    assert canonical_psg(w1.vector(), 12) == w1
    assert is_in_ort([0, 1], 2)
    assert is_in_ort([0, 2, 4, 0, 3], 6)
    assert not is_in_ort([0, 0], 2)


def test_class_tables():
    c512 = enumerate_ort_classes(5, 12)
    assert [c.psg_orbit_size for c in c512] == [720, 1440]
    c56 = enumerate_ort_classes(5, 6)
    assert len(c56) == 1 and ort_size(c56) == comb(5, 2) * factorial(3) * 6 == 360
    c153 = enumerate_ort_classes(15, 3)
    assert len(c153) == 1 and c153[0].psg_orbit_size == 756756
    assert c153[0].rep.counts == (5, 5, 5)


def test_orbit_sizes():
    assert orbit_size_perm((4, 0, 0)) == 1
    assert orbit_size_perm((5, 5, 5)) == 756756
    assert orbit_size_perm((1, 1, 2)) == len(set(itertools.permutations([0, 1, 2, 2])))
    assert orbit_size_psg(canonical_psg([0, 4, 8, 0, 6], 12)) == 720
    # the constant vectors of length 1 over Z_6 form one class of size 6
    assert orbit_size_psg(canonical_psg([0], 6)) == 6
    assert len(psg_closure((1, 0, 0, 0, 0, 0))) == 6


def test_z_class_examples():
    zcs = enumerate_z_classes(2, 3)
    assert sorted(zc.rep for zc in zcs) == [(0, 0), (1, 2)]
    z153 = enumerate_z_classes(15, 3)
    assert sum(zc.class_size for zc in z153) == 3 ** 14


def test_caps():
    with pytest.raises(BoundsExceeded):
        enumerate_z_classes(15, 3, cap=100)
    with pytest.raises(BoundsExceeded):
        enumerate_ort_classes(18, 14, cap=1000)


@st.composite
def vec_and_action(draw):
    q = draw(st.sampled_from([3, 4, 5, 6, 8, 10, 12]))
    n = draw(st.integers(1, 7))
    x = draw(st.lists(st.integers(0, q - 1), min_size=n, max_size=n))
    s = draw(st.integers(0, q - 1))
    r = draw(st.sampled_from(_units(q)))
    perm = draw(st.permutations(range(n)))
    return q, x, s, r, perm


@settings(max_examples=150, deadline=None)
@given(vec_and_action())
def test_group_invariance(data):
    q, x, s, r, perm = data
    y = [(r * (x[i] + s)) % q for i in perm]
    assert canonical_psg(x, q) == canonical_psg(y, q)
    assert is_in_ort(x, q) == is_in_ort(y, q)
    if sum(x) % q == 0:
        assert canonical_z(x, q) == canonical_z([(r * x[i]) % q for i in perm], q)
