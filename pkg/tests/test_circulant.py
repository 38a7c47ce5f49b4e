from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from butson.circulant import (
    TABLE1,
    ComplementaryPair,
    NotComplementaryError,
    SearchBudgetExceeded,
    assemble_2circulant,
    autocorrelation,
    build_cosets,
    build_table1_matrix,
    complement_bucket,
    expand_simple_vector,
    format_pair,
    gamma_batch,
    gram_identity_holds,
    is_complementary,
    pair_counts,
    parse_pair,
    row_sum_bucket,
    row_sum_value,
    search_complementary,
)
from butson.cyclotomic import CyclotomicElement, from_exponents
from butson.matrices import verify_bh

SYSTEMS = [(5, 2, 2), (7, 3, 3), (13, 4, 2), (17, 4, 3), (31, 6, 3)]


def direct_gamma(c, cs, q, s):
    x = expand_simple_vector(c, cs, q)
    p = cs.p
    return from_exponents(q, [(x[i] - x[(i + s) % p]) % q for i in range(p)])


def test_cosets():
    assert build_cosets(17, 4, 3).cosets[0] == (1, 4, 13, 16)
    assert build_cosets(31, 6, 3).cosets[0] == (1, 2, 4, 8, 16)
    assert build_cosets(73, 8, 5).cosets[0] == (1, 2, 4, 8, 16, 32, 37, 55, 64)
    for p, k, g in SYSTEMS:
        cs = build_cosets(p, k, g)
        assert all(len(G) == (p - 1) // k for G in cs.cosets)
        assert sorted(i for G in cs.cosets for i in G) == list(range(1, p))
    for bad in [(15, 2, 2), (17, 3, 3), (17, 4, 2)]:
        with pytest.raises(ValueError):
            build_cosets(*bad)


@pytest.mark.parametrize("pkg", SYSTEMS + [(3, 1, 2)])
def test_pair_counts(pkg):
    cs = build_cosets(*pkg)
    pc = pair_counts(cs)
    k, p = cs.k, cs.p
    for t in range(k):
        assert pc.total(t) == p
        s = cs.cosets[t][0]
        brute = np.zeros((k, k), dtype=int)
        for i in range(1, p):
            j = (i + s) % p
            if j:
                brute[cs.coset_of[i], cs.coset_of[j]] += 1
        assert np.array_equal(brute, pc.inner[:, :, t])
        # shift -s swaps the roles of the two cosets
        assert np.array_equal(pc.inner[:, :, t].T, pc.inner[:, :, pc.minus[t]])


def test_autocorrelation_examples():
    cs = build_cosets(17, 4, 3)
    flat = autocorrelation([0, 0, 0, 0], cs, 10)
    assert all(g == CyclotomicElement.from_int(10, 17) for g in flat.full())
    row = TABLE1[0]
    assert (autocorrelation(row.a, cs, 10) + autocorrelation(row.b, cs, 10)).is_zero()


@st.composite
def system_and_vector(draw):
    p, k, g = draw(st.sampled_from(SYSTEMS))
    q = draw(st.sampled_from([2, 4, 6, 10, 12]))
    c = draw(st.lists(st.integers(0, q - 1), min_size=k, max_size=k))
    return build_cosets(p, k, g), q, c


@settings(max_examples=100, deadline=None)
@given(system_and_vector())
def test_autocorrelation_matches_definition(data):
    cs, q, c = data
    ac = autocorrelation(c, cs, q)
    for s in range(1, cs.p):
        assert ac.gamma(s) == direct_gamma(c, cs, q, s)
        assert ac.gamma(cs.p - s) == ac.gamma(s).conjugate()
    batch = gamma_batch(np.array([c]), pair_counts(cs), q)[0]
    assert [tuple(r) for r in batch.tolist()] == [g.coeffs for g in ac.per_coset]


def test_row_sum_condition():
    row = TABLE1[1]
    cs = build_cosets(row.p, row.k, row.g)
    total = row_sum_value(row.a, cs, row.q).abs_square() + row_sum_value(row.b, cs, row.q).abs_square()
    assert total == CyclotomicElement.from_int(row.q, 2 * 36 * 31)
    assert row_sum_bucket(row.b, cs, row.q) == complement_bucket(row_sum_bucket(row.a, cs, row.q), cs, row.q)
    v = row_sum_value([0] * 6, cs, 6)
    assert v == CyclotomicElement.from_int(6, 6 * 31)
    assert row_sum_bucket([0] * 6, cs, 6) == CyclotomicElement.from_int(6, 36 * 31 * 31).coeffs


@pytest.mark.parametrize("row", TABLE1, ids=lambda r: f"BH({r.n},{r.q})")
def test_table1_assembles(row):
    M = build_table1_matrix(row)
    assert (M.n, M.q) == (row.n, row.q)
    assert verify_bh(M).is_bh


def test_assemble_errors():
    row = TABLE1[0]
    cs = build_cosets(row.p, row.k, row.g)
    with pytest.raises(ValueError):
        assemble_2circulant(ComplementaryPair(row.a, row.b), cs, 5)
    with pytest.raises(NotComplementaryError, match="Gamma"):
        assemble_2circulant(ComplementaryPair(row.a, (9, 3, 7, 2)), cs, 10)


def test_search_seventeen():
    pairs = search_complementary(17, 4, 3, 10)
    assert pairs
    assert frozenset({TABLE1[0].a, TABLE1[0].b}) in {pr.unordered() for pr in pairs}
    assert pairs == search_complementary(17, 4, 3, 10, use_buckets=False)
    cs = build_cosets(17, 4, 3)
    for pr in pairs:
        assert verify_bh(assemble_2circulant(pr, cs, 10)).is_bh
        assert pr.a <= pr.b


def test_search_edge_cases():
    assert search_complementary(5, 1, 2, 2) == []
    with pytest.raises(SearchBudgetExceeded):
        search_complementary(73, 8, 5, 6, budget=1000)


def test_pair_format_round_trip():
    row = TABLE1[2]
    cs = build_cosets(row.p, row.k, row.g)
    line = format_pair(ComplementaryPair(row.a, row.b), cs, row.q)
    assert line == "41 8 6 6 | a: 5 4 1 2 5 4 1 2 | b: 3 3 0 3 3 0 0 3"
    p, k, g, q, pr = parse_pair(line)
    assert (p, k, g, q, pr.a, pr.b) == (41, 8, 6, 6, row.a, row.b)


_KNOWN = {(17, 4, 3, 10): search_complementary(17, 4, 3, 10)}


@st.composite
def candidate_pairs(draw):
    cs = build_cosets(17, 4, 3)
    q = 10
    if draw(st.booleans()):
        pr = draw(st.sampled_from(_KNOWN[(17, 4, 3, 10)]))
        a, b = list(pr.a), list(pr.b)
        if draw(st.booleans()):
            i = draw(st.integers(0, 3))
            b[i] = (b[i] + draw(st.integers(1, q - 1))) % q
    else:
        a = draw(st.lists(st.integers(0, q - 1), min_size=4, max_size=4))
        b = draw(st.lists(st.integers(0, q - 1), min_size=4, max_size=4))
    return cs, q, a, b


@settings(max_examples=60, deadline=None)
@given(candidate_pairs())
def test_gram_identity_iff_complementary(data):
    cs, q, a, b = data
    gamma_zero = (autocorrelation(a, cs, q) + autocorrelation(b, cs, q)).is_zero()
    assert gram_identity_holds(a, b, cs, q) == gamma_zero
    if gamma_zero:
        # the row-sum condition is necessary
        assert is_complementary(a, b, cs, q)
