from __future__ import annotations

import itertools

import numpy as np
import pytest

from butson.cyclotomic import CyclotomicElement, from_exponents
from butson.guided_search import (
    H1,
    H2,
    H10,
    Z0,
    SearchConfig,
    complete,
    half_inner_product,
    iter_h3,
    ort_plus,
    passes_magnitude2,
    staged_search,
    verify_paper_matrix,
    z0_plus_count,
)
from butson.matrices import paper_bh18_14, permute_rows, verify_bh
from butson.orbits import is_in_ort
from butson.spectrum import ghat_H

P = paper_bh18_14()
ROWS = [tuple(r) for r in P.array.tolist()]
ROOTS = np.exp(2j * np.pi * np.arange(14) / 14)


def test_ort_plus():
    rows = ort_plus()
    assert len(rows) == 7 and [r.y for r in rows] == list(range(7))
    for r in rows:
        assert is_in_ort(r.template, 14)
        assert from_exponents(14, [7 * sum(r.template) % 14]) == CyclotomicElement.one(14)
    assert rows[0].template == H2
    with pytest.raises(ValueError):
        ort_plus(q=10, n=14)


def test_half_inner_product():
    h = H2[:9]
    v = half_inner_product(h, h)
    assert v == CyclotomicElement.from_int(14, 9) and not passes_magnitude2(h, h)
    w = half_inner_product((0, 7, 0, 7, 0, 7, 0, 7, 0), (0,) * 9)
    assert w == CyclotomicElement.from_int(14, 1)
    zero = half_inner_product((0, 2, 4, 6, 8, 10, 12, 0, 7), (0,) * 9)
    assert zero.is_zero() and not passes_magnitude2((0, 2, 4, 6, 8, 10, 12, 0, 7), (0,) * 9)


def test_magnitude_filter_count_against_float_oracle():
    perms = np.array(sorted(set(itertools.permutations(H2[:9]))))
    assert len(perms) == 181440
    vals = ROOTS[(perms - np.array(H2[:9])) % 14].sum(axis=1)
    mask = np.isclose(np.abs(vals) ** 2, 4)
    assert mask.sum() > 0
    rng = np.random.default_rng(3)
    for i in rng.choice(len(perms), 150, replace=False).tolist() + np.flatnonzero(mask)[:50].tolist():
        assert passes_magnitude2(tuple(perms[i]), H2[:9]) == bool(mask[i])


def test_depth_three_count():
    res = staged_search(stage_limit=3)
    assert res.counts.triplets == 134504
    shards = [staged_search(stage_limit=3, shard=(i, 5)).counts.triplets for i in range(5)]
    assert sum(shards) == 134504


def test_h3_rows_are_exact():
    rng = np.random.default_rng(0)
    h3s = list(iter_h3())
    for idx in rng.choice(len(h3s), 40, replace=False).tolist():
        r = h3s[idx]
        assert sorted(r[:9]) == sorted(H2[:9])
        assert sorted(r[9:]) == sorted((1, 8, 0, 2, 4, 6, 8, 10, 12))
        assert from_exponents(14, [(a - b) % 14 for a, b in zip(r, H2)]).is_zero()
        assert passes_magnitude2(r[:9], H2[:9])


def _float_depth4(h3):
    """Count h4 rows for one h3 with a floating-point join (test oracle)."""
    L = np.array(sorted(set(itertools.permutations(H2[:9]))))
    R = np.array(sorted(set(itertools.permutations((6, 13, 0, 2, 4, 6, 8, 10, 12)))))
    l2 = ROOTS[(L - np.array(H2[:9])) % 14].sum(1)
    L = L[np.isclose(np.abs(l2) ** 2, 4)]
    key = lambda v: np.round(np.stack([v.real, v.imag], 1) * 1e6).astype(np.int64)
    kl = np.concatenate([key(ROOTS[(L - np.array(H2[:9])) % 14].sum(1)),
                         key(ROOTS[(L - np.array(h3[:9])) % 14].sum(1))], 1)
    kr = np.concatenate([key(-ROOTS[(R - np.array(H2[9:])) % 14].sum(1)),
                         key(-ROOTS[(R - np.array(h3[9:])) % 14].sum(1))], 1)
    from collections import Counter
    cr = Counter(map(tuple, kr.tolist()))
    return sum(cr[tuple(k)] for k in kl.tolist())


def test_depth_four_shard_against_float_oracle():
    res = staged_search(stage_limit=4, shard=(0, 40000))
    h3s = [r for i, r in enumerate(iter_h3()) if i % 40000 == 0]
    assert res.counts.triplets == len(h3s) == 4
    assert res.counts.quadruples == sum(_float_depth4(h) for h in h3s)


def test_shard_determinism():
    a = staged_search(stage_limit=4, shard=(7, 512))
    b = staged_search(stage_limit=4, shard=(7, 512))
    assert a.counts == b.counts and a.counts.quadruples > 0


def test_paper_rows_follow_the_pipeline():
    res = staged_search(stage_limit=10, seed_rows=ROWS[2:9], collect=True)
    c = res.counts
    assert (c.triplets, c.quadruples, c.after_y0, c.after_y5, c.completions) == (1, 1, 1, 1, 1)
    (M,) = res.matrices
    assert verify_bh(M).is_bh
    assert [tuple(r) for r in M.array.tolist()[:10]] == ROWS[:10]


def test_completion_recovers_paper_rows():
    M = complete(ROWS[:10])
    assert M is not None and verify_bh(M).is_bh
    assert sorted(tuple(r) for r in M.array.tolist()[10:]) == sorted(ROWS[10:])


def test_verify_paper_matrix():
    rep = verify_paper_matrix()
    assert rep.ok and rep.is_bh and rep.issues == ()
    assert ROWS[0] == H1 and ROWS[1] == H2 and ROWS[9] == H10
    swapped = permute_rows(P, [0, 1, 3, 2] + list(range(4, 18)))
    bad = verify_paper_matrix(swapped)
    assert bad.is_bh and not bad.ok
    assert {row for row, _ in bad.issues} >= {3, 4}


def test_z0_majority():
    plus = z0_plus_count(P)
    assert plus >= 18 * 18 / 2
    assert ghat_H(P, Z0) == 2 * plus - 18 * 18 >= 0


def test_config_validation():
    with pytest.raises(ValueError):
        staged_search(SearchConfig(y_order=(1, 6, 0, 2, 3, 4, 4)))
    with pytest.raises(ValueError):
        staged_search(SearchConfig(enforce_half_split=False))
    with pytest.raises(ValueError):
        staged_search(SearchConfig(fixed_h10=False), stage_limit=10)
    with pytest.raises(ValueError):
        staged_search(stage_limit=11)
    relaxed = SearchConfig(magnitude2_rows=())
    assert staged_search(relaxed, stage_limit=3, shard=(0, 1000)).counts.triplets > 134504 // 1000


def test_node_budget_truncates():
    res = staged_search(stage_limit=5, max_nodes=5)
    assert res.counts.truncated


@pytest.mark.slow
def test_full_depth_four():
    assert staged_search(stage_limit=4).counts.quadruples == 2421064


@pytest.mark.slow
def test_full_pipeline_counts():
    # cluster-scale: reproduces every published stage count and the completions
    c = staged_search(stage_limit=10).counts
    assert (c.after_y0, c.after_y2, c.after_y3, c.after_y4, c.after_y5) == (401952, 4304, 6128, 8976, 8912)
    assert c.completions == 8912
