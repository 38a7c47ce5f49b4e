from __future__ import annotations

from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from butson.matrices import (
    LogMatrix,
    MatrixFormatError,
    dephase,
    fixtures,
    global_power,
    paper_bh18_14,
    parse,
    permute_columns,
    permute_rows,
    read_matrix,
    scale_column,
    scale_row,
    serialize,
    verify_bh,
    write_matrix,
)

H2 = LogMatrix(2, 2, ((0, 0), (0, 1)))
FIX = fixtures()


def _float_gram_ok(M: LogMatrix) -> bool:
    H = np.exp(2j * np.pi * M.array / M.q)
    return np.allclose(H @ H.conj().T, M.n * np.eye(M.n), atol=1e-9)


def test_order_two():
    assert verify_bh(H2).is_bh
    bad = verify_bh(LogMatrix(2, 2, ((0, 0), (0, 0))))
    assert not bad.is_bh and bad.failing_pair == (0, 1)


def test_exhaustive_lists_every_failure():
    M = LogMatrix.from_array(np.zeros((3, 3), dtype=int), 2)
    rep = verify_bh(M, exhaustive=True)
    assert rep.failures == ((0, 1), (0, 2), (1, 2))
    assert rep.checked_pairs == 3


def test_fixture_catalogue():
    assert set(FIX) == {"BH(18,14)-paper", "BH(34,10)-table1", "BH(62,6)-table1",
                        "BH(82,6)-table1", "BH(146,6)-table1"}
    P = FIX["BH(18,14)-paper"]
    assert (P.n, P.q) == (18, 14)
    from butson.circulant import TABLE1, build_table1_matrix

    row = TABLE1[0]
    assert (row.a, row.b) == ((8, 2, 6, 4), (9, 3, 7, 1))
    assert FIX["BH(34,10)-table1"] == build_table1_matrix(row)


@pytest.mark.parametrize("name", sorted(FIX))
def test_fixtures_verify_exactly_and_numerically(name):
    M = FIX[name]
    assert verify_bh(M).is_bh
    assert _float_gram_ok(M)


@pytest.mark.parametrize("name", sorted(FIX))
def test_columns_are_orthogonal_too(name):
    M = FIX[name]
    T = LogMatrix.from_array(M.array.T, M.q)
    assert verify_bh(T).is_bh


def test_equivalence_examples():
    P = paper_bh18_14()
    assert verify_bh(dephase(P)).is_bh
    assert verify_bh(global_power(P, 3)).is_bh
    with pytest.raises(ValueError):
        global_power(P, 7)
    assert dephase(scale_column(H2, 1, 1)) == H2


@st.composite
def equivalence_moves(draw):
    name = draw(st.sampled_from(["BH(18,14)-paper", "BH(34,10)-table1"]))
    M = FIX[name]
    moves = []
    for _ in range(draw(st.integers(1, 5))):
        kind = draw(st.sampled_from(["rows", "cols", "scol", "srow", "power"]))
        if kind in ("rows", "cols"):
            moves.append((kind, draw(st.permutations(range(M.n)))))
        elif kind in ("scol", "srow"):
            moves.append((kind, (draw(st.integers(0, M.n - 1)), draw(st.integers(0, M.q - 1)))))
        else:
            r = draw(st.sampled_from([r for r in range(1, M.q) if gcd(r, M.q) == 1]))
            moves.append((kind, r))
    return M, moves


@settings(max_examples=25, deadline=None)
@given(equivalence_moves())
def test_equivalence_closure(data):
    M, moves = data
    for kind, arg in moves:
        if kind == "rows":
            M = permute_rows(M, arg)
        elif kind == "cols":
            M = permute_columns(M, arg)
        elif kind == "scol":
            M = scale_column(M, *arg)
        elif kind == "srow":
            M = scale_row(M, *arg)
        else:
            M = global_power(M, arg)
    assert verify_bh(M).is_bh
    assert verify_bh(dephase(M)).is_bh


def test_parse_and_round_trip(tmp_path):
    text = "BH 2 2\n0 0\n0 1\n"
    assert parse(text) == H2
    assert serialize(parse(text)) == text
    P = paper_bh18_14()
    assert parse(serialize(P)) == P
    path = tmp_path / "m.txt"
    write_matrix(P, path)
    assert read_matrix(path) == P
    assert path.read_bytes().count(b"\r") == 0


@pytest.mark.parametrize("text,line", [
    ("BH 2 2\n0 0\n0 2\n", 3),
    ("BH 2 2\n0  0\n0 1\n", 2),
    ("BH 2 2\n0 0\n", None),
    ("XX 2 2\n0 0\n0 1\n", 1),
    ("BH 2 2\n0 0 \n0 1\n", 2),
    ("BH 2 2\r\n0 0\r\n0 1\r\n", 1),
])
def test_parse_errors(text, line):
    with pytest.raises(MatrixFormatError) as err:
        parse(text)
    if line is not None:
        assert err.value.line == line
