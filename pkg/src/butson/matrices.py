"""Butson Hadamard candidates in logarithmic form.

A :class:`LogMatrix` stores exponents: entry ``e`` at (i, k) stands for
``zeta_q^e``.  Row orthogonality is decided exactly by reducing the
exponent-difference counts of every row pair modulo Phi_q.

Text format (LF newlines, single spaces, no trailing whitespace)::

    BH n q
    e_11 e_12 ... e_1n
    ...
    e_n1 e_n2 ... e_nn
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from math import gcd
from typing import Sequence

import numpy as np

from .cyclotomic import reduction_matrix

__all__ = [
    "LogMatrix",
    "VerificationReport",
    "MatrixFormatError",
    "verify_bh",
    "dephase",
    "permute_rows",
    "permute_columns",
    "scale_row",
    "scale_column",
    "global_power",
    "parse",
    "serialize",
    "read_matrix",
    "write_matrix",
    "fixtures",
    "paper_bh18_14",
]


class MatrixFormatError(ValueError):
    """Raised for malformed matrix text; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class LogMatrix:
    n: int
    q: int
    entries: tuple[tuple[int, ...], ...]
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be positive, got {self.q}")
        rows = tuple(tuple(int(e) for e in row) for row in self.entries)
        if len(rows) != self.n or any(len(r) != self.n for r in rows):
            raise ValueError(f"entries must form a {self.n}x{self.n} array")
        for i, row in enumerate(rows):
            for k, e in enumerate(row):
                if not 0 <= e < self.q:
                    raise ValueError(f"entry ({i}, {k}) = {e} outside 0..{self.q - 1}")
        arr = np.array(rows, dtype=np.int64).reshape(self.n, self.n)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "_array", arr)

    @classmethod
    def from_array(cls, arr, q: int) -> LogMatrix:
        arr = np.asarray(arr, dtype=np.int64) % q
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square array, got shape {arr.shape}")
        return cls(arr.shape[0], q, tuple(map(tuple, arr.tolist())))

    @property
    def array(self) -> np.ndarray:
        """Read-only int64 view of the exponents."""
        return self._array

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def __str__(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class VerificationReport:
    is_bh: bool
    failing_pair: tuple[int, int] | None
    checked_pairs: int
    failures: tuple[tuple[int, int], ...] = ()

    def __bool__(self) -> bool:
        return self.is_bh


def _pair_sums(arr: np.ndarray, q: int, i: int) -> np.ndarray:
    """Reduced coordinates of <row_i, row_j> for all j > i, shape (n-i-1, phi)."""
    others = arr[i + 1:]
    diffs = (arr[i][None, :] - others) % q
    m = diffs.shape[0]
    flat = (np.arange(m)[:, None] * q + diffs).ravel()
    counts = np.bincount(flat, minlength=m * q).reshape(m, q)
    return counts @ reduction_matrix(q)


def verify_bh(M: LogMatrix, exhaustive: bool = False) -> VerificationReport:
    """Exact row-orthogonality check.

    The default stops at the first non-orthogonal pair (in lexicographic
    order).  With ``exhaustive=True`` all pairs are checked and every failing
    pair is listed in ``failures``.
    """
    arr, q, n = M.array, M.q, M.n
    checked = 0
    failures: list[tuple[int, int]] = []
    for i in range(n - 1):
        sums = _pair_sums(arr, q, i)
        bad = np.flatnonzero(np.any(sums != 0, axis=1))
        if bad.size and not exhaustive:
            j = i + 1 + int(bad[0])
            return VerificationReport(False, (i, j), checked + int(bad[0]) + 1, ((i, j),))
        failures.extend((i, i + 1 + int(b)) for b in bad)
        checked += sums.shape[0]
    first = failures[0] if failures else None
    return VerificationReport(not failures, first, checked, tuple(failures))


# equivalence operations


def dephase(M: LogMatrix) -> LogMatrix:
    """Scale columns then rows so the first row and first column are all 0."""
    a = M.array - M.array[0][None, :]
    a = a - a[:, :1]
    return LogMatrix.from_array(a, M.q)


def permute_rows(M: LogMatrix, perm: Sequence[int]) -> LogMatrix:
    perm = list(perm)
    if sorted(perm) != list(range(M.n)):
        raise ValueError("not a permutation of the rows")
    return LogMatrix.from_array(M.array[perm], M.q)


def permute_columns(M: LogMatrix, perm: Sequence[int]) -> LogMatrix:
    perm = list(perm)
    if sorted(perm) != list(range(M.n)):
        raise ValueError("not a permutation of the columns")
    return LogMatrix.from_array(M.array[:, perm], M.q)


def scale_column(M: LogMatrix, k: int, e: int) -> LogMatrix:
    """Multiply column k by zeta^e."""
    if not 0 <= e < M.q:
        raise ValueError(f"exponent {e} out of range")
    a = M.array.copy()
    a[:, k] += e
    return LogMatrix.from_array(a, M.q)


def scale_row(M: LogMatrix, i: int, e: int) -> LogMatrix:
    """Multiply row i by zeta^e."""
    if not 0 <= e < M.q:
        raise ValueError(f"exponent {e} out of range")
    a = M.array.copy()
    a[i, :] += e
    return LogMatrix.from_array(a, M.q)


def global_power(M: LogMatrix, r: int) -> LogMatrix:
    """Raise every entry to the power r (Galois action); r must be coprime to q."""
    if gcd(r, M.q) != 1:
        raise ValueError(f"r={r} is not coprime to q={M.q}")
    return LogMatrix.from_array(M.array * r, M.q)


# text format


def serialize(M: LogMatrix) -> str:
    lines = [f"BH {M.n} {M.q}"]
    lines.extend(" ".join(str(e) for e in row) for row in M.entries)
    return "\n".join(lines) + "\n"


def _parse_ints(line: str, lineno: int) -> list[int]:
    if line != line.strip() or "  " in line or "\t" in line:
        raise MatrixFormatError("fields must be separated by single spaces", lineno)
    toks = line.split(" ")
    if not all(tok.isascii() and tok.isdigit() for tok in toks):
        raise MatrixFormatError(f"non-integer field in {line!r}", lineno)
    return [int(tok) for tok in toks]


def parse(text: str) -> LogMatrix:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MatrixFormatError("empty input", 1)
    head = lines[0].split(" ")
    if len(head) != 3 or head[0] != "BH" or not all(t.isascii() and t.isdigit() for t in head[1:]):
        raise MatrixFormatError("header must read 'BH n q'", 1)
    n, q = int(head[1]), int(head[2])
    if n < 1 or q < 1:
        raise MatrixFormatError("n and q must be positive", 1)
    body = lines[1:]
    if len(body) != n:
        raise MatrixFormatError(f"expected {n} rows, found {len(body)}", len(lines))
    rows = []
    for idx, line in enumerate(body, start=2):
        row = _parse_ints(line, idx)
        if len(row) != n:
            raise MatrixFormatError(f"expected {n} entries, found {len(row)}", idx)
        for e in row:
            if not 0 <= e < q:
                raise MatrixFormatError(f"exponent {e} outside 0..{q - 1}", idx)
        rows.append(tuple(row))
    return LogMatrix(n, q, tuple(rows))


def read_matrix(path) -> LogMatrix:
    with open(path, encoding="ascii", newline="") as fh:
        return parse(fh.read())


def write_matrix(M: LogMatrix, path) -> None:
    from ._io import atomic_write

    atomic_write(path, serialize(M))


# fixtures


def paper_bh18_14() -> LogMatrix:
    """The BH(18, 14) matrix published with the guided search, as shipped."""
    text = resources.files("butson").joinpath("data/bh18_14_paper.txt").read_text("ascii")
    return parse(text)


def fixtures() -> dict[str, LogMatrix]:
    from .circulant import TABLE1, build_table1_matrix

    out = {"BH(18,14)-paper": paper_bh18_14()}
    for row in TABLE1:
        out[f"BH({row.n},{row.q})-table1"] = build_table1_matrix(row)
    return out
