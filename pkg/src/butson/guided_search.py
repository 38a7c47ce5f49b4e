"""Staged search for BH(18, 14) built from ORT+ rows.

Rows are exponent vectors over Z_14 split into a left and a right half of
nine entries.  The first row is all zeros, the second is the y = 0 template
and rows 3..9 permute the two halves of the y-templates separately, one y per
row.  Row 10 is fixed to [0^9, 7^9] and rows 11..18 are drawn from the
[a, a+7, b, b+2, ..., b+12] half families.

Orthogonality is decided exactly: every half inner product is reduced into
the power basis of Z[zeta_14] and packed into one integer, so equal keys mean
equal cyclotomic integers.  Candidate rows are produced by a join of left
halves against right halves on those keys.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from .cyclotomic import CyclotomicElement, abs_square_equals, from_exponents, reduction_matrix
from .matrices import LogMatrix, VerificationReport, paper_bh18_14, verify_bh
from .orbits import is_in_ort

__all__ = [
    "Q",
    "N",
    "HALF",
    "H1",
    "H2",
    "H10",
    "Z0",
    "OrtPlusRow",
    "SearchConfig",
    "StageCounts",
    "SearchResult",
    "PaperMatrixReport",
    "ort_plus",
    "half_inner_product",
    "passes_magnitude2",
    "staged_search",
    "complete",
    "verify_paper_matrix",
    "z0_plus_count",
]

Q = 14
N = 18
HALF = 9
EVENS = (0, 2, 4, 6, 8, 10, 12)
H1 = (0,) * N
H2 = (0, 7) + EVENS + (0, 7) + EVENS
H10 = (0,) * HALF + (7,) * HALF
Z0 = (7,) * N

# packed keys: 6 coordinates, each a sum of 9 entries in {-1, 0, 1}
_OFFSET = 16
_BASE = 32
_PHI = 6


@dataclass(frozen=True)
class OrtPlusRow:
    y: int
    template: tuple[int, ...]

    @property
    def left(self) -> tuple[int, ...]:
        return self.template[:HALF]

    @property
    def right(self) -> tuple[int, ...]:
        return self.template[HALF:]


def _template(y: int) -> tuple[int, ...]:
    return (0, 7) + EVENS + (y % Q, (y + 7) % Q) + EVENS


def _z0_power_is_plus_one(v: Sequence[int]) -> bool:
    # zeta^(7 * sum) = (-1)^sum
    return sum(v) % 2 == 0


def ort_plus(q: int = Q, n: int = N) -> list[OrtPlusRow]:
    if (q, n) != (Q, N):
        raise ValueError("ORT+ templates are defined for (n, q) = (18, 14) only")
    rows = []
    for y in range(7):
        t = _template(y)
        assert is_in_ort(t, Q), t
        assert _z0_power_is_plus_one(t), t
        rows.append(OrtPlusRow(y, t))
    return rows


def half_inner_product(uL: Sequence[int], vL: Sequence[int], q: int = Q) -> CyclotomicElement:
    if len(uL) != len(vL):
        raise ValueError("halves must have equal length")
    return from_exponents(q, [(u - v) % q for u, v in zip(uL, vL)])


def passes_magnitude2(uL: Sequence[int], vL: Sequence[int]) -> bool:
    return abs_square_equals(half_inner_product(uL, vL), 4)


def z0_plus_count(M: LogMatrix) -> int:
    """Ordered pairs (i, j), i = j included, with (h_i o conj h_j)^z0 = +1."""
    a = M.array
    sums = a.sum(axis=1)
    par = sums % 2
    even = int((par == 0).sum())
    odd = len(par) - even
    return even * even + odd * odd


# ---------------------------------------------------------------- pools


@lru_cache(maxsize=None)
def _index_perms() -> np.ndarray:
    return np.array(list(itertools.permutations(range(HALF))), dtype=np.int8)


@lru_cache(maxsize=32)
def _multiset_perms(multiset: tuple[int, ...]) -> np.ndarray:
    """All distinct arrangements, lexicographically sorted, read-only int8."""
    ms = np.array(multiset, dtype=np.int64)
    digits = 16 ** np.arange(HALF - 1, -1, -1, dtype=np.int64)
    codes = np.unique(ms[_index_perms()] @ digits)
    out = ((codes[:, None] // digits) % 16).astype(np.int8)
    out.setflags(write=False)
    return out


_RED_F = reduction_matrix(Q).astype(np.float64)


def _half_values(pool: np.ndarray, ref: Sequence[int]) -> np.ndarray:
    """Coordinates of sum_k zeta^(pool_k - ref_k) for every pool row."""
    d = (pool.astype(np.int64) - np.asarray(ref, dtype=np.int64)) % Q
    d += Q * np.arange(len(pool), dtype=np.int64)[:, None]
    counts = np.bincount(d.ravel(), minlength=Q * len(pool)).reshape(len(pool), Q)
    # float BLAS product is exact here: every entry is an integer below 2**53
    return np.rint(counts.astype(np.float64) @ _RED_F).astype(np.int64)


_WEIGHTS = _BASE ** np.arange(_PHI, dtype=np.int64)


def _pack(values: np.ndarray) -> np.ndarray:
    return ((values + _OFFSET) * _WEIGHTS).sum(axis=1)


_PACKED_ZERO = int(_OFFSET * _WEIGHTS.sum())


def _join(keyL: np.ndarray, keyR: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All (i, j) with keyL[i] == keyR[j], sorted by (i, j).

    Keys are 1-D int64 or 2-D int64 arrays with one column per relation.
    """
    if keyL.ndim == 2:
        if keyL.shape[1] == 1:
            keyL, keyR = keyL[:, 0], keyR[:, 0]
        else:
            both = np.concatenate([keyL, keyR])
            _, inv = np.unique(both, axis=0, return_inverse=True)
            inv = inv.reshape(-1)
            keyL, keyR = inv[: len(keyL)], inv[len(keyL):]
    order = np.argsort(keyR, kind="stable")
    sortedR = keyR[order]
    lo = np.searchsorted(sortedR, keyL, side="left")
    hi = np.searchsorted(sortedR, keyL, side="right")
    cnt = hi - lo
    total = int(cnt.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    li = np.repeat(np.arange(len(keyL)), cnt)
    starts = np.repeat(lo - np.cumsum(cnt) + cnt, cnt)
    ri = order[starts + np.arange(total)]
    return li, ri


def _join_count(keyL: np.ndarray, keyR: np.ndarray) -> int:
    if keyL.ndim == 2 and keyL.shape[1] > 1:
        both = np.concatenate([keyL, keyR])
        _, inv = np.unique(both, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        keyL, keyR = inv[: len(keyL)], inv[len(keyL):]
    elif keyL.ndim == 2:
        keyL, keyR = keyL[:, 0], keyR[:, 0]
    sortedR = np.sort(keyR)
    return int((np.searchsorted(sortedR, keyL, "right") - np.searchsorted(sortedR, keyL, "left")).sum())


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class SearchConfig:
    enforce_distinct_y: bool = True
    enforce_half_split: bool = True
    magnitude2_rows: tuple[tuple[int, int], ...] = ((3, 1), (4, 6))
    fixed_h10: bool = True
    y_order: tuple[int, ...] = (1, 6, 0, 2, 3, 4, 5)

    def validate(self) -> None:
        if len(self.y_order) != 7 or any(not 0 <= y <= 6 for y in self.y_order):
            raise ValueError("y_order must list seven values in 0..6")
        if self.enforce_distinct_y and sorted(self.y_order) != list(range(7)):
            raise ValueError("distinct y values requested but y_order repeats a value")
        if not self.enforce_half_split:
            raise ValueError("full-row permutations are outside the searchable space; keep enforce_half_split")
        for row, y in self.magnitude2_rows:
            if not 3 <= row <= 9:
                raise ValueError(f"magnitude-2 row {row} outside 3..9")

    def y_of(self, row: int) -> int:
        return self.y_order[row - 3]

    def needs_magnitude2(self, row: int) -> bool:
        return (row, self.y_of(row)) in self.magnitude2_rows


_STAGE_NAMES = ("triplets", "quadruples", "after_y0", "after_y2", "after_y3", "after_y4", "after_y5")


@dataclass
class StageCounts:
    """Exact counts per stage.  Field names follow the default y order;
    ``after_yK`` is the number of surviving cases after row 5, 6, ... ."""

    triplets: int = 0
    quadruples: int = 0
    after_y0: int = 0
    after_y2: int = 0
    after_y3: int = 0
    after_y4: int = 0
    after_y5: int = 0
    completions: int = 0
    truncated: bool = False

    def at_depth(self, depth: int) -> int:
        return getattr(self, _STAGE_NAMES[depth - 3])

    def _bump(self, depth: int, k: int = 1) -> None:
        name = _STAGE_NAMES[depth - 3]
        setattr(self, name, getattr(self, name) + k)

    def __str__(self) -> str:
        parts = [f"{name} {getattr(self, name)}" for name in _STAGE_NAMES]
        parts.append(f"completions {self.completions}")
        if self.truncated:
            parts.append("truncated")
        return "\n".join(parts)


@dataclass
class SearchResult:
    counts: StageCounts
    matrices: list[LogMatrix] = field(default_factory=list)


class _Stage:
    """Candidate pools for one row index, pre-joined against h2."""

    def __init__(self, config: SearchConfig, row: int):
        self.row = row
        self.y = config.y_of(row)
        L = _multiset_perms(tuple(sorted(_template(0)[:HALF])))
        Rm = _multiset_perms(tuple(sorted(_template(self.y)[HALF:])))
        vL = _half_values(L, H2[:HALF])
        vR = _half_values(Rm, H2[HALF:])
        kL, kRneg = _pack(vL), _pack(-vR)
        keepL = np.ones(len(L), dtype=bool)
        if config.needs_magnitude2(row):
            uniq, inv = np.unique(kL, return_inverse=True)
            good = np.array([_unpack_element(u).abs_square_equals(4) for u in uniq])
            keepL = good[inv.reshape(-1)]
        keepL &= np.isin(kL, kRneg)
        keepR = np.isin(kRneg, kL[keepL])
        self.L_idx = np.nonzero(keepL)[0]
        self.R_idx = np.nonzero(keepR)[0]
        self.L = L[self.L_idx]
        self.R = Rm[self.R_idx]
        self.key2L = kL[self.L_idx]
        self.key2R = kRneg[self.R_idx]
        self._cache: dict[tuple[str, tuple[int, ...]], np.ndarray] = {}

    def keys(self, side: str, ref: tuple[int, ...]) -> np.ndarray:
        k = (side, ref)
        got = self._cache.get(k)
        if got is None:
            if side == "L":
                got = _pack(_half_values(self.L, ref))
            else:
                got = _pack(-_half_values(self.R, ref))
            if len(self._cache) > 256:
                self._cache.clear()
            self._cache[k] = got
        return got

    def extend(self, prev: Sequence[tuple[int, ...]]) -> tuple[np.ndarray, np.ndarray]:
        """Indices into self.L / self.R of rows orthogonal to h2 and to prev."""
        colsL = [self.key2L] + [self.keys("L", r[:HALF]) for r in prev]
        colsR = [self.key2R] + [self.keys("R", r[HALF:]) for r in prev]
        return _join(np.stack(colsL, axis=1), np.stack(colsR, axis=1))

    def count(self, prev: Sequence[tuple[int, ...]]) -> int:
        colsL = [self.key2L] + [self.keys("L", r[:HALF]) for r in prev]
        colsR = [self.key2R] + [self.keys("R", r[HALF:]) for r in prev]
        return _join_count(np.stack(colsL, axis=1), np.stack(colsR, axis=1))

    def row_tuple(self, i: int, j: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.L[i]) + tuple(int(v) for v in self.R[j])


def _unpack_element(key: int) -> CyclotomicElement:
    coeffs = []
    for _ in range(_PHI):
        coeffs.append(key % _BASE - _OFFSET)
        key //= _BASE
    return CyclotomicElement(Q, tuple(coeffs))


# ---------------------------------------------------------------- completion


@lru_cache(maxsize=1)
def _completion_pools() -> tuple[np.ndarray, list[np.ndarray]]:
    """Left halves (first entry 0) and right halves of the [a, a+7, b, ...] families."""
    lefts, rights = [], []
    for a in range(7):
        for b in range(2):
            ms = tuple(sorted([a, a + 7] + [b + 2 * k for k in range(7)]))
            perms = _multiset_perms(ms)
            rights.append(perms)
            lefts.append(perms[perms[:, 0] == 0])
    left = np.unique(np.concatenate(lefts), axis=0)
    return left, rights


def _orthogonal_to_all(rows: np.ndarray, refs: Sequence[tuple[int, ...]]) -> np.ndarray:
    ok = np.ones(len(rows), dtype=bool)
    for r in refs:
        ok &= _pack(_half_values(rows, r)) == _PACKED_ZERO
    return ok


def _candidate_rows(rows10: Sequence[tuple[int, ...]]) -> np.ndarray:
    left, rights = _completion_pools()
    keyL = np.stack([_pack(_half_values(left, r[:HALF])) for r in rows10], axis=1)
    table: dict[bytes, list[int]] = {}
    for i, k in enumerate(np.ascontiguousarray(keyL).view(f"V{8 * keyL.shape[1]}").reshape(-1).tolist()):
        table.setdefault(bytes(k), []).append(i)
    out = []
    for R in rights:
        # cheap necessary filter one relation at a time, then the exact join
        for j, r in enumerate(rows10):
            R = R[np.isin(_pack(-_half_values(R, r[HALF:])), keyL[:, j])]
            if not len(R):
                break
        if not len(R):
            continue
        keyR = np.stack([_pack(-_half_values(R, r[HALF:])) for r in rows10], axis=1)
        flat = np.ascontiguousarray(keyR).view(f"V{8 * keyR.shape[1]}").reshape(-1).tolist()
        for j, k in enumerate(flat):
            hit = table.get(bytes(k))
            if hit:
                for i in hit:
                    out.append(np.concatenate([left[i], R[j]]))
    if not out:
        return np.empty((0, N), dtype=np.int8)
    cand = np.unique(np.array(out, dtype=np.int8), axis=0)
    # exact re-check against every fixed row
    assert _orthogonal_to_all(cand, rows10).all()
    return cand


def _adjacency(cand: np.ndarray) -> list[int]:
    adj = []
    for i in range(len(cand)):
        ok = _orthogonal_to_all(cand, [tuple(int(v) for v in cand[i])])
        ok[i] = False
        adj.append(sum(1 << int(j) for j in np.nonzero(ok)[0]))
    return adj


def _clique(adj: list[int], size: int) -> list[int] | None:
    def rec(chosen: list[int], allowed: int) -> list[int] | None:
        if len(chosen) == size:
            return chosen
        if bin(allowed).count("1") < size - len(chosen):
            return None
        while allowed:
            low = allowed & -allowed
            v = low.bit_length() - 1
            allowed ^= low
            got = rec(chosen + [v], allowed & adj[v])
            if got is not None:
                return got
        return None

    return rec([], (1 << len(adj)) - 1)


def complete(rows10: Sequence[Sequence[int]]) -> LogMatrix | None:
    """Extend h1..h10 by eight mutually orthogonal family rows, if possible.

    Rows are normalised to start with 0 (a row may be scaled freely).  The
    first clique in candidate order is returned, so the result is
    deterministic.
    """
    rows10 = [tuple(int(v) % Q for v in r) for r in rows10]
    if len(rows10) != 10 or any(len(r) != N for r in rows10):
        raise ValueError("completion expects ten rows of length 18")
    cand = _candidate_rows(rows10)
    if len(cand) < N - 10:
        return None
    pick = _clique(_adjacency(cand), N - 10)
    if pick is None:
        return None
    M = LogMatrix.from_array(np.array(rows10 + [tuple(int(v) for v in cand[i]) for i in pick]), Q)
    if not verify_bh(M):
        raise AssertionError("completion failed exact verification")
    return M


# ---------------------------------------------------------------- search


class _Searcher:
    def __init__(self, config: SearchConfig):
        config.validate()
        self.config = config
        self._stages: dict[int, _Stage] = {}

    def stage(self, row: int) -> _Stage:
        if row not in self._stages:
            self._stages[row] = _Stage(config=self.config, row=row)
        return self._stages[row]

    def first_rows(self) -> list[tuple[int, ...]]:
        st = self.stage(3)
        li, ri = st.extend([])
        return [st.row_tuple(i, j) for i, j in zip(li.tolist(), ri.tolist())]


def staged_search(config: SearchConfig | None = None, stage_limit: int = 3,
                  shard: tuple[int, int] = (0, 1), max_nodes: int | None = None,
                  collect: bool = False, seed_rows: Sequence[Sequence[int]] = (),
                  progress: Callable[[str], None] | None = None) -> SearchResult:
    """Run the pipeline up to ``stage_limit`` rows (3..9), or 10 for completion.

    ``shard = (i, m)`` keeps the h3 candidates whose canonical index is i mod m.
    ``seed_rows`` pins rows 3, 4, ... to given vectors (each must be a
    candidate of its stage).  ``max_nodes`` caps the number of partial cases
    materialised beyond depth 3; hitting it returns partial counts with
    ``truncated`` set.  With ``collect`` the completed matrices are returned.
    """
    config = config or SearchConfig()
    if not 3 <= stage_limit <= 10:
        raise ValueError("stage_limit must be in 3..10")
    if stage_limit == 10 and not config.fixed_h10:
        raise ValueError("completion without the fixed h10 row is not supported")
    idx, mod = shard
    if mod < 1 or not 0 <= idx < mod:
        raise ValueError("shard must be (i, m) with 0 <= i < m")
    S = _Searcher(config)
    seeds = [tuple(int(v) % Q for v in r) for r in seed_rows]
    counts = StageCounts()
    result = SearchResult(counts)
    last = min(stage_limit, 9)

    h3s = S.first_rows()
    if seeds:
        if seeds[0] not in h3s:
            raise ValueError("seed row 3 is not a stage-3 candidate")
        h3s = [seeds[0]]
    h3s = [r for k, r in enumerate(h3s) if k % mod == idx]
    counts.triplets = len(h3s)
    if last == 3:
        return result

    nodes = 0

    def dfs(prev: list[tuple[int, ...]]) -> bool:
        nonlocal nodes
        row = 3 + len(prev)
        st = S.stage(row)
        if row == last and len(seeds) <= len(prev):
            k = st.count(prev)
            counts._bump(row, k)
            nodes += k
            return max_nodes is None or nodes <= max_nodes
        li, ri = st.extend(prev)
        nxt = [st.row_tuple(i, j) for i, j in zip(li.tolist(), ri.tolist())]
        if len(seeds) > len(prev):
            if seeds[len(prev)] not in nxt:
                return True
            nxt = [seeds[len(prev)]]
        for r in nxt:
            counts._bump(row)
            nodes += 1
            if max_nodes is not None and nodes > max_nodes:
                return False
            rows = prev + [r]
            if row < last:
                if not dfs(rows):
                    return False
            elif stage_limit == 10:
                M = complete([H1, H2] + rows + [H10])
                if M is not None:
                    counts.completions += 1
                    if collect:
                        result.matrices.append(M)
        return True

    for k, h3 in enumerate(h3s):
        if not dfs([h3]):
            counts.truncated = True
            break
        if progress and (k + 1) % 1000 == 0:
            progress(f"h3 {k + 1}/{len(h3s)} {_STAGE_NAMES[last - 3]} {counts.at_depth(last)}")
    return result


def iter_h3() -> Iterator[tuple[int, ...]]:
    yield from _Searcher(SearchConfig()).first_rows()


# ---------------------------------------------------------------- paper matrix


@dataclass(frozen=True)
class PaperMatrixReport:
    verification: VerificationReport
    issues: tuple[tuple[int, str], ...]

    @property
    def ok(self) -> bool:
        return self.verification.is_bh and not self.issues

    @property
    def is_bh(self) -> bool:
        return self.verification.is_bh


def _is_circulant(block: np.ndarray) -> bool:
    return all(np.array_equal(block[i], np.roll(block[0], i)) for i in range(len(block)))


def verify_paper_matrix(M: LogMatrix | None = None) -> PaperMatrixReport:
    """Check the displayed BH(18, 14) and its structural claims.

    Issues are reported with 1-based row indices.
    """
    M = M or paper_bh18_14()
    a = M.array
    issues: list[tuple[int, str]] = []
    for idx, want in ((1, H1), (2, H2), (10, H10)):
        if tuple(a[idx - 1].tolist()) != want:
            issues.append((idx, "row differs from the fixed row"))
    cfg = SearchConfig()
    for row in range(3, 10):
        r = a[row - 1]
        y = cfg.y_of(row)
        t = _template(y)
        if sorted(r[:HALF].tolist()) != sorted(t[:HALF]):
            issues.append((row, "left half is not a permutation of the template half"))
        if sorted(r[HALF:].tolist()) != sorted(t[HALF:]):
            issues.append((row, f"right half is not a permutation of the y={y} template half"))
        if cfg.needs_magnitude2(row) and not passes_magnitude2(tuple(r[:HALF]), H2[:HALF]):
            issues.append((row, "half inner product with h2 does not have magnitude 2"))
    for row in range(11, N + 1):
        r = a[row - 1]
        for half in (r[:HALF], r[HALF:]):
            if not _in_completion_family(half):
                issues.append((row, "half is outside the [a, a+7, b, ..., b+12] family"))
                break
    if not _is_circulant(a[11:18, 2:9]):
        issues.append((12, "rows 12-18, columns 3-9 are not circulant"))
    if not _is_circulant(a[11:18, 11:18]):
        issues.append((12, "rows 12-18, columns 12-18 are not circulant"))
    return PaperMatrixReport(verify_bh(M), tuple(issues))


def _in_completion_family(half: np.ndarray) -> bool:
    h = sorted(int(v) for v in half)
    for a in range(7):
        for b in range(2):
            if h == sorted([a, a + 7] + [b + 2 * k for k in range(7)]):
                return True
    return False
