"""2-circulant BH(2p, q) matrices from simple vectors of index k.

A simple vector of index k over Z_p is constant on the cosets of the
index-k subgroup G_0 of Z_p^* (the k-th power residues): ``x_0 = 1`` and
``x_i = zeta_q^(c_l)`` for ``i`` in ``G_l = g^l G_0``.  Two such vectors with
complementary periodic autocorrelations give circulant X, Y with
``XX* + YY* = 2p I`` and hence the Hadamard matrix ``[[X, Y], [Y*, -X*]]``.

Because ``gamma_s`` only depends on the coset of ``s``, the autocorrelation
is stored per coset and assembled from a table of coset pair counts.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .cyclotomic import (
    CyclotomicElement,
    from_counts,
    reduction_matrix,
)
from .matrices import LogMatrix, verify_bh

log = logging.getLogger(__name__)

__all__ = [
    "CosetSystem",
    "PairCounts",
    "AutocorrelationVector",
    "ComplementaryPair",
    "Table1Row",
    "TABLE1",
    "NotComplementaryError",
    "SearchBudgetExceeded",
    "build_cosets",
    "pair_counts",
    "expand_simple_vector",
    "autocorrelation",
    "gamma_batch",
    "row_sum_value",
    "row_sum_bucket",
    "complement_bucket",
    "is_complementary",
    "search_complementary",
    "assemble_2circulant",
    "gram_identity_holds",
    "build_table1_matrix",
    "format_pair",
    "parse_pair",
]


class NotComplementaryError(ValueError):
    pass


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int):
        self.size = size
        self.budget = budget
        super().__init__(f"search space has {size} candidates, budget is {budget}")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _prime_factors(n: int) -> list[int]:
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def is_primitive_root(g: int, p: int) -> bool:
    if g % p == 0:
        return False
    return all(pow(g, (p - 1) // r, p) != 1 for r in _prime_factors(p - 1))


@dataclass(frozen=True)
class CosetSystem:
    p: int
    k: int
    g: int
    cosets: tuple[tuple[int, ...], ...]
    coset_of: tuple[int, ...]  # index 0 holds -1

    @property
    def neg_one_coset(self) -> int:
        return self.coset_of[self.p - 1]

    @property
    def coset_size(self) -> int:
        return (self.p - 1) // self.k


def build_cosets(p: int, k: int, g: int) -> CosetSystem:
    if p < 3 or not is_prime(p):
        raise ValueError(f"p={p} is not an odd prime")
    if k < 1 or (p - 1) % k:
        raise ValueError(f"k={k} does not divide p-1={p - 1}")
    if not is_primitive_root(g, p):
        raise ValueError(f"g={g} is not a primitive root mod {p}")
    coset_of = [-1] * p
    x = 1
    for e in range(p - 1):
        coset_of[x] = e % k
        x = x * g % p
    cosets = tuple(
        tuple(sorted(i for i in range(1, p) if coset_of[i] == ell)) for ell in range(k)
    )
    return CosetSystem(p, k, g, cosets, tuple(coset_of))


@dataclass(frozen=True)
class PairCounts:
    """Coset pair counts for the shifts s in each coset G_t.

    ``inner[l, m, t] = |{i in G_l : i + s in G_m}|`` for s in G_t.  The two
    boundary positions are ``i = 0`` (term ``x_0 conj(x_s)``, coset ``t``) and
    ``i = -s`` (term ``x_{-s} conj(x_0)``, coset ``minus[t]``).
    """

    system: CosetSystem
    inner: np.ndarray  # (k, k, k) int64
    minus: tuple[int, ...]

    def total(self, t: int) -> int:
        return int(self.inner[:, :, t].sum()) + 2


def pair_counts(cs: CosetSystem) -> PairCounts:
    p, k = cs.p, cs.k
    inner = np.zeros((k, k, k), dtype=np.int64)
    seen = [False] * k
    for s in range(1, p):
        t = cs.coset_of[s]
        tab = np.zeros((k, k), dtype=np.int64)
        for i in range(1, p):
            j = (i + s) % p
            if j:
                tab[cs.coset_of[i], cs.coset_of[j]] += 1
        if seen[t]:
            if not np.array_equal(tab, inner[:, :, t]):
                raise AssertionError("pair counts are not constant on a coset")
        else:
            inner[:, :, t] = tab
            seen[t] = True
    inner.setflags(write=False)
    minus = tuple((t + cs.neg_one_coset) % k for t in range(k))
    return PairCounts(cs, inner, minus)


def expand_simple_vector(c: Sequence[int], cs: CosetSystem, q: int | None = None) -> list[int]:
    """Exponents of x: x_0 = 0 and x_i = c[coset(i)]."""
    if len(c) != cs.k:
        raise ValueError(f"expected {cs.k} coset exponents, got {len(c)}")
    c = [int(v) % q if q else int(v) for v in c]
    return [0] + [c[cs.coset_of[i]] for i in range(1, cs.p)]


@dataclass(frozen=True)
class AutocorrelationVector:
    """gamma_s for s = 1..p-1, stored as one value per coset of s."""

    system: CosetSystem
    q: int
    per_coset: tuple[CyclotomicElement, ...]

    def gamma(self, s: int) -> CyclotomicElement:
        s %= self.system.p
        if s == 0:
            raise ValueError("gamma_0 is not part of the autocorrelation vector")
        return self.per_coset[self.system.coset_of[s]]

    def full(self) -> list[CyclotomicElement]:
        return [self.gamma(s) for s in range(1, self.system.p)]

    def key(self) -> tuple[int, ...]:
        return tuple(v for g in self.per_coset for v in g.coeffs)

    def __add__(self, other: AutocorrelationVector) -> AutocorrelationVector:
        return AutocorrelationVector(
            self.system, self.q, tuple(a + b for a, b in zip(self.per_coset, other.per_coset))
        )

    def is_zero(self) -> bool:
        return all(g.is_zero() for g in self.per_coset)


def autocorrelation(
    c: Sequence[int], cs: CosetSystem, q: int, counts: PairCounts | None = None
) -> AutocorrelationVector:
    counts = counts or pair_counts(cs)
    k = cs.k
    c = [int(v) % q for v in c]
    if len(c) != k:
        raise ValueError(f"expected {k} coset exponents, got {len(c)}")
    out = []
    for t in range(k):
        tally = [0] * q
        for ell in range(k):
            for m in range(k):
                nlm = int(counts.inner[ell, m, t])
                if nlm:
                    tally[(c[ell] - c[m]) % q] += nlm
        tally[(-c[t]) % q] += 1
        tally[c[counts.minus[t]]] += 1
        out.append(from_counts(q, tally))
    return AutocorrelationVector(cs, q, tuple(out))


def gamma_batch(C: np.ndarray, counts: PairCounts, q: int) -> np.ndarray:
    """Per-coset autocorrelations for many candidates at once.

    ``C`` has shape (N, k); the result has shape (N, k, phi(q)) and holds the
    reduced coordinates of gamma for one representative shift per coset.
    """
    C = np.asarray(C, dtype=np.int64)
    R = reduction_matrix(q)
    N, k = C.shape
    out = np.zeros((N, k, R.shape[1]), dtype=np.int64)
    for ell in range(k):
        for m in range(k):
            w = counts.inner[ell, m, :]
            if not w.any():
                continue
            rd = R[(C[:, ell] - C[:, m]) % q]  # (N, phi)
            out += rd[:, None, :] * w[None, :, None]
    for t in range(k):
        out[:, t, :] += R[(-C[:, t]) % q]
        out[:, t, :] += R[C[:, counts.minus[t]] % q]
    return out


def row_sum_value(c: Sequence[int], cs: CosetSystem, q: int) -> CyclotomicElement:
    """k * sum(x) = k + (p-1) * sum_l zeta^(c_l)."""
    tally = [0] * q
    tally[0] += cs.k
    for v in c:
        tally[int(v) % q] += cs.p - 1
    return from_counts(q, tally)


def row_sum_bucket(c: Sequence[int], cs: CosetSystem, q: int) -> tuple[int, ...]:
    """Reduced coordinates of |k + (p-1) sum_l zeta^(c_l)|^2, used as a hash bucket."""
    return row_sum_value(c, cs, q).abs_square().coeffs


def complement_bucket(bucket: tuple[int, ...], cs: CosetSystem, q: int) -> tuple[int, ...]:
    """Bucket a complementary partner must fall in: 2 k^2 p - |v(a)|^2."""
    target = CyclotomicElement.from_int(q, 2 * cs.k * cs.k * cs.p) - CyclotomicElement(q, bucket)
    return target.coeffs


def _bucket_batch(C: np.ndarray, cs: CosetSystem, q: int) -> np.ndarray:
    N = C.shape[0]
    V = np.zeros((N, q), dtype=np.int64)
    V[:, 0] = cs.k
    for ell in range(C.shape[1]):
        np.add.at(V, (np.arange(N), C[:, ell] % q), cs.p - 1)
    # |v|^2 as exponent counts: circular autocorrelation of V
    A = np.empty_like(V)
    for d in range(q):
        A[:, d] = (V * np.roll(V, d, axis=1)).sum(axis=1)
    return A @ reduction_matrix(q)


@dataclass(frozen=True)
class ComplementaryPair:
    a: tuple[int, ...]
    b: tuple[int, ...]
    provenance: Literal["searched", "table"] = "searched"

    def unordered(self) -> frozenset:
        return frozenset((self.a, self.b))


def is_complementary(a: Sequence[int], b: Sequence[int], cs: CosetSystem, q: int,
                     counts: PairCounts | None = None) -> bool:
    """Exact check of both pair invariants: Gamma(a) + Gamma(b) = 0 and the row-sum condition."""
    counts = counts or pair_counts(cs)
    if not (autocorrelation(a, cs, q, counts) + autocorrelation(b, cs, q, counts)).is_zero():
        return False
    total = row_sum_value(a, cs, q).abs_square() + row_sum_value(b, cs, q).abs_square()
    return (total - 2 * cs.k * cs.k * cs.p).is_zero()


def _candidates(q: int, k: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, k), dtype=np.int64)
    for pos in range(k - 1, -1, -1):
        out[:, pos] = idx % q
        idx //= q
    return out


def _keys(C: np.ndarray, counts: PairCounts, q: int, use_buckets: bool):
    cs = counts.system
    G = gamma_batch(C, counts, q).reshape(C.shape[0], -1)
    if use_buckets:
        B = _bucket_batch(C, cs, q)
        target = -B
        target[:, 0] += 2 * cs.k * cs.k * cs.p
        own = np.concatenate([B, G], axis=1)
        want = np.concatenate([target, -G], axis=1)
    else:
        own, want = G, -G
    own = np.ascontiguousarray(own, dtype=np.int64)
    want = np.ascontiguousarray(want, dtype=np.int64)
    width = own.shape[1] * 8
    return own.view(f"S{width}").ravel().tolist(), want.view(f"S{width}").ravel().tolist()


def search_complementary(
    p: int,
    k: int,
    g: int,
    q: int,
    budget: int = 10**7,
    use_buckets: bool = True,
    chunk: int = 1 << 16,
) -> list[ComplementaryPair]:
    """Exhaustive scan of Z_q^k for complementary pairs.

    Candidates are visited in lexicographic order; each one is stored in a
    hash table (keyed by its row-sum bucket and its per-coset Gamma) and then
    looked up by the key its complement would need.  Each unordered pair is
    reported once as ``(min, max)``; every reported pair is re-verified with
    the scalar exact path.  Output is sorted.
    """
    cs = build_cosets(p, k, g)
    size = q**k
    if size > budget:
        raise SearchBudgetExceeded(size, budget)
    counts = pair_counts(cs)
    table: dict[bytes, list[int]] = {}
    found: list[tuple[int, int]] = []
    for start in range(0, size, chunk):
        stop = min(size, start + chunk)
        C = _candidates(q, k, start, stop)
        own, want = _keys(C, counts, q, use_buckets)
        for off, (ko, kw) in enumerate(zip(own, want)):
            idx = start + off
            table.setdefault(ko, []).append(idx)
            hits = table.get(kw)
            if hits:
                found.extend((b, idx) for b in hits)
        log.debug("scanned %d/%d candidates, %d pairs", stop, size, len(found))
    pairs = []
    for b_idx, a_idx in found:
        b = tuple(_candidates(q, k, b_idx, b_idx + 1)[0].tolist())
        a = tuple(_candidates(q, k, a_idx, a_idx + 1)[0].tolist())
        if not is_complementary(a, b, cs, q, counts):
            raise AssertionError(f"hash join produced a false pair {a}, {b}")
        lo, hi = sorted((a, b))
        pairs.append(ComplementaryPair(lo, hi, "searched"))
    pairs.sort(key=lambda pr: (pr.a, pr.b))
    return pairs


def _circulant(first_row: Sequence[int]) -> np.ndarray:
    x = np.asarray(first_row, dtype=np.int64)
    p = x.size
    idx = (np.arange(p)[None, :] - np.arange(p)[:, None]) % p
    return x[idx]


def gram_identity_holds(a: Sequence[int], b: Sequence[int], cs: CosetSystem, q: int) -> bool:
    """Exact check of XX* + YY* = 2p I for the circulants built from a and b."""
    p = cs.p
    X = _circulant(expand_simple_vector(a, cs, q))
    Y = _circulant(expand_simple_vector(b, cs, q))
    R = reduction_matrix(q)
    for i in range(p):
        # entry (i, j) = sum_l x[i,l] conj(x[j,l]) + same for y
        dx = (X[i][None, :] - X) % q
        dy = (Y[i][None, :] - Y) % q
        tally = np.zeros((p, q), dtype=np.int64)
        rows = np.repeat(np.arange(p), p)
        np.add.at(tally, (rows, dx.ravel()), 1)
        np.add.at(tally, (rows, dy.ravel()), 1)
        red = tally @ R
        expect = np.zeros_like(red)
        expect[i, 0] = 2 * p
        if not np.array_equal(red, expect):
            return False
    return True


def assemble_2circulant(pair: ComplementaryPair, cs: CosetSystem, q: int,
                        check: bool = True) -> LogMatrix:
    """Build ``[[X, Y], [Y*, -X*]]`` in logarithmic form and verify it."""
    if q % 2:
        raise ValueError(
            f"q={q} is odd: -1 is not a q-th root of unity, so the block -X* "
            "cannot be formed; the 2-circulant construction needs q even"
        )
    if not is_complementary(pair.a, pair.b, cs, q):
        raise NotComplementaryError("Gamma(a) + Gamma(b) != 0: not a complementary pair")
    X = _circulant(expand_simple_vector(pair.a, cs, q))
    Y = _circulant(expand_simple_vector(pair.b, cs, q))
    H = np.block([[X, Y], [(-Y.T) % q, (q // 2 - X.T) % q]])
    M = LogMatrix.from_array(H, q)
    if check:
        rep = verify_bh(M)
        if not rep.is_bh:
            raise AssertionError(f"assembled matrix fails verification at rows {rep.failing_pair}")
    return M


@dataclass(frozen=True)
class Table1Row:
    n: int
    q: int
    p: int
    k: int
    g: int
    G0: tuple[int, ...]
    a: tuple[int, ...]
    b: tuple[int, ...]


TABLE1: tuple[Table1Row, ...] = (
    Table1Row(34, 10, 17, 4, 3, (1, 4, 13, 16), (8, 2, 6, 4), (9, 3, 7, 1)),
    Table1Row(62, 6, 31, 6, 3, (1, 2, 4, 8, 16), (0, 2, 2, 4, 5, 1), (0, 2, 5, 2, 5, 2)),
    Table1Row(82, 6, 41, 8, 6, (1, 10, 16, 18, 37), (5, 4, 1, 2, 5, 4, 1, 2), (3, 3, 0, 3, 3, 0, 0, 3)),
    Table1Row(146, 6, 73, 8, 5, (1, 2, 4, 8, 16, 32, 37, 55, 64),
              (3, 5, 1, 3, 5, 3, 5, 1), (5, 3, 5, 1, 3, 5, 1, 3)),
)


def build_table1_matrix(row: Table1Row) -> LogMatrix:
    cs = build_cosets(row.p, row.k, row.g)
    if cs.cosets[0] != row.G0:
        raise AssertionError(f"G_0 mismatch for p={row.p}: {cs.cosets[0]} vs {row.G0}")
    return assemble_2circulant(ComplementaryPair(row.a, row.b, "table"), cs, row.q)


def format_pair(pair: ComplementaryPair, cs: CosetSystem, q: int) -> str:
    a = " ".join(map(str, pair.a))
    b = " ".join(map(str, pair.b))
    return f"{cs.p} {cs.k} {cs.g} {q} | a: {a} | b: {b}"


def parse_pair(line: str) -> tuple[int, int, int, int, ComplementaryPair]:
    try:
        head, a_part, b_part = (s.strip() for s in line.strip().split("|"))
        p, k, g, q = (int(v) for v in head.split())
        if not a_part.startswith("a:") or not b_part.startswith("b:"):
            raise ValueError
        a = tuple(int(v) for v in a_part[2:].split())
        b = tuple(int(v) for v in b_part[2:].split())
    except ValueError:
        raise ValueError(f"malformed pair line: {line!r}") from None
    if len(a) != k or len(b) != k:
        raise ValueError(f"pair vectors must have length k={k}")
    return p, k, g, q, ComplementaryPair(a, b, "searched")
