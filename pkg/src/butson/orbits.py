"""Equivalence classes of Omega_q^n and of the zero-sum hyperplane in Z_q^n.

Vectors x in Omega_q^n are handled through their exponents.  A permutation
class is determined by the multiset of exponents, stored as a count vector
(``MultisetProfile``).  Scaling by zeta^s and the Galois map x -> x^r act on
profiles through the affine maps ``t -> r*(t + s)`` of Z_q, so the full
permutation-scale-group class of x is a union of permutation classes whose
profiles form one affine orbit.  The canonical representative of a class is
the lexicographically largest profile in that orbit.

ORT profiles are generated directly (never by scanning all of N^q) using the
structure of Z[zeta_q]:

* if p^2 | q, ``{zeta_q^i : 0 <= i < p}`` is a basis of Z[zeta_q] over
  Z[zeta_{q/p}], so a sum vanishes iff each residue class of exponents
  mod p vanishes on its own over q/p;
* if p || q, write the sum as ``sum_a zeta_p^a A_a`` with A_a in
  Z[zeta_{q/p}]; it vanishes iff all A_a are equal.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, gcd
from typing import Iterable, Sequence

import numpy as np

from .cyclotomic import from_exponents, reduction_matrix

__all__ = [
    "DEFAULT_CAP",
    "BoundsExceeded",
    "ExponentVector",
    "MultisetProfile",
    "OrbitClass",
    "ZClass",
    "units",
    "affine_maps",
    "canonical_perm",
    "canonical_psg",
    "psg_closure",
    "is_in_ort",
    "vanishing_profiles",
    "enumerate_ort_classes",
    "orbit_size_perm",
    "orbit_size_psg",
    "canonical_z",
    "enumerate_z_classes",
]

DEFAULT_CAP = 10**7


class BoundsExceeded(RuntimeError):
    """The requested enumeration exceeds the configured desk-scale cap."""


@dataclass(frozen=True)
class ExponentVector:
    q: int
    exps: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exps)
        if any(not 0 <= e < self.q for e in exps):
            raise ValueError(f"exponents must lie in 0..{self.q - 1}")
        object.__setattr__(self, "exps", exps)

    @property
    def n(self) -> int:
        return len(self.exps)


@dataclass(frozen=True, order=True)
class MultisetProfile:
    q: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != self.q or any(c < 0 for c in self.counts):
            raise ValueError("profile needs q nonnegative counts")

    @property
    def n(self) -> int:
        return sum(self.counts)

    def vector(self) -> tuple[int, ...]:
        """The nondecreasing exponent vector with this profile."""
        return tuple(t for t, c in enumerate(self.counts) for _ in range(c))


@dataclass(frozen=True)
class OrbitClass:
    rep: MultisetProfile
    perm_orbit_size: int
    psg_orbit_size: int
    in_ort: bool
    members: tuple[tuple[int, ...], ...]  # distinct profiles in the affine orbit

    @property
    def n(self) -> int:
        return self.rep.n

    @property
    def q(self) -> int:
        return self.rep.q


@dataclass(frozen=True)
class ZClass:
    rep: tuple[int, ...]
    class_size: int
    profile: tuple[int, ...]
    q: int


def _vec(x, q: int | None) -> ExponentVector:
    if isinstance(x, ExponentVector):
        return x
    if q is None:
        raise TypeError("q is required for plain exponent sequences")
    return ExponentVector(q, tuple(int(e) % q for e in x))


def units(q: int) -> list[int]:
    return [r for r in range(1, q + 1) if gcd(r, q) == 1 and r <= max(q - 1, 1)]


@lru_cache(maxsize=None)
def affine_maps(q: int) -> tuple[tuple[int, ...], ...]:
    """Pull-back index tuples: image profile is ``tuple(m[i] for i in idx)``.

    One entry per map ``t -> r*(t + s)`` with r a unit and s in Z_q.
    """
    out = []
    for r in units(q):
        rinv = pow(r, -1, q) if q > 1 else 0
        for s in range(q):
            # image[j] = m[f^{-1}(j)] with f^{-1}(j) = rinv*j - s
            out.append(tuple((rinv * j - s) % q for j in range(q)))
    return tuple(out)


@lru_cache(maxsize=None)
def _unit_maps(q: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for r in units(q):
        rinv = pow(r, -1, q) if q > 1 else 0
        out.append(tuple((rinv * j) % q for j in range(q)))
    return tuple(out)


def canonical_perm(x, q: int | None = None) -> MultisetProfile:
    v = _vec(x, q)
    counts = [0] * v.q
    for e in v.exps:
        counts[e] += 1
    return MultisetProfile(v.q, tuple(counts))


def psg_closure(counts: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Distinct profiles reachable by shifts and unit multipliers, sorted descending."""
    q = len(counts)
    images = {tuple(counts[i] for i in idx) for idx in affine_maps(q)}
    return tuple(sorted(images, reverse=True))


def canonical_psg(x, q: int | None = None) -> MultisetProfile:
    prof = x if isinstance(x, MultisetProfile) else canonical_perm(x, q)
    return MultisetProfile(prof.q, psg_closure(prof.counts)[0])


def is_in_ort(x, q: int | None = None) -> bool:
    v = _vec(x, q)
    return from_exponents(v.q, v.exps).is_zero()


def orbit_size_perm(profile) -> int:
    counts = profile.counts if isinstance(profile, MultisetProfile) else tuple(profile)
    out = factorial(sum(counts))
    for c in counts:
        out //= factorial(c)
    return out


def orbit_size_psg(rep) -> int:
    counts = rep.counts if isinstance(rep, MultisetProfile) else tuple(rep)
    return sum(orbit_size_perm(m) for m in psg_closure(counts))


# ORT profile generation


def _smallest_prime_factor(n: int) -> int:
    f = 2
    while f * f <= n:
        if n % f == 0:
            return f
        f += 1
    return n


def _prime_factors(n: int) -> list[int]:
    out = []
    while n > 1:
        p = _smallest_prime_factor(n)
        out.append(p)
        while n % p == 0:
            n //= p
    return out


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    """All tuples of `parts` nonnegative ints summing to `total`, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class _Budget:
    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0

    def spend(self, k: int) -> None:
        self.used += k
        if self.used > self.cap:
            raise BoundsExceeded(f"enumeration exceeded cap of {self.cap} steps")


def vanishing_profiles(n: int, q: int, cap: int = DEFAULT_CAP) -> list[tuple[int, ...]]:
    """All count vectors m in N^q with sum n and sum_t m[t] zeta_q^t = 0 (sorted)."""
    if n < 0 or q < 1:
        raise ValueError("need n >= 0 and q >= 1")
    budget = _Budget(cap)
    memo: dict[tuple[int, int], list[tuple[int, ...]]] = {}
    return sorted(_vanishing(q, n, budget, memo))


def _vanishing(q, n, budget, memo):
    key = (q, n)
    if key in memo:
        return memo[key]
    if n == 0:
        res = [(0,) * q]
    elif q == 1:
        res = []
    else:
        p = next((f for f in _prime_factors(q) if (q // f) % f == 0), None)
        if p is not None:
            res = _vanishing_square(q, n, p, budget, memo)
        else:
            res = _vanishing_coprime(q, n, max(_prime_factors(q)), budget)
    budget.spend(len(res) + 1)
    memo[key] = res
    return res


def _vanishing_square(q, n, p, budget, memo):
    qq = q // p
    res = []
    for sizes in _compositions(n, p):
        subs = [_vanishing(qq, s, budget, memo) for s in sizes]
        if not all(subs):
            continue
        for combo in itertools.product(*subs):
            m = [0] * q
            for i, sub in enumerate(combo):
                for u, c in enumerate(sub):
                    m[i + p * u] = c
            res.append(tuple(m))
        budget.spend(len(res))
    return res


def _vanishing_coprime(q, n, p, budget):
    qq = q // p
    # u*qq + v*p = 1, so zeta_q^t = zeta_p^(t*u) * zeta_qq^(t*v)
    u = pow(qq, -1, p)
    v = (1 - u * qq) // p
    pos = {}
    for t in range(q):
        pos[(t * u % p, t * v % qq)] = t
    budget.spend(comb(n + qq, qq))
    # all w in N^qq with |w| <= n, grouped by the value sum_b w_b zeta_qq^b
    ws = [w for s in range(n + 1) for w in _compositions(s, qq)]
    vals = np.asarray(ws, dtype=np.int64).reshape(len(ws), qq) @ reduction_matrix(qq)
    groups: dict[tuple[int, ...], dict[int, list[tuple[int, ...]]]] = defaultdict(lambda: defaultdict(list))
    for w, val in zip(ws, map(tuple, vals.tolist())):
        groups[val][sum(w)].append(w)
    res = []
    for by_size in groups.values():
        sizes = sorted(by_size)
        smin = sizes[0]

        def rec(alpha, remaining, chosen):
            slots = p - alpha
            if remaining < slots * smin:
                return
            if slots == 1:
                for w in by_size.get(remaining, ()):
                    _emit(chosen + [w])
                return
            for s in sizes:
                if s > remaining - (slots - 1) * smin:
                    break
                for w in by_size[s]:
                    rec(alpha + 1, remaining - s, chosen + [w])

        def _emit(parts):
            m = [0] * q
            for a, w in enumerate(parts):
                for b, c in enumerate(w):
                    if c:
                        m[pos[(a, b)]] = c
            res.append(tuple(m))
            if len(res) % 4096 == 0:
                budget.spend(4096)

        rec(0, n, [])
    return res


def enumerate_ort_classes(n: int, q: int, cap: int = DEFAULT_CAP) -> list[OrbitClass]:
    """One OrbitClass per permutation-scale-group class of ORT, largest rep first."""
    profiles = vanishing_profiles(n, q, cap)
    known = set(profiles)
    seen: set[tuple[int, ...]] = set()
    classes = []
    for m in profiles:
        if m in seen:
            continue
        closure = psg_closure(m)
        if not known.issuperset(closure):
            raise AssertionError("ORT is not closed under the group action")
        seen.update(closure)
        rep = MultisetProfile(q, closure[0])
        classes.append(OrbitClass(
            rep=rep,
            perm_orbit_size=orbit_size_perm(rep),
            psg_orbit_size=sum(orbit_size_perm(c) for c in closure),
            in_ort=True,
            members=closure,
        ))
    classes.sort(key=lambda c: c.rep.counts, reverse=True)
    return classes


def ort_size(classes: Sequence[OrbitClass]) -> int:
    return sum(c.psg_orbit_size for c in classes)


# the dual side: zero-sum z in Z_q^n up to permutation and unit multiplication


def canonical_z(z: Sequence[int], q: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(sorted representative vector, canonical profile) of z's class."""
    counts = [0] * q
    for e in z:
        counts[int(e) % q] += 1
    best = max(tuple(counts[i] for i in idx) for idx in _unit_maps(q))
    return MultisetProfile(q, best).vector(), best


def enumerate_z_classes(n: int, q: int, cap: int = DEFAULT_CAP) -> list[ZClass]:
    """Representatives of {z : sum z = 0 mod q} up to permutation and units.

    Ordered by canonical profile, largest first (so z = 0 comes first).
    """
    total = comb(n + q - 1, q - 1)
    if total > cap:
        raise BoundsExceeded(
            f"{total} exponent profiles for (n={n}, q={q}) exceed the cap of {cap}"
        )
    maps = _unit_maps(q)
    seen: set[tuple[int, ...]] = set()
    out = []
    for w in _compositions(n, q):
        if sum(t * c for t, c in enumerate(w)) % q or w in seen:
            continue
        images = {tuple(w[i] for i in idx) for idx in maps}
        seen.update(images)
        best = max(images)
        size = sum(orbit_size_perm(im) for im in images)
        out.append(ZClass(MultisetProfile(q, best).vector(), size, best, q))
    out.sort(key=lambda c: c.profile, reverse=True)
    return out
