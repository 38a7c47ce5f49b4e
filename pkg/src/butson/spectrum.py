"""Frequency maps, their Fourier transforms, and nonexistence certificates.

For a BH(n, q) matrix H with rows h_i the frequency map counts how often
each vector h_i * conj(h_j) occurs (scaled by 1/n).  Averaging it over
column permutations, global scalings and Galois powers gives a function g
that is constant on permutation-scale-group classes: 1/q on the constant
vectors, an unknown c_i >= 0 on the i-th class of ORT, and 0 elsewhere.
Its Fourier transform at a zero-sum z is the affine form

    ghat(z) = 1 + sum_i c_i * S_i(z),    S_i(z) = sum_{x in class i} x^z,

and must be nonnegative, while ``1 + sum_i |class_i| c_i = n``.  A single
z with ``max ghat(z) < 0`` over that slice of the box certifies that no
BH(n, q) exists.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Literal, Sequence

import numpy as np

from .cyclotomic import CyclotomicElement, from_counts, from_exponents
from .matrices import LogMatrix, verify_bh
from .orbits import (
    DEFAULT_CAP,
    OrbitClass,
    ZClass,
    canonical_psg,
    enumerate_ort_classes,
    enumerate_z_classes,
)

__all__ = [
    "FrequencyMap",
    "ClassFunction",
    "AffineForm",
    "Certificate",
    "GExistence",
    "frequency_map",
    "ghat_H",
    "ghat_H_element",
    "ghat_H_double_sum",
    "class_function_from_matrix",
    "orbit_power_sum",
    "orbit_power_sum_element",
    "ghat_affine",
    "single_class_certificate",
    "multi_class_certificate",
    "find_certificate",
    "theorem_g_exists",
    "format_certificate",
    "parse_certificate",
    "recheck_certificate",
]


# frequency map of a concrete matrix


@dataclass(frozen=True)
class FrequencyMap:
    n: int
    q: int
    values: dict[tuple[int, ...], Fraction]

    def __getitem__(self, x: Sequence[int]) -> Fraction:
        return self.values.get(tuple(int(e) % self.q for e in x), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.values.values(), Fraction(0))

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.values)

    def fourier(self, z: Sequence[int]) -> CyclotomicElement:
        """sum_x g_H(x) x^z, scaled by n so the result stays integral."""
        q = self.q
        tally = [0] * q
        for x, val in self.values.items():
            e = sum(a * b for a, b in zip(x, z)) % q
            tally[e] += int(val * self.n)
        return from_counts(q, tally)


def frequency_map(M: LogMatrix, strict: bool = True) -> FrequencyMap:
    if strict:
        rep = verify_bh(M)
        if not rep.is_bh:
            raise ValueError(f"not a BH matrix: rows {rep.failing_pair} are not orthogonal")
    a = M.array
    diffs = (a[:, None, :] - a[None, :, :]) % M.q
    tally = Counter(map(tuple, diffs.reshape(-1, M.n).tolist()))
    return FrequencyMap(M.n, M.q, {x: Fraction(c, M.n) for x, c in tally.items()})


def ghat_H_element(M: LogMatrix, z: Sequence[int]) -> CyclotomicElement:
    """|sum_i h_i^z|^2 as an element of Z[zeta_q]."""
    z = np.asarray(z, dtype=np.int64) % M.q
    if z.shape != (M.n,):
        raise ValueError(f"z must have length {M.n}")
    s = from_exponents(M.q, (M.array @ z) % M.q)
    return s.abs_square()


def ghat_H(M: LogMatrix, z: Sequence[int]) -> int | CyclotomicElement:
    """Fourier transform of the frequency map at z: ``|sum_i h_i^z|^2``.

    Returned as an int when the value is rational (it is then a nonnegative
    integer), otherwise as the real cyclotomic element itself; each of its
    Galois conjugates is again of the form |.|^2.
    """
    v = ghat_H_element(M, z)
    return v.to_int() if v.is_rational() else v


def ghat_H_double_sum(M: LogMatrix, z: Sequence[int]) -> CyclotomicElement:
    """sum_{i,j} (h_i * conj(h_j))^z, straight from the definition."""
    z = np.asarray(z, dtype=np.int64) % M.q
    a = M.array
    e = ((a[:, None, :] - a[None, :, :]) @ z) % M.q
    return from_counts(M.q, np.bincount(e.ravel(), minlength=M.q).tolist())


# class functions on permutation-scale-group classes


@dataclass(frozen=True)
class AffineForm:
    """constant + sum_i coeffs[i] * c_i"""

    constant: Fraction
    coeffs: tuple[int, ...]

    def __call__(self, c: Sequence[Fraction]) -> Fraction:
        if len(c) != len(self.coeffs):
            raise ValueError("wrong number of class values")
        return self.constant + sum((Fraction(s) * ci for s, ci in zip(self.coeffs, c)), Fraction(0))

    def __str__(self) -> str:
        out = str(self.constant)
        for i, s in enumerate(self.coeffs, start=1):
            out += f" {'-' if s < 0 else '+'} {abs(s)}*c{i}"
        return out


@dataclass(frozen=True)
class ClassFunction:
    n: int
    q: int
    classes: tuple[OrbitClass, ...]
    c: tuple[Fraction, ...]
    constant_value: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "constant_value", Fraction(1, self.q))

    def upper_bounds(self) -> list[Fraction]:
        return [Fraction(self.n - 1, cl.psg_orbit_size) for cl in self.classes]

    def feasible(self) -> bool:
        return all(0 <= ci <= ub for ci, ub in zip(self.c, self.upper_bounds()))

    def total(self) -> Fraction:
        return 1 + sum((cl.psg_orbit_size * ci for cl, ci in zip(self.classes, self.c)), Fraction(0))

    def ghat(self, z: Sequence[int]) -> Fraction:
        return ghat_affine(self.n, self.q, z, self.classes)(self.c)


def class_function_from_matrix(M: LogMatrix, classes: Sequence[OrbitClass] | None = None) -> ClassFunction:
    """The fully averaged g of a BH matrix, read off from its frequency map.

    ``c_i`` is the total g_H-mass on class i divided by the class size.
    """
    fm = frequency_map(M)
    if classes is None:
        classes = enumerate_ort_classes(M.n, M.q)
    index = {cl.rep.counts: i for i, cl in enumerate(classes)}
    mass = [Fraction(0)] * len(classes)
    for x, val in fm.values.items():
        if all(e == 0 for e in x):
            continue
        rep = canonical_psg(x, M.q).counts
        mass[index[rep]] += val
    c = tuple(m / cl.psg_orbit_size for m, cl in zip(mass, classes))
    return ClassFunction(M.n, M.q, tuple(classes), c)


# orbit power sums


def _check_z(z: Sequence[int], q: int, n: int) -> tuple[int, ...]:
    z = tuple(int(e) % q for e in z)
    if len(z) != n:
        raise ValueError(f"z must have length {n}, got {len(z)}")
    if sum(z) % q:
        raise ValueError(
            "z is off the zero-sum hyperplane; the averaged transform vanishes there"
        )
    return z


@lru_cache(maxsize=None)
def _submultisets(r: tuple[int, ...], size: int) -> tuple[tuple[int, ...], ...]:
    """All d <= r (coordinatewise) with sum(d) == size."""
    out = []
    q = len(r)
    suffix = [0] * (q + 1)
    for i in range(q - 1, -1, -1):
        suffix[i] = suffix[i + 1] + r[i]

    def rec(i, left, acc):
        if i == q:
            if left == 0:
                out.append(tuple(acc))
            return
        if left > suffix[i]:
            return
        for v in range(min(r[i], left), -1, -1):
            acc.append(v)
            rec(i + 1, left - v, acc)
            acc.pop()

    rec(0, size, [])
    return tuple(out)


def _profile_power_sum(m: tuple[int, ...], zprof: tuple[int, ...]) -> list[int]:
    """Exponent tally of sum_{x ~ m} zeta^(x . z) for z with profile zprof.

    Dynamic program over the distinct z values u: the w_u positions holding
    u receive a sub-multiset d of the remaining x exponents, in
    w_u! / prod d_t! ways, contributing u * sum_t t d_t to the exponent.
    """
    q = len(m)
    states: dict[tuple[int, ...], list[int]] = {m: [1] + [0] * (q - 1)}
    for u, wu in enumerate(zprof):
        if not wu:
            continue
        nxt: dict[tuple[int, ...], list[int]] = {}
        fw = factorial(wu)
        for r, poly in states.items():
            for d in _submultisets(r, wu):
                weight = fw
                for dt in d:
                    weight //= factorial(dt)
                shift = u * sum(t * dt for t, dt in enumerate(d)) % q
                r2 = tuple(a - b for a, b in zip(r, d))
                tgt = nxt.get(r2)
                if tgt is None:
                    tgt = nxt[r2] = [0] * q
                for e, cnt in enumerate(poly):
                    if cnt:
                        tgt[(e + shift) % q] += cnt * weight
        states = nxt
    return states[(0,) * q]


def orbit_power_sum_element(cls: OrbitClass, z: Sequence[int]) -> CyclotomicElement:
    q, n = cls.q, cls.n
    z = _check_z(z, q, n)
    zprof = [0] * q
    for e in z:
        zprof[e] += 1
    zprof = tuple(zprof)
    tally = [0] * q
    for m in cls.members:
        for e, cnt in enumerate(_profile_power_sum(m, zprof)):
            tally[e] += cnt
    return from_counts(q, tally)


def orbit_power_sum(cls: OrbitClass, z: Sequence[int] | ZClass) -> int:
    """sum over x in the class of x^z; always a rational integer."""
    if isinstance(z, ZClass):
        z = z.rep
    v = orbit_power_sum_element(cls, z)
    if not v.is_rational():
        raise AssertionError(f"orbit power sum is not rational: {v}")
    return v.to_int()


def ghat_affine(n: int, q: int, z: Sequence[int] | ZClass,
                classes: Sequence[OrbitClass] | None = None) -> AffineForm:
    if isinstance(z, ZClass):
        z = z.rep
    z = _check_z(z, q, n)
    if classes is None:
        classes = enumerate_ort_classes(n, q)
    return AffineForm(Fraction(1), tuple(orbit_power_sum(cl, z) for cl in classes))


# certificates


@dataclass(frozen=True)
class Certificate:
    n: int
    q: int
    z0: tuple[int, ...]
    classes: tuple[OrbitClass, ...]
    form: AffineForm
    value: Fraction | None
    maximizer: tuple[Fraction, ...]
    conclusion: Literal["nonexistent", "inconclusive"]

    @property
    def nonexistent(self) -> bool:
        return self.conclusion == "nonexistent"


def _max_on_slice(form: AffineForm, classes: Sequence[OrbitClass], n: int):
    """Maximise the form over 0 <= c_i <= (n-1)/|O_i| with 1 + sum |O_i| c_i = n.

    With u_i = |O_i| c_i the slice is the simplex sum u_i = n - 1, u_i >= 0,
    so the maximum puts all the mass on the class with the largest S_i/|O_i|.
    """
    if not classes:
        return None, ()
    ratios = [Fraction(s, cl.psg_orbit_size) for s, cl in zip(form.coeffs, classes)]
    best = max(range(len(ratios)), key=lambda i: (ratios[i], -i))
    c = [Fraction(0)] * len(classes)
    c[best] = Fraction(n - 1, classes[best].psg_orbit_size)
    return form(c), tuple(c)


def _certificate(n, q, z0, classes, form) -> Certificate:
    if not classes:
        # ORT empty: the linear constraint 1 = n already fails for n > 1
        value, c = (Fraction(1), ()) if n == 1 else (None, ())
        concl = "inconclusive" if n == 1 else "nonexistent"
        return Certificate(n, q, z0, (), form, value, c, concl)
    value, c = _max_on_slice(form, classes, n)
    return Certificate(n, q, z0, tuple(classes), form, value, c,
                       "nonexistent" if value < 0 else "inconclusive")


def single_class_certificate(n: int, q: int, z0: Sequence[int],
                             classes: Sequence[OrbitClass] | None = None) -> Certificate:
    """K = 1: pin c_1 = (n-1)/|Orb| and evaluate ghat(z0)."""
    if classes is None:
        classes = enumerate_ort_classes(n, q)
    if len(classes) != 1:
        raise ValueError(f"(n={n}, q={q}) has {len(classes)} ORT classes, not 1")
    form = ghat_affine(n, q, z0, classes)
    return _certificate(n, q, _check_z(z0, q, n), classes, form)


def multi_class_certificate(n: int, q: int, z0: Sequence[int],
                            classes: Sequence[OrbitClass] | None = None) -> Certificate:
    """Exact maximum of ghat(z0) over every feasible choice of the c_i."""
    if classes is None:
        classes = enumerate_ort_classes(n, q)
    form = ghat_affine(n, q, z0, classes)
    return _certificate(n, q, _check_z(z0, q, n), classes, form)


def find_certificate(n: int, q: int, z0: Sequence[int] | None = None,
                     cap: int = DEFAULT_CAP) -> Certificate:
    """Certificate at z0, or the strongest one over all z-class representatives.

    Strongest means the smallest maximum of ghat(z); ties go to the first
    representative in canonical order.  The result is inconclusive when no
    representative has a negative maximum.
    """
    classes = enumerate_ort_classes(n, q, cap)
    if z0 is not None:
        return multi_class_certificate(n, q, z0, classes)
    best = None
    for zc in enumerate_z_classes(n, q, cap):
        cert = multi_class_certificate(n, q, zc.rep, classes)
        if best is None or (cert.value is not None and cert.value < best.value):
            best = cert
    return best


@dataclass(frozen=True)
class GExistence:
    """Outcome of the search for a function g satisfying all the necessary conditions."""

    n: int
    q: int
    exists: bool
    method: Literal["pinned", "single-z", "lp"]
    c: tuple[Fraction, ...]
    witness: tuple[int, ...] | None
    value: Fraction | None
    checked: int

    @property
    def exists_with_K1(self) -> bool:
        return self.exists and self.method == "pinned"


def theorem_g_exists(n: int, q: int, cap: int = DEFAULT_CAP) -> GExistence:
    """Decide whether some admissible g with ghat >= 0 on all of Z_q^n exists.

    With a single ORT class the value c_1 is forced and every z-class is
    checked.  With several classes a refuting single z is looked for first;
    failing that the exact LP decides.  A reported witness is the most
    negative one, first in canonical order on ties.
    """
    classes = enumerate_ort_classes(n, q, cap)
    zclasses = enumerate_z_classes(n, q, cap)
    if len(classes) == 1:
        c = (Fraction(n - 1, classes[0].psg_orbit_size),)
        worst = None
        for zc in zclasses:
            val = ghat_affine(n, q, zc.rep, classes)(c)
            if val < 0 and (worst is None or val < worst[1]):
                worst = (zc.rep, val)
        if worst is not None:
            return GExistence(n, q, False, "pinned", c, worst[0], worst[1], len(zclasses))
        return GExistence(n, q, True, "pinned", c, None, None, len(zclasses))
    best = None
    for zc in zclasses:
        cert = multi_class_certificate(n, q, zc.rep, classes)
        if cert.nonexistent and (best is None or cert.value < best.value):
            best = cert
    if best is not None:
        return GExistence(n, q, False, "single-z", best.maximizer, best.z0, best.value,
                          len(zclasses))
    from .lp_certificates import build_lp, solve_exact

    out = solve_exact(build_lp(n, q, classes=classes, zclasses=zclasses))
    return GExistence(n, q, not out.nonexistent, "lp", out.optimal_c, None,
                      out.max_value, len(zclasses))


# witness files


def format_certificate(cert: Certificate) -> str:
    lines = [
        "CERT",
        f"n {cert.n}",
        f"q {cert.q}",
        f"classes {len(cert.classes)}",
    ]
    for i, (cl, s) in enumerate(zip(cert.classes, cert.form.coeffs)):
        prof = " ".join(map(str, cl.rep.counts))
        lines.append(f"class {i} orbit {cl.psg_orbit_size} coeff {s} profile {prof}")
    lines.append("z0 " + " ".join(map(str, cert.z0)))
    lines.append(f"constant {cert.form.constant}")
    lines.append("value " + ("none" if cert.value is None else str(cert.value)))
    lines.append("maximizer " + " ".join(str(c) for c in cert.maximizer))
    lines.append(f"conclusion {cert.conclusion}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


@dataclass(frozen=True)
class CertificateRecord:
    """A parsed witness file; only plain data, nothing recomputed."""

    n: int
    q: int
    profiles: tuple[tuple[int, ...], ...]
    orbit_sizes: tuple[int, ...]
    coeffs: tuple[int, ...]
    z0: tuple[int, ...]
    constant: Fraction
    value: Fraction | None
    maximizer: tuple[Fraction, ...]
    conclusion: str


def parse_certificate(text: str) -> CertificateRecord:
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != "CERT":
        raise ValueError("not a certificate file")
    fields: dict[str, str] = {}
    profiles, sizes, coeffs = [], [], []
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        if key == "class":
            tok = rest.split()
            if tok[1] != "orbit" or tok[3] != "coeff" or tok[5] != "profile":
                raise ValueError(f"malformed class line: {ln!r}")
            sizes.append(int(tok[2]))
            coeffs.append(int(tok[4]))
            profiles.append(tuple(int(t) for t in tok[6:]))
        else:
            fields[key] = rest
    value = None if fields["value"] == "none" else Fraction(fields["value"])
    return CertificateRecord(
        n=int(fields["n"]),
        q=int(fields["q"]),
        profiles=tuple(profiles),
        orbit_sizes=tuple(sizes),
        coeffs=tuple(coeffs),
        z0=tuple(int(t) for t in fields["z0"].split()),
        constant=Fraction(fields["constant"]),
        value=value,
        maximizer=tuple(Fraction(t) for t in fields.get("maximizer", "").split()),
        conclusion=fields["conclusion"],
    )


def recheck_certificate(rec: CertificateRecord) -> bool:
    """Recompute classes, orbit sizes, power sums and the value from scratch."""
    classes = enumerate_ort_classes(rec.n, rec.q)
    if tuple(cl.rep.counts for cl in classes) != rec.profiles:
        return False
    if tuple(cl.psg_orbit_size for cl in classes) != rec.orbit_sizes:
        return False
    cert = multi_class_certificate(rec.n, rec.q, rec.z0, classes)
    return (cert.form.coeffs == rec.coeffs and cert.value == rec.value
            and cert.conclusion == rec.conclusion)
