"""Exact linear-programming refutation over the class values c_i.

Variables are the values c_i of the averaged function on the ORT classes.
Every zero-sum class representative z contributes ``1 + sum_i S_i(z) c_i >= 0``
and each c_i is boxed by ``0 <= c_i <= (n-1)/|Orb_i|``.  The objective
``1 + sum_i |Orb_i| c_i`` must reach n for a BH(n, q) to exist.

The solver is a dense-tableau primal simplex over Fractions with Bland's
rule.  All right-hand sides are nonnegative, so c = 0 is a feasible start
and no phase one is needed.  Optimal duals are returned and checked as a
certificate that no feasible c beats the reported maximum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

from .orbits import DEFAULT_CAP, OrbitClass, ZClass, enumerate_ort_classes, enumerate_z_classes
from .spectrum import orbit_power_sum

__all__ = [
    "LpProblem",
    "LpOutcome",
    "UnboundedLP",
    "build_lp",
    "solve_exact",
    "verify_outcome",
    "simplex_max",
    "format_outcome",
]


class UnboundedLP(ArithmeticError):
    pass


@dataclass(frozen=True)
class LpProblem:
    n: int
    q: int
    classes: tuple[OrbitClass, ...]
    zreps: tuple[tuple[int, ...], ...]
    rows: tuple[tuple[int, ...], ...]  # S_i(z) per z-class representative
    upper: tuple[Fraction, ...]
    weights: tuple[int, ...]  # |Orb_i|
    impose_total: bool = False

    @property
    def num_vars(self) -> int:
        return len(self.classes)

    def objective(self, c: Sequence[Fraction]) -> Fraction:
        return 1 + sum((w * ci for w, ci in zip(self.weights, c)), Fraction(0))

    def constraint_values(self, c: Sequence[Fraction]) -> list[Fraction]:
        return [1 + sum((s * ci for s, ci in zip(row, c)), Fraction(0)) for row in self.rows]


@dataclass(frozen=True)
class LpOutcome:
    max_value: Fraction | None  # None stands for -infinity (infeasible)
    conclusion: Literal["nonexistent", "inconclusive"]
    optimal_c: tuple[Fraction, ...]
    active_constraints: tuple[tuple[int, ...], ...]
    duals_z: tuple[Fraction, ...]
    duals_upper: tuple[Fraction, ...]
    relaxed_max: Fraction
    infeasible: bool = False

    @property
    def nonexistent(self) -> bool:
        return self.conclusion == "nonexistent"


def build_lp(n: int, q: int, classes: Sequence[OrbitClass] | None = None,
             zclasses: Sequence[ZClass] | None = None, impose_total: bool = False,
             cap: int = DEFAULT_CAP) -> LpProblem:
    if classes is None:
        classes = enumerate_ort_classes(n, q, cap)
    if zclasses is None:
        zclasses = enumerate_z_classes(n, q, cap)
    rows = tuple(tuple(orbit_power_sum(cl, zc.rep) for cl in classes) for zc in zclasses)
    return LpProblem(
        n=n,
        q=q,
        classes=tuple(classes),
        zreps=tuple(zc.rep for zc in zclasses),
        rows=rows,
        upper=tuple(Fraction(n - 1, cl.psg_orbit_size) for cl in classes),
        weights=tuple(cl.psg_orbit_size for cl in classes),
        impose_total=impose_total,
    )


def simplex_max(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction],
                c: Sequence[Fraction]) -> tuple[Fraction, list[Fraction], list[Fraction]]:
    """Maximise c.x subject to A x <= b, x >= 0, for b >= 0.

    Returns (optimum, x, y) with y the optimal duals (one per row of A).
    Bland's rule: entering column is the lowest index with negative reduced
    cost, leaving row the lowest basic index among ratio-test ties.
    """
    m, k = len(A), len(c)
    if any(bi < 0 for bi in b):
        raise ValueError("simplex_max needs b >= 0")
    width = k + m
    T = [[Fraction(v) for v in A[i]] + [Fraction(int(i == j)) for j in range(m)] + [Fraction(b[i])]
         for i in range(m)]
    obj = [-Fraction(v) for v in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [k + i for i in range(m)]
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            raise UnboundedLP("objective is unbounded")
        piv = T[leave][enter]
        prow = [v / piv for v in T[leave]]
        T[leave] = prow
        for i in range(m):
            if i != leave and T[i][enter]:
                f = T[i][enter]
                T[i] = [v - f * pv for v, pv in zip(T[i], prow)]
        f = obj[enter]
        obj = [v - f * pv for v, pv in zip(obj, prow)]
        basis[leave] = enter
    x = [Fraction(0)] * k
    for i, j in enumerate(basis):
        if j < k:
            x[j] = T[i][-1]
    y = obj[k:k + m]
    return obj[-1], x, y


def solve_exact(lp: LpProblem) -> LpOutcome:
    K = lp.num_vars
    if K == 0:
        # no ORT classes: the objective is the constant 1
        value = Fraction(1)
        concl = "nonexistent" if value < lp.n else "inconclusive"
        return LpOutcome(value, concl, (), (), tuple(Fraction(0) for _ in lp.rows), (),
                         value, infeasible=lp.impose_total and value < lp.n)
    A = [[Fraction(-s) for s in row] for row in lp.rows]
    b = [Fraction(1)] * len(lp.rows)
    for i in range(K):
        A.append([Fraction(int(i == j)) for j in range(K)])
        b.append(lp.upper[i])
    opt, x, y = simplex_max(A, b, [Fraction(w) for w in lp.weights])
    relaxed = 1 + opt
    nz = len(lp.rows)
    duals_z, duals_up = tuple(y[:nz]), tuple(y[nz:])
    infeasible = False
    c = tuple(x)
    value: Fraction | None = relaxed
    if lp.impose_total:
        if relaxed < lp.n:
            infeasible, value, c = True, None, ()
        elif relaxed > 1:
            # the feasible set is convex and contains 0: scale down onto the slice
            t = Fraction(lp.n - 1) / (relaxed - 1)
            c = tuple(t * v for v in x)
            value = Fraction(lp.n)
    active = tuple(z for z, v in zip(lp.zreps, lp.constraint_values(c)) if v == 0) if c else ()
    concl = "nonexistent" if value is None or value < lp.n else "inconclusive"
    return LpOutcome(value, concl, c, active, duals_z, duals_up, relaxed, infeasible)


def verify_outcome(lp: LpProblem, outcome: LpOutcome) -> bool:
    """Independent exact check of a solver outcome.

    Primal side: the reported c lies in the box, satisfies every constraint
    and attains the reported value.  Dual side: the multipliers are
    nonnegative, ``sum_z y_z (-S(z)) + y_up >= |Orb|`` columnwise, and
    ``1 + sum_z y_z + sum_i y_i U_i`` equals the relaxed maximum, which bounds
    the objective over the whole feasible set.
    """
    K = lp.num_vars
    if len(outcome.duals_z) != len(lp.rows) or len(outcome.duals_upper) != K:
        return False
    if any(v < 0 for v in outcome.duals_z) or any(v < 0 for v in outcome.duals_upper):
        return False
    for j in range(K):
        col = sum((y * -row[j] for y, row in zip(outcome.duals_z, lp.rows)), Fraction(0))
        if col + outcome.duals_upper[j] < lp.weights[j]:
            return False
    bound = 1 + sum(outcome.duals_z, Fraction(0)) + sum(
        (y * u for y, u in zip(outcome.duals_upper, lp.upper)), Fraction(0))
    if bound != outcome.relaxed_max:
        return False
    if outcome.infeasible:
        return lp.impose_total and outcome.relaxed_max < lp.n and outcome.nonexistent
    c = outcome.optimal_c
    if len(c) != K:
        return False
    if any(ci < 0 or ci > u for ci, u in zip(c, lp.upper)):
        return False
    if any(v < 0 for v in lp.constraint_values(c)):
        return False
    if lp.objective(c) != outcome.max_value:
        return False
    if not lp.impose_total and outcome.max_value != outcome.relaxed_max:
        return False
    return outcome.nonexistent == (outcome.max_value < lp.n)


def format_outcome(lp: LpProblem, outcome: LpOutcome) -> str:
    """Plain-text witness in the same line-oriented style as certificates."""
    lines = [
        "LP",
        f"n {lp.n}",
        f"q {lp.q}",
        f"impose_total {int(lp.impose_total)}",
        f"classes {lp.num_vars}",
    ]
    for i, (cl, u) in enumerate(zip(lp.classes, lp.upper)):
        prof = " ".join(map(str, cl.rep.counts))
        lines.append(f"class {i} orbit {cl.psg_orbit_size} upper {u} profile {prof}")
    lines.append(f"constraints {len(lp.rows)}")
    for z, row, y in zip(lp.zreps, lp.rows, outcome.duals_z):
        lines.append(f"z {' '.join(map(str, z))} | coeffs {' '.join(map(str, row))} | dual {y}")
    lines.append("upper_duals " + " ".join(str(y) for y in outcome.duals_upper))
    lines.append(f"relaxed_max {outcome.relaxed_max}")
    lines.append("max_value " + ("-inf" if outcome.max_value is None else str(outcome.max_value)))
    lines.append("optimal_c " + " ".join(str(v) for v in outcome.optimal_c))
    lines.append(f"conclusion {outcome.conclusion}")
    return "\n".join(ln.rstrip() for ln in lines) + "\n"
