"""Split-cost model and exact solvers for the two small trade-off LPs.

Both programs have at most three constraints, so every vertex of the
feasible region is found by brute force: pick a support of at most m
variables and as many constraints to hold with equality, solve the square
system in exact rationals, keep the feasible solutions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import ClusterConfig, RangeError, binomial, format_rational, validate_config


class LpError(Exception):
    pass


class Infeasible(LpError):
    pass


class BudgetInfeasible(Infeasible):
    pass


class Unbounded(LpError):
    pass


class UnexpectedSupport(LpError):
    pass


@dataclass(frozen=True)
class SplitCosts:
    r: int
    split_size: int
    j: int
    r_dd: int
    comp_per_iv: Fraction
    comm_per_iv: Fraction


def split_costs(r: int, split: int) -> SplitCosts:
    """Per-subset cost of one delivery round with groups of size split+1.

    Comp counts intermediate-value computations and Comm counts T-bit
    packets, per (r+1)-subset per delivered value.
    """
    if not 1 <= split <= r:
        raise RangeError([f"split size {split} outside [1:{r}]"])
    j = (r + 1) // (split + 1)
    r_dd = (r + 1) - j * (split + 1) - 1
    comp = Fraction(j * split * (split + 1))
    comm = Fraction(j * (split + 1), split)
    if r_dd == 0:
        # lone leftover server is served by unicast
        comp += 1
        comm += 1
    elif r_dd > 0:
        comp += r_dd * (r_dd + 1)
        comm += Fraction(r_dd + 1, r_dd)
    return SplitCosts(r, split, j, r_dd, comp, comm)


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    sense: str  # "<=", ">=" or "=="
    rhs: Fraction

    def __post_init__(self):
        if self.sense not in ("<=", ">=", "=="):
            raise ValueError(f"unknown constraint sense {self.sense!r}")
        object.__setattr__(self, "coeffs", tuple(Fraction(a) for a in self.coeffs))
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    def lhs(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.coeffs, x)), Fraction(0))

    def holds(self, x: Sequence[Fraction]) -> bool:
        value = self.lhs(x)
        if self.sense == "<=":
            return value <= self.rhs
        if self.sense == ">=":
            return value >= self.rhs
        return value == self.rhs


@dataclass
class LpSolution:
    """Optimal vertex; ``weights`` is keyed by 1-based variable index."""

    weights: dict[int, Fraction]
    objective: Fraction | None
    feasible: bool
    budget: Fraction | None = None
    extra: dict = field(default_factory=dict)

    @property
    def support(self) -> list[int]:
        return [ell for ell, z in sorted(self.weights.items()) if z != 0]

    def to_dict(self) -> dict:
        return {
            "budget": None if self.budget is None else format_rational(self.budget),
            "feasible": self.feasible,
            "weights": [
                {"ell": ell, "z_num": z.numerator, "z_den": z.denominator}
                for ell, z in sorted(self.weights.items())
            ],
            "objective": None if self.objective is None else format_rational(self.objective),
        }


def _solve_square(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan in exact rationals; None when singular."""
    n = len(b)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def enumerate_vertices(n: int, constraints: Sequence[Constraint]) -> list[tuple[Fraction, ...]]:
    """All basic feasible solutions of {x >= 0, constraints}."""
    found = set()
    m = len(constraints)
    for k in range(min(m, n) + 1):
        for cols in itertools.combinations(range(n), k):
            for rows in itertools.combinations(range(m), k):
                if k:
                    a = [[constraints[i].coeffs[c] for c in cols] for i in rows]
                    sol = _solve_square(a, [constraints[i].rhs for i in rows])
                    if sol is None:
                        continue
                else:
                    sol = []
                x = [Fraction(0)] * n
                for c, v in zip(cols, sol):
                    x[c] = v
                if any(v < 0 for v in x):
                    continue
                if all(con.holds(x) for con in constraints):
                    found.add(tuple(x))
    return sorted(found)


def _objective(c: Sequence[Fraction], x: Sequence[Fraction]) -> Fraction:
    return sum((a * v for a, v in zip(c, x)), Fraction(0))


def _best(c: Sequence[Fraction], vertices) -> tuple[Fraction, ...]:
    # ties: most mass on the highest-indexed variable, then the next, ...
    return min(vertices, key=lambda x: (_objective(c, x), tuple(-v for v in reversed(x))))


def solve_small_lp(objective: Sequence, constraints: Sequence[Constraint | tuple]) -> LpSolution:
    """Minimize objective . x over x >= 0 subject to a handful of constraints.

    Constraints may be :class:`Constraint` objects or ``(coeffs, sense, rhs)``
    tuples. Returns an infeasible-flagged solution when no vertex exists and
    raises :class:`Unbounded` when the objective has no lower bound.
    """
    c = [Fraction(v) for v in objective]
    n = len(c)
    cons = [con if isinstance(con, Constraint) else Constraint(*con) for con in constraints]
    for con in cons:
        if len(con.coeffs) != n:
            raise ValueError("constraint width does not match objective")
    vertices = enumerate_vertices(n, cons)
    if not vertices:
        return LpSolution({i + 1: Fraction(0) for i in range(n)}, None, False)

    # recession directions d >= 0, sum(d) = 1: unbounded iff some has c.d < 0
    ray_cons = [Constraint(con.coeffs, con.sense, 0) for con in cons]
    ray_cons.append(Constraint((1,) * n, "==", 1))
    rays = enumerate_vertices(n, ray_cons)
    if rays and min(_objective(c, d) for d in rays) < 0:
        raise Unbounded("objective is unbounded below on the feasible region")

    x = _best(c, vertices)
    return LpSolution({i + 1: v for i, v in enumerate(x)}, _objective(c, x), True)


# -- the two trade-off programs ---------------------------------------------------

def lower_bound(cfg: ClusterConfig, budget) -> LpSolution:
    """Least shuffle load of any locally decodable scheme within ``budget``.

    Variable z_l counts l-type transmissions (weight T, fractional allowed);
    each delivers l values and costs l^2 computations.
    """
    cfg = validate_config(cfg)
    budget = Fraction(budget)
    NQ = cfg.NQ
    ells = range(1, cfg.r + 1)
    demand = Fraction((cfg.K - cfg.r) * NQ, cfg.K)
    cons = [
        Constraint(tuple(ells), ">=", demand),
        Constraint(tuple(l * l for l in ells), "<=", budget - cfg.local_computations),
    ]
    sol = solve_small_lp([Fraction(1, NQ)] * cfg.r, cons)
    sol.budget = budget
    if not sol.feasible:
        raise BudgetInfeasible(f"budget {format_rational(budget)} < NQ = {NQ}")
    return sol


def scdc_optimize(cfg: ClusterConfig, budget) -> LpSolution:
    """Best fractional split plan: z_l rounds per subset use split size l."""
    cfg = validate_config(cfg)
    budget = Fraction(budget)
    subsets = binomial(cfg.K, cfg.r + 1)
    costs = [split_costs(cfg.r, l) for l in range(1, cfg.r + 1)]
    cons = [
        Constraint((1,) * cfg.r, "==", cfg.eta1 * cfg.eta2),
        Constraint(tuple(subsets * s.comp_per_iv for s in costs), "<=",
                   budget - cfg.local_computations),
    ]
    objective = [Fraction(subsets) * s.comm_per_iv / cfg.NQ for s in costs]
    sol = solve_small_lp(objective, cons)
    sol.budget = budget
    if not sol.feasible:
        raise BudgetInfeasible(f"budget {format_rational(budget)} < NQ = {cfg.NQ}")
    return sol


def plan_costs(cfg: ClusterConfig, weights: dict[int, Fraction | int]) -> tuple[Fraction, Fraction]:
    """(communication load, total computations) of a split plan."""
    subsets = binomial(cfg.K, cfg.r + 1)
    comm = Fraction(0)
    comp = Fraction(0)
    for ell, z in weights.items():
        s = split_costs(cfg.r, ell)
        comm += z * s.comm_per_iv
        comp += z * s.comp_per_iv
    return subsets * comm / cfg.NQ, subsets * comp + cfg.local_computations


@dataclass
class RoundedPlan:
    weights: dict[int, int]
    objective: Fraction
    computation: Fraction
    budget: Fraction | None
    within_budget: bool

    def to_dict(self) -> dict:
        return {
            "budget": None if self.budget is None else format_rational(self.budget),
            "weights": [{"ell": ell, "z": z} for ell, z in sorted(self.weights.items())],
            "objective": format_rational(self.objective),
            "computation": format_rational(self.computation),
            "within_budget": self.within_budget,
        }


def round_plan(solution: LpSolution, cfg: ClusterConfig) -> RoundedPlan:
    """Floor the larger split size of a two-point support, give the rest to the smaller."""
    if not solution.feasible:
        raise BudgetInfeasible("cannot round an infeasible solution")
    total = cfg.eta1 * cfg.eta2
    support = solution.support
    if len(support) > 2:
        raise UnexpectedSupport(f"support {support} has more than two split sizes")
    weights = {ell: Fraction(z) for ell, z in solution.weights.items() if z != 0}
    if all(z.denominator == 1 for z in weights.values()):
        rounded = {ell: int(z) for ell, z in weights.items()}
    elif len(support) == 2:
        small, large = support
        top = math.floor(weights[large])
        rounded = {small: total - top, large: top}
    else:
        raise UnexpectedSupport(f"single fractional weight on {support}")
    rounded = {ell: z for ell, z in rounded.items() if z}
    comm, comp = plan_costs(cfg, rounded)
    budget = solution.budget
    return RoundedPlan(rounded, comm, comp, budget, budget is None or comp <= budget)
