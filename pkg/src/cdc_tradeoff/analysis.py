"""Closed-form loads, CDC-fit, and the data behind the trade-off figures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import ClusterConfig, DivisibilityError, RangeError, binomial, validate_config
from .lp import BudgetInfeasible, lower_bound, round_plan, scdc_optimize


@dataclass(frozen=True)
class TradeoffPoint:
    r: int
    computation: int
    communication: Fraction
    scheme: str = "cdc"


def optimal_comm_load(K: int, r: int) -> Fraction:
    """(K - r) / (rK)."""
    if not 1 <= r <= K:
        raise RangeError([f"r={r} must lie in [1:K={K}]"])
    return Fraction(K - r, r * K)


def _min_computation(K: int, Q: int, N: int, r: int) -> int:
    total = Fraction(r * N * Q * (K - r + 1), K)
    assert total.denominator == 1, (K, Q, N, r)
    return int(total)


def cdc_min_computation(cfg: ClusterConfig) -> int:
    """Map computations CDC needs at redundancy r: rNQ(K-r+1)/K."""
    cfg = validate_config(cfg)
    return _min_computation(cfg.K, cfg.Q, cfg.N, cfg.r)


def per_server_min_computation(cfg: ClusterConfig) -> int:
    total = cdc_min_computation(cfg)
    assert total % cfg.K == 0
    return total // cfg.K


def naive_computation(cfg: ClusterConfig) -> int:
    """Every server maps all Q functions over all of its rN/K files."""
    cfg = validate_config(cfg)
    return cfg.r * cfg.N * cfg.Q


def cdc_fit(cfg: ClusterConfig, budget) -> tuple[int, Fraction]:
    """Run CDC at the largest redundancy r' <= r whose cost fits ``budget``.

    Returns (r*, L*(r*)). The cost r'(K-r'+1)NQ/K is not monotone in r',
    so every r' is checked.
    """
    cfg = validate_config(cfg)
    budget = Fraction(budget)
    feasible = [
        rp for rp in range(1, cfg.r + 1)
        if budget >= Fraction(rp * (cfg.K - rp + 1) * cfg.NQ, cfg.K)
    ]
    if not feasible:
        raise BudgetInfeasible(f"budget {budget} < NQ = {cfg.NQ}")
    r_star = max(feasible)
    return r_star, optimal_comm_load(cfg.K, r_star)


def feasible_redundancies(K: int, N: int) -> list[int]:
    """r in [1:K] with C(K, r) dividing N."""
    if K < 1 or N < 1:
        raise RangeError([f"K={K} and N={N} must be positive"])
    return [r for r in range(1, K + 1) if N % binomial(K, r) == 0]


def _check_functions(cfg: ClusterConfig) -> None:
    if cfg.K < 1 or cfg.Q < 1 or cfg.Q % cfg.K:
        raise DivisibilityError([f"Q={cfg.Q} is not a positive multiple of K={cfg.K}"])


def figure1_series(cfg: ClusterConfig) -> list[dict]:
    """Minimum and naive computation load against r, for fixed K, Q, N."""
    _check_functions(cfg)
    rows = []
    for r in feasible_redundancies(cfg.K, cfg.N):
        rows.append({
            "r": r,
            "comp_min": _min_computation(cfg.K, cfg.Q, cfg.N, r),
            "comp_naive": r * cfg.N * cfg.Q,
        })
    return rows


def figure2_series(cfg: ClusterConfig) -> list[TradeoffPoint]:
    """L*(r) against the computation each scheme spends to reach it."""
    _check_functions(cfg)
    cdc, naive = [], []
    for r in feasible_redundancies(cfg.K, cfg.N):
        load = optimal_comm_load(cfg.K, r)
        cdc.append(TradeoffPoint(r, _min_computation(cfg.K, cfg.Q, cfg.N, r), load, "cdc_min"))
        naive.append(TradeoffPoint(r, r * cfg.N * cfg.Q, load, "naive"))
    return cdc + naive


@dataclass
class Figure3Row:
    budget: Fraction
    feasible: bool
    r_star: int | None = None
    cdc_fit: Fraction | None = None
    scdc: Fraction | None = None
    scdc_rounded: Fraction | None = None
    scdc_rounded_within_budget: bool | None = None
    bound: Fraction | None = None


def budget_grid(cfg: ClusterConfig, steps: int = 60, lo=None, hi=None) -> list[Fraction]:
    """``steps`` evenly spaced budgets, NQ to the CDC minimum by default."""
    lo = Fraction(cfg.NQ if lo is None else lo)
    hi = Fraction(cdc_min_computation(cfg) if hi is None else hi)
    if steps < 1:
        raise ValueError("steps must be positive")
    if steps == 1:
        return [lo]
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


def figure3_row(cfg: ClusterConfig, budget) -> Figure3Row:
    budget = Fraction(budget)
    try:
        r_star, fit = cdc_fit(cfg, budget)
        sol = scdc_optimize(cfg, budget)
        bound = lower_bound(cfg, budget)
    except BudgetInfeasible:
        return Figure3Row(budget, False)
    rounded = round_plan(sol, cfg)
    return Figure3Row(budget, True, r_star, fit, sol.objective, rounded.objective,
                      rounded.within_budget, bound.objective)


def figure3_series(cfg: ClusterConfig, budgets) -> list[Figure3Row]:
    return [figure3_row(cfg, b) for b in sorted(Fraction(b) for b in budgets)]
