"""Cluster configuration, exact rationals and subset enumeration."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

# Exact rational arithmetic for every load and LP value.
Rational = Fraction

Subset = tuple[int, ...]


class ConfigError(ValueError):
    """Base class for invalid cluster configurations."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DivisibilityError(ConfigError):
    pass


class RangeError(ConfigError):
    pass


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def lcm_upto(r: int) -> int:
    """lcm(1, 2, ..., r); 1 for r < 1."""
    return math.lcm(*range(1, r + 1)) if r >= 1 else 1


def default_bits(r: int) -> int:
    """Smallest whole-byte T that splits evenly into r' parts for every r' <= r."""
    return math.lcm(8, lcm_upto(r))


@dataclass(frozen=True)
class ClusterConfig:
    """The cluster tuple (K, Q, N, r, T).

    ``eta1`` (files per r-subset batch) and ``eta2`` (functions per server)
    are derived from N and Q; :func:`validate_config` checks that they are
    integers. When ``T`` is omitted it defaults to :func:`default_bits`.
    """

    K: int
    Q: int
    N: int
    r: int
    T: int | None = None

    def __post_init__(self):
        if self.T is None:
            object.__setattr__(self, "T", default_bits(self.r))

    @property
    def eta1(self) -> int:
        return self.N // binomial(self.K, self.r)

    @property
    def eta2(self) -> int:
        return self.Q // self.K

    @property
    def NQ(self) -> int:
        return self.N * self.Q

    @property
    def local_computations(self) -> int:
        """rNQ/K: intermediate values each server maps for its own functions, summed."""
        return self.r * self.N * self.Q // self.K

    def with_r(self, r: int, T: int | None = None) -> "ClusterConfig":
        return ClusterConfig(self.K, self.Q, self.N, r, T)

    def as_dict(self) -> dict:
        return {"K": self.K, "Q": self.Q, "N": self.N, "r": self.r, "T": self.T}


ValidatedConfig = ClusterConfig


def validate_config(cfg: ClusterConfig) -> ValidatedConfig:
    """Return ``cfg`` unchanged if every invariant holds.

    All violations are collected; RangeError wins over DivisibilityError
    when both kinds are present.
    """
    range_problems = []
    div_problems = []
    for name in ("K", "Q", "N", "T"):
        value = getattr(cfg, name)
        if not isinstance(value, int) or value < 1:
            range_problems.append(f"{name}={value} must be a positive integer")
    if not isinstance(cfg.r, int) or not 1 <= cfg.r <= max(cfg.K, 1):
        range_problems.append(f"r={cfg.r} must lie in [1:K={cfg.K}]")
    if range_problems:
        raise RangeError(range_problems)

    batches = binomial(cfg.K, cfg.r)
    if cfg.N % batches:
        div_problems.append(
            f"N={cfg.N} is not a multiple of C(K,r)=C({cfg.K},{cfg.r})={batches}")
    if cfg.Q % cfg.K:
        div_problems.append(f"Q={cfg.Q} is not a multiple of K={cfg.K}")
    need = lcm_upto(cfg.r)
    if cfg.T % need:
        div_problems.append(f"T={cfg.T} is not divisible by lcm(1..{cfg.r})={need}")
    if div_problems:
        raise DivisibilityError(div_problems)
    return cfg


def subsets_of_size(ground: int | Sequence[int], s: int) -> list[Subset]:
    """All s-subsets of ``ground`` in lexicographic order of sorted members.

    An integer ``ground`` means [1:ground].
    """
    if isinstance(ground, int):
        ground = range(1, ground + 1)
    return list(itertools.combinations(sorted(ground), s))


def iter_subsets(K: int, s: int) -> Iterator[Subset]:
    return itertools.combinations(range(1, K + 1), s)


def format_rational(x: Fraction) -> str:
    """'p/q', or plain 'p' for integers."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def decimal(x: Fraction, digits: int = 15) -> str:
    return f"{float(x):.{digits}g}"


def parse_rational(text: str) -> Fraction:
    return Fraction(str(text).strip())
