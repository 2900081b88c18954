"""Bit-exact map / shuffle / reduce for CDC and split CDC.

Intermediate values are Python ints holding exactly T bits, most
significant bit first. A part ``p`` of ``c`` is the p-th run of T/c bits
counted from the most significant end.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .core import ClusterConfig, Subset, decimal, format_rational, iter_subsets
from .placement import Placement

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SimulationError(Exception):
    pass


class MissingSideInformation(SimulationError):
    """A server was asked to use an intermediate value it never mapped."""

    def __init__(self, server: int, iv: "IVId", role: str):
        self.server, self.iv, self.role = server, iv, role
        super().__init__(f"server {server} lacks v_{{{iv.q},{iv.n}}} needed to {role}")


class PlanSizeError(SimulationError):
    pass


class VerificationFailure(SimulationError):
    def __init__(self, failures: list[tuple[int, "IVId", str]]):
        self.failures = failures
        shown = ", ".join(f"server {k}: v_{{{iv.q},{iv.n}}} {kind}" for k, iv, kind in failures[:10])
        more = f" (+{len(failures) - 10} more)" if len(failures) > 10 else ""
        super().__init__(f"{len(failures)} reduce input(s) missing or corrupted: {shown}{more}")


class IVId(NamedTuple):
    """Intermediate value v_{q,n}: function q applied to file n."""

    q: int
    n: int


# -- map oracle ---------------------------------------------------------------

def _mix64(z: int) -> int:
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def _stream_key(seed: int, q: int, n: int) -> int:
    h = 0
    for word in (seed, q, n):
        h = _mix64(h ^ (word & MASK64))
    return h


def map_values(seed: int, ivs: Iterable[IVId], T: int) -> dict[IVId, int]:
    """Synthetic map outputs v_{q,n}, each T deterministic bits as an int.

    Byte j of v_{q,n} is the low byte of h, where h starts at 0 and absorbs
    the 64-bit words seed, q, n, j in turn via ``h = mix64(h ^ word)``
    (mix64 is the splitmix64 increment-and-finalize step). The first T bits
    of the byte stream, most significant first, form the value.
    """
    ivs = list(ivs)
    if not ivs:
        return {}
    nbytes = -(-T // 8)
    keys = np.array([_stream_key(seed, iv.q, iv.n) for iv in ivs], dtype=np.uint64)
    js = np.arange(nbytes, dtype=np.uint64)
    with np.errstate(over="ignore"):
        stream = (_mix64_array(keys[:, None] ^ js[None, :]) & np.uint64(0xFF)).astype(np.uint8)
    shift = 8 * nbytes - T
    return {
        iv: int.from_bytes(row.tobytes(), "big") >> shift
        for iv, row in zip(ivs, stream)
    }


def map_oracle(seed: int, iv: IVId, T: int) -> int:
    return map_values(seed, [iv], T)[iv]


def get_part(value: int, T: int, index: int, count: int) -> int:
    size = T // count
    return (value >> (T - (index + 1) * size)) & ((1 << size) - 1)


def join_parts(parts: Mapping[int, int], T: int, count: int) -> int:
    size = T // count
    value = 0
    for index, bits in parts.items():
        value |= bits << (T - (index + 1) * size)
    return value


# -- plans and records ----------------------------------------------------------

@dataclass(frozen=True)
class ComputationPlan:
    """Per-server sets C_k of intermediate values to map."""

    sets: dict[int, frozenset[IVId]]

    def __getitem__(self, k: int) -> frozenset[IVId]:
        return self.sets[k]

    @property
    def total(self) -> int:
        return sum(len(c) for c in self.sets.values())

    def per_server(self) -> dict[int, int]:
        return {k: len(c) for k, c in self.sets.items()}


@dataclass(frozen=True)
class Transmission:
    sender: int
    audience: tuple[int, ...]
    subset: Subset
    split_size: int
    composition: tuple[tuple[IVId, int, int], ...]
    payload: int
    bits: int

    @property
    def ell(self) -> int:
        return len(self.composition)

    def to_dict(self, payloads: bool = False) -> dict:
        d = {
            "sender": self.sender,
            "audience": list(self.audience),
            "subset": list(self.subset),
            "split_size": self.split_size,
            "composition": [
                {"q": iv.q, "n": iv.n, "part": p, "parts": c} for iv, p, c in self.composition
            ],
            "bits": self.bits,
        }
        if payloads:
            d["payload"] = format(self.payload, f"0{self.bits}b")
        return d


def write_log(log: Iterable[Transmission], fh, payloads: bool = False) -> None:
    for tx in log:
        fh.write(json.dumps(tx.to_dict(payloads)) + "\n")


@dataclass
class ShuffleResult:
    log: list[Transmission]
    plan: ComputationPlan
    local: dict[int, dict[IVId, int]]
    decoded: dict[int, dict[IVId, int]]


@dataclass
class LoadReport:
    communication_load: Fraction
    computation_count: int
    local_computations: int
    shuffle_computations: int
    total_bits: int
    transmissions: int
    per_server: dict[int, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "communication_load": format_rational(self.communication_load),
            "communication_load_decimal": decimal(self.communication_load),
            "computation_count": self.computation_count,
            "local_computations": self.local_computations,
            "shuffle_computations": self.shuffle_computations,
            "total_bits": self.total_bits,
            "transmissions": self.transmissions,
            "per_server": {str(k): v for k, v in self.per_server.items()},
        }


@dataclass
class VerificationReport:
    servers: int
    values_checked: int
    outputs: dict[int, int]


# -- exchange sets and plans ------------------------------------------------------

def exchange_set(placement: Placement, S: Iterable[int], i: int) -> frozenset[IVId]:
    """Values server i needs whose files sit at every server of S minus i."""
    S = tuple(sorted(S))
    if len(S) < 2 or i not in S:
        raise ValueError(f"need |S| >= 2 and i in S, got S={S}, i={i}")
    others = tuple(k for k in S if k != i)
    if len(others) == placement.cfg.r:
        files = placement.batches[others]
    else:
        files = placement.files_shared_by(others)
    return frozenset(IVId(q, n) for q in placement.server_functions[i] for n in files)


def local_set(placement: Placement, k: int) -> frozenset[IVId]:
    """C_{M_k, W_k}: the server's own functions over its own files."""
    return frozenset(
        IVId(q, n) for q in placement.server_functions[k] for n in placement.server_files[k])


def minimum_computation_plan(placement: Placement) -> ComputationPlan:
    """Smallest map sets that still let CDC run: own values plus the
    exchange sets of the other members of every (r+1)-subset."""
    cfg = placement.cfg
    sets = {k: set(local_set(placement, k)) for k in range(1, cfg.K + 1)}
    for S in iter_subsets(cfg.K, cfg.r + 1):
        exchange = {k: exchange_set(placement, S, k) for k in S}
        for i in S:
            for k in S:
                if k != i:
                    sets[i] |= exchange[k]
    return ComputationPlan({k: frozenset(v) for k, v in sets.items()})


def normalize_split_plan(placement: Placement, split_plan: Mapping[int, int]) -> dict[int, int]:
    cfg = placement.cfg
    rounds = cfg.eta1 * cfg.eta2
    plan = {}
    for ell, z in split_plan.items():
        ell, z_int = int(ell), int(z)
        if z_int != z or z_int < 0:
            raise PlanSizeError(f"z_{ell}={z} must be a nonnegative integer")
        if not 1 <= ell <= cfg.r:
            raise PlanSizeError(f"split size {ell} outside [1:{cfg.r}]")
        if z_int:
            plan[ell] = plan.get(ell, 0) + z_int
    if sum(plan.values()) != rounds:
        raise PlanSizeError(f"split plan sums to {sum(plan.values())}, need eta1*eta2={rounds}")
    return dict(sorted(plan.items()))


def split_groups(S: Subset, ell: int) -> list[Subset]:
    """Ascending chunks of size ell+1, then the leftover (possibly empty)."""
    size = ell + 1
    j = len(S) // size
    groups = [S[g * size:(g + 1) * size] for g in range(j)]
    rest = S[j * size:]
    if rest:
        groups.append(rest)
    return groups


def _round_blocks(split_plan: Mapping[int, int]) -> list[tuple[int, range]]:
    blocks, start = [], 0
    for ell, z in split_plan.items():
        blocks.append((ell, range(start, start + z)))
        start += z
    return blocks


def _schedule(placement: Placement, split_plan: Mapping[int, int]):
    """Yield (S, ell, group, t, ordered exchange lists) for every delivery round."""
    cfg = placement.cfg
    blocks = _round_blocks(split_plan)
    for S in iter_subsets(cfg.K, cfg.r + 1):
        ordered = {i: sorted(exchange_set(placement, S, i)) for i in S}
        for ell, rounds in blocks:
            for group in split_groups(S, ell):
                for t in rounds:
                    yield S, ell, group, t, ordered


def split_computation_plan(placement: Placement, split_plan: Mapping[int, int]) -> ComputationPlan:
    """Map sets needed by split CDC under an integer split plan."""
    cfg = placement.cfg
    split_plan = normalize_split_plan(placement, split_plan)
    sets = {k: set(local_set(placement, k)) for k in range(1, cfg.K + 1)}
    for S, _, group, t, ordered in _schedule(placement, split_plan):
        if len(group) == 1:
            (i,) = group
            sender = min(k for k in S if k != i)
            sets[sender].add(ordered[i][t])
            continue
        for k in group:
            sets[k].update(ordered[i][t] for i in group if i != k)
    return ComputationPlan({k: frozenset(v) for k, v in sets.items()})


# -- shuffle ----------------------------------------------------------------------

def map_phase(placement: Placement, plan: ComputationPlan, seed: int) -> dict[int, dict[IVId, int]]:
    T = placement.cfg.T
    wanted = set().union(*plan.sets.values()) if plan.sets else set()
    values = map_values(seed, sorted(wanted), T)
    for k, c in plan.sets.items():
        stored = placement.server_files[k]
        for iv in c:
            if iv.n not in stored:
                raise SimulationError(f"server {k} cannot map v_{{{iv.q},{iv.n}}}: file not stored")
    return {k: {iv: values[iv] for iv in c} for k, c in plan.sets.items()}


def _encode(placement: Placement, split_plan: Mapping[int, int],
            local: Mapping[int, Mapping[IVId, int]]) -> list[Transmission]:
    T = placement.cfg.T
    log = []

    def value(k: int, iv: IVId, role: str) -> int:
        try:
            return local[k][iv]
        except KeyError:
            raise MissingSideInformation(k, iv, role) from None

    for S, ell, group, t, ordered in _schedule(placement, split_plan):
        if len(group) == 1:
            (i,) = group
            sender = min(k for k in S if k != i)
            iv = ordered[i][t]
            log.append(Transmission(sender, (i,), S, ell, ((iv, 0, 1),),
                                    value(sender, iv, "unicast"), T))
            continue
        parts = len(group) - 1
        for k in group:
            payload = 0
            composition = []
            for i in group:
                if i == k:
                    continue
                iv = ordered[i][t]
                index = [j for j in group if j != i].index(k)
                composition.append((iv, index, parts))
                payload ^= get_part(value(k, iv, "encode"), T, index, parts)
            audience = tuple(i for i in group if i != k)
            log.append(Transmission(k, audience, S, ell, tuple(composition), payload, T // parts))
    return log


def decode(placement: Placement, log: Iterable[Transmission],
           local: Mapping[int, Mapping[IVId, int]]) -> dict[int, dict[IVId, int]]:
    """Each audience member strips known parts using its own map outputs.

    Values whose parts did not all arrive are left out of the result.
    """
    T = placement.cfg.T
    owner = placement.owner_of_function
    received: dict[int, dict[IVId, dict[int, int]]] = defaultdict(lambda: defaultdict(dict))
    counts: dict[IVId, int] = {}
    for tx in log:
        for a in tx.audience:
            bits = tx.payload
            mine = None
            for iv, index, parts in tx.composition:
                if owner(iv.q) == a:
                    mine = (iv, index, parts)
                    continue
                try:
                    known = local[a][iv]
                except KeyError:
                    raise MissingSideInformation(a, iv, "decode") from None
                bits ^= get_part(known, T, index, parts)
            if mine is None:
                continue
            iv, index, parts = mine
            received[a][iv][index] = bits
            counts[iv] = parts
    decoded = {k: {} for k in range(1, placement.cfg.K + 1)}
    for a, ivs in received.items():
        for iv, parts in ivs.items():
            if len(parts) == counts[iv]:
                decoded[a][iv] = join_parts(parts, T, counts[iv])
    return decoded


def scdc_shuffle(placement: Placement, split_plan: Mapping[int, int], seed: int = 0,
                 plan: ComputationPlan | None = None) -> ShuffleResult:
    split_plan = normalize_split_plan(placement, split_plan)
    if plan is None:
        plan = split_computation_plan(placement, split_plan)
    local = map_phase(placement, plan, seed)
    log = _encode(placement, split_plan, local)
    return ShuffleResult(log, plan, local, decode(placement, log, local))


def cdc_shuffle(placement: Placement, plan: ComputationPlan | None = None,
                seed: int = 0) -> ShuffleResult:
    cfg = placement.cfg
    if plan is None:
        plan = minimum_computation_plan(placement)
    return scdc_shuffle(placement, {cfg.r: cfg.eta1 * cfg.eta2}, seed, plan)


# -- reduce and accounting -------------------------------------------------------

def reduce_verify(result: ShuffleResult, placement: Placement, seed: int) -> VerificationReport:
    """Check every reduce input against the oracle; XOR-fold each function's inputs."""
    cfg = placement.cfg
    failures = []
    outputs = {}
    checked = 0
    truth = map_values(seed, (IVId(q, n) for q in range(1, cfg.Q + 1)
                              for n in range(1, cfg.N + 1)), cfg.T)
    for k in range(1, cfg.K + 1):
        local, decoded = result.local.get(k, {}), result.decoded.get(k, {})
        for q in sorted(placement.server_functions[k]):
            fold = 0
            for n in range(1, cfg.N + 1):
                iv = IVId(q, n)
                have = local.get(iv, decoded.get(iv))
                checked += 1
                if have is None:
                    failures.append((k, iv, "missing"))
                    continue
                if have != truth[iv]:
                    failures.append((k, iv, "corrupted"))
                fold ^= have
            outputs[q] = fold
    if failures:
        raise VerificationFailure(failures)
    return VerificationReport(cfg.K, checked, outputs)


def measure_loads(log: Iterable[Transmission], plan: ComputationPlan,
                  cfg: ClusterConfig, placement: Placement | None = None) -> LoadReport:
    log = list(log)
    total_bits = sum(tx.bits for tx in log)
    sent: dict[int, int] = defaultdict(int)
    for tx in log:
        sent[tx.sender] += tx.bits
    local = 0
    if placement is not None:
        local = sum(len(plan[k] & local_set(placement, k)) for k in plan.sets)
    per_server = {
        k: {"computations": len(plan[k]), "bits_sent": sent.get(k, 0)}
        for k in sorted(plan.sets)
    }
    return LoadReport(
        communication_load=Fraction(total_bits, cfg.Q * cfg.N * cfg.T),
        computation_count=plan.total,
        local_computations=local,
        shuffle_computations=plan.total - local,
        total_bits=total_bits,
        transmissions=len(log),
        per_server=per_server,
    )
