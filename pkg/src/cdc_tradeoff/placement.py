"""File and function placement for coded shuffling."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .core import ClusterConfig, Subset, iter_subsets, validate_config


@dataclass(frozen=True)
class Placement:
    """File batches per r-subset, plus each server's files and functions.

    Servers, files and functions are 1-based. ``server_files[k]`` and
    ``server_functions[k]`` are frozensets indexed by server id.
    """

    cfg: ClusterConfig
    batches: dict[Subset, tuple[int, ...]]
    server_files: dict[int, frozenset[int]]
    server_functions: dict[int, frozenset[int]]

    def owner_of_function(self, q: int) -> int:
        return (q - 1) % self.cfg.K + 1

    def files_shared_by(self, servers) -> frozenset[int]:
        """Files stored at every server in ``servers``."""
        servers = list(servers)
        common = self.server_files[servers[0]]
        for k in servers[1:]:
            common = common & self.server_files[k]
        return common

    def load_redundancy(self) -> Fraction:
        return Fraction(sum(len(m) for m in self.server_files.values()), self.cfg.N)

    def to_json(self) -> str:
        return json.dumps({
            "batches": {",".join(map(str, t)): list(files) for t, files in self.batches.items()},
            "server_files": {str(k): sorted(v) for k, v in self.server_files.items()},
            "server_functions": {str(k): sorted(v) for k, v in self.server_functions.items()},
        }, sort_keys=False)


def assign_functions(cfg: ClusterConfig) -> dict[int, frozenset[int]]:
    """Round-robin partition: W_k = {k, k+K, k+2K, ...}."""
    validate_config(cfg)
    return {
        k: frozenset(range(k, cfg.Q + 1, cfg.K))
        for k in range(1, cfg.K + 1)
    }


def place_files(cfg: ClusterConfig) -> Placement:
    cfg = validate_config(cfg)
    eta1 = cfg.eta1
    batches = {}
    holdings: dict[int, set[int]] = {k: set() for k in range(1, cfg.K + 1)}
    for i, subset in enumerate(iter_subsets(cfg.K, cfg.r)):
        files = tuple(range(i * eta1 + 1, (i + 1) * eta1 + 1))
        batches[subset] = files
        for k in subset:
            holdings[k].update(files)
    return Placement(
        cfg=cfg,
        batches=batches,
        server_files={k: frozenset(v) for k, v in holdings.items()},
        server_functions=assign_functions(cfg),
    )
