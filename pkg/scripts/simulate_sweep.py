"""Simulate CDC at every feasible r for one (K, Q, N) and compare with the closed forms.

    python scripts/simulate_sweep.py -K 6 -Q 6 -N 60
"""

import argparse
import csv
import sys

from cdc_tradeoff.analysis import cdc_min_computation, feasible_redundancies, optimal_comm_load
from cdc_tradeoff.core import ClusterConfig, format_rational
from cdc_tradeoff.placement import place_files
from cdc_tradeoff.simulator import cdc_shuffle, measure_loads, reduce_verify

parser = argparse.ArgumentParser()
parser.add_argument("-K", type=int, default=6)
parser.add_argument("-Q", type=int, default=6)
parser.add_argument("-N", type=int, default=60)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

writer = csv.writer(sys.stdout)
writer.writerow(["r", "comp_measured", "comp_formula", "comm_measured", "comm_formula", "verified"])
for r in feasible_redundancies(args.K, args.N):
    cfg = ClusterConfig(args.K, args.Q, args.N, r)
    placement = place_files(cfg)
    result = cdc_shuffle(placement, seed=args.seed)
    reduce_verify(result, placement, args.seed)
    report = measure_loads(result.log, result.plan, cfg, placement)
    writer.writerow([
        r, report.computation_count, cdc_min_computation(cfg),
        format_rational(report.communication_load),
        format_rational(optimal_comm_load(args.K, r)), True,
    ])
