import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cdc_tradeoff.core import ClusterConfig, binomial, default_bits
from cdc_tradeoff.placement import assign_functions, place_files


def test_intro_single_batch():
    p = place_files(ClusterConfig(3, 3, 3, 3, 6))
    assert p.batches == {(1, 2, 3): (1, 2, 3)}
    assert all(p.server_files[k] == {1, 2, 3} for k in (1, 2, 3))


def test_k4_r2_counts():
    p = place_files(ClusterConfig(4, 4, 12, 2, 8))
    assert len(p.batches) == 6
    assert all(len(files) == 2 for files in p.batches.values())
    # rN/K = 2 * 12 / 4
    assert all(len(p.server_files[k]) == 6 for k in range(1, 5))


def test_r1_lexicographic():
    p = place_files(ClusterConfig(2, 2, 2, 1, 8))
    assert p.server_files == {1: {1}, 2: {2}}


def test_batch_file_ranges():
    p = place_files(ClusterConfig(4, 4, 12, 2, 8))
    assert p.batches[(1, 2)] == (1, 2)
    assert p.batches[(3, 4)] == (11, 12)


@pytest.mark.parametrize("K,Q,eta2,expected", [
    (3, 3, 1, {1: {1}, 2: {2}, 3: {3}}),
    (2, 4, 2, {1: {1, 3}, 2: {2, 4}}),
])
def test_round_robin_functions(K, Q, eta2, expected):
    assert assign_functions(ClusterConfig(K, Q, binomial(K, 1), 1, 8)) == expected


def test_flagship_functions():
    w = assign_functions(ClusterConfig(10, 10, 2520, 5))
    assert all(w[k] == {k} for k in range(1, 11))


@st.composite
def small_configs(draw):
    K = draw(st.integers(1, 7))
    r = draw(st.integers(1, K))
    eta1 = draw(st.integers(1, 3))
    eta2 = draw(st.integers(1, 3))
    return ClusterConfig(K, K * eta2, binomial(K, r) * eta1, r, default_bits(r))


@settings(max_examples=60, deadline=None)
@given(small_configs())
def test_placement_invariants(cfg):
    p = place_files(cfg)
    all_files = [n for files in p.batches.values() for n in files]
    assert sorted(all_files) == list(range(1, cfg.N + 1))
    for T, files in p.batches.items():
        assert len(files) == cfg.eta1
        for n in files:
            holders = {k for k in range(1, cfg.K + 1) if n in p.server_files[k]}
            assert holders == set(T)
    assert all(len(m) == cfg.r * cfg.N // cfg.K for m in p.server_files.values())
    assert p.load_redundancy() == Fraction(cfg.r)
    funcs = sorted(q for w in p.server_functions.values() for q in w)
    assert funcs == list(range(1, cfg.Q + 1))
    assert all(len(w) == cfg.eta2 for w in p.server_functions.values())


def test_placement_json():
    doc = json.loads(place_files(ClusterConfig(4, 4, 12, 2, 8)).to_json())
    assert set(doc) == {"batches", "server_files", "server_functions"}
    assert doc["batches"]["1,2"] == [1, 2]
    assert doc["server_functions"]["3"] == [3]
    assert len(doc["server_files"]["1"]) == 6
