import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brwgibbs import (
    BrwInstance,
    CapExceeded,
    IncrementModel,
    QueryLedger,
    algorithm_law,
    gibbs_distribution,
    kl_algorithm_exact,
    kl_divergence,
    kl_statistics,
    recursive_sample,
    running_time,
)
from brwgibbs.sampler import BlockCache, block_sizes, default_block_depth, partial_algorithm_law, summarize
from brwgibbs.tree import path_index

from oracles import brute_algorithm_law, kl

G2 = IncrementModel.gaussian(2)
G3 = IncrementModel.gaussian(3)


def empirical_tv(instance, beta, M, law, runs, cache=None, offset=0):
    counts = np.zeros(law.size)
    for k in range(runs):
        rec = recursive_sample(instance, beta, M, offset + k, cache=cache)
        counts[path_index(rec.output, instance.d)] += 1
    return 0.5 * np.abs(counts / runs - law).sum()


def test_block_sizes_and_running_time():
    assert block_sizes(5, 2) == [2, 2, 1]
    assert block_sizes(6, 3) == [3, 3]
    assert running_time(5, 2, 2) == 14
    with pytest.raises(ValueError):
        block_sizes(3, 4)


def test_tau_example_is_fixed():
    inst = BrwInstance(G2, 5, 0)
    for algo in range(20):
        for beta in (0.0, 0.8, 3.0):
            assert recursive_sample(inst, beta, 2, algo).tau == 14


@given(st.integers(1, 12), st.data(), st.sampled_from([2, 3]), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_tau_formula_property(N, data, d, seed):
    M = data.draw(st.integers(1, N))
    model = IncrementModel.gaussian(d)
    rec = recursive_sample(BrwInstance(model, N, seed), 0.7, M, seed + 1)
    expected = sum(sum(d**j for j in range(1, min(M, N - a) + 1)) for a in range(0, N, M))
    assert rec.tau == expected == running_time(N, M, d)
    assert rec.tau <= math.ceil(N / M) * d**M * 2


def test_ledger_is_shared_across_runs():
    inst = BrwInstance(G2, 6, 1)
    ledger = QueryLedger(2)
    a = recursive_sample(inst, 0.5, 3, 1, ledger=ledger)
    b = recursive_sample(inst, 0.5, 3, 2, ledger=ledger)
    assert a.tau == running_time(6, 3, 2)
    # the first block is shared, so the second run reveals fewer new vertices
    assert b.tau <= a.tau
    assert ledger.count == a.tau + b.tau


def test_run_record_structure():
    inst = BrwInstance(G3, 7, 3)
    rec = recursive_sample(inst, 1.0, 3, 99)
    assert len(rec.output) == 7
    assert [len(v) for v, _ in rec.blocks] == [0, 3, 6]
    for v, w in rec.blocks:
        assert rec.output[: len(v) + len(w)] == v + w
    assert recursive_sample(inst, 1.0, 3, 99).output == rec.output
    assert rec.seed_algo == 99


def test_cap_applies_to_blocks():
    inst = BrwInstance(G2, 20, 0, cap=2**8)
    recursive_sample(inst, 0.8, 8, 0)
    with pytest.raises(CapExceeded):
        recursive_sample(inst, 0.8, 9, 0)


def test_cache_gives_identical_runs():
    inst = BrwInstance(G2, 8, 4)
    cache = BlockCache(inst, 0.9)
    for k in range(200):
        assert recursive_sample(inst, 0.9, 3, k, cache=cache).output == recursive_sample(inst, 0.9, 3, k).output
    with pytest.raises(ValueError):
        recursive_sample(inst, 1.0, 3, 0, cache=cache)


def test_uniform_law_when_single_block_at_zero_beta():
    inst = BrwInstance(G2, 6, 12)
    assert empirical_tv(inst, 0.0, 6, np.full(64, 1 / 64), 100_000, BlockCache(inst, 0.0)) <= 0.02


def test_output_frequencies_match_law():
    inst = BrwInstance(G2, 4, 21)
    law = algorithm_law(inst, 0.8, 2).probs
    assert empirical_tv(inst, 0.8, 2, law, 200_000, BlockCache(inst, 0.8)) <= 0.01


@pytest.mark.slow
def test_output_frequencies_match_law_million_runs():
    inst = BrwInstance(G2, 6, 5)
    law = algorithm_law(inst, 0.8, 2).probs
    assert empirical_tv(inst, 0.8, 2, law, 1_000_000, BlockCache(inst, 0.8)) <= 0.005


def test_algorithm_law_cases():
    inst = BrwInstance(G2, 9, 6)
    np.testing.assert_allclose(algorithm_law(inst, 1.2, 9).log_probs,
                               gibbs_distribution(inst, (), 1.2, 9).log_probs, atol=1e-12)
    for M in range(1, 10):
        np.testing.assert_allclose(algorithm_law(inst, 0.0, M).probs, 1 / 512, atol=1e-15)
        assert abs(algorithm_law(inst, 0.7, M).log_normalizer()) <= 1e-10


@pytest.mark.parametrize("model,N,M", [(G2, 5, 2), (G2, 6, 4), (G3, 4, 3), (G3, 3, 1)])
def test_algorithm_law_against_brute_force(model, N, M):
    inst = BrwInstance(model, N, 17)
    np.testing.assert_allclose(algorithm_law(inst, 1.1, M).probs, brute_algorithm_law(inst, 1.1, M), atol=1e-13)


def test_partial_law_is_prefix_marginal():
    inst = BrwInstance(G2, 10, 8)
    full = algorithm_law(inst, 0.8, 3)
    for K in range(4):
        np.testing.assert_allclose(partial_algorithm_law(inst, 0.8, 3, K).probs, full.restrict(3 * K).probs, atol=1e-12)


def test_kl_exact_trivial_cases():
    inst = BrwInstance(G2, 10, 2)
    assert kl_algorithm_exact(inst, 0.8, 10) == pytest.approx(0.0, abs=1e-9)
    for M in (1, 3, 7):
        assert kl_algorithm_exact(inst, 0.0, M) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("N", [6, 9, 12])
@pytest.mark.parametrize("M", [1, 2, 3])
@pytest.mark.parametrize("beta", [0.4, 0.8])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_block_decomposition_identity(N, M, beta, seed):
    inst = BrwInstance(G2, N, seed)
    direct = kl_divergence(algorithm_law(inst, beta, M), gibbs_distribution(inst, (), beta, N))
    assert kl_algorithm_exact(inst, beta, M) == pytest.approx(direct, abs=1e-8)


def test_block_decomposition_against_brute_force():
    inst = BrwInstance(G3, 5, 4)
    p = brute_algorithm_law(inst, 0.9, 2)
    from oracles import brute_gibbs
    q = brute_gibbs(inst, (), 0.9, 5)
    assert kl_algorithm_exact(inst, 0.9, 2) == pytest.approx(kl(p, q), abs=1e-12)


@pytest.mark.parametrize("N,M", [(7, 3), (11, 4), (10, 3), (9, 5)])
def test_truncated_depth_identity(N, M):
    inst = BrwInstance(G2, N, 77)
    beta = 0.8
    Np = (N // M) * M
    gibbs = gibbs_distribution(inst, (), beta, N)
    full = kl_divergence(algorithm_law(inst, beta, M), gibbs)
    truncated = kl_divergence(partial_algorithm_law(inst, beta, M, N // M), gibbs.restrict(Np))
    assert full == pytest.approx(truncated, abs=1e-9)


def test_kl_statistics_zero_beta():
    s = kl_statistics(G2, 0.0, 8, 2, range(5))
    for field in ("mean", "std", "p1", "p2", "p4", "centered_p2"):
        assert getattr(s, field) == pytest.approx(0.0, abs=1e-12)


def test_summary_norms():
    s = summarize([1.0, 2.0, 3.0, 6.0], 0.8, 12, 4)
    assert s.mean == 3.0
    assert s.std == pytest.approx(np.std([1, 2, 3, 6], ddof=1))
    assert s.p1 == 3.0
    assert s.p2 == pytest.approx(math.sqrt((1 + 4 + 9 + 36) / 4))
    assert s.p4 == pytest.approx(((1 + 16 + 81 + 1296) / 4) ** 0.25)
    assert s.centered_p1 == pytest.approx((2 + 1 + 0 + 3) / 4)
    assert set(s.as_json()) == {"beta", "N", "M", "num_seeds", "mean", "std", "p1", "p2", "p4"}
    with pytest.raises(ValueError):
        kl_statistics(G2, 0.8, 4, 2, [])


def test_default_block_depth():
    assert [default_block_depth(n) for n in (1, 2, 3, 8, 9, 20)] == [1, 1, 2, 3, 4, 5]
