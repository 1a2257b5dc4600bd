"""Recursive block sampling on the M-renormalized tree.

Starting at the root, draw a depth-``min(M, N - |v|)`` descendant of the
current vertex from the exact block Gibbs measure, move there, repeat.
The output law is a product of block Gibbs measures; its KL divergence
to the true Gibbs measure is computed two ways (leaf sums and the block
decomposition through log-partition functions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from . import prf
from .gibbs import (
    LeafDistribution,
    cdf_index,
    gibbs_distribution,
    upward_log_partitions,
)
from .increments import IncrementModel, log_mgf
from .tree import BrwInstance, QueryLedger, VertexPath, _subtree, index_path


@dataclass
class RunRecord:
    output: VertexPath
    tau: int
    blocks: list = field(default_factory=list)  # (block root, block choice)
    seed_algo: int = 0


def block_sizes(N: int, M: int) -> list[int]:
    """Depths of the successive blocks: M, M, ..., N mod M."""
    if not 1 <= M <= N:
        raise ValueError(f"need 1 <= M <= N, got M={M}, N={N}")
    sizes = [M] * (N // M)
    if N % M:
        sizes.append(N % M)
    return sizes


def running_time(N: int, M: int, d: int) -> int:
    """Number of distinct vertices the block sampler queries."""
    return sum(sum(d**j for j in range(1, m + 1)) for m in block_sizes(N, M))


class BlockCache:
    """Memo of block CDFs keyed by (root, block depth) for one (instance, beta)."""

    def __init__(self, instance: BrwInstance, beta: float):
        self.instance = instance
        self.beta = beta
        self._cdfs: dict = {}

    def cdf(self, root: VertexPath, m: int) -> np.ndarray:
        key = (root, m)
        cdf = self._cdfs.get(key)
        if cdf is None:
            cdf = _block_cdf(self.instance, root, self.beta, m)
            self._cdfs[key] = cdf
        return cdf


def _block_cdf(instance: BrwInstance, root: VertexPath, beta: float, m: int) -> np.ndarray:
    lp = gibbs_distribution(instance, root, beta, m).log_probs
    return np.cumsum(np.exp(lp - lp.max()))


def recursive_sample(
    instance: BrwInstance,
    beta: float,
    M: int,
    algo_seed: int,
    ledger: Optional[QueryLedger] = None,
    cache: Optional[BlockCache] = None,
) -> RunRecord:
    """One run of the block sampler; the k-th block uses uniform U_k of the
    stream seeded by ``algo_seed``."""
    N, d = instance.depth, instance.d
    if not 1 <= M <= N:
        raise ValueError(f"need 1 <= M <= N, got M={M}, N={N}")
    instance.check_enumeration((), min(M, N))
    if cache is not None and (cache.instance != instance or cache.beta != beta):
        raise ValueError("block cache belongs to a different instance or beta")
    ledger = QueryLedger(d) if ledger is None else ledger
    start = ledger.count
    v: VertexPath = ()
    blocks = []
    k = 0
    while len(v) < N:
        m = min(M, N - len(v))
        cdf = cache.cdf(v, m) if cache is not None else _block_cdf(instance, v, beta, m)
        ledger.charge_subtree(v, m)
        k += 1
        w = index_path(cdf_index(cdf, prf.stream_uniform(algo_seed, k)), m, d)
        blocks.append((v, w))
        v = v + w
    return RunRecord(v, ledger.count - start, blocks, algo_seed)


def _block_walk(instance: BrwInstance, beta: float, M: int, stop: Optional[int] = None):
    """Yield (a, b, log mu_{beta,M,a} at level a, block log-probs at level b)."""
    N, d = instance.depth, instance.d
    block_sizes(N, M)
    instance.check_enumeration((), N)
    levels, incs = _subtree(instance, (), N)
    phi = log_mgf(instance.model, beta)
    lp = np.zeros(1)
    a = 0
    stop = N if stop is None else stop
    while a < stop:
        b = min(a + M, N)
        span = d ** (b - a)
        logw = upward_log_partitions(incs, beta, phi, d, a, b)[a]
        rel = levels[b] - np.repeat(levels[a], span)
        block = beta * rel - phi * (b - a) - np.repeat(logw, span)
        yield a, b, lp, block, logw
        lp = np.repeat(lp, span) + block
        a = b
    yield a, None, lp, None, None


def algorithm_law(instance: BrwInstance, beta: float, M: int) -> LeafDistribution:
    """Exact output law mu_{beta,M,N} of the block sampler on ``instance``."""
    *_, (a, _, lp, _, _) = _block_walk(instance, beta, M)
    return LeafDistribution((), instance.depth, lp, instance.d)


def partial_algorithm_law(instance: BrwInstance, beta: float, M: int, K: int) -> LeafDistribution:
    """mu_{beta,M,KM}: the law of the output's depth-KM ancestor."""
    if not 0 <= K * M <= instance.depth:
        raise ValueError("KM must lie in [0, N]")
    for a, b, lp, _, _ in _block_walk(instance, beta, M, stop=K * M):
        if b is None:
            return LeafDistribution((), a, lp, instance.d)
    raise AssertionError("unreachable")


def kl_algorithm_exact(instance: BrwInstance, beta: float, M: int) -> float:
    """KL(mu_{beta,M,N} || mu_{beta,N}) through the block decomposition

    sum_K sum_{|u|=KM} mu_{beta,M,KM}(u) KL(mu^u_{beta,M} || mu^u_{beta,N-KM}),

    each inner divergence taken from log-partition functions of subtree u:
    log W^u_{N-KM} - log W^u_M - sum_w mu^u_M(w) log W^{uw}_{N-KM-M}.
    """
    N, d = instance.depth, instance.d
    instance.check_enumeration((), N)
    _, incs = _subtree(instance, (), N)
    phi = log_mgf(instance.model, beta)
    full = upward_log_partitions(incs, beta, phi, d, 0, N)
    total = 0.0
    last = (N // M) * M
    for a, b, lp, block, logw_block in _block_walk(instance, beta, M, stop=last):
        if b is None:
            break
        span = d ** (b - a)
        inner_tail = np.sum((np.exp(block) * full[b]).reshape(-1, span), axis=1)
        inner = full[a] - logw_block - inner_tail
        total += float(np.sum(np.exp(lp) * inner))
    return total


# -------------------------------------------------------------- statistics


@dataclass(frozen=True)
class KLSummary:
    beta: float
    N: int
    M: int
    num_seeds: int
    mean: float
    std: float
    p1: float
    p2: float
    p4: float
    centered_p1: float
    centered_p2: float
    centered_p4: float
    values: tuple = field(default=(), repr=False, compare=False)

    def as_json(self) -> dict:
        return {
            "beta": self.beta, "N": self.N, "M": self.M, "num_seeds": self.num_seeds,
            "mean": self.mean, "std": self.std, "p1": self.p1, "p2": self.p2, "p4": self.p4,
        }


def _lp_norm(x: np.ndarray, p: float) -> float:
    return float(np.mean(np.abs(x) ** p) ** (1.0 / p))


def summarize(values, beta: float, N: int, M: int) -> KLSummary:
    kl = np.asarray(values, dtype=np.float64)
    std = float(np.std(kl, ddof=1)) if kl.size > 1 else 0.0
    c = kl - kl.mean()
    return KLSummary(
        float(beta), N, M, int(kl.size), float(kl.mean()), std,
        _lp_norm(kl, 1), _lp_norm(kl, 2), _lp_norm(kl, 4),
        _lp_norm(c, 1), _lp_norm(c, 2), _lp_norm(c, 4),
        tuple(float(x) for x in kl),
    )


def kl_statistics(
    model: IncrementModel, beta: float, N: int, M: int, seeds: Iterable[int], cap: Optional[int] = None
) -> KLSummary:
    """Exact KL per instance seed, reduced to mean, std and L^p norms."""
    kw = {} if cap is None else {"cap": cap}
    values = [kl_algorithm_exact(BrwInstance(model, N, int(s), **kw), beta, M) for s in seeds]
    if not values:
        raise ValueError("kl_statistics needs at least one seed")
    return summarize(values, beta, N, M)


def default_block_depth(N: int) -> int:
    """ceil(log2 N), at least 1: logarithmic block depth keeps tau polynomial."""
    return max(1, math.ceil(math.log2(N))) if N > 1 else 1
