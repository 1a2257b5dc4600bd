"""Supercritical hardness experiment.

A generation-floor(N/2) vertex w is z-exceptional when some depth-N
descendant u has X_u - X_w - m N / 2 > z sqrt(N), with m = phi'(beta_c).
Finding one is the reduced search problem; the events are independent
across w, so the number of probed roots is geometric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import prf
from .errors import DomainError
from .gibbs import gibbs_distribution, sample_index
from .increments import IncrementModel, max_speed
from .tree import (
    BrwInstance,
    QueryLedger,
    VertexPath,
    _level_values_uncached,
    as_path,
    index_path,
    max_value,
    subtree_levels,
    vertex_value,
)

# leaves per early-exit chunk inside is_exceptional
CHUNK_DEPTH = 8


@dataclass
class SearchRecord:
    z: float
    found: bool
    probes: int
    tau: int
    witness: Optional[tuple] = None  # (w, u)


@dataclass(frozen=True)
class ProbabilityEstimate:
    N: int
    z: float
    trials: int
    successes: int

    @property
    def phat(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    @property
    def stderr(self) -> float:
        if not self.trials:
            return float("nan")
        p = self.phat
        return math.sqrt(p * (1.0 - p) / self.trials)


def _threshold(model: IncrementModel, N: int, z: float) -> float:
    return max_speed(model) * N / 2.0 + z * math.sqrt(N)


def exceptional_witness(
    instance: BrwInstance, w: Sequence[int], z: float, ledger: Optional[QueryLedger] = None
) -> Optional[VertexPath]:
    """First depth-N descendant u of w (lexicographic) beating the threshold."""
    w = as_path(w)
    N, d = instance.depth, instance.d
    if len(w) != N // 2:
        raise DomainError(f"w must sit at generation {N // 2}, got |w|={len(w)}")
    depth = N - len(w)
    instance.check_enumeration(w, depth)
    threshold = _threshold(instance.model, N, z)
    top = max(0, depth - CHUNK_DEPTH)
    top_values = _level_values_uncached(instance, w, top)
    for i in range(d**top):
        prefix = index_path(i, top, d)
        root = w + prefix
        rel = top_values[i] + _level_values_uncached(instance, root, depth - top)
        if ledger is not None:
            for k in range(1, top + 1):
                ledger.charge(w + prefix[:k])
            ledger.charge_subtree(root, depth - top)
        hits = np.flatnonzero(rel > threshold)
        if hits.size:
            return root + index_path(int(hits[0]), depth - top, d)
    return None


def is_exceptional(
    instance: BrwInstance, w: Sequence[int], z: float, ledger: Optional[QueryLedger] = None
) -> bool:
    return exceptional_witness(instance, w, z, ledger) is not None


def exceptional_statistics(model: IncrementModel, N: int, trials: int, base_seed: int) -> np.ndarray:
    """(max_u X^w_u - m N / 2) / sqrt(N) below w = 0...0, one fresh instance per trial.

    E_w holds at level z exactly when the statistic exceeds z, so one
    array answers every z with paired environments.
    """
    h = N // 2
    m = max_speed(model)
    out = np.empty(trials)
    for t in range(trials):
        inst = BrwInstance(model, N, prf.derive_seed(base_seed, N, t))
        inst.check_enumeration((0,) * h, N - h)
        best = _level_values_uncached(inst, (0,) * h, N - h).max()
        out[t] = (best - m * N / 2.0) / math.sqrt(N)
    return out


def exceptional_probability(
    model: IncrementModel, N: int, z: float, trials: int, base_seed: int = 0
) -> ProbabilityEstimate:
    """Monte Carlo estimate of P(E_w) with its binomial standard error."""
    s = exceptional_statistics(model, N, trials, base_seed)
    return ProbabilityEstimate(N, float(z), trials, int(np.sum(s > z)))


def naive_search(
    instance: BrwInstance,
    z: float,
    probe_order: str = "random",
    budget: Optional[int] = None,
    order_seed: int = 0,
) -> SearchRecord:
    """Probe generation-floor(N/2) roots until a z-exceptional one turns up."""
    N, d = instance.depth, instance.d
    h = N // 2
    n_roots = d**h
    budget = n_roots if budget is None else min(budget, n_roots)
    if probe_order == "lexicographic":
        order = range(budget)
    elif probe_order == "random":
        rng = np.random.default_rng(order_seed)
        if n_roots <= 2**22:
            order = rng.permutation(n_roots)[:budget]
        else:
            order = _distinct_draws(rng, n_roots, budget)
    else:
        raise ValueError(f"unknown probe order {probe_order!r}")
    ledger = QueryLedger(d)
    probes = 0
    for idx in order:
        w = index_path(int(idx), h, d)
        probes += 1
        u = exceptional_witness(instance, w, z, ledger)
        if u is not None:
            return SearchRecord(z, True, probes, ledger.count, (w, u))
    return SearchRecord(z, False, probes, ledger.count)


def _distinct_draws(rng: np.random.Generator, n: int, k: int):
    seen = set()
    while len(seen) < k:
        i = int(rng.integers(n))
        if i not in seen:
            seen.add(i)
            yield i


def geometric_domination(probes: Sequence[int], q: float, found=None, level: float = 0.05) -> dict:
    """One-sided KS check that probe counts dominate Geometric(q) on {1, 2, ...}.

    Domination means F_emp(k) <= 1 - (1 - q)^k for all k.  Unfound
    searches are right-censored at their probe count.
    """
    probes = np.asarray(probes)
    found = np.ones(probes.size, bool) if found is None else np.asarray(found, bool)
    n = probes.size
    ks = np.unique(probes[found])
    if ks.size == 0:
        d_plus = 0.0
    else:
        emp = np.array([np.sum(found & (probes <= k)) for k in ks]) / n
        d_plus = float(np.max(emp - (1.0 - (1.0 - q) ** ks)))
    critical = math.sqrt(math.log(1.0 / level) / (2.0 * n))
    return {"d_plus": d_plus, "critical": critical, "dominates": d_plus <= critical}


def rescaled_path(instance: BrwInstance, beta: float, leaf: Sequence[int]) -> np.ndarray:
    """Z_{k/N} = (m k - X_{u_k}) / sqrt(N), k = 0..N, along the ancestors of ``leaf``.

    ``beta`` is the temperature the leaf was drawn at; the statistic itself
    only depends on the path.
    """
    leaf = as_path(leaf)
    N = instance.depth
    if len(leaf) != N:
        raise DomainError(f"leaf must have length {N}")
    m = max_speed(instance.model)
    xs = np.zeros(N + 1)
    for k in range(1, N + 1):
        xs[k] = vertex_value(instance, leaf[:k])
    return (m * np.arange(N + 1) - xs) / math.sqrt(N)


def gibbs_path_statistics(
    model: IncrementModel, beta: float, N: int, instances: int, draws: int, seed: int = 0
) -> dict:
    """Draw ``draws`` leaves from mu_{beta,N} on each of ``instances`` fresh trees.

    Returns the midpoint Z_{1/2} = (m N/2 - X_w) / sqrt(N) and the second-half
    statistic (X_u - X_w - m N/2) / sqrt(N) for every draw.
    """
    m = max_speed(model)
    h = N // 2
    rng = np.random.default_rng(seed)
    mid, tail = [], []
    for i in range(instances):
        inst = BrwInstance(model, N, prf.derive_seed(seed, N, i))
        levels = subtree_levels(inst, (), N)
        lp = gibbs_distribution(inst, (), beta, N).log_probs
        cdf = np.cumsum(np.exp(lp - lp.max()))
        idx = np.minimum(np.searchsorted(cdf, rng.random(draws) * cdf[-1], side="right"), cdf.size - 1)
        xu = levels[N][idx]
        xw = levels[h][idx // inst.d ** (N - h)]
        mid.append((m * N / 2.0 - xw) / math.sqrt(N))
        tail.append((xu - xw - m * N / 2.0) / math.sqrt(N))
    return {"midpoint": np.concatenate(mid), "second_half": np.concatenate(tail)}


def calibrate_z(model: IncrementModel, beta: float, N: int, instances: int = 200, draws: int = 10, seed: int = 0) -> float:
    """Median of the second-half statistic under mu_{beta,N}: P(stat > z) is about 1/2."""
    stats_ = gibbs_path_statistics(model, beta, N, instances, draws, seed)
    return float(np.median(stats_["second_half"]))


def max_tail_probe(
    model: IncrementModel, N: int, xs: Sequence[float], trials: int, base_seed: int = 0
) -> list[tuple[float, float]]:
    """Empirical P(max_{|u|=N} X_u >= m N + x) for each x, paired across x."""
    m = max_speed(model)
    maxima = np.array([
        max_value(BrwInstance(model, N, prf.derive_seed(base_seed, N, t))) for t in range(trials)
    ])
    if trials == 0:
        return [(float(x), float("nan")) for x in xs]
    return [(float(x), float(np.mean(maxima >= m * N + x))) for x in xs]


def fit_log_tail(table: Sequence[tuple[float, float]]) -> dict:
    """Least-squares slope of log P against x over the nonzero estimates."""
    pts = [(x, p) for x, p in table if p > 0]
    if len(pts) < 2:
        return {"slope": float("nan"), "intercept": float("nan"), "points": len(pts)}
    x, p = np.array(pts).T
    fit = stats.linregress(x, np.log(p))
    return {"slope": float(fit.slope), "intercept": float(fit.intercept), "points": len(pts)}


def sqrt_scaling_fit(estimates: Sequence[ProbabilityEstimate]) -> dict:
    """Regress log phat on sqrt(N); stretched-exponential decay gives a
    negative slope."""
    pts = [(e.N, e.phat) for e in estimates if e.successes > 0]
    if len(pts) < 2:
        return {"slope": float("nan"), "intercept": float("nan"), "r2": float("nan"), "points": len(pts)}
    n, p = np.array(pts).T
    fit = stats.linregress(np.sqrt(n), np.log(p))
    return {
        "slope": float(fit.slope),
        "intercept": float(fit.intercept),
        "r2": float(fit.rvalue**2),
        "points": len(pts),
    }
