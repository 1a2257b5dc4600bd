"""Exact partition functions and Gibbs measures on finite subtrees.

All measure arithmetic stays in the log domain; linear-domain values are
only formed after shifting by the maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeMismatch
from .increments import log_mgf, log_mgf_derivative
from .tree import BrwInstance, VertexPath, _subtree, as_path, index_path, subtree_levels


def log_sum_exp(a: np.ndarray, axis=None) -> np.ndarray:
    """Max-shifted log-sum-exp.  Reduction order is fixed by numpy's
    pairwise summation, so results are bit-stable for a given input."""
    a = np.asarray(a, dtype=np.float64)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    s = np.sum(np.exp(a - m), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        out = np.log(s) + m
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


@dataclass(frozen=True)
class LogPartition:
    value: float
    beta: float
    depth: int
    root: VertexPath = ()

    @property
    def W(self) -> float:
        return math.exp(self.value)


@dataclass(frozen=True)
class LeafDistribution:
    """A probability measure on the d**depth leaves below ``root``."""

    root: VertexPath
    depth: int
    log_probs: np.ndarray
    d: int = 2

    def __post_init__(self):
        if self.log_probs.shape != (self.d**self.depth,):
            raise ShapeMismatch(
                f"expected {self.d ** self.depth} log-probabilities, got {self.log_probs.shape}"
            )

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def leaf(self, index: int) -> VertexPath:
        return self.root + index_path(index, self.depth, self.d)

    def log_normalizer(self) -> float:
        return log_sum_exp(self.log_probs)

    def restrict(self, m: int) -> LeafDistribution:
        """Push forward to the depth-m ancestors by summing leaf masses."""
        if not 0 <= m <= self.depth:
            raise ValueError(f"restriction depth {m} outside [0, {self.depth}]")
        groups = self.log_probs.reshape(self.d**m, self.d ** (self.depth - m))
        return LeafDistribution(self.root, m, log_sum_exp(groups, axis=1).reshape(-1), self.d)

    def to_csv_rows(self):
        return [(i, repr(float(lp))) for i, lp in enumerate(self.log_probs)]


def upward_log_partitions(incs, beta: float, phi: float, d: int, top: int, bottom: int):
    """log W^u_{beta, bottom - j} for every vertex u at each level j.

    Runs the one-step recursion W^u_{k+1} = sum_i e^{beta Y_ui - phi} W^{ui}_k
    from ``bottom`` up to ``top``.  Returns a dict keyed by level.
    """
    out = {bottom: np.zeros(d**bottom)}
    cur = out[bottom]
    for j in range(bottom - 1, top - 1, -1):
        terms = (beta * incs[j] - phi + cur).reshape(-1, d)
        cur = log_sum_exp(terms, axis=1)
        out[j] = cur
    return out


def level_log_partitions(instance: BrwInstance, root: Sequence[int], beta: float, n: int) -> list:
    """[log W^{root u}_{beta, n - j} for |u| = j] for j = 0..n."""
    root = as_path(root)
    instance.check_enumeration(root, n)
    _, incs = _subtree(instance, root, n)
    phi = log_mgf(instance.model, beta)
    table = upward_log_partitions(incs, beta, phi, instance.d, 0, n)
    return [table[j] for j in range(n + 1)]


def log_partition(instance: BrwInstance, root: Sequence[int], beta: float, n: int) -> LogPartition:
    """log of sum_{|w|=n} exp(beta X^root_w - phi(beta) n)."""
    root = as_path(root)
    leaves = subtree_levels(instance, root, n)[-1]
    phi = log_mgf(instance.model, beta)
    value = log_sum_exp(beta * leaves - phi * n)
    return LogPartition(value, float(beta), n, root)


def derivative_partition(instance: BrwInstance, beta: float, n: int) -> float:
    """D = d/dbeta W_{beta,n} = sum_u (X_u - phi'(beta) n) e^{beta X_u - phi(beta) n}."""
    instance.check_enumeration((), n)
    _, incs = _subtree(instance, (), n)
    leaves = subtree_levels(instance, (), n)[-1]
    model = instance.model
    dphi = log_mgf_derivative(model, beta)
    # X_u - phi'(beta) n accumulated level by level as sum of (Y - phi'),
    # which is exactly zero when the increments are constant
    centred = np.zeros(1)
    for y in incs:
        centred = np.repeat(centred, instance.d) + (y - dphi)
    a = beta * leaves - log_mgf(model, beta) * n
    shift = float(a.max())
    weighted = np.sum(centred * np.exp(a - shift))
    return float(weighted) * math.exp(shift)


def gibbs_distribution(instance: BrwInstance, root: Sequence[int], beta: float, n: int) -> LeafDistribution:
    """mu^root_{beta,n} on the leaves n levels below ``root``."""
    root = as_path(root)
    leaves = subtree_levels(instance, root, n)[-1]
    a = beta * leaves - log_mgf(instance.model, beta) * n
    return LeafDistribution(root, n, a - log_sum_exp(a), instance.d)


def restricted_gibbs(instance: BrwInstance, beta: float, n: int, m: int) -> LeafDistribution:
    """mu_{beta,n} restricted to depth m, from the tree-wide weights

    mu_{beta,n}(u) = e^{beta X_u - phi m} W^u_{beta,n-m} / W_{beta,n}.
    """
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    levels = subtree_levels(instance, (), n)
    logw = level_log_partitions(instance, (), beta, n)
    phi = log_mgf(instance.model, beta)
    lp = beta * levels[m] - phi * m + logw[m] - logw[0][0]
    return LeafDistribution((), m, lp, instance.d)


def sample_leaf(dist: LeafDistribution, uniform: float) -> VertexPath:
    """Inverse-CDF draw of a leaf in lexicographic order."""
    return dist.leaf(sample_index(dist.log_probs, uniform))


def sample_index(log_probs: np.ndarray, uniform: float) -> int:
    w = np.exp(log_probs - log_probs.max())
    cdf = np.cumsum(w)
    return cdf_index(cdf, uniform)


def cdf_index(cdf: np.ndarray, uniform: float) -> int:
    idx = int(np.searchsorted(cdf, uniform * cdf[-1], side="right"))
    return min(idx, cdf.size - 1)


def entropy(dist: LeafDistribution) -> float:
    lp = dist.log_probs
    p = np.exp(lp)
    with np.errstate(invalid="ignore"):
        return float(-np.sum(np.where(p > 0, p * lp, 0.0)))


def kl_divergence(P: LeafDistribution, Q: LeafDistribution) -> float:
    """sum_w P(w) log(P(w) / Q(w))."""
    if P.d != Q.d or P.depth != Q.depth or P.root != Q.root:
        raise ShapeMismatch("distributions live on different leaf sets")
    lp, lq = P.log_probs, Q.log_probs
    p = np.exp(lp)
    # zero-mass terms contribute nothing
    with np.errstate(invalid="ignore"):
        terms = np.where(p > 0, p * (lp - lq), 0.0)
    return float(np.sum(terms))


def kl_gibbs_pair(instance: BrwInstance, beta: float, M: int, n: int) -> float:
    """KL(mu_{beta,M} || mu_{beta,n}) from log-partition functions alone:

    log W_n - log W_M - sum_{|u|=M} mu_M(u) log W^u_{n-M}.
    """
    if not 0 <= M <= n:
        raise ValueError(f"need 0 <= M <= n, got M={M}, n={n}")
    deep = level_log_partitions(instance, (), beta, n)
    shallow = level_log_partitions(instance, (), beta, M)
    mu_M = gibbs_distribution(instance, (), beta, M)
    return float(deep[0][0] - shallow[0][0] - np.sum(mu_M.probs * deep[M]))
