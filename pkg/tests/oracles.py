"""Slow reference implementations used as test oracles.

Everything here goes through the per-vertex ``vertex_value`` oracle and
plain Python loops, sharing no code with the vectorized routines under
test beyond the increment generator itself.
"""

import math
from itertools import product

from brwgibbs import log_mgf, vertex_value


def leaf_paths(d, n):
    return list(product(range(d), repeat=n))


def brute_values(instance, root, n):
    base = vertex_value(instance, root)
    return [vertex_value(instance, tuple(root) + w) - base for w in leaf_paths(instance.d, n)]


def brute_log_w(instance, root, beta, n):
    phi = log_mgf(instance.model, beta)
    terms = [beta * x - phi * n for x in brute_values(instance, root, n)]
    top = max(terms)
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


def brute_gibbs(instance, root, beta, n):
    phi = log_mgf(instance.model, beta)
    lw = brute_log_w(instance, root, beta, n)
    return [math.exp(beta * x - phi * n - lw) for x in brute_values(instance, root, n)]


def brute_algorithm_law(instance, beta, M):
    """Product of block Gibbs laws, built leaf by leaf."""
    N, d = instance.depth, instance.d
    law = {}
    for leaf in leaf_paths(d, N):
        p, a = 1.0, 0
        while a < N:
            b = min(a + M, N)
            block = brute_gibbs(instance, leaf[:a], beta, b - a)
            idx = 0
            for digit in leaf[a:b]:
                idx = idx * d + digit
            p *= block[idx]
            a = b
        law[leaf] = p
    return [law[leaf] for leaf in leaf_paths(d, N)]


def kl(p, q):
    return math.fsum(a * math.log(a / b) for a, b in zip(p, q) if a > 0)
