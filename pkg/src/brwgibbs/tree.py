"""Seeded, lazily evaluated d-ary branching random walk.

Vertices are tuples of digits in ``range(d)``; the empty tuple is the root.
Increments are a pure function of ``(seed, path)`` so nothing is stored:
any subtree can be regenerated on demand, and a subtree's randomness
never depends on the values of its ancestors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import prf
from .errors import CapExceeded, DepthExceeded, DomainError
from .increments import IncrementModel

VertexPath = tuple  # tuple[int, ...]

DEFAULT_CAP = 2**24
HARD_CAP = 2**26


def as_path(digits: Sequence[int]) -> VertexPath:
    return tuple(int(x) for x in digits)


def path_index(path: Sequence[int], d: int) -> int:
    """Lexicographic index of ``path`` among vertices of its depth."""
    idx = 0
    for digit in path:
        idx = idx * d + digit
    return idx


def index_path(index: int, length: int, d: int) -> VertexPath:
    digits = []
    for _ in range(length):
        index, r = divmod(index, d)
        digits.append(r)
    if index:
        raise DomainError("index out of range for the given length")
    return tuple(reversed(digits))


def vertex_id(path: Sequence[int], d: int) -> int:
    """Unique integer id of a vertex (breadth-first numbering)."""
    n = len(path)
    return (d**n - 1) // (d - 1) + path_index(path, d)


@dataclass(frozen=True)
class BrwInstance:
    model: IncrementModel
    depth: int
    seed: int
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.depth < 1:
            raise DomainError(f"depth must be >= 1, got {self.depth}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if not 1 <= self.cap <= HARD_CAP:
            raise DomainError(f"cap must lie in [1, {HARD_CAP}]")

    @property
    def d(self) -> int:
        return self.model.d

    def check_enumeration(self, root: Sequence[int], sub_depth: int) -> None:
        if sub_depth < 0 or len(root) + sub_depth > self.depth:
            raise DepthExceeded(
                f"|root| + sub_depth = {len(root) + sub_depth} exceeds depth {self.depth}"
            )
        if self.d**sub_depth > self.cap:
            raise CapExceeded(f"{self.d}^{sub_depth} entries exceed cap {self.cap}")


@dataclass
class QueryLedger:
    """Counts distinct vertex queries, the running time of an algorithm.

    A vertex counts once however often it is re-queried.  With ``trace``
    enabled every first query is recorded as ``(k, path, increment)``,
    where ``increment`` is the value on the edge into the vertex.
    """

    d: int
    trace: Optional[list] = None
    _seen: set = field(default_factory=set, repr=False)

    @classmethod
    def tracing(cls, d: int) -> QueryLedger:
        return cls(d, trace=[])

    @property
    def count(self) -> int:
        return len(self._seen)

    def charge(self, path: Sequence[int], increment: float = float("nan")) -> bool:
        key = vertex_id(path, self.d)
        if key in self._seen:
            return False
        self._seen.add(key)
        if self.trace is not None:
            self.trace.append((len(self._seen), tuple(path), increment))
        return True

    def charge_subtree(self, root: Sequence[int], depth: int, increments=None) -> None:
        """Charge every vertex strictly below ``root`` down to ``depth`` levels."""
        d = self.d
        base = path_index(root, d)
        for j in range(1, depth + 1):
            n = len(root) + j
            offset = (d**n - 1) // (d - 1) + base * d**j
            if self.trace is None:
                self._seen.update(range(offset, offset + d**j))
                continue
            for i in range(d**j):
                path = tuple(root) + index_path(i, j, d)
                inc = float(increments[j - 1][i]) if increments is not None else float("nan")
                self.charge(path, inc)

    def dump_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for k, p, value in self.trace or ():
                writer.writerow([k, "".join(map(str, p)), repr(value)])


def _raw_increments(instance: BrwInstance, keys: np.ndarray) -> np.ndarray:
    u = prf.to_unit_v(prf.words_v(keys, instance.d))
    return instance.model.transform(u)


def child_increments(
    instance: BrwInstance, path: Sequence[int], ledger: Optional[QueryLedger] = None
) -> np.ndarray:
    """(Y_{v0}, ..., Y_{v(d-1)}) for the vertex v = ``path``."""
    path = as_path(path)
    if len(path) >= instance.depth:
        raise DepthExceeded(f"vertex at depth {len(path)} has no children in a depth-{instance.depth} tree")
    key = np.array([prf.path_key(instance.seed, path)], dtype=np.uint64)
    y = _raw_increments(instance, key)[0]
    if ledger is not None:
        for i in range(instance.d):
            ledger.charge(path + (i,), float(y[i]))
    return y


def vertex_value(
    instance: BrwInstance, path: Sequence[int], ledger: Optional[QueryLedger] = None
) -> float:
    """X_v, the sum of increments along the ancestral line of v."""
    path = as_path(path)
    if len(path) > instance.depth:
        raise DepthExceeded(f"path length {len(path)} exceeds depth {instance.depth}")
    x = 0.0
    for k, digit in enumerate(path):
        y = float(child_increments(instance, path[:k])[digit])
        x += y
        if ledger is not None:
            ledger.charge(path[: k + 1], y)
    return x


@lru_cache(maxsize=8)
def _subtree(instance: BrwInstance, root: VertexPath, depth: int):
    """Relative values and increments at every level below ``root``."""
    d = instance.d
    values = [np.zeros(1)]
    incs = []
    for j in range(depth):
        keys = prf.level_keys(instance.seed, root, j, d)
        y = _raw_increments(instance, keys).reshape(-1)
        x = np.repeat(values[-1], d) + y
        y.flags.writeable = False
        x.flags.writeable = False
        incs.append(y)
        values.append(x)
    values[0].flags.writeable = False
    return tuple(values), tuple(incs)


def subtree_levels(instance: BrwInstance, root: Sequence[int], sub_depth: int) -> tuple:
    """Read-only arrays of X^root_w for |w| = 0..sub_depth, lexicographic."""
    root = as_path(root)
    instance.check_enumeration(root, sub_depth)
    return _subtree(instance, root, sub_depth)[0]


def enumerate_leaf_values(
    instance: BrwInstance,
    root: Sequence[int],
    sub_depth: int,
    ledger: Optional[QueryLedger] = None,
) -> np.ndarray:
    """X^root_w for every |w| = sub_depth, in lexicographic order of w."""
    root = as_path(root)
    instance.check_enumeration(root, sub_depth)
    values, incs = _subtree(instance, root, sub_depth)
    if ledger is not None:
        ledger.charge_subtree(root, sub_depth, incs)
    return values[-1]


_CHUNK_DEPTH = 16


def iter_leaf_chunks(instance: BrwInstance, root: Sequence[int], sub_depth: int):
    """Yield ``(prefix, values)`` covering all leaves below ``root``.

    ``values`` are X^root of the leaves below ``root + prefix``, so the
    leaves are visited in lexicographic order without materializing more
    than ``d**16`` entries at a time.
    """
    root = as_path(root)
    d = instance.d
    top = 0
    while d ** (sub_depth - top) > 2**_CHUNK_DEPTH:
        top += 1
    top_values = _level_values_uncached(instance, root, top)
    for i in range(d**top):
        prefix = index_path(i, top, d)
        chunk = _level_values_uncached(instance, root + prefix, sub_depth - top)
        yield prefix, top_values[i] + chunk


def _level_values_uncached(instance: BrwInstance, root: VertexPath, depth: int) -> np.ndarray:
    d = instance.d
    x = np.zeros(1)
    for j in range(depth):
        keys = prf.level_keys(instance.seed, root, j, d)
        x = np.repeat(x, d) + _raw_increments(instance, keys).reshape(-1)
    return x


def max_value(instance: BrwInstance, depth: Optional[int] = None) -> float:
    """max over |u| = depth of X_u, by streaming exhaustive enumeration."""
    depth = instance.depth if depth is None else depth
    instance.check_enumeration((), depth)
    return max(float(chunk.max()) for _, chunk in iter_leaf_chunks(instance, (), depth))
