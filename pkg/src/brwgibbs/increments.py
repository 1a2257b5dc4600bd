"""Increment laws, their log-moment generating function and beta_c."""

from __future__ import annotations

import ast
import enum
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelError, NumericalFailure
from .prf import normal_quantile


class Family(enum.Enum):
    GAUSSIAN = "gaussian"
    FINITE = "finite"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class IncrementModel:
    """Law of the child increment vector: ``d`` i.i.d. components."""

    family: Family
    d: int
    support: tuple[tuple[float, float], ...] = ()
    p: float = 0.5

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 2:
            raise ModelError(f"branching factor must be an integer >= 2, got {self.d!r}")
        if self.family is Family.FINITE:
            if not self.support:
                raise ModelError("finite support must be non-empty")
            probs = [pr for _, pr in self.support]
            if any(not pr > 0 for pr in probs):
                raise ModelError("finite support probabilities must be > 0")
            if abs(math.fsum(probs) - 1.0) > 1e-12:
                raise ModelError(f"finite support probabilities sum to {math.fsum(probs)!r}")
            if len({v for v, _ in self.support}) != len(self.support):
                raise ModelError("finite support values must be distinct")
            if any(not math.isfinite(v) for v, _ in self.support):
                raise ModelError("finite support values must be finite")
        elif self.family is Family.BERNOULLI:
            if not 0.0 <= self.p <= 1.0:
                raise ModelError(f"bernoulli p must lie in [0, 1], got {self.p!r}")
        # 0 must be interior to the domain of phi
        if not (math.isfinite(log_mgf(self, 1.0)) and math.isfinite(log_mgf(self, -1.0))):
            raise ModelError("log-mgf is not finite around 0")

    @classmethod
    def gaussian(cls, d: int = 2) -> IncrementModel:
        return cls(Family.GAUSSIAN, d)

    @classmethod
    def bernoulli(cls, d: int, p: float) -> IncrementModel:
        return cls(Family.BERNOULLI, d, p=float(p))

    @classmethod
    def finite(cls, d: int, support) -> IncrementModel:
        support = tuple((float(v), float(pr)) for v, pr in support)
        return cls(Family.FINITE, d, support=support)

    @property
    def mean(self) -> float:
        if self.family is Family.GAUSSIAN:
            return 0.0
        if self.family is Family.BERNOULLI:
            return self.p
        return math.fsum(v * pr for v, pr in self.support)

    def spec(self) -> str:
        """Inverse of :func:`parse_model`."""
        if self.family is Family.GAUSSIAN:
            return f"gaussian:d={self.d}"
        if self.family is Family.BERNOULLI:
            return f"bernoulli:d={self.d},p={self.p!r}"
        pairs = ",".join(f"({v!r},{pr!r})" for v, pr in self.support)
        return f"finite:d={self.d},support=[{pairs}]"

    def transform(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in (0, 1) to increments of this law."""
        if self.family is Family.GAUSSIAN:
            return normal_quantile(u)
        if self.family is Family.BERNOULLI:
            return (u < self.p).astype(np.float64)
        values = np.array([v for v, _ in self.support])
        cdf = np.cumsum([pr for _, pr in self.support])
        idx = np.searchsorted(cdf, u, side="right")
        return values[np.minimum(idx, len(values) - 1)]


def _finite_arrays(model: IncrementModel):
    values = np.array([v for v, _ in model.support])
    logp = np.log([pr for _, pr in model.support])
    return values, logp


def log_mgf(model: IncrementModel, beta: float) -> float:
    """phi(beta) = log E[sum_i exp(beta Y_i)]."""
    beta = float(beta)
    if not math.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta!r}")
    logd = math.log(model.d)
    if model.family is Family.GAUSSIAN:
        return logd + 0.5 * beta * beta
    if model.family is Family.BERNOULLI:
        with np.errstate(divide="ignore"):
            a, b = np.log1p(-model.p), np.log(model.p)
        return logd + float(np.logaddexp(a, b + beta))
    values, logp = _finite_arrays(model)
    t = logp + beta * values
    tmax = t.max()
    return logd + float(tmax + np.log(np.sum(np.exp(t - tmax))))


def log_mgf_derivative(model: IncrementModel, beta: float) -> float:
    """phi'(beta): the mean of Y under the beta-tilted law."""
    beta = float(beta)
    if not math.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta!r}")
    if model.family is Family.GAUSSIAN:
        return beta
    if model.family is Family.BERNOULLI:
        if model.p in (0.0, 1.0):
            return model.p
        # p e^b / (1 - p + p e^b), written as a logistic
        t = math.log(model.p) - math.log1p(-model.p) + beta
        return 1.0 / (1.0 + math.exp(-t)) if t >= 0 else math.exp(t) / (1.0 + math.exp(t))
    values, logp = _finite_arrays(model)
    t = logp + beta * values
    w = np.exp(t - t.max())
    return float(np.dot(w, values) / w.sum())


def _g(model: IncrementModel, beta: float) -> float:
    val = beta * log_mgf_derivative(model, beta) - log_mgf(model, beta)
    if math.isnan(val):
        raise NumericalFailure(f"NaN in beta*phi'(beta) - phi(beta) at beta={beta!r}")
    return val


def _top_atom_mass(model: IncrementModel):
    """Probability of the largest value for bounded laws, None for Gaussian."""
    if model.family is Family.GAUSSIAN:
        return None
    if model.family is Family.BERNOULLI:
        return model.p if model.p > 0.0 else 1.0
    return max(model.support)[1]


def critical_beta(model: IncrementModel) -> float:
    """beta_c = sup{beta > 0 : beta phi'(beta) < phi(beta)}, possibly inf."""
    # For a bounded law g increases to -log(d * P(Y = max Y)).  When that
    # limit is <= 0 the transition never happens, but g(beta) rounds to 0
    # long before beta reaches the scan cap, so decide it exactly here.
    top = _top_atom_mass(model)
    if top is not None and model.d * top >= 1.0:
        return math.inf
    lo, hi = 0.0, None
    beta = 1.0
    while beta <= 2.0**20:
        if _g(model, beta) >= 0.0:
            hi = beta
            break
        lo = beta
        beta *= 2.0
    if hi is None:
        return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _g(model, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def max_speed(model: IncrementModel) -> float:
    """m = phi'(beta_c), the linear speed of the maximum."""
    bc = critical_beta(model)
    if math.isinf(bc):
        # bounded law with no transition: phi' increases to the top of the
        # support, which is then the speed of the maximum
        if model.family is Family.BERNOULLI:
            return 1.0 if model.p > 0.0 else 0.0
        if model.family is Family.FINITE:
            return max(v for v, _ in model.support)
        raise DomainError("beta_c is infinite; the speed phi'(beta_c) is undefined")
    return log_mgf_derivative(model, bc)


def free_energy(model: IncrementModel, beta: float) -> float:
    """Limit of (1 / beta N) log sum_v exp(beta X_v)."""
    if not beta > 0:
        raise DomainError(f"free energy needs beta > 0, got {beta!r}")
    bc = critical_beta(model)
    if beta < bc:
        return log_mgf(model, beta) / beta
    return log_mgf(model, bc) / bc


# ---------------------------------------------------------------- parsing

_SPEC_RE = re.compile(r"^\s*(\w+)\s*(?::(.*))?$")


def _split_params(body: str) -> dict[str, str]:
    params, depth, start = {}, 0, 0
    pieces = []
    for i, ch in enumerate(body):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "," and depth == 0:
            pieces.append(body[start:i])
            start = i + 1
    pieces.append(body[start:])
    for piece in pieces:
        if not piece.strip():
            continue
        key, sep, value = piece.partition("=")
        if not sep:
            raise ModelError(f"expected key=value, got {piece!r}")
        params[key.strip()] = value.strip()
    return params


def parse_model(spec: str) -> IncrementModel:
    """Parse ``gaussian:d=2``, ``bernoulli:d=2,p=0.3`` or
    ``finite:d=3,support=[(-1,0.5),(1,0.5)]``."""
    m = _SPEC_RE.match(spec)
    if not m:
        raise ModelError(f"cannot parse model spec {spec!r}")
    name, body = m.group(1).lower(), m.group(2) or ""
    params = _split_params(body)
    try:
        d = int(params.pop("d", "2"))
        if name == "gaussian":
            model = IncrementModel.gaussian(d)
        elif name == "bernoulli":
            model = IncrementModel.bernoulli(d, float(params.pop("p")))
        elif name == "finite":
            support = ast.literal_eval(params.pop("support"))
            model = IncrementModel.finite(d, support)
        else:
            raise ModelError(f"unknown family {name!r}")
    except (KeyError, ValueError, SyntaxError, TypeError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"bad model spec {spec!r}: {exc}") from exc
    if params:
        raise ModelError(f"unexpected parameters {sorted(params)} in {spec!r}")
    return model
