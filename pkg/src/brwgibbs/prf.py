"""Stateless pseudorandom function over (seed, vertex path).

Every vertex key is derived from the seed, the path length and then the
path digits, each absorbed with a full-avalanche 64-bit mix (the
splitmix64 finalizer).  Nothing depends on ancestor values or on call
order, so any vertex can be regenerated in isolation.

The vectorized routines work on ``np.uint64`` arrays and wrap modulo
2**64; the scalar routines use Python ints masked to 64 bits and produce
the same words.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_SEED_SALT = 0x243F6A8885A308D3
_WORD_SALT = 0x13198A2E03707344
_STREAM_SALT = 0xA4093822299F31D0

_U = np.uint64
_GAMMA_U = _U(_GAMMA)
_MUL1_U = _U(_MUL1)
_MUL2_U = _U(_MUL2)
_WORD_SALT_U = _U(_WORD_SALT)
_S30, _S27, _S31, _S11 = _U(30), _U(27), _U(31), _U(11)
_INV53 = 1.0 / 9007199254740992.0
# (2**53 - 0.5) / 2**53 rounds up to 1.0; the top code point is pinned below it
_BELOW_ONE = 1.0 - _INV53


# ---------------------------------------------------------------- scalar path

def mix(x: int) -> int:
    """splitmix64 finalizer on a Python int."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MUL1) & MASK64
    x = ((x ^ (x >> 27)) * _MUL2) & MASK64
    return x ^ (x >> 31)


def absorb(state: int, value: int) -> int:
    return mix(state + (value + 1) * _GAMMA)


def seed_state(seed: int) -> int:
    return mix((seed & MASK64) ^ _SEED_SALT)


def path_key(seed: int, path) -> int:
    """Key of a vertex: seed, then digit count, then each digit."""
    s = absorb(seed_state(seed), len(path))
    for digit in path:
        s = absorb(s, digit)
    return s


def word(key: int, i: int) -> int:
    return mix(absorb(key, i) ^ _WORD_SALT)


def to_unit(w: int) -> float:
    """Top 53 bits of a word mapped to the open interval (0, 1)."""
    return min(((w >> 11) + 0.5) * _INV53, _BELOW_ONE)


def stream_uniform(seed: int, k: int) -> float:
    """k-th uniform of an external random stream (algorithm randomness)."""
    return to_unit(word(absorb(seed_state(seed ^ _STREAM_SALT), k), 0))


def derive_seed(*parts: int) -> int:
    """Hash a tuple of non-negative ints into a 64-bit seed."""
    s = seed_state(len(parts))
    for p in parts:
        s = absorb(s, p & MASK64)
    return s


# ------------------------------------------------------------ vector path

def mix_v(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _S30)) * _MUL1_U
    x = (x ^ (x >> _S27)) * _MUL2_U
    return x ^ (x >> _S31)


def absorb_v(state: np.ndarray, values: np.ndarray) -> np.ndarray:
    return mix_v(state + (values.astype(np.uint64) + _U(1)) * _GAMMA_U)


def level_keys(seed: int, root, depth: int, d: int) -> np.ndarray:
    """Keys of all vertices ``depth`` levels below ``root``, lexicographic."""
    s = absorb(seed_state(seed), len(root) + depth)
    for digit in root:
        s = absorb(s, digit)
    keys = np.array([s], dtype=np.uint64)
    digits = np.arange(d, dtype=np.uint64)
    for _ in range(depth):
        n = keys.size
        keys = absorb_v(np.repeat(keys, d), np.tile(digits, n))
    return keys


def words_v(keys: np.ndarray, d: int) -> np.ndarray:
    """``d`` words per key, shape ``(len(keys), d)``."""
    idx = np.arange(d, dtype=np.uint64)
    return mix_v(absorb_v(keys[:, None], idx[None, :]) ^ _WORD_SALT_U)


def to_unit_v(w: np.ndarray) -> np.ndarray:
    return np.minimum(((w >> _S11).astype(np.float64) + 0.5) * _INV53, _BELOW_ONE)


# ------------------------------------------------------ normal quantile

# Wichura's AS241 (PPND16) rational approximations.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _horner(coefs, r):
    acc = np.full_like(r, coefs[-1])
    for c in coefs[-2::-1]:
        acc = acc * r + c
    return acc


def normal_quantile(u: np.ndarray) -> np.ndarray:
    """Standard normal quantile for u in (0, 1); |error| far below 1.2e-9."""
    u = np.asarray(u, dtype=np.float64)
    q = u - 0.5
    out = np.empty_like(u)

    central = np.abs(q) <= 0.425
    qc = q[central]
    r = 0.180625 - qc * qc
    out[central] = qc * _horner(_A, r) / _horner(_B, r)

    tail = ~central
    r = np.sqrt(-np.log(np.minimum(u[tail], 1.0 - u[tail])))
    near = r <= 5.0
    x = np.empty_like(r)
    rn = r[near] - 1.6
    x[near] = _horner(_C, rn) / _horner(_D, rn)
    rf = r[~near] - 5.0
    x[~near] = _horner(_E, rf) / _horner(_F, rf)
    out[tail] = np.where(q[tail] < 0, -x, x)
    return out
