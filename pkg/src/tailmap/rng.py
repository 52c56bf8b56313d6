"""Seedable uniform engines and inverse-CDF sampling of truncated distributions.

Sampling from a distribution truncated to ``[L, R]`` draws ``u`` uniformly on
``[0, 1)``, squeezes it into ``[F(L), F(R))`` and maps it back through the
quantile function::

    x = F^-1(F(L) + u * (F(R) - F(L)))

A missing bound contributes ``F = 0`` (left) or ``F = 1`` (right).

Example:
    >>> eng = UniformEngine("xoshiro", seed=3)
    >>> spec = DistributionSpec("lognormal", [math.log(125), 1.0])
    >>> xs = simulate_trunc(eng, spec, TruncationWindow(0, 250), [1000])
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit
from scipy import special

from .errors import DomainError, InvalidParams, MissingParams, UnknownDistribution

__all__ = [
    "DistributionSpec",
    "TruncationWindow",
    "UniformEngine",
    "cdf",
    "inv_cdf",
    "simulate_trunc",
    "uniform_block",
]

# name -> (arity, indices of parameters that must be strictly positive)
_DISTRIBUTIONS = {
    "flat": (2, ()),
    "lognormal": (2, (1,)),
    "gamma": (2, (0, 1)),
    "gaussian": (2, (1,)),
    "exponential": (1, (0,)),
}
_ALIASES = {"uniform": "flat", "normal": "gaussian", "exp": "exponential"}

# Distributions whose support is [0, inf): p = 0 maps to 0, p = 1 is outside the domain.
_HALF_LINE = {"lognormal", "gamma", "exponential"}


def available_distributions() -> list[str]:
    return sorted(_DISTRIBUTIONS)


def has_distr(name: str) -> bool:
    key = name.lower()
    return _ALIASES.get(key, key) in _DISTRIBUTIONS


@dataclass(frozen=True)
class DistributionSpec:
    name: str
    params: tuple = ()

    def __post_init__(self):
        key = self.name.lower()
        object.__setattr__(self, "name", _ALIASES.get(key, key))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def arity(self) -> int:
        self._check_name()
        return _DISTRIBUTIONS[self.name][0]

    def _check_name(self):
        if self.name not in _DISTRIBUTIONS:
            raise UnknownDistribution(f"The distribution {self.name} is not available")

    def validated(self) -> "DistributionSpec":
        """Return self if well formed; flat without params becomes flat[0, 1]."""
        self._check_name()
        if self.name == "flat" and not self.params:
            return DistributionSpec("flat", (0.0, 1.0))
        arity, positive = _DISTRIBUTIONS[self.name]
        if not self.params:
            raise MissingParams(f"Must provide parameters for the distribution {self.name}")
        if len(self.params) != arity:
            raise InvalidParams(
                f"{self.name} takes {arity} parameter(s), got {len(self.params)}")
        if not all(math.isfinite(p) for p in self.params):
            raise InvalidParams(f"{self.name} parameters must be finite: {self.params}")
        for i in positive:
            if self.params[i] <= 0:
                raise InvalidParams(f"{self.name} parameter #{i} must be > 0: {self.params}")
        if self.name == "flat" and not self.params[0] < self.params[1]:
            raise InvalidParams(f"flat requires a < b, got {self.params}")
        return self


@dataclass(frozen=True)
class TruncationWindow:
    left: float | None = None
    right: float | None = None

    def bounds(self, spec: DistributionSpec) -> tuple[float, float]:
        """CDF values at the window edges, checking the window is usable."""
        if self.left is not None and self.right is not None and not self.left < self.right:
            raise InvalidParams(f"truncation window needs left < right, got [{self.left}, {self.right}]")
        lo = 0.0 if self.left is None else float(cdf(spec, self.left))
        hi = 1.0 if self.right is None else float(cdf(spec, self.right))
        if not lo < hi:
            raise InvalidParams(
                f"window [{self.left}, {self.right}] has no probability mass under {spec.name}")
        return lo, hi


# --------------------------------------------------------------------------
# CDF and quantile functions
# --------------------------------------------------------------------------


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def cdf(spec: DistributionSpec, x):
    """P(X <= x); vectorized over ``x``."""
    spec = spec.validated()
    xs = np.asarray(x, dtype=np.float64)
    name, p = spec.name, spec.params
    with np.errstate(divide="ignore", invalid="ignore"):
        if name == "flat":
            out = np.clip((xs - p[0]) / (p[1] - p[0]), 0.0, 1.0)
        elif name == "gaussian":
            out = special.ndtr((xs - p[0]) / p[1])
        elif name == "lognormal":
            pos = xs > 0
            z = (np.log(np.where(pos, xs, 1.0)) - p[0]) / p[1]
            out = np.where(pos, special.ndtr(z), 0.0)
        elif name == "gamma":
            out = special.gammainc(p[0], np.maximum(xs, 0.0) / p[1])
        else:  # exponential
            out = -np.expm1(-np.maximum(xs, 0.0) / p[0])
    return _scalar_or_array(x, out)


def inv_cdf(spec: DistributionSpec, prob):
    """Quantile function; vectorized over ``prob``.

    Raises:
        DomainError: some probability is outside [0, 1], or sits on an edge
            that maps to an infinite quantile.
    """
    spec = spec.validated()
    ps = np.asarray(prob, dtype=np.float64)
    if np.any(np.isnan(ps)) or np.any(ps < 0.0) or np.any(ps > 1.0):
        raise DomainError(f"probability outside [0, 1]: {prob!r}")
    name, p = spec.name, spec.params
    if name == "gaussian" and np.any((ps == 0.0) | (ps == 1.0)):
        raise DomainError("gaussian quantile is infinite at p = 0 and p = 1")
    if name in _HALF_LINE and np.any(ps == 1.0):
        raise DomainError(f"{name} quantile is infinite at p = 1")
    if name == "flat":
        out = p[0] + ps * (p[1] - p[0])
    elif name == "gaussian":
        out = p[0] + p[1] * special.ndtri(ps)
    elif name == "lognormal":
        with np.errstate(divide="ignore"):
            out = np.exp(p[0] + p[1] * special.ndtri(ps))
    elif name == "gamma":
        out = _gamma_quantile(p[0], ps) * p[1]
    else:
        out = -p[0] * np.log1p(-ps)
    return _scalar_or_array(prob, out)


def _gamma_quantile(shape: float, ps: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    # Start from scipy's inverse, then polish with guarded Newton steps on P(a, x).
    x = np.atleast_1d(special.gammaincinv(shape, ps)).astype(np.float64)
    pv = np.atleast_1d(ps)
    inner = (pv > 0.0) & (pv < 1.0) & (x > 0.0)
    log_norm = special.gammaln(shape)
    for _ in range(4):
        xi = x[inner]
        if xi.size == 0:
            break
        resid = special.gammainc(shape, xi) - pv[inner]
        if np.all(np.abs(resid) <= tol):
            break
        dens = np.exp((shape - 1.0) * np.log(xi) - xi - log_norm)
        step = np.where(dens > 0, resid / np.where(dens > 0, dens, 1.0), 0.0)
        x[inner] = np.maximum(xi - step, xi * 0.5)
    return x.reshape(np.shape(ps))


# --------------------------------------------------------------------------
# Uniform engines
# --------------------------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def _splitmix_fill(seed, out):
    x = seed
    for i in range(out.shape[0]):
        x += _GOLDEN
        z = x
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        out[i] = z ^ (z >> np.uint64(31))


@njit(cache=True)
def _xoshiro_next(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def _xoshiro_raw(s, out):
    for i in range(out.shape[0]):
        out[i] = _xoshiro_next(s)


@njit(cache=True)
def _xoshiro_doubles(s, out):
    scale = 1.0 / 9007199254740992.0  # 2**-53
    for i in range(out.shape[0]):
        out[i] = (_xoshiro_next(s) >> np.uint64(11)) * scale


class UniformEngine:
    """Seeded source of doubles on ``[0, 1)``.

    ``"xoshiro"`` is xoshiro256** seeded through splitmix64 and yields the
    same stream on every platform.  ``"standard"`` is numpy's PCG64.
    An engine is single-owner: give each concurrent task its own.
    """

    ALGORITHMS = ("standard", "xoshiro")

    def __init__(self, algorithm: str = "xoshiro", seed: int = 0):
        algorithm = algorithm.lower()
        if algorithm not in self.ALGORITHMS:
            raise ValueError(f"unknown uniform engine {algorithm!r}")
        self.algorithm = algorithm
        self.seed(seed)

    def seed(self, seed: int | None = None) -> int:
        if seed is None:
            return self._seed
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self._seed = seed
        if self.algorithm == "xoshiro":
            self._state = np.empty(4, dtype=np.uint64)
            _splitmix_fill(np.uint64(seed), self._state)
        else:
            self._gen = np.random.Generator(np.random.PCG64(seed))
        return seed

    def next_u64(self, count: int) -> np.ndarray:
        if self.algorithm == "xoshiro":
            out = np.empty(count, dtype=np.uint64)
            _xoshiro_raw(self._state, out)
            return out
        return self._gen.integers(0, 2**64, size=count, dtype=np.uint64, endpoint=False)

    def random(self, dims: Sequence[int] = (1,)) -> np.ndarray:
        """Flat array of ``prod(dims)`` doubles."""
        count = _count(dims)
        if self.algorithm == "xoshiro":
            out = np.empty(count, dtype=np.float64)
            _xoshiro_doubles(self._state, out)
            return out
        return self._gen.random(count)


def _count(dims: Sequence[int]) -> int:
    dims = list(dims) or [1]
    total = 1
    for d in dims:
        if int(d) < 1:
            raise ValueError(f"dimensions must be positive, got {dims}")
        total *= int(d)
    return total


def uniform_block(engine: UniformEngine, dims: Sequence[int] = (1,)) -> np.ndarray:
    """``prod(dims)`` uniforms from ``engine``; an empty ``dims`` means one draw."""
    return engine.random(list(dims) or [1])


def simulate_trunc(engine, spec: DistributionSpec, window: TruncationWindow = TruncationWindow(),
                   dims: Sequence[int] = (1,)) -> np.ndarray:
    """Inverse-CDF samples of ``spec`` conditioned on ``window``.

    ``engine`` is anything with a ``random(dims)`` method returning doubles in
    ``[0, 1)``.  The result is a flat array of ``prod(dims)`` samples, each
    inside the window.
    """
    spec = spec.validated()
    lo, hi = window.bounds(spec)
    u = np.asarray(engine.random(list(dims) or [1]), dtype=np.float64)
    probs = lo + u * (hi - lo)
    np.clip(probs, lo, hi, out=probs)

    at_right = probs >= hi
    at_left = probs <= lo
    inner = ~(at_left | at_right)
    out = np.empty_like(probs)
    if np.any(inner):
        out[inner] = inv_cdf(spec, probs[inner])
    # edges: return the bound itself, or the closest interior quantile when unbounded
    if np.any(at_left):
        out[at_left] = window.left if window.left is not None else _edge_quantile(spec, lo, up=True)
    if np.any(at_right):
        out[at_right] = window.right if window.right is not None else _edge_quantile(spec, hi, up=False)
    if window.left is not None or window.right is not None:
        np.clip(out, window.left if window.left is not None else -np.inf,
                window.right if window.right is not None else np.inf, out=out)
    return out


def _edge_quantile(spec, p, up):
    try:
        return inv_cdf(spec, p)
    except DomainError:
        return inv_cdf(spec, np.nextafter(p, 1.0 if up else 0.0))


def truncated_cdf(spec: DistributionSpec, window: TruncationWindow, x):
    """CDF of the truncated law, ``(F(x) - F(L)) / (F(R) - F(L))`` clipped to [0, 1]."""
    spec = spec.validated()
    lo, hi = window.bounds(spec)
    out = np.clip((np.asarray(cdf(spec, x)) - lo) / (hi - lo), 0.0, 1.0)
    return _scalar_or_array(x, out)
