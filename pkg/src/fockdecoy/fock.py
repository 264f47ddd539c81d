"""Photon-number distributions and the two light sources.

All distributions are truncated adaptively: terms are generated by their
ratio recurrence and the series is cut once a geometric bound on the
remaining tail drops below ``TAIL_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "TAIL_TOL",
    "MAX_HERALD",
    "FockDistribution",
    "HeraldedSourceParams",
    "WcpParams",
    "conditional_distribution",
    "pdc_joint_distribution",
    "wcp_distribution",
    "sample_fock",
    "delta",
]

TAIL_TOL = 1e-12
NORM_TOL = 1e-9
MAX_HERALD = 12
_MAX_TERMS = 100_000


@dataclass(frozen=True)
class FockDistribution:
    """Probability vector over photon number ``n = 0..n_max``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-D sequence")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("every probability must lie in [0, 1]")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {p.sum():.15g}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    def __getitem__(self, n: int) -> float:
        if n < 0:
            raise IndexError(n)
        return float(self.probs[n]) if n <= self.n_max else 0.0

    def mean(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))

    def tail(self, n: int) -> float:
        """P(N > n)."""
        return float(self.probs[n + 1 :].sum())

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)


@dataclass(frozen=True)
class HeraldedSourceParams:
    """PDC source heralded by Alice's photon-number-resolving detector.

    ``lambda_sq`` is the squared parametric gain |lambda|^2; the phase of the
    gain never enters any photon-number statistic and is not stored.
    """

    lambda_sq: float
    eta_a: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lambda_sq < 1.0:
            raise ValueError(f"lambda_sq must lie in [0, 1), got {self.lambda_sq}")
        if not 0.0 <= self.eta_a <= 1.0:
            raise ValueError(f"eta_a must lie in [0, 1], got {self.eta_a}")


@dataclass(frozen=True)
class WcpParams:
    mu: float

    def __post_init__(self):
        if not self.mu >= 0.0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")


def delta(n: int) -> FockDistribution:
    """Number state |n><n| as a distribution."""
    p = np.zeros(n + 1)
    p[n] = 1.0
    return FockDistribution(p)


def _series(start: int, first: float, ratio: Callable[[int], float]) -> FockDistribution:
    """Build ``p[start], p[start+1], ...`` from ``p[n+1] = p[n] * ratio(n)``.

    ``ratio`` must be non-increasing once below one, which makes
    ``p[n] * r / (1 - r)`` an upper bound on the remaining tail.
    """
    terms = [first]
    n = start
    while True:
        r = ratio(n)
        if r == 0.0:
            break
        if r < 1.0 and terms[-1] * r / (1.0 - r) < TAIL_TOL:
            break
        terms.append(terms[-1] * r)
        n += 1
        if len(terms) > _MAX_TERMS:
            raise ValueError("distribution tail does not converge within the term budget")
    p = np.zeros(start + len(terms))
    p[start:] = terms
    return FockDistribution(p)


def conditional_distribution(src: HeraldedSourceParams, k: int) -> FockDistribution:
    """Photon-number law of Bob's mode given that Alice's PNRD registered ``k``.

    P(n|k) = C(n,k) x^(n-k) (1-x)^(k+1) for n >= k, with x = (1-eta_a)|lambda|^2.

    Raises:
        ValueError: ``k`` negative or larger than ``MAX_HERALD``, or x >= 1.
    """
    if k < 0:
        raise ValueError(f"herald count must be non-negative, got {k}")
    if k > MAX_HERALD:
        raise ValueError(f"herald counts above {MAX_HERALD} are not supported")
    x = src.lambda_sq * (1.0 - src.eta_a)
    if x >= 1.0:
        raise ValueError("lambda_sq * (1 - eta_a) >= 1: distribution is not normalizable")
    if x == 0.0:
        return delta(k)
    # C(n+1,k)/C(n,k) = (n+1)/(n+1-k)
    return _series(k, (1.0 - x) ** (k + 1), lambda n: x * (n + 1) / (n + 1 - k))


def pdc_joint_distribution(lambda_sq: float) -> FockDistribution:
    """Marginal photon number of either arm of a two-mode squeezed vacuum.

    Geometric law p(n) = (1 - |lambda|^2) |lambda|^(2n), mean |lambda|^2/(1-|lambda|^2).
    """
    if not 0.0 <= lambda_sq < 1.0:
        raise ValueError(f"lambda_sq must lie in [0, 1), got {lambda_sq}")
    if lambda_sq == 0.0:
        return delta(0)
    return _series(0, 1.0 - lambda_sq, lambda n: lambda_sq)


def wcp_distribution(w: WcpParams | float) -> FockDistribution:
    """Poisson photon statistics of a weak coherent pulse."""
    mu = w.mu if isinstance(w, WcpParams) else WcpParams(float(w)).mu
    if mu == 0.0:
        return delta(0)
    return _series(0, math.exp(-mu), lambda n: mu / (n + 1))


def sample_fock(d: FockDistribution, rng: np.random.Generator, size=None):
    """Draw photon numbers from ``d`` by inverse-CDF lookup.

    Returns a Python int when ``size`` is None, otherwise an int64 array.
    """
    cdf = d.cdf()
    u = rng.random(size)
    n = np.searchsorted(cdf, u, side="right")
    n = np.minimum(n, d.n_max)
    if size is None:
        return int(n)
    return n.astype(np.int64)
