"""Alice's photon-number-resolving herald detector and Bob's click detector."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SpdParams", "IDEAL_SPD", "pnrd_povm_prob", "pnrd_sample", "spd_click", "click_probability"]


@dataclass(frozen=True)
class SpdParams:
    """Binary (click / no-click) detector.

    Defaults describe an ideal detector. With ``dark_prob == 0`` any channel
    efficiency recovered from Bob's clicks is the composite ``eta_c * eta_b``.
    """

    eta_b: float = 1.0
    dark_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta_b <= 1.0:
            raise ValueError(f"eta_b must lie in [0, 1], got {self.eta_b}")
        if not 0.0 <= self.dark_prob < 1.0:
            raise ValueError(f"dark_prob must lie in [0, 1), got {self.dark_prob}")


IDEAL_SPD = SpdParams()


def pnrd_povm_prob(n: int, k: int, eta_a: float) -> float:
    """Binomial POVM weight C(n,k) eta^k (1-eta)^(n-k); zero when k > n."""
    if n < 0 or k < 0:
        raise ValueError("photon and herald counts must be non-negative")
    if k > n:
        return 0.0
    return math.comb(n, k) * eta_a**k * (1.0 - eta_a) ** (n - k)


def pnrd_sample(n_true, eta_a: float, rng: np.random.Generator):
    """Herald count registered for ``n_true`` incident photons, k ~ Binomial(n, eta_a)."""
    scalar = np.ndim(n_true) == 0
    k = rng.binomial(np.asarray(n_true, dtype=np.int64), eta_a)
    return int(k) if scalar else np.asarray(k, dtype=np.int64)


def click_probability(m_arrived, p: SpdParams):
    """1 - (1 - dark) (1 - eta_b)^m."""
    return 1.0 - (1.0 - p.dark_prob) * (1.0 - p.eta_b) ** np.asarray(m_arrived, dtype=float)


def spd_click(m_arrived, p: SpdParams, rng: np.random.Generator):
    scalar = np.ndim(m_arrived) == 0
    m = np.asarray(m_arrived, dtype=np.int64)
    if np.any(m < 0):
        raise ValueError("photon numbers must be non-negative")
    clicked = rng.random(m.shape) < click_probability(m, p)
    return bool(clicked) if scalar else clicked
