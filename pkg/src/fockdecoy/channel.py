"""Channel transmittivity per photon number: pure loss, or a block-and-boost PNS attack."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "LossOnly",
    "PnsAttack",
    "ChannelScenario",
    "fock_transmittivity",
    "loss_ratio_identity",
    "sample_arrival",
    "arrival_distribution",
]

# Loss alone can never push eta1/eta2 below 1/2.
LOSS_RATIO_FLOOR = 0.5


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class LossOnly:
    """Each photon independently survives with probability ``eta_c``."""

    eta_c: float

    def __post_init__(self):
        _check_prob("eta_c", self.eta_c)


@dataclass(frozen=True)
class PnsAttack:
    """Eve blocks single photons (kept with ``kappa_1``) and boosts multiphoton pulses.

    ``kappa_m`` is the transmittivity shared by every n >= 2; it is the same
    quantity some texts write as kappa_2.
    """

    kappa_1: float
    kappa_m: float

    def __post_init__(self):
        _check_prob("kappa_1", self.kappa_1)
        _check_prob("kappa_m", self.kappa_m)

    @property
    def kappa_2(self) -> float:
        return self.kappa_m

    @property
    def ratio(self) -> float:
        return self.kappa_1 / self.kappa_m if self.kappa_m > 0 else math.inf

    @property
    def effective(self) -> bool:
        """True when the transmittivity ratio is one that loss cannot produce."""
        return self.ratio < LOSS_RATIO_FLOOR


ChannelScenario = Union[LossOnly, PnsAttack]


def fock_transmittivity(c: ChannelScenario, n: int) -> float:
    """Probability that an ``n``-photon pulse reaches Bob with at least one photon."""
    if n < 0:
        raise ValueError(f"photon number must be non-negative, got {n}")
    if n == 0:
        return 0.0
    if isinstance(c, LossOnly):
        if c.eta_c == 1.0:
            return 1.0
        # 1 - (1 - eta)^n without cancellation at small eta
        return -math.expm1(n * math.log1p(-c.eta_c))
    if isinstance(c, PnsAttack):
        return c.kappa_1 if n == 1 else c.kappa_m
    raise TypeError(f"unknown channel scenario {c!r}")


def loss_ratio_identity(eta_c: float) -> float:
    """eta^(1) / eta^(2) = 1 / (2 - eta_c) for a lossy channel; always in [0.5, 1]."""
    _check_prob("eta_c", eta_c)
    return 1.0 / (2.0 - eta_c)


def arrival_distribution(c: ChannelScenario, n_sent: int) -> np.ndarray:
    """P(m photons arrive | n_sent sent), as a vector over m = 0..n_sent."""
    p = np.zeros(n_sent + 1)
    if n_sent == 0:
        p[0] = 1.0
        return p
    if isinstance(c, LossOnly):
        eta = c.eta_c
        for m in range(n_sent + 1):
            p[m] = math.comb(n_sent, m) * eta**m * (1.0 - eta) ** (n_sent - m)
        return p
    if isinstance(c, PnsAttack):
        kappa = c.kappa_1 if n_sent == 1 else c.kappa_m
        forwarded = 1 if n_sent == 1 else n_sent - 1
        p[0] = 1.0 - kappa
        p[forwarded] += kappa
        return p
    raise TypeError(f"unknown channel scenario {c!r}")


def sample_arrival(c: ChannelScenario, n_sent, rng: np.random.Generator):
    """Sample the photon number reaching Bob.

    Loss thins the pulse binomially. Under attack a single photon passes with
    probability ``kappa_1``; for n >= 2 Eve keeps one photon and forwards the
    remaining n - 1 losslessly with probability ``kappa_m``.

    ``n_sent`` may be an int or an integer array; the result has the same shape.
    """
    scalar = np.ndim(n_sent) == 0
    n = np.asarray(n_sent, dtype=np.int64)
    if np.any(n < 0):
        raise ValueError("photon numbers must be non-negative")
    if isinstance(c, LossOnly):
        out = rng.binomial(n, c.eta_c)
    elif isinstance(c, PnsAttack):
        kappa = np.where(n == 1, c.kappa_1, c.kappa_m)
        passed = rng.random(n.shape) < kappa
        forwarded = np.where(n >= 2, n - 1, n)
        out = np.where(passed & (n > 0), forwarded, 0)
    else:
        raise TypeError(f"unknown channel scenario {c!r}")
    out = np.asarray(out, dtype=np.int64)
    return int(out) if scalar else out
