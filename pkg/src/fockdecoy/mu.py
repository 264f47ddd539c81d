"""Choice of WCP mean photon number from the figure of merit D = p_B(1) - p_B(>1).

p_B(1) is the probability that Alice emits exactly one photon and it
survives; p_B(>1) the probability that she emits two or more and Bob
receives a non-vacuum pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .channel import ChannelScenario, LossOnly, PnsAttack, fock_transmittivity
from .errors import NotUnimodal
from .fock import TAIL_TOL, WcpParams
from .optimize import golden_section

__all__ = [
    "MU_MAX",
    "MU_TOL",
    "MeritInputs",
    "MuOptimum",
    "merit",
    "merit_terms",
    "optimal_mu",
    "mu_curve",
    "loss_family",
    "pns_family",
    "limiting_mu_small_loss",
]

MU_MAX = 2.0
MU_TOL = 1e-6
PRESCAN_POINTS = 2000


@dataclass(frozen=True)
class MeritInputs:
    mu: float
    scenario: ChannelScenario

    def __post_init__(self):
        WcpParams(self.mu)


@dataclass(frozen=True)
class MuOptimum:
    mu_star: float
    d_star: float
    degenerate: bool = False

    @property
    def flag(self) -> str:
        return "degenerate" if self.degenerate else "ok"


def merit_terms(m: MeritInputs) -> tuple[float, float]:
    """(p_B(1), p_B(>1)) for a Poisson source through ``m.scenario``.

    The series stops once a geometric bound on the remaining tail is below
    ``TAIL_TOL`` relative to the terms accumulated so far; an absolute cutoff
    would silently drop the whole multiphoton sum when mu is tiny.
    """
    mu, c = m.mu, m.scenario
    if mu == 0.0:
        return 0.0, 0.0
    p1 = mu * math.exp(-mu)
    one = p1 * fock_transmittivity(c, 1)
    term, n, many = p1, 1, 0.0
    while True:
        term *= mu / (n + 1)
        n += 1
        many += term * fock_transmittivity(c, n)
        r = mu / (n + 1)
        if term == 0.0 or (r < 1.0 and term * r / (1.0 - r) < TAIL_TOL * (one + many)):
            break
    return one, many


def merit(m: MeritInputs) -> float:
    one, many = merit_terms(m)
    return one - many


def _merit_grid(mu: np.ndarray, scenario: ChannelScenario, n_terms: int = 80) -> np.ndarray:
    """Vectorized merit on a grid of mu <= MU_MAX; 80 terms leave a negligible Poisson tail."""
    n = np.arange(n_terms)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, n_terms)))))
    logmu = np.log(np.maximum(mu, 1e-300))[:, None]
    pois = np.exp(n * logmu - mu[:, None] - log_fact)
    t = np.array([fock_transmittivity(scenario, k) for k in n])
    return pois[:, 1] * t[1] - pois[:, 2:] @ t[2:]


def _prescan(values):
    diffs = np.diff(values)
    # ignore steps lost in rounding
    scale = 64 * np.finfo(float).eps * max(1e-300, float(np.max(np.abs(values))))
    signs = np.sign(np.where(np.abs(diffs) <= scale, 0.0, diffs))
    signs = signs[signs != 0]
    if np.count_nonzero(np.diff(signs) != 0) > 1 or (signs.size and signs[0] < 0 and np.any(signs > 0)):
        raise NotUnimodal("merit has more than one local maximum on the search interval")
    return values


def optimal_mu(scenario: ChannelScenario, mu_max: float = MU_MAX, tol: float = MU_TOL) -> MuOptimum:
    """Maximize D over mu in [0, mu_max] by golden-section search.

    A 2000-point grid pre-scan checks unimodality and seeds the bracket.
    If no resolvable mu > 0 gives D > 0 (an attack so aggressive that
    sending nothing beats any intensity), returns mu = 0 flagged degenerate.

    Raises:
        NotUnimodal: the pre-scan finds more than one local maximum.
    """
    f = lambda mu: merit(MeritInputs(mu, scenario))
    grid = np.linspace(0.0, mu_max, PRESCAN_POINTS + 1)
    values = _prescan(_merit_grid(grid, scenario))
    i = int(np.argmax(values))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    mu = golden_section(lambda x: -f(x), a, b, min(tol, 1e-9))
    d = f(mu)
    if d <= 0.0 or mu < tol:
        return MuOptimum(0.0, 0.0, degenerate=True)
    return MuOptimum(float(mu), float(d))


def loss_family(eta_c: float) -> LossOnly:
    return LossOnly(eta_c)


def pns_family(ratio: float, kappa_m: float = 1.0) -> PnsAttack:
    """Attack with kappa_1 / kappa_m = ``ratio`` at fixed ``kappa_m``."""
    return PnsAttack(kappa_1=ratio * kappa_m, kappa_m=kappa_m)


def mu_curve(family: str, grid: Iterable[float], kappa_m: float = 1.0) -> list[tuple[float, MuOptimum]]:
    """Optimal mu over a parameter grid.

    ``family`` is ``"loss"`` (grid of eta_c) or ``"pns"`` (grid of
    kappa_1 / kappa_m at fixed ``kappa_m``). Output order follows ``grid``.
    """
    values = [float(x) for x in grid]
    if not values:
        raise ValueError("grid must be non-empty")
    if family == "loss":
        make = loss_family
    elif family == "pns":
        make = lambda r: pns_family(r, kappa_m)
    else:
        raise ValueError(f"unknown family {family!r}; expected 'loss' or 'pns'")
    return [(x, optimal_mu(make(x))) for x in values]


def limiting_mu_small_loss(tol: float = 1e-14) -> float:
    """Root of 2 exp(-mu) (1 - mu) = 1, the optimum as eta_c -> 0, by bisection."""
    g = lambda mu: 2.0 * math.exp(-mu) * (1.0 - mu) - 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
