"""Hong-Ou-Mandel calibration of the heralded source against the WCP.

Both inputs are modelled as pure single-photon wavepackets with Gaussian
spectral amplitudes. The coincidence rate is evaluated exactly as

    R_c = 1/2 - g * s1*s2 / (s1^2 + s2^2) * exp(-((s1*s2*t)^2 + 4 (w1 - w2)^2) / (2 (s1^2 + s2^2)))

where ``g`` in (0, 1] is an optional interference-degradation factor (a proxy
for WCP multiphoton content or spectral impurity). With bandwidths in angular
frequency and ``t`` in time, both terms of the exponent are dimensionless;
the delay scale of the dip is sqrt(s1^2 + s2^2) / (s1 s2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np

from .errors import NonConvergence
from .optimize import bracket_downhill, golden_section

__all__ = [
    "HomParams",
    "coincidence_rate",
    "visibility",
    "apparent_visibility",
    "visibility_from_ratio",
    "calibrate",
    "noisy_calibrate",
    "ADJUSTABLE",
]

ADJUSTABLE = ("t", "sigma1")
R_MAX = 0.5


@dataclass(frozen=True)
class HomParams:
    sigma1: float
    sigma2: float
    omega1: float = 0.0
    omega2: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError("bandwidths must be positive")

    @property
    def s(self) -> float:
        """Bandwidth ratio sigma1 / sigma2."""
        return self.sigma1 / self.sigma2

    @property
    def dip_width(self) -> float:
        """Delay scale of the dip, sqrt(s1^2 + s2^2) / (s1 s2)."""
        return math.hypot(self.sigma1, self.sigma2) / (self.sigma1 * self.sigma2)


def _log_dip(p: HomParams, gamma: float = 1.0) -> float:
    s1, s2 = p.sigma1, p.sigma2
    den = s1 * s1 + s2 * s2
    expo = ((s1 * s2 * p.t) ** 2 + 4.0 * (p.omega1 - p.omega2) ** 2) / (2.0 * den)
    return math.log(gamma) + math.log(s1 * s2 / den) - expo


def coincidence_rate(p: HomParams, gamma: float = 1.0) -> float:
    """Normalized coincidence probability; 0 for perfect bunching, 1/2 for distinguishable photons."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    return R_MAX - math.exp(_log_dip(p, gamma))


def visibility(p: HomParams, gamma: float = 1.0) -> float:
    """Dip visibility (max R_c - min R_c) / max R_c.

    The maximum is the distinguishable-photon asymptote 1/2 and the minimum
    sits at zero delay, so ``p.t`` is ignored.
    """
    return 1.0 - coincidence_rate(replace(p, t=0.0), gamma) / R_MAX


def apparent_visibility(p: HomParams, gamma: float = 1.0) -> float:
    """Coincidence suppression 1 - R_c / (1/2) at the delay actually set in ``p``."""
    return 1.0 - coincidence_rate(p, gamma) / R_MAX


def visibility_from_ratio(s):
    """2 s / (1 + s^2): visibility for equal centre frequencies at bandwidth ratio ``s``."""
    s = np.asarray(s, dtype=float)
    return 2.0 * s / (1.0 + s * s)


def _check_adjustable(adjustable: Iterable[str]) -> tuple[str, ...]:
    adj = tuple(adjustable)
    if not adj:
        raise ValueError("at least one of 't', 'sigma1' must be adjustable")
    bad = set(adj) - set(ADJUSTABLE)
    if bad:
        raise ValueError(f"unknown adjustable parameters {sorted(bad)}")
    return tuple(a for a in ADJUSTABLE if a in adj)


class _Coord:
    """One coordinate of the search, in the variable the line search works on."""

    def __init__(self, name):
        self.name = name

    def get(self, p):
        return p.t if self.name == "t" else math.log(p.sigma1)

    def set(self, p, x):
        return replace(p, t=x) if self.name == "t" else replace(p, sigma1=math.exp(x))

    def step(self, p):
        return p.dip_width if self.name == "t" else 0.5

    def changed(self, old, new, rel):
        if self.name == "t":
            return abs(new.t - old.t) > rel * old.dip_width
        return abs(new.sigma1 - old.sigma1) > rel * old.sigma1


def _line_min(obj, p, coord, tol):
    f = lambda x: obj(coord.set(p, x))
    x0 = coord.get(p)
    a, b = bracket_downhill(f, x0, coord.step(p))
    x = golden_section(f, a, b, tol * coord.step(p))
    # never accept a probe that does worse than where we started
    return coord.set(p, x) if f(x) < f(x0) else p


def calibrate(
    initial: HomParams,
    adjustable: Iterable[str] = ADJUSTABLE,
    *,
    gamma: float = 1.0,
    rel_tol: float = 1e-9,
    max_sweeps: int = 200,
    trace: Optional[list] = None,
) -> HomParams:
    """Minimize coincidences (maximize visibility) by coordinate descent.

    Each sweep runs a golden-section line search on every adjustable
    coordinate: the delay ``t`` and ``log(sigma1)``. The objective is the
    negative log of the dip depth, which is exact and well conditioned even
    far out in the tails where R_c itself is indistinguishable from 1/2.

    If ``trace`` is a list, one ``(sweep, t, sigma1, apparent_visibility)``
    row is appended per sweep, starting with sweep 0 for ``initial``.

    Raises:
        NonConvergence: no fixed point after ``max_sweeps`` sweeps.
    """
    coords = [_Coord(n) for n in _check_adjustable(adjustable)]
    obj = lambda q: -_log_dip(q, gamma)
    p = initial
    if trace is not None:
        trace.append((0, p.t, p.sigma1, apparent_visibility(p, gamma)))
    for sweep in range(1, max_sweeps + 1):
        start, f_start = p, obj(p)
        for c in coords:
            p = _line_min(obj, p, c, rel_tol * 0.1)
        if trace is not None:
            trace.append((sweep, p.t, p.sigma1, apparent_visibility(p, gamma)))
        moved = any(c.changed(start, p, rel_tol) for c in coords)
        stalled = obj(p) >= f_start - 4 * np.finfo(float).eps * max(1.0, abs(f_start))
        if not moved or stalled:
            return p
    raise NonConvergence(f"calibration did not converge in {max_sweeps} sweeps")


def noisy_calibrate(
    initial: HomParams,
    counts_per_point: Optional[int],
    rng: np.random.Generator,
    adjustable: Iterable[str] = ADJUSTABLE,
    *,
    gamma: float = 1.0,
    line_tol: float = 1e-3,
    max_sweeps: int = 50,
    trace: Optional[list] = None,
) -> HomParams:
    """Calibrate from measured coincidence fractions.

    Every evaluation draws Binomial(counts_per_point, R_c) coincidences. A
    sweep counts as converged when re-measuring before and after it shows an
    improvement smaller than the statistical resolution sqrt(R_c / counts).
    ``counts_per_point=None`` evaluates R_c exactly (the infinite-count limit).

    Raises:
        NonConvergence: no converged sweep within ``max_sweeps``.
    """
    if counts_per_point is not None and counts_per_point < 100:
        raise ValueError("counts_per_point must be at least 100")
    coords = [_Coord(n) for n in _check_adjustable(adjustable)]

    if counts_per_point is None:
        measure = lambda q: coincidence_rate(q, gamma)
        resolution = lambda r: 0.0
    else:
        n = int(counts_per_point)
        measure = lambda q: rng.binomial(n, coincidence_rate(q, gamma)) / n
        resolution = lambda r: math.sqrt(max(r, 1.0 / n) / n)

    p = initial
    r_prev = measure(p)
    if trace is not None:
        trace.append((0, p.t, p.sigma1, 1.0 - r_prev / R_MAX))
    for sweep in range(1, max_sweeps + 1):
        for c in coords:
            f = lambda x, c=c: measure(c.set(p, x))
            a, b = bracket_downhill(f, c.get(p), c.step(p))
            p = c.set(p, golden_section(f, a, b, line_tol * c.step(p)))
        r_now = measure(p)
        if trace is not None:
            trace.append((sweep, p.t, p.sigma1, 1.0 - r_now / R_MAX))
        if r_prev - r_now <= resolution(r_prev):
            return p
        r_prev = r_now
    raise NonConvergence(f"noisy calibration did not converge in {max_sweeps} sweeps")
