"""Golden-section line search and a downhill bracketing helper."""

from __future__ import annotations

import math
from typing import Callable

from .errors import NonConvergence

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = 1.0 - INV_PHI


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = 500) -> float:
    """Minimize a unimodal ``f`` on [a, b]; stops once the bracket is narrower than ``tol``.

    Ties between the two probes shrink towards the lower probe, so a flat
    run of equal values collapses onto its left half rather than wandering.
    """
    a, b = min(a, b), max(a, b)
    c = a + INV_PHI2 * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    else:
        raise NonConvergence(f"golden-section bracket still {b - a:.3g} wide after {max_iter} steps")
    return c if fc <= fd else d


def bracket_downhill(
    f: Callable[[float], float], x0: float, step: float, grow: float = 2.0, max_steps: int = 60
) -> tuple[float, float]:
    """Walk downhill from ``x0`` until ``f`` rises; returns an interval holding a local minimum."""
    f0 = f(x0)
    fr, fl = f(x0 + step), f(x0 - step)
    if fr >= f0 and fl >= f0:
        return x0 - step, x0 + step
    direction = 1.0 if fr < fl else -1.0
    prev, cur, fcur = x0, x0 + direction * step, min(fr, fl)
    h = step
    for _ in range(max_steps):
        h *= grow
        nxt = cur + direction * h
        fnxt = f(nxt)
        if fnxt >= fcur:
            return (prev, nxt) if direction > 0 else (nxt, prev)
        prev, cur, fcur = cur, nxt, fnxt
    raise NonConvergence("could not bracket a minimum: function keeps decreasing")
