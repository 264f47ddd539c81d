"""Tables behind the standard figures: conditional photon statistics, HOM
visibility versus bandwidth ratio, and optimal WCP intensity curves."""

from __future__ import annotations

import numpy as np

from .fock import HeraldedSourceParams, conditional_distribution
from .hom import visibility_from_ratio
from .mu import limiting_mu_small_loss, mu_curve, optimal_mu
from .channel import LossOnly

# (panel, eta_a, |lambda|) for a heralded single photon
FOCK_PANELS = (("a", 0.8, 0.5), ("b", 0.1, 0.1), ("c", 0.1, 0.5))
REFERENCE_SMALL_LOSS_BOUND = 0.316


def fock_panels(k: int = 1, n_show: int = 8) -> list[dict]:
    rows = []
    for panel, eta_a, lam in FOCK_PANELS:
        d = conditional_distribution(HeraldedSourceParams(lam * lam, eta_a), k)
        for n in range(n_show + 1):
            rows.append({"panel": panel, "eta_a": eta_a, "lambda_abs": lam, "k": k, "n": n, "probability": d[n]})
    return rows


def visibility_curve(points: int = 201, s_min: float = 0.01, s_max: float = 100.0) -> list[dict]:
    s = np.geomspace(s_min, s_max, points)
    return [{"s": float(x), "visibility": float(v)} for x, v in zip(s, visibility_from_ratio(s))]


def loss_mu_curve(points: int = 100) -> list[dict]:
    grid = np.linspace(1.0 / points, 1.0, points)
    return [
        {"param": x, "mu_star": o.mu_star, "D_star": o.d_star, "flag": o.flag}
        for x, o in mu_curve("loss", grid)
    ]


def pns_mu_curve(points: int = 101, kappa_m: float = 1.0) -> list[dict]:
    grid = np.linspace(0.0, 1.0, points)
    return [
        {"param": x, "mu_star": o.mu_star, "D_star": o.d_star, "flag": o.flag}
        for x, o in mu_curve("pns", grid, kappa_m=kappa_m)
    ]


def small_loss_limit(eta_c: float = 1e-6) -> list[dict]:
    """Optimizer output at vanishing efficiency next to the analytic limit and the reference bound."""
    root = limiting_mu_small_loss()
    opt = optimal_mu(LossOnly(eta_c)).mu_star
    return [
        {"quantity": "limit_root_bisection", "value": root},
        {"quantity": f"optimizer_eta_c_{eta_c:g}", "value": opt},
        {"quantity": "reference_bound", "value": REFERENCE_SMALL_LOSS_BOUND},
        {"quantity": "reference_minus_root", "value": REFERENCE_SMALL_LOSS_BOUND - root},
    ]
