import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq, minimize_scalar

from fockdecoy.channel import LossOnly, PnsAttack
from fockdecoy.errors import NotUnimodal
from fockdecoy.mu import (
    MeritInputs,
    limiting_mu_small_loss,
    merit,
    mu_curve,
    optimal_mu,
    pns_family,
)


def brute_merit(mu, kappa):
    """Series sum with plain floats; kappa(n) is the n-photon transmittivity."""
    p1 = mu * math.exp(-mu) * kappa(1)
    many, n, term = 0.0, 2, math.exp(-mu) * mu * mu / 2
    while term > 1e-15 * 1e-3 or n < 4:
        many += term * kappa(n)
        n += 1
        term *= mu / n
    return p1 - many


def loss_t(eta):
    return lambda n: 1 - (1 - eta) ** n


def pns_t(k1, km):
    return lambda n: k1 if n == 1 else km


scenarios = st.one_of(
    st.floats(1e-4, 1.0).map(lambda e: (LossOnly(e), loss_t(e))),
    st.tuples(st.floats(0, 1), st.floats(0, 1)).map(lambda k: (PnsAttack(*k), pns_t(*k))),
)


def test_merit_examples():
    assert merit(MeritInputs(0.0, LossOnly(0.3))) == 0.0
    assert merit(MeritInputs(0.0, PnsAttack(0.1, 0.9))) == 0.0
    assert merit(MeritInputs(0.5, LossOnly(1.0))) == pytest.approx(2 * 0.5 * math.exp(-0.5) + math.exp(-0.5) - 1, abs=1e-12)
    assert merit(MeritInputs(0.5, LossOnly(1.0))) == pytest.approx(0.2130613, abs=1e-7)
    assert merit(MeritInputs(0.5, PnsAttack(0.0, 1.0))) == pytest.approx(-0.0902040, abs=1e-7)


@given(st.floats(0.0, 2.0), scenarios)
@settings(max_examples=300, deadline=None)
def test_merit_matches_brute_force(mu, sc):
    scenario, kappa = sc
    assert merit(MeritInputs(mu, scenario)) == pytest.approx(brute_merit(mu, kappa), abs=1e-10)


def test_negative_mu_rejected():
    with pytest.raises(ValueError):
        MeritInputs(-0.1, LossOnly(1.0))


@pytest.mark.parametrize(
    "scenario",
    [LossOnly(1.0), LossOnly(0.5), LossOnly(0.01), LossOnly(1e-6), PnsAttack(0.3, 0.9), PnsAttack(0.01, 0.9)],
)
def test_stationarity_at_optimum(scenario):
    opt = optimal_mu(scenario)
    h = 1e-5
    d = lambda m: merit(MeritInputs(m, scenario))
    deriv = (d(opt.mu_star + h) - d(opt.mu_star - h)) / (2 * h)
    assert abs(deriv) < 1e-6 * max(1.0, abs(opt.d_star))
    assert opt.d_star == pytest.approx(d(opt.mu_star), abs=1e-15)


def test_optimum_matches_scipy_bounded_search():
    for scenario in [LossOnly(0.7), LossOnly(0.05), PnsAttack(0.2, 0.8)]:
        ref = minimize_scalar(lambda m: -merit(MeritInputs(m, scenario)), bounds=(0, 2), method="bounded",
                              options={"xatol": 1e-10})
        assert optimal_mu(scenario).mu_star == pytest.approx(ref.x, abs=1e-6)


def test_anchor_lossless():
    assert optimal_mu(LossOnly(1.0)).mu_star == pytest.approx(0.5, abs=1e-5)
    assert mu_curve("loss", [1.0])[0][1].mu_star == pytest.approx(0.5, abs=1e-5)


def test_anchor_small_loss_limit():
    root = brentq(lambda m: 2 * math.exp(-m) * (1 - m) - 1, 0.0, 1.0, xtol=1e-15)
    assert limiting_mu_small_loss() == pytest.approx(root, abs=1e-12)
    assert optimal_mu(LossOnly(1e-6)).mu_star == pytest.approx(root, abs=1e-4)
    assert abs(root - 0.316) < 0.002


def test_loss_curve_monotone_and_bounded():
    rows = mu_curve("loss", np.linspace(0.01, 1.0, 100))
    mus = [o.mu_star for _, o in rows]
    assert all(b >= a - 1e-7 for a, b in zip(mus, mus[1:]))
    assert min(mus) > 0.31 and max(mus) <= 0.5 + 1e-6
    assert all(o.flag == "ok" for _, o in rows)


@pytest.mark.parametrize("kappa_m", [1.0, 0.9, 0.5])
def test_pns_curve_closed_form_and_monotone(kappa_m):
    # T(n>=2) is flat, so D = e^-mu (k1 mu - km (e^mu - 1 - mu)) and the optimum solves mu/(1-mu) = k1/km
    grid = np.linspace(0.0, 1.0, 51)
    rows = mu_curve("pns", grid, kappa_m=kappa_m)
    mus = [o.mu_star for _, o in rows]
    assert all(b >= a - 1e-7 for a, b in zip(mus, mus[1:]))
    for r, o in rows[1:]:
        assert o.mu_star == pytest.approx(r / (1 + r), abs=1e-6)
    assert rows[0][1].degenerate and rows[0][1].mu_star == 0.0


def test_pns_degenerate_below_threshold():
    assert optimal_mu(pns_family(1e-7)).flag == "degenerate"
    assert optimal_mu(pns_family(0.0)).flag == "degenerate"
    tiny = optimal_mu(pns_family(1e-4))
    assert tiny.flag == "ok" and tiny.mu_star == pytest.approx(1e-4 / (1 + 1e-4), abs=1e-6)


@pytest.mark.parametrize("eta_c", [0.01, 0.05, 0.1, 0.3, 0.5, 0.8, 1.0])
def test_matched_attack_close_to_loss_optimum(eta_c):
    eta2 = 1 - (1 - eta_c) ** 2
    attack = PnsAttack(kappa_1=eta2 / (2 - eta_c), kappa_m=eta2)
    assert optimal_mu(attack).mu_star == pytest.approx(optimal_mu(LossOnly(eta_c)).mu_star, abs=0.02)


def test_unknown_family():
    with pytest.raises(ValueError):
        mu_curve("dephasing", [0.1])
    with pytest.raises(ValueError):
        mu_curve("loss", [])


def test_bimodal_merit_is_rejected(monkeypatch):
    import fockdecoy.mu as mu_mod

    monkeypatch.setattr(mu_mod, "_merit_grid", lambda grid, sc: np.cos(6 * np.pi * grid))
    with pytest.raises(NotUnimodal):
        optimal_mu(LossOnly(0.5))
