"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import json
import math
import time

import numpy as np

from fockdecoy.channel import LossOnly, PnsAttack, fock_transmittivity, sample_arrival
from fockdecoy.cli import main
from fockdecoy.detection import SpdParams
from fockdecoy.estimation import detect_pns, transmittivity_ratio
from fockdecoy.fock import HeraldedSourceParams, conditional_distribution
from fockdecoy.hom import HomParams, calibrate, coincidence_rate, noisy_calibrate, visibility_from_ratio
from fockdecoy.mu import limiting_mu_small_loss, mu_curve, optimal_mu
from fockdecoy.rng import make_stream
from fockdecoy.session import SessionConfig, decoy_ledger, throughput

SESSIONS = 1000
PER_TAG = 10**5


def test_criterion_1_normalization_and_limits(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for lam in (0.01, 0.25, 0.5, 0.81):
        for eta in (0.1, 0.5, 0.8, 0.99):
            for k in (0, 1, 2, 5):
                worst = max(worst, abs(conditional_distribution(HeraldedSourceParams(lam, eta), k).probs.sum() - 1))
    tv = []
    for src in (HeraldedSourceParams(0.5, 0.999), HeraldedSourceParams(1e-4, 0.5)):
        for k in (0, 1, 2, 5):
            d = conditional_distribution(src, k)
            tv.append(0.5 * (np.abs(d.probs).sum() - d[k] + abs(1 - d[k])))
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and max(tv) < 0.01 and dt < 1.0
    criterion(1, ok, f"max |sum-1|={worst:.2e}, max TV={max(tv):.2e}, {dt:.3f}s")


def test_criterion_2_conditional_panels(criterion):
    # closed form (1-x)^2 for P(1|1), plus ordering between panels
    # quoted P(1|1) values with the number of decimals they are printed to
    cases = [(0.8, 0.5, 0.9025, 4), (0.1, 0.1, 0.98208, 5), (0.1, 0.5, 0.600625, 6)]
    errs, p1, quoted = [], [], True
    for eta, lam, value, places in cases:
        x = (1 - eta) * lam * lam
        d = conditional_distribution(HeraldedSourceParams(lam * lam, eta), 1)
        closed = [math.comb(n, 1) * x ** (n - 1) * (1 - x) ** 2 for n in range(1, 12)]
        errs.append(max(abs(d[n] - c) for n, c in zip(range(1, 12), closed)))
        quoted &= round(d[1], places) == value
        p1.append(d[1])
    # panel (b) is the purest, panel (c) the most contaminated
    order = p1[1] > p1[0] > p1[2]
    ok = max(errs) < 1e-9 and quoted and order
    criterion(2, ok, f"P(1|1)={p1[0]:.9f},{p1[1]:.9f},{p1[2]:.9f}; max err {max(errs):.1e}; ordering b>a>c {order}")


def test_criterion_3_transmittivity_monte_carlo(criterion):
    t0 = time.perf_counter()
    rng = make_stream(3, "acceptance-transmittivity")
    n_pulses, worst = 10**6, 0.0
    for eta in (0.01, 0.1, 0.5):
        for n in (1, 2, 3):
            arrived = sample_arrival(LossOnly(eta), np.full(n_pulses, n), rng)
            rate = np.count_nonzero(arrived) / n_pulses
            p = fock_transmittivity(LossOnly(eta), n)
            worst = max(worst, abs(rate - p) / math.sqrt(p * (1 - p) / n_pulses))
    eta2 = fock_transmittivity(LossOnly(0.1), 2)
    dt = time.perf_counter() - t0
    ok = worst <= 3 and abs(eta2 - 0.19) < 1e-15 and dt < 10
    criterion(3, ok, f"max |z|={worst:.2f} over 9 cells, eta2(0.1)={eta2!r}, {dt:.2f}s")


def _sessions(scenario, name):
    src, spd = HeraldedSourceParams(0.25, 1.0), SpdParams()
    out = []
    for seed in range(SESSIONS):
        led = decoy_ledger(src, scenario, spd, PER_TAG, make_stream(seed, name))
        v = detect_pns(led, src, spd, alpha=0.01)
        out.append((v.attack_detected, transmittivity_ratio(v)))
    return out


def test_criterion_4_and_8_detection_power_and_ratio_band(criterion):
    t0 = time.perf_counter()
    loss = _sessions(LossOnly(0.1), "acceptance-loss")
    attack = _sessions(PnsAttack(0.01, 0.9), "acceptance-pns")
    dt = time.perf_counter() - t0
    false_alarm = sum(a for a, _ in loss) / SESSIONS
    power = sum(a for a, _ in attack) / SESSIONS
    ok4 = false_alarm <= 0.02 and power == 1.0 and dt < 120
    band_loss = sum(r[2] >= 0.5 and r[0] <= 1.0 for _, r in loss) / SESSIONS
    band_attack = sum(r[2] < 0.5 for _, r in attack) / SESSIONS
    ok8 = band_loss == 1.0 and band_attack == 1.0
    try:
        criterion(4, ok4, f"false alarm {false_alarm:.3f} (<=0.02), detection {power:.3f} (=1), {dt:.1f}s")
    finally:
        criterion(8, ok8, f"loss CI meets [0.5,1] in {band_loss:.3f}, attack CI below 0.5 in {band_attack:.3f}")


def test_criterion_5_mu_anchors(criterion):
    mu1 = optimal_mu(LossOnly(1.0)).mu_star
    root = limiting_mu_small_loss()
    mu_small = optimal_mu(LossOnly(1e-6)).mu_star
    curve = [o.mu_star for _, o in mu_curve("loss", np.linspace(0.01, 1.0, 100))]
    mono = all(b >= a - 1e-7 for a, b in zip(curve, curve[1:]))
    ok = abs(mu1 - 0.5) <= 1e-4 and abs(mu_small - root) <= 1e-4 and abs(mu_small - 0.316) <= 0.002 and mono
    criterion(5, ok, f"mu*(1)={mu1:.7f}, mu*(1e-6)={mu_small:.7f}, root={root:.7f}, ref 0.316 diff "
                     f"{0.316 - mu_small:+.4f}, monotone {mono}")


def _scan_visibility(s):
    w = HomParams(s, 1.0).dip_width
    ts = np.concatenate([np.linspace(-40 * w, 40 * w, 6001), [0.0]])
    rc = np.array([coincidence_rate(HomParams(s, 1.0, t=t)) for t in ts])
    return (rc.max() - rc.min()) / rc.max()


def test_criterion_6_hom(criterion):
    t0 = time.perf_counter()
    vis_err = max(abs(_scan_visibility(s) - float(visibility_from_ratio(s))) for s in (0.1, 0.25, 0.5, 1, 2, 4))
    rng = make_stream(6, "acceptance-hom-starts")
    worst = 0.0
    for _ in range(20):
        start = HomParams(float(np.exp(rng.uniform(-2, 2))), 1.0, t=float(rng.uniform(-5, 5)))
        p = calibrate(start)
        worst = max(worst, abs(p.t), abs(p.s - 1))
    noisy_ok = 0
    for seed in range(100):
        p = noisy_calibrate(HomParams(2.0, 1.0, t=2.0), 10**6, make_stream(seed, "acceptance-hom-noisy"))
        noisy_ok += abs(p.t) <= 0.01 and abs(p.s - 1) <= 0.02
    dt = time.perf_counter() - t0
    ok = vis_err < 1e-9 and worst < 1e-6 and noisy_ok == 100 and dt < 30
    criterion(6, ok, f"visibility err {vis_err:.1e}, calibrate worst {worst:.1e}, noisy {noisy_ok}/100, {dt:.2f}s")


def test_criterion_7_throughput(criterion):
    hsps = throughput(SessionConfig(scheme="hsps", dead_time_ns=50)).effective_clock_hz
    hyb = throughput(SessionConfig(scheme="hybrid", dead_time_ns=50, wcp_clock_hz=1e10, decoy_fraction=0.001))
    ok = hsps == 2e7 and abs(hyb.max_decoy_fraction - 2e-3) < 1e-18 and hyb.effective_clock_hz == 1e10
    criterion(7, ok, f"hsps clock {hsps:g} Hz, hybrid max decoy fraction {hyb.max_decoy_fraction:g}")


def test_criterion_9_determinism(criterion, tmp_path):
    cfg = tmp_path / "session.yaml"
    cfg.write_text("scheme: hybrid\npulses: 300000\nchannel: pns\ndecoy_fraction: 0.5\n")
    outs = []
    for i, workers in enumerate(("1", "1", "2", "3")):
        path = tmp_path / f"r{i}.json"
        assert main(["simulate", "--config", str(cfg), "--seed", "17", "--workers", workers, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    json.loads(outs[0])
    ok = all(o == outs[0] for o in outs)
    criterion(9, ok, f"{len(outs)} runs (workers 1,1,2,3) byte-identical: {ok}")
