import math

import numpy as np
import pytest

from fockdecoy.detection import SpdParams, click_probability, pnrd_povm_prob, pnrd_sample, spd_click
from fockdecoy.fock import HeraldedSourceParams, conditional_distribution, pdc_joint_distribution

N = 1_000_000


def test_pnrd_sample_extremes(rng):
    assert np.all(pnrd_sample(np.full(1000, 4), 1.0, rng) == 4)
    assert np.all(pnrd_sample(np.full(1000, 4), 0.0, rng) == 0)
    assert pnrd_sample(4, 1.0, rng) == 4


def test_pnrd_sample_single_registration(rng):
    k = pnrd_sample(np.full(N, 2), 0.8, rng)
    p = 2 * 0.8 * 0.2
    assert abs(np.mean(k == 1) - p) < 3 * math.sqrt(p * (1 - p) / N)
    assert np.all(k <= 2)


def test_povm_examples():
    for n in range(6):
        assert pnrd_povm_prob(n, n, 1.0) == 1.0
    assert pnrd_povm_prob(3, 1, 0.1) == pytest.approx(0.243, abs=1e-15)
    assert pnrd_povm_prob(2, 3, 0.4) == 0.0


@pytest.mark.parametrize("eta", [0.0, 0.1, 0.37, 0.5, 0.9, 1.0])
def test_povm_completeness(eta):
    for n in range(51):
        assert sum(pnrd_povm_prob(n, k, eta) for k in range(n + 1)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5])
@pytest.mark.parametrize("eta", [0.1, 0.5, 0.9])
def test_pnrd_histogram_matches_povm(n, eta, rng):
    k = pnrd_sample(np.full(N, n), eta, rng)
    counts = np.bincount(k, minlength=n + 1)
    for j in range(n + 1):
        p = pnrd_povm_prob(n, j, eta)
        assert abs(counts[j] / N - p) < 3 * math.sqrt(p * (1 - p) / N) + 1e-12


@pytest.mark.parametrize("lambda_sq", [0.01, 0.25, 0.5, 0.81])
@pytest.mark.parametrize("eta_a", [0.1, 0.5, 0.8, 0.99])
@pytest.mark.parametrize("k", [0, 1, 2, 5])
def test_bayes_route_reproduces_conditional(lambda_sq, eta_a, k):
    # P(n|k) = p(n) B^n_k / sum_m p(m) B^m_k, built from the joint law and the POVM only
    joint = pdc_joint_distribution(lambda_sq)
    cond = conditional_distribution(HeraldedSourceParams(lambda_sq, eta_a), k)
    n_max = max(joint.n_max, cond.n_max) + 50
    weights = np.array(
        [(1 - lambda_sq) * lambda_sq**n * pnrd_povm_prob(n, k, eta_a) for n in range(n_max)]
    )
    bayes = weights / weights.sum()
    for n in range(cond.n_max + 1):
        assert abs(bayes[n] - cond[n]) < 1e-9


def test_spd_examples(rng):
    assert not np.any(spd_click(np.zeros(1000, dtype=int), SpdParams(0.5, 0.0), rng))
    assert np.all(spd_click(np.ones(1000, dtype=int), SpdParams(1.0, 0.0), rng))
    p = SpdParams(eta_b=0.25, dark_prob=0.01)
    expected = 1 - 0.99 * 0.5625
    assert click_probability(2, p) == pytest.approx(0.443125, abs=1e-15)
    rate = np.mean(spd_click(np.full(N, 2), p, rng))
    assert abs(rate - expected) < 3 * math.sqrt(expected * (1 - expected) / N)


def test_spd_validation():
    with pytest.raises(ValueError):
        SpdParams(1.1, 0.0)
    with pytest.raises(ValueError):
        SpdParams(0.5, 1.0)
