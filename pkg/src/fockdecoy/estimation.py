"""Per-herald transmittivity estimates and the PNS-attack decision.

Alice knows how many photons she heralded for every decoy pulse. Bob's click
rate on the k = 1 and k = 2 subsets each give an estimate of the channel
efficiency; loss makes them agree, a block-and-boost attack pulls them apart.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .channel import ChannelScenario, LossOnly, PnsAttack, fock_transmittivity
from .detection import IDEAL_SPD, SpdParams
from .errors import InsufficientData, OutOfRange
from .fock import HeraldedSourceParams, conditional_distribution

__all__ = [
    "DEFAULT_ALPHA",
    "ClickLedger",
    "TransmittivityEstimate",
    "DetectionVerdict",
    "click_given_sent",
    "expected_click_prob",
    "invert_to_eta",
    "wilson_interval",
    "estimate_tag",
    "detect_pns",
    "transmittivity_ratio",
]

DEFAULT_ALPHA = 0.01
ETA_TOL = 1e-10
LEDGER_HEADER = ("tag", "sent", "clicked")


@dataclass
class ClickLedger:
    """Pulses sent and Bob clicks, keyed by herald tag.

    Ledgers from independent shards merge by summing counts.
    """

    counts: dict[int, list[int]] = field(default_factory=dict)

    def add(self, tag: int, sent: int, clicked: int) -> None:
        row = self.counts.setdefault(int(tag), [0, 0])
        row[0] += int(sent)
        row[1] += int(clicked)
        if not 0 <= row[1] <= row[0]:
            raise ValueError(f"tag {tag}: clicked={row[1]} outside [0, sent={row[0]}]")

    def sent(self, tag: int) -> int:
        return self.counts.get(tag, [0, 0])[0]

    def clicked(self, tag: int) -> int:
        return self.counts.get(tag, [0, 0])[1]

    def rate(self, tag: int) -> float:
        s = self.sent(tag)
        return self.clicked(tag) / s if s else math.nan

    def tags(self) -> list[int]:
        return sorted(self.counts)

    def merge(self, other: "ClickLedger") -> "ClickLedger":
        out = ClickLedger()
        for led in (self, other):
            for tag, (s, c) in led.counts.items():
                out.add(tag, s, c)
        return out

    __add__ = merge

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LEDGER_HEADER)
        for tag in self.tags():
            w.writerow([tag, self.sent(tag), self.clicked(tag)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ClickLedger":
        rows = list(csv.reader(io.StringIO(text)))
        rows = [r for r in rows if r]
        if not rows or tuple(h.strip() for h in rows[0]) != LEDGER_HEADER:
            raise ValueError("ledger CSV must start with header 'tag,sent,clicked'")
        led = cls()
        for r in rows[1:]:
            if len(r) != 3:
                raise ValueError(f"malformed ledger row {r!r}")
            led.add(int(r[0]), int(r[1]), int(r[2]))
        return led


@dataclass(frozen=True)
class TransmittivityEstimate:
    k: int
    sent: int
    clicked: int
    rate: float
    ci_low: float
    ci_high: float
    eta: float
    eta_low: float
    eta_high: float


@dataclass(frozen=True)
class DetectionVerdict:
    attack_detected: bool
    eta1_interval: tuple[float, float]
    eta2_interval: tuple[float, float]
    alpha: float
    estimates: tuple[TransmittivityEstimate, TransmittivityEstimate]


def click_given_sent(c: ChannelScenario, n: np.ndarray, spd: SpdParams = IDEAL_SPD) -> np.ndarray:
    """P(Bob clicks | n photons left Alice), vectorized over ``n``."""
    n = np.asarray(n, dtype=float)
    dark = spd.dark_prob
    if isinstance(c, LossOnly):
        # binomial thinning composes: channel then detector
        return 1.0 - (1.0 - dark) * (1.0 - c.eta_c * spd.eta_b) ** n
    if isinstance(c, PnsAttack):
        forwarded = np.where(n >= 2, n - 1, n)
        kappa = np.where(n == 1, c.kappa_1, c.kappa_m)
        through = 1.0 - (1.0 - dark) * (1.0 - spd.eta_b) ** forwarded
        return np.where(n == 0, dark, kappa * through + (1.0 - kappa) * dark)
    raise TypeError(f"unknown channel scenario {c!r}")


def expected_click_prob(
    src: HeraldedSourceParams, k: int, c: ChannelScenario, spd: SpdParams = IDEAL_SPD
) -> float:
    """Bob's click probability on pulses heralded with ``k`` photons."""
    d = conditional_distribution(src, k)
    n = np.arange(d.probs.size)
    return float(np.dot(d.probs, click_given_sent(c, n, spd)))


class _LossModel:
    """Click probability on tag ``k`` as a function of a lossy channel's efficiency."""

    def __init__(self, src, k, spd):
        d = conditional_distribution(src, k)
        self.p = d.probs
        self.n = np.arange(d.probs.size, dtype=float)
        self.spd = spd
        self.q_low = self(0.0)
        self.q_high = self(1.0)
        if not self.q_high > self.q_low:
            raise OutOfRange(f"tag {k}: click rate does not depend on channel efficiency")

    def __call__(self, eta):
        spd = self.spd
        return float(np.dot(self.p, 1.0 - (1.0 - spd.dark_prob) * (1.0 - eta * spd.eta_b) ** self.n))

    def invert(self, rate, clamp=False):
        if clamp:
            rate = min(max(rate, self.q_low), self.q_high)
        elif rate < self.q_low - 1e-15 or rate > self.q_high + 1e-15:
            raise OutOfRange(
                f"rate {rate:.6g} outside achievable range [{self.q_low:.6g}, {self.q_high:.6g}]"
            )
        if rate <= self.q_low:
            return 0.0
        if rate >= self.q_high:
            return 1.0
        lo, hi = 0.0, 1.0
        while hi - lo > ETA_TOL:
            mid = 0.5 * (lo + hi)
            if self(mid) < rate:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def invert_to_eta(
    src: HeraldedSourceParams, k: int, spd: SpdParams, observed_rate: float
) -> float:
    """Channel efficiency under pure loss that reproduces ``observed_rate`` on tag ``k``.

    Bisection on the strictly increasing forward model to |d eta| < 1e-10.

    Raises:
        OutOfRange: the rate lies outside [Q_k(eta=0), Q_k(eta=1)].
    """
    return _LossModel(src, k, spd).invert(observed_rate)


def wilson_interval(successes: int, total: int, alpha: float = DEFAULT_ALPHA) -> tuple[float, float]:
    """Two-sided Wilson score interval at confidence ``1 - alpha``."""
    if total <= 0:
        raise InsufficientData("no trials")
    z = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    p = successes / total
    z2n = z * z / total
    denom = 1.0 + z2n
    center = (p + z2n / 2.0) / denom
    half = z * math.sqrt(p * (1.0 - p) / total + z2n / (4.0 * total)) / denom
    # center - half is exactly 0 at p = 0 in exact arithmetic
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == total else min(1.0, center + half)
    return lo, hi


def estimate_tag(
    ledger: ClickLedger, k: int, src: HeraldedSourceParams, spd: SpdParams = IDEAL_SPD,
    alpha: float = DEFAULT_ALPHA,
) -> TransmittivityEstimate:
    sent, clicked = ledger.sent(k), ledger.clicked(k)
    if sent <= 0:
        raise InsufficientData(f"no pulses recorded with herald tag {k}")
    lo, hi = wilson_interval(clicked, sent, alpha)
    model = _LossModel(src, k, spd)
    rate = clicked / sent
    return TransmittivityEstimate(
        k=k,
        sent=sent,
        clicked=clicked,
        rate=rate,
        ci_low=lo,
        ci_high=hi,
        eta=model.invert(rate, clamp=True),
        eta_low=model.invert(lo, clamp=True),
        eta_high=model.invert(hi, clamp=True),
    )


def detect_pns(
    ledger: ClickLedger, src: HeraldedSourceParams, spd: SpdParams = IDEAL_SPD,
    alpha: float = DEFAULT_ALPHA,
) -> DetectionVerdict:
    """Flag an attack when the k=1 and k=2 channel-efficiency intervals are disjoint.

    Each tag's Wilson interval on the click probability is pushed through the
    monotone loss model, so coverage carries over to the efficiency scale.

    Raises:
        InsufficientData: either tag has no pulses.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    e1 = estimate_tag(ledger, 1, src, spd, alpha)
    e2 = estimate_tag(ledger, 2, src, spd, alpha)
    i1 = (e1.eta_low, e1.eta_high)
    i2 = (e2.eta_low, e2.eta_high)
    disjoint = i1[1] < i2[0] or i2[1] < i1[0]
    return DetectionVerdict(disjoint, i1, i2, alpha, (e1, e2))


def transmittivity_ratio(verdict: DetectionVerdict) -> tuple[float, float, float]:
    """Estimated eta^(1)/eta^(2) as ``(low, point, high)``.

    Loss confines this ratio to [0.5, 1]; a value below 0.5 with the whole
    interval below it can only come from an attack.
    """
    e1, e2 = verdict.estimates
    loss = lambda eta, n: fock_transmittivity(LossOnly(eta), n)
    t1 = [loss(e, 1) for e in (e1.eta_low, e1.eta, e1.eta_high)]
    t2 = [loss(e, 2) for e in (e2.eta_low, e2.eta, e2.eta_high)]

    def div(a, b):
        return a / b if b > 0 else math.inf

    return div(t1[0], t2[2]), div(t1[1], t2[1]), div(t1[2], t2[0])
