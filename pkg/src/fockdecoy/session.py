"""End-to-end Monte Carlo sessions for the two decoy schemes.

``hsps``: every pulse comes from the heralded PDC source; Alice tags it with
her PNRD count, uses k = 1 pulses for key and k = 1, 2 pulses as decoys.

``hybrid``: an optical switch sends a heralded decoy with probability
``decoy_fraction`` and a weak coherent pulse otherwise; only WCP pulses
carry key.

Pulses are simulated in fixed-size blocks, each with its own counter-based
stream keyed by (seed, block index). Block tallies are integer counts and
merge by summation, so the report does not depend on how blocks are spread
over worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from functools import partial
from typing import Iterator, Optional

import numpy as np

from .channel import ChannelScenario, LossOnly, PnsAttack, fock_transmittivity, sample_arrival
from .detection import SpdParams, pnrd_sample, spd_click
from .errors import ConfigError, InsufficientData
from .estimation import ClickLedger, DetectionVerdict, detect_pns, transmittivity_ratio
from .fock import (
    HeraldedSourceParams,
    WcpParams,
    conditional_distribution,
    pdc_joint_distribution,
    sample_fock,
    wcp_distribution,
)
from .mu import optimal_mu
from .rng import make_stream

__all__ = [
    "BLOCK_SIZE",
    "SessionConfig",
    "PulseRecord",
    "SessionReport",
    "Throughput",
    "throughput",
    "run_session",
    "pulse_records",
    "decoy_ledger",
]

BLOCK_SIZE = 1 << 16
SCHEMES = ("hsps", "hybrid")
CHANNELS = ("loss", "pns")
LEDGER_TAGS = (1, 2)


@dataclass(frozen=True)
class SessionConfig:
    """Flat session configuration; these field names are the config-file keys."""

    scheme: str = "hsps"
    pulses: int = 1_000_000
    lambda_sq: float = 0.25
    eta_a: float = 1.0
    mu: float = 0.5
    decoy_fraction: float = 0.1
    channel: str = "loss"
    eta_c: float = 0.1
    kappa_1: float = 0.01
    kappa_m: float = 0.9
    eta_b: float = 1.0
    dark_prob: float = 0.0
    alpha: float = 0.01
    seed: int = 0
    dead_time_ns: float = 50.0
    wcp_clock_hz: float = 1e10

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.channel not in CHANNELS:
            raise ConfigError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if int(self.pulses) != self.pulses or self.pulses <= 0:
            raise ConfigError("pulses must be a positive integer")
        if not 0.0 <= self.decoy_fraction <= 1.0:
            raise ConfigError("decoy_fraction must lie in [0, 1]")
        if self.dead_time_ns < 0:
            raise ConfigError("dead_time_ns must be non-negative")
        if not self.wcp_clock_hz > 0:
            raise ConfigError("wcp_clock_hz must be positive")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError("alpha must lie in (0, 0.5)")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        try:
            self.src, self.scenario, self.spd, self.wcp
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def src(self) -> HeraldedSourceParams:
        return HeraldedSourceParams(self.lambda_sq, self.eta_a)

    @property
    def wcp(self) -> WcpParams:
        return WcpParams(self.mu)

    @property
    def scenario(self) -> ChannelScenario:
        if self.channel == "loss":
            return LossOnly(self.eta_c)
        return PnsAttack(self.kappa_1, self.kappa_m)

    @property
    def spd(self) -> SpdParams:
        return SpdParams(self.eta_b, self.dark_prob)

    @classmethod
    def from_mapping(cls, data: dict) -> "SessionConfig":
        """Build from a flat key/value mapping; unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat key/value mapping")
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        for key, value in data.items():
            default = known[key].default
            try:
                if isinstance(default, str):
                    kwargs[key] = str(value)
                elif isinstance(default, int):
                    # YAML reads 1e6 as a string; accept any integral number
                    number = float(value)
                    if isinstance(value, bool) or not number.is_integer():
                        raise ValueError
                    kwargs[key] = int(value) if isinstance(value, int) else int(number)
                else:
                    kwargs[key] = float(value)
            except (TypeError, ValueError):
                raise ConfigError(f"bad value for {key}: {value!r}") from None
        return cls(**kwargs)

    def to_mapping(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class PulseRecord:
    index: int
    origin: str
    herald_k: Optional[int]
    n_sent: int
    n_arrived: int
    bob_click: bool
    sifted: bool


@dataclass(frozen=True)
class Throughput:
    effective_clock_hz: float
    decoy_rate_hz: float
    max_decoy_fraction: float
    wcp_clock_hz: float


def throughput(cfg: SessionConfig) -> Throughput:
    """Clock rates imposed by the herald detector's dead time.

    The heralded source can fire at most once per dead time. In the hybrid
    scheme that only caps the decoy stream, so the WCP clock runs at full
    speed as long as ``decoy_fraction`` stays below the returned ceiling.

    Raises:
        ConfigError: zero dead time for the ``hsps`` scheme.
    """
    if cfg.dead_time_ns > 0:
        decoy_rate = 1e9 / cfg.dead_time_ns
    elif cfg.scheme == "hsps":
        raise ConfigError("hsps throughput needs a positive dead time")
    else:
        decoy_rate = math.inf
    max_fraction = min(1.0, decoy_rate / cfg.wcp_clock_hz)
    if cfg.scheme == "hsps":
        effective = min(decoy_rate, cfg.wcp_clock_hz)
    elif cfg.decoy_fraction <= max_fraction:
        effective = cfg.wcp_clock_hz
    else:
        effective = decoy_rate / cfg.decoy_fraction
    return Throughput(effective, decoy_rate, max_fraction, cfg.wcp_clock_hz)


def _simulate_block(cfg: SessionConfig, block: int) -> dict[str, np.ndarray]:
    """All pulses of one block; the order of draws from the stream is fixed."""
    start = block * BLOCK_SIZE
    m = min(BLOCK_SIZE, cfg.pulses - start)
    rng = make_stream(cfg.seed, "session", block)

    if cfg.scheme == "hsps":
        is_decoy = np.ones(m, dtype=bool)
    else:
        is_decoy = rng.random(m) < cfg.decoy_fraction
    nd = int(is_decoy.sum())

    n_sent = np.empty(m, dtype=np.int64)
    herald = np.full(m, -1, dtype=np.int64)
    n_dec = sample_fock(pdc_joint_distribution(cfg.lambda_sq), rng, nd)
    n_sent[is_decoy] = n_dec
    herald[is_decoy] = pnrd_sample(n_dec, cfg.eta_a, rng)
    n_sent[~is_decoy] = sample_fock(wcp_distribution(cfg.mu), rng, m - nd)

    n_arr = sample_arrival(cfg.scenario, n_sent, rng)
    click = spd_click(n_arr, cfg.spd, rng)
    coin = rng.random(m) < 0.5
    key_pulse = (herald == 1) if cfg.scheme == "hsps" else ~is_decoy
    return {
        "index": np.arange(start, start + m, dtype=np.int64),
        "is_decoy": is_decoy,
        "herald": herald,
        "n_sent": n_sent,
        "n_arrived": n_arr,
        "click": click,
        "sifted": click & coin & key_pulse,
    }


def _tally_block(cfg: SessionConfig, block: int) -> dict[str, int]:
    b = _simulate_block(cfg, block)
    herald, click, dec = b["herald"], b["click"], b["is_decoy"]
    out = {
        "decoy_pulses": int(dec.sum()),
        "wcp_pulses": int((~dec).sum()),
        "wcp_clicks": int((click & ~dec).sum()),
        "sifted": int(b["sifted"].sum()),
        "untagged": int((herald == 0).sum()),
        "excluded": int((herald >= 3).sum()),
    }
    for k in LEDGER_TAGS:
        sel = herald == k
        out[f"sent_{k}"] = int(sel.sum())
        out[f"clicked_{k}"] = int((click & sel).sum())
    return out


def pulse_records(cfg: SessionConfig, limit: Optional[int] = None) -> Iterator[PulseRecord]:
    """Per-pulse audit trail, identical to what ``run_session`` tallies."""
    total = cfg.pulses if limit is None else min(limit, cfg.pulses)
    for block in range(math.ceil(total / BLOCK_SIZE)):
        b = _simulate_block(cfg, block)
        for j in range(min(BLOCK_SIZE, total - block * BLOCK_SIZE)):
            dec = bool(b["is_decoy"][j])
            yield PulseRecord(
                index=int(b["index"][j]),
                origin="decoy" if dec else "wcp",
                herald_k=int(b["herald"][j]) if dec else None,
                n_sent=int(b["n_sent"][j]),
                n_arrived=int(b["n_arrived"][j]),
                bob_click=bool(b["click"][j]),
                sifted=bool(b["sifted"][j]),
            )


@dataclass
class SessionReport:
    scheme: str
    seed: int
    pulses: int
    decoy_pulses: int
    wcp_pulses: int
    ledger: ClickLedger
    verdict: Optional[DetectionVerdict]
    insufficient_data: bool
    wcp_click_rate: Optional[float]
    sifted_key_count: int
    effective_clock_hz: float
    max_decoy_fraction: float
    mu_recommended: Optional[float]
    mu_flag: str
    transmittivity_ratio: Optional[tuple[float, float, float]] = None
    untagged_decoys: int = 0
    excluded_decoys: int = 0


def _recommend_mu(verdict: DetectionVerdict) -> tuple[float, str]:
    """Optimal WCP intensity for the channel the decoys point to."""
    e1, e2 = verdict.estimates
    if verdict.attack_detected:
        scenario = PnsAttack(
            kappa_1=fock_transmittivity(LossOnly(e1.eta), 1),
            kappa_m=fock_transmittivity(LossOnly(e2.eta), 2),
        )
    else:
        scenario = LossOnly(e1.eta)
    opt = optimal_mu(scenario)
    return opt.mu_star, opt.flag


def run_session(cfg: SessionConfig, workers: int = 1) -> SessionReport:
    """Simulate ``cfg.pulses`` pulses and assemble the session report.

    Too few decoys for either tag does not raise: the report comes back with
    ``insufficient_data`` set and no verdict.
    """
    blocks = range(math.ceil(cfg.pulses / BLOCK_SIZE))
    work = partial(_tally_block, cfg)
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(work, blocks))
    else:
        tallies = [work(b) for b in blocks]
    tot = {key: sum(t[key] for t in tallies) for key in tallies[0]}

    ledger = ClickLedger()
    for k in LEDGER_TAGS:
        ledger.add(k, tot[f"sent_{k}"], tot[f"clicked_{k}"])

    verdict, ratio, mu_rec, mu_flag = None, None, None, "insufficient_data"
    try:
        verdict = detect_pns(ledger, cfg.src, cfg.spd, cfg.alpha)
    except InsufficientData:
        pass
    if verdict is not None:
        ratio = transmittivity_ratio(verdict)
        mu_rec, mu_flag = _recommend_mu(verdict)

    tp = throughput(cfg) if (cfg.dead_time_ns > 0 or cfg.scheme == "hybrid") else None
    return SessionReport(
        scheme=cfg.scheme,
        seed=cfg.seed,
        pulses=cfg.pulses,
        decoy_pulses=tot["decoy_pulses"],
        wcp_pulses=tot["wcp_pulses"],
        ledger=ledger,
        verdict=verdict,
        insufficient_data=verdict is None,
        wcp_click_rate=tot["wcp_clicks"] / tot["wcp_pulses"] if tot["wcp_pulses"] else None,
        sifted_key_count=tot["sifted"],
        effective_clock_hz=tp.effective_clock_hz if tp else math.nan,
        max_decoy_fraction=tp.max_decoy_fraction if tp else math.nan,
        mu_recommended=mu_rec,
        mu_flag=mu_flag,
        transmittivity_ratio=ratio,
        untagged_decoys=tot["untagged"],
        excluded_decoys=tot["excluded"],
    )


def decoy_ledger(
    src: HeraldedSourceParams,
    scenario: ChannelScenario,
    spd: SpdParams,
    pulses_per_tag: int,
    rng: np.random.Generator,
    tags: tuple[int, ...] = LEDGER_TAGS,
) -> ClickLedger:
    """Ledger with exactly ``pulses_per_tag`` heralded pulses per tag.

    Photon numbers are drawn from the heralded conditional law, then sent
    through the channel and Bob's detector pulse by pulse.
    """
    led = ClickLedger()
    for k in tags:
        n = sample_fock(conditional_distribution(src, k), rng, pulses_per_tag)
        clicks = spd_click(sample_arrival(scenario, n, rng), spd, rng)
        led.add(k, pulses_per_tag, int(clicks.sum()))
    return led
