"""Decoy number-state QKD: heralded sources, PNS-attack detection, HOM calibration, WCP intensity choice."""

from .channel import LossOnly, PnsAttack, fock_transmittivity, loss_ratio_identity, sample_arrival
from .detection import SpdParams, pnrd_povm_prob, pnrd_sample, spd_click
from .errors import ConfigError, InsufficientData, NonConvergence, NotUnimodal, OutOfRange
from .estimation import ClickLedger, DetectionVerdict, detect_pns, expected_click_prob, invert_to_eta
from .fock import (
    FockDistribution,
    HeraldedSourceParams,
    WcpParams,
    conditional_distribution,
    pdc_joint_distribution,
    sample_fock,
    wcp_distribution,
)
from .hom import HomParams, calibrate, coincidence_rate, noisy_calibrate, visibility
from .mu import MeritInputs, merit, mu_curve, optimal_mu
from .rng import make_stream
from .session import SessionConfig, SessionReport, run_session, throughput

__version__ = "0.1.0"
