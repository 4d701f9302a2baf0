"""Simulation and numerical verification of quantum Diffie-Hellman key
exchange built on symmetric coherent states."""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError, QDHError  # noqa: E402
from .states import SymmetricStateSet, make_set  # noqa: E402
from .qowf import build_srm, conditional_prob_matrix, holevo_chi, qowf_report  # noqa: E402
from .channel import ChannelParams  # noqa: E402
from .protocol import SessionConfig, marginal_stats, simulate_sessions  # noqa: E402
from .adversary import AttackConfig, analyze_attack, simulate_attacked_sessions  # noqa: E402

__all__ = [
    "AttackConfig",
    "ChannelParams",
    "ConfigError",
    "NumericalError",
    "QDHError",
    "SessionConfig",
    "SymmetricStateSet",
    "analyze_attack",
    "build_srm",
    "conditional_prob_matrix",
    "holevo_chi",
    "make_set",
    "marginal_stats",
    "qowf_report",
    "simulate_attacked_sessions",
    "simulate_sessions",
]
