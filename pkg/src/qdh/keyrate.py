"""Post-processing accounting: test-sample size, abort rule, min-entropy and
extractable key length.  Error correction and privacy amplification
themselves are not implemented; their leakage enters as a number."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError

DEFAULT_P_MAX_ERR = 0.2


class Decision(str, enum.Enum):
    PROCEED = "proceed"
    ABORT = "abort"


@dataclass(frozen=True)
class SamplePlan:
    epsilon_sample: float
    xi: float
    m_th: int


@dataclass(frozen=True)
class KeyLengthEstimate:
    s_len: int
    h_min: float
    leak: float
    delta: float
    ell: int


def chernoff_sample_size(epsilon_sample: float, xi: float) -> int:
    """Test-sample size ``ceil(3 ln(2/xi) / eps^2)``.

    Enough to put the estimated error rate within ``eps`` of the true one
    with confidence ``1 - xi``.
    """
    if not 0.0 < epsilon_sample <= 1.0:
        raise ConfigError(f"sampling error must lie in (0, 1], got {epsilon_sample}")
    if not 0.0 < xi < 1.0:
        raise ConfigError(f"xi must lie in (0, 1), got {xi}")
    return math.ceil(3.0 * math.log(2.0 / xi) / epsilon_sample**2)


def sample_plan(epsilon_sample: float, xi: float) -> SamplePlan:
    return SamplePlan(epsilon_sample, xi, chernoff_sample_size(epsilon_sample, xi))


def abort_decision(q_empirical: float, epsilon_sample: float, p_max_err: float = DEFAULT_P_MAX_ERR) -> Decision:
    """Proceed only if ``q + eps <= p_max_err``."""
    for name, v in (("q", q_empirical), ("epsilon_sample", epsilon_sample), ("p_max_err", p_max_err)):
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"{name} must lie in [0, 1], got {v}")
    return Decision.PROCEED if q_empirical + epsilon_sample <= p_max_err else Decision.ABORT


def min_entropy(p_e_cor: float) -> float:
    """``-log2`` of Eve's guessing probability for one bit."""
    if not 0.0 < p_e_cor <= 1.0:
        raise ConfigError(f"guessing probability must lie in (0, 1], got {p_e_cor}")
    return -math.log2(p_e_cor)


def key_length(s_len: int, h_min: float, leak: float, delta: float) -> int:
    """``floor(|s| H_min - leak + 2 log2(delta))``, never below zero."""
    if s_len < 0:
        raise ConfigError("sifted length must be >= 0")
    if leak < 0:
        raise ConfigError("leakage must be >= 0")
    if not 0.0 < delta <= 1.0:
        raise ConfigError(f"delta must lie in (0, 1], got {delta}")
    return max(0, math.floor(s_len * h_min - leak + 2.0 * math.log2(delta)))


def key_length_estimate(s_len: int, h_min: float, leak: float, delta: float) -> KeyLengthEstimate:
    return KeyLengthEstimate(s_len, h_min, leak, delta, key_length(s_len, h_min, leak, delta))
