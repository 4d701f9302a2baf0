"""Eavesdropping models.

Minimum-error-discrimination (MED) intercept-resend: Eve measures both
``|psi_a>`` and ``|psi_b>`` with the square-root measurement, resends states
matching her estimates ``a~, b~``, rotates the intercepted cipher by
``U^{-(a~ + b~)}`` and reads the bit from the sign of an X-quadrature
homodyne outcome.  She then forwards ``|psi_{a~ + b~ + s~N/2}>`` to Bob.
Eve's channel is lossless and drift-free; only Bob's detector efficiency
is outside her control.

The photon-number-splitting attack is covered by a probability bound only.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from .errors import ConfigError
from .qowf import SquareRootMeasurement, build_srm, conditional_prob_matrix
from .seeding import ATTACK_TASK, split_counts, stream
from .states import SymmetricStateSet, make_set, validate_set_params


@dataclass(frozen=True)
class AttackConfig:
    mu: float
    n_states: int
    bob_eta_d: float = 0.3
    eve_eta: float = 1.0
    seed: int = 0
    partitions: int = 1

    def __post_init__(self):
        validate_set_params(self.mu, self.n_states)
        if not 0.0 < self.eve_eta <= 1.0:
            raise ConfigError(f"eve_eta must lie in (0, 1], got {self.eve_eta}")
        if not 0.0 < self.bob_eta_d <= 1.0:
            raise ConfigError(f"bob_eta_d must lie in (0, 1], got {self.bob_eta_d}")
        if self.partitions < 1:
            raise ConfigError("partitions must be >= 1")


@dataclass(frozen=True)
class AttackDistributions:
    """Eve's outcome statistics and the rates she induces at Bob.

    ``p_s_given_s[s, s~]`` is ``P(s~|s)``; ``p_diff[d]`` is the probability
    that an SRM estimate is off by ``d`` (mod N).
    """

    p_diff: np.ndarray
    p_s_given_s: np.ndarray
    p_e_cor: float
    p_err_ab: float
    p_cor_ab: float
    p_inc_ab: float

    @property
    def p_err_sifted(self) -> float:
        return self.p_err_ab / (self.p_err_ab + self.p_cor_ab)

    @property
    def p_cor_sifted(self) -> float:
        return self.p_cor_ab / (self.p_err_ab + self.p_cor_ab)

    @property
    def h_min(self) -> float:
        return -math.log2(self.p_e_cor)


class PNSBound(NamedTuple):
    bound: float
    exact: float


def srm_difference_dist(sset: SymmetricStateSet, srm: SquareRootMeasurement) -> np.ndarray:
    """``p_diff[d] = P(y = x + d | x)``, read off row 0 of the outcome matrix.

    Covariance of the SRM makes every row a cyclic shift of row 0.
    """
    return conditional_prob_matrix(sset, srm)[0].copy()


def residual_phase(d, s, n_states: int):
    """Phase of Eve's rotated cipher ``|psi_{a - a~ + sN/2}>`` for ``d = a~ - a``."""
    return ((-np.asarray(d)) % n_states) * (2.0 * math.pi / n_states) + np.asarray(s) * math.pi


def eve_bit_decision_prob(theta, mu: float):
    """Probability that the X-quadrature of ``|sqrt(mu) e^{i theta}>`` is positive.

    With ``x = (a + a^dag)/sqrt(2)`` the outcome is normal with mean
    ``sqrt(2 mu) cos(theta)`` and variance 1/2.
    """
    return 0.5 * erfc(-math.sqrt(2.0 * mu) * np.cos(theta))


def s_tilde_conditional(sset: SymmetricStateSet, srm: SquareRootMeasurement, p_diff: np.ndarray | None = None) -> np.ndarray:
    """2x2 matrix ``P(s~|s)`` (rows: true bit ``s``; columns: Eve's guess)."""
    if p_diff is None:
        p_diff = srm_difference_dist(sset, srm)
    d = np.arange(sset.n_states)
    out = np.empty((2, 2))
    for s in (0, 1):
        p0 = float(np.dot(p_diff, eve_bit_decision_prob(residual_phase(d, s, sset.n_states), sset.mu)))
        out[s] = (p0, 1.0 - p0)
    return out


def attack_intensity(l, d_b, s_tilde, mu: float, eta_d: float, n_states: int, eta: float = 1.0):
    """Mean photon number at Bob's output ``l`` under attack.

    Bob interferes ``|psi_{a~+b~+s~N/2}>`` with his key ``|psi_{a~+b}>``;
    the relative phase is ``2 pi d_b / N + s~ pi`` with ``d_b = b~ - b``.
    ``eta`` is the transmissivity Eve grants (1 for a perfect channel).
    """
    sign = 1.0 - 2.0 * ((np.asarray(l) + np.asarray(s_tilde)) % 2)
    c = np.cos(2.0 * math.pi * np.asarray(d_b) / n_states)
    return 0.5 * eta * eta_d * mu * (1.0 + eta + 2.0 * math.sqrt(eta) * sign * c)


def attack_no_click_prob(l, d_b, s_tilde, mu: float, eta_d: float, n_states: int, eta: float = 1.0):
    """``exp{-eta_d mu [1 + (-1)^(l+s~) cos(2 pi d_b / N)]}`` for ``eta = 1``."""
    return np.exp(-attack_intensity(l, d_b, s_tilde, mu, eta_d, n_states, eta))


def attack_one_click_prob(l, d_b, s_tilde, mu, eta_d, n_states, eta=1.0):
    return (1.0 - attack_no_click_prob(l, d_b, s_tilde, mu, eta_d, n_states, eta)) * attack_no_click_prob(
        1 - l, d_b, s_tilde, mu, eta_d, n_states, eta
    )


def analyze_attack(
    sset: SymmetricStateSet,
    srm: SquareRootMeasurement | None = None,
    eta_d: float = 0.3,
    eta: float = 1.0,
) -> AttackDistributions:
    """Analytic MED-attack chain.

    Bob's error (correct) rate sums the single-click probability at D1 (D0)
    over Eve's bit guess and the error on ``b``, with the true bit fixed to
    0; the bit symmetry makes this the average over ``s``.
    """
    srm = srm or build_srm(sset)
    n = sset.n_states
    p_diff = srm_difference_dist(sset, srm)
    pss = s_tilde_conditional(sset, srm, p_diff)
    d = np.arange(n)
    p_err = p_cor = 0.0
    for st in (0, 1):
        w = pss[0, st]
        p_err += w * float(np.dot(p_diff, attack_one_click_prob(1, d, st, sset.mu, eta_d, n, eta)))
        p_cor += w * float(np.dot(p_diff, attack_one_click_prob(0, d, st, sset.mu, eta_d, n, eta)))
    p_e_cor = 0.5 * (pss[0, 0] + pss[1, 1])
    return AttackDistributions(p_diff, pss, p_e_cor, p_err, p_cor, 1.0 - p_err - p_cor)


def attack_error_and_cor(sset: SymmetricStateSet, srm: SquareRootMeasurement, eta_d: float) -> tuple[float, float, float]:
    """``(p_err_ab, p_cor_ab, p_inc_ab)`` at Bob's detectors under the MED attack."""
    dist = analyze_attack(sset, srm, eta_d)
    return dist.p_err_ab, dist.p_cor_ab, dist.p_inc_ab


# -- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class AttackBatch:
    n_states: int
    a: np.ndarray
    b: np.ndarray
    s: np.ndarray
    a_tilde: np.ndarray
    b_tilde: np.ndarray
    s_tilde: np.ndarray
    event: np.ndarray

    def __len__(self):
        return self.a.size

    @classmethod
    def concat(cls, parts):
        fields = ("a", "b", "s", "a_tilde", "b_tilde", "s_tilde", "event")
        return cls(parts[0].n_states, *(np.concatenate([getattr(p, f) for p in parts]) for f in fields))

    def subset(self, mask) -> AttackBatch:
        fields = ("a", "b", "s", "a_tilde", "b_tilde", "s_tilde", "event")
        return AttackBatch(self.n_states, *(getattr(self, f)[mask] for f in fields))


def _simulate_attack_partition(config: AttackConfig, p_diff: np.ndarray, partition: int, count: int) -> AttackBatch:
    rng = stream(config.seed, ATTACK_TASK, partition)
    n, mu = config.n_states, config.mu
    half = n // 2
    dphi = 2.0 * math.pi / n
    a = rng.integers(0, n, count)
    b = rng.integers(0, n, count)
    s = rng.integers(0, 2, count)
    a_t = (a + rng.choice(n, count, p=p_diff)) % n
    b_t = (b + rng.choice(n, count, p=p_diff)) % n
    # Alice encodes on a + b~; Eve undoes a~ + b~ and homodynes the rest
    cipher = (a + b_t + s * half) % n
    rotated = (cipher - a_t - b_t) % n
    x_quad = math.sqrt(2.0 * mu) * np.cos(rotated * dphi) + rng.normal(0.0, math.sqrt(0.5), count)
    s_t = np.where(x_quad > 0.0, 0, 1)
    # Bob: forged cipher against his key U^b |psi_{a~}>
    forged = (a_t + b_t + s_t * half) % n
    bob_key = (a_t + b) % n
    amp = math.sqrt(config.bob_eta_d * mu / 2.0)
    e_c = config.eve_eta * np.exp(1j * forged * dphi)
    e_k = math.sqrt(config.eve_eta) * np.exp(1j * bob_key * dphi)
    q0 = np.exp(-np.abs(amp * (e_c + e_k)) ** 2)
    q1 = np.exp(-np.abs(amp * (e_c - e_k)) ** 2)
    u = rng.random(count)
    c0 = (1 - q0) * q1
    c1 = c0 + (1 - q1) * q0
    c2 = c1 + q0 * q1
    event = ((u >= c0).astype(np.int8) + (u >= c1) + (u >= c2)).astype(np.int8)
    return AttackBatch(n, a, b, s, a_t, b_t, s_t, event)


def empirical_attack_distributions(batch: AttackBatch) -> AttackDistributions:
    n = batch.n_states
    m = len(batch)
    diffs = np.concatenate([(batch.a_tilde - batch.a) % n, (batch.b_tilde - batch.b) % n])
    p_diff = np.bincount(diffs, minlength=n) / diffs.size
    pss = np.empty((2, 2))
    for s in (0, 1):
        sel = batch.s == s
        p0 = float(np.mean(batch.s_tilde[sel] == 0)) if sel.any() else math.nan
        pss[s] = (p0, 1.0 - p0)
    p_e_cor = float(np.mean(batch.s_tilde == batch.s))
    sifted = batch.event <= 1
    p_cor = float(np.count_nonzero(sifted & (batch.event == batch.s))) / m
    p_err = float(np.count_nonzero(sifted & (batch.event != batch.s))) / m
    return AttackDistributions(p_diff, pss, p_e_cor, p_err, p_cor, 1.0 - p_err - p_cor)


def simulate_attacked_sessions(
    config: AttackConfig, n_sessions: int, workers: int = 1, sset: SymmetricStateSet | None = None
) -> tuple[AttackBatch, AttackDistributions]:
    """Sample full attacked rounds and return them with empirical statistics.

    Eve's SRM errors are drawn from ``p_diff``; her bit comes from an
    actual Gaussian homodyne draw (an outcome of exactly 0 counts as 1);
    Bob's event is sampled from click probabilities computed from the
    integer indices of the states that meet at his beam splitter.
    """
    if n_sessions < 1:
        raise ConfigError("n_sessions must be >= 1")
    sset = sset or make_set(config.mu, config.n_states)
    p_diff = srm_difference_dist(sset, build_srm(sset))
    p_diff = p_diff / p_diff.sum()
    jobs = list(enumerate(split_counts(n_sessions, config.partitions)))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _simulate_attack_partition(config, p_diff, *j), jobs))
    else:
        parts = [_simulate_attack_partition(config, p_diff, *j) for j in jobs]
    batch = AttackBatch.concat(parts)
    return batch, empirical_attack_distributions(batch)


def pns_double_multiphoton_bound(mu: float) -> PNSBound:
    """Chance that both exchanged pulses carry two or more photons.

    The bound ``mu^4/4`` uses ``P(n >= 2) <= mu^2/2``; ``exact`` is
    ``(1 - e^{-mu}(1 + mu))^2``.
    """
    if mu < 0 or not math.isfinite(mu):
        raise ConfigError(f"mean photon number must be finite and >= 0, got {mu}")
    multi = -math.expm1(-mu) - mu * math.exp(-mu)
    return PNSBound(mu**4 / 4.0, multi * multi)
