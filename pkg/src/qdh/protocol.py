"""The key-agreement protocol without an eavesdropper.

Alice and Bob pick private keys ``a, b`` in ``Z_N``, exchange ``|psi_a>`` and
``|psi_b>`` and each rotate the received state by their own key, so both
hold ``|psi_k>`` with ``k = a + b (mod N)``.  Alice encodes a bit ``s`` as
``U^{sN/2}|psi_k>`` and Bob reads it by interfering the cipher with his
copy of the key on a balanced beam splitter watched by detectors D0, D1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from .channel import ChannelParams, gauss_marginalize, sample_phase
from .errors import ConfigError
from .seeding import PROTOCOL_TASK, split_counts, stream
from .states import SetParams, validate_set_params


class Event(IntEnum):
    CLICK_D0 = 0
    CLICK_D1 = 1
    NO_CLICK = 2
    DOUBLE_CLICK = 3


EVENT_NAMES = {e: e.name.lower() for e in Event}


class EventProbs(NamedTuple):
    click_d0: np.ndarray | float
    click_d1: np.ndarray | float
    no_click: np.ndarray | float
    double_click: np.ndarray | float

    def click(self, l):
        return self.click_d0 if l == 0 else self.click_d1


@dataclass(frozen=True)
class DetectionStats:
    p_cor: float
    p_inc: float
    p_err: float
    p_cor_sifted: float
    p_err_sifted: float

    @classmethod
    def from_unsifted(cls, p_cor: float, p_inc: float, p_err: float) -> DetectionStats:
        # p_cor + p_err equals 1 - p_inc but avoids cancellation when p_inc ~ 1
        kept = p_cor + p_err
        if kept > 0:
            return cls(p_cor, p_inc, p_err, p_cor / kept, p_err / kept)
        return cls(p_cor, p_inc, p_err, math.nan, math.nan)


# -- key algebra -------------------------------------------------------------


def shared_key(a, b, n_states: int):
    """``a (+) b``: the key index both parties end up holding."""
    return (np.asarray(a) + np.asarray(b)) % n_states


def encode_bit(k, s, n_states: int):
    """Cipher index ``k (+) s N/2``."""
    return (np.asarray(k) + np.asarray(s) * (n_states // 2)) % n_states


# -- detection model ---------------------------------------------------------


def output_intensity(l: int, s, phi, eta: float, eta_d: float, mu: float):
    """Mean photon number ``|omega_l|^2`` at beam-splitter output ``l``.

    The cipher crossed the fiber twice (amplitude factor ``eta``), Bob's
    key once (``sqrt(eta)``), and detector efficiency scales both:
    ``omega_l = sqrt(eta eta_d mu / 2) (sqrt(eta) e^{i s pi} e^{i phi} + (-1)^l)``.
    """
    sign = 1.0 - 2.0 * ((np.asarray(l) + np.asarray(s)) % 2)
    return 0.5 * eta * eta_d * mu * (1.0 + eta + 2.0 * sign * np.sqrt(eta) * np.cos(phi))


def no_click_prob(l: int, s, phi, eta: float, eta_d: float, mu: float):
    """Vacuum probability ``exp(-|omega_l|^2)`` at detector ``l``."""
    return np.exp(-output_intensity(l, s, phi, eta, eta_d, mu))


def event_probs(s, phi, eta: float, eta_d: float, mu: float) -> EventProbs:
    """Probabilities of the four detector events for bit ``s`` and drift ``phi``."""
    q0 = no_click_prob(0, s, phi, eta, eta_d, mu)
    q1 = no_click_prob(1, s, phi, eta, eta_d, mu)
    return EventProbs((1 - q0) * q1, (1 - q1) * q0, q0 * q1, (1 - q0) * (1 - q1))


def marginal_stats(params: SetParams, channel: ChannelParams) -> DetectionStats:
    """Correct / inconclusive / error rates averaged over the bit and the drift.

    ``params.n_states`` is accepted for interface symmetry only: the rates
    do not depend on the number of phase slices.
    """
    validate_set_params(*params)
    mu = params.mu
    eta, eta_d, sigma = channel.eta, channel.eta_d, channel.sigma_phi
    p_cor = p_err = p_inc = 0.0
    for s in (0, 1):
        p_cor += 0.5 * gauss_marginalize(lambda ph: event_probs(s, ph, eta, eta_d, mu).click(s), sigma)
        p_err += 0.5 * gauss_marginalize(lambda ph: event_probs(s, ph, eta, eta_d, mu).click(1 - s), sigma)
        p_inc += 0.5 * gauss_marginalize(
            lambda ph: (lambda e: e.no_click + e.double_click)(event_probs(s, ph, eta, eta_d, mu)), sigma
        )
    return DetectionStats.from_unsifted(p_cor, p_inc, p_err)


def asymptotic_probs(eta: float, eta_d: float, mu: float) -> float:
    """Common limit of ``P(cor)`` and ``P(err)`` once the drift washes out
    the interference term: ``e^{-x}(1 - e^{-x})``, ``x = eta (1+eta) eta_d mu / 2``."""
    x = eta * (1.0 + eta) * eta_d * mu / 2.0
    return math.exp(-x) * (1.0 - math.exp(-x))


# -- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class SessionConfig:
    set_params: SetParams
    channel: ChannelParams = field(default_factory=ChannelParams)
    n_sessions: int = 1
    seed: int = 0
    partitions: int = 1

    def __post_init__(self):
        validate_set_params(*self.set_params)
        if int(self.n_sessions) != self.n_sessions or self.n_sessions < 1:
            raise ConfigError(f"n_sessions must be a positive integer, got {self.n_sessions}")
        if self.partitions < 1:
            raise ConfigError("partitions must be >= 1")


class SessionOutcome(NamedTuple):
    a: int
    b: int
    k: int
    s: int
    phi_drift: float
    event: Event
    sifted: bool
    correct: bool | None


@dataclass(frozen=True)
class SessionBatch:
    """Column-wise record of many protocol rounds."""

    n_states: int
    a: np.ndarray
    b: np.ndarray
    s: np.ndarray
    phi: np.ndarray
    event: np.ndarray

    @property
    def k(self) -> np.ndarray:
        return shared_key(self.a, self.b, self.n_states)

    @property
    def bob_k(self) -> np.ndarray:
        return shared_key(self.b, self.a, self.n_states)

    @property
    def cipher(self) -> np.ndarray:
        return encode_bit(self.k, self.s, self.n_states)

    @property
    def sifted(self) -> np.ndarray:
        return self.event <= Event.CLICK_D1

    @property
    def correct(self) -> np.ndarray:
        """``event == s``; meaningful on sifted rounds only."""
        return self.event == self.s

    def __len__(self):
        return self.a.size

    def __getitem__(self, i) -> SessionOutcome:
        sifted = bool(self.event[i] <= Event.CLICK_D1)
        return SessionOutcome(
            int(self.a[i]),
            int(self.b[i]),
            int((self.a[i] + self.b[i]) % self.n_states),
            int(self.s[i]),
            float(self.phi[i]),
            Event(int(self.event[i])),
            sifted,
            bool(self.event[i] == self.s[i]) if sifted else None,
        )

    def subset(self, mask) -> SessionBatch:
        return SessionBatch(self.n_states, self.a[mask], self.b[mask], self.s[mask], self.phi[mask], self.event[mask])

    @classmethod
    def concat(cls, parts: list[SessionBatch]) -> SessionBatch:
        return cls(
            parts[0].n_states,
            *(np.concatenate([getattr(p, f) for p in parts]) for f in ("a", "b", "s", "phi", "event")),
        )


def sample_events(probs: EventProbs, u: np.ndarray) -> np.ndarray:
    """Map uniforms ``u`` onto the categorical ``probs`` (one draw per round)."""
    c0 = probs.click_d0
    c1 = c0 + probs.click_d1
    c2 = c1 + probs.no_click
    return ((u >= c0).astype(np.int8) + (u >= c1) + (u >= c2)).astype(np.int8)


def _simulate_partition(config: SessionConfig, partition: int, count: int) -> SessionBatch:
    rng = stream(config.seed, PROTOCOL_TASK, partition)
    mu, n = config.set_params
    ch = config.channel
    a = rng.integers(0, n, count)
    b = rng.integers(0, n, count)
    s = rng.integers(0, 2, count)
    phi = np.asarray(sample_phase(ch, rng, count), dtype=float)
    u = rng.random(count)
    event = sample_events(event_probs(s, phi, ch.eta, ch.eta_d, mu), u)
    return SessionBatch(n, a, b, s, phi, event)


def empirical_stats(batch: SessionBatch) -> DetectionStats:
    m = len(batch)
    if m == 0:
        return DetectionStats(math.nan, math.nan, math.nan, math.nan, math.nan)
    sifted = batch.sifted
    p_cor = float(np.count_nonzero(sifted & batch.correct)) / m
    p_err = float(np.count_nonzero(sifted & ~batch.correct)) / m
    p_inc = float(np.count_nonzero(~sifted)) / m
    return DetectionStats.from_unsifted(p_cor, p_inc, p_err)


def simulate_sessions(config: SessionConfig, workers: int = 1) -> tuple[SessionBatch, DetectionStats]:
    """Run ``config.n_sessions`` rounds and return them with their empirical rates.

    Rounds are split into ``config.partitions`` chunks, each with its own
    stream from :func:`qdh.seeding.stream`; ``workers`` only changes how
    the chunks are scheduled, never the result.
    """
    counts = split_counts(config.n_sessions, config.partitions)
    jobs = [(p, c) for p, c in enumerate(counts)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _simulate_partition(config, *j), jobs))
    else:
        parts = [_simulate_partition(config, *j) for j in jobs]
    batch = SessionBatch.concat(parts)
    return batch, empirical_stats(batch)


def sift(batch: SessionBatch) -> tuple[SessionBatch, int]:
    """Drop no-click and double-click rounds; return the rest and their count."""
    kept = batch.subset(batch.sifted)
    return kept, len(kept)
