"""Fiber and detector model: loss, detector efficiency and Gaussian phase drift.

Dark counts are not modelled (``DARK_COUNT_PROB`` is fixed at zero); at
~1e-7 per gate they are negligible next to the signal click rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConfigError

DARK_COUNT_PROB = 0.0
DEFAULT_ALPHA_DB_PER_KM = 0.2
DEFAULT_DIFFUSION = 1e-3  # rad^2 / km
DEFAULT_GH_NODES = 101
# past this width the drift is uniform on the circle to machine precision
SIGMA_CAP = 4.0 * math.pi


@dataclass(frozen=True)
class ChannelParams:
    """Fiber of ``length_km`` with ``alpha_db_per_km`` loss, detectors of
    efficiency ``eta_d`` and phase diffusion coefficient ``diffusion``
    (rad^2/km)."""

    length_km: float = 0.0
    eta_d: float = 0.5
    alpha_db_per_km: float = DEFAULT_ALPHA_DB_PER_KM
    diffusion: float = DEFAULT_DIFFUSION

    def __post_init__(self):
        for name in ("length_km", "eta_d", "alpha_db_per_km", "diffusion"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.length_km < 0:
            raise ConfigError(f"length must be >= 0 km, got {self.length_km}")
        if not 0.0 < self.eta_d <= 1.0:
            raise ConfigError(f"detector efficiency must lie in (0, 1], got {self.eta_d}")
        if self.alpha_db_per_km < 0 or self.diffusion < 0:
            raise ConfigError("attenuation and diffusion must be >= 0")

    @property
    def eta(self) -> float:
        return transmissivity(self)

    @property
    def sigma_phi(self) -> float:
        return sigma_phi(self)


def transmissivity(params: ChannelParams) -> float:
    """``eta = 10^(-alpha L / 10)``."""
    return 10.0 ** (-params.alpha_db_per_km * params.length_km / 10.0)


def sigma_phi(params: ChannelParams) -> float:
    """Phase-drift standard deviation ``sqrt(D L)`` in radians."""
    return math.sqrt(params.diffusion * params.length_km)


def sample_phase(params: ChannelParams, rng: np.random.Generator, size=None):
    """Draw phase drift(s) from ``N(0, sigma_phi^2)``."""
    sigma = sigma_phi(params)
    if sigma == 0.0:
        return 0.0 if size is None else np.zeros(size)
    return rng.normal(0.0, sigma, size)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights integrating against the standard normal density."""

    nodes: np.ndarray
    weights: np.ndarray

    def scaled(self, sigma: float) -> np.ndarray:
        return sigma * self.nodes


@lru_cache(maxsize=8)
def gauss_hermite_rule(n_nodes: int = DEFAULT_GH_NODES) -> QuadratureRule:
    """Probabilists' rule from the physicists' Gauss-Hermite nodes:
    ``phi_i = sqrt(2) x_i``, ``w_i / sqrt(pi)``."""
    x, w = np.polynomial.hermite.hermgauss(n_nodes)
    nodes = math.sqrt(2.0) * x
    weights = w / math.sqrt(math.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


def gauss_marginalize(
    f: Callable[[np.ndarray], np.ndarray],
    sigma: float,
    rule: QuadratureRule | None = None,
) -> float:
    """``E[f(phi)]`` for ``phi ~ N(0, sigma^2)``.

    ``f`` must accept an array of phases.  ``sigma = 0`` returns ``f(0)``.
    Above ``SIGMA_CAP`` the drift is treated as uniform on ``[0, 2pi)`` and
    ``f`` must be 2pi-periodic (all click-probability integrands are).
    """
    if sigma < 0 or not math.isfinite(sigma):
        raise ConfigError(f"sigma must be finite and >= 0, got {sigma}")
    if sigma == 0.0:
        return float(np.asarray(f(np.zeros(1)))[0])
    if sigma > SIGMA_CAP:
        # trapezoid on a periodic integrand is spectrally accurate
        phi = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
        return float(np.mean(f(phi)))
    rule = rule or gauss_hermite_rule()
    return float(np.dot(rule.weights, f(rule.scaled(sigma))))
