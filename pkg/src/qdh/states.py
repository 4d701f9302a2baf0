"""The public set of N symmetric coherent states and its phase-shift symmetry.

State ``x`` has amplitude ``sqrt(mu) exp(i x 2pi/N)``; the elementary phase
shift ``U = exp(i (2pi/N) a^dag a)`` maps state ``x`` onto ``x+1 (mod N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .fock import FockVector, coherent_fock_vector, default_n_cut


class SetParams(NamedTuple):
    mu: float
    n_states: int


class DiagonalityCheck(NamedTuple):
    holds: bool
    n_min: int
    n_max: int


def validate_set_params(mu: float, n_states: int):
    if not math.isfinite(mu) or mu < 0:
        raise ConfigError(f"mean photon number must be finite and >= 0, got {mu}")
    if int(n_states) != n_states or n_states % 2 or n_states <= 4:
        raise ConfigError(f"number of states must be an even integer > 4, got {n_states}")


@dataclass(frozen=True)
class SymmetricStateSet:
    """N coherent states of mean photon number ``mu`` on ``n_cut+1`` levels.

    ``states`` holds the Fock amplitudes row-wise, ``states[x]`` being
    ``|psi_x>``.  Build instances through :func:`make_set`.
    """

    mu: float
    n_states: int
    n_cut: int
    states: np.ndarray

    @property
    def delta_phi(self) -> float:
        return 2.0 * math.pi / self.n_states

    @property
    def dim(self) -> int:
        return self.n_cut + 1

    @property
    def params(self) -> SetParams:
        return SetParams(self.mu, self.n_states)

    def vector(self, x: int) -> FockVector:
        return FockVector(self.states[x % self.n_states])

    def __len__(self):
        return self.n_states


def make_set(mu: float, n_states: int, n_cut: int | None = None, *, strict: bool = True) -> SymmetricStateSet:
    """Build and cache all N states of the set.

    ``strict=False`` lifts the ``N even, N > 4`` restriction (any ``N >= 2``)
    so the discrimination machinery can be checked against two-state and
    small-N closed forms.
    """
    if strict:
        validate_set_params(mu, n_states)
    else:
        if not math.isfinite(mu) or mu < 0:
            raise ConfigError(f"mean photon number must be finite and >= 0, got {mu}")
        if int(n_states) != n_states or n_states < 2:
            raise ConfigError(f"number of states must be an integer >= 2, got {n_states}")
    n_states = int(n_states)
    if n_cut is None:
        n_cut = default_n_cut(mu)
    dphi = 2.0 * math.pi / n_states
    states = np.array([coherent_fock_vector(mu, x * dphi, n_cut).amplitudes for x in range(n_states)])
    states.setflags(write=False)
    return SymmetricStateSet(float(mu), n_states, int(n_cut), states)


def phase_shift_diagonal(x: int, n_states: int, n_cut: int) -> np.ndarray:
    """Diagonal of ``U^x`` in the Fock basis; negative ``x`` wraps to ``N + x``."""
    x = int(x) % n_states
    n = np.arange(n_cut + 1)
    # reduce n*x mod N first so the phase is exact for every power
    return np.exp(2j * math.pi * ((n * x) % n_states) / n_states)


@dataclass(frozen=True)
class PhaseShiftPower:
    """The operator ``U^exponent`` on ``Z_N``; products compose exponents mod N."""

    exponent: int
    n_states: int

    def __post_init__(self):
        object.__setattr__(self, "exponent", int(self.exponent) % self.n_states)

    def __mul__(self, other: PhaseShiftPower) -> PhaseShiftPower:
        if not isinstance(other, PhaseShiftPower):
            return NotImplemented
        if other.n_states != self.n_states:
            raise ConfigError("phase shifts act on sets of different size")
        return PhaseShiftPower(self.exponent + other.exponent, self.n_states)

    def inverse(self) -> PhaseShiftPower:
        return PhaseShiftPower(-self.exponent, self.n_states)

    def __call__(self, v: FockVector | np.ndarray) -> FockVector:
        return apply_phase_shift(v, self.exponent, self.n_states)


def apply_phase_shift(v: FockVector | np.ndarray, x: int, n_states: int) -> FockVector:
    """Apply ``U^x``: multiply amplitude ``n`` by ``exp(i n x 2pi/N)``."""
    if int(x) != x or not 0 <= x < n_states:
        raise ConfigError(f"phase-shift exponent must lie in [0, {n_states}), got {x}")
    amps = v.amplitudes if isinstance(v, FockVector) else np.asarray(v, dtype=complex)
    return FockVector(amps * phase_shift_diagonal(x, n_states, amps.size - 1))


def overlap(sset: SymmetricStateSet, x: int, x_prime: int) -> complex:
    """``<psi_{x'}|psi_x>`` from the cached vectors."""
    return complex(np.vdot(sset.states[x_prime % sset.n_states], sset.states[x % sset.n_states]))


def gram_matrix(sset: SymmetricStateSet) -> np.ndarray:
    """All pairwise overlaps, ``G[x', x] = <psi_{x'}|psi_x>``."""
    s = sset.states
    return s.conj() @ s.T


def mixed_density(sset: SymmetricStateSet) -> np.ndarray:
    """Equal-prior mixture ``(1/N) sum_x |psi_x><psi_x|``."""
    s = sset.states
    rho = s.T @ s.conj() / sset.n_states
    return 0.5 * (rho + rho.conj().T)


def diagonality_condition(mu: float, n_states: int) -> DiagonalityCheck:
    """Whether ``N >= n_max - n_min`` with ``n_max = ceil(mu + 6 sqrt(mu))``
    and ``n_min = max(0, floor(mu - 6 sqrt(mu)))``.

    When it holds the mixed state is diagonal in the Fock basis for all
    practical purposes.
    """
    root = math.sqrt(mu)
    n_max = math.ceil(mu + 6.0 * root)
    n_min = max(0, math.floor(mu - 6.0 * root))
    return DiagonalityCheck(n_states >= n_max - n_min, n_min, n_max)
