"""Dense linear algebra on a truncated single-mode Fock space.

Vectors are complex arrays indexed by photon number ``n = 0..n_cut``;
operators are ``(n_cut+1, n_cut+1)`` complex Hermitian arrays.  Everything
here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import ConfigError, NumericalError

HERMITIAN_RTOL = 1e-10
DEFAULT_CLIP_TOL = 1e-12


def default_n_cut(mu: float) -> int:
    """Truncation photon number used when none is given.

    Keeps the discarded Poisson tail far below every tolerance used in
    the package.
    """
    return max(20, math.ceil(mu + 10.0 * math.sqrt(mu)) + 10)


def poisson_pmf(mu: float, n_cut: int) -> np.ndarray:
    """Poisson probabilities ``P(mu, n)`` for ``n = 0..n_cut`` (log-space)."""
    n = np.arange(n_cut + 1)
    if mu == 0:
        out = np.zeros(n_cut + 1)
        out[0] = 1.0
        return out
    return np.exp(-mu + n * math.log(mu) - gammaln(n + 1))


@dataclass(frozen=True)
class FockVector:
    """Amplitudes of a single-mode pure state in the truncated Fock basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ConfigError("FockVector amplitudes must be a non-empty 1-D array")
        if self.norm2_of(amps) > 1.0 + 1e-12:
            raise NumericalError("FockVector squared norm exceeds 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @staticmethod
    def norm2_of(amps: np.ndarray) -> float:
        return float(np.vdot(amps, amps).real)

    @property
    def n_cut(self) -> int:
        return self.amplitudes.size - 1

    @property
    def norm2(self) -> float:
        return self.norm2_of(self.amplitudes)

    def projector(self) -> np.ndarray:
        """Return ``|v><v|``."""
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __len__(self):
        return self.amplitudes.size


class EigenSystem(NamedTuple):
    """Eigenvalues (descending) and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def coherent_fock_vector(mu: float, phase: float, n_cut: int) -> FockVector:
    """Fock expansion of the coherent state with amplitude ``sqrt(mu) e^{i phase}``.

    ``amplitudes[n] = exp(-mu/2) (sqrt(mu) e^{i phase})^n / sqrt(n!)``, with
    the modulus evaluated through log-gamma so large ``n_cut`` cannot
    overflow.
    """
    if not (math.isfinite(mu) and math.isfinite(phase)):
        raise ConfigError("mu and phase must be finite")
    if mu < 0:
        raise ConfigError(f"mean photon number must be >= 0, got {mu}")
    if int(n_cut) != n_cut or n_cut < 0:
        raise ConfigError(f"n_cut must be a non-negative integer, got {n_cut}")
    n = np.arange(int(n_cut) + 1)
    modulus = np.sqrt(poisson_pmf(mu, int(n_cut)))
    return FockVector(modulus * np.exp(1j * phase * n))


def check_hermitian(a, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate and return ``a`` as a square complex Hermitian array."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max() if a.size else 0.0
    if np.abs(a - a.conj().T).max(initial=0.0) > rtol * scale:
        raise NumericalError("matrix is not Hermitian within tolerance")
    return a


def hermitian_eig(a) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    a = check_hermitian(a)
    # symmetrise so eigh sees an exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    order = np.argsort(w)[::-1]
    return EigenSystem(w[order], v[:, order])


def _support_mask(w: np.ndarray, clip_tol: float) -> np.ndarray:
    lam_max = w.max(initial=0.0)
    if lam_max <= 0.0:
        raise NumericalError("operator has no positive eigenvalue")
    return w > clip_tol * lam_max


def _check_psd(w: np.ndarray, lam_scale: float, tol: float = 1e-10):
    if w.min(initial=0.0) < -tol * max(lam_scale, 1.0):
        raise NumericalError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")


def matrix_sqrt_pinv(a, clip_tol: float = DEFAULT_CLIP_TOL) -> np.ndarray:
    """Inverse square root of a PSD matrix restricted to its support.

    Eigenvalues ``<= clip_tol * lambda_max`` are treated as zero and
    contribute nothing to the result.
    """
    w, v = hermitian_eig(a)
    _check_psd(w, w.max(initial=0.0))
    keep = _support_mask(w, clip_tol)
    inv_sqrt = np.zeros_like(w)
    inv_sqrt[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv_sqrt) @ v.conj().T


def support_projector(a, clip_tol: float = DEFAULT_CLIP_TOL) -> np.ndarray:
    """Orthogonal projector onto the span of eigenvectors kept by
    :func:`matrix_sqrt_pinv`."""
    w, v = hermitian_eig(a)
    keep = _support_mask(w, clip_tol)
    vk = v[:, keep]
    return vk @ vk.conj().T


def von_neumann_entropy(a) -> float:
    """``-sum lambda log2 lambda`` in bits; the trace is renormalised to 1."""
    w = hermitian_eig(a).eigenvalues
    if w.min(initial=0.0) < -1e-10:
        raise NumericalError(f"density matrix has negative eigenvalue {w.min():.3e}")
    tr = w.sum()
    if abs(tr - 1.0) > 1e-6:
        raise NumericalError(f"density matrix trace {tr:.8f} is not 1")
    p = w[w > 0] / tr
    return float(max(-np.sum(p * np.log2(p)), 0.0))


def trace_product(a, b) -> float:
    """``Re Tr(A B)``; the imaginary residue must vanish to 1e-10."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ConfigError(f"dimension mismatch: {a.shape} vs {b.shape}")
    t = np.einsum("ij,ji->", a, b)
    if abs(t.imag) > 1e-10:
        raise NumericalError(f"Tr(AB) has imaginary part {t.imag:.3e}")
    return float(t.real)
