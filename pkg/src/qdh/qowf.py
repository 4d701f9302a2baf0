"""One-wayness of the map ``x -> |psi_x>``.

Holevo information, the square-root measurement (SRM) and its outcome
statistics, the relative-deviation ratio ``D`` against random guessing, the
Fano lower bound on the error probability, the information gain of the
optimal measurement, and the search for the smallest ``N`` with ``D <= eps``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.optimize import bisect

from .errors import ConfigError, NumericalError
from .fock import DEFAULT_CLIP_TOL, matrix_sqrt_pinv, support_projector, von_neumann_entropy
from .states import SymmetricStateSet, make_set, mixed_density, phase_shift_diagonal

DEFAULT_EPSILON = 2e-2


@dataclass(frozen=True)
class SquareRootMeasurement:
    """POVM ``Pi_y = (1/N) rho^{-1/2} |psi_y><psi_y| rho^{-1/2}``.

    Each element is rank one, ``Pi_y = |m_y><m_y|``; ``vectors[y]`` stores
    ``m_y`` and ``elements[y]`` the full matrix.
    """

    mu: float
    n_states: int
    n_cut: int
    vectors: np.ndarray
    elements: np.ndarray

    def completeness_residual(self, rho: np.ndarray, clip_tol: float = DEFAULT_CLIP_TOL) -> float:
        """Max-norm distance of ``sum_y Pi_y`` from the support projector of ``rho``."""
        _, proj = sector_sqrt_pinv(rho, self.n_states, clip_tol)
        return float(np.abs(self.elements.sum(axis=0) - proj).max())

    def covariance_residual(self) -> float:
        """Max-norm distance between ``Pi_y`` and ``U^y Pi_0 U^{-y}`` over all y."""
        worst = 0.0
        for y in range(self.n_states):
            d = phase_shift_diagonal(y, self.n_states, self.n_cut)
            rotated = d[:, None] * self.elements[0] * d.conj()[None, :]
            worst = max(worst, float(np.abs(self.elements[y] - rotated).max()))
        return worst

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(e).min() for e in self.elements))


class InfoGain(NamedTuple):
    h_x: float
    h_x_given_y: float
    gain: float


class NStarResult(NamedTuple):
    n_star: int | None
    n_values: tuple[int, ...]
    d_values: tuple[float, ...]

    @property
    def found(self) -> bool:
        return self.n_star is not None


@dataclass(frozen=True)
class QowfReport:
    mu: float
    n_states: int
    chi: float
    h_x: float
    h_x_given_y: float
    gain: float
    p_err_min: float
    p_err_rg: float
    d_ratio: float
    fano_p_err_lower: float
    epsilon: float

    @property
    def is_qowf(self) -> bool:
        return self.d_ratio <= self.epsilon


def holevo_chi(sset: SymmetricStateSet) -> float:
    """Holevo information in bits; for a pure-state ensemble it is ``S(rho)``."""
    return von_neumann_entropy(mixed_density(sset))


def sector_sqrt_pinv(rho: np.ndarray, n_states: int, clip_tol: float = DEFAULT_CLIP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """``rho^{-1/2}`` and the support projector, one photon-number residue at a time.

    For a symmetric set, ``rho`` only couples ``|n>`` and ``|n'>`` with
    ``n = n' (mod N)``, and each such block has rank one.  Inverting block by
    block keeps sectors whose weight is far below ``clip_tol * lambda_max``;
    a global relative cut would drop them, costing ``O(sqrt(lambda))`` in the
    success amplitude, and eigenvectors of near-degenerate tiny eigenvalues
    would mix sectors and break covariance.
    """
    dim = rho.shape[0]
    inv = np.zeros_like(rho, dtype=complex)
    proj = np.zeros_like(rho, dtype=complex)
    for r in range(min(n_states, dim)):
        idx = np.ix_(np.arange(r, dim, n_states), np.arange(r, dim, n_states))
        block = rho[idx]
        if not np.any(np.abs(block) > 0):
            continue
        inv[idx] = matrix_sqrt_pinv(block, clip_tol)
        proj[idx] = support_projector(block, clip_tol)
    if not np.any(proj):
        raise NumericalError("density operator has no positive eigenvalue")
    return inv, proj


def build_srm(sset: SymmetricStateSet, clip_tol: float = DEFAULT_CLIP_TOL, check: bool = True) -> SquareRootMeasurement:
    """Construct the square-root measurement for ``sset``.

    With ``check`` on, completeness on the support of ``rho`` (1e-8) and
    rotational covariance (1e-9) are verified and a
    :class:`~qdh.errors.NumericalError` is raised if either fails.
    """
    rho = mixed_density(sset)
    r, _ = sector_sqrt_pinv(rho, sset.n_states, clip_tol)
    vectors = sset.states @ r.T / math.sqrt(sset.n_states)
    elements = np.einsum("yi,yj->yij", vectors, vectors.conj())
    srm = SquareRootMeasurement(sset.mu, sset.n_states, sset.n_cut, vectors, elements)
    if check:
        res = srm.completeness_residual(rho, clip_tol)
        if res > 1e-8:
            raise NumericalError(f"SRM completeness violated on support (residual {res:.2e})")
        cov = srm.covariance_residual()
        if cov > 1e-9:
            raise NumericalError(f"SRM covariance violated (residual {cov:.2e})")
    return srm


def conditional_prob_matrix(sset: SymmetricStateSet, srm: SquareRootMeasurement) -> np.ndarray:
    """``P[x, y] = Tr(Pi_y rho_x)``, the probability of outcome ``y`` for state ``x``."""
    if (srm.n_states, srm.n_cut) != (sset.n_states, sset.n_cut) or srm.mu != sset.mu:
        raise ConfigError("measurement was built for a different state set")
    s = sset.states
    p = np.einsum("xi,yij,xj->xy", s.conj(), srm.elements, s).real
    return np.clip(p, 0.0, None)


def min_error_prob(p: np.ndarray) -> float:
    """Average error with equal priors: ``1 - (1/N) sum_x P(x|x)``."""
    p = np.asarray(p, dtype=float)
    return float(1.0 - np.trace(p) / p.shape[0])


def d_ratio(p_err_min: float, n_states: int) -> float:
    """Relative distance of ``p_err_min`` from the random-guess error ``(N-1)/N``."""
    if not 0.0 <= p_err_min <= 1.0 + 1e-12:
        raise ConfigError(f"error probability out of range: {p_err_min}")
    p_rg = (n_states - 1) / n_states
    return abs(p_err_min - p_rg) / p_rg


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def fano_error_lower_bound(chi: float, n_states: int, xtol: float = 1e-10) -> float:
    """Smallest ``p`` allowed by ``H(p) + p log2(N-1) >= log2(N) - chi``.

    The left-hand side increases monotonically on ``[0, (N-1)/N]``, so the
    bound is its crossing point with the information deficit, bracketed on
    that interval and located by bisection.
    """
    log_n = math.log2(n_states)
    if chi < -1e-12 or chi > log_n + 1e-10:
        raise ConfigError(f"chi must lie in [0, log2 N] = [0, {log_n:.6f}], got {chi}")
    deficit = log_n - min(max(chi, 0.0), log_n)
    hi = (n_states - 1) / n_states
    log_nm1 = math.log2(n_states - 1) if n_states > 2 else 0.0

    def excess(p):
        return binary_entropy(p) + p * log_nm1 - deficit

    if excess(0.0) >= 0.0:
        return 0.0
    if excess(hi) <= 0.0:
        return hi
    return float(bisect(excess, 0.0, hi, xtol=xtol))


def info_gain(p: np.ndarray) -> InfoGain:
    """Entropies of ``x`` before and after the measurement, equal priors.

    ``H(x|y)`` is obtained from the Bayesian posterior
    ``P(x|y) = P(y|x) / sum_x' P(y|x')``.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    joint = p / n
    p_y = joint.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        post = np.where(joint > 0, joint / p_y[None, :], 1.0)
    h_x_given_y = float(-np.sum(joint * np.log2(post)))
    h_x = math.log2(n)
    return InfoGain(h_x, h_x_given_y, h_x - h_x_given_y)


def qowf_report(sset: SymmetricStateSet, epsilon: float = DEFAULT_EPSILON) -> QowfReport:
    """Collect every one-wayness figure for a single ``(mu, N)``."""
    chi = holevo_chi(sset)
    srm = build_srm(sset)
    p = conditional_prob_matrix(sset, srm)
    p_err = min_error_prob(p)
    gain = info_gain(p)
    n = sset.n_states
    return QowfReport(
        mu=sset.mu,
        n_states=n,
        chi=chi,
        h_x=gain.h_x,
        h_x_given_y=gain.h_x_given_y,
        gain=gain.gain,
        p_err_min=p_err,
        p_err_rg=(n - 1) / n,
        d_ratio=d_ratio(min(p_err, 1.0), n),
        fano_p_err_lower=fano_error_lower_bound(min(chi, math.log2(n)), n),
        epsilon=epsilon,
    )


def d_ratio_for(mu: float, n_states: int) -> float:
    sset = make_set(mu, n_states)
    p = conditional_prob_matrix(sset, build_srm(sset))
    return d_ratio(min(min_error_prob(p), 1.0), n_states)


def find_n_star(
    mu: float,
    epsilon: float = DEFAULT_EPSILON,
    n_range: Iterable[int] = range(6, 62, 2),
    workers: int = 1,
) -> NStarResult:
    """Smallest even ``N`` in ``n_range`` whose ratio ``D`` is at most ``epsilon``.

    ``D`` must be non-increasing over the scanned range (1e-10 slack);
    otherwise :class:`~qdh.errors.NumericalError` is raised.  ``n_star`` is
    ``None`` when no scanned ``N`` qualifies.
    """
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    ns = tuple(sorted(int(n) for n in n_range))
    for n in ns:
        if n % 2 or n <= 4:
            raise ConfigError(f"scan values must be even and > 4, got {n}")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            ds = tuple(pool.map(lambda n: d_ratio_for(mu, n), ns))
    else:
        ds = tuple(d_ratio_for(mu, n) for n in ns)
    for (n0, d0), (n1, d1) in zip(zip(ns, ds), zip(ns[1:], ds[1:])):
        if d1 > d0 + 1e-10:
            raise NumericalError(f"D increases from N={n0} ({d0:.3e}) to N={n1} ({d1:.3e}) at mu={mu}")
    n_star = next((n for n, d in zip(ns, ds) if d <= epsilon), None)
    return NStarResult(n_star, ns, ds)
