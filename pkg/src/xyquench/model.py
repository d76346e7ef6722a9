"""
Quasiparticle spectrum and mode evolution of the transverse-field XY chain.

    H = -lam * sum_i [(1+gamma) Sx_i Sx_{i+1} + (1-gamma) Sy_i Sy_{i+1}] - sum_i Sz_i

After Jordan-Wigner, Fourier and Bogoliubov transformations every momentum
pair (k, -k) is an independent two-level problem.  The functions here are
vectorised over ``k`` (and over ``t`` where it appears) and never divide by
zero: the removable 0/0 points (gamma*lam*sin k = 0, or Lambda_k = 0 at
lam = 1, k = pi) are replaced by their finite limits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# below this the gap is treated as closed
LAMBDA_EPS = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Post-quench coupling ``lam`` (>= 0) and anisotropy ``gamma`` in [0, 1]."""

    lam: float
    gamma: float

    def __post_init__(self):
        lam, gamma = float(self.lam), float(self.gamma)
        if not np.isfinite(lam) or lam < 0:
            raise ValueError(f"lam must be finite and >= 0, got {self.lam!r}")
        if not np.isfinite(gamma) or not 0.0 <= gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "gamma", gamma)

    @property
    def is_xx(self) -> bool:
        return self.gamma == 0.0

    def max_energy(self) -> float:
        """Upper bound of Lambda_k over the Brillouin zone."""
        return 1.0 + self.lam


@dataclass(frozen=True)
class ModeData:
    k: np.ndarray
    Lambda: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class ModeEvolution:
    c: np.ndarray
    d: np.ndarray


def _parts(params: ModelParams, k):
    """Return (A, Delta, Lambda) with A = 1 + lam cos k, Delta = gamma lam sin k."""
    k = np.asarray(k, dtype=float)
    a = 1.0 + params.lam * np.cos(k)
    delta = params.gamma * params.lam * np.sin(k)
    return a, delta, np.hypot(a, delta)


def dispersion(params: ModelParams, k):
    """Quasiparticle energy Lambda_k = sqrt((1 + lam cos k)^2 + lam^2 gamma^2 sin^2 k)."""
    return _parts(params, k)[2]


def _safe_ratio(num, den, lam_k):
    """num / den where the gap is open, 0 where it is closed."""
    num, den, lam_k = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (num, den, lam_k)))
    out = np.zeros(num.shape)
    np.divide(num, den, out=out, where=lam_k > LAMBDA_EPS)
    return out


def bogoliubov(params: ModelParams, k):
    """Bogoliubov coefficients (alpha_k, beta_k).

    Evaluated through the closed forms

        alpha^2 = (Lambda - A) / (2 Lambda),  beta^2 = (Lambda + A) / (2 Lambda),

    which equal the quotient definitions wherever those are finite; the
    smaller of the two is rewritten as Delta^2 / (2 Lambda (Lambda + |A|)).  beta
    carries the sign of gamma*lam*sin k (taken positive where that vanishes);
    alpha >= 0.  At a closed gap both squares are set to 1/2, the limit
    approached along k at lam = 1, k -> pi.
    """
    a, delta, lam_k = _parts(params, k)
    closed = lam_k <= LAMBDA_EPS
    # the larger square directly, the smaller one through Delta^2 to avoid cancellation
    big = _safe_ratio(lam_k + np.abs(a), 2.0 * lam_k, lam_k)
    small = _safe_ratio(delta**2, 2.0 * lam_k * (lam_k + np.abs(a)), lam_k)
    beta2 = np.where(a >= 0, big, small)
    alpha2 = np.where(a >= 0, small, big)
    beta2 = np.where(closed, 0.5, beta2)
    alpha2 = np.where(closed, 0.5, alpha2)
    alpha = np.sqrt(alpha2)
    beta = np.where(delta < 0, -1.0, 1.0) * np.sqrt(beta2)
    return alpha, beta


def bogoliubov_quotient(params: ModelParams, k):
    """The textbook quotient form of (alpha_k, beta_k); 0/0 at the removable points.

    Kept as an independent cross-check of :func:`bogoliubov`.
    """
    a, delta, lam_k = _parts(params, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        den = np.sqrt(2.0 * (lam_k**2 - a * lam_k))
        return (lam_k - a) / den, delta / den


def mode_data(params: ModelParams, k) -> ModeData:
    k = np.asarray(k, dtype=float)
    alpha, beta = bogoliubov(params, k)
    return ModeData(k=k, Lambda=dispersion(params, k), alpha=alpha, beta=beta)


def mode_coeffs(params: ModelParams, k, t) -> ModeEvolution:
    """Heisenberg-picture coefficients c_k(t) and d_k(t) of the lattice fermions.

    c_k(t) = exp(i Lambda_k t) - 2 i beta_k^2 sin(Lambda_k t)
    d_k(t) = alpha_k beta_k sin(Lambda_k t)
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    lam_k = dispersion(params, k)
    alpha, beta = bogoliubov(params, k)
    phase = lam_k * np.asarray(t, dtype=float)
    s = np.sin(phase)
    c = np.exp(1j * phase) - 2j * beta**2 * s
    d = alpha * beta * s
    return ModeEvolution(c=c, d=d)


def pair_weight(params: ModelParams, k):
    """4 alpha^2 beta^2 = (gamma lam sin k)^2 / Lambda_k^2, smooth through the closed gap."""
    _, delta, lam_k = _parts(params, k)
    return _safe_ratio(delta**2, lam_k**2, lam_k)


def anomalous_weights(params: ModelParams, k):
    """Return (alpha beta, alpha beta (1 - 2 beta^2)) in their smooth forms.

    alpha beta = Delta / (2 Lambda) and 1 - 2 beta^2 = -A / Lambda.
    """
    a, delta, lam_k = _parts(params, k)
    ab = _safe_ratio(delta, 2.0 * lam_k, lam_k)
    ab_skew = -_safe_ratio(a * delta, 2.0 * lam_k**2, lam_k)
    return ab, ab_skew
