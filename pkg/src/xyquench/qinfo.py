"""
Two-qubit correlation measures on X states (entropies in bits).

Classical correlation is J(rho) = S(rho_1) - min_Pi sum_j q_j S(rho_1^j), the
minimum taken over rank-1 projective measurements on qubit 2.  Discord is
I - J.

In Bloch form rho = 1/4 (1 + r.s1 + s.s2 + sum T_ij s1_i s2_j).  Measuring
qubit 2 along the unit vector n gives outcome probabilities (1 +- s.n)/2 and
qubit-1 Bloch vectors (r +- T n)/(1 +- s.n).  For X states r, s lie along z
and T is block diagonal, so for a fixed polar angle the best azimuth simply
maximises |T_perp u|: the search reduces to one angle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .correlators import XState

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class InvalidDistribution(ValueError):
    pass


class OptimizerFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerSettings:
    theta_grid: int = 64
    phi_grid: int = 32
    golden_iters: int = 80
    tol: float = 1e-9
    method: str = "reduced"  # or "simplex"


@dataclass(frozen=True)
class MeasurementBasis:
    """Projectors onto +-n on qubit 2, n = (sin t cos p, sin t sin p, cos t)."""

    theta: float
    phi: float

    def direction(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def projectors(self):
        ns = np.einsum("i,ijk->jk", self.direction(), PAULI)
        eye = np.eye(2)
        return 0.5 * (eye + ns), 0.5 * (eye - ns)


@dataclass(frozen=True)
class MeasurementOutcome:
    q: float
    rho1_post: np.ndarray


@dataclass(frozen=True)
class CorrelationTriple:
    concurrence: np.ndarray | float
    discord: np.ndarray | float
    classical: np.ndarray | float


# ----------------------------------------------------------------------------
# entropies
# ----------------------------------------------------------------------------

def _xlog2x(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def entropy(spectrum) -> float:
    """Shannon entropy -sum p log2 p of a probability list."""
    p = np.asarray(spectrum, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDistribution(f"not a probability distribution: {spectrum!r}")
    return float(-_xlog2x(p).sum())


def binary_entropy(p):
    p = np.clip(p, 0.0, 1.0)
    return -_xlog2x(p) - _xlog2x(1.0 - p)


def _qubit_entropy(bloch_norm):
    return binary_entropy(0.5 * (1.0 + np.clip(bloch_norm, 0.0, 1.0)))


def _fields(x: XState):
    return tuple(np.asarray(v) for v in x.astuple())


def x_eigenvalues(x: XState) -> np.ndarray:
    """The four eigenvalues, from the two 2x2 blocks of the X form."""
    r11, r22, r33, r44, r14, r23 = _fields(x)
    out = []
    for a, b, c in ((r11, r44, r14), (r22, r33, r23)):
        mean = 0.5 * (a + b)
        rad = np.sqrt((0.5 * (a - b)) ** 2 + np.abs(c) ** 2)
        out += [mean + rad, mean - rad]
    return np.clip(np.stack(out, axis=-1), 0.0, 1.0)


def marginal_bloch(x: XState):
    """z components of the two single-qubit Bloch vectors."""
    r11, r22, r33, r44, _, _ = _fields(x)
    return r11 + r22 - r33 - r44, r11 - r22 + r33 - r44


def joint_entropy(x: XState):
    return -_xlog2x(x_eigenvalues(x)).sum(axis=-1)


def mutual_information(x: XState):
    """I = S(rho_1) + S(rho_2) - S(rho_12)."""
    rz, sz = marginal_bloch(x)
    return _unwrap(_qubit_entropy(np.abs(rz)) + _qubit_entropy(np.abs(sz)) - joint_entropy(x))


def concurrence(x: XState):
    r11, r22, r33, r44, r14, r23 = _fields(x)
    e = 2.0 * np.maximum.reduce([
        np.zeros(np.shape(r11)),
        np.abs(r23) - np.sqrt(np.maximum(r11 * r44, 0.0)),
        np.abs(r14) - np.sqrt(np.maximum(r22 * r33, 0.0)),
    ])
    return _unwrap(np.minimum(e, 1.0))


def _unwrap(v):
    v = np.asarray(v)
    return v.item() if v.ndim == 0 else v


# ----------------------------------------------------------------------------
# measurements on qubit 2
# ----------------------------------------------------------------------------

def correlation_tensor(rho) -> np.ndarray:
    """T_ij = tr(rho s_i x s_j) for (..., 4, 4) input."""
    ops = np.einsum("iab,jcd->ijacbd", PAULI, PAULI).reshape(3, 3, 4, 4)
    return np.einsum("ijab,...ba->...ij", ops, rho).real


def measure(x: XState, basis: MeasurementBasis):
    """Both outcomes of a projective measurement of qubit 2 (explicit projectors)."""
    rho = x.matrix().reshape(2, 2, 2, 2)  # (a1, a2, b1, b2)
    outcomes = []
    for proj in basis.projectors():
        # tr_2[(1 x P) rho (1 x P)] = tr_2[(1 x P) rho]
        post = np.einsum("xc,acbx->ab", proj, rho)
        q = float(np.trace(post).real)
        rho1 = post / q if q > 0 else np.eye(2) / 2
        outcomes.append(MeasurementOutcome(q, rho1))
    return outcomes


def measured_objective(x: XState, basis: MeasurementBasis) -> float:
    """S(rho_1) - sum_j q_j S(rho_1^j) for one basis, via explicit projectors."""
    rz, _ = marginal_bloch(x)
    s1 = float(_qubit_entropy(abs(float(rz))))
    cond = 0.0
    for out in measure(x, basis):
        if out.q > 0:
            cond += out.q * entropy(np.clip(np.linalg.eigvalsh(out.rho1_post), 0.0, 1.0))
    return s1 - cond


def _x_params(x: XState):
    """(rz, sz, Tzz, g) where g is the largest squared singular value of T_perp."""
    rz, sz = marginal_bloch(x)
    r11, r22, r33, r44, r14, r23 = _fields(x)
    tzz = r11 - r22 - r33 + r44
    m = correlation_tensor(x.matrix())[..., :2, :2]
    # singular values of T_perp are 2 (|r14| +- |r23|)
    g = 4.0 * (np.abs(r14) + np.abs(r23)) ** 2
    return rz, sz, tzz, g, m


def _conditional_entropy(rz, sz, tzz, g, theta):
    """sum_j q_j S(rho_1^j) for a measurement at polar angle theta (best azimuth)."""
    c, s2 = np.cos(theta), np.sin(theta) ** 2
    total = 0.0
    for sign in (1.0, -1.0):
        q = 0.5 * (1.0 + sign * sz * c)
        vz = rz + sign * tzz * c
        # |q v| = |r +- T n| / 2
        norm = np.sqrt(vz**2 + s2 * g)
        with np.errstate(divide="ignore", invalid="ignore"):
            bloch = np.where(q > 0, norm / (2.0 * q), 0.0)
        total = total + np.where(q > 0, q * _qubit_entropy(bloch), 0.0)
    return total


def _reduced_search(x: XState, opt: OptimizerSettings):
    """Grid over theta in [0, pi/2] then a vectorised golden-section refinement."""
    rz, sz, tzz, g, m = (np.atleast_1d(v) for v in _x_params(x))
    m = m.reshape(-1, 2, 2)
    col = lambda v: v[:, None]  # noqa: E731
    thetas = np.linspace(0.0, np.pi / 2, opt.theta_grid + 1)
    grid = _conditional_entropy(col(rz), col(sz), col(tzz), col(g), thetas[None, :])
    best = np.argmin(grid, axis=1)
    step = thetas[1] - thetas[0]
    lo = np.clip(thetas[best] - step, 0.0, np.pi / 2)
    hi = np.clip(thetas[best] + step, 0.0, np.pi / 2)
    f = lambda th: _conditional_entropy(rz, sz, tzz, g, th)  # noqa: E731
    a = hi - GOLDEN * (hi - lo)
    b = lo + GOLDEN * (hi - lo)
    fa, fb = f(a), f(b)
    for _ in range(opt.golden_iters):
        left = fa < fb
        hi = np.where(left, b, hi)
        lo = np.where(left, lo, a)
        a_new = hi - GOLDEN * (hi - lo)
        b_new = lo + GOLDEN * (hi - lo)
        a, b = np.where(left, a_new, b), np.where(left, a, b_new)
        # one fresh evaluation per state per sweep
        fresh = f(np.where(left, a, b))
        fa, fb = np.where(left, fresh, fb), np.where(left, fa, fresh)
    if np.any(hi - lo > 1e-7):
        raise OptimizerFailure("golden-section bracket did not shrink")
    theta_ref = 0.5 * (lo + hi)
    cond_ref = f(theta_ref)
    cond_grid = grid[np.arange(len(best)), best]
    use_ref = cond_ref <= cond_grid
    theta = np.where(use_ref, theta_ref, thetas[best])
    cond = np.where(use_ref, cond_ref, cond_grid)
    if not np.all(np.isfinite(cond)):
        raise OptimizerFailure("non-finite objective")
    # best azimuth: top right-singular vector of T_perp
    _, vecs = np.linalg.eigh(np.einsum("...ji,...jk->...ik", m, m))
    phi = np.mod(np.arctan2(vecs[:, 1, 1], vecs[:, 0, 1]), 2 * np.pi)
    return cond, theta, phi


def bloch_objective(x: XState, theta, phi):
    """S(rho_1) - conditional entropy for arbitrary (theta, phi); any two-qubit Bloch data."""
    rho = x.matrix()
    t = correlation_tensor(rho)
    r = np.einsum("...ab,iba->...i", rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
                  .trace(axis1=-3, axis2=-1), PAULI).real
    s = np.einsum("...ab,iba->...i", rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
                  .trace(axis1=-4, axis2=-2), PAULI).real
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    sn = n @ s
    tn = n @ t.T
    cond = 0.0
    for sign in (1.0, -1.0):
        q = 0.5 * (1.0 + sign * sn)
        norm = np.linalg.norm(r + sign * tn, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            bloch = np.where(q > 0, norm / (2.0 * q), 0.0)
        cond = cond + np.where(q > 0, q * _qubit_entropy(bloch), 0.0)
    return _qubit_entropy(np.linalg.norm(r)) - cond


def _simplex_search(x: XState, opt: OptimizerSettings):
    """Grid over the upper hemisphere followed by Nelder-Mead in (theta, phi)."""
    th = np.linspace(0.0, np.pi / 2, opt.phi_grid + 1)
    ph = np.linspace(0.0, 2 * np.pi, opt.theta_grid, endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    vals = bloch_objective(x, tt, pp)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    res = minimize(lambda v: -float(bloch_objective(x, v[0], v[1])), [tt[i, j], pp[i, j]],
                   method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": opt.tol * 1e-3, "maxiter": 4000})
    if not res.success:
        raise OptimizerFailure(f"Nelder-Mead failed: {res.message}")
    if -res.fun >= vals[i, j]:
        return -res.fun, res.x[0], res.x[1]
    return vals[i, j], tt[i, j], pp[i, j]


def classical_correlation(x: XState, opt: OptimizerSettings | None = None):
    """Maximal classical correlation J and a measurement basis achieving it.

    Returns ``(J, MeasurementBasis)`` for a single state and
    ``(J array, (theta array, phi array))`` for an array-valued state.
    """
    opt = opt or OptimizerSettings()
    rz, _ = marginal_bloch(x)
    s1 = _qubit_entropy(np.abs(rz))
    scalar = np.ndim(x.r11) == 0
    if opt.method == "simplex":
        if not scalar:
            raise ValueError("simplex search works on one state at a time")
        if s1 <= 1e-14:
            return 0.0, MeasurementBasis(0.0, 0.0)
        j, th, ph = _simplex_search(x, opt)
        return float(max(j, 0.0)), MeasurementBasis(float(th), float(ph))
    if opt.method != "reduced":
        raise ValueError(f"unknown optimizer method {opt.method!r}")
    cond, theta, phi = _reduced_search(x, opt)
    s1 = np.atleast_1d(s1)
    degenerate = s1 <= 1e-14
    j = np.where(degenerate, 0.0, np.maximum(s1 - cond, 0.0))
    theta = np.where(degenerate, 0.0, theta)
    phi = np.where(degenerate, 0.0, phi)
    if scalar:
        return float(j[0]), MeasurementBasis(float(theta[0]), float(phi[0]))
    return j, (theta, phi)


def discord(x: XState, opt: OptimizerSettings | None = None):
    j, _ = classical_correlation(x, opt)
    return _discord_from(mutual_information(x), j)


def _discord_from(mi, j):
    d = np.asarray(mi) - np.asarray(j)
    if np.any(d < -1e-9):
        raise OptimizerFailure(f"classical correlation exceeds mutual information by {-d.min():.3g}")
    return _unwrap(np.maximum(d, 0.0))


def correlation_triple(x: XState, opt: OptimizerSettings | None = None,
                       classical: bool = True) -> CorrelationTriple:
    """Concurrence, discord and classical correlation (scalar or vectorised).

    With ``classical=False`` only the concurrence is computed and the other
    two fields are NaN.
    """
    e = concurrence(x)
    if not classical:
        nan = np.full(np.shape(e), np.nan)
        return CorrelationTriple(e, _unwrap(nan), _unwrap(nan))
    j, _ = classical_correlation(x, opt)
    d = _discord_from(mutual_information(x), j)
    return CorrelationTriple(e, d, _unwrap(j))
