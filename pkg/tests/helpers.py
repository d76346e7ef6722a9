"""Shared oracles and generators for the test suite."""

import numpy as np

from xyquench.correlators import XState

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])


def random_xstates(n, seed=0):
    """Valid X states with random populations and coherences inside the positivity bound."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = rng.dirichlet(np.full(4, rng.choice([0.3, 1.0, 3.0])))
        c14 = rng.uniform(0, 1) * np.sqrt(p[0] * p[3]) * np.exp(2j * np.pi * rng.uniform())
        c23 = rng.uniform(0, 1) * np.sqrt(p[1] * p[2]) * np.exp(2j * np.pi * rng.uniform())
        if rng.uniform() < 0.2:
            c23 = 0j
        out.append(XState(p[0], p[1], p[2], p[3], c14, c23))
    return out


def _bits(p):
    p = np.clip(p, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(p > 0, p * np.log2(p), 0.0)


def dense_entropy(rho):
    return float(_bits(np.linalg.eigvalsh(rho)).sum())


def dense_mutual_information(rho):
    r = rho.reshape(2, 2, 2, 2)
    rho1 = np.einsum("ajbj->ab", r)
    rho2 = np.einsum("iaib->ab", r)
    return dense_entropy(rho1) + dense_entropy(rho2) - dense_entropy(rho)


def grid_classical(x, n_theta=181, n_phi=360):
    """Brute-force max over projective measurements on qubit 2.

    theta in [0, pi] and phi in [0, pi) covers every basis once (n and -n
    give the same measurement).  Each post-measurement state is built from
    explicit projectors and diagonalised in closed form.
    """
    rho = x.matrix().reshape(2, 2, 2, 2)
    th = np.linspace(0, np.pi, n_theta)
    ph = np.linspace(0, np.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    n = np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1)
    ns = np.einsum("...i,iab->...ab", n, PAULI)
    rho1 = np.einsum("ajbj->ab", rho)
    s1 = float(_bits(np.linalg.eigvalsh(rho1)).sum())
    cond = np.zeros(tt.shape)
    for sign in (1, -1):
        proj = 0.5 * (np.eye(2) + sign * ns)
        post = np.einsum("...xc,acbx->...ab", proj, rho)
        q = np.einsum("...aa->...", post).real
        tr = q
        det = (post[..., 0, 0] * post[..., 1, 1] - post[..., 0, 1] * post[..., 1, 0]).real
        disc = np.sqrt(np.maximum(tr**2 - 4 * det, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            lam_hi = np.where(q > 0, (tr + disc) / (2 * q), 0.0)
            lam_lo = np.where(q > 0, (tr - disc) / (2 * q), 0.0)
        cond += np.where(q > 0, q * (_bits(lam_hi) + _bits(lam_lo)), 0.0)
    j = s1 - cond
    i = np.unravel_index(np.argmax(j), j.shape)
    return float(j[i]), float(tt[i]), float(pp[i])


def polished_grid_classical(x):
    """Grid maximum refined by Nelder-Mead on the same explicit-projector objective."""
    from scipy.optimize import minimize

    from xyquench.qinfo import MeasurementBasis, measured_objective

    j0, th0, ph0 = grid_classical(x)
    res = minimize(lambda v: -measured_objective(x, MeasurementBasis(v[0], v[1])), [th0, ph0],
                   method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    return max(j0, -res.fun)


BELL = XState(0.5, 0.0, 0.0, 0.5, 0.5 + 0j, 0j)
PRODUCT = XState(1.0, 0.0, 0.0, 0.0, 0j, 0j)
MIXED = XState(0.25, 0.25, 0.25, 0.25, 0j, 0j)
