"""
Fermionic two-point functions after the quench and the two-site reduced
density matrices they determine.

The chain starts fully polarised (every Jordan-Wigner fermion occupied), a
Gaussian state, so every multi-point function follows from five translation
invariant contractions::

    n  = <b1^dag b1>    h1 = <b1^dag b2>    h2 = <b1^dag b3>
    a1 = <b1 b2>        a2 = <b1 b3>

Reduced density matrices are X-shaped in the basis |uu>, |ud>, |du>, |dd>
(site 1 is the left tensor factor, up = occupied).  Off-diagonal entries are
r14 = <S1^- Sj^-> and r23 = <S1^- Sj^+>.

All functions accept a scalar or a 1-d array of times; array input returns
:class:`ContractionSet` / :class:`XState` objects with array fields.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .model import ModelParams, anomalous_weights, pair_weight
from .quadrature import NoConvergence, QuadratureSpec, integrate_halfline_even

# times integrated together; fixed so results never depend on how callers batch work
TIME_CHUNK = 32

# clamp violations up to this size, raise beyond it
CLAMP_LIMIT = 1e-6

VARIANTS = ("wick_derived", "as_printed")


class InvalidState(ValueError):
    pass


@dataclass(frozen=True)
class ContractionSet:
    n: np.ndarray | float
    h1: np.ndarray | float
    a1: np.ndarray | complex
    h2: np.ndarray | float
    a2: np.ndarray | complex

    def as_tuple(self):
        return (self.n, self.h1, self.a1, self.h2, self.a2)

    def __getitem__(self, idx) -> "ContractionSet":
        return ContractionSet(*(np.asarray(v)[idx] for v in self.as_tuple()))


@dataclass(frozen=True)
class XState:
    """Two-qubit X state: four populations and the two anti-diagonal coherences."""

    r11: np.ndarray | float
    r22: np.ndarray | float
    r33: np.ndarray | float
    r44: np.ndarray | float
    r14: np.ndarray | complex
    r23: np.ndarray | complex

    @classmethod
    def from_matrix(cls, rho) -> "XState":
        rho = np.asarray(rho)
        return cls(
            rho[..., 0, 0].real, rho[..., 1, 1].real, rho[..., 2, 2].real, rho[..., 3, 3].real,
            rho[..., 0, 3], rho[..., 1, 2],
        )

    @classmethod
    def product_up(cls) -> "XState":
        return cls(1.0, 0.0, 0.0, 0.0, 0j, 0j)

    def astuple(self):
        return tuple(getattr(self, f.name) for f in fields(self))

    def __len__(self):
        return np.size(self.r11)

    def __getitem__(self, idx) -> "XState":
        return XState(*(np.asarray(v)[idx] for v in self.astuple()))

    def matrix(self) -> np.ndarray:
        shape = np.shape(self.r11)
        rho = np.zeros(shape + (4, 4), dtype=complex)
        rho[..., 0, 0] = self.r11
        rho[..., 1, 1] = self.r22
        rho[..., 2, 2] = self.r33
        rho[..., 3, 3] = self.r44
        rho[..., 0, 3] = self.r14
        rho[..., 3, 0] = np.conj(self.r14)
        rho[..., 1, 2] = self.r23
        rho[..., 2, 1] = np.conj(self.r23)
        return rho

    def trace(self):
        return self.r11 + self.r22 + self.r33 + self.r44


def validate_state(x: XState, limit: float = CLAMP_LIMIT) -> XState:
    """Check an X state and clamp round-off sized violations.

    Negative populations above -limit become 0, coherences exceeding the
    positivity bound by less than ``limit`` are shrunk radially onto it.
    Anything larger raises :class:`InvalidState`.
    """
    r11, r22, r33, r44, r14, r23 = (np.asarray(v) for v in x.astuple())
    tr = r11 + r22 + r33 + r44
    if np.any(np.abs(tr - 1.0) > 1e-9):
        raise InvalidState(f"trace deviates from 1 by {np.max(np.abs(tr - 1.0)):.3g}")
    pops = np.stack([r11, r22, r33, r44])
    if np.any(pops < -limit):
        raise InvalidState(f"negative population {pops.min():.3g}")
    pops = np.maximum(pops, 0.0)
    r14 = _shrink(r14, np.sqrt(pops[0] * pops[3]), limit, "r14")
    r23 = _shrink(r23, np.sqrt(pops[1] * pops[2]), limit, "r23")
    return XState(*_unwrap(pops[0], pops[1], pops[2], pops[3], r14, r23))


def _shrink(coh, bound, limit, name):
    mag = np.abs(coh)
    excess = mag - bound
    if np.any(excess > limit):
        raise InvalidState(f"{name} violates positivity by {np.max(excess):.3g}")
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(excess > 0, bound / mag, 1.0)
    return coh * scale


def _unwrap(*vals):
    return tuple(v.item() if np.ndim(v) == 0 else v for v in vals)


def _integrands(params: ModelParams, times: np.ndarray):
    """Even integrands of the five contractions, shape (nk, len(times), 5)."""
    times = np.asarray(times, dtype=float)

    def f(k):
        w = pair_weight(params, k)[:, None]
        ab, ab_skew = (v[:, None] for v in anomalous_weights(params, k))
        lam_k = np.hypot(1.0 + params.lam * np.cos(k), params.gamma * params.lam * np.sin(k))
        phase = lam_k[:, None] * times[None, :]
        s2 = np.sin(phase) ** 2
        occ = 1.0 - w * s2
        pair = 2.0 * ab_skew * s2 + 1j * ab * np.sin(2.0 * phase)
        out = np.empty(occ.shape + (5,), dtype=complex)
        out[..., 0] = occ
        out[..., 1] = np.cos(k)[:, None] * occ
        out[..., 2] = np.sin(k)[:, None] * pair
        out[..., 3] = np.cos(2 * k)[:, None] * occ
        out[..., 4] = np.sin(2 * k)[:, None] * pair
        return out

    return f


def _contract_chunk(params, times, spec):
    times = np.asarray(times, dtype=float)
    vals = np.zeros((len(times), 5), dtype=complex)
    vals[:, 0] = 1.0
    # static values are exact at t = 0, and for all t when alpha beta vanishes identically
    live = times > 0
    if params.is_xx or params.lam == 0.0 or not live.any():
        return vals
    hint = float(times.max()) * params.max_energy()
    try:
        res = integrate_halfline_even(_integrands(params, times[live]), spec.with_hint(hint))
    except NoConvergence as exc:
        raise NoConvergence(
            f"contraction integrals (n, h1, a1, h2, a2) did not converge for lambda={params.lam}, "
            f"gamma={params.gamma}, t in [{times[live].min()}, {times[live].max()}]: {exc}",
            result=exc.result,
        ) from exc
    vals[live] = np.asarray(res.value).reshape(-1, 5)
    return vals


def contractions(params: ModelParams, t, spec: QuadratureSpec | None = None) -> ContractionSet:
    """The five contractions at time(s) ``t`` in the thermodynamic limit.

    n   = (1/2pi) int (1 - 4 a^2 b^2 sin^2 Lt) dk
    h_m = (1/2pi) int cos(mk) (1 - 4 a^2 b^2 sin^2 Lt) dk
    a_m = (1/2pi) int sin(mk) a b (2 sin^2 Lt (1 - 2 b^2) + i sin 2Lt) dk

    with a, b the Bogoliubov coefficients and L the dispersion at k.
    """
    spec = spec or QuadratureSpec()
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0):
        raise ValueError("t must be >= 0")
    chunks = [_contract_chunk(params, times[i:i + TIME_CHUNK], spec)
              for i in range(0, len(times), TIME_CHUNK)]
    vals = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, 5), complex)
    cs = ContractionSet(vals[:, 0].real, vals[:, 1].real, vals[:, 2], vals[:, 3].real, vals[:, 4])
    return cs[0] if scalar else cs


def _unpack(cs: ContractionSet):
    return tuple(np.asarray(v) for v in cs.as_tuple())


def _diagonal(n, h, a):
    # <n1 nj> = <b1^dag b1><bj^dag bj> - <b1^dag bj^dag><b1 bj> + <b1^dag bj><b1 bj^dag>
    #         = n^2 + |a|^2 - h^2   using <b1^dag bj^dag> = -conj(a), <b1 bj^dag> = -h
    r11 = n * n + np.abs(a) ** 2 - h * h
    r22 = n - r11
    r44 = 1.0 - r11 - 2.0 * r22
    return r11, r22, r44


def assemble_nn(cs: ContractionSet, validate: bool = True) -> XState:
    n, h1, a1, _, _ = _unpack(cs)
    r11, r22, r44 = _diagonal(n, h1, a1)
    # r14 = conj(<b1^dag b2^dag>) = -a1,  r23 = -<b1 b2^dag> = h1
    x = XState(*_unwrap(r11, r22, r22, r44, -a1 + 0j, h1 + 0j))
    return validate_state(x) if validate else x


def assemble_nnn(cs: ContractionSet, variant: str = "wick_derived", validate: bool = True) -> XState:
    """Sites (1, 3).  The string through site 2 contributes (1 - 2 n_2)."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    n, h1, a1, h2, a2 = _unpack(cs)
    r11, r22, r44 = _diagonal(n, h2, a2)
    # <b1 n2 b3^dag> = h1^2 + |a1|^2 - n h2,  <b1 n2 b3> = n a2 - 2 h1 a1
    r14 = -a2 * (1.0 - 2.0 * n) - 4.0 * h1 * a1
    if variant == "wick_derived":
        r23 = h2 * (1.0 - 2.0 * n) + 2.0 * h1**2 + 2.0 * np.abs(a1) ** 2
    else:
        # literal form: a bare <b1 b2^dag> where the expansion has its square
        b1b3d, b1b2d = -h2, -h1
        r23 = -b1b3d + 2.0 * (b1b3d * n + b1b2d + np.abs(a1) ** 2)
    x = XState(*_unwrap(r11, r22, r22, r44, r14 + 0j, r23 + 0j))
    return validate_state(x) if validate else x


def rho_nn(params: ModelParams, t, spec: QuadratureSpec | None = None) -> XState:
    return assemble_nn(contractions(params, t, spec))


def rho_nnn(params: ModelParams, t, spec: QuadratureSpec | None = None,
            variant: str = "wick_derived") -> XState:
    """Sites (1, 3) reduced state.

    The ``as_printed`` variant may be unphysical, so it is returned without
    the positivity check.
    """
    return assemble_nnn(contractions(params, t, spec), variant, validate=variant == "wick_derived")


def rho_pair(params: ModelParams, t, pair: str = "nn", spec: QuadratureSpec | None = None,
             variant: str = "wick_derived") -> XState:
    if pair in ("nn", "nearest"):
        return rho_nn(params, t, spec)
    if pair in ("nnn", "next_nearest"):
        return rho_nnn(params, t, spec, variant)
    raise ValueError(f"unknown pair {pair!r}")
