"""
Independent checks of the thermodynamic-limit pipeline.

* :func:`discrete_k_contractions` evolves each momentum pair (k, -k) of a
  finite ring as a two-level system built straight from the fermionised
  Hamiltonian and averages over the N allowed momenta.
* :func:`ed_evolve` never fermionises: it builds the spin Hamiltonian on a
  periodic ring, evolves |uu...u> exactly and partial-traces to a site pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .correlators import ContractionSet, XState, assemble_nnn
from .model import ModelParams

ED_MAX_SITES = 12


class DimensionTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class RingSpec:
    N: int
    params: ModelParams

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")


# ----------------------------------------------------------------------------
# discrete momenta
# ----------------------------------------------------------------------------

def pair_amplitudes(params: ModelParams, k, t):
    """Amplitudes (empty, filled) of the pair (k, -k) started filled.

    In the basis |0>, b_k^dag b_{-k}^dag |0> the pair Hamiltonian is, up to a
    constant, [[A, i D], [-i D, -A]] with A = 1 + lam cos k, D = gamma lam sin k.
    """
    k = np.asarray(k, dtype=float)
    t = np.asarray(t, dtype=float)
    a = 1.0 + params.lam * np.cos(k)
    d = params.gamma * params.lam * np.sin(k)
    w = np.hypot(a, d)
    wt = w * t
    # exp(-i H t) = cos(wt) - i sin(wt) H / w ; sin(wt)/w -> t as w -> 0
    sinc = t * np.sinc(wt / np.pi)
    empty = -1j * sinc * (1j * d)
    filled = np.cos(wt) - 1j * sinc * (-a)
    return empty, filled


def discrete_k_contractions(ring: RingSpec, t) -> ContractionSet:
    """Finite-ring mode sums over k = 2 pi m / N, m = 0..N-1."""
    params = ring.params
    k = 2.0 * np.pi * np.arange(ring.N) / ring.N
    empty, filled = pair_amplitudes(params, k, t)
    occ = np.abs(filled) ** 2
    # <b_k b_{-k}> = -conj(empty) * filled
    anom = -np.conj(empty) * filled
    # <bj^dag b_{j+m}> = mean cos(km) n_k ; <bj b_{j+m}> = mean (-i sin km) F_k
    return ContractionSet(
        n=float(np.mean(occ)),
        h1=float(np.mean(np.cos(k) * occ)),
        a1=complex(np.mean(-1j * np.sin(k) * anom)),
        h2=float(np.mean(np.cos(2 * k) * occ)),
        a2=complex(np.mean(-1j * np.sin(2 * k) * anom)),
    )


# ----------------------------------------------------------------------------
# exact diagonalisation
# ----------------------------------------------------------------------------

def _even_sector(N):
    """Basis states with an even number of down spins (the sector of |uu..u>)."""
    states = np.arange(1 << N)
    downs = np.array([bin(s).count("1") for s in states])
    return states[downs % 2 == 0]


def spin_hamiltonian(N: int, params: ModelParams, sector=None) -> sp.csr_matrix:
    """Periodic-ring Hamiltonian on basis states (bit i set = site i down).

    Site 0 is the most significant bit so that basis ordering matches
    kron(site0, site1, ...).  Restricting to ``sector`` is exact because
    every term flips an even number of spins.
    """
    states = np.arange(1 << N) if sector is None else np.asarray(sector)
    index = {int(s): i for i, s in enumerate(states)}
    bit = [1 << (N - 1 - i) for i in range(N)]
    lam, g = params.lam, params.gamma
    rows, cols, vals = [], [], []
    for i, s in enumerate(states):
        s = int(s)
        # -sum Sz, Sz = +1/2 for up (bit clear)
        diag = -sum(0.5 if not s & b else -0.5 for b in bit)
        rows.append(i), cols.append(i), vals.append(diag)
        for site in range(N):
            b1, b2 = bit[site], bit[(site + 1) % N]
            if b1 == b2:
                continue
            flipped = s ^ b1 ^ b2
            j = index.get(flipped)
            if j is None:
                continue
            # (1+g) SxSx + (1-g) SySy = 1/2 (S+S- + S-S+) + g/2 (S+S+ + S-S-)
            aligned = bool(s & b1) == bool(s & b2)
            amp = g / 2.0 if aligned else 0.5
            rows.append(j), cols.append(i), vals.append(-lam * amp)
    dim = len(states)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


class EDRing:
    """Exact propagator of |uu...u> on a ring, reusing one eigendecomposition."""

    def __init__(self, ring: RingSpec):
        if ring.N > ED_MAX_SITES:
            raise DimensionTooLarge(f"N={ring.N} exceeds the ED cap of {ED_MAX_SITES}")
        self.ring = ring
        self.sector = _even_sector(ring.N)
        self.hamiltonian = spin_hamiltonian(ring.N, ring.params, self.sector)
        self.energies, self.vectors = np.linalg.eigh(self.hamiltonian.toarray())
        # |uu...u> is basis state 0, the first entry of the sector
        self._overlap = self.vectors[0].conj()

    def state(self, t: float) -> np.ndarray:
        """Full 2^N state vector at time t."""
        amp = self.vectors @ (np.exp(-1j * self.energies * t) * self._overlap)
        psi = np.zeros(1 << self.ring.N, dtype=complex)
        psi[self.sector] = amp
        return psi

    def energy(self, t: float) -> float:
        amp = self.state(t)[self.sector]
        return float(np.real(np.vdot(amp, self.hamiltonian @ amp)))

    def pair_matrix(self, t: float, pair=(0, 1)) -> np.ndarray:
        return reduced_pair(self.state(t), self.ring.N, pair)


def reduced_pair(psi: np.ndarray, N: int, pair) -> np.ndarray:
    """4x4 reduced density matrix <a|rho|b> of sites ``pair`` (0-based)."""
    i, j = pair
    rest = [s for s in range(N) if s not in (i, j)]
    amp = np.transpose(psi.reshape((2,) * N), [i, j] + rest).reshape(4, -1)
    return amp @ amp.conj().T


@lru_cache(maxsize=8)
def _cached_ring(N, lam, gamma):
    return EDRing(RingSpec(N, ModelParams(lam, gamma)))


def ed_evolve(ring: RingSpec, t: float, pair=(0, 1)) -> np.ndarray:
    """Reduced state of ``pair`` at time t; site indices are 0-based."""
    if ring.N > ED_MAX_SITES:
        raise DimensionTooLarge(f"N={ring.N} exceeds the ED cap of {ED_MAX_SITES}")
    if t < 0:
        raise ValueError("t must be >= 0")
    return _cached_ring(ring.N, ring.params.lam, ring.params.gamma).pair_matrix(t, pair)


def ed_xstate(ring: RingSpec, t: float, pair=(0, 1)) -> XState:
    return XState.from_matrix(ed_evolve(ring, t, pair))


# ----------------------------------------------------------------------------
# next-nearest arbitration
# ----------------------------------------------------------------------------

def _max_entry_deviation(x: XState, rho: np.ndarray) -> float:
    return float(np.max(np.abs(x.matrix() - rho)))


def arbitration_report(ring: RingSpec, tgrid, spec=None) -> dict:
    """Max-norm deviation of each sites-(1,3) variant from ED over ``tgrid``."""
    from .correlators import VARIANTS, contractions

    params = ring.params
    tgrid = np.asarray(tgrid, dtype=float)
    cs = contractions(params, tgrid, spec)
    rows = []
    worst = dict.fromkeys(VARIANTS, 0.0)
    for idx, t in enumerate(tgrid):
        rho = ed_evolve(ring, float(t), (0, 2))
        row = {"t": float(t)}
        for variant in VARIANTS:
            x = assemble_nnn(cs[idx], variant, validate=False)
            dev = _max_entry_deviation(x, rho)
            row[variant] = dev
            worst[variant] = max(worst[variant], dev)
        rows.append(row)
    return {
        "N": ring.N,
        "lambda": params.lam,
        "gamma": params.gamma,
        "max_deviation": worst,
        "rows": rows,
    }


def arbitration_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
