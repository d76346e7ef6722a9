import json

import numpy as np
import pytest

from xyquench.correlators import contractions, rho_nn
from xyquench.model import ModelParams
from xyquench.oracle import (
    DimensionTooLarge, EDRing, RingSpec, arbitration_json, arbitration_report,
    discrete_k_contractions, ed_evolve, spin_hamiltonian,
)

SX = np.array([[0, 1], [1, 0]]) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]]) / 2


def _site_op(op, i, N):
    out = np.eye(1)
    for s in range(N):
        out = np.kron(out, op if s == i else np.eye(2))
    return out


def _kron_hamiltonian(N, lam, gamma):
    h = np.zeros((2**N, 2**N), complex)
    for i in range(N):
        j = (i + 1) % N
        h -= lam * (1 + gamma) * _site_op(SX, i, N) @ _site_op(SX, j, N)
        h -= lam * (1 - gamma) * _site_op(SY, i, N) @ _site_op(SY, j, N)
        h -= _site_op(SZ, i, N)
    return h


def _as_array(cs):
    return np.array([complex(v) for v in cs.as_tuple()])


def test_hamiltonian_matches_kron_construction():
    h = spin_hamiltonian(4, ModelParams(0.7, 0.4)).toarray()
    assert np.allclose(h, _kron_hamiltonian(4, 0.7, 0.4), atol=1e-14)


def test_discrete_k_initial_value():
    cs = discrete_k_contractions(RingSpec(1024, ModelParams(0.9, 1.0)), 0.0)
    assert np.allclose(_as_array(cs), [1, 0, 0, 0, 0], atol=1e-15)


def test_discrete_k_self_convergence():
    p = ModelParams(0.9, 1.0)
    coarse = _as_array(discrete_k_contractions(RingSpec(2**15, p), 10.0))
    fine = _as_array(discrete_k_contractions(RingSpec(2**16, p), 10.0))
    assert np.max(np.abs(coarse - fine)) < 1e-9


@pytest.mark.parametrize("pair", [(0, 1), (0, 2), (3, 7)])
def test_ed_initial_state(pair):
    rho = ed_evolve(RingSpec(8, ModelParams(0.6, 0.5)), 0.0, pair)
    assert np.allclose(rho, np.diag([1, 0, 0, 0]), atol=1e-12)


def test_ed_energy_conservation():
    ring = EDRing(RingSpec(10, ModelParams(1.2, 0.8)))
    e0 = ring.energy(0.0)
    assert e0 == pytest.approx(-5.0, abs=1e-12)
    for t in (0.5, 3.0, 17.0):
        assert ring.energy(t) == pytest.approx(e0, abs=1e-9)


def test_ed_states_are_physical_x_states():
    ring = RingSpec(12, ModelParams(0.5, 1.0))
    x_mask = np.zeros((4, 4), bool)
    x_mask[np.arange(4), np.arange(4)] = True
    x_mask[[0, 3, 1, 2], [3, 0, 2, 1]] = True
    for t in np.linspace(0, 1.5, 7):
        for pair in ((0, 1), (0, 2)):
            rho = ed_evolve(ring, t, pair)
            assert np.allclose(rho, rho.conj().T, atol=1e-12)
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.eigvalsh(rho).min() >= -1e-10
            assert np.max(np.abs(rho[~x_mask])) < 1e-10


def test_dimension_cap():
    with pytest.raises(DimensionTooLarge):
        ed_evolve(RingSpec(14, ModelParams(0.5, 1.0)), 1.0)


def test_ed_agreement_improves_with_size():
    p = ModelParams(0.5, 1.0)
    ref = rho_nn(p, 1.0).matrix()
    devs = [np.max(np.abs(ed_evolve(RingSpec(n, p), 1.0) - ref)) for n in (8, 10, 12)]
    assert devs[0] > devs[1] > devs[2]


def test_discrete_k_matches_quadrature():
    p = ModelParams(1.3, 0.4)
    assert np.max(np.abs(_as_array(discrete_k_contractions(RingSpec(2**16, p), 6.0))
                         - _as_array(contractions(p, 6.0)))) < 1e-8


def test_arbitration_trivial_cases():
    rep = arbitration_report(RingSpec(8, ModelParams(0.9, 0.0)), [0.0, 1.0, 2.0])
    assert rep["max_deviation"] == {"wick_derived": pytest.approx(0, abs=1e-12),
                                    "as_printed": pytest.approx(0, abs=1e-12)}
    rep = arbitration_report(RingSpec(12, ModelParams(1.2, 1.0)), [0.0, 1e-4])
    assert max(rep["max_deviation"].values()) < 1e-7


def test_arbitration_prefers_wick_form():
    rep = arbitration_report(RingSpec(12, ModelParams(1.2, 1.0)), np.linspace(0, 2, 9))
    dev = rep["max_deviation"]
    assert dev["wick_derived"] <= 0.03
    assert dev["as_printed"] > dev["wick_derived"]
    assert len(rep["rows"]) == 9
    assert json.loads(arbitration_json(rep))["N"] == 12
