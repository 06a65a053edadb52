import numpy as np
import pytest

from seaqt_bell import measures
from seaqt_bell.qmat import kron, partial_trace, pauli
from seaqt_bell.states import (BASELINE_C, CConfig, CompositeHamiltonian, InvalidCConfig,
                               NonHermitian, NonUnitTrace, NotPSD, bell_diagonal,
                               bell_projectors, gibbs_state, maximally_mixed, pure_x_state,
                               validate)

from conftest import random_cconfigs


def test_cconfig_rejects_invalid():
    with pytest.raises(InvalidCConfig):
        CConfig(1, 1, 1)
    with pytest.raises(InvalidCConfig):
        CConfig(1.2, 0, 0)
    assert CConfig(*BASELINE_C).as_tuple() == BASELINE_C


def test_bell_diagonal_examples():
    assert np.allclose(bell_diagonal((0, 0, 0)), np.eye(4) / 4)
    assert np.allclose(bell_diagonal((1, -1, 1)), bell_projectors()["phi+"])
    w = np.linalg.eigvalsh(bell_diagonal(BASELINE_C))
    assert np.allclose(w, [0.001, 0.001, 0.299, 0.699], atol=1e-12)


def test_bell_diagonal_eigenvectors_are_bell_states():
    cfg = CConfig(0.3, -0.1, 0.2)
    rho = bell_diagonal(cfg)
    for (name, p), w in zip(bell_projectors().items(), cfg.eigenvalues()):
        assert np.allclose(rho @ p, w * p)
    for k in (1, 2, 3):
        s = kron(pauli(k), pauli(k))
        assert np.allclose(rho @ s, s @ rho)


def test_bell_diagonal_affine():
    a, b = random_cconfigs(2, seed=3)
    mix = CConfig(*(0.3 * np.array(a.as_tuple()) + 0.7 * np.array(b.as_tuple())))
    assert np.allclose(bell_diagonal(mix), 0.3 * bell_diagonal(a) + 0.7 * bell_diagonal(b))


def test_bell_diagonal_marginals_and_energy():
    h = CompositeHamiltonian()
    for cfg in random_cconfigs(50, seed=7):
        rho = bell_diagonal(cfg)
        validate(rho)
        assert np.allclose(partial_trace(rho, "A"), np.eye(2) / 2)
        assert np.allclose(partial_trace(rho, "B"), np.eye(2) / 2)
        assert abs(measures.energy(rho, h.matrix)) < 1e-14


def test_bell_projectors():
    p = bell_projectors()
    assert np.allclose(sum(p.values()), np.eye(4))
    expected = 0.5 * np.array([[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]])
    assert np.allclose(p["phi+"], expected)
    assert abs(np.trace(p["psi+"] @ p["psi-"])) < 1e-15


def test_pure_x_state():
    rho = pure_x_state()
    assert np.isclose(measures.purity(rho), 1)
    assert abs(measures.energy(rho, CompositeHamiltonian().matrix)) < 1e-15
    assert measures.concurrence(rho) < 1e-10


def test_gibbs_limits():
    h = CompositeHamiltonian().local("A")
    assert np.allclose(gibbs_state(h, 0.0), np.eye(2) / 2)
    cold = gibbs_state(h, 200.0)
    assert np.allclose(cold, np.diag([0, 1]), atol=1e-12)
    g = gibbs_state(h, 1.0)
    assert np.isclose(g[1, 1] / g[0, 0], np.e)
    g4 = gibbs_state(CompositeHamiltonian(), 1.0)
    assert np.allclose(g4, kron(g, g))


def test_validate_examples():
    assert validate(maximally_mixed()) is not None
    with pytest.raises(NotPSD):
        validate(np.diag([0.5, 0.6, 0, -0.1]))
    with pytest.raises(NonUnitTrace) as err:
        validate(np.diag([0.25, 0.25, 0.25, 0.25 - 1e-9]))
    assert err.value.violation == pytest.approx(1e-9, rel=1e-3)
    with pytest.raises(NonHermitian):
        validate(np.array([[0.5, 0.1], [0.0, 0.5]]))
    validate(np.diag([0.25, 0.25, 0.25, 0.25 - 5e-11]))


def test_hamiltonian_local_parts():
    h = CompositeHamiltonian(2.0, 0.5)
    assert np.allclose(h.matrix, kron(h.local("A"), np.eye(2)) + kron(np.eye(2), h.local("B")))
    assert np.allclose(np.diag(h.matrix).real, [1.25, 0.75, -0.75, -1.25])
