import numpy as np
import pytest

from seaqt_bell import measures
from seaqt_bell.measures import (ZeroVarianceError, chsh_max, concurrence, entropy, pearson,
                                 relative_entropy)
from seaqt_bell.qmat import kron
from seaqt_bell.states import (BASELINE_C, CompositeHamiltonian, bell_diagonal,
                               bell_projectors, maximally_mixed, pure_x_state)

from conftest import random_cconfigs, random_state, random_unitary


def wootters_oracle(rho):
    """Nested-square-root form of the Wootters concurrence."""
    yy = np.fliplr(np.diag([-1, 1, 1, -1])).astype(complex)
    w, v = np.linalg.eigh(rho)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    m = sq @ yy @ rho.conj() @ yy @ sq
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (m + m.conj().T)), 0, None))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def test_concurrence_examples():
    assert np.isclose(concurrence(bell_projectors()["phi+"]), 1)
    assert concurrence(maximally_mixed()) == 0
    assert concurrence(bell_diagonal(BASELINE_C)) == pytest.approx(0.398, abs=1e-12)


def test_concurrence_matches_nested_sqrt_oracle(rng):
    for _ in range(50):
        rho = random_state(rng)
        assert abs(concurrence(rho) - wootters_oracle(rho)) < 1e-8


def test_concurrence_local_unitary_invariance(rng):
    for _ in range(20):
        rho = random_state(rng, rank=2)
        u = kron(random_unitary(rng), random_unitary(rng))
        assert abs(concurrence(u @ rho @ u.conj().T) - concurrence(rho)) < 1e-8


def test_chsh_examples():
    assert chsh_max(bell_projectors()["phi+"]) == pytest.approx(2 * np.sqrt(2))
    assert chsh_max(bell_diagonal(BASELINE_C)) == pytest.approx(2.1466, abs=1e-4)
    assert chsh_max(maximally_mixed()) == pytest.approx(0, abs=1e-15)
    t = measures.correlation_matrix(bell_diagonal(BASELINE_C))
    assert np.allclose(t, np.diag(BASELINE_C))


def test_chsh_product_states_are_local(rng):
    for _ in range(30):
        a, b = random_state(rng)[:2, :2], random_state(rng)[2:, 2:]
        rho = kron(a / np.trace(a), b / np.trace(b))
        assert chsh_max(rho) <= 2 + 1e-10


def test_entropy_examples():
    assert entropy(pure_x_state()) == pytest.approx(0, abs=1e-12)
    assert entropy(maximally_mixed()) == pytest.approx(np.log(4))
    s = -0.7 * np.log(0.7) - 0.3 * np.log(0.3)
    assert entropy(bell_diagonal((1, 0.4, -0.4))) == pytest.approx(s, abs=1e-12)
    assert s == pytest.approx(0.6108, abs=1e-4)


def test_relative_entropy_examples(rng):
    rho = random_state(rng)
    assert relative_entropy(rho, rho) == pytest.approx(0, abs=1e-12)
    assert relative_entropy(pure_x_state(), maximally_mixed()) == pytest.approx(np.log(4))
    p = bell_projectors()
    assert relative_entropy(p["phi+"], p["psi+"]) == np.inf


def test_relative_entropy_nonnegative(rng):
    for _ in range(30):
        assert relative_entropy(random_state(rng), random_state(rng, rank=4)) >= -1e-12


def test_purity_energy_examples():
    assert measures.purity(maximally_mixed()) == pytest.approx(0.25)
    assert measures.linear_entropy(maximally_mixed()) == pytest.approx(0.75)
    assert measures.purity(bell_projectors()["phi+"]) == pytest.approx(1)
    h = CompositeHamiltonian().matrix
    for cfg in random_cconfigs(10, seed=1):
        assert abs(measures.energy(bell_diagonal(cfg), h)) < 1e-14


def test_measure_set_fields():
    m = measures.measure_set(bell_diagonal(BASELINE_C), CompositeHamiltonian().matrix,
                             bell_diagonal(BASELINE_C))
    assert m.relative_entropy == pytest.approx(0, abs=1e-12)
    assert m.purity + m.linear_entropy == pytest.approx(1)


def test_pearson():
    xs = np.linspace(0, 1, 11)
    assert pearson(xs, -2 * xs + 3) == pytest.approx(-1)
    with pytest.raises(ZeroVarianceError):
        pearson(xs, np.ones_like(xs))


def test_stacked_measures_match_single(rng):
    rhos = np.array([random_state(rng) for _ in range(4)])
    assert np.allclose(concurrence(rhos), [concurrence(r) for r in rhos])
    assert np.allclose(chsh_max(rhos), [chsh_max(r) for r in rhos])
    assert np.allclose(entropy(rhos), [entropy(r) for r in rhos])
