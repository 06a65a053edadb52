import numpy as np
import pytest

from seaqt_bell.states import CConfig


def c_from_weights(w):
    """Bell weights (Phi+, Phi-, Psi+, Psi-) to correlation coefficients."""
    w0, w1, w2, w3 = w
    return (w0 - w1 + w2 - w3, -w0 + w1 + w2 - w3, w0 + w1 - w2 - w3)


def random_cconfigs(n, seed):
    rng = np.random.default_rng(seed)
    return [CConfig(*c_from_weights(w)) for w in rng.dirichlet(np.ones(4), size=n)]


def random_unitary(rng, n=2):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, rank=4):
    z = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, n=4):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (z + z.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
