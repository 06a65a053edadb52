"""Two-qubit states used throughout: Bell-diagonal, Bell projectors,
the x-polarized product state, canonical (Gibbs) states, and the
non-interacting composite Hamiltonian."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .qmat import dagger, expm_hermitian, hermiticity_violation, kron, pauli

STATE_TOL = 1e-10

BASELINE_C = (0.996, 0.4, -0.4)


class InvalidStateError(ValueError):
    """A matrix failed a density-matrix invariant; ``violation`` is the measured excess."""

    def __init__(self, message, violation):
        super().__init__(message)
        self.violation = violation


class NonHermitian(InvalidStateError):
    pass


class NonUnitTrace(InvalidStateError):
    pass


class NotPSD(InvalidStateError):
    pass


class InvalidCConfig(ValueError):
    pass


@dataclass(frozen=True)
class CConfig:
    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise InvalidCConfig(f"{name}={v} outside [-1, 1]")
        w = self.eigenvalues()
        if w.min() < -1e-12:
            raise InvalidCConfig(
                f"c=({self.c1}, {self.c2}, {self.c3}) gives a negative Bell weight {w.min():.4g}"
            )

    def eigenvalues(self):
        """Bell-basis weights in the order Phi+, Phi-, Psi+, Psi-."""
        c1, c2, c3 = self.c1, self.c2, self.c3
        return 0.25 * np.array([
            1 + c1 - c2 + c3,
            1 - c1 + c2 + c3,
            1 + c1 + c2 - c3,
            1 - c1 - c2 - c3,
        ])

    def as_tuple(self):
        return (self.c1, self.c2, self.c3)


@dataclass(frozen=True)
class CompositeHamiltonian:
    """H = (eps_a/2) sz x I + (eps_b/2) I x sz with no interaction term."""

    eps_a: float = 1.0
    eps_b: float = 1.0

    @cached_property
    def matrix(self):
        i2, sz = pauli(0), pauli(3)
        return 0.5 * self.eps_a * kron(sz, i2) + 0.5 * self.eps_b * kron(i2, sz)

    def local(self, j):
        eps = {"A": self.eps_a, "B": self.eps_b}[j]
        return 0.5 * eps * pauli(3)


def _as_cconfig(c):
    return c if isinstance(c, CConfig) else CConfig(*c)


def bell_diagonal(c):
    c = _as_cconfig(c)
    out = kron(pauli(0), pauli(0))
    for ci, k in zip(c.as_tuple(), (1, 2, 3)):
        out = out + ci * kron(pauli(k), pauli(k))
    return 0.25 * out


def bell_states():
    s = 1 / np.sqrt(2)
    return {
        "phi+": np.array([s, 0, 0, s], dtype=complex),
        "phi-": np.array([s, 0, 0, -s], dtype=complex),
        "psi+": np.array([0, s, s, 0], dtype=complex),
        "psi-": np.array([0, s, -s, 0], dtype=complex),
    }


def bell_projectors():
    return {k: np.outer(v, v.conj()) for k, v in bell_states().items()}


def pure_x_state():
    plus = 0.5 * np.ones((2, 2), dtype=complex)
    return kron(plus, plus)


def gibbs_state(h, beta):
    if isinstance(h, CompositeHamiltonian):
        h = h.matrix
    h = np.asarray(h, dtype=complex)
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    # shift by the ground energy so large beta does not overflow
    w = np.linalg.eigvalsh(h)
    g = expm_hermitian(h - w[0] * np.eye(len(h)), -beta)
    return g / np.trace(g).real


def maximally_mixed(n=4):
    return np.eye(n, dtype=complex) / n


def validate(m, tol=STATE_TOL):
    """Return ``m`` if it is a density matrix, else raise the failing invariant."""
    m = np.asarray(m, dtype=complex)
    herm = hermiticity_violation(m)
    if herm > tol:
        raise NonHermitian(f"max |m - m^H| = {herm:.3e}", herm)
    tr = abs(np.trace(m) - 1)
    if tr > tol:
        raise NonUnitTrace(f"|Tr m - 1| = {tr:.3e}", tr)
    wmin = np.linalg.eigvalsh(0.5 * (m + dagger(m)))[0]
    if wmin < -tol:
        raise NotPSD(f"min eigenvalue {wmin:.3e}", -wmin)
    return m
