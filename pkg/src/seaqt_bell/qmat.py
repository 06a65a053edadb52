"""Dense complex matrix kernel for 2x2 and 4x4 Hermitian operators.

Every function accepts either a single matrix or a stack of shape
``(..., n, n)`` so trajectories can be advanced in batches.
"""

from dataclasses import dataclass

import numpy as np

# Kernel threshold for support projections of unit-trace states.
KAPPA = 1e-12

_PAULI = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class NonHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class SupportProjector:
    matrix: np.ndarray
    rank: int
    kappa: float


def pauli(index):
    """Return the 2x2 Pauli matrix ``sigma_index`` (0 is the identity)."""
    if index not in (0, 1, 2, 3):
        raise IndexError(f"Pauli index must be 0..3, got {index!r}")
    return _PAULI[index].copy()


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def hermitize(m):
    return 0.5 * (m + dagger(m))


def kron(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != (2, 2) or b.shape[-2:] != (2, 2):
        raise ValueError(f"kron expects 2x2 factors, got {a.shape} and {b.shape}")
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    return out.reshape(np.broadcast_shapes(a.shape[:-2], b.shape[:-2]) + (4, 4))


def partial_trace(m, keep):
    """Reduce a two-qubit operator to subsystem ``keep`` ('A' or 'B')."""
    m = np.asarray(m)
    if m.shape[-2:] != (4, 4):
        raise ValueError(f"partial_trace expects a 4x4 operator, got {m.shape}")
    t = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    if keep == "A":
        return np.einsum("...ijkj->...ik", t)
    if keep == "B":
        return np.einsum("...ijil->...jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def hermiticity_violation(m):
    return float(np.max(np.abs(m - dagger(m))))


def eig_hermitian(m, tol=1e-10):
    """Spectral decomposition with ascending eigenvalues and a canonical basis.

    Inside a degenerate eigenspace the vectors are rebuilt by Gram-Schmidt
    on the projected computational basis vectors taken in index order, so
    the result does not depend on LAPACK's arbitrary choice.
    """
    m = np.asarray(m, dtype=complex)
    err = hermiticity_violation(m)
    if err > tol:
        raise NonHermitianError(f"matrix is not Hermitian (max |m - m^H| = {err:.3e})")
    w, v = np.linalg.eigh(hermitize(m))
    n = len(w)
    out = np.empty_like(v)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] < tol:
            stop += 1
        block = v[:, start:stop]
        proj = block @ block.conj().T
        basis = []
        for k in range(n):
            x = proj[:, k].copy()
            for b in basis:
                x -= b * (b.conj() @ x)
            nx = np.linalg.norm(x)
            if nx > 1e-6:
                basis.append(x / nx)
            if len(basis) == stop - start:
                break
        out[:, start:stop] = np.column_stack(basis)
        start = stop
    # fix the phase: largest-magnitude component real and positive
    idx = np.argmax(np.abs(out) > np.abs(out).max(axis=0) - 1e-9, axis=0)
    phase = out[idx, np.arange(n)]
    out = out * (np.abs(phase) / phase)
    return HermitianEig(w, out)


def matrix_func_on_support(m, f, kappa=KAPPA):
    """Apply ``f`` to eigenvalues above ``kappa``; the kernel maps to zero."""
    w, v = np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))
    if np.any(w < -kappa - 1e-10):
        raise ValueError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    on = w > kappa
    fw = np.zeros_like(w)
    fw[on] = f(w[on])
    if not np.all(np.isfinite(fw)):
        raise ValueError("function undefined on the support spectrum")
    return (v * fw[..., None, :]) @ dagger(v)


def range_projector(m, kappa=KAPPA):
    w, v = np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))
    on = (w > kappa).astype(float)
    b = (v * on[..., None, :]) @ dagger(v)
    return SupportProjector(b, int(on.sum()), kappa)


def commutator(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError("commutator operands differ in shape")
    return a @ b - b @ a


def anticommutator(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError("anticommutator operands differ in shape")
    return a @ b + b @ a


def expm_hermitian(m, scale=1.0):
    """exp(scale * m) for Hermitian m."""
    w, v = np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))
    return (v * np.exp(scale * w)[..., None, :]) @ dagger(v)
