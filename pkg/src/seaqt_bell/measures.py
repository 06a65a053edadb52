"""Scalar functionals of two-qubit states.

Functions taking ``rho`` accept a single 4x4 matrix or a stack
``(..., 4, 4)``; stacked input returns an array of values.
"""

import math
from dataclasses import dataclass

import numpy as np

from .qmat import KAPPA, hermitize, kron, pauli

_YY = kron(pauli(2), pauli(2))
_SIGMA_PAIRS = np.array([[kron(pauli(i), pauli(j)) for j in (1, 2, 3)] for i in (1, 2, 3)])


class ZeroVarianceError(ValueError):
    pass


@dataclass(frozen=True)
class MeasureSet:
    concurrence: float
    chsh_max: float
    entropy: float
    energy: float
    relative_entropy: float  # math.inf when the support condition fails
    linear_entropy: float
    purity: float


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def concurrence(rho):
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the eigenvalues of sqrt(sqrt(rho) rho_tilde sqrt(rho)),
    i.e. the singular values of sqrt(rho_tilde) sqrt(rho). Taking them as
    singular values avoids square roots of near-zero eigenvalues, which
    turn 1e-16 noise into 1e-8 errors for rank-deficient states.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh(0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2))))
    root = (v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    lam = np.linalg.svd(_YY @ np.conj(root) @ _YY @ root, compute_uv=False)
    return _scalar(np.maximum(0.0, lam[..., 0] - lam[..., 1:].sum(axis=-1)))


def correlation_matrix(rho):
    """t_ij = Tr(rho sigma_i x sigma_j) for i, j in x, y, z."""
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("ijab,...ba->...ij", _SIGMA_PAIRS, rho).real


def chsh_max(rho):
    t = correlation_matrix(rho)
    h = np.linalg.eigvalsh(np.swapaxes(t, -1, -2) @ t)
    return _scalar(2.0 * np.sqrt(np.clip(h[..., -1] + h[..., -2], 0.0, None)))


def _support_eigs(rho):
    return np.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))


def entropy(rho, kappa=KAPPA):
    """von Neumann entropy in nats, restricted to the support of rho."""
    w = _support_eigs(rho)
    on = w > kappa
    safe = np.where(on, w, 1.0)
    return _scalar(-np.sum(np.where(on, w * np.log(safe), 0.0), axis=-1))


def log_on_support(rho, kappa=KAPPA):
    """B ln(rho): the logarithm with the kernel of rho mapped to zero."""
    w, v = np.linalg.eigh(hermitize(np.asarray(rho, dtype=complex)))
    on = w > kappa
    lw = np.where(on, np.log(np.where(on, w, 1.0)), 0.0)
    return (v * lw[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def relative_entropy(rho, rho0, kappa=KAPPA):
    """D(rho || rho0) = Tr rho ln rho - Tr rho ln rho0; math.inf off-support."""
    rho = np.asarray(rho, dtype=complex)
    w0, v0 = np.linalg.eigh(hermitize(np.asarray(rho0, dtype=complex)))
    on0 = w0 > kappa
    kernel = (v0 * (~on0)[..., None, :]) @ np.conj(np.swapaxes(v0, -1, -2))
    leak = np.einsum("...ij,...ji->...", rho, kernel).real
    ln0 = (v0 * np.where(on0, np.log(np.where(on0, w0, 1.0)), 0.0)[..., None, :]) @ np.conj(
        np.swapaxes(v0, -1, -2)
    )
    cross = np.einsum("...ij,...ji->...", rho, ln0).real
    d = -np.asarray(entropy(rho, kappa)) - cross
    d = np.where(leak > kappa, np.inf, np.maximum(d, 0.0))
    return _scalar(d)


def energy(rho, h):
    h = getattr(h, "matrix", h)
    return _scalar(np.einsum("...ij,ji->...", np.asarray(rho), h).real)


def purity(rho):
    rho = np.asarray(rho)
    return _scalar(np.einsum("...ij,...ji->...", rho, rho).real)


def linear_entropy(rho):
    return _scalar(1.0 - np.asarray(purity(rho)))


def measure_set(rho, h, rho_ref, kappa=KAPPA):
    return MeasureSet(
        concurrence=concurrence(rho),
        chsh_max=chsh_max(rho),
        entropy=entropy(rho, kappa),
        energy=energy(rho, h),
        relative_entropy=relative_entropy(rho, rho_ref, kappa),
        linear_entropy=linear_entropy(rho),
        purity=purity(rho),
    )


def pearson(xs, ys):
    """Pearson correlation coefficient of two equal-length samples."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("pearson needs two 1-D samples of equal length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0 or not math.isfinite(vx * vy):
        raise ZeroVarianceError("pearson is undefined for a constant sample")
    return float(np.clip((dx @ dy) / math.sqrt(vx * vy), -1.0, 1.0))
