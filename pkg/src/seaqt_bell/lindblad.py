"""Lindblad master equation with projector jump operators.

    d rho/dt = -i[H, rho] + gamma L(rho),
    L(rho) = sum_m L_m rho L_m^H - 1/2 {L_m^H L_m, rho}

The global jump set is {L1 (x) L1, L2 (x) L2} with L1 = |1><1| and
L2 = |0><0|; the local set applies each one-sided projector to A and B.
"""

from dataclasses import dataclass

import numpy as np

from . import integrate as _integrate
from .measures import log_on_support
from .qmat import KAPPA, dagger, kron, pauli

GLOBAL = "global"
LOCAL = "local"

_L1 = np.array([[0, 0], [0, 1]], dtype=complex)
_L2 = np.array([[1, 0], [0, 0]], dtype=complex)


@dataclass(frozen=True)
class LindbladParams:
    gamma: float = 1.0
    jump_mode: str = GLOBAL
    kappa: float = KAPPA

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.jump_mode not in (GLOBAL, LOCAL):
            raise ValueError(f"unknown jump mode {self.jump_mode!r}")


def jump_operators(mode=GLOBAL):
    if mode == GLOBAL:
        return [kron(_L1, _L1), kron(_L2, _L2)]
    if mode == LOCAL:
        i2 = pauli(0)
        return [kron(_L1, i2), kron(_L2, i2), kron(i2, _L1), kron(i2, _L2)]
    raise ValueError(f"unknown jump mode {mode!r}")


def lindbladian(rho, ops):
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for op in ops:
        opd = dagger(op)
        n = opd @ op
        out = out + op @ rho @ opd - 0.5 * (n @ rho + rho @ n)
    return out


def lindblad_rhs(rho, h, params):
    hm = getattr(h, "matrix", h)
    rho = np.asarray(rho, dtype=complex)
    ops = jump_operators(params.jump_mode)
    return -1j * (hm @ rho - rho @ hm) + params.gamma * lindbladian(rho, ops)


def lindblad_entropy_rate(rho, params, kappa=KAPPA):
    """dS/dt = -gamma Tr(L(rho) B ln rho).

    The commutator term contributes nothing, so this is the full von Neumann
    entropy rate along a Lindblad trajectory.
    """
    ops = jump_operators(params.jump_mode)
    lr = lindbladian(rho, ops)
    return float(-params.gamma * np.trace(lr @ log_on_support(rho, kappa)).real)


def integrate_lindblad(rho0, h, params, t_end, dt=1e-3, stride=10, on_reject="raise"):
    ops = jump_operators(params.jump_mode)
    traces = _integrate.evolve(
        rho0,
        lambda r: lindblad_rhs(r, h, params),
        lambda r: params.gamma * lindbladian(r, ops),
        h, t_end, dt, stride=stride, kappa=params.kappa, framework="lindblad",
        on_reject=on_reject,
    )
    for tr in traces if isinstance(traces, list) else [traces]:
        tr.entropy_generation = entropy_generation(tr)
    return traces


def entropy_generation(trace):
    """Entropy change since t = 0; the projector jumps exchange no energy."""
    return trace.entropy - trace.entropy[0]
