"""Steepest-entropy-ascent equation of motion for two non-interacting qubits.

    d rho/dt = -i[H, rho] - sum_J (1/tau_J) D_J (x) rho_Jbar

Each D_J = 1/2 (rho_J Y_J + (rho_J Y_J)^H) is built from the locally
perceived entropy operator (B ln rho)^J. In the isolated variant Y_J is
what remains of (B ln rho)^J after removing its component along the
generators {I, H_J} in the local metric (a ratio of determinants). In the
reservoir variant Y_J = (B ln rho)^J + beta_R H_J minus a constant that
keeps D_J traceless, so each subsystem is pulled toward a canonical state
at the reservoir temperature.
"""

from dataclasses import dataclass

import numpy as np

from . import integrate as _integrate
from .measures import log_on_support
from .qmat import KAPPA, dagger, kron, partial_trace
from .states import CompositeHamiltonian

GRAM_TOL = 1e-14

RESERVOIR = "reservoir"
ISOLATED = "isolated"


class DegenerateGram(ArithmeticError):
    pass


@dataclass(frozen=True)
class SeaqtParams:
    tau_a: float = 1.0
    tau_b: float = 1.0
    beta_r: float = 1.0
    variant: str = RESERVOIR
    kappa: float = KAPPA

    def __post_init__(self):
        if not (self.tau_a > 0 and self.tau_b > 0):
            raise ValueError("relaxation times must be positive")
        if self.variant not in (RESERVOIR, ISOLATED):
            raise ValueError(f"unknown SEAQT variant {self.variant!r}")

    def tau(self, j):
        return self.tau_a if j == "A" else self.tau_b


def _tr(a, b):
    return np.einsum("...ij,...ji->...", a, b).real


def locally_perceived(f, rho, j):
    """F^J = Tr_Jbar((I_J (x) rho_Jbar) F)."""
    f4 = np.asarray(f, dtype=complex)
    f4 = f4.reshape(f4.shape[:-2] + (2, 2, 2, 2))
    if j == "A":
        rho_b = partial_trace(rho, "B")
        return np.einsum("...db,...abcd->...ac", rho_b, f4)
    if j == "B":
        rho_a = partial_trace(rho, "A")
        return np.einsum("...ca,...abcd->...bd", rho_a, f4)
    raise ValueError(f"subsystem must be 'A' or 'B', got {j!r}")


def _abs(m):
    w, v = np.linalg.eigh(m)
    return (v * np.abs(w)[..., None, :]) @ dagger(v)


def _ip(f, g, abs_rho):
    return 0.5 * (_tr(abs_rho, f @ g) + _tr(abs_rho, g @ f))


def inner_product(fj, gj, rho_j):
    """(F, G)_J = 1/2 Tr(|rho_J| {F, G})."""
    return _ip(fj, gj, _abs(rho_j))


def _symmetrized(rho_j, y):
    ry = rho_j @ y
    return 0.5 * (ry + dagger(ry))


def _isolated_y(rho_j, log_j, h_j, fallback):
    """Numerator determinant over the Gram determinant, by cofactors."""
    eye = np.broadcast_to(np.eye(2, dtype=complex), rho_j.shape)
    abs_rho = _abs(rho_j)
    ip = lambda f, g: _ip(f, g, abs_rho)
    g_ii = ip(eye, eye)
    g_ih = ip(eye, h_j)
    g_hh = ip(h_j, h_j)
    l_i = ip(eye, log_j)
    l_h = ip(h_j, log_j)
    gram = g_ii * g_hh - g_ih * g_ih
    degenerate = gram <= GRAM_TOL
    if np.any(degenerate) and not fallback:
        raise DegenerateGram(f"Gram determinant {np.min(gram):.3e} <= {GRAM_TOL}")
    safe = np.where(degenerate, 1.0, gram)
    c_log = (gram / safe)[..., None, None]
    c_eye = (-(l_i * g_hh - g_ih * l_h) / safe)[..., None, None]
    c_h = ((l_i * g_ih - g_ii * l_h) / safe)[..., None, None]
    y = c_log * log_j + c_eye * eye + c_h * h_j
    # one-generator form {I}: Gram is (I, I), numerator row (B ln rho, I)
    y1 = log_j - (l_i / g_ii)[..., None, None] * eye
    return np.where(degenerate[..., None, None], y1, y)


def _place(d_j, rho, j):
    if j == "A":
        return kron(d_j, partial_trace(rho, "B"))
    return kron(partial_trace(rho, "A"), d_j)


def dissipator_isolated(rho, h, j, kappa=KAPPA, fallback=False):
    """Contribution D_J (x) rho_Jbar with generators {I, H_J}.

    Raises DegenerateGram when H_J is proportional to I in the local metric,
    unless ``fallback`` selects the one-generator form.
    """
    rho = np.asarray(rho, dtype=complex)
    rho_j = partial_trace(rho, j)
    log_j = locally_perceived(log_on_support(rho, kappa), rho, j)
    h_j = np.broadcast_to(_local_h(h, j), rho_j.shape)
    y = _isolated_y(rho_j, log_j, h_j, fallback)
    return _place(_symmetrized(rho_j, y), rho, j)


def dissipator_reservoir(rho_j, h_j, beta_r, kappa=KAPPA, log_op=None):
    """D_J = 1/2{rho_J, L} - beta_R <f>_J rho_J + 1/2 beta_R {H_J, rho_J}.

    ``L`` defaults to B_J ln rho_J; pass the locally perceived (B ln rho)^J
    for a correlated composite. <f>_J = Tr(rho_J H_J) + Tr(rho_J L)/beta_R,
    so D_J is traceless and vanishes at the canonical state.
    """
    rho_j = np.asarray(rho_j, dtype=complex)
    if log_op is None:
        log_op = log_on_support(rho_j, kappa)
    h_j = np.asarray(h_j, dtype=complex)
    beta_f = beta_r * _tr(rho_j, h_j) + _tr(rho_j, log_op)
    out = 0.5 * (rho_j @ log_op + log_op @ rho_j)
    out = out - beta_f[..., None, None] * rho_j
    out = out + 0.5 * beta_r * (h_j @ rho_j + rho_j @ h_j)
    return out


def _local_h(h, j):
    if isinstance(h, CompositeHamiltonian):
        return h.local(j)
    # recover the local term of a non-interacting H from its partial trace
    return 0.5 * partial_trace(np.asarray(h), j)


def _full_h(h):
    return getattr(h, "matrix", h)


def dissipation(rho, h, params):
    """sum_J (1/tau_J) D_J (x) rho_Jbar; the term subtracted in the equation of motion."""
    rho = np.asarray(rho, dtype=complex)
    log_full = log_on_support(rho, params.kappa)
    out = 0
    for j in ("A", "B"):
        rho_j = partial_trace(rho, j)
        log_j = locally_perceived(log_full, rho, j)
        h_j = np.broadcast_to(_local_h(h, j), rho_j.shape)
        if params.variant == ISOLATED:
            d_j = _symmetrized(rho_j, _isolated_y(rho_j, log_j, h_j, fallback=True))
        else:
            d_j = dissipator_reservoir(rho_j, h_j, params.beta_r, params.kappa, log_op=log_j)
        out = out + _place(d_j, rho, j) / params.tau(j)
    return out


def seaqt_rhs(rho, h, params):
    hm = _full_h(h)
    rho = np.asarray(rho, dtype=complex)
    return -1j * (hm @ rho - rho @ hm) - dissipation(rho, h, params)


def integrate(rho0, h, params, t_end, dt=1e-3, stride=10, on_reject="raise"):
    """Evolve one state (or a stack) and fill in entropy generation."""
    traces = _integrate.evolve(
        rho0,
        lambda r: seaqt_rhs(r, h, params),
        lambda r: dissipation(r, h, params),
        h, t_end, dt, stride=stride, kappa=params.kappa, framework="seaqt",
        on_reject=on_reject,
    )
    for tr in traces if isinstance(traces, list) else [traces]:
        tr.entropy_generation = entropy_generation(tr, params)
    return traces


def entropy_generation(trace, params):
    """Cumulative entropy produced since t = 0.

    Isolated: the entropy change. Reservoir: the entropy change minus the
    entropy received from the reservoir, beta_R times the energy change.
    """
    ds = trace.entropy - trace.entropy[0]
    if params.variant == ISOLATED:
        return ds
    return ds - params.beta_r * (trace.energy - trace.energy[0])
