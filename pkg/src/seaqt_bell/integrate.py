"""Fixed-step RK4 for density-matrix ODEs, shared by both frameworks.

After every step the state is re-Hermitized, eigenvalues below the kernel
threshold are clamped to zero and the trace is renormalized. Trajectories
may be advanced as a stack; each one stops independently once its
dissipative part vanishes.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import measures
from .qmat import KAPPA, dagger, hermitize

log = logging.getLogger(__name__)

STATIONARY_TOL = 1e-9
PSD_REJECT = 1e-6


class StepRejected(RuntimeError):
    """Post-step PSD violation too large; the step size is too coarse."""

    def __init__(self, message, time, violation):
        super().__init__(message)
        self.time = time
        self.violation = violation


@dataclass
class EvolutionTrace:
    framework: str
    times: np.ndarray
    states: np.ndarray
    concurrence: np.ndarray
    chsh_max: np.ndarray
    entropy: np.ndarray
    energy: np.ndarray
    relative_entropy: np.ndarray
    purity: np.ndarray
    entropy_rate: np.ndarray
    entropy_generation: np.ndarray = field(default=None)
    stationary_reached: bool = False
    stationary_time: float = None
    rejected_time: float = None

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def terminated_by(self):
        if self.rejected_time is not None:
            return "step_rejected"
        return "stationarity" if self.stationary_reached else "t_end"

    @property
    def measures(self):
        return [
            measures.MeasureSet(
                concurrence=float(self.concurrence[i]),
                chsh_max=float(self.chsh_max[i]),
                entropy=float(self.entropy[i]),
                energy=float(self.energy[i]),
                relative_entropy=float(self.relative_entropy[i]),
                linear_entropy=1.0 - float(self.purity[i]),
                purity=float(self.purity[i]),
            )
            for i in range(len(self.times))
        ]


def project_to_states(rho, kappa=KAPPA):
    """Return the projected unit-trace PSD state(s) and the smallest raw eigenvalue(s)."""
    w, v = np.linalg.eigh(hermitize(rho))
    worst = w[..., 0].copy()
    w = np.where(w < kappa, 0.0, w)
    w = w / w.sum(axis=-1, keepdims=True)
    return (v * w[..., None, :]) @ dagger(v), worst


def rk4_step(f, rho, dt):
    k1 = f(rho)
    k2 = f(rho + 0.5 * dt * k1)
    k3 = f(rho + 0.5 * dt * k2)
    k4 = f(rho + dt * k3)
    return rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve(rho0, rhs, dissipative, h, t_end, dt, stride=10, kappa=KAPPA,
           framework="", stationary_tol=STATIONARY_TOL, project=True, on_reject="raise"):
    """Integrate ``d rho/dt = rhs(rho)`` from ``rho0`` (single state or stack).

    Samples every ``stride`` steps. A trajectory is declared stationary at
    the first sample where max|dissipative(rho)| < ``stationary_tol`` and
    is not advanced further. Returns one EvolutionTrace per input state
    (a bare trace for single-state input). Entropy generation is left for
    the framework to fill in.

    A post-step eigenvalue below -PSD_REJECT raises StepRejected, or with
    ``on_reject="drop"`` stops only the offending trajectory and stamps
    its ``rejected_time``.
    """
    if on_reject not in ("raise", "drop"):
        raise ValueError("on_reject must be 'raise' or 'drop'")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    rho0 = np.asarray(rho0, dtype=complex)
    single = rho0.ndim == 2
    rho = rho0[None] if single else rho0.copy()
    n_traj = rho.shape[0]
    ref = rho.copy()
    n_steps = int(round(t_end / dt))
    hm = getattr(h, "matrix", h)

    samples = [[] for _ in range(n_traj)]
    stationary_at = [None] * n_traj
    rejected_at = [None] * n_traj
    active = np.arange(n_traj)

    def record(step, idx, r):
        f = rhs(r)
        rate = -np.einsum("kij,kji->k", f, measures.log_on_support(r, kappa)).real
        c = measures.concurrence(r)
        b = measures.chsh_max(r)
        s = measures.entropy(r, kappa)
        e = measures.energy(r, hm)
        d = measures.relative_entropy(r, ref[idx], kappa)
        p = measures.purity(r)
        for n, k in enumerate(idx):
            samples[k].append((step * dt, r[n].copy(), c[n], b[n], s[n], e[n], d[n], p[n], rate[n]))
        return np.max(np.abs(dissipative(r)), axis=(-1, -2))

    step = 0
    resid = record(0, active, rho)
    while True:
        done = resid < stationary_tol
        for k in active[done]:
            stationary_at[k] = step * dt
        keep = ~done
        active, rho = active[keep], rho[keep]
        if len(active) == 0 or step >= n_steps:
            break
        for _ in range(min(stride, n_steps - step)):
            rho = rk4_step(rhs, rho, dt)
            step += 1
            if project:
                rho, worst = project_to_states(rho, kappa)
                bad = worst < -PSD_REJECT
                if bad.any():
                    if on_reject == "raise":
                        raise StepRejected(
                            f"PSD violation {worst.min():.3e} at t={step * dt:.6g}; reduce dt",
                            step * dt, float(-worst.min()),
                        )
                    for k in active[bad]:
                        rejected_at[k] = step * dt
                        log.warning("trajectory %d rejected at t=%.6g (eigenvalue %.3e)",
                                    k, step * dt, worst[bad].min())
                    active, rho = active[~bad], rho[~bad]
                    if len(active) == 0:
                        break
        if len(active) == 0:
            break
        resid = record(step, active, rho)

    traces = []
    for k in range(n_traj):
        cols = list(zip(*samples[k]))
        traces.append(EvolutionTrace(
            framework=framework,
            times=np.array(cols[0]),
            states=np.array(cols[1]),
            concurrence=np.array(cols[2]),
            chsh_max=np.array(cols[3]),
            entropy=np.array(cols[4]),
            energy=np.array(cols[5]),
            relative_entropy=np.array(cols[6]),
            purity=np.array(cols[7]),
            entropy_rate=np.array(cols[8]),
            stationary_reached=stationary_at[k] is not None,
            stationary_time=stationary_at[k],
            rejected_time=rejected_at[k],
        ))
    return traces[0] if single else traces


def crossing_time(times, values, level=2.0):
    """First downward crossing of ``level``, linearly interpolated; None if absent."""
    v = np.asarray(values)
    t = np.asarray(times)
    below = np.nonzero(v < level)[0]
    if len(below) == 0:
        return None
    i = below[0]
    if i == 0:
        return float(t[0])
    return float(t[i - 1] + (v[i - 1] - level) / (v[i - 1] - v[i]) * (t[i] - t[i - 1]))
