"""Initial-state generators near a Bell-diagonal state.

Two schemes:

* weighted average toward the zero-energy pure product state |++><++|;
* constrained random perturbation of sqrt(rho0): Gaussian noise in the
  Pauli-product basis, followed by a correction along symmetrized
  gradients whose three multipliers restore unit trace, energy and purity.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import measures
from .qmat import KAPPA, hermitize, kron, matrix_func_on_support, pauli
from .states import InvalidStateError, pure_x_state, validate

log = logging.getLogger(__name__)

ROOT_TOL = 1e-10
DEDUP_TOL = 1e-6
MAX_NEWTON = 200
MAX_RETRIES = 8
BEZOUT_BOUND = 12

_PAULI_PRODUCTS = np.array([[kron(pauli(i), pauli(j)) for j in range(4)] for i in range(4)])


class NoRootFound(RuntimeError):
    pass


class AllRootsInvalid(RuntimeError):
    pass


@dataclass(frozen=True)
class GuePerturbation:
    eta: np.ndarray
    sigma: float
    seed: int
    attempt: int = 0

    @property
    def matrix(self):
        return 0.5 * np.einsum("ij,ijab->ab", self.eta, _PAULI_PRODUCTS)


@dataclass
class PerturbationRecord:
    eta: GuePerturbation
    all_roots: list          # [(lambda triple, max |residual|), ...]
    selected_root: int
    rho: np.ndarray
    constraint_residuals: np.ndarray
    concurrence_distance: float
    relative_entropy: float = field(default=None)

    @property
    def multipliers(self):
        return self.all_roots[self.selected_root][0]


def weighted_average(rho0, zeta):
    if not 0.0 <= zeta <= 1.0:
        raise ValueError(f"zeta must lie in [0, 1], got {zeta}")
    return zeta * np.asarray(rho0, dtype=complex) + (1.0 - zeta) * pure_x_state()


def sample_gue(sigma, seed, attempt=0):
    """Sixteen i.i.d. Normal(0, sigma^2) Pauli-product coefficients.

    ``attempt`` selects the next independent draw from the same seeded
    stream, which is how failed records are resampled reproducibly.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    eta = rng.normal(0.0, sigma, size=(attempt + 1, 4, 4))[attempt]
    return GuePerturbation(eta=eta, sigma=sigma, seed=seed, attempt=attempt)


def perturb_sqrt(rho0, eta):
    gamma0 = matrix_func_on_support(rho0, np.sqrt)
    m = eta.matrix if isinstance(eta, GuePerturbation) else 0.5 * np.einsum(
        "ij,ijab->ab", np.asarray(eta), _PAULI_PRODUCTS)
    return hermitize(gamma0 + m)


def gradient_directions(gamma_eps, h):
    """Directions -{G_i(g), g} for G = I, H, -(2 g^2 - I), evaluated at gamma_eps."""
    hm = getattr(h, "matrix", h)
    g = gamma_eps
    g3 = g @ g @ g
    return np.array([-2.0 * g, -(hm @ g + g @ hm), 4.0 * g3 - 2.0 * g])


def restored_sqrt(lam, gamma_eps, h, directions=None):
    a = gradient_directions(gamma_eps, h) if directions is None else directions
    return gamma_eps + np.einsum("...i,iab->...ab", np.asarray(lam, dtype=float), a)


def _targets(rho0, h):
    hm = getattr(h, "matrix", h)
    return np.array([1.0, measures.energy(rho0, hm), measures.purity(rho0)])


def _residuals_and_jacobian(lam, gamma_eps, directions, hm, targets):
    g = gamma_eps + np.einsum("mi,iab->mab", lam, directions)
    rho = g @ g
    f = np.stack([
        np.einsum("mii->m", rho).real,
        np.einsum("mab,ba->m", rho, hm).real,
        np.einsum("mab,mba->m", rho, rho).real,
    ], axis=-1) - targets
    drho = np.einsum("mab,ibc->miac", g, directions)
    drho = drho + np.conj(np.swapaxes(drho, -1, -2))
    jac = np.stack([
        np.einsum("miaa->mi", drho).real,
        np.einsum("miab,ba->mi", drho, hm).real,
        2.0 * np.einsum("mab,miba->mi", rho, drho).real,
    ], axis=1)
    return f, jac


def constraint_residuals(lam, gamma_eps, h, gamma0, rho0, kappa=KAPPA):
    """Left-minus-right of the trace, energy and purity constraints."""
    hm = getattr(h, "matrix", h)
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    f, _ = _residuals_and_jacobian(lam, gamma_eps, gradient_directions(gamma_eps, hm), hm,
                                   _targets(rho0, hm))
    return f[0] if f.shape[0] == 1 else f


def start_grid(sigma, points=5):
    """Starting multipliers: a points^3 lattice on [-1, 1]^3 scaled by 10 sigma."""
    axis = np.linspace(-1.0, 1.0, points) * 10.0 * sigma
    return np.array(list(itertools.product(axis, axis, axis)))


def solve_constraints(gamma_eps, h, gamma0, rho0, sigma=0.1, points=5):
    """All distinct real multiplier triples found by damped multi-start Newton."""
    hm = getattr(h, "matrix", h)
    directions = gradient_directions(gamma_eps, hm)
    targets = _targets(rho0, hm)
    lam = start_grid(sigma, points)
    f, jac = _residuals_and_jacobian(lam, gamma_eps, directions, hm, targets)
    norm = np.abs(f).max(axis=1)
    live = np.ones(len(lam), dtype=bool)
    for _ in range(MAX_NEWTON):
        live &= norm > 1e-14
        if not live.any():
            break
        idx = np.nonzero(live)[0]
        step = -np.einsum("mij,mj->mi", np.linalg.pinv(jac[idx]), f[idx])
        t = np.ones(len(idx))
        pending = np.ones(len(idx), dtype=bool)
        for _halving in range(30):
            trial = lam[idx[pending]] + t[pending, None] * step[pending]
            ft, jt = _residuals_and_jacobian(trial, gamma_eps, directions, hm, targets)
            nt = np.abs(ft).max(axis=1)
            better = nt < norm[idx[pending]]
            sel = idx[pending][better]
            lam[sel], f[sel], jac[sel], norm[sel] = trial[better], ft[better], jt[better], nt[better]
            pend_idx = np.nonzero(pending)[0]
            pending[pend_idx[better]] = False
            t[pending] *= 0.5
            if not pending.any():
                break
        # no descent even at a tiny step: the start has stalled
        live[idx[pending]] = False
    roots = []
    for k in np.argsort(norm, kind="stable"):
        if norm[k] > ROOT_TOL:
            continue
        if any(np.linalg.norm(lam[k] - r) < DEDUP_TOL for r, _ in roots):
            continue
        roots.append((lam[k].copy(), float(norm[k])))
    if not roots:
        raise NoRootFound("no Newton start converged")
    # canonical order so the selected index is reproducible
    roots.sort(key=lambda r: tuple(np.round(r[0], 8)))
    return roots


def select_root(roots, gamma_eps, h, rho0, eta=None, kappa=KAPPA):
    """Keep the root whose state has concurrence closest to that of rho0.

    Ties in the concurrence distance go to the smaller relative entropy,
    then to the smaller multiplier norm (lambda = (1, 0, 0) maps gamma to
    -gamma and so reproduces the unperturbed state exactly).
    """
    hm = getattr(h, "matrix", h)
    directions = gradient_directions(gamma_eps, hm)
    target_c = measures.concurrence(rho0)
    best = None
    for k, (lam, _) in enumerate(roots):
        g = restored_sqrt(lam, gamma_eps, hm, directions)
        rho = hermitize(g @ g)
        try:
            validate(rho)
        except InvalidStateError:
            continue
        dist = abs(measures.concurrence(rho) - target_c)
        d_rel = measures.relative_entropy(rho, rho0, kappa)
        key = (round(dist, 12), round(d_rel, 12), float(np.linalg.norm(lam)))
        if best is None or key < best[0]:
            best = (key, k, rho, dist, d_rel)
    if best is None:
        raise AllRootsInvalid("no root yields a valid density matrix")
    _, k, rho, dist, d_rel = best
    resid = np.array([
        np.trace(rho).real - 1.0,
        measures.energy(rho, hm) - measures.energy(rho0, hm),
        measures.purity(rho) - measures.purity(rho0),
    ])
    return PerturbationRecord(eta=eta, all_roots=roots, selected_root=k, rho=rho,
                              constraint_residuals=resid, concurrence_distance=dist,
                              relative_entropy=d_rel)


def perturb(rho0, h, sigma, seed, attempt=0):
    """One full constrained perturbation from a seeded draw."""
    eta = sample_gue(sigma, seed, attempt)
    gamma0 = matrix_func_on_support(rho0, np.sqrt)
    gamma_eps = perturb_sqrt(rho0, eta)
    roots = solve_constraints(gamma_eps, h, gamma0, rho0, sigma)
    return select_root(roots, gamma_eps, h, rho0, eta)


@dataclass
class BatchDiagnostics:
    requested: int
    failures: int = 0
    retries: int = 0
    abandoned: list = field(default_factory=list)
    root_counts: dict = field(default_factory=dict)


def _one_record(rho0, h, sigma, seed, retries):
    errors = 0
    for attempt in range(retries + 1):
        try:
            return perturb(rho0, h, sigma, seed, attempt), errors
        except (NoRootFound, AllRootsInvalid) as exc:
            errors += 1
            log.info("seed %d attempt %d failed: %s", seed, attempt, exc)
    return None, errors


def generate_batch(n, sigma, base_seed, rho0, h, retries=MAX_RETRIES, threads=1):
    """``n`` records with per-record seed ``base_seed + index``.

    Returns (records, diagnostics); a record that fails every retry is
    dropped and listed in ``diagnostics.abandoned``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    seeds = [base_seed + i for i in range(n)]
    work = lambda s: _one_record(rho0, h, sigma, s, retries)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, seeds))
    else:
        results = [work(s) for s in seeds]
    diag = BatchDiagnostics(requested=n)
    records = []
    for seed, (rec, errors) in zip(seeds, results):
        diag.failures += errors
        if rec is None:
            diag.abandoned.append(seed)
            log.warning("record with seed %d abandoned after %d attempts", seed, retries + 1)
            continue
        if errors:
            diag.retries += 1
        nroots = len(rec.all_roots)
        diag.root_counts[nroots] = diag.root_counts.get(nroots, 0) + 1
        records.append(rec)
    return records, diag
