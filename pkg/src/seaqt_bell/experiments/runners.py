"""Scenario runners: integrate, tabulate, and write CSVs plus a run manifest.

Every run directory gets its CSV files first and ``manifest.json`` last.
CSV files carry a header row, UTF-8, LF newlines and floats printed with
17 significant digits, so identical inputs give byte-identical files.
"""

import csv
import hashlib
import io
import json
import logging
import math
import os
import platform
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .. import __version__, lindblad, measures, seaqt
from ..integrate import crossing_time
from ..perturbation import generate_batch, weighted_average
from ..states import BASELINE_C, bell_diagonal
from .config import GeneralSpec, WeightedSpec
from .scenarios import REGISTRY

log = logging.getLogger(__name__)

MANIFEST_SCHEMA = "v1"
MANIFEST_NAME = "manifest.json"
CALIBRATION_ZETA = 0.68
CALIBRATION_TARGET = 0.19
EVOLUTION_COLUMNS = ["t", "S", "dS_dt", "S_gen", "E", "B_max", "D_rel", "energy", "purity",
                     "stationary_flag"]
SWEEP_COLUMNS = ["c1", "zeta", "S_initial", "S_final", "D_initial_vs_final", "S_gen_total",
                 "terminated_by"]


class CalibrationError(ArithmeticError):
    pass


class BatchAborted(RuntimeError):
    pass


class OverlayError(ValueError):
    pass


def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    Path(path).write_bytes(buf.getvalue().encode("utf-8"))
    return Path(path)


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------- calibration

@dataclass(frozen=True)
class Calibration:
    name: str
    scale: float
    reference_crossing: float = None

    def as_dict(self):
        return {"name": self.name, "scale": self.scale,
                "reference_crossing_internal": self.reference_crossing,
                "reference_zeta": CALIBRATION_ZETA, "target": CALIBRATION_TARGET}


_CAL_CACHE = {}


def calibrate(cfg):
    """Time scale mapping internal time onto the published dimensionless axis.

    ``paper`` scales time so that the SEAQT CHSH crossing of the
    zeta = 0.68 weighted baseline state sits at 0.19, using the
    configured SEAQT parameters, Hamiltonian and step size.
    """
    if cfg.calibration == "none":
        return Calibration("none", 1.0)
    key = (cfg.seaqt, cfg.hamiltonian.eps_a, cfg.hamiltonian.eps_b, cfg.integration.dt)
    if key not in _CAL_CACHE:
        rho = weighted_average(bell_diagonal(BASELINE_C), CALIBRATION_ZETA)
        tr = seaqt.integrate(rho, cfg.hamiltonian, cfg.seaqt, t_end=5.0,
                             dt=cfg.integration.dt, stride=1)
        t_cross = crossing_time(tr.times, tr.chsh_max)
        if t_cross is None or t_cross <= 0:
            raise CalibrationError("reference SEAQT trajectory never crosses B_max = 2")
        _CAL_CACHE[key] = Calibration("paper", CALIBRATION_TARGET / t_cross, t_cross)
    return _CAL_CACHE[key]


# ---------------------------------------------------------------- dynamics

def integrate_stack(framework, cfg, rhos, on_reject="raise"):
    integ = cfg.integration
    kwargs = dict(t_end=integ.t_end, dt=integ.dt, stride=integ.stride, on_reject=on_reject)
    if framework == "seaqt":
        return seaqt.integrate(np.asarray(rhos), cfg.hamiltonian, cfg.seaqt, **kwargs)
    return lindblad.integrate_lindblad(np.asarray(rhos), cfg.hamiltonian, cfg.lindblad, **kwargs)


def reference_state(cfg):
    return bell_diagonal(cfg.c)


def general_records(cfg, threads=1):
    spec = cfg.perturbation
    rho0 = reference_state(cfg)
    records, diag = generate_batch(spec.n, spec.sigma, spec.base_seed, rho0, cfg.hamiltonian,
                                   retries=spec.retries, threads=threads)
    return records, diag


def initial_states(cfg, threads=1):
    """[(label, rho)] for the configured perturbation.

    General-perturbation states are ordered by relative entropy to rho0,
    closest first, and labelled gp1, gp2, ...
    """
    rho0 = reference_state(cfg)
    spec = cfg.perturbation
    if isinstance(spec, WeightedSpec):
        return [(f"zeta{z:g}", weighted_average(rho0, z)) for z in spec.zeta], {}
    records, diag = general_records(cfg, threads)
    if len(records) < spec.n:
        raise BatchAborted(f"{spec.n - len(records)} perturbation(s) failed every retry")
    records = sorted(records, key=lambda r: (r.relative_entropy, r.eta.seed))
    states = [(f"gp{k + 1}", r.rho) for k, r in enumerate(records)]
    return states, {"seeds": [r.eta.seed for r in records]}


def trace_rows(tr, cal):
    n = len(tr.times)
    flags = np.zeros(n, dtype=bool)
    if tr.stationary_reached:
        flags[-1] = True
    for i in range(n):
        yield (
            tr.times[i] * cal.scale, tr.entropy[i], tr.entropy_rate[i] / cal.scale,
            tr.entropy_generation[i], tr.concurrence[i], tr.chsh_max[i],
            tr.relative_entropy[i], tr.energy[i], tr.purity[i], flags[i],
        )


# ---------------------------------------------------------------- manifest

@dataclass
class RunManifest:
    scenario: str
    command: str
    config: dict
    calibration: dict
    seeds: list
    outputs: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    started_at: str = ""
    wall_clock_seconds: float = 0.0

    def as_dict(self):
        return {
            "manifest_schema": MANIFEST_SCHEMA,
            "artifact": "seaqt-bell",
            "artifact_version": __version__,
            "scenario": self.scenario,
            "figure": REGISTRY[self.scenario].figure,
            "command": self.command,
            "config": self.config,
            "calibration": self.calibration,
            "seeds": self.seeds,
            "outputs": self.outputs,
            "results": self.results,
            "started_at": self.started_at,
            "wall_clock_seconds": self.wall_clock_seconds,
            "environment": {"python": platform.python_version(), "numpy": np.__version__},
        }


@dataclass
class RunResult:
    out_dir: Path
    files: list
    manifest: dict
    traces: dict = field(default_factory=dict)
    report: dict = None
    rejected: list = field(default_factory=list)   # trajectories stopped by StepRejected


class _Run:
    """Collects output files and writes the manifest when closed."""

    def __init__(self, cfg, command, out_dir):
        self.cfg = cfg
        self.command = command
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = []
        self.t0 = time.perf_counter()
        self.started = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def csv(self, name, header, rows):
        path = write_csv(self.out / name, header, rows)
        self.files.append(path)
        return path

    def json(self, name, payload):
        path = self.out / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n",
                        encoding="utf-8")
        self.files.append(path)
        return path

    def close(self, calibration, seeds, results=None):
        manifest = RunManifest(
            scenario=self.cfg.scenario,
            command=self.command,
            config=resolved_tree(self.cfg),
            calibration=calibration.as_dict(),
            seeds=list(seeds),
            outputs=[{"file": p.name, "sha256": sha256_file(p), "bytes": p.stat().st_size}
                     for p in self.files],
            results=results or {},
            started_at=self.started,
            wall_clock_seconds=round(time.perf_counter() - self.t0, 3),
        ).as_dict()
        tmp = self.out / (MANIFEST_NAME + ".tmp")
        tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False) + "\n",
                       encoding="utf-8")
        os.replace(tmp, self.out / MANIFEST_NAME)
        return manifest


def resolved_tree(cfg):
    """The config tree with defaults made explicit (beta_r resolved)."""
    tree = json.loads(json.dumps(cfg.tree))
    tree["seaqt"]["beta_r"] = cfg.seaqt.beta_r
    return tree


def _clean(x):
    """JSON-safe number: non-finite values become None."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------- runners

def run_evolution(cfg, out_dir, threads=1):
    run = _Run(cfg, "evolve", out_dir)
    cal = calibrate(cfg)
    states, extra = initial_states(cfg, threads)
    labels = [s[0] for s in states]
    rhos = np.array([s[1] for s in states])
    traces = {}
    results = {}
    rejected = []
    for fw in cfg.frameworks:
        trs = integrate_stack(fw, cfg, rhos, on_reject="drop")
        for label, tr in zip(labels, trs):
            run.csv(f"{fw}_{label}.csv", EVOLUTION_COLUMNS, trace_rows(tr, cal))
            traces[(fw, label)] = tr
            tc = crossing_time(tr.times, tr.chsh_max)
            results[f"{fw}_{label}"] = {
                "terminated_by": tr.terminated_by,
                "rejected_time": _scaled(tr.rejected_time, cal),
                "chsh_crossing": _scaled(tc, cal),
            }
            if tr.rejected_time is not None:
                rejected.append(f"{fw}_{label}")
    manifest = run.close(cal, extra.get("seeds", []), results)
    return RunResult(run.out, run.files, manifest, traces, rejected=rejected)


def _scaled(t, cal):
    return None if t is None else _clean(t * cal.scale)


def run_sweep(cfg, out_dir, threads=1):
    run = _Run(cfg, "sweep", out_dir)
    cal = calibrate(cfg)
    grid = [(c1, z) for c1 in cfg.sweep_c1 for z in cfg.sweep_zeta]
    rhos = np.array([weighted_average(bell_diagonal((c1, cfg.c.c2, cfg.c.c3)), z) for c1, z in grid])
    results = {}
    for fw in cfg.frameworks:
        trs = integrate_stack(fw, cfg, rhos, on_reject="drop")
        rows = []
        for (c1, z), tr in zip(grid, trs):
            d = measures.relative_entropy(tr.states[0], tr.final_state)
            rows.append((c1, z, tr.entropy[0], tr.entropy[-1], d, tr.entropy_generation[-1],
                         tr.terminated_by))
        run.csv(f"sweep_{fw}.csv", SWEEP_COLUMNS, rows)
        results[fw] = {
            "rows": len(rows),
            "stationary": sum(tr.terminated_by == "stationarity" for tr in trs),
            "step_rejected": sum(tr.terminated_by == "step_rejected" for tr in trs),
        }
    manifest = run.close(cal, [], results)
    return RunResult(run.out, run.files, manifest)


def histogram(values_by_stage, bins):
    """Shared uniform bin edges over the observed range of all stages."""
    allv = np.concatenate([np.asarray(v, dtype=float) for v in values_by_stage.values()])
    lo, hi = float(allv.min()), float(allv.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    counts = {k: np.histogram(np.asarray(v, dtype=float), bins=edges)[0] for k, v in values_by_stage.items()}
    return edges, counts


def _pearson_or_none(xs, ys):
    try:
        return measures.pearson(xs, ys)
    except measures.ZeroVarianceError:
        return None


def run_batch(cfg, out_dir, threads=1):
    if not isinstance(cfg.perturbation, GeneralSpec):
        raise BatchAborted("batch runs need a general perturbation spec")
    run = _Run(cfg, "batch", out_dir)
    cal = calibrate(cfg)
    spec = cfg.perturbation
    rho0 = reference_state(cfg)
    records, diag = general_records(cfg, threads)
    budget = cfg.max_failure_fraction * spec.n
    if len(diag.abandoned) > budget:
        raise BatchAborted(f"{len(diag.abandoned)} of {spec.n} records failed every retry")
    rhos = np.array([r.rho for r in records])
    e0 = np.atleast_1d(measures.concurrence(rhos))
    b0 = np.atleast_1d(measures.chsh_max(rhos))
    s0 = np.atleast_1d(measures.entropy(rhos))
    d0 = np.atleast_1d(measures.relative_entropy(rhos, rho0))

    keep = np.ones(len(records), dtype=bool)
    finals = {}
    for fw in cfg.frameworks:
        trs = integrate_stack(fw, cfg, rhos, on_reject="drop")
        finals[fw] = trs
        keep &= np.array([tr.rejected_time is None for tr in trs])
    failed = len(diag.abandoned) + int((~keep).sum())
    if failed > budget:
        raise BatchAborted(f"{failed} of {spec.n} records failed (budget {budget:g})")

    header = ["record", "seed", "attempt", "n_roots", "selected_root", "E_initial", "B_initial",
              "S_initial", "D_initial"]
    for fw in cfg.frameworks:
        header += [f"{fw}_E_final", f"{fw}_B_final", f"{fw}_S_gen_total", f"{fw}_terminated_by"]
    rows = []
    for i, rec in enumerate(records):
        row = [i, rec.eta.seed, rec.eta.attempt, len(rec.all_roots), rec.selected_root,
               e0[i], b0[i], s0[i], d0[i]]
        for fw in cfg.frameworks:
            tr = finals[fw][i]
            row += [tr.concurrence[-1], tr.chsh_max[-1], tr.entropy_generation[-1], tr.terminated_by]
        rows.append(row)
    run.csv("records.csv", header, rows)

    hist_rows = []
    bin_spec = {}
    for qty, init, attr in (("E", e0, "concurrence"), ("B_max", b0, "chsh_max")):
        stages = {"initial": init[keep]}
        for fw in cfg.frameworks:
            stages[f"{fw}_final"] = np.array([getattr(tr, attr)[-1] for tr in finals[fw]])[keep]
        edges, counts = histogram(stages, cfg.bins)
        bin_spec[qty] = {"bins": cfg.bins, "low": float(edges[0]), "high": float(edges[-1])}
        for stage, cnt in counts.items():
            for k in range(cfg.bins):
                hist_rows.append((qty, stage, edges[k], edges[k + 1], int(cnt[k])))
    run.csv("histograms.csv", ["quantity", "stage", "bin_left", "bin_right", "count"], hist_rows)

    report = {
        "report_schema": MANIFEST_SCHEMA,
        "n_requested": spec.n,
        "n_records": int(keep.sum()),
        "sigma": spec.sigma,
        "base_seed": spec.base_seed,
        "diagnostics": {
            "perturbation_failures": diag.failures,
            "records_needing_retry": diag.retries,
            "abandoned_seeds": diag.abandoned,
            "step_rejected_records": [int(i) for i in np.nonzero(~keep)[0]],
            "root_count_histogram": {str(k): v for k, v in sorted(diag.root_counts.items())},
        },
        "initial": {
            "E_mean": float(e0[keep].mean()),
            "B_max_mean": float(b0[keep].mean()),
            "B_max_below_2_fraction": float((b0[keep] < 2).mean()),
        },
        "histogram": bin_spec,
        "frameworks": {},
    }
    for fw in cfg.frameworks:
        trs = [tr for tr, k in zip(finals[fw], keep) if k]
        d_e = np.array([tr.concurrence[-1] - tr.concurrence[0] for tr in trs])
        d_b = np.array([tr.chsh_max[-1] - tr.chsh_max[0] for tr in trs])
        s_gen = np.array([tr.entropy_generation[-1] for tr in trs])
        report["frameworks"][fw] = {
            "r_E": _clean(_pearson_or_none(d_e, s_gen)),
            "r_B": _clean(_pearson_or_none(d_b, s_gen)),
            "delta_E_mean": float(d_e.mean()),
            "delta_B_max_mean": float(d_b.mean()),
            "S_gen_mean": float(s_gen.mean()),
            "final_E_mean": float(np.mean([tr.concurrence[-1] for tr in trs])),
            "final_B_max_mean": float(np.mean([tr.chsh_max[-1] for tr in trs])),
            "final_B_max_below_2_fraction": float(np.mean([tr.chsh_max[-1] < 2 for tr in trs])),
            "stationary_fraction": float(np.mean([tr.stationary_reached for tr in trs])),
        }
    run.json("correlation_report.json", report)
    seeds = [r.eta.seed for r in records]
    manifest = run.close(cal, seeds, {"failed_records": failed})
    return RunResult(run.out, run.files, manifest, report=report)


COMPARE_FIELDS = (("S", "entropy"), ("dS_dt", "entropy_rate"), ("E", "concurrence"),
                  ("B_max", "chsh_max"))


def _padded(tr, attr, n):
    v = np.asarray(getattr(tr, attr), dtype=float)
    if len(v) >= n:
        return v[:n]
    # a stationary trajectory keeps its measures (local unitary motion only);
    # a rejected one has no data past the rejection
    if tr.rejected_time is not None:
        fill = np.nan
    else:
        fill = 0.0 if attr == "entropy_rate" else v[-1]
    return np.concatenate([v, np.full(n - len(v), fill)])


def run_compare(cfg, out_dir, threads=1):
    run = _Run(cfg, "compare", out_dir)
    cal = calibrate(cfg)
    states, extra = initial_states(cfg, threads)
    label, rho = states[0]
    traces = {fw: integrate_stack(fw, cfg, rho[None], on_reject="drop")[0] for fw in ("seaqt", "lindblad")}
    n = max(len(tr.times) for tr in traces.values())
    integ = cfg.integration
    times = np.minimum(np.arange(n) * integ.stride * integ.dt, integ.t_end)
    header = ["t"]
    cols = [times * cal.scale]
    for fw in ("seaqt", "lindblad"):
        for name, attr in COMPARE_FIELDS:
            header.append(f"{name}_{fw}")
            col = _padded(traces[fw], attr, n)
            cols.append(col / cal.scale if attr == "entropy_rate" else col)
    run.csv("compare.csv", header, zip(*cols))
    crossings = {}
    rows = []
    for fw, tr in traces.items():
        tc = crossing_time(tr.times, tr.chsh_max)
        tc = None if tc is None else tc * cal.scale
        crossings[fw] = _clean(tc)
        e_at = None
        if tc is not None:
            e_at = float(np.interp(tc / cal.scale, tr.times, tr.concurrence))
        rows.append((fw, "nan" if tc is None else tc, tr.concurrence[0],
                     "nan" if e_at is None else e_at))
    run.csv("crossings.csv", ["framework", "t_cross", "E_initial", "E_at_cross"], rows)
    manifest = run.close(cal, extra.get("seeds", []),
                         {"initial_state": label, "chsh_crossing": crossings,
                          "rejected_time": {fw: _scaled(tr.rejected_time, cal) for fw, tr in traces.items()}})
    rejected = [fw for fw, tr in traces.items() if tr.rejected_time is not None]
    return RunResult(run.out, run.files, manifest, traces, rejected=rejected)


RUNNERS = {"evolve": run_evolution, "sweep": run_sweep, "batch": run_batch, "compare": run_compare}


# ---------------------------------------------------------------- overlay

def read_numeric_csv(path):
    """Columns of a headed numeric CSV as float arrays."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise OverlayError(f"{path}: not UTF-8 text") from exc
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise OverlayError(f"{path}: malformed CSV (needs a header and at least one row)")
    header = [h.strip() for h in rows[0]]
    cols = {h: [] for h in header}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise OverlayError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for h, cell in zip(header, row):
            try:
                cols[h].append(float(cell))
            except ValueError:
                if h == "terminated_by":
                    cols[h].append(math.nan)
                    continue
                raise OverlayError(f"{path}:{lineno}: non-numeric value {cell!r} in column {h}")
    return {h: np.array(v) for h, v in cols.items()}


@dataclass(frozen=True)
class OverlayReport:
    n_points: int
    residuals: dict   # column -> {"max": ..., "mean": ...}


def overlay_experimental(csv_path, trace_path, columns=("E", "B_max")):
    """Nearest-sample join of measured points onto a trace CSV."""
    data = read_numeric_csv(csv_path)
    trace = read_numeric_csv(trace_path)
    for name, cols in ((csv_path, data), (trace_path, trace)):
        if "t" not in cols:
            raise OverlayError(f"{name}: missing column 't'")
        if np.any(np.diff(cols["t"]) <= 0):
            raise OverlayError(f"{name}: column 't' is not strictly increasing")
    used = [c for c in columns if c in data]
    if not used:
        raise OverlayError(f"{csv_path}: needs at least one of {', '.join(columns)}")
    tt = trace["t"]
    idx = np.searchsorted(tt, data["t"]).clip(1, len(tt) - 1) if len(tt) > 1 else np.zeros(len(data["t"]), int)
    if len(tt) > 1:
        left_closer = np.abs(data["t"] - tt[idx - 1]) <= np.abs(tt[idx] - data["t"])
        idx = np.where(left_closer, idx - 1, idx)
    residuals = {}
    for c in used:
        if c not in trace:
            raise OverlayError(f"{trace_path}: missing column {c!r}")
        r = np.abs(data[c] - trace[c][idx])
        residuals[c] = {"max": float(r.max()), "mean": float(r.mean())}
    return OverlayReport(n_points=len(data["t"]), residuals=residuals)


def write_overlay(report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [(c, v["max"], v["mean"], report.n_points) for c, v in report.residuals.items()]
    return write_csv(out / "overlay.csv", ["column", "max_abs_residual", "mean_abs_residual", "n"], rows)
