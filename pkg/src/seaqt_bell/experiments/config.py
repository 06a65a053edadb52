"""Scenario configuration: a YAML key-value tree with a versioned schema.

A config file looks like::

    schema_version: 1
    scenario: fig02_seaqt_zeta_evolutions
    c: [0.996, 0.4, -0.4]
    hamiltonian: {eps_a: 1.0, eps_b: 1.0}
    framework: seaqt            # seaqt | lindblad | both
    seaqt: {variant: reservoir, tau_a: 1.0, tau_b: 1.0, beta_r: null}
    lindblad: {gamma: 1.0, jump_mode: global}
    perturbation: {kind: weighted, zeta: [1.0, 0.68]}
    integration: {dt: 0.001, t_end: 10.0, stride: 10}
    calibration: paper          # paper | none
    sweep: {c1: [0.4, 0.8], zeta: {start: 0.0, stop: 1.0, step: 0.01}}
    batch: {bins: 30, max_failure_fraction: 0.2}

Values are layered: scenario defaults, then the file, then CLI overrides.
Only the keys shown are accepted; ``beta_r: null`` means 1/eps_a.
"""

import copy
from dataclasses import dataclass

import numpy as np
import yaml

from ..lindblad import GLOBAL, LOCAL, LindbladParams
from ..seaqt import ISOLATED, RESERVOIR, SeaqtParams
from ..states import CConfig, CompositeHamiltonian, InvalidCConfig

SCHEMA_VERSION = 1
FRAMEWORKS = ("seaqt", "lindblad", "both")
CALIBRATIONS = ("paper", "none")

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "scenario": None,
    "c": [0.996, 0.4, -0.4],
    "hamiltonian": {"eps_a": 1.0, "eps_b": 1.0},
    "framework": "seaqt",
    "seaqt": {"variant": RESERVOIR, "tau_a": 1.0, "tau_b": 1.0, "beta_r": None},
    "lindblad": {"gamma": 1.0, "jump_mode": GLOBAL},
    "perturbation": {"kind": "weighted", "zeta": [0.68]},
    "integration": {"dt": 1e-3, "t_end": 10.0, "stride": 10},
    "calibration": "paper",
    "sweep": {"c1": [0.996], "zeta": {"start": 0.0, "stop": 1.0, "step": 0.01}},
    "batch": {"bins": 30, "max_failure_fraction": 0.2},
}

_WEIGHTED_KEYS = {"kind", "zeta"}
_GENERAL_KEYS = {"kind", "n", "sigma", "base_seed", "retries"}
_GENERAL_DEFAULTS = {"n": 300, "sigma": 0.1, "base_seed": 0, "retries": 8}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted key that failed."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class WeightedSpec:
    zeta: tuple


@dataclass(frozen=True)
class GeneralSpec:
    n: int
    sigma: float
    base_seed: int
    retries: int = 8


@dataclass(frozen=True)
class IntegrationSpec:
    dt: float
    t_end: float
    stride: int


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    c: CConfig
    hamiltonian: CompositeHamiltonian
    framework: str
    seaqt: SeaqtParams
    lindblad: LindbladParams
    perturbation: object
    integration: IntegrationSpec
    calibration: str
    sweep_c1: tuple
    sweep_zeta: tuple
    bins: int
    max_failure_fraction: float
    tree: dict

    @property
    def frameworks(self):
        return ("seaqt", "lindblad") if self.framework == "both" else (self.framework,)


def merge(base, override):
    """Recursive dict merge; ``override`` wins, lists are replaced whole."""
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        switched = (isinstance(value, dict) and isinstance(out.get(key), dict)
                    and "kind" in value and value["kind"] != out[key].get("kind"))
        if switched:
            # a different perturbation kind starts from a clean block
            out[key] = copy.deepcopy(value)
        elif isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def read_tree(path):
    """Parse a config file into a dict (I/O errors propagate as OSError)."""
    with open(path, encoding="utf-8") as fh:
        try:
            tree = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("<file>", f"not valid YAML: {exc}") from exc
    if tree is None:
        return {}
    if not isinstance(tree, dict):
        raise ConfigError("<root>", "top level must be a mapping")
    # a run manifest replays the config snapshot it carries
    if "manifest_schema" in tree:
        tree = tree.get("config")
        if not isinstance(tree, dict):
            raise ConfigError("config", "manifest has no config snapshot")
    return tree


def _check_keys(tree, allowed, prefix):
    for key in tree:
        if key not in allowed:
            raise ConfigError(f"{prefix}{key}", "unknown key")


def _num(tree, key, prefix, positive=False, nonneg=False, integer=False):
    path = f"{prefix}{key}"
    value = tree.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, "expected an integer")
    if not np.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and value <= 0:
        raise ConfigError(path, "must be positive")
    if nonneg and value < 0:
        raise ConfigError(path, "must be non-negative")
    return int(value) if integer else float(value)


def _choice(value, options, path):
    if value not in options:
        raise ConfigError(path, f"must be one of {', '.join(options)}; got {value!r}")
    return value


def zeta_grid(spec, path="sweep.zeta"):
    """A zeta list, or {start, stop, step} expanded inclusively and rounded to the step."""
    if isinstance(spec, (list, tuple)):
        values = [_num({"v": z}, "v", path) for z in spec]
    elif isinstance(spec, dict):
        _check_keys(spec, {"start", "stop", "step"}, path + ".")
        start = _num(spec, "start", path + ".")
        stop = _num(spec, "stop", path + ".")
        step = _num(spec, "step", path + ".", positive=True)
        count = int(round((stop - start) / step)) + 1
        decimals = max(0, int(np.ceil(-np.log10(step))) + 2)
        values = [round(start + k * step, decimals) for k in range(count)]
    else:
        raise ConfigError(path, "expected a list or {start, stop, step}")
    if not values:
        raise ConfigError(path, "empty zeta grid")
    for z in values:
        if not 0.0 <= z <= 1.0:
            raise ConfigError(path, f"zeta {z} outside [0, 1]")
    return tuple(values)


def validate(tree):
    """Turn a merged tree into a ScenarioConfig, reporting the failing key path."""
    _check_keys(tree, DEFAULTS.keys(), "")
    version = tree.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r}; expected {SCHEMA_VERSION}")
    scenario = tree.get("scenario")
    if not isinstance(scenario, str):
        raise ConfigError("scenario", "missing scenario name")
    from .scenarios import REGISTRY
    if scenario not in REGISTRY:
        raise ConfigError("scenario", f"unknown scenario {scenario!r}")

    c = tree.get("c")
    if not isinstance(c, (list, tuple)) or len(c) != 3:
        raise ConfigError("c", "expected three coefficients")
    try:
        cfg_c = CConfig(*[_num({"v": x}, "v", "c") for x in c])
    except InvalidCConfig as exc:
        raise ConfigError("c", str(exc)) from exc

    ham = tree.get("hamiltonian") or {}
    _check_keys(ham, {"eps_a", "eps_b"}, "hamiltonian.")
    eps_a = _num(ham, "eps_a", "hamiltonian.")
    eps_b = _num(ham, "eps_b", "hamiltonian.")

    framework = _choice(tree.get("framework"), FRAMEWORKS, "framework")

    sq = tree.get("seaqt") or {}
    _check_keys(sq, {"variant", "tau_a", "tau_b", "beta_r"}, "seaqt.")
    variant = _choice(sq.get("variant"), (RESERVOIR, ISOLATED), "seaqt.variant")
    beta_r = sq.get("beta_r")
    if beta_r is None:
        beta_r = 1.0 / eps_a if eps_a != 0 else 1.0
    else:
        beta_r = _num(sq, "beta_r", "seaqt.", nonneg=True)
    seaqt_params = SeaqtParams(
        tau_a=_num(sq, "tau_a", "seaqt.", positive=True),
        tau_b=_num(sq, "tau_b", "seaqt.", positive=True),
        beta_r=beta_r,
        variant=variant,
    )

    lb = tree.get("lindblad") or {}
    _check_keys(lb, {"gamma", "jump_mode"}, "lindblad.")
    lindblad_params = LindbladParams(
        gamma=_num(lb, "gamma", "lindblad.", nonneg=True),
        jump_mode=_choice(lb.get("jump_mode"), (GLOBAL, LOCAL), "lindblad.jump_mode"),
    )

    pert = tree.get("perturbation") or {}
    kind = _choice(pert.get("kind"), ("weighted", "general"), "perturbation.kind")
    if kind == "weighted":
        _check_keys(pert, _WEIGHTED_KEYS, "perturbation.")
        perturbation = WeightedSpec(zeta=zeta_grid(pert.get("zeta"), "perturbation.zeta"))
    else:
        _check_keys(pert, _GENERAL_KEYS, "perturbation.")
        pert = merge(_GENERAL_DEFAULTS, pert)
        perturbation = GeneralSpec(
            n=_num(pert, "n", "perturbation.", positive=True, integer=True),
            sigma=_num(pert, "sigma", "perturbation.", positive=True),
            base_seed=_num(pert, "base_seed", "perturbation.", nonneg=True, integer=True),
            retries=_num(pert, "retries", "perturbation.", nonneg=True, integer=True),
        )

    integ = tree.get("integration") or {}
    _check_keys(integ, {"dt", "t_end", "stride"}, "integration.")
    integration = IntegrationSpec(
        dt=_num(integ, "dt", "integration.", positive=True),
        t_end=_num(integ, "t_end", "integration.", nonneg=True),
        stride=_num(integ, "stride", "integration.", positive=True, integer=True),
    )

    calibration = _choice(tree.get("calibration"), CALIBRATIONS, "calibration")

    sweep = tree.get("sweep") or {}
    _check_keys(sweep, {"c1", "zeta"}, "sweep.")
    c1_list = sweep.get("c1")
    if not isinstance(c1_list, (list, tuple)) or not c1_list:
        raise ConfigError("sweep.c1", "expected a non-empty list")
    sweep_c1 = []
    for c1 in c1_list:
        c1 = _num({"v": c1}, "v", "sweep.c1")
        try:
            CConfig(c1, cfg_c.c2, cfg_c.c3)
        except InvalidCConfig as exc:
            raise ConfigError("sweep.c1", str(exc)) from exc
        sweep_c1.append(c1)

    batch = tree.get("batch") or {}
    _check_keys(batch, {"bins", "max_failure_fraction"}, "batch.")
    frac = _num(batch, "max_failure_fraction", "batch.", nonneg=True)
    if frac > 1:
        raise ConfigError("batch.max_failure_fraction", "must lie in [0, 1]")

    return ScenarioConfig(
        scenario=scenario,
        c=cfg_c,
        hamiltonian=CompositeHamiltonian(eps_a, eps_b),
        framework=framework,
        seaqt=seaqt_params,
        lindblad=lindblad_params,
        perturbation=perturbation,
        integration=integration,
        calibration=calibration,
        sweep_c1=tuple(sweep_c1),
        sweep_zeta=zeta_grid(sweep.get("zeta")),
        bins=_num(batch, "bins", "batch.", positive=True, integer=True),
        max_failure_fraction=frac,
        tree=copy.deepcopy(tree),
    )


def build_config(scenario=None, path=None, overrides=None):
    """Layer scenario defaults, an optional file and overrides, then validate."""
    from .scenarios import REGISTRY
    file_tree = read_tree(path) if path else {}
    name = (overrides or {}).get("scenario") or file_tree.get("scenario") or scenario
    if name is None:
        raise ConfigError("scenario", "no scenario given")
    if name not in REGISTRY:
        raise ConfigError("scenario", f"unknown scenario {name!r}")
    tree = merge(DEFAULTS, REGISTRY[name].defaults)
    tree["scenario"] = name
    tree = merge(tree, file_tree)
    tree = merge(tree, overrides)
    return validate(tree)
