"""Named experiments, one per published figure, with their default settings."""

from dataclasses import dataclass, field

ZETA_FIGURE_GRID = [1.0, 0.96, 0.92, 0.88, 0.84, 0.8, 0.76, 0.72, 0.68]
C1_RELATIVE = [0.4, 0.8, 0.9, 0.996]
C1_ENTROPY = [0.1, 0.4, 0.8, 0.9, 0.996]


@dataclass(frozen=True)
class Scenario:
    name: str
    figure: str
    kind: str          # evolve | sweep | batch | compare
    description: str
    defaults: dict = field(default_factory=dict)


def _gp(n, **extra):
    return {"kind": "general", "n": n, "sigma": 0.1, "base_seed": 0, **extra}


_ENTRIES = [
    Scenario("fig01_seaqt_sudden_death", "Fig. 1", "evolve",
             "SEAQT evolution of the zeta = 0.68 weighted state (non-locality sudden death)",
             {"framework": "seaqt", "perturbation": {"kind": "weighted", "zeta": [0.68]},
              "integration": {"t_end": 2.0}}),
    Scenario("fig02_seaqt_zeta_evolutions", "Fig. 2", "evolve",
             "SEAQT concurrence and CHSH evolutions for nine zeta values",
             {"framework": "seaqt", "perturbation": {"kind": "weighted", "zeta": ZETA_FIGURE_GRID},
              "integration": {"t_end": 5.0}}),
    Scenario("fig03_seaqt_relative_entropy_sweep", "Fig. 3", "sweep",
             "SEAQT relative entropy between initial and final states versus zeta",
             {"framework": "seaqt", "sweep": {"c1": C1_RELATIVE}}),
    Scenario("fig04_seaqt_final_entropy_sweep", "Fig. 4", "sweep",
             "SEAQT final-state entropy versus zeta",
             {"framework": "seaqt", "sweep": {"c1": C1_ENTROPY}}),
    Scenario("fig05_lindblad_zeta_evolutions", "Fig. 5", "evolve",
             "Lindblad concurrence and CHSH evolutions for nine zeta values",
             {"framework": "lindblad", "perturbation": {"kind": "weighted", "zeta": ZETA_FIGURE_GRID},
              "integration": {"t_end": 5.0}}),
    Scenario("fig06_lindblad_relative_entropy_sweep", "Fig. 6", "sweep",
             "Lindblad relative entropy between initial and final states versus zeta",
             {"framework": "lindblad", "sweep": {"c1": C1_RELATIVE}}),
    Scenario("fig07_lindblad_final_entropy_sweep", "Fig. 7", "sweep",
             "Lindblad final-state entropy versus zeta",
             {"framework": "lindblad", "sweep": {"c1": C1_ENTROPY}}),
    Scenario("fig08_seaqt_batch_histograms", "Fig. 8", "batch",
             "Initial and final concurrence / CHSH histograms, SEAQT, general perturbation",
             {"framework": "seaqt", "perturbation": _gp(300), "integration": {"t_end": 20.0, "stride": 100}}),
    Scenario("fig09_seaqt_general_evolutions", "Fig. 9", "evolve",
             "SEAQT evolutions of five general-perturbation states",
             {"framework": "seaqt", "perturbation": _gp(5), "integration": {"t_end": 5.0}}),
    Scenario("fig10_seaqt_entropy_generation_scatter", "Fig. 10", "batch",
             "Change in concurrence / CHSH versus entropy generation, SEAQT",
             {"framework": "seaqt", "perturbation": _gp(300), "integration": {"t_end": 20.0, "stride": 100}}),
    Scenario("fig11_lindblad_batch_histograms", "Fig. 11", "batch",
             "Initial and final concurrence / CHSH histograms, Lindblad, general perturbation",
             {"framework": "lindblad", "perturbation": _gp(300), "integration": {"t_end": 20.0, "stride": 100}}),
    Scenario("fig12_lindblad_general_evolutions", "Fig. 12", "evolve",
             "Lindblad evolutions of five general-perturbation states",
             {"framework": "lindblad", "perturbation": _gp(5), "integration": {"t_end": 5.0}}),
    Scenario("fig13_lindblad_entropy_generation_scatter", "Fig. 13", "batch",
             "Change in concurrence / CHSH versus entropy generation, Lindblad",
             {"framework": "lindblad", "perturbation": _gp(300), "integration": {"t_end": 20.0, "stride": 100}}),
    Scenario("fig14_compare_gp1", "Fig. 14", "compare",
             "SEAQT and Lindblad side by side for the general-perturbation state closest to rho0",
             {"framework": "both", "perturbation": _gp(5), "integration": {"t_end": 2.0}}),
    Scenario("sudden_death_compare", "Figs. 1, 5", "compare",
             "SEAQT and Lindblad side by side for the zeta = 0.68 weighted state",
             {"framework": "both", "perturbation": {"kind": "weighted", "zeta": [0.68]},
              "integration": {"t_end": 1.0}}),
]

REGISTRY = {s.name: s for s in _ENTRIES}

# the paper-scale batch size; the registry ships the CI size
PAPER_BATCH_N = 1500


def by_kind(kind):
    return [s for s in _ENTRIES if s.kind == kind]
