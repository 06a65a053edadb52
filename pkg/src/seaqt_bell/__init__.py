"""Entanglement and non-locality decay of perturbed two-qubit Bell-diagonal
states under steepest-entropy-ascent (SEAQT) and Lindblad dynamics."""

from . import integrate, lindblad, measures, perturbation, qmat, seaqt, states
from .integrate import EvolutionTrace, StepRejected, crossing_time
from .lindblad import LindbladParams, integrate_lindblad
from .measures import MeasureSet, ZeroVarianceError, chsh_max, concurrence, entropy, pearson
from .perturbation import generate_batch, weighted_average
from .seaqt import SeaqtParams
from .states import BASELINE_C, CConfig, CompositeHamiltonian, bell_diagonal

__version__ = "0.1.0"

__all__ = [
    "BASELINE_C", "CConfig", "CompositeHamiltonian", "EvolutionTrace", "LindbladParams",
    "MeasureSet", "SeaqtParams", "StepRejected", "ZeroVarianceError", "bell_diagonal",
    "chsh_max", "concurrence", "crossing_time", "entropy", "generate_batch",
    "integrate", "integrate_lindblad", "lindblad", "measures", "pearson", "perturbation",
    "qmat", "seaqt", "states", "weighted_average",
]
