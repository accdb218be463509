"""Non-uniform random 2-SAT: the clause-drawing generator, a linear-time
solver, structural witnesses, closed-form thresholds and bounds, and a
Monte Carlo harness for locating the satisfiability transition."""

from .analysis import Regime, ThresholdReport, all_bounds, classify_regime, predict_threshold
from .dist import Distribution, EnsembleSpec, instantiate, parse_dist
from .errors import NusatError
from .formula import Formula, from_dimacs, read_dimacs, to_dimacs
from .generator import GeneratorConfig, sample_formula
from .solver import SolveResult, Status, solve2, solve_brute
from .witness import Bicycle, Snake, build_vig, find_bicycle, full_sign_core, snake_clauses
from .xlab import SweepConfig, estimate_crossing, run_sweep, sharpness_probe

__version__ = "0.1.0"

__all__ = [
    "Bicycle",
    "Distribution",
    "EnsembleSpec",
    "Formula",
    "GeneratorConfig",
    "NusatError",
    "Regime",
    "Snake",
    "SolveResult",
    "Status",
    "SweepConfig",
    "ThresholdReport",
    "all_bounds",
    "build_vig",
    "classify_regime",
    "estimate_crossing",
    "find_bicycle",
    "from_dimacs",
    "full_sign_core",
    "instantiate",
    "parse_dist",
    "predict_threshold",
    "read_dimacs",
    "run_sweep",
    "sample_formula",
    "sharpness_probe",
    "snake_clauses",
    "solve2",
    "solve_brute",
    "to_dimacs",
]
