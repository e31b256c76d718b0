"""Derivative-free comirror solver for max-of-smooth constrained problems.

Minimizes max-of-smooth objectives under a single max-of-smooth inequality
constraint over a compact box, using only function values: poised linear
interpolation supplies approximate subgradients, and iterates move by
Bregman mirror steps (Euclidean or entropic) with a 1/sqrt(k) step rule.
"""

from .bregman import (
    BregmanGeometry,
    DiameterReport,
    DomainError,
    bregman_distance,
    diameters,
    mirror_step,
)
from .core import (
    BoxSet,
    MaxRepresentation,
    OracleCounter,
    OracleError,
    ProblemConstants,
    ProblemSpec,
    SmoothPiece,
    affine_piece,
    box_diameter,
    evaluate,
    poly_piece,
    problem_from_dict,
    problem_from_json,
    project_box,
    register_piece_oracle,
)
from .interp import (
    ApproxSubgradient,
    LinearModel,
    SingularSystemError,
    approx_subgradient,
    fit_linear_model,
    select_E,
)
from .problems import (
    NamedProblem,
    load_problem,
    sim12_stand_in,
    tp2_optimum,
    tp3_optimum,
)
from .sampling import (
    PoisedSample,
    PoisednessError,
    SamplingStrategy,
    build_poised_sample,
    inv_norm_of,
)
from .solver import (
    BoundReport,
    DeltaSchedule,
    IterationRecord,
    RunResult,
    SolverConfig,
    build_geometry,
    compute_bound_report,
    harmonic_window_bounds,
    harmonic_window_sweep,
    history_csv,
    run,
    step_size,
    summary_payload,
)

__version__ = "0.1.0"
