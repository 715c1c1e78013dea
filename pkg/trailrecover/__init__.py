"""
trailrecover

Recovers the visiting order of locations in trails recorded at low
temporal resolution.

This package provides:
- Trail ingestion, gap partitioning and BEGIN/END augmentation
- Markov transition networks estimated from unbroken trail segments
- Exact, ant colony system, greedy and random order recovery
- Benchmark degradation, evaluation metrics and synthetic data
- Location ranking by inverted betweenness

Example usage:
    from trailrecover import GapPolicy, AcsSolver, extract, preprocess_trails, recover_trails

    trails = preprocess_trails(raw_trails, GapPolicy(28))
    net = extract(trails)
    repaired, results = recover_trails(trails, net, AcsSolver(), seed=42)

Or run directly:
    python -m trailrecover pipeline --out results/
"""

__version__ = "0.1.0"

from .errors import (
    TrailRecoverError,
    InvalidInputError,
    IngestError,
    InvalidTrailError,
    EmptyInputError,
    UnknownLocationError,
    ConfigError,
    KeyMismatchError,
    BudgetExceeded,
    PhaseError,
)

from .trail_model import (
    SENTINEL_BEGIN,
    SENTINEL_END,
    TimeUnit,
    TrailRecord,
    Trail,
    LocationIndex,
    BrokenPoint,
    BrokenRun,
    RunSequence,
    detect_broken_points,
    run_sequences,
)

from .preprocess import (
    GapPolicy,
    partition_at_gaps,
    add_sentinels,
    preprocess_trails,
    reassemble,
)

from .transition import (
    SmoothingMode,
    SmoothingPolicy,
    TransitionNetwork,
    extract,
    neg_log_distance,
    score_sequence,
)

from .solvers import (
    Solver,
    SolverInstance,
    RecoveryResult,
    SolverRegistry,
    AcsParams,
    ExactSolver,
    AcsSolver,
    GreedySolver,
    RandomSolver,
    solve_exact,
    solve_acs,
    solve_greedy,
    solve_random,
    recover_trail,
    recover_trails,
)

from .degrade import (
    DegradeSpec,
    DegradeStrategy,
    collapse_resolution,
    mutate_order,
    degrade_trails,
)

from .metrics import EvalReport, hamming, evaluate, format_report

from .analysis import (
    LocationNetwork,
    RankReport,
    build_network,
    inverted_betweenness,
    spearman,
    rank_locations,
    case_study,
)

from .synth import GeneratorSpec, SyntheticDataset, generate

from .config import PipelineConfig

from .pipeline import run_pipeline

__all__ = [
    # Errors
    "TrailRecoverError",
    "InvalidInputError",
    "IngestError",
    "InvalidTrailError",
    "EmptyInputError",
    "UnknownLocationError",
    "ConfigError",
    "KeyMismatchError",
    "BudgetExceeded",
    "PhaseError",
    # Trails
    "SENTINEL_BEGIN",
    "SENTINEL_END",
    "TimeUnit",
    "TrailRecord",
    "Trail",
    "LocationIndex",
    "BrokenPoint",
    "BrokenRun",
    "RunSequence",
    "detect_broken_points",
    "run_sequences",
    # Phase 1
    "GapPolicy",
    "partition_at_gaps",
    "add_sentinels",
    "preprocess_trails",
    "reassemble",
    # Phase 2
    "SmoothingMode",
    "SmoothingPolicy",
    "TransitionNetwork",
    "extract",
    "neg_log_distance",
    "score_sequence",
    # Phase 3
    "Solver",
    "SolverInstance",
    "RecoveryResult",
    "SolverRegistry",
    "AcsParams",
    "ExactSolver",
    "AcsSolver",
    "GreedySolver",
    "RandomSolver",
    "solve_exact",
    "solve_acs",
    "solve_greedy",
    "solve_random",
    "recover_trail",
    "recover_trails",
    # Benchmarks
    "DegradeSpec",
    "DegradeStrategy",
    "collapse_resolution",
    "mutate_order",
    "degrade_trails",
    "EvalReport",
    "hamming",
    "evaluate",
    "format_report",
    "GeneratorSpec",
    "SyntheticDataset",
    "generate",
    # Case study
    "LocationNetwork",
    "RankReport",
    "build_network",
    "inverted_betweenness",
    "spearman",
    "rank_locations",
    "case_study",
    # Pipeline
    "PipelineConfig",
    "run_pipeline",
]
