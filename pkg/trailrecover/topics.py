"""
Event Topics for trailrecover

All pub/sub topics are defined here for easy discovery and documentation.
Topic naming convention: <category>.<action>

Every topic is always published with the same keyword arguments, listed
in its docstring.
"""

# Ingestion
INGEST_LOADED = "ingest.loaded"
"""Published after a trail file is read. Params: path, n_trails, n_records"""

# Phase 1
PREPROCESS_PARTITIONED = "preprocess.partitioned"
"""Published after phase 1 over a trail set. Params: n_input, n_output"""

# Phase 2
TRANSITION_EXTRACTED = "transition.extracted"
"""Published when a transition network is built. Params: n_locations, n_pairs"""

# Phase 3
SOLVER_RUN_SOLVED = "solver.run_solved"
"""Published for every solved broken run. Params: trail_id, run_index, result"""

SOLVER_RUN_FAILED = "solver.run_failed"
"""Published when a run could not be solved. Params: trail_id, run_index, error"""

SOLVER_BUDGET_FALLBACK = "solver.budget_fallback"
"""Published when the exact solver hands a run to its fallback. Params: required, budget, fallback"""

# Benchmark generation and evaluation
DEGRADE_APPLIED = "degrade.applied"
"""Published after degrading a trail set. Params: strategy, n_trails, n_runs"""

SYNTH_GENERATED = "synth.generated"
"""Published after generating synthetic trails. Params: n_trails, n_locations"""

METRICS_EVALUATED = "metrics.evaluated"
"""Published after an evaluation. Params: report"""

ANALYSIS_RANKED = "analysis.ranked"
"""Published after ranking locations. Params: n_nodes, top"""

# Pipeline lifecycle
PIPELINE_PHASE_STARTED = "pipeline.phase_started"
"""Published when a pipeline phase starts. Params: phase"""

PIPELINE_PHASE_FINISHED = "pipeline.phase_finished"
"""Published when a pipeline phase completes. Params: phase, elapsed"""

PIPELINE_FINISHED = "pipeline.finished"
"""Published when the whole pipeline completes. Params: out_dir"""
