//! Final-pose metrics, fixture objects, seeded benchmarks and the K/T sweep.

mod benchmark;
mod fixtures;
mod metrics;

pub use benchmark::{
    benchmark_env, comparison_table, idle_controller, parallel_map, random_controller, run_benchmark, sweep_kt, task_seeds, BenchmarkConfig,
    BenchmarkReport, Controller, EpisodeResult, Idle, ObjectReport, RandomPushes, RmppiController, ScoreGrid, SourceController,
};
pub use fixtures::{arc_goal, fixture, mu_from_friction_force, named_goals, prototype, random_objects, sample_task, test_objects, Fixture, TaskSpec};
pub use metrics::{score, success, FinalError, ThresholdTier, SCORE_SIGMA};
