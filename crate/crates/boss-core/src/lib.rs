//! Sequential multi-task linear bandits with low-rank subspace transfer.
//!
//! A learner faces N linear bandit tasks in ℝ^d one after another, each for τ
//! rounds, with every task parameter lying in a hidden m-dimensional subspace
//! (m < d). This crate provides:
//!
//! * [`subspace`] — geometry for orthonormal bases: principal-angle
//!   distances, complement-free residuals, polar projection, exact covers;
//! * [`env`] — ellipsoid action sets, reward sampling, and the task-sequence
//!   generators (including adversarial reveal schedules with no task
//!   diversity);
//! * [`policy`] — the per-task phased exploration and subspace-exploitation
//!   procedures with closed-form least-squares estimators;
//! * [`select`] — the online subspace-selection game: expert sets, threshold
//!   costs with importance weighting, and the exponential-weights update;
//! * [`algo`] — the full sequential learners (subspace selection, its
//!   doubling variant, independent/oracle baselines, the SVD baseline);
//! * [`harness`] — config-driven experiments, CSV traces, hyperparameter
//!   sweeps, and a self-test suite.

pub mod algo;
pub mod env;
pub mod error;
pub mod harness;
pub mod policy;
pub mod rng;
pub mod select;
pub mod subspace;

pub use algo::{
    run_boss, run_boss_doubling, run_pege_independent, run_pege_oracle, run_seqrepl,
    theorem1_params, BossParams, RunResult, TaskTrace,
};
pub use env::{
    best_action, optimal_value, pull, BanditEnv, Ellipsoid, GeneratorId, RewardStream,
    ScheduleParams, TaskSchedule,
};
pub use error::{Error, Result};
pub use policy::{meta_exploit, meta_explore, ExploitOutcome, ExploreOutcome};
pub use select::{
    build_expert_set, ewa_update, sample_expert, surrogate_cost, CostParams, ExpertSet,
    ExpertSetMode, ExpertState,
};
pub use subspace::{
    build_eps_cover, complement, cover_size_bound, principal_angle_dist, random_basis,
    residual_fnorm, residual_norm, stiefel_project, Basis, CoverSpec,
};
