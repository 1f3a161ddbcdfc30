//! Sequential learners over a task schedule.
//!
//! * [`run_boss`] — the two-level learner: each task draws a candidate
//!   subspace from the exponential-weights distribution, explores the full
//!   space with probability p (feeding threshold losses back into the
//!   distribution) and otherwise exploits the drawn subspace.
//! * [`run_boss_doubling`] — the same learner without knowledge of the task
//!   count, re-deriving its rates per power-of-two phase.
//! * [`run_pege_independent`] — full-dimensional phased exploration on every
//!   task, no transfer.
//! * [`run_pege_oracle`] — subspace exploitation with the true hidden basis
//!   on every task.
//! * [`run_seqrepl`] — SVD-based transfer baseline that explores on the
//!   deterministic triangular-number schedule and estimates the subspace from
//!   the stacked exploration estimates.
//!
//! All runners take a single `u64` seed and derive their reward and internal
//! randomness streams from it (see [`crate::rng`]), so different algorithms
//! face identical observation noise for the same seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::env::{triangular_tasks, BanditEnv, RewardStream, TaskSchedule};
use crate::error::{Error, Result};
use crate::policy::{meta_explore, meta_exploit};
use crate::rng::stream_rng;
use crate::select::{
    ewa_update, losses, sample_expert, CostParams, ExpertSet, ExpertState, DEFAULT_EWA_ETA,
};
use crate::subspace::{random_basis, residual_fnorm, Basis};

/// Hyperparameters of the subspace-selection learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BossParams {
    /// Exploration probability.
    pub p: f64,
    /// Full-dimensional exploration length (multiple of d).
    pub tau1: usize,
    /// Subspace exploration length (multiple of m).
    pub tau2: usize,
    /// Residual threshold separating hit from miss costs.
    pub alpha: f64,
    /// Cover radius for exact expert sets; defaults to alpha.
    pub epsilon: f64,
    /// Failure probability behind the alpha formula.
    pub delta: f64,
    /// Concentration constant inside alpha; exposed because the theory never
    /// pins it numerically.
    pub c2: f64,
}

/// Closed-form default parameters for a problem of N tasks of length tau in
/// dimension d with hidden rank m:
///
/// ```text
/// p    = min((2 m sqrt(tau) / N)^(2/3), 1)
/// tau1 = d * floor(min(d sqrt(tau / p), tau) / d)
/// tau2 = m * floor(sqrt(tau))            (clamped to a multiple of m <= tau)
/// delta = 1 / N^2
/// alpha = epsilon = c2 * d * sqrt(ln(d / delta) / tau1)
/// ```
pub fn theorem1_params(
    n_tasks: usize,
    tau: usize,
    d: usize,
    m: usize,
    c2: f64,
) -> Result<BossParams> {
    let mut violations = Vec::new();
    if n_tasks == 0 {
        violations.push("n_tasks must be at least 1".into());
    }
    if m < 1 || m >= d {
        violations.push(format!("need 1 <= m < d, got m = {m}, d = {d}"));
    }
    if tau < d {
        violations.push(format!("need tau >= d, got tau = {tau}, d = {d}"));
    }
    if !(c2 > 0.0 && c2.is_finite()) {
        violations.push(format!("c2 must be positive and finite, got {c2}"));
    }
    if !violations.is_empty() {
        return Err(Error::InvalidConfig { violations });
    }

    let (n_f, tau_f, d_f, m_f) = (n_tasks as f64, tau as f64, d as f64, m as f64);
    let p = ((2.0 * m_f * tau_f.sqrt()) / n_f).powf(2.0 / 3.0).min(1.0);
    let tau1 = d * (((d_f * (tau_f / p).sqrt()).min(tau_f)) / d_f).floor() as usize;
    let tau2 = (m * (tau_f.sqrt().floor() as usize)).min(m * (tau / m));
    let delta = 1.0 / (n_f * n_f);
    let alpha = c2 * d_f * ((d_f / delta).ln() / tau1 as f64).sqrt();

    Ok(BossParams {
        p,
        tau1,
        tau2,
        alpha,
        epsilon: alpha,
        delta,
        c2,
    })
}

impl BossParams {
    /// Checks the parameter set against concrete problem dimensions.
    pub fn validate(&self, d: usize, m: usize, tau: usize) -> Result<()> {
        let mut violations = Vec::new();
        if !(self.p > 0.0 && self.p <= 1.0) {
            violations.push(format!("p must lie in (0, 1], got {}", self.p));
        }
        if self.tau1 == 0 || self.tau1 % d != 0 || self.tau1 > tau {
            violations.push(format!(
                "tau1 = {} must be a positive multiple of d = {d} no larger than tau = {tau}",
                self.tau1
            ));
        }
        if self.tau2 == 0 || self.tau2 % m != 0 || self.tau2 > tau {
            violations.push(format!(
                "tau2 = {} must be a positive multiple of m = {m} no larger than tau = {tau}",
                self.tau2
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            violations.push(format!("alpha must be positive and finite, got {}", self.alpha));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig { violations })
        }
    }
}

/// Per-task record emitted by every runner.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTrace {
    /// 1-based task index.
    pub task_index: usize,
    /// Whether the task was a full-dimensional exploration task.
    pub z: bool,
    pub per_task_regret: f64,
    pub cumulative_regret: f64,
    /// ‖B̂⊥ᵀBₙ‖_F against the generator's basis for the task.
    pub subspace_error: f64,
    /// ‖θ̂ₙ − θₙ‖₂ for whichever estimate the task produced.
    pub theta_error: f64,
    /// Index of the drawn expert, for learners that carry an expert set.
    pub chosen_expert: Option<usize>,
}

/// Complete outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: String,
    pub seed: u64,
    pub traces: Vec<TaskTrace>,
    pub cumulative_regret: Vec<f64>,
    pub subspace_error: Vec<f64>,
    pub theta_error: Vec<f64>,
    /// Weight of the reference expert after each task, when the expert set
    /// carries one.
    pub oracle_weight: Option<Vec<f64>>,
    /// Digest of the driving config; filled in by the experiment harness.
    pub config_digest: Option<String>,
}

impl RunResult {
    fn from_traces(
        algorithm: &str,
        seed: u64,
        traces: Vec<TaskTrace>,
        oracle_weight: Option<Vec<f64>>,
    ) -> Self {
        let cumulative_regret = traces.iter().map(|t| t.cumulative_regret).collect();
        let subspace_error = traces.iter().map(|t| t.subspace_error).collect();
        let theta_error = traces.iter().map(|t| t.theta_error).collect();
        Self {
            algorithm: algorithm.to_string(),
            seed,
            traces,
            cumulative_regret,
            subspace_error,
            theta_error,
            oracle_weight,
            config_digest: None,
        }
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn final_cumulative_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }

    /// Mean subspace error over the trailing `fraction` of tasks.
    pub fn mean_subspace_error_tail(&self, fraction: f64) -> f64 {
        let n = self.subspace_error.len();
        if n == 0 {
            return f64::NAN;
        }
        let take = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
        let tail = &self.subspace_error[n - take..];
        tail.iter().sum::<f64>() / take as f64
    }
}

fn check_run_inputs(schedule: &TaskSchedule, env: &BanditEnv) -> Result<()> {
    if env.ellipsoid.d() != schedule.d() {
        return Err(Error::DimensionMismatch {
            expected: format!("action set in dimension {}", schedule.d()),
            actual: format!("dimension {}", env.ellipsoid.d()),
        });
    }
    if schedule.is_empty() {
        return Err(Error::config("task schedule is empty"));
    }
    Ok(())
}

fn check_experts(schedule: &TaskSchedule, experts: &ExpertSet) -> Result<()> {
    let b = &experts.experts()[0];
    if b.d() != schedule.d() || b.m() != schedule.m() {
        return Err(Error::DimensionMismatch {
            expected: format!("experts of shape {}x{}", schedule.d(), schedule.m()),
            actual: format!("{}x{}", b.d(), b.m()),
        });
    }
    Ok(())
}

/// The subspace-selection learner with known task count.
pub fn run_boss(
    schedule: &TaskSchedule,
    env: &BanditEnv,
    params: &BossParams,
    experts: &ExpertSet,
    seed: u64,
) -> Result<RunResult> {
    check_run_inputs(schedule, env)?;
    check_experts(schedule, experts)?;
    params.validate(schedule.d(), schedule.m(), env.tau)?;
    let cost = CostParams::for_run(env.tau, params.tau2, schedule.m(), params.alpha, params.p)?;

    let mut stream = RewardStream::new(env.noise_std, stream_rng(seed, "rewards"))?;
    let mut algo_rng = stream_rng(seed, "algo");
    let mut state = ExpertState::uniform(experts.experts().to_vec(), DEFAULT_EWA_ETA)?;

    let n = schedule.len();
    let mut traces = Vec::with_capacity(n);
    let mut oracle_weight = experts.oracle_index().map(|_| Vec::with_capacity(n));
    let mut cumulative = 0.0;

    for idx in 0..n {
        let (expert_idx, b_hat) = sample_expert(&state, &mut algo_rng);
        let z = algo_rng.random_bool(params.p);
        let theta = schedule.theta(idx);

        let (regret, theta_hat) = if z {
            let out = meta_explore(&env.ellipsoid, theta, env.tau, params.tau1, &mut stream)?;
            let ls = losses(state.experts(), &out.theta_hat, &cost)?;
            state = ewa_update(&state, &ls)?;
            (out.pseudo_regret, out.theta_hat)
        } else {
            let out = meta_exploit(&env.ellipsoid, theta, &b_hat, env.tau, params.tau2, &mut stream)?;
            (out.pseudo_regret, out.theta_hat)
        };

        cumulative += regret;
        if let (Some(w), Some(oi)) = (oracle_weight.as_mut(), experts.oracle_index()) {
            w.push(state.weight(oi));
        }
        traces.push(TaskTrace {
            task_index: idx + 1,
            z,
            per_task_regret: regret,
            cumulative_regret: cumulative,
            subspace_error: residual_fnorm(&b_hat, schedule.true_basis(idx))?,
            theta_error: (theta_hat - theta).norm(),
            chosen_expert: Some(expert_idx),
        });
    }
    Ok(RunResult::from_traces("boss", seed, traces, oracle_weight))
}

/// The subspace-selection learner without knowledge of the task count: tasks
/// are processed in phases of length 2^i and the rate parameters p, tau1 and
/// alpha are re-derived at each phase start as if the phase were the whole
/// problem. The expert distribution carries over between phases.
pub fn run_boss_doubling(
    schedule: &TaskSchedule,
    env: &BanditEnv,
    params: &BossParams,
    experts: &ExpertSet,
    seed: u64,
) -> Result<RunResult> {
    check_run_inputs(schedule, env)?;
    check_experts(schedule, experts)?;

    let mut stream = RewardStream::new(env.noise_std, stream_rng(seed, "rewards"))?;
    let mut algo_rng = stream_rng(seed, "algo");
    let mut state = ExpertState::uniform(experts.experts().to_vec(), DEFAULT_EWA_ETA)?;

    let n = schedule.len();
    let mut traces = Vec::with_capacity(n);
    let mut oracle_weight = experts.oracle_index().map(|_| Vec::with_capacity(n));
    let mut cumulative = 0.0;

    let mut phase_start = 1usize; // 1-based task index
    let mut phase_len = 1usize;
    while phase_start <= n {
        let ph = theorem1_params(phase_len, env.tau, schedule.d(), schedule.m(), params.c2)?;
        ph.validate(schedule.d(), schedule.m(), env.tau)?;
        let cost = CostParams::for_run(env.tau, ph.tau2, schedule.m(), ph.alpha, ph.p)?;
        let phase_end = (phase_start + phase_len - 1).min(n);

        for task in phase_start..=phase_end {
            let idx = task - 1;
            let (expert_idx, b_hat) = sample_expert(&state, &mut algo_rng);
            let z = algo_rng.random_bool(ph.p);
            let theta = schedule.theta(idx);

            let (regret, theta_hat) = if z {
                let out = meta_explore(&env.ellipsoid, theta, env.tau, ph.tau1, &mut stream)?;
                let ls = losses(state.experts(), &out.theta_hat, &cost)?;
                state = ewa_update(&state, &ls)?;
                (out.pseudo_regret, out.theta_hat)
            } else {
                let out =
                    meta_exploit(&env.ellipsoid, theta, &b_hat, env.tau, ph.tau2, &mut stream)?;
                (out.pseudo_regret, out.theta_hat)
            };

            cumulative += regret;
            if let (Some(w), Some(oi)) = (oracle_weight.as_mut(), experts.oracle_index()) {
                w.push(state.weight(oi));
            }
            traces.push(TaskTrace {
                task_index: task,
                z,
                per_task_regret: regret,
                cumulative_regret: cumulative,
                subspace_error: residual_fnorm(&b_hat, schedule.true_basis(idx))?,
                theta_error: (theta_hat - theta).norm(),
                chosen_expert: Some(expert_idx),
            });
        }
        phase_start += phase_len;
        phase_len *= 2;
    }
    Ok(RunResult::from_traces(
        "boss_doubling",
        seed,
        traces,
        oracle_weight,
    ))
}

/// Full-dimensional phased exploration on every task; no transfer between
/// tasks. The subspace-error column is reported as the trivial sqrt(m) so the
/// series lines up with the other algorithms for plotting.
pub fn run_pege_independent(
    schedule: &TaskSchedule,
    env: &BanditEnv,
    tau1: usize,
    seed: u64,
) -> Result<RunResult> {
    check_run_inputs(schedule, env)?;
    let mut stream = RewardStream::new(env.noise_std, stream_rng(seed, "rewards"))?;
    let trivial_error = (schedule.m() as f64).sqrt();
    let mut traces = Vec::with_capacity(schedule.len());
    let mut cumulative = 0.0;
    for idx in 0..schedule.len() {
        let theta = schedule.theta(idx);
        let out = meta_explore(&env.ellipsoid, theta, env.tau, tau1, &mut stream)?;
        cumulative += out.pseudo_regret;
        traces.push(TaskTrace {
            task_index: idx + 1,
            z: true,
            per_task_regret: out.pseudo_regret,
            cumulative_regret: cumulative,
            subspace_error: trivial_error,
            theta_error: (out.theta_hat - theta).norm(),
            chosen_expert: None,
        });
    }
    Ok(RunResult::from_traces("pege", seed, traces, None))
}

/// Subspace exploitation with the true hidden basis on every task.
pub fn run_pege_oracle(
    schedule: &TaskSchedule,
    env: &BanditEnv,
    tau2: usize,
    seed: u64,
) -> Result<RunResult> {
    check_run_inputs(schedule, env)?;
    let mut stream = RewardStream::new(env.noise_std, stream_rng(seed, "rewards"))?;
    let b = schedule.hidden_basis().clone();
    let mut traces = Vec::with_capacity(schedule.len());
    let mut cumulative = 0.0;
    for idx in 0..schedule.len() {
        let theta = schedule.theta(idx);
        let out = meta_exploit(&env.ellipsoid, theta, &b, env.tau, tau2, &mut stream)?;
        cumulative += out.pseudo_regret;
        traces.push(TaskTrace {
            task_index: idx + 1,
            z: false,
            per_task_regret: out.pseudo_regret,
            cumulative_regret: cumulative,
            subspace_error: residual_fnorm(&b, schedule.true_basis(idx))?,
            theta_error: (out.theta_hat - theta).norm(),
            chosen_expert: None,
        });
    }
    Ok(RunResult::from_traces("pege_oracle", seed, traces, None))
}

/// SVD-based transfer baseline. Tasks at the triangular numbers i(i+1)/2 are
/// full-dimensional exploration tasks; their estimates are stacked as columns
/// and the top-m left singular directions of the stack form the exploitation
/// basis for every other task. Before the first exploration completes the
/// basis is a random draw.
pub fn run_seqrepl(
    schedule: &TaskSchedule,
    env: &BanditEnv,
    tau1: usize,
    tau2: usize,
    seed: u64,
) -> Result<RunResult> {
    check_run_inputs(schedule, env)?;
    let mut stream = RewardStream::new(env.noise_std, stream_rng(seed, "rewards"))?;
    let mut algo_rng = stream_rng(seed, "algo");

    let d = schedule.d();
    let m = schedule.m();
    let explore_at: std::collections::HashSet<usize> =
        triangular_tasks(schedule.len()).into_iter().collect();

    let mut b_hat = random_basis(d, m, &mut algo_rng)?;
    let mut stacked: Vec<DVector<f64>> = Vec::new();

    let mut traces = Vec::with_capacity(schedule.len());
    let mut cumulative = 0.0;
    for idx in 0..schedule.len() {
        let task = idx + 1;
        let theta = schedule.theta(idx);
        // error of the estimate held going into the task
        let subspace_error = residual_fnorm(&b_hat, schedule.true_basis(idx))?;

        let (z, regret, theta_hat) = if explore_at.contains(&task) {
            let out = meta_explore(&env.ellipsoid, theta, env.tau, tau1, &mut stream)?;
            stacked.push(out.theta_hat.clone());
            b_hat = top_singular_basis(&stacked, d, m)?;
            (true, out.pseudo_regret, out.theta_hat)
        } else {
            let out = meta_exploit(&env.ellipsoid, theta, &b_hat, env.tau, tau2, &mut stream)?;
            (false, out.pseudo_regret, out.theta_hat)
        };

        cumulative += regret;
        traces.push(TaskTrace {
            task_index: task,
            z,
            per_task_regret: regret,
            cumulative_regret: cumulative,
            subspace_error,
            theta_error: (theta_hat - theta).norm(),
            chosen_expert: None,
        });
    }
    Ok(RunResult::from_traces("seqrepl", seed, traces, None))
}

/// Top-m left singular directions of the column stack, completed with the
/// deterministic canonical fill when the stack has fewer than m informative
/// directions.
fn top_singular_basis(columns: &[DVector<f64>], d: usize, m: usize) -> Result<Basis> {
    let k = columns.len();
    let mut mat = DMatrix::zeros(d, k);
    for (j, c) in columns.iter().enumerate() {
        mat.set_column(j, c);
    }
    let svd = mat.svd(true, false);
    let u = svd.u.expect("u requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let keep: Vec<DVector<f64>> = order
        .iter()
        .take(m)
        .filter(|&&i| svd.singular_values[i] > 1e-12)
        .map(|&i| u.column(i).into_owned())
        .collect();
    crate::subspace::complete_to_basis(&keep, d, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{diverse, Ellipsoid, ScheduleParams};
    use crate::rng::stream_rng;
    use crate::select::{build_expert_set, ExpertSetMode};
    use approx::assert_relative_eq;

    #[test]
    fn parameter_formulas_match_direct_evaluation() {
        // direct evaluation of the closed forms, kept independent of the
        // implementation above
        let direct_p = |m: f64, tau: f64, n: f64| ((2.0 * m * tau.sqrt()) / n).powf(2.0 / 3.0);

        let params = theorem1_params(4000, 500, 10, 3, 1.0).unwrap();
        assert_relative_eq!(params.p, direct_p(3.0, 500.0, 4000.0), epsilon = 1e-6);
        assert_relative_eq!(params.p, 0.103997, epsilon = 1e-5);
        assert_eq!(params.tau2, 66);
        // d sqrt(tau/p) exceeds tau here, so tau1 clamps to tau
        assert_eq!(params.tau1, 500);
        assert_relative_eq!(params.delta, 1.0 / 16_000_000.0, epsilon = 1e-18);

        let params = theorem1_params(1000, 500, 10, 3, 1.0).unwrap();
        assert_relative_eq!(params.p, direct_p(3.0, 500.0, 1000.0), epsilon = 1e-6);
        assert_relative_eq!(params.p, 0.262073, epsilon = 1e-5);
        assert_eq!(params.tau1, 430);
        assert_eq!(params.tau2, 66);
        let alpha_direct = 10.0 * ((10.0f64 * 1e6).ln() / 430.0).sqrt();
        assert_relative_eq!(params.alpha, alpha_direct, epsilon = 1e-9);
        assert_relative_eq!(params.epsilon, params.alpha, epsilon = 1e-15);
    }

    #[test]
    fn small_task_counts_clamp_exploration_probability() {
        let params = theorem1_params(10, 500, 10, 3, 1.0).unwrap();
        assert_eq!(params.p, 1.0);
    }

    #[test]
    fn parameter_oracle_rejects_short_tasks() {
        assert!(theorem1_params(100, 5, 10, 3, 1.0).is_err());
    }

    fn small_setup(
        seed: u64,
        n: usize,
    ) -> (TaskSchedule, BanditEnv, ExpertSet) {
        let sp = ScheduleParams {
            d: 6,
            m: 2,
            n_tasks: n,
            theta_min: 0.8,
            theta_max: 1.0,
        };
        let schedule = diverse(&sp, &mut stream_rng(seed, "env")).unwrap();
        let env = BanditEnv::new(Ellipsoid::unit_sphere(6), 0.2, 60).unwrap();
        let experts = build_expert_set(
            &ExpertSetMode::RandomPlusOracle { count: 50 },
            6,
            2,
            &mut stream_rng(seed, "experts"),
            Some(schedule.hidden_basis()),
        )
        .unwrap();
        (schedule, env, experts)
    }

    fn small_params() -> BossParams {
        BossParams {
            p: 0.4,
            tau1: 24,
            tau2: 14,
            alpha: 0.35,
            epsilon: 0.35,
            delta: 1e-4,
            c2: 1.0,
        }
    }

    #[test]
    fn boss_run_is_deterministic_and_internally_consistent() {
        let (schedule, env, experts) = small_setup(11, 80);
        let params = small_params();
        let r1 = run_boss(&schedule, &env, &params, &experts, 7).unwrap();
        let r2 = run_boss(&schedule, &env, &params, &experts, 7).unwrap();
        assert_eq!(r1, r2);

        assert_eq!(r1.traces.len(), 80);
        let total: f64 = r1.traces.iter().map(|t| t.per_task_regret).sum();
        assert_relative_eq!(total, r1.final_cumulative_regret(), epsilon = 1e-9);
        for w in r1.cumulative_regret.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn boss_with_p_one_matches_independent_pege_trace_for_trace() {
        let (schedule, env, _) = small_setup(12, 60);
        let experts = build_expert_set(
            &ExpertSetMode::Random { count: 20 },
            6,
            2,
            &mut stream_rng(12, "experts"),
            None,
        )
        .unwrap();
        let params = BossParams {
            p: 1.0,
            ..small_params()
        };
        let boss = run_boss(&schedule, &env, &params, &experts, 99).unwrap();
        let pege = run_pege_independent(&schedule, &env, params.tau1, 99).unwrap();
        for (a, b) in boss.traces.iter().zip(&pege.traces) {
            assert_eq!(a.z, b.z);
            assert_eq!(a.per_task_regret, b.per_task_regret);
            assert_eq!(a.cumulative_regret, b.cumulative_regret);
            assert_eq!(a.theta_error, b.theta_error);
        }
    }

    #[test]
    fn oracle_only_expert_set_without_noise_leaves_exploration_gap_only() {
        let sp = ScheduleParams {
            d: 6,
            m: 2,
            n_tasks: 40,
            theta_min: 0.8,
            theta_max: 1.0,
        };
        let schedule = diverse(&sp, &mut stream_rng(13, "env")).unwrap();
        let env = BanditEnv::new(Ellipsoid::unit_sphere(6), 0.0, 60).unwrap();
        let experts =
            ExpertSet::new(vec![schedule.hidden_basis().clone()], Some(0)).unwrap();
        let params = small_params();
        let result = run_boss(&schedule, &env, &params, &experts, 5).unwrap();
        for t in &result.traces {
            assert!(t.theta_error <= 1e-9, "task {}: {}", t.task_index, t.theta_error);
            assert!(t.subspace_error <= 1e-9);
        }
        // cross-check one exploitation task against the hand-computed gap
        let t = result.traces.iter().find(|t| !t.z).unwrap();
        let idx = t.task_index - 1;
        let theta = schedule.theta(idx);
        let opt = crate::env::optimal_value(&env.ellipsoid, theta);
        let u = params.tau2 / 2;
        let mut gap = 0.0;
        for i in 0..2 {
            let a = schedule.hidden_basis().column(i);
            gap += u as f64 * (opt - a.dot(theta));
        }
        assert_relative_eq!(t.per_task_regret, gap, epsilon = 1e-9);
    }

    #[test]
    fn doubling_single_task_matches_known_n_run() {
        let (schedule, env, experts) = small_setup(14, 1);
        let base = theorem1_params(1, env.tau, 6, 2, 0.2).unwrap();
        let doubled = run_boss_doubling(&schedule, &env, &base, &experts, 3).unwrap();
        let known = run_boss(&schedule, &env, &base, &experts, 3).unwrap();
        assert_eq!(doubled.traces[0].per_task_regret, known.traces[0].per_task_regret);
        assert_eq!(doubled.traces[0].z, known.traces[0].z);
    }

    #[test]
    fn exploration_fraction_concentrates_around_p() {
        let (schedule, env, experts) = small_setup(15, 400);
        let params = small_params();
        let result = run_boss(&schedule, &env, &params, &experts, 21).unwrap();
        let explored = result.traces.iter().filter(|t| t.z).count() as f64;
        let n = result.traces.len() as f64;
        let tol = 4.0 * (params.p * (1.0 - params.p) / n).sqrt();
        assert!(
            (explored / n - params.p).abs() <= tol,
            "fraction {} vs p {}",
            explored / n,
            params.p
        );
    }

    #[test]
    fn seqrepl_explores_on_triangular_tasks() {
        let (schedule, env, _) = small_setup(16, 30);
        let result = run_seqrepl(&schedule, &env, 24, 14, 9).unwrap();
        let explored: Vec<usize> = result
            .traces
            .iter()
            .filter(|t| t.z)
            .map(|t| t.task_index)
            .collect();
        assert_eq!(explored, vec![1, 3, 6, 10, 15, 21, 28]);
    }

    #[test]
    fn pege_oracle_subspace_error_is_zero_on_diverse_schedules() {
        let (schedule, env, _) = small_setup(17, 25);
        let result = run_pege_oracle(&schedule, &env, 14, 4).unwrap();
        for t in &result.traces {
            assert!(t.subspace_error <= 1e-9);
            assert!(!t.z);
        }
    }
}
