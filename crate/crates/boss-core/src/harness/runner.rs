//! Experiment execution: jobs, worker pool, CSV and manifest output.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::algo::{
    run_boss, run_boss_doubling, run_pege_independent, run_pege_oracle, run_seqrepl, RunResult,
};
use crate::env::{
    adversarial_reveal, diverse, seqrepl_adversarial, triangular_tasks, BanditEnv, GeneratorId,
    ScheduleParams, TaskSchedule,
};
use crate::error::{Error, Result};
use crate::harness::config::{config_digest, AlgorithmConfig, ExperimentConfig};
use crate::rng::{stream_rng, stream_seed};
use crate::select::{build_expert_set, ExpertSet, ExpertSetMode};
use crate::subspace::DEFAULT_COVER_CAP;

/// Column set of every trace CSV.
pub const TRACE_HEADER: [&str; 8] = [
    "task_index",
    "algorithm",
    "Z",
    "per_task_regret",
    "cumulative_regret",
    "subspace_error",
    "theta_error",
    "chosen_expert_index",
];

/// Column set of the summary CSV.
pub const SUMMARY_HEADER: [&str; 5] = [
    "algorithm",
    "seed",
    "final_cumulative_regret",
    "mean_subspace_error_last10",
    "wall_clock_seconds",
];

/// One row of the summary CSV; failed runs carry NaN metrics and an error.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub seed: u64,
    pub final_cumulative_regret: f64,
    pub mean_subspace_error_last10: f64,
    pub wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest {
    config_digest: String,
    code_version: String,
    runs: Vec<ManifestRun>,
}

#[derive(Debug, Clone, Serialize)]
struct ManifestRun {
    algorithm: String,
    seed: u64,
    trace_file: Option<String>,
    status: String,
}

/// Everything `run_experiment` produced, with the completed runs kept in
/// memory for callers that want to inspect them directly.
#[derive(Debug)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub config_digest: String,
    pub summaries: Vec<RunSummary>,
    pub results: Vec<Option<RunResult>>,
}

/// Builds the task schedule for one run seed.
pub fn build_schedule(cfg: &ExperimentConfig, run_seed: u64) -> Result<TaskSchedule> {
    let env = &cfg.environment;
    let sp = ScheduleParams {
        d: env.d,
        m: env.m,
        n_tasks: env.n_tasks,
        theta_min: env.theta_min,
        theta_max: env.theta_max,
    };
    let mut rng = stream_rng(run_seed, "env");
    match GeneratorId::parse(&env.generator)? {
        GeneratorId::AdversarialReveal => {
            let reveals = env.reveal_tasks.as_deref().unwrap_or_default();
            adversarial_reveal(&sp, reveals, &mut rng)
        }
        GeneratorId::SeqreplAdversarial => {
            let reveals = env.reveal_tasks.as_deref().unwrap_or_default();
            let pinned = triangular_tasks(env.n_tasks);
            seqrepl_adversarial(&sp, reveals, &pinned, &mut rng)
        }
        GeneratorId::Diverse => diverse(&sp, &mut rng),
    }
}

/// Builds the base expert set for one run seed; independent of the algorithm
/// so the oracle-augmented and plain variants share the same random experts.
pub fn build_base_experts(cfg: &ExperimentConfig, run_seed: u64) -> Result<ExpertSet> {
    let env = &cfg.environment;
    let mode = match cfg.experts.mode.as_str() {
        "random" => ExpertSetMode::Random {
            count: cfg.experts.count,
        },
        "eps_cover" => ExpertSetMode::EpsCover {
            epsilon: cfg.experts.epsilon.unwrap_or(0.5),
            cap: cfg.experts.cover_cap.unwrap_or(DEFAULT_COVER_CAP),
        },
        other => return Err(Error::config(format!("unknown experts.mode {other:?}"))),
    };
    let mut rng = stream_rng(run_seed, "experts");
    build_expert_set(&mode, env.d, env.m, &mut rng, None)
}

fn with_oracle(base: &ExpertSet, schedule: &TaskSchedule) -> Result<ExpertSet> {
    let mut experts = base.experts().to_vec();
    experts.push(schedule.hidden_basis().clone());
    let idx = experts.len() - 1;
    ExpertSet::new(experts, Some(idx))
}

/// Runs one configured algorithm against prebuilt resources.
pub fn dispatch(
    cfg: &ExperimentConfig,
    algo: &AlgorithmConfig,
    schedule: &TaskSchedule,
    base_experts: Option<&ExpertSet>,
    run_seed: u64,
) -> Result<RunResult> {
    let env = BanditEnv::new(
        cfg.ellipsoid()?,
        cfg.environment.noise_std,
        cfg.environment.tau,
    )?;
    let params = cfg.resolve_params(algo)?;
    let experts_for = |oracle: bool| -> Result<ExpertSet> {
        let base = base_experts
            .ok_or_else(|| Error::config("expert set required but not built"))?;
        if oracle {
            with_oracle(base, schedule)
        } else {
            ExpertSet::new(base.experts().to_vec(), None)
        }
    };
    let mut result = match algo.id.as_str() {
        "boss" => {
            let experts = experts_for(cfg.experts.include_oracle)?;
            run_boss(schedule, &env, &params, &experts, run_seed)?
        }
        "boss_no_oracle" => {
            let experts = experts_for(false)?;
            run_boss(schedule, &env, &params, &experts, run_seed)?
        }
        "boss_doubling" => {
            let experts = experts_for(cfg.experts.include_oracle)?;
            run_boss_doubling(schedule, &env, &params, &experts, run_seed)?
        }
        "pege" => run_pege_independent(schedule, &env, params.tau1, run_seed)?,
        "pege_oracle" => run_pege_oracle(schedule, &env, params.tau2, run_seed)?,
        "seqrepl" => run_seqrepl(schedule, &env, params.tau1, params.tau2, run_seed)?,
        other => return Err(Error::config(format!("unknown algorithm id {other:?}"))),
    };
    result.algorithm = algo.id.clone();
    Ok(result)
}

fn float_field(x: f64) -> String {
    format!("{x}")
}

/// Serializes a run into trace-CSV bytes, keeping every `stride`-th task and
/// always the final one.
pub fn trace_csv_bytes(result: &RunResult, stride: usize) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    let last = result.traces.len();
    for t in &result.traces {
        if (t.task_index - 1) % stride != 0 && t.task_index != last {
            continue;
        }
        w.write_record(&[
            t.task_index.to_string(),
            result.algorithm.clone(),
            if t.z { "1".into() } else { "0".into() },
            float_field(t.per_task_regret),
            float_field(t.cumulative_regret),
            float_field(t.subspace_error),
            float_field(t.theta_error),
            t.chosen_expert.map(|i| i.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn summary_csv_bytes(summaries: &[RunSummary]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("in-memory write");
    for s in summaries {
        w.write_record(&[
            s.algorithm.clone(),
            s.seed.to_string(),
            float_field(s.final_cumulative_regret),
            float_field(s.mean_subspace_error_last10),
            float_field(s.wall_clock_seconds),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Writes through a temp file and renames, so readers never observe a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn resolve_out_dir(cfg: &ExperimentConfig, out_root: Option<&Path>) -> PathBuf {
    match out_root {
        Some(root) if cfg.run.output_dir.is_relative() => root.join(&cfg.run.output_dir),
        _ => cfg.run.output_dir.clone(),
    }
}

struct Job {
    algo: AlgorithmConfig,
    run_seed: u64,
    trace_name: String,
}

/// Executes every (algorithm, seed, repetition) combination of a validated
/// config. One failing run is recorded (NaN metrics in the summary, status in
/// the manifest) without aborting the rest.
///
/// `raw_config` is the exact config text, digested into the manifest.
/// `out_root` overrides the parent of relative output directories.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    raw_config: &[u8],
    out_root: Option<&Path>,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let digest = config_digest(raw_config);
    let out_dir = resolve_out_dir(cfg, out_root);
    std::fs::create_dir_all(&out_dir)?;

    // repetition r > 0 of base seed s runs under a derived seed; r = 0 keeps
    // the base seed itself
    let mut run_seeds: Vec<u64> = Vec::new();
    for &base in &cfg.run.seeds {
        for rep in 0..cfg.run.repetitions {
            let seed = if rep == 0 {
                base
            } else {
                stream_seed(base, &format!("rep/{rep}"))
            };
            run_seeds.push(seed);
        }
    }

    let needs_experts = cfg
        .algorithms
        .iter()
        .any(|a| a.id.starts_with("boss"));

    // per-seed resources are shared across algorithms
    let mut schedules: HashMap<u64, TaskSchedule> = HashMap::new();
    let mut experts: HashMap<u64, ExpertSet> = HashMap::new();
    for &seed in &run_seeds {
        if !schedules.contains_key(&seed) {
            schedules.insert(seed, build_schedule(cfg, seed)?);
            if needs_experts {
                experts.insert(seed, build_base_experts(cfg, seed)?);
            }
        }
    }

    let mut jobs: Vec<Job> = Vec::new();
    let mut name_counts: HashMap<(String, u64), usize> = HashMap::new();
    for algo in &cfg.algorithms {
        for &run_seed in &run_seeds {
            let count = name_counts
                .entry((algo.id.clone(), run_seed))
                .and_modify(|c| *c += 1)
                .or_insert(0);
            let trace_name = if *count == 0 {
                format!("trace_{}_{}.csv", algo.id, run_seed)
            } else {
                format!("trace_{}_{}_{}.csv", algo.id, run_seed, count)
            };
            jobs.push(Job {
                algo: algo.clone(),
                run_seed,
                trace_name,
            });
        }
    }

    let execute = |job: &Job| -> (RunSummary, Option<RunResult>) {
        let started = Instant::now();
        let schedule = &schedules[&job.run_seed];
        let base = experts.get(&job.run_seed);
        let outcome = dispatch(cfg, &job.algo, schedule, base, job.run_seed).and_then(
            |mut result| {
                result.config_digest = Some(digest.clone());
                let bytes = trace_csv_bytes(&result, cfg.run.trace_stride);
                write_atomic(&out_dir.join(&job.trace_name), &bytes)?;
                Ok(result)
            },
        );
        let wall = started.elapsed().as_secs_f64();
        match outcome {
            Ok(result) => (
                RunSummary {
                    algorithm: job.algo.id.clone(),
                    seed: job.run_seed,
                    final_cumulative_regret: result.final_cumulative_regret(),
                    mean_subspace_error_last10: result.mean_subspace_error_tail(0.1),
                    wall_clock_seconds: wall,
                    error: None,
                },
                Some(result),
            ),
            Err(e) => (
                RunSummary {
                    algorithm: job.algo.id.clone(),
                    seed: job.run_seed,
                    final_cumulative_regret: f64::NAN,
                    mean_subspace_error_last10: f64::NAN,
                    wall_clock_seconds: wall,
                    error: Some(e.to_string()),
                },
                None,
            ),
        }
    };

    let outcomes: Vec<(RunSummary, Option<RunResult>)> = match cfg.run.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::config(format!("worker pool: {e}")))?;
            pool.install(|| jobs.par_iter().map(execute).collect())
        }
        None => jobs.par_iter().map(execute).collect(),
    };

    let (summaries, results): (Vec<RunSummary>, Vec<Option<RunResult>>) =
        outcomes.into_iter().unzip();

    write_atomic(&out_dir.join("summary.csv"), &summary_csv_bytes(&summaries))?;

    let manifest = Manifest {
        config_digest: digest.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        runs: jobs
            .iter()
            .zip(&summaries)
            .map(|(job, s)| ManifestRun {
                algorithm: job.algo.id.clone(),
                seed: job.run_seed,
                trace_file: s.error.is_none().then(|| job.trace_name.clone()),
                status: s
                    .error
                    .clone()
                    .unwrap_or_else(|| "ok".to_string()),
            })
            .collect(),
    };
    let manifest_bytes = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| Error::config(format!("manifest serialization: {e}")))?;
    write_atomic(&out_dir.join("manifest.json"), &manifest_bytes)?;

    Ok(ExperimentReport {
        out_dir,
        config_digest: digest,
        summaries,
        results,
    })
}
