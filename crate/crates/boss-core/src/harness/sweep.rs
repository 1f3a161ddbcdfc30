//! Hyperparameter grid sweeps.
//!
//! A grid file lists candidate values per tunable knob; the sweep runs every
//! point of the Cartesian product at reduced repetitions (first seed only),
//! applying each knob to the algorithms it applies to, and emits a summary
//! ranked by mean final cumulative regret. Invalid points are kept in the
//! output with the reason they were skipped.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::runner::{run_experiment, write_atomic};
use crate::harness::stats::mean_std;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub c2: Option<Vec<f64>>,
    pub tau1: Option<Vec<usize>>,
    pub tau2: Option<Vec<usize>>,
    pub alpha: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    grid: SweepGrid,
}

impl SweepGrid {
    pub fn from_toml_str(raw: &str) -> Result<Self> {
        let file: SweepFile =
            toml::from_str(raw).map_err(|e| Error::ConfigParse(e.to_string()))?;
        Ok(file.grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        Self::from_toml_str(&raw)
    }

    fn points(&self) -> Vec<GridPoint> {
        fn axis<T: Copy>(v: &Option<Vec<T>>) -> Vec<Option<T>> {
            match v {
                Some(vals) if !vals.is_empty() => vals.iter().copied().map(Some).collect(),
                _ => vec![None],
            }
        }
        let mut out = Vec::new();
        for &c2 in &axis(&self.c2) {
            for &tau1 in &axis(&self.tau1) {
                for &tau2 in &axis(&self.tau2) {
                    for &alpha in &axis(&self.alpha) {
                        for &p in &axis(&self.p) {
                            out.push(GridPoint {
                                c2,
                                tau1,
                                tau2,
                                alpha,
                                p,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub c2: Option<f64>,
    pub tau1: Option<usize>,
    pub tau2: Option<usize>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
}

fn opt_str<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One (grid point, algorithm) result.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: GridPoint,
    pub algorithm: String,
    pub mean_final_regret: f64,
    pub status: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub out_dir: PathBuf,
    pub rows: Vec<SweepRow>,
}

/// Whether a knob applies to an algorithm. The doubling variant re-derives
/// its rates per phase, so only the concentration constant reaches it.
fn applies(id: &str, knob: &str) -> bool {
    match id {
        "boss" | "boss_no_oracle" => true,
        "boss_doubling" => knob == "c2",
        "pege" => knob == "tau1",
        "pege_oracle" => knob == "tau2",
        "seqrepl" => knob == "tau1" || knob == "tau2",
        _ => false,
    }
}

fn apply_point(cfg: &ExperimentConfig, point: &GridPoint) -> ExperimentConfig {
    let mut cfg = cfg.clone();
    for algo in &mut cfg.algorithms {
        if let Some(c2) = point.c2 {
            if applies(&algo.id, "c2") {
                algo.c2 = Some(c2);
            }
        }
        if let Some(tau1) = point.tau1 {
            if applies(&algo.id, "tau1") {
                algo.tau1 = Some(tau1);
            }
        }
        if let Some(tau2) = point.tau2 {
            if applies(&algo.id, "tau2") {
                algo.tau2 = Some(tau2);
            }
        }
        if let Some(alpha) = point.alpha {
            if applies(&algo.id, "alpha") {
                algo.alpha = Some(alpha);
            }
        }
        if let Some(p) = point.p {
            if applies(&algo.id, "p") {
                algo.p = Some(p);
            }
        }
    }
    cfg
}

const SWEEP_HEADER: [&str; 9] = [
    "rank",
    "c2",
    "tau1",
    "tau2",
    "alpha",
    "p",
    "algorithm",
    "mean_final_cumulative_regret",
    "status",
];

fn sweep_csv_bytes(rows: &[SweepRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = SWEEP_HEADER.to_vec();
    header.push("reason");
    w.write_record(&header).expect("in-memory write");
    for (rank, r) in rows.iter().enumerate() {
        w.write_record(&[
            (rank + 1).to_string(),
            opt_str(r.point.c2),
            opt_str(r.point.tau1),
            opt_str(r.point.tau2),
            opt_str(r.point.alpha),
            opt_str(r.point.p),
            r.algorithm.clone(),
            format!("{}", r.mean_final_regret),
            r.status.clone(),
            r.reason.clone(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Runs the sweep. Each grid point executes in its own subdirectory of the
/// config's output directory, on the first seed only.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    grid: &SweepGrid,
    out_root: Option<&Path>,
) -> Result<SweepOutcome> {
    cfg.validate()?;
    let points = grid.points();

    let mut reduced = cfg.clone();
    reduced.run.seeds = vec![*cfg.run.seeds.first().ok_or_else(|| {
        Error::config("run.seeds must not be empty")
    })?];
    reduced.run.repetitions = 1;

    let base_out = match out_root {
        Some(root) if cfg.run.output_dir.is_relative() => root.join(&cfg.run.output_dir),
        _ => cfg.run.output_dir.clone(),
    };
    std::fs::create_dir_all(&base_out)?;

    let mut rows: Vec<SweepRow> = Vec::new();
    for (k, point) in points.iter().enumerate() {
        let mut point_cfg = apply_point(&reduced, point);
        point_cfg.run.output_dir = base_out.join(format!("point_{k:03}"));

        if let Err(e) = point_cfg.validate() {
            for algo in &cfg.algorithms {
                rows.push(SweepRow {
                    point: *point,
                    algorithm: algo.id.clone(),
                    mean_final_regret: f64::NAN,
                    status: "skipped".into(),
                    reason: e.to_string().replace('\n', " "),
                });
            }
            continue;
        }

        // the per-point config text is synthesized, so digest its debug form
        let raw = format!("{point_cfg:?}");
        let report = run_experiment(&point_cfg, raw.as_bytes(), None)?;
        for algo in &point_cfg.algorithms {
            let finals: Vec<f64> = report
                .summaries
                .iter()
                .filter(|s| s.algorithm == algo.id && s.error.is_none())
                .map(|s| s.final_cumulative_regret)
                .collect();
            if finals.is_empty() {
                let reason = report
                    .summaries
                    .iter()
                    .find(|s| s.algorithm == algo.id)
                    .and_then(|s| s.error.clone())
                    .unwrap_or_else(|| "no completed runs".into());
                rows.push(SweepRow {
                    point: *point,
                    algorithm: algo.id.clone(),
                    mean_final_regret: f64::NAN,
                    status: "failed".into(),
                    reason: reason.replace('\n', " "),
                });
            } else {
                let (mean, _) = mean_std(&finals);
                rows.push(SweepRow {
                    point: *point,
                    algorithm: algo.id.clone(),
                    mean_final_regret: mean,
                    status: "ok".into(),
                    reason: String::new(),
                });
            }
        }
    }

    rows.sort_by(|a, b| {
        let ka = (a.status != "ok") as u8;
        let kb = (b.status != "ok") as u8;
        ka.cmp(&kb).then(
            a.mean_final_regret
                .partial_cmp(&b.mean_final_regret)
                .unwrap_or(std::cmp::Ordering::Equal),
        )
    });

    write_atomic(&base_out.join("sweep_summary.csv"), &sweep_csv_bytes(&rows))?;
    Ok(SweepOutcome {
        out_dir: base_out,
        rows,
    })
}
