//! Experiment configuration: TOML schema, strict parsing, validation.
//!
//! Unknown keys are rejected everywhere; a silently ignored typo in a
//! hyperparameter name is the classic way to ruin a regret experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algo::{theorem1_params, BossParams};
use crate::env::{Ellipsoid, GeneratorId};
use crate::error::{Error, Result};

pub const KNOWN_ALGORITHMS: &[&str] = &[
    "boss",
    "boss_no_oracle",
    "boss_doubling",
    "pege",
    "pege_oracle",
    "seqrepl",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub experts: ExpertsConfig,
    pub algorithms: Vec<AlgorithmConfig>,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    /// One of "adversarial_reveal", "seqrepl_adversarial", "diverse".
    pub generator: String,
    pub n_tasks: usize,
    pub tau: usize,
    pub d: usize,
    pub m: usize,
    #[serde(default = "default_theta_min")]
    pub theta_min: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    /// 1-based task indices at which a new hidden direction appears; required
    /// by the reveal generators, exactly m entries starting at 1.
    pub reveal_tasks: Option<Vec<usize>>,
    /// Diagonal of the action-set matrix M; identity when omitted.
    pub m_diag: Option<Vec<f64>>,
}

fn default_theta_min() -> f64 {
    0.8
}

fn default_theta_max() -> f64 {
    1.0
}

fn default_noise_std() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpertsConfig {
    /// "random" or "eps_cover".
    #[serde(default = "default_expert_mode")]
    pub mode: String,
    #[serde(default = "default_expert_count")]
    pub count: usize,
    /// Whether the "boss" and "boss_doubling" algorithms get the true hidden
    /// basis appended to their expert set.
    #[serde(default = "default_true")]
    pub include_oracle: bool,
    /// Cover radius for mode = "eps_cover".
    pub epsilon: Option<f64>,
    /// Enumeration cap for mode = "eps_cover".
    pub cover_cap: Option<usize>,
}

fn default_expert_mode() -> String {
    "random".to_string()
}

fn default_expert_count() -> usize {
    10_000
}

fn default_true() -> bool {
    true
}

impl Default for ExpertsConfig {
    fn default() -> Self {
        Self {
            mode: default_expert_mode(),
            count: default_expert_count(),
            include_oracle: true,
            epsilon: None,
            cover_cap: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub id: String,
    /// Optional overrides; anything left out falls back to the closed-form
    /// defaults for the configured problem size.
    pub p: Option<f64>,
    pub tau1: Option<usize>,
    pub tau2: Option<usize>,
    pub alpha: Option<f64>,
    pub c2: Option<f64>,
}

impl AlgorithmConfig {
    pub fn bare(id: &str) -> Self {
        Self {
            id: id.to_string(),
            p: None,
            tau1: None,
            tau2: None,
            alpha: None,
            c2: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Keep every trace_stride-th task row in trace CSVs (the last task is
    /// always kept).
    #[serde(default = "default_stride")]
    pub trace_stride: usize,
    /// Worker-pool width; number of cores when omitted.
    pub threads: Option<usize>,
}

fn default_repetitions() -> usize {
    1
}

fn default_stride() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml_str(raw: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(raw).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let raw = std::fs::read(path)?;
        let text = String::from_utf8_lossy(&raw);
        let cfg = Self::from_toml_str(&text)?;
        Ok((cfg, raw))
    }

    /// Collects every violated constraint instead of stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        let env = &self.environment;

        if GeneratorId::parse(&env.generator).is_err() {
            violations.push(format!("unknown generator id {:?}", env.generator));
        }
        if env.m < 1 || env.m >= env.d {
            violations.push(format!(
                "need 1 <= m < d, got m = {}, d = {}",
                env.m, env.d
            ));
        }
        if env.n_tasks == 0 {
            violations.push("n_tasks must be positive".into());
        }
        if env.tau < env.d {
            violations.push(format!(
                "need tau >= d, got tau = {}, d = {}",
                env.tau, env.d
            ));
        }
        if !(env.theta_min > 0.0 && env.theta_min <= env.theta_max && env.theta_max <= 1.0) {
            violations.push(format!(
                "norm bounds must satisfy 0 < theta_min <= theta_max <= 1, got [{}, {}]",
                env.theta_min, env.theta_max
            ));
        }
        if !(0.0..=1.0).contains(&env.noise_std) {
            violations.push(format!(
                "noise_std must lie in [0, 1], got {}",
                env.noise_std
            ));
        }
        let needs_reveals = matches!(
            env.generator.as_str(),
            "adversarial_reveal" | "seqrepl_adversarial"
        );
        match (&env.reveal_tasks, needs_reveals) {
            (None, true) => {
                violations.push(format!(
                    "generator {:?} requires reveal_tasks",
                    env.generator
                ));
            }
            (Some(reveals), true) => {
                if reveals.len() != env.m {
                    violations.push(format!(
                        "reveal_tasks must list exactly m = {} tasks, got {}",
                        env.m,
                        reveals.len()
                    ));
                }
                if reveals.first() != Some(&1) {
                    violations.push("first reveal task must be 1".into());
                }
                if !reveals.windows(2).all(|w| w[0] < w[1]) {
                    violations.push("reveal_tasks must be strictly increasing".into());
                }
                for &r in reveals {
                    if r < 1 || r > env.n_tasks {
                        violations.push(format!(
                            "reveal task {r} outside [1, {}]",
                            env.n_tasks
                        ));
                    }
                }
            }
            _ => {}
        }
        if let Some(diag) = &env.m_diag {
            if diag.len() != env.d {
                violations.push(format!(
                    "m_diag must have d = {} entries, got {}",
                    env.d,
                    diag.len()
                ));
            }
            if diag.iter().any(|v| *v <= 0.0) {
                violations.push("m_diag entries must be positive".into());
            }
        }

        match self.experts.mode.as_str() {
            "random" => {
                if self.experts.count == 0 {
                    violations.push("experts.count must be at least 1".into());
                }
            }
            "eps_cover" => {
                if self.experts.epsilon.is_none() {
                    violations.push("experts.mode = \"eps_cover\" requires experts.epsilon".into());
                }
            }
            other => violations.push(format!(
                "unknown experts.mode {other:?}; expected \"random\" or \"eps_cover\""
            )),
        }

        if self.algorithms.is_empty() {
            violations.push("at least one algorithm must be configured".into());
        }
        for a in &self.algorithms {
            if !KNOWN_ALGORITHMS.contains(&a.id.as_str()) {
                violations.push(format!(
                    "unknown algorithm id {:?}; expected one of {KNOWN_ALGORITHMS:?}",
                    a.id
                ));
                continue;
            }
            if let Some(tau1) = a.tau1 {
                if tau1 == 0 || tau1 % env.d != 0 || tau1 > env.tau {
                    violations.push(format!(
                        "{}: tau1 = {tau1} must be a positive multiple of d = {} no larger than tau = {}",
                        a.id, env.d, env.tau
                    ));
                }
            }
            if let Some(tau2) = a.tau2 {
                if tau2 == 0 || tau2 % env.m != 0 || tau2 > env.tau {
                    violations.push(format!(
                        "{}: tau2 = {tau2} must be a positive multiple of m = {} no larger than tau = {}",
                        a.id, env.m, env.tau
                    ));
                }
            }
            if let Some(p) = a.p {
                if !(p > 0.0 && p <= 1.0) {
                    violations.push(format!("{}: p = {p} must lie in (0, 1]", a.id));
                }
            }
            if let Some(alpha) = a.alpha {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    violations.push(format!("{}: alpha = {alpha} must be positive", a.id));
                }
            }
            if let Some(c2) = a.c2 {
                if !(c2 > 0.0 && c2.is_finite()) {
                    violations.push(format!("{}: c2 = {c2} must be positive", a.id));
                }
            }
        }

        if self.run.seeds.is_empty() {
            violations.push("run.seeds must not be empty".into());
        }
        if self.run.repetitions == 0 {
            violations.push("run.repetitions must be at least 1".into());
        }
        if self.run.trace_stride == 0 {
            violations.push("run.trace_stride must be at least 1".into());
        }
        if self.run.threads == Some(0) {
            violations.push("run.threads must be at least 1 when given".into());
        }

        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig { violations })
        }
    }

    pub fn ellipsoid(&self) -> Result<Ellipsoid> {
        match &self.environment.m_diag {
            Some(diag) => Ellipsoid::from_diag(diag),
            None => Ok(Ellipsoid::unit_sphere(self.environment.d)),
        }
    }

    /// Resolved parameter set for one configured algorithm: closed-form
    /// defaults with any explicit overrides applied on top.
    pub fn resolve_params(&self, algo: &AlgorithmConfig) -> Result<BossParams> {
        let env = &self.environment;
        let c2 = algo.c2.unwrap_or(1.0);
        let mut params = theorem1_params(env.n_tasks, env.tau, env.d, env.m, c2)?;
        if let Some(p) = algo.p {
            params.p = p;
        }
        if let Some(tau1) = algo.tau1 {
            params.tau1 = tau1;
        }
        if let Some(tau2) = algo.tau2 {
            params.tau2 = tau2;
        }
        if let Some(alpha) = algo.alpha {
            params.alpha = alpha;
            params.epsilon = alpha;
        }
        params.validate(env.d, env.m, env.tau)?;
        Ok(params)
    }
}

/// Hex SHA-256 digest of the raw config bytes; it changes exactly when the
/// config content changes.
pub fn config_digest(raw: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(raw);
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [environment]
        generator = "diverse"
        n_tasks = 20
        tau = 40
        d = 6
        m = 2
        noise_std = 0.1

        [experts]
        count = 16

        [[algorithms]]
        id = "pege"
        tau1 = 12

        [run]
        seeds = [1, 2]
        output_dir = "out"
    "#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.environment.d, 6);
        assert_eq!(cfg.experts.count, 16);
        assert!(cfg.experts.include_oracle);
        assert_eq!(cfg.run.repetitions, 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("noise_std = 0.1", "noise_stdd = 0.1");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(matches!(err, Error::ConfigParse(_)), "{err}");
    }

    #[test]
    fn validation_collects_all_violations() {
        let bad = r#"
            [environment]
            generator = "adversarial_reveal"
            n_tasks = 0
            tau = 3
            d = 6
            m = 7
            noise_std = 2.0

            [run]
            seeds = []
            output_dir = "out"
        "#;
        // inject an empty algorithm list by omitting [[algorithms]]
        let err = ExperimentConfig::from_toml_str(bad).unwrap_err();
        match err {
            Error::ConfigParse(_) => {} // algorithms is a required field
            other => panic!("unexpected error {other}"),
        }

        let bad2 = MINIMAL.replace("m = 2", "m = 7").replace("tau1 = 12", "tau1 = 13");
        let err = ExperimentConfig::from_toml_str(&bad2).unwrap_err();
        match err {
            Error::InvalidConfig { violations } => {
                assert!(violations.len() >= 2, "{violations:?}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn reveal_generator_requires_reveal_tasks() {
        let bad = MINIMAL.replace("\"diverse\"", "\"adversarial_reveal\"");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn digest_changes_iff_content_changes() {
        let a = config_digest(MINIMAL.as_bytes());
        let b = config_digest(MINIMAL.as_bytes());
        assert_eq!(a, b);
        let c = config_digest(MINIMAL.replace("tau = 40", "tau = 42").as_bytes());
        assert_ne!(a, c);
    }

    #[test]
    fn resolve_params_merges_overrides_over_defaults() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let mut a = AlgorithmConfig::bare("boss");
        a.tau2 = Some(10);
        a.alpha = Some(0.4);
        let params = cfg.resolve_params(&a).unwrap();
        assert_eq!(params.tau2, 10);
        assert_eq!(params.alpha, 0.4);
        assert_eq!(params.epsilon, 0.4);
        // defaults still fill the rest
        let defaults = theorem1_params(20, 40, 6, 2, 1.0).unwrap();
        assert_eq!(params.p, defaults.p);
        assert_eq!(params.tau1, defaults.tau1);
    }
}
