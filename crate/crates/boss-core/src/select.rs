//! The online subspace-selection game.
//!
//! A finite set of candidate subspaces ("experts") carries a probability
//! distribution updated by exponential weights. On exploration rounds the
//! learner observes a full-dimensional estimate θ̂ and charges every expert a
//! threshold cost: `c_hit` when the expert's subspace leaves a residual of at
//! most `alpha` on θ̂, `c_miss` otherwise. Costs are importance-weighted by
//! Z/p so that exploration-round feedback is unbiased for all rounds, then
//! shifted and scaled into losses in [0, 1]:
//!
//! ```text
//! loss(B) = Z · (cost(B) − c_hit) / c_miss
//! ```
//!
//! Weights are kept in log space with max-shift normalization so thousands of
//! multiplicative updates cannot underflow.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::subspace::{build_eps_cover, random_basis, residual_norm, Basis, CoverSpec};

/// Exponential-weights learning rate ln 2 (multiplicative factor 1/2 at
/// maximal loss).
pub const DEFAULT_EWA_ETA: f64 = std::f64::consts::LN_2;

/// Expert-count threshold past which per-round loss evaluation fans out
/// across threads.
const PARALLEL_LOSS_THRESHOLD: usize = 4096;

/// Threshold-cost parameters for the selection game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    c_hit: f64,
    c_miss: f64,
    alpha: f64,
    p: f64,
}

impl CostParams {
    /// Requires 0 < c_hit <= c_miss (losses stay in [0, 1]), alpha > 0 and
    /// p in (0, 1].
    pub fn new(c_hit: f64, c_miss: f64, alpha: f64, p: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if !(c_hit > 0.0 && c_hit.is_finite()) {
            violations.push(format!("c_hit must be positive and finite, got {c_hit}"));
        }
        if !(c_miss >= c_hit && c_miss.is_finite()) {
            violations.push(format!(
                "need c_hit <= c_miss for losses in [0, 1], got c_hit = {c_hit}, c_miss = {c_miss}"
            ));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            violations.push(format!("alpha must be positive and finite, got {alpha}"));
        }
        if !(p > 0.0 && p <= 1.0) {
            violations.push(format!("exploration probability p must lie in (0, 1], got {p}"));
        }
        if violations.is_empty() {
            Ok(Self {
                c_hit,
                c_miss,
                alpha,
                p,
            })
        } else {
            Err(Error::InvalidConfig { violations })
        }
    }

    /// Cost parameters for a run: c_hit = τ₂ + τ(m²/τ₂ + α²), c_miss = τ.
    pub fn for_run(tau: usize, tau2: usize, m: usize, alpha: f64, p: f64) -> Result<Self> {
        let tau_f = tau as f64;
        let tau2_f = tau2 as f64;
        let m_f = m as f64;
        let c_hit = tau2_f + tau_f * (m_f * m_f / tau2_f + alpha * alpha);
        Self::new(c_hit, tau_f, alpha, p)
    }

    pub fn c_hit(&self) -> f64 {
        self.c_hit
    }

    pub fn c_miss(&self) -> f64 {
        self.c_miss
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The loss charged to a missing expert on an update round.
    pub fn miss_loss(&self) -> f64 {
        (self.c_miss - self.c_hit) / self.c_miss
    }
}

/// Threshold cost of one expert for an estimate: c_hit when the residual of
/// θ̂ against the expert is at most alpha (inclusive), c_miss otherwise.
pub fn surrogate_cost(expert: &Basis, theta_hat: &DVector<f64>, params: &CostParams) -> Result<f64> {
    let residual = residual_norm(expert, theta_hat)?;
    Ok(if residual <= params.alpha {
        params.c_hit
    } else {
        params.c_miss
    })
}

/// Shifted and scaled importance-weighted loss in [0, 1]; identically zero on
/// non-exploration rounds.
pub fn loss(expert: &Basis, theta_hat: &DVector<f64>, z: bool, params: &CostParams) -> Result<f64> {
    if !z {
        return Ok(0.0);
    }
    let cost = surrogate_cost(expert, theta_hat, params)?;
    Ok((cost - params.c_hit) / params.c_miss)
}

/// Losses for every expert on an exploration round (ordered, parallel for
/// large expert sets).
pub fn losses(experts: &[Basis], theta_hat: &DVector<f64>, params: &CostParams) -> Result<Vec<f64>> {
    if experts.len() >= PARALLEL_LOSS_THRESHOLD {
        experts
            .par_iter()
            .map(|b| loss(b, theta_hat, true, params))
            .collect()
    } else {
        experts
            .iter()
            .map(|b| loss(b, theta_hat, true, params))
            .collect()
    }
}

/// Expert subspaces plus the exponential-weights distribution over them.
#[derive(Debug, Clone)]
pub struct ExpertState {
    experts: Arc<[Basis]>,
    log_weights: Vec<f64>,
    eta: f64,
}

impl ExpertState {
    /// Uniform distribution over a nonempty set of same-shape experts.
    pub fn uniform(experts: Vec<Basis>, eta: f64) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::config("expert set must not be empty"));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::config(format!(
                "learning rate eta must be positive and finite, got {eta}"
            )));
        }
        let (d, m) = (experts[0].d(), experts[0].m());
        for (i, e) in experts.iter().enumerate() {
            if e.d() != d || e.m() != m {
                return Err(Error::DimensionMismatch {
                    expected: format!("every expert of shape {d}x{m}"),
                    actual: format!("expert {i} has shape {}x{}", e.d(), e.m()),
                });
            }
        }
        let n = experts.len();
        Ok(Self {
            experts: experts.into(),
            log_weights: vec![0.0; n],
            eta,
        })
    }

    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn experts(&self) -> &[Basis] {
        &self.experts
    }

    pub fn expert(&self, i: usize) -> &Basis {
        &self.experts[i]
    }

    /// Normalized weights (exact softmax of the stored log weights).
    pub fn weights(&self) -> Vec<f64> {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = self.log_weights.iter().map(|lw| (lw - max).exp()).collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        w
    }

    /// Normalized weight of a single expert.
    pub fn weight(&self, i: usize) -> f64 {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = self.log_weights.iter().map(|lw| (lw - max).exp()).sum();
        (self.log_weights[i] - max).exp() / total
    }
}

/// One multiplicative-weights step: wᵢ ← wᵢ·exp(−η·lossᵢ), renormalized in
/// log space. Zero-loss experts never lose weight relative to any expert with
/// positive loss.
pub fn ewa_update(state: &ExpertState, losses: &[f64]) -> Result<ExpertState> {
    if losses.len() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} losses", state.len()),
            actual: format!("{}", losses.len()),
        });
    }
    for (i, &l) in losses.iter().enumerate() {
        if !((-1e-12..=1.0 + 1e-12).contains(&l)) {
            return Err(Error::config(format!(
                "loss {i} = {l} outside [0, 1]"
            )));
        }
    }
    let eta = state.eta;
    let mut log_weights: Vec<f64> = state
        .log_weights
        .iter()
        .zip(losses)
        .map(|(lw, l)| lw - eta * l)
        .collect();
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    for lw in &mut log_weights {
        *lw -= max;
    }
    Ok(ExpertState {
        experts: Arc::clone(&state.experts),
        log_weights,
        eta,
    })
}

/// Draws an expert index according to the current distribution.
pub fn sample_expert<R: Rng + ?Sized>(state: &ExpertState, rng: &mut R) -> (usize, Basis) {
    let weights = state.weights();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return (i, state.experts[i].clone());
        }
    }
    let last = state.len() - 1;
    (last, state.experts[last].clone())
}

/// How an expert set is built.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpertSetMode {
    /// `count` bases drawn uniformly at random.
    Random { count: usize },
    /// `count` random bases plus a supplied reference basis appended last.
    RandomPlusOracle { count: usize },
    /// Exact cover at radius `epsilon`, feasible only for tiny problems.
    EpsCover { epsilon: f64, cap: usize },
}

/// An expert set, remembering where the reference basis sits (if any) so
/// diagnostics can track its weight.
#[derive(Debug, Clone)]
pub struct ExpertSet {
    experts: Vec<Basis>,
    oracle_index: Option<usize>,
}

impl ExpertSet {
    pub fn new(experts: Vec<Basis>, oracle_index: Option<usize>) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::config("expert set must not be empty"));
        }
        if let Some(i) = oracle_index {
            if i >= experts.len() {
                return Err(Error::config(format!(
                    "oracle index {i} out of range for {} experts",
                    experts.len()
                )));
            }
        }
        Ok(Self {
            experts,
            oracle_index,
        })
    }

    pub fn experts(&self) -> &[Basis] {
        &self.experts
    }

    pub fn oracle_index(&self) -> Option<usize> {
        self.oracle_index
    }

    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }
}

/// Builds an expert set for dimensions (d, m). `oracle` must be supplied for
/// [`ExpertSetMode::RandomPlusOracle`].
pub fn build_expert_set<R: Rng + ?Sized>(
    mode: &ExpertSetMode,
    d: usize,
    m: usize,
    rng: &mut R,
    oracle: Option<&Basis>,
) -> Result<ExpertSet> {
    match mode {
        ExpertSetMode::Random { count } => {
            if *count == 0 {
                return Err(Error::config("expert count must be at least 1"));
            }
            let experts = (0..*count)
                .map(|_| random_basis(d, m, rng))
                .collect::<Result<Vec<_>>>()?;
            ExpertSet::new(experts, None)
        }
        ExpertSetMode::RandomPlusOracle { count } => {
            let oracle = oracle.ok_or_else(|| {
                Error::config("oracle basis required for the random-plus-oracle expert set")
            })?;
            if oracle.d() != d || oracle.m() != m {
                return Err(Error::DimensionMismatch {
                    expected: format!("oracle of shape {d}x{m}"),
                    actual: format!("{}x{}", oracle.d(), oracle.m()),
                });
            }
            let mut experts = (0..*count)
                .map(|_| random_basis(d, m, rng))
                .collect::<Result<Vec<_>>>()?;
            experts.push(oracle.clone());
            let idx = experts.len() - 1;
            ExpertSet::new(experts, Some(idx))
        }
        ExpertSetMode::EpsCover { epsilon, cap } => {
            let spec = CoverSpec::new(d, m, *epsilon)?;
            let experts = build_eps_cover(&spec, *cap)?;
            ExpertSet::new(experts, None)
        }
    }
}
