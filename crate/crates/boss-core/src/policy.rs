//! Per-task base procedures.
//!
//! Both follow the same phased shape: play a fixed block of spanning actions,
//! form the closed-form least-squares estimate of the task parameter, then
//! play the greedy action for the rest of the task.
//!
//! * [`meta_explore`] spans all of ℝ^d with the scaled canonical directions
//!   λ₀e₁..λ₀e_d. The action Gram matrix is (τ₁/d)λ₀²·I, so the estimator
//!   reduces to per-direction reward averages.
//! * [`meta_exploit`] spans only a candidate subspace with λ₀B̂(1)..λ₀B̂(m)
//!   and estimates coordinates within that subspace. It is much cheaper when
//!   the subspace contains the task parameter and arbitrarily bad when it
//!   does not.
//!
//! The true parameter is passed in for reward generation and regret
//! accounting only; action choices depend solely on observed rewards.

use nalgebra::DVector;

use crate::env::{best_action, optimal_value, pull, Ellipsoid, RewardStream};
use crate::error::{Error, Result};
use crate::subspace::Basis;

/// Result of one full-dimensional exploration task.
#[derive(Debug, Clone)]
pub struct ExploreOutcome {
    pub theta_hat: DVector<f64>,
    pub pseudo_regret: f64,
    pub actions_taken: usize,
}

/// Result of one subspace-restricted task.
#[derive(Debug, Clone)]
pub struct ExploitOutcome {
    pub w_hat: DVector<f64>,
    pub theta_hat: DVector<f64>,
    pub pseudo_regret: f64,
}

fn check_phase(label: &str, len: usize, block: usize, tau: usize) -> Result<()> {
    let mut violations = Vec::new();
    if len == 0 || len % block != 0 {
        violations.push(format!(
            "{label} = {len} must be a positive multiple of {block}"
        ));
    }
    if len > tau {
        violations.push(format!("{label} = {len} exceeds task length tau = {tau}"));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig { violations })
    }
}

/// Greedy action for an estimate, falling back to a fixed feasible action
/// when the estimate is exactly zero.
fn greedy_action(ell: &Ellipsoid, theta_hat: &DVector<f64>) -> Result<DVector<f64>> {
    match best_action(ell, theta_hat) {
        Ok(a) => Ok(a),
        Err(Error::UndefinedMaximizer) => {
            let mut a = DVector::zeros(ell.d());
            a[0] = ell.lambda0();
            Ok(a)
        }
        Err(e) => Err(e),
    }
}

/// Full-dimensional phased exploration with exploration length `tau1`
/// (a positive multiple of d, at most `tau`).
pub fn meta_explore(
    ell: &Ellipsoid,
    theta: &DVector<f64>,
    tau: usize,
    tau1: usize,
    stream: &mut RewardStream,
) -> Result<ExploreOutcome> {
    let d = ell.d();
    check_phase("tau1", tau1, d, tau)?;
    if theta.len() != d {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of length {d}"),
            actual: format!("length {}", theta.len()),
        });
    }
    let u = tau1 / d;
    let lambda0 = ell.lambda0();
    let opt = optimal_value(ell, theta);

    let mut collected = 0.0;
    let mut theta_hat = DVector::zeros(d);
    for i in 0..d {
        let mut action = DVector::zeros(d);
        action[i] = lambda0;
        let mut block_sum = 0.0;
        for _ in 0..u {
            block_sum += pull(ell, theta, &action, stream)?;
        }
        theta_hat[i] = block_sum / (u as f64 * lambda0);
        collected += u as f64 * action.dot(theta);
    }

    let greedy = greedy_action(ell, &theta_hat)?;
    for _ in tau1..tau {
        pull(ell, theta, &greedy, stream)?;
    }
    collected += (tau - tau1) as f64 * greedy.dot(theta);

    Ok(ExploreOutcome {
        theta_hat,
        pseudo_regret: (tau as f64 * opt - collected).max(0.0),
        actions_taken: tau,
    })
}

/// Subspace-restricted phased exploration over the columns of `b_hat` with
/// exploration length `tau2` (a positive multiple of m, at most `tau`).
pub fn meta_exploit(
    ell: &Ellipsoid,
    theta: &DVector<f64>,
    b_hat: &Basis,
    tau: usize,
    tau2: usize,
    stream: &mut RewardStream,
) -> Result<ExploitOutcome> {
    let d = ell.d();
    let m = b_hat.m();
    check_phase("tau2", tau2, m, tau)?;
    if b_hat.d() != d || theta.len() != d {
        return Err(Error::DimensionMismatch {
            expected: format!("basis and parameter in dimension {d}"),
            actual: format!("basis {}x{}, parameter {}", b_hat.d(), m, theta.len()),
        });
    }
    let u = tau2 / m;
    let lambda0 = ell.lambda0();
    let opt = optimal_value(ell, theta);

    let mut collected = 0.0;
    let mut w_hat = DVector::zeros(m);
    for i in 0..m {
        let action = b_hat.column(i) * lambda0;
        let mut block_sum = 0.0;
        for _ in 0..u {
            block_sum += pull(ell, theta, &action, stream)?;
        }
        // OLS within the subspace: the restricted Gram matrix is
        // (tau2/m) lambda0^2 I_m
        w_hat[i] = block_sum / (u as f64 * lambda0);
        collected += u as f64 * action.dot(theta);
    }

    let theta_hat = b_hat.lift(&w_hat);
    let greedy = greedy_action(ell, &theta_hat)?;
    for _ in tau2..tau {
        pull(ell, theta, &greedy, stream)?;
    }
    collected += (tau - tau2) as f64 * greedy.dot(theta);

    Ok(ExploitOutcome {
        w_hat,
        theta_hat,
        pseudo_regret: (tau as f64 * opt - collected).max(0.0),
    })
}
