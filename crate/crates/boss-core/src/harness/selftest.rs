//! Built-in invariant checks, runnable from the CLI.
//!
//! Everything runs on fixed seeds in a few seconds. Each check reports the
//! measured violation (0 means clean) against its threshold. The geometry
//! checks route matrix projections through a hook that can inject a
//! perturbation; a perturbed projection must make them fail, which gives the
//! suite a negative control.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::env::{Ellipsoid, RewardStream};
use crate::policy::{meta_explore, meta_exploit};
use crate::rng::stream_rng;
use crate::select::{ewa_update, surrogate_cost, CostParams, ExpertState, DEFAULT_EWA_ETA};
use crate::subspace::{
    build_eps_cover, complement, principal_angle_dist, random_basis, random_unit_vector,
    residual_norm, stiefel_project, Basis, CoverSpec, DEFAULT_COVER_CAP,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct SelftestOptions {
    /// Added to the first column of every projected matrix inside the
    /// geometry checks; nonzero values are expected to break them.
    pub projection_perturbation: f64,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
    pub elapsed_seconds: f64,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(name: &'static str, measured: f64, threshold: f64) -> CheckResult {
    CheckResult {
        name,
        pass: measured <= threshold,
        measured,
        threshold,
    }
}

fn orthonormality_deviation(cols: &DMatrix<f64>) -> f64 {
    let m = cols.ncols();
    (cols.transpose() * cols - DMatrix::identity(m, m)).norm()
}

struct Projector {
    perturbation: f64,
}

impl Projector {
    fn project(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = stiefel_project(x).expect("full-rank test input").cols().clone();
        if self.perturbation != 0.0 {
            for i in 0..out.nrows() {
                out[(i, 0)] += self.perturbation;
            }
        }
        out
    }
}

fn gaussian_matrix<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(d, m, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn selftest(opts: &SelftestOptions) -> SelftestReport {
    let started = std::time::Instant::now();
    let projector = Projector {
        perturbation: opts.projection_perturbation,
    };
    let mut checks = Vec::new();

    // complement independence: any orthogonal re-basing of the complement
    // leaves residual magnitudes unchanged
    {
        let mut rng = stream_rng(1001, "selftest");
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let b = random_basis(8, 3, &mut rng).unwrap();
            let c1 = complement(&b);
            let rot = gaussian_matrix(5, 5, &mut rng).qr().q();
            let c2 = c1.cols() * rot;
            let phi = DVector::from_fn(8, |_, _| rng.sample::<f64, _>(StandardNormal));
            let r1 = (c1.cols().transpose() * &phi).norm();
            let r2 = (c2.transpose() * &phi).norm();
            worst = worst.max((r1 - r2).abs());
        }
        checks.push(check("complement_independence", worst, 1e-9));
    }

    // residual identity: projection form equals the explicit-complement form
    {
        let mut rng = stream_rng(1002, "selftest");
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let b = random_basis(9, 4, &mut rng).unwrap();
            let phi = DVector::from_fn(9, |_, _| rng.sample::<f64, _>(StandardNormal));
            let direct = residual_norm(&b, &phi).unwrap();
            let explicit = (complement(&b).cols().transpose() * &phi).norm();
            worst = worst.max((direct - explicit).abs());
        }
        checks.push(check("residual_identity", worst, 1e-8));
    }

    // contraction: principal-angle distance squared never exceeds the
    // squared Frobenius difference (pairs built through the projection hook)
    {
        let mut rng = stream_rng(1003, "selftest");
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let a = projector.project(&gaussian_matrix(6, 2, &mut rng));
            let b = projector.project(&gaussian_matrix(6, 2, &mut rng));
            let cross = a.transpose() * &b;
            let dist_sq = (2.0 - cross.norm_squared()).max(0.0);
            let frob_sq = (&a - &b).norm_squared();
            worst = worst
                .max(dist_sq - frob_sq)
                .max(orthonormality_deviation(&a))
                .max(orthonormality_deviation(&b));
        }
        checks.push(check("distance_contraction", worst, 1e-8));
    }

    // threshold transfer between a parameter and its estimate
    {
        let alpha = 0.3;
        let mut rng = stream_rng(1004, "selftest");
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let b = random_basis(8, 3, &mut rng).unwrap();
            let theta = b.lift(&random_unit_vector(3, &mut rng)) * 0.9;
            let hat = &theta + random_unit_vector(8, &mut rng) * (alpha * rng.random::<f64>());
            worst = worst.max(residual_norm(&b, &hat).unwrap() - alpha);

            let covered = b.lift(&random_unit_vector(3, &mut rng))
                + complement(&b).lift(&random_unit_vector(5, &mut rng))
                    * (alpha * rng.random::<f64>());
            let theta2 =
                &covered + random_unit_vector(8, &mut rng) * (alpha * rng.random::<f64>());
            worst = worst.max(residual_norm(&b, &theta2).unwrap() - 2.0 * alpha);
        }
        checks.push(check("alpha_cover_transfer", worst, 1e-9));
    }

    // polar projection is Frobenius-closest among sampled orthonormal frames
    {
        let mut rng = stream_rng(1005, "selftest");
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let x = gaussian_matrix(5, 2, &mut rng);
            let p = projector.project(&x);
            let base = (&p - &x).norm();
            worst = worst.max(orthonormality_deviation(&p));
            for _ in 0..100 {
                let q = random_basis(5, 2, &mut rng).unwrap();
                worst = worst.max(base - (q.cols() - &x).norm());
            }
        }
        checks.push(check("procrustes_optimality", worst, 1e-9));
    }

    // noiseless closed-form estimators are exact
    {
        let ell = Ellipsoid::unit_sphere(7);
        let mut rng = stream_rng(1006, "selftest");
        let theta = random_unit_vector(7, &mut rng) * 0.9;
        let mut s = RewardStream::new(0.0, stream_rng(1006, "rewards")).unwrap();
        let out = meta_explore(&ell, &theta, 28, 14, &mut s).unwrap();
        checks.push(check(
            "explore_ols_exactness",
            (out.theta_hat - &theta).norm(),
            1e-10,
        ));

        let b = random_basis(7, 2, &mut rng).unwrap();
        let theta_in = b.lift(&random_unit_vector(2, &mut rng)) * 0.85;
        let mut s = RewardStream::new(0.0, stream_rng(1007, "rewards")).unwrap();
        let out = meta_exploit(&ell, &theta_in, &b, 20, 6, &mut s).unwrap();
        checks.push(check(
            "exploit_ols_exactness",
            (out.theta_hat - &theta_in).norm(),
            1e-10,
        ));
    }

    // two-expert hand update at the ln 2 rate
    {
        let e1 = Basis::canonical(3, 1).unwrap();
        let e2 = complement(&e1).prefix(1).unwrap();
        let state = ExpertState::uniform(vec![e1, e2], DEFAULT_EWA_ETA).unwrap();
        let next = ewa_update(&state, &[0.0, 1.0]).unwrap();
        let w = next.weights();
        let measured = (w[0] - 2.0 / 3.0).abs().max((w[1] - 1.0 / 3.0).abs());
        checks.push(check("ewa_hand_update", measured, 1e-12));
    }

    // a zero-loss expert's weight never decreases
    {
        let mut rng = stream_rng(1008, "selftest");
        let experts: Vec<Basis> = (0..12)
            .map(|_| random_basis(5, 2, &mut rng).unwrap())
            .collect();
        let mut state = ExpertState::uniform(experts, DEFAULT_EWA_ETA).unwrap();
        let star = 4;
        let mut prev = state.weight(star);
        let mut worst_drop: f64 = 0.0;
        for _ in 0..200 {
            let ls: Vec<f64> = (0..12)
                .map(|i| if i == star { 0.0 } else { rng.random::<f64>() })
                .collect();
            state = ewa_update(&state, &ls).unwrap();
            let w = state.weight(star);
            worst_drop = worst_drop.max(prev - w);
            prev = w;
        }
        checks.push(check("ewa_zero_loss_monotone", worst_drop, 1e-15));
    }

    // importance weighting is unbiased for the threshold costs
    {
        let mut rng = stream_rng(1009, "selftest");
        let b = random_basis(6, 2, &mut rng).unwrap();
        let p = 0.5;
        let params = CostParams::new(60.0, 200.0, 0.4, p).unwrap();
        let rounds = 4000;
        let mut diffs = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let hat = random_unit_vector(6, &mut rng) * (0.8 + 0.2 * rng.random::<f64>());
            let cost = surrogate_cost(&b, &hat, &params).unwrap();
            let z = rng.random_bool(p);
            diffs.push(if z { cost / p } else { 0.0 } - cost);
        }
        let mean = diffs.iter().sum::<f64>() / rounds as f64;
        let var = diffs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (rounds as f64 - 1.0);
        let se = (var / rounds as f64).sqrt();
        checks.push(check("importance_weight_unbiased", mean.abs(), 3.0 * se));
    }

    // the exact plane cover reaches every direction
    {
        let spec = CoverSpec::new(2, 1, 0.5).unwrap();
        let cover = build_eps_cover(&spec, DEFAULT_COVER_CAP).unwrap();
        let mut rng = stream_rng(1010, "selftest");
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..500 {
            let target = random_basis(2, 1, &mut rng).unwrap();
            let nearest = cover
                .iter()
                .map(|c| principal_angle_dist(c, &target).unwrap())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest - 0.5);
        }
        checks.push(check("plane_cover_radius", worst, 0.0));
    }

    SelftestReport {
        checks,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes_every_check() {
        let report = selftest(&SelftestOptions::default());
        for c in &report.checks {
            assert!(
                c.pass,
                "{} failed: measured {:.3e} vs threshold {:.3e}",
                c.name, c.measured, c.threshold
            );
        }
        assert!(report.elapsed_seconds < 60.0);
    }

    #[test]
    fn perturbed_projection_is_caught() {
        let report = selftest(&SelftestOptions {
            projection_perturbation: 0.05,
        });
        let contraction = report
            .checks
            .iter()
            .find(|c| c.name == "distance_contraction")
            .unwrap();
        assert!(!contraction.pass);
        assert!(!report.all_pass());
    }
}
