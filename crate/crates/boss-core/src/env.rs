//! Linear-bandit environments with ellipsoid action sets.
//!
//! An action set is {x : xᵀM⁻¹x ≤ 1} for a symmetric positive-definite M.
//! Playing action a against task parameter θ yields reward ⟨a, θ⟩ plus
//! mean-zero Gaussian noise. Task sequences come from the generators at the
//! bottom of this module; each generator draws a hidden rank-m basis and
//! decides how much of it the task parameters expose over time.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subspace::{random_basis, random_unit_vector, residual_norm, Basis};

/// Feasibility slack on aᵀM⁻¹a ≤ 1.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// The action set {x : xᵀM⁻¹x ≤ 1}.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    mat: DMatrix<f64>,
    inv: DMatrix<f64>,
    lambda0: f64,
    j_const: f64,
}

impl Ellipsoid {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let (r, c) = mat.shape();
        if r != c || r == 0 {
            return Err(Error::InvalidActionSet {
                reason: format!("matrix must be square and nonempty, got {r}x{c}"),
            });
        }
        let asym = (&mat - mat.transpose()).norm();
        if asym > 1e-10 {
            return Err(Error::InvalidActionSet {
                reason: format!("matrix is not symmetric (deviation {asym:.3e})"),
            });
        }
        let eig = mat.clone().symmetric_eigen();
        let lambda_min = eig.eigenvalues.min();
        let lambda_max = eig.eigenvalues.max();
        if !(lambda_min > 0.0) {
            return Err(Error::InvalidActionSet {
                reason: format!("matrix is not positive definite (min eigenvalue {lambda_min:.3e})"),
            });
        }
        // M^{-1} through the eigendecomposition keeps the inverse symmetric.
        let mut inv_diag = DMatrix::zeros(r, r);
        for i in 0..r {
            inv_diag[(i, i)] = 1.0 / eig.eigenvalues[i];
        }
        let inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
        let lambda0 = lambda_min.sqrt();
        for i in 0..r {
            let q = lambda0 * lambda0 * inv[(i, i)];
            if q > 1.0 + 1e-10 {
                return Err(Error::InvalidActionSet {
                    reason: format!("scaled canonical direction e_{i} infeasible (q = {q})"),
                });
            }
        }
        Ok(Self {
            mat,
            inv,
            lambda0,
            j_const: lambda_max / lambda0,
        })
    }

    /// Unit sphere action set, M = I_d.
    pub fn unit_sphere(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is SPD")
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        Self::new(m)
    }

    pub fn d(&self) -> usize {
        self.mat.nrows()
    }

    /// sqrt of the smallest eigenvalue of M; scales spanning actions into the set.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Curvature constant lambda_max(M) / lambda0.
    pub fn j_const(&self) -> f64 {
        self.j_const
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// aᵀM⁻¹a.
    pub fn quad_form(&self, a: &DVector<f64>) -> f64 {
        a.dot(&(&self.inv * a))
    }

    pub fn contains(&self, a: &DVector<f64>) -> bool {
        self.quad_form(a) <= 1.0 + FEASIBILITY_TOL
    }
}

/// argmax over the action set of ⟨a, θ⟩, in closed form Mθ/√(θᵀMθ).
pub fn best_action(ell: &Ellipsoid, theta: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(ell, theta)?;
    let m_theta = ell.mat() * theta;
    let quad = theta.dot(&m_theta);
    if quad == 0.0 {
        return Err(Error::UndefinedMaximizer);
    }
    Ok(m_theta / quad.sqrt())
}

/// max over the action set of ⟨a, θ⟩ = √(θᵀMθ); zero for θ = 0.
pub fn optimal_value(ell: &Ellipsoid, theta: &DVector<f64>) -> f64 {
    let m_theta = ell.mat() * theta;
    theta.dot(&m_theta).max(0.0).sqrt()
}

fn check_dim(ell: &Ellipsoid, v: &DVector<f64>) -> Result<()> {
    if v.len() != ell.d() {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of length {}", ell.d()),
            actual: format!("length {}", v.len()),
        });
    }
    Ok(())
}

/// Sequential source of observation noise for one run.
#[derive(Debug, Clone)]
pub struct RewardStream {
    noise_std: f64,
    rng: ChaCha8Rng,
}

impl RewardStream {
    /// Gaussian noise with std `noise_std` in [0, 1] (1-sub-Gaussian).
    pub fn new(noise_std: f64, rng: ChaCha8Rng) -> Result<Self> {
        if !(0.0..=1.0).contains(&noise_std) {
            return Err(Error::config(format!(
                "noise_std must lie in [0, 1], got {noise_std}"
            )));
        }
        Ok(Self { noise_std, rng })
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    fn draw_noise(&mut self) -> f64 {
        // always consume one normal so the stream advances identically
        // regardless of noise level
        let z: f64 = self.rng.sample(StandardNormal);
        self.noise_std * z
    }

    #[cfg(test)]
    pub(crate) fn rng_probe(&mut self) -> f64 {
        self.draw_noise()
    }
}

/// Plays `action` against `theta`: checks feasibility, returns
/// ⟨action, θ⟩ + noise, and advances the stream.
pub fn pull(
    ell: &Ellipsoid,
    theta: &DVector<f64>,
    action: &DVector<f64>,
    stream: &mut RewardStream,
) -> Result<f64> {
    check_dim(ell, theta)?;
    check_dim(ell, action)?;
    let quad = ell.quad_form(action);
    if quad > 1.0 + FEASIBILITY_TOL {
        return Err(Error::ActionOutsideSet { quad_form: quad });
    }
    Ok(action.dot(theta) + stream.draw_noise())
}

/// Ellipsoid action set plus the per-task interaction length and noise level.
#[derive(Debug, Clone)]
pub struct BanditEnv {
    pub ellipsoid: Ellipsoid,
    pub noise_std: f64,
    pub tau: usize,
}

impl BanditEnv {
    pub fn new(ellipsoid: Ellipsoid, noise_std: f64, tau: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&noise_std) {
            return Err(Error::config(format!(
                "noise_std must lie in [0, 1], got {noise_std}"
            )));
        }
        if tau == 0 {
            return Err(Error::config("task length tau must be positive"));
        }
        Ok(Self {
            ellipsoid,
            noise_std,
            tau,
        })
    }
}

/// Which generator produced a schedule; the string forms are the ids used in
/// experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorId {
    AdversarialReveal,
    SeqreplAdversarial,
    Diverse,
}

impl GeneratorId {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorId::AdversarialReveal => "adversarial_reveal",
            GeneratorId::SeqreplAdversarial => "seqrepl_adversarial",
            GeneratorId::Diverse => "diverse",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "adversarial_reveal" => Ok(GeneratorId::AdversarialReveal),
            "seqrepl_adversarial" => Ok(GeneratorId::SeqreplAdversarial),
            "diverse" => Ok(GeneratorId::Diverse),
            other => Err(Error::config(format!(
                "unknown generator id {other:?}; expected one of \
                 adversarial_reveal, seqrepl_adversarial, diverse"
            ))),
        }
    }
}

/// Problem sizes and norm bounds shared by every generator.
#[derive(Debug, Clone, Copy)]
pub struct ScheduleParams {
    pub d: usize,
    pub m: usize,
    pub n_tasks: usize,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl ScheduleParams {
    fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.m < 1 || self.m >= self.d {
            violations.push(format!(
                "subspace dimension must satisfy 1 <= m < d, got m = {}, d = {}",
                self.m, self.d
            ));
        }
        if self.n_tasks == 0 {
            violations.push("n_tasks must be positive".into());
        }
        if !(self.theta_min > 0.0 && self.theta_min <= self.theta_max && self.theta_max <= 1.0) {
            violations.push(format!(
                "norm bounds must satisfy 0 < theta_min <= theta_max <= 1, got [{}, {}]",
                self.theta_min, self.theta_max
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig { violations })
        }
    }
}

/// A generated task sequence: the parameters θ₁..θ_N, the per-task basis the
/// generator used (its rank grows as dimensions are revealed), and the full
/// hidden basis.
#[derive(Debug, Clone)]
pub struct TaskSchedule {
    thetas: Vec<DVector<f64>>,
    true_bases: Vec<Basis>,
    hidden_basis: Basis,
    generator: GeneratorId,
    theta_min: f64,
    theta_max: f64,
}

impl TaskSchedule {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn d(&self) -> usize {
        self.hidden_basis.d()
    }

    pub fn m(&self) -> usize {
        self.hidden_basis.m()
    }

    /// Task parameter for 0-based task index.
    pub fn theta(&self, idx: usize) -> &DVector<f64> {
        &self.thetas[idx]
    }

    /// Basis the generator used at 0-based task index.
    pub fn true_basis(&self, idx: usize) -> &Basis {
        &self.true_bases[idx]
    }

    pub fn hidden_basis(&self) -> &Basis {
        &self.hidden_basis
    }

    pub fn generator(&self) -> GeneratorId {
        self.generator
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// Checks the schedule invariants: norm bounds and containment of every
    /// θₙ in its generating subspace.
    pub fn check_invariants(&self) -> Result<()> {
        for (idx, theta) in self.thetas.iter().enumerate() {
            let norm = theta.norm();
            if norm < self.theta_min - 1e-9 || norm > self.theta_max + 1e-9 {
                return Err(Error::config(format!(
                    "task {} norm {} outside [{}, {}]",
                    idx + 1,
                    norm,
                    self.theta_min,
                    self.theta_max
                )));
            }
            let res = residual_norm(&self.true_bases[idx], theta)?;
            if res > 1e-9 {
                return Err(Error::config(format!(
                    "task {} parameter leaves its generating subspace (residual {res:.3e})",
                    idx + 1
                )));
            }
        }
        Ok(())
    }
}

fn validate_reveal_tasks(reveal_tasks: &[usize], m: usize, n_tasks: usize) -> Result<()> {
    let mut violations = Vec::new();
    if reveal_tasks.len() != m {
        violations.push(format!(
            "need exactly m = {m} reveal tasks, got {}",
            reveal_tasks.len()
        ));
    }
    if reveal_tasks.first() != Some(&1) {
        violations.push("first reveal task must be 1".into());
    }
    if !reveal_tasks.windows(2).all(|w| w[0] < w[1]) {
        violations.push("reveal tasks must be strictly increasing".into());
    }
    for &r in reveal_tasks {
        if r < 1 || r > n_tasks {
            violations.push(format!("reveal task {r} outside [1, {n_tasks}]"));
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig { violations })
    }
}

fn scaled_span_vector<R: Rng + ?Sized>(
    basis: &Basis,
    theta_min: f64,
    theta_max: f64,
    rng: &mut R,
) -> DVector<f64> {
    let w = random_unit_vector(basis.m(), rng);
    let scale = theta_min + (theta_max - theta_min) * rng.random::<f64>();
    basis.lift(&w) * scale
}

/// Reveals one new hidden direction at each index in `reveal_tasks`; task n
/// draws its parameter from the span of the directions revealed so far.
pub fn adversarial_reveal<R: Rng + ?Sized>(
    params: &ScheduleParams,
    reveal_tasks: &[usize],
    rng: &mut R,
) -> Result<TaskSchedule> {
    params.validate()?;
    let hidden = random_basis(params.d, params.m, rng)?;
    adversarial_reveal_with_basis(params, reveal_tasks, hidden, rng)
}

/// [`adversarial_reveal`] with a caller-supplied hidden basis.
pub fn adversarial_reveal_with_basis<R: Rng + ?Sized>(
    params: &ScheduleParams,
    reveal_tasks: &[usize],
    hidden: Basis,
    rng: &mut R,
) -> Result<TaskSchedule> {
    build_reveal_schedule(params, reveal_tasks, &[], hidden, rng, GeneratorId::AdversarialReveal)
}

/// Like [`adversarial_reveal`], but tasks listed in `pinned_tasks` are forced
/// back onto the first revealed direction. Pinning a competitor's
/// deterministic exploration schedule hides the later directions from it.
pub fn seqrepl_adversarial<R: Rng + ?Sized>(
    params: &ScheduleParams,
    reveal_tasks: &[usize],
    pinned_tasks: &[usize],
    rng: &mut R,
) -> Result<TaskSchedule> {
    params.validate()?;
    let hidden = random_basis(params.d, params.m, rng)?;
    seqrepl_adversarial_with_basis(params, reveal_tasks, pinned_tasks, hidden, rng)
}

/// [`seqrepl_adversarial`] with a caller-supplied hidden basis.
pub fn seqrepl_adversarial_with_basis<R: Rng + ?Sized>(
    params: &ScheduleParams,
    reveal_tasks: &[usize],
    pinned_tasks: &[usize],
    hidden: Basis,
    rng: &mut R,
) -> Result<TaskSchedule> {
    build_reveal_schedule(
        params,
        reveal_tasks,
        pinned_tasks,
        hidden,
        rng,
        GeneratorId::SeqreplAdversarial,
    )
}

fn build_reveal_schedule<R: Rng + ?Sized>(
    params: &ScheduleParams,
    reveal_tasks: &[usize],
    pinned_tasks: &[usize],
    hidden: Basis,
    rng: &mut R,
    generator: GeneratorId,
) -> Result<TaskSchedule> {
    params.validate()?;
    validate_reveal_tasks(reveal_tasks, params.m, params.n_tasks)?;
    if hidden.d() != params.d || hidden.m() != params.m {
        return Err(Error::DimensionMismatch {
            expected: format!("hidden basis of shape {}x{}", params.d, params.m),
            actual: format!("{}x{}", hidden.d(), hidden.m()),
        });
    }
    let pinned: std::collections::HashSet<usize> = pinned_tasks.iter().copied().collect();
    let first_direction = hidden.prefix(1)?;
    let mut thetas = Vec::with_capacity(params.n_tasks);
    let mut true_bases = Vec::with_capacity(params.n_tasks);
    let mut revealed = 0usize;
    for n in 1..=params.n_tasks {
        while revealed < params.m && reveal_tasks[revealed] <= n {
            revealed += 1;
        }
        let basis = if pinned.contains(&n) {
            first_direction.clone()
        } else {
            hidden.prefix(revealed.max(1))?
        };
        thetas.push(scaled_span_vector(&basis, params.theta_min, params.theta_max, rng));
        true_bases.push(basis);
    }
    Ok(TaskSchedule {
        thetas,
        true_bases,
        hidden_basis: hidden,
        generator,
        theta_min: params.theta_min,
        theta_max: params.theta_max,
    })
}

/// Every task parameter is a scaled random combination of all m hidden
/// directions from the start.
pub fn diverse<R: Rng + ?Sized>(params: &ScheduleParams, rng: &mut R) -> Result<TaskSchedule> {
    params.validate()?;
    let hidden = random_basis(params.d, params.m, rng)?;
    diverse_with_basis(params, hidden, rng)
}

/// [`diverse`] with a caller-supplied hidden basis.
pub fn diverse_with_basis<R: Rng + ?Sized>(
    params: &ScheduleParams,
    hidden: Basis,
    rng: &mut R,
) -> Result<TaskSchedule> {
    params.validate()?;
    if hidden.d() != params.d || hidden.m() != params.m {
        return Err(Error::DimensionMismatch {
            expected: format!("hidden basis of shape {}x{}", params.d, params.m),
            actual: format!("{}x{}", hidden.d(), hidden.m()),
        });
    }
    let mut thetas = Vec::with_capacity(params.n_tasks);
    let mut true_bases = Vec::with_capacity(params.n_tasks);
    for _ in 0..params.n_tasks {
        thetas.push(scaled_span_vector(&hidden, params.theta_min, params.theta_max, rng));
        true_bases.push(hidden.clone());
    }
    Ok(TaskSchedule {
        thetas,
        true_bases,
        hidden_basis: hidden,
        generator: GeneratorId::Diverse,
        theta_min: params.theta_min,
        theta_max: params.theta_max,
    })
}

/// Task indices of the form i(i+1)/2 up to `n_tasks`, the deterministic
/// exploration schedule used by the SVD baseline.
pub fn triangular_tasks(n_tasks: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1usize;
    loop {
        let t = i * (i + 1) / 2;
        if t > n_tasks {
            return out;
        }
        out.push(t);
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::subspace::principal_angle_dist;
    use approx::assert_relative_eq;

    fn params(d: usize, m: usize, n: usize) -> ScheduleParams {
        ScheduleParams {
            d,
            m,
            n_tasks: n,
            theta_min: 0.8,
            theta_max: 1.0,
        }
    }

    #[test]
    fn best_action_on_sphere() {
        let ell = Ellipsoid::unit_sphere(3);
        let theta = DVector::from_vec(vec![0.0, 3.0, 4.0]);
        let a = best_action(&ell, &theta).unwrap();
        assert_relative_eq!(a[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(a[1], 0.6, epsilon = 1e-12);
        assert_relative_eq!(a[2], 0.8, epsilon = 1e-12);
        assert_relative_eq!(a.dot(&theta), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn best_action_on_diagonal_ellipsoid() {
        let ell = Ellipsoid::from_diag(&[4.0, 1.0]).unwrap();
        let theta = DVector::from_vec(vec![1.0, 0.0]);
        let a = best_action(&ell, &theta).unwrap();
        assert_relative_eq!(a[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(a[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(a.dot(&theta), 2.0, epsilon = 1e-12);
        assert_relative_eq!(ell.quad_form(&a), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn best_action_dominates_random_feasible_actions() {
        let ell = Ellipsoid::from_diag(&[3.0, 1.0, 0.5, 2.0]).unwrap();
        let mut rng = stream_rng(3, "feas");
        let theta = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let best = best_action(&ell, &theta).unwrap().dot(&theta);
        let mut accepted = 0;
        while accepted < 1000 {
            let a = DVector::from_fn(4, |_, _| 2.0 * rng.random::<f64>() - 1.0) * 2.0;
            if ell.contains(&a) {
                accepted += 1;
                assert!(best >= a.dot(&theta) - 1e-9);
            }
        }
    }

    #[test]
    fn best_action_rejects_zero_target() {
        let ell = Ellipsoid::unit_sphere(3);
        assert!(matches!(
            best_action(&ell, &DVector::zeros(3)),
            Err(Error::UndefinedMaximizer)
        ));
        assert_eq!(optimal_value(&ell, &DVector::zeros(3)), 0.0);
    }

    #[test]
    fn optimal_value_matches_boundary_sampling() {
        let diag = [2.0, 0.5, 1.0, 3.0];
        let ell = Ellipsoid::from_diag(&diag).unwrap();
        let mut rng = stream_rng(8, "bound");
        let theta = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let opt = optimal_value(&ell, &theta);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..100_000 {
            // boundary point a = M^{1/2} u for u on the unit sphere
            let u = random_unit_vector(4, &mut rng);
            let a = DVector::from_fn(4, |i, _| diag[i].sqrt() * u[i]);
            best = best.max(a.dot(&theta));
        }
        assert!(best <= opt + 1e-9);
        assert!(
            opt - best <= 1e-3,
            "sampled max {best} too far below {opt}"
        );
    }

    #[test]
    fn pull_is_exact_without_noise_and_reproducible_with() {
        let ell = Ellipsoid::unit_sphere(3);
        let theta = DVector::from_vec(vec![0.5, 0.1, -0.2]);
        let a = DVector::from_vec(vec![0.0, 1.0, 0.0]);

        let mut s0 = RewardStream::new(0.0, stream_rng(1, "rewards")).unwrap();
        assert_eq!(pull(&ell, &theta, &a, &mut s0).unwrap(), 0.1);

        let mut s1 = RewardStream::new(0.3, stream_rng(1, "rewards")).unwrap();
        let mut s2 = RewardStream::new(0.3, stream_rng(1, "rewards")).unwrap();
        for _ in 0..32 {
            assert_eq!(
                pull(&ell, &theta, &a, &mut s1).unwrap(),
                pull(&ell, &theta, &a, &mut s2).unwrap()
            );
        }
    }

    #[test]
    fn pull_rejects_infeasible_action() {
        let ell = Ellipsoid::unit_sphere(2);
        let theta = DVector::from_vec(vec![1.0, 0.0]);
        let a = DVector::from_vec(vec![1.5, 0.0]);
        let mut s = RewardStream::new(0.1, stream_rng(1, "rewards")).unwrap();
        assert!(matches!(
            pull(&ell, &theta, &a, &mut s),
            Err(Error::ActionOutsideSet { .. })
        ));
    }

    #[test]
    fn pull_mean_concentrates() {
        let ell = Ellipsoid::unit_sphere(2);
        let theta = DVector::from_vec(vec![0.6, -0.3]);
        let a = DVector::from_vec(vec![0.8, 0.6]);
        let sigma = 1.0;
        let mut s = RewardStream::new(sigma, stream_rng(5, "clt")).unwrap();
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += pull(&ell, &theta, &a, &mut s).unwrap();
        }
        let mean = sum / n as f64;
        let expect = a.dot(&theta);
        assert!(
            (mean - expect).abs() <= 3.0 * sigma / (n as f64).sqrt(),
            "mean {mean} vs {expect}"
        );
    }

    #[test]
    fn reveal_schedule_shape() {
        let mut rng = stream_rng(17, "env");
        let sched =
            adversarial_reveal(&params(10, 3, 400), &[1, 251, 351], &mut rng).unwrap();
        sched.check_invariants().unwrap();
        assert_eq!(sched.len(), 400);

        // before the second reveal every parameter shares one direction
        let first = sched.theta(0).normalize();
        for idx in 0..250 {
            assert_eq!(sched.true_basis(idx).m(), 1);
            let t = sched.theta(idx).normalize();
            assert!(first.dot(&t).abs() > 1.0 - 1e-9);
        }
        assert_eq!(sched.true_basis(250).m(), 2);
        assert_eq!(sched.true_basis(399).m(), 3);

        for idx in 0..400 {
            let n = sched.theta(idx).norm();
            assert!((0.8..=1.0 + 1e-12).contains(&n));
        }
    }

    #[test]
    fn reveal_schedule_rejects_bad_indices() {
        let mut rng = stream_rng(18, "env");
        assert!(adversarial_reveal(&params(10, 3, 100), &[1, 50, 200], &mut rng).is_err());
        assert!(adversarial_reveal(&params(10, 3, 100), &[2, 50, 90], &mut rng).is_err());
        assert!(adversarial_reveal(&params(10, 3, 100), &[1, 50], &mut rng).is_err());
    }

    #[test]
    fn pinned_schedule_keeps_pinned_tasks_on_first_direction() {
        let mut rng = stream_rng(19, "env");
        let n = 600;
        let pinned = triangular_tasks(n);
        let sched = seqrepl_adversarial(
            &params(10, 3, n),
            &[1, 101, 201],
            &pinned,
            &mut rng,
        )
        .unwrap();
        sched.check_invariants().unwrap();
        let b1 = sched.hidden_basis().prefix(1).unwrap();
        for &t in &pinned {
            assert!(residual_norm(&b1, sched.theta(t - 1)).unwrap() <= 1e-9);
        }
        // off-schedule tasks past the last reveal span all m directions
        let cols: Vec<_> = (300..n)
            .filter(|i| !pinned.contains(&(i + 1)))
            .map(|i| sched.theta(i).clone())
            .collect();
        let mut stacked = DMatrix::zeros(10, cols.len());
        for (j, c) in cols.iter().enumerate() {
            stacked.set_column(j, c);
        }
        let svals = stacked.svd(false, false).singular_values;
        let mut s: Vec<f64> = svals.iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(s[2] > 1.0, "third singular value {s:?}");
    }

    #[test]
    fn diverse_schedule_spans_hidden_subspace() {
        let mut rng = stream_rng(20, "env");
        let sched = diverse(&params(10, 3, 100), &mut rng).unwrap();
        sched.check_invariants().unwrap();
        // diversity witness: m-th eigenvalue of the parameter second-moment
        // matrix stays away from zero
        let mut second_moment = DMatrix::zeros(10, 10);
        for idx in 0..100 {
            let t = sched.theta(idx);
            second_moment += t * t.transpose();
        }
        second_moment /= 100.0;
        let eig = second_moment.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(vals[2] > 0.05, "m-th eigenvalue {vals:?}");
    }

    #[test]
    fn fixed_basis_override_pins_the_subspace() {
        let mut rng = stream_rng(21, "env");
        let hidden = random_basis(6, 2, &mut rng).unwrap();
        let sched = diverse_with_basis(&params(6, 2, 10), hidden.clone(), &mut rng).unwrap();
        assert_relative_eq!(
            principal_angle_dist(sched.hidden_basis(), &hidden).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn triangular_task_list() {
        assert_eq!(triangular_tasks(15), vec![1, 3, 6, 10, 15]);
        assert_eq!(triangular_tasks(14), vec![1, 3, 6, 10]);
    }
}
