//! Subspace geometry for d×m column-orthonormal matrices.
//!
//! A subspace is represented by a [`Basis`], a matrix B with BᵀB = I_m.
//! Distances between subspaces are measured through ‖A⊥ᵀB‖_F, the Frobenius
//! norm of the sine of the principal angles between span(A) and span(B).
//! That quantity does not depend on which orthonormal complement A⊥ is
//! chosen (any two differ by an orthogonal transformation), so all public
//! distance and residual computations here are complement-free:
//!
//! ```text
//! ‖B⊥ᵀφ‖₂  = ‖φ − BBᵀφ‖₂
//! ‖A⊥ᵀB‖_F = sqrt(m_B − ‖AᵀB‖_F²)
//! ```
//!
//! [`complement`] still produces an explicit complement when a full frame is
//! needed; the particular basis it returns is an implementation detail.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance on BᵀB = I at construction time.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Smallest admissible singular value for [`stiefel_project`] inputs.
pub const RANK_TOL: f64 = 1e-12;

/// A d×m matrix with orthonormal columns, 1 ≤ m < d.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    cols: DMatrix<f64>,
}

impl Basis {
    /// Wraps a matrix after checking column-orthonormality and 1 ≤ m < d.
    pub fn new(cols: DMatrix<f64>) -> Result<Self> {
        let (d, m) = cols.shape();
        if m < 1 || m >= d {
            return Err(Error::DimensionMismatch {
                expected: "1 <= m < d".into(),
                actual: format!("d = {d}, m = {m}"),
            });
        }
        let deviation = orthonormality_deviation(&cols);
        if !(deviation <= ORTHONORMALITY_TOL) {
            return Err(Error::InvalidBasis { deviation });
        }
        Ok(Self { cols })
    }

    /// The first `m` canonical directions of ℝ^d.
    pub fn canonical(d: usize, m: usize) -> Result<Self> {
        let mut cols = DMatrix::zeros(d, m);
        for j in 0..m.min(d) {
            cols[(j, j)] = 1.0;
        }
        Self::new(cols)
    }

    /// Basis spanned by the first `m_sub` columns of this basis.
    pub fn prefix(&self, m_sub: usize) -> Result<Self> {
        if m_sub < 1 || m_sub > self.m() {
            return Err(Error::DimensionMismatch {
                expected: format!("1 <= m_sub <= {}", self.m()),
                actual: format!("m_sub = {m_sub}"),
            });
        }
        Self::new(self.cols.columns(0, m_sub).into_owned())
    }

    pub fn d(&self) -> usize {
        self.cols.nrows()
    }

    pub fn m(&self) -> usize {
        self.cols.ncols()
    }

    pub fn cols(&self) -> &DMatrix<f64> {
        &self.cols
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.cols.column(i).into_owned()
    }

    /// Orthogonal projection of `phi` onto the spanned subspace: BBᵀφ.
    pub fn project(&self, phi: &DVector<f64>) -> DVector<f64> {
        &self.cols * (self.cols.transpose() * phi)
    }

    /// B·w, mapping subspace coordinates back to ℝ^d.
    pub fn lift(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.cols * w
    }
}

fn orthonormality_deviation(cols: &DMatrix<f64>) -> f64 {
    let m = cols.ncols();
    let gram = cols.transpose() * cols;
    (gram - DMatrix::identity(m, m)).norm()
}

/// Extends an orthonormal frame to `total` vectors by sweeping the canonical
/// axes through twice-through modified Gram-Schmidt.
fn canonical_fill(frame: &mut Vec<DVector<f64>>, d: usize, total: usize) {
    for i in 0..d {
        if frame.len() == total {
            return;
        }
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        for _ in 0..2 {
            for u in frame.iter() {
                let c = u.dot(&v);
                v -= u * c;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            frame.push(v / norm);
        }
    }
}

fn columns_to_matrix(cols: &[DVector<f64>], d: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(d, cols.len());
    for (j, v) in cols.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// An orthonormal basis of the orthogonal complement of span(B).
///
/// Built by completing B to a full frame with a deterministic canonical-axis
/// fill. Any other valid complement differs from this one by a
/// (d−m)×(d−m) orthogonal transformation, and no public computation depends
/// on the choice.
pub fn complement(basis: &Basis) -> Basis {
    let d = basis.d();
    let m = basis.m();
    let mut frame: Vec<DVector<f64>> = (0..m).map(|j| basis.column(j)).collect();
    canonical_fill(&mut frame, d, d);
    assert_eq!(frame.len(), d, "canonical fill must complete the frame");
    Basis::new(columns_to_matrix(&frame[m..], d)).expect("Gram-Schmidt output is orthonormal")
}

/// Completes a (possibly short) orthonormal column set to a full `target`
/// column Basis with the deterministic canonical-axis fill.
pub(crate) fn complete_to_basis(
    columns: &[DVector<f64>],
    d: usize,
    target: usize,
) -> Result<Basis> {
    let mut frame = columns.to_vec();
    canonical_fill(&mut frame, d, target);
    if frame.len() != target {
        return Err(Error::DimensionMismatch {
            expected: format!("{target} orthonormal columns"),
            actual: format!("{}", frame.len()),
        });
    }
    Basis::new(columns_to_matrix(&frame, d))
}

/// ‖B⊥ᵀφ‖₂ computed in the complement-free projection form ‖φ − BBᵀφ‖₂.
pub fn residual_norm(basis: &Basis, phi: &DVector<f64>) -> Result<f64> {
    if phi.len() != basis.d() {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of length {}", basis.d()),
            actual: format!("length {}", phi.len()),
        });
    }
    Ok((phi - basis.project(phi)).norm())
}

/// ‖A⊥ᵀB‖_F = sqrt(m_B − ‖AᵀB‖_F²) for bases in the same ambient space.
///
/// `b` may have fewer columns than `a`; this is the form used to compare a
/// learner's full-rank estimate against a partially revealed true basis.
pub fn residual_fnorm(a: &Basis, b: &Basis) -> Result<f64> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            expected: format!("ambient dimension {}", a.d()),
            actual: format!("ambient dimension {}", b.d()),
        });
    }
    let cross = a.cols().transpose() * b.cols();
    let value = b.m() as f64 - cross.norm_squared();
    Ok(value.max(0.0).sqrt())
}

/// Principal-angle distance ‖A⊥ᵀB‖_F between two rank-m subspaces.
pub fn principal_angle_dist(a: &Basis, b: &Basis) -> Result<f64> {
    if a.d() != b.d() || a.m() != b.m() {
        return Err(Error::DimensionMismatch {
            expected: format!("basis of shape {}x{}", a.d(), a.m()),
            actual: format!("basis of shape {}x{}", b.d(), b.m()),
        });
    }
    residual_fnorm(a, b)
}

/// Frobenius-nearest column-orthonormal matrix: the polar factor UVᵀ of the
/// SVD X = UΣVᵀ.
pub fn stiefel_project(x: &DMatrix<f64>) -> Result<Basis> {
    let (d, m) = x.shape();
    if m < 1 || m >= d {
        return Err(Error::DimensionMismatch {
            expected: "1 <= m < d".into(),
            actual: format!("d = {d}, m = {m}"),
        });
    }
    let svd = x.clone().svd(true, true);
    let sigma_min = svd.singular_values.min();
    if !(sigma_min > RANK_TOL) {
        return Err(Error::DegenerateProjection { sigma_min });
    }
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    Basis::new(u * v_t)
}

/// A basis drawn uniformly (Haar) on the set of d×m orthonormal matrices:
/// QR of a standard Gaussian matrix with the R-diagonal sign fix.
pub fn random_basis<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<Basis> {
    if m < 1 || m >= d {
        return Err(Error::DimensionMismatch {
            expected: "1 <= m < d".into(),
            actual: format!("d = {d}, m = {m}"),
        });
    }
    let gauss = DMatrix::from_fn(d, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Basis::new(q)
}

/// A unit vector drawn uniformly on the sphere S^{k−1}.
pub fn random_unit_vector<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Parameters of an exact cover of the rank-m subspaces of ℝ^d: every
/// subspace must be within `epsilon` of some cover element in the
/// principal-angle distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverSpec {
    pub d: usize,
    pub m: usize,
    pub epsilon: f64,
}

impl CoverSpec {
    pub fn new(d: usize, m: usize, epsilon: f64) -> Result<Self> {
        if m < 1 || m >= d {
            return Err(Error::DimensionMismatch {
                expected: "1 <= m < d".into(),
                actual: format!("d = {d}, m = {m}"),
            });
        }
        if !(epsilon > 0.0) {
            return Err(Error::config(format!(
                "cover radius must be positive, got {epsilon}"
            )));
        }
        Ok(Self { d, m, epsilon })
    }
}

/// Default cap on exact cover enumeration.
pub const DEFAULT_COVER_CAP: usize = 10_000_000;

/// Cardinality bound (4 m sqrt(d) / eps)^(d m) for the exact cover.
pub fn cover_size_bound(d: usize, m: usize, epsilon: f64) -> f64 {
    let base = 4.0 * m as f64 * (d as f64).sqrt() / epsilon;
    ((d * m) as f64 * base.ln()).exp()
}

/// Builds an exact cover by discretizing the hypercube that contains the
/// radius-sqrt(m) Frobenius ball of d×m matrices (per-axis step
/// eps / (2 m sqrt(d)), cell-centered) and mapping every non-degenerate grid
/// point through [`stiefel_project`].
///
/// Feasible only for tiny d·m; enumeration beyond `cap` points is refused.
pub fn build_eps_cover(spec: &CoverSpec, cap: usize) -> Result<Vec<Basis>> {
    let CoverSpec { d, m, epsilon } = *spec;
    let bound = cover_size_bound(d, m, epsilon);
    let axes = d * m;
    let half_width = (m as f64).sqrt();
    let step = epsilon / (2.0 * m as f64 * (d as f64).sqrt());
    let points_per_axis = ((2.0 * half_width) / step).ceil().max(1.0) as usize;
    let grid_points = (points_per_axis as f64).powi(axes as i32);
    if bound > cap as f64 || grid_points > cap as f64 {
        return Err(Error::CoverTooLarge {
            bound,
            grid_points,
            cap,
        });
    }

    let actual_step = 2.0 * half_width / points_per_axis as f64;
    let axis_value = |j: usize| -half_width + (j as f64 + 0.5) * actual_step;

    let mut cover = Vec::new();
    let mut odometer = vec![0usize; axes];
    loop {
        let x = DMatrix::from_fn(d, m, |i, j| axis_value(odometer[j * d + i]));
        match stiefel_project(&x) {
            Ok(basis) => cover.push(basis),
            Err(Error::DegenerateProjection { .. }) => {}
            Err(e) => return Err(e),
        }
        // advance the mixed-radix odometer
        let mut k = 0;
        loop {
            if k == axes {
                return Ok(cover);
            }
            odometer[k] += 1;
            if odometer[k] < points_per_axis {
                break;
            }
            odometer[k] = 0;
            k += 1;
        }
    }
}
