//! Dense complex helpers shared by the eigenstructure code: singular values,
//! tolerance-based rank, null spaces and standard eigenvalues.

use nalgebra::{DMatrix, Schur, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

/// Knobs shared by every rank decision within one analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Singular values at or below `rel_rank_tol * sigma_max` count as zero.
    pub rel_rank_tol: f64,
    /// Number of random unit-modulus points used to estimate the normal rank.
    pub probe_count: usize,
    /// Extra draws allowed when realizing a generic structure.
    pub max_retry: usize,
    /// Seed for probe points and bordering.
    pub seed: u64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            rel_rank_tol: 1e-8,
            probe_count: 5,
            max_retry: 3,
            seed: 0x005e_ed0f_1a2b,
        }
    }
}

impl ToleranceProfile {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_rel_rank_tol(self, rel_rank_tol: f64) -> Self {
        Self {
            rel_rank_tol,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_rank_tol > 0.0) || self.probe_count == 0 || self.max_retry == 0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance profile entries must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    // Row-major fill so the draw order does not depend on storage layout.
    let mut out = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            out[(i, j)] = complex_gaussian(rng);
        }
    }
    out
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Singular values in descending order. Empty for matrices with a zero dimension.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, SVD_EPS, SVD_MAX_ITER).ok_or_else(|| {
        Error::Eigen(format!(
            "SVD did not converge ({}x{})",
            m.nrows(),
            m.ncols()
        ))
    })?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

pub fn rank_from_singular_values(sv: &[f64], tol: &ToleranceProfile) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let cut = tol.rel_rank_tol * smax;
    sv.iter().filter(|&&s| s > cut).count()
}

/// Rank with the cutoff taken relative to `max(σ_max, scale)`, for matrices
/// whose own largest singular value may itself be negligible.
pub fn rank_with_scale(sv: &[f64], scale: f64, tol: &ToleranceProfile) -> usize {
    let reference = sv.first().copied().unwrap_or(0.0).max(scale);
    if reference == 0.0 {
        return 0;
    }
    let cut = tol.rel_rank_tol * reference;
    sv.iter().filter(|&&s| s > cut).count()
}

pub fn numerical_rank(m: &CMatrix, tol: &ToleranceProfile) -> Result<usize> {
    Ok(rank_from_singular_values(&singular_values(m)?, tol))
}

/// Short report of the relative singular values straddling the rank cutoff.
pub fn gap_report(sv: &[f64], tol: &ToleranceProfile) -> String {
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return "all zero".to_string();
    }
    let rank = rank_from_singular_values(sv, tol);
    let lo = rank.saturating_sub(2);
    let hi = (rank + 2).min(sv.len());
    let parts: Vec<String> = sv[lo..hi]
        .iter()
        .map(|s| format!("{:.3e}", s / smax))
        .collect();
    format!(
        "rank {rank}, relative sv[{lo}..{hi}] = [{}], cutoff {:.1e}",
        parts.join(", "),
        tol.rel_rank_tol
    )
}

/// Orthonormal basis (as columns) of the `dim` right singular directions with the
/// smallest singular values, together with the full singular value list.
///
/// The matrix is padded with zero rows to be square so that the right singular
/// basis is complete.
pub fn trailing_right_singular_vectors(m: &CMatrix, dim: usize) -> Result<(CMatrix, Vec<f64>)> {
    let cols = m.ncols();
    if dim > cols {
        return Err(Error::InvalidArgument(format!(
            "requested {dim} null vectors of a matrix with {cols} columns"
        )));
    }
    let rows = m.nrows().max(cols);
    let mut padded = CMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = SVD::try_new(padded, false, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::Eigen("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Eigen("SVD returned no right vectors".into()))?;
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut basis = CMatrix::zeros(cols, dim);
    for (out_col, &idx) in order[cols - dim..].iter().enumerate() {
        for r in 0..cols {
            basis[(r, out_col)] = v_t[(idx, r)].conj();
        }
    }
    Ok((basis, sv))
}

/// Eigenvalues of a square complex matrix via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!(
            "eigenvalues of a {}x{} matrix",
            n,
            m.ncols()
        )));
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    let schur = Schur::try_new(m.clone(), 1e-15, 100_000)
        .ok_or_else(|| Error::Eigen(format!("Schur iteration did not converge ({n}x{n})")))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

pub fn condition_number(m: &CMatrix) -> Result<f64> {
    let sv = singular_values(m)?;
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}
