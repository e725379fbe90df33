//! Recovering a polynomial from a perturbed first companion pencil.
//!
//! The bottom `n(d-1)` rows of `C¹_P` form the pencil
//! `λ[0 I] + [-I 0]`, whose right kernel has a basis of `n` vector
//! polynomials of degree `d - 1`. For a nearby pencil `L` the coefficient
//! vectors of such a kernel basis give the right transformation `R`; the
//! bottom rows of `L R` are then brought back to the identity pattern by a
//! left transformation, and the top rows are cleaned with the new identity
//! blocks. The result is `Q L R = C¹_{P̃}` exactly in exact arithmetic.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, trailing_right_singular_vectors, CMatrix, ToleranceProfile};
use crate::poly::{CompanionForm, CompanionPencil, MatrixPolynomial, Pencil};

/// Largest condition number accepted for the pivot blocks.
const PIVOT_COND_LIMIT: f64 = 1e8;

/// Returns `P̃` such that `L` is strictly equivalent to `C¹_{P̃}`.
pub fn companion_recovery(
    l: &Pencil,
    m: usize,
    n: usize,
    d: usize,
    tol: &ToleranceProfile,
) -> Result<MatrixPolynomial> {
    if d == 0 || m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "recovery needs positive m, n, d (got {m}, {n}, {d})"
        )));
    }
    let (rows, cols) = CompanionPencil::size_of(CompanionForm::First, m, n, d);
    if l.rows() != rows || l.cols() != cols {
        return Err(Error::Shape(format!(
            "pencil is {}x{}, expected {rows}x{cols}",
            l.rows(),
            l.cols()
        )));
    }
    if d == 1 {
        return l.to_polynomial();
    }

    let bottom_rows = n * (d - 1);
    let bottom = Pencil {
        a: l.a.rows(m, bottom_rows).into_owned(),
        b: l.b.rows(m, bottom_rows).into_owned(),
    }
    .to_polynomial()?;

    // Kernel vectors x(λ) = Σ_i λ^i x_i with deg x <= d - 1, stacked [x_0; ...; x_{d-1}].
    let conv = crate::eigen::convolution_matrix(&bottom, d - 1);
    let (kernel, sv) = trailing_right_singular_vectors(&conv, n)?;
    let total = sv.len();
    let smax = sv[0];
    let beyond = sv[total - n - 1];
    if beyond <= tol.rel_rank_tol * smax {
        return Err(Error::PivotSingular(format!(
            "kernel of the identity rows has dimension above {n} (relative sv {:.3e})",
            beyond / smax
        )));
    }

    // R block column j (0-based) is the coefficient of λ^{d-1-j}.
    let mut r = CMatrix::zeros(cols, cols);
    for j in 0..d {
        let coef = d - 1 - j;
        r.view_mut((0, j * n), (cols, n))
            .copy_from(&kernel.view((coef * cols, 0), (cols, n)));
    }
    // Normalize so that the trailing diagonal block of R is the identity,
    // which keeps R near I when L is near a companion form.
    let pivot = r.view(((d - 1) * n, (d - 1) * n), (n, n)).into_owned();
    check_pivot(&pivot, "trailing block of the kernel basis")?;
    let pivot_inv = pivot.try_inverse().ok_or_else(|| {
        Error::PivotSingular("trailing block of the kernel basis is singular".into())
    })?;
    for j in 0..d {
        let blk = r.view((0, j * n), (cols, n)) * &pivot_inv;
        r.view_mut((0, j * n), (cols, n)).copy_from(&blk);
    }
    check_pivot(&r, "right transformation")?;

    let la = &l.a * &r;
    let lb = &l.b * &r;
    // Bottom rows of L R are S [0 I] + λ-free part -S [I 0]; S is the pivot.
    let s = la.view((m, n), (bottom_rows, bottom_rows)).into_owned();
    check_pivot(&s, "identity block")?;

    // Top rows: A part [X | T_A], B part T_B. Subtract T_A S⁻¹ times the
    // bottom rows to clear the A part beyond the first block column.
    let s_inv = s
        .try_inverse()
        .ok_or_else(|| Error::PivotSingular("identity block is singular".into()))?;
    let top_a = la.rows(0, m).into_owned();
    let top_b = lb.rows(0, m).into_owned();
    let bottom_b = lb.rows(m, bottom_rows).into_owned();
    let elim = top_a.columns(n, bottom_rows) * &s_inv;
    let new_b = top_b - &elim * bottom_b;

    let mut coeffs = vec![CMatrix::zeros(m, n); d + 1];
    coeffs[d] = top_a.columns(0, n).into_owned();
    for k in 0..d {
        coeffs[d - 1 - k] = new_b.columns(k * n, n).into_owned();
    }
    MatrixPolynomial::new(m, n, d, coeffs)
}

fn check_pivot(block: &CMatrix, what: &str) -> Result<()> {
    let cond = condition_number(block)?;
    if !(cond < PIVOT_COND_LIMIT) {
        return Err(Error::PivotSingular(format!(
            "{what} has condition number {cond:.3e}"
        )));
    }
    Ok(())
}

/// Unit-norm random pencil direction, used to perturb companion forms.
pub fn random_unit_pencil(rows: usize, cols: usize, seed: u64) -> Pencil {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = crate::linalg::random_matrix(rows, cols, &mut rng);
    let b = crate::linalg::random_matrix(rows, cols, &mut rng);
    let p = Pencil { a, b };
    let scale = Complex64::new(1.0 / p.norm(), 0.0);
    Pencil {
        a: p.a * scale,
        b: p.b * scale,
    }
}
