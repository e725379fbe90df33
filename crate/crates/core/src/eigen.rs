//! Tolerance-based computation of the complete eigenstructure of a matrix
//! polynomial.
//!
//! Every rank decision goes through one [`ToleranceProfile`], so the pieces of
//! a single analysis agree with each other:
//!
//! * normal rank: maximum rank over random points on the unit circle;
//! * minimal indices: kernel dimensions of block convolution matrices;
//! * partial multiplicities: rank increments of block Toeplitz matrices built
//!   from Taylor coefficients, with the singular part subtracted;
//! * finite eigenvalue candidates: generalized eigenvalues of the first
//!   companion pencil bordered to a square regular pencil, each one validated
//!   by the local multiplicity computation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    complex_gaussian, eigenvalues, frobenius_sq, gap_report, random_matrix,
    rank_from_singular_values, rank_with_scale, singular_values, CMatrix, ToleranceProfile,
};
use crate::poly::{first_companion, MatrixPolynomial, Pencil};
use crate::structure::{cmp_complex, FiniteEigen, KcfSpec, StructureSignature};

/// Distance below which two eigenvalue candidates are treated as one cluster,
/// relative to `1 + |λ|`.
const CLUSTER_RADIUS: f64 = 1e-3;

// Offsets for independent RNG streams derived from the profile seed.
const STREAM_PROBE: u64 = 0x9e37_79b9_7f4a_7c15;
const STREAM_BORDER: u64 = 0xc2b2_ae3d_27d4_eb4f;

pub use crate::linalg::numerical_rank;

fn rng_for(tol: &ToleranceProfile, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(tol.seed ^ stream)
}

/// Rank over the field of rational functions, estimated at random points on
/// the unit circle.
pub fn normal_rank(p: &MatrixPolynomial, tol: &ToleranceProfile) -> Result<usize> {
    let mut rng = rng_for(tol, STREAM_PROBE);
    let mut best = 0;
    for _ in 0..tol.probe_count {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = numerical_rank(&p.evaluate(Complex64::from_polar(1.0, theta)), tol)?;
        best = best.max(r);
    }
    Ok(best)
}

/// Block convolution matrix of `x ↦ P x` restricted to vector polynomials of
/// degree at most `k`: `(k+d+1)m x (k+1)n`, block `(i, j)` equal to `A_{i-j}`.
pub fn convolution_matrix(p: &MatrixPolynomial, k: usize) -> CMatrix {
    let (m, n, d) = (p.rows(), p.cols(), p.grade());
    let mut t = CMatrix::zeros((k + d + 1) * m, (k + 1) * n);
    for j in 0..=k {
        for (s, coeff) in p.coeffs().iter().enumerate() {
            t.view_mut(((j + s) * m, j * n), (m, n)).copy_from(coeff);
        }
    }
    t
}

/// Dimension of the space of polynomial kernel vectors of degree at most `k`.
pub fn kernel_dimension(p: &MatrixPolynomial, k: usize, tol: &ToleranceProfile) -> Result<usize> {
    let sv = singular_values(&convolution_matrix(p, k))?;
    Ok((k + 1) * p.cols() - rank_from_singular_values(&sv, tol))
}

fn minimal_indices_with_rank(
    p: &MatrixPolynomial,
    rank: usize,
    tol: &ToleranceProfile,
) -> Result<Vec<usize>> {
    let expected = p.cols() - rank;
    if expected == 0 {
        return Ok(Vec::new());
    }
    let k_max = (p.grade() * rank).max(1);
    let mut indices = Vec::with_capacity(expected);
    let (mut prev_nu, mut prev_count) = (0usize, 0usize);
    for k in 0..=k_max {
        let t = convolution_matrix(p, k);
        let sv = singular_values(&t)?;
        let nu = (k + 1) * p.cols() - rank_from_singular_values(&sv, tol);
        // number of indices <= k
        let count = nu.checked_sub(prev_nu).ok_or_else(|| Error::NonMonotone {
            what: format!("kernel dimension fell from {prev_nu} to {nu} at degree {k}"),
            gap: gap_report(&sv, tol),
        })?;
        if count < prev_count || count > expected {
            return Err(Error::NonMonotone {
                what: format!(
                    "index count {count} at degree {k} (previous {prev_count}, expected {expected})"
                ),
                gap: gap_report(&sv, tol),
            });
        }
        indices.extend(std::iter::repeat_n(k, count - prev_count));
        if count == expected {
            return Ok(indices);
        }
        prev_nu = nu;
        prev_count = count;
        if k == k_max {
            return Err(Error::NotConverged {
                k_max,
                found: count,
                expected,
                gap: gap_report(&sv, tol),
            });
        }
    }
    unreachable!("loop returns at k_max")
}

/// Right minimal indices, ascending.
pub fn right_minimal_indices(p: &MatrixPolynomial, tol: &ToleranceProfile) -> Result<Vec<usize>> {
    let rank = normal_rank(p, tol)?;
    minimal_indices_with_rank(p, rank, tol)
}

/// Left minimal indices: right minimal indices of the transposed polynomial.
pub fn left_minimal_indices(p: &MatrixPolynomial, tol: &ToleranceProfile) -> Result<Vec<usize>> {
    let rank = normal_rank(p, tol)?;
    minimal_indices_with_rank(&p.transpose(), rank, tol)
}

/// Lower block-triangular Toeplitz matrix of the first `k` Taylor coefficients.
fn taylor_toeplitz(taylor: &[CMatrix], m: usize, n: usize, k: usize) -> CMatrix {
    let mut w = CMatrix::zeros(k * m, k * n);
    for i in 0..k {
        for j in 0..=i {
            if let Some(c) = taylor.get(i - j) {
                w.view_mut((i * m, j * n), (m, n)).copy_from(c);
            }
        }
    }
    w
}

fn partial_multiplicities_with_rank(
    p: &MatrixPolynomial,
    lambda0: Complex64,
    rank: usize,
    tol: &ToleranceProfile,
) -> Result<Vec<usize>> {
    let (m, n) = (p.rows(), p.cols());
    let singular = n - rank;
    let taylor = p.taylor_coeffs(lambda0);
    // P(λ0) alone can be tiny in every direction; measure it against the
    // whole local expansion.
    let scale = taylor.iter().map(frobenius_sq).sum::<f64>().sqrt();
    // Σδ <= rank*grade bounds the largest partial multiplicity.
    let k_max = p.grade() * rank + 1;
    let mut weyr: Vec<usize> = Vec::new();
    let mut prev_ker = 0usize;
    for k in 1..=k_max {
        let sv = singular_values(&taylor_toeplitz(&taylor, m, n, k))?;
        let ker = k * n - rank_with_scale(&sv, scale, tol);
        let w = ker
            .checked_sub(prev_ker + singular)
            .ok_or_else(|| Error::NonMonotone {
                what: format!("Weyr characteristic negative at depth {k} for λ = {lambda0}"),
                gap: gap_report(&sv, tol),
            })?;
        if let Some(&last) = weyr.last() {
            if w > last {
                return Err(Error::NonMonotone {
                    what: format!("Weyr characteristic increased at depth {k} for λ = {lambda0}"),
                    gap: gap_report(&sv, tol),
                });
            }
        }
        if w == 0 {
            return Ok(conjugate_partition(&weyr));
        }
        weyr.push(w);
        prev_ker = ker;
    }
    Err(Error::NotConverged {
        k_max,
        found: weyr.len(),
        expected: 0,
        gap: format!("Weyr sequence {weyr:?} did not terminate at λ = {lambda0}"),
    })
}

/// `weyr[k-1]` is the number of parts `>= k`; returns the parts ascending.
fn conjugate_partition(weyr: &[usize]) -> Vec<usize> {
    let mut parts = Vec::new();
    for (i, &w) in weyr.iter().enumerate() {
        let next = weyr.get(i + 1).copied().unwrap_or(0);
        parts.extend(std::iter::repeat_n(i + 1, w - next));
    }
    parts.sort_unstable();
    parts
}

/// Partial multiplicities of `λ0` as an eigenvalue of `P`; empty when `λ0` is
/// not an eigenvalue.
pub fn partial_multiplicities_at(
    p: &MatrixPolynomial,
    lambda0: Complex64,
    tol: &ToleranceProfile,
) -> Result<Vec<usize>> {
    let rank = normal_rank(p, tol)?;
    partial_multiplicities_with_rank(p, lambda0, rank, tol)
}

/// Partial multiplicities at infinity: those of the reversal at zero.
pub fn infinite_multiplicities(p: &MatrixPolynomial, tol: &ToleranceProfile) -> Result<Vec<usize>> {
    let rank = normal_rank(p, tol)?;
    partial_multiplicities_with_rank(&p.reversal(), Complex64::new(0.0, 0.0), rank, tol)
}

/// Generalized eigenvalues of the first companion pencil after bordering it
/// with random rows and columns to a square, generically regular pencil.
///
/// Contains every finite eigenvalue of `P` plus spurious values introduced by
/// the border.
pub fn eigenvalue_candidates(
    p: &MatrixPolynomial,
    rank: usize,
    tol: &ToleranceProfile,
) -> Result<Vec<Complex64>> {
    bordered_candidates(p, rank, 0, tol)
}

/// As [`eigenvalue_candidates`], with the `infinite_degree` values closest to
/// infinity removed. Large infinite Jordan blocks otherwise split into
/// finite values of huge modulus that look singular at the rank tolerance.
fn bordered_candidates(
    p: &MatrixPolynomial,
    rank: usize,
    infinite_degree: usize,
    tol: &ToleranceProfile,
) -> Result<Vec<Complex64>> {
    if p.grade() == 0 {
        return Ok(Vec::new());
    }
    let c = first_companion(p)?.pencil;
    let (rows, cols) = (c.rows(), c.cols());
    let r1 = rank + p.cols() * (p.grade() - 1);
    let extra_rows = cols - r1;
    let size = rows + extra_rows;
    debug_assert_eq!(size, cols + (rows - r1));
    if size == 0 {
        return Ok(Vec::new());
    }
    let mut rng = rng_for(tol, STREAM_BORDER);
    let scale = Complex64::new(c.norm().max(1.0) / (size as f64).sqrt(), 0.0);
    let mut a = random_matrix(size, size, &mut rng) * scale;
    let mut b = random_matrix(size, size, &mut rng) * scale;
    a.view_mut((0, 0), (rows, cols)).copy_from(&c.a);
    b.view_mut((0, 0), (rows, cols)).copy_from(&c.b);

    // λA + B = (λ - σ)A + M with M = σA + B; det = 0 iff θ = -1/(λ - σ) is an
    // eigenvalue of M⁻¹A.
    let sigma = complex_gaussian(&mut rng);
    let shifted = &a * sigma + &b;
    let lu = shifted.lu();
    let m_inv_a = lu
        .solve(&a)
        .ok_or_else(|| Error::Eigen("shifted bordered pencil is singular".into()))?;
    let mut thetas = eigenvalues(&m_inv_a)?;
    thetas.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    let thetas = thetas.split_off(infinite_degree.min(thetas.len()));
    let theta_max = thetas.iter().map(|t| t.norm()).fold(0.0, f64::max);
    Ok(thetas
        .into_iter()
        .filter(|t| t.norm() > 1e-10 * theta_max.max(f64::MIN_POSITIVE))
        .map(|t| sigma - Complex64::new(1.0, 0.0) / t)
        .filter(|l| l.is_finite())
        .collect())
}

/// Single-linkage clusters of nearby candidates.
fn cluster(mut points: Vec<Complex64>) -> Vec<Vec<Complex64>> {
    points.sort_by(cmp_complex);
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for p in points {
        let near = |q: &Complex64| (p - q).norm() <= CLUSTER_RADIUS * (1.0 + p.norm());
        match clusters.iter_mut().find(|c| c.iter().any(near)) {
            Some(c) => c.push(p),
            None => clusters.push(vec![p]),
        }
    }
    clusters
}

fn mean(points: &[Complex64]) -> Complex64 {
    points.iter().sum::<Complex64>() / points.len() as f64
}

/// Finite eigenvalues with their partial multiplicities.
///
/// `infinite_degree` is the sum of the partial multiplicities at infinity.
pub fn finite_structure(
    p: &MatrixPolynomial,
    rank: usize,
    infinite_degree: usize,
    tol: &ToleranceProfile,
) -> Result<Vec<FiniteEigen>> {
    let candidates = bordered_candidates(p, rank, infinite_degree, tol)?;
    let mut found: Vec<FiniteEigen> = Vec::new();
    let accept = |lambda: Complex64, found: &mut Vec<FiniteEigen>| -> Result<bool> {
        if found
            .iter()
            .any(|f| (f.eigenvalue - lambda).norm() <= CLUSTER_RADIUS * (1.0 + lambda.norm()))
        {
            return Ok(true);
        }
        let mults = partial_multiplicities_with_rank(p, lambda, rank, tol)?;
        if mults.is_empty() {
            return Ok(false);
        }
        found.push(FiniteEigen {
            eigenvalue: lambda,
            multiplicities: mults,
        });
        Ok(true)
    };
    for group in cluster(candidates) {
        // The centroid of a cluster is far more accurate than its members for
        // defective eigenvalues; fall back to members when a spurious value
        // was swept into the cluster.
        if !accept(mean(&group), &mut found)? && group.len() > 1 {
            for &member in &group {
                accept(member, &mut found)?;
            }
        }
    }
    Ok(found)
}

/// Rank, minimal indices, and finite and infinite elementary divisors.
///
/// Fails when the pieces do not satisfy the index-sum balance
/// `Σε + Ση + Σ(finite degrees) + Σγ = rank * grade`.
pub fn complete_eigenstructure(
    p: &MatrixPolynomial,
    tol: &ToleranceProfile,
) -> Result<StructureSignature> {
    tol.validate()?;
    let rank = normal_rank(p, tol)?;
    let right = minimal_indices_with_rank(p, rank, tol)?;
    let left = minimal_indices_with_rank(&p.transpose(), rank, tol)?;
    let infinite =
        partial_multiplicities_with_rank(&p.reversal(), Complex64::new(0.0, 0.0), rank, tol)?;
    let finite = if rank == 0 {
        Vec::new()
    } else {
        finite_structure(p, rank, infinite.iter().sum(), tol)?
    };
    let sig = StructureSignature::new(
        p.rows(),
        p.cols(),
        p.grade(),
        rank,
        right,
        left,
        finite,
        infinite,
    );
    let residual = sig.balance_residual();
    if residual != 0 {
        return Err(Error::BalanceViolation {
            residual,
            signature: Box::new(sig),
        });
    }
    Ok(sig)
}

/// Kronecker canonical form of a pencil as a block multiset.
pub fn kcf_of_pencil(pencil: &Pencil, tol: &ToleranceProfile) -> Result<KcfSpec> {
    if pencil.rows() == 0 || pencil.cols() == 0 {
        // Only L_0 or L_0^T blocks fit.
        let blocks =
            std::iter::repeat_n(crate::structure::KcfBlock::RightSingular(0), pencil.cols())
                .chain(std::iter::repeat_n(
                    crate::structure::KcfBlock::LeftSingular(0),
                    pencil.rows(),
                ))
                .collect();
        return Ok(KcfSpec::new(blocks));
    }
    let sig = complete_eigenstructure(&pencil.to_polynomial()?, tol)?;
    Ok(KcfSpec::from_signature(&sig))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::random_polynomial;
    use crate::structure::KcfBlock;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn scalar_entries(rows: usize, cols: usize, coeffs: &[&[f64]]) -> MatrixPolynomial {
        // coeffs[k] is the row-major coefficient of λ^k
        let mats = coeffs
            .iter()
            .map(|v| CMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| c(x))))
            .collect();
        MatrixPolynomial::new(rows, cols, coeffs.len() - 1, mats).unwrap()
    }

    fn pencil_poly(blocks: Vec<KcfBlock>) -> MatrixPolynomial {
        KcfSpec::new(blocks).materialize().to_polynomial().unwrap()
    }

    #[test]
    fn normal_rank_examples() {
        // [[λ, λ²], [1, λ]]: first row is λ times the second
        let p = scalar_entries(
            2,
            2,
            &[
                &[0.0, 0.0, 1.0, 0.0],
                &[1.0, 0.0, 0.0, 1.0],
                &[0.0, 1.0, 0.0, 0.0],
            ],
        );
        assert_eq!(normal_rank(&p, &tol()).unwrap(), 1);
        assert_eq!(
            normal_rank(&MatrixPolynomial::zeros(2, 3, 2).unwrap(), &tol()).unwrap(),
            0
        );
        let generic = (0..100)
            .filter(|&s| normal_rank(&random_polynomial(3, 5, 2, s).unwrap(), &tol()).unwrap() == 3)
            .count();
        assert!(generic >= 99);
    }

    #[test]
    fn minimal_indices_of_singular_blocks() {
        let l1 = pencil_poly(vec![KcfBlock::RightSingular(1)]);
        assert_eq!(right_minimal_indices(&l1, &tol()).unwrap(), vec![1]);
        assert_eq!(
            left_minimal_indices(&l1, &tol()).unwrap(),
            Vec::<usize>::new()
        );

        let z = MatrixPolynomial::zeros(2, 3, 2).unwrap();
        assert_eq!(right_minimal_indices(&z, &tol()).unwrap(), vec![0, 0, 0]);
        assert_eq!(left_minimal_indices(&z, &tol()).unwrap(), vec![0, 0]);

        let l1l2 = pencil_poly(vec![KcfBlock::RightSingular(1), KcfBlock::RightSingular(2)]);
        assert_eq!(right_minimal_indices(&l1l2, &tol()).unwrap(), vec![1, 2]);

        let l1t = pencil_poly(vec![KcfBlock::LeftSingular(1)]);
        assert_eq!(left_minimal_indices(&l1t, &tol()).unwrap(), vec![1]);

        let mixed = pencil_poly(vec![KcfBlock::RightSingular(2), KcfBlock::LeftSingular(1)]);
        assert_eq!(left_minimal_indices(&mixed, &tol()).unwrap(), vec![1]);
        assert_eq!(right_minimal_indices(&mixed, &tol()).unwrap(), vec![2]);
    }

    #[test]
    fn kernel_dimension_law() {
        // ν_k = Σ_{ε_i <= k} (k - ε_i + 1)
        let eps = [0usize, 1, 1, 3];
        let p = pencil_poly(eps.iter().map(|&k| KcfBlock::RightSingular(k)).collect());
        for k in 0..6 {
            let expected: usize = eps.iter().filter(|&&e| e <= k).map(|&e| k - e + 1).sum();
            assert_eq!(
                kernel_dimension(&p, k, &tol()).unwrap(),
                expected,
                "k = {k}"
            );
        }
    }

    #[test]
    fn diagonal_multiplicities() {
        // diag(λ, λ²)
        let p = scalar_entries(
            2,
            2,
            &[&[0.0; 4], &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]],
        );
        assert_eq!(
            partial_multiplicities_at(&p, c(0.0), &tol()).unwrap(),
            vec![1, 2]
        );
        assert!(partial_multiplicities_at(&p, c(1.0), &tol())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn random_regular_point_is_not_an_eigenvalue() {
        let hits = (0..100)
            .filter(|&s| {
                let p = random_polynomial(3, 3, 2, s).unwrap();
                let lam = Complex64::new(0.37 + s as f64 * 1e-3, -0.81);
                !partial_multiplicities_at(&p, lam, &tol())
                    .unwrap()
                    .is_empty()
            })
            .count();
        assert_eq!(hits, 0);
    }

    #[test]
    fn infinite_examples() {
        let eye = CMatrix::identity(2, 2);
        let lam_i =
            MatrixPolynomial::new(2, 2, 1, vec![CMatrix::zeros(2, 2), eye.clone()]).unwrap();
        assert!(infinite_multiplicities(&lam_i, &tol()).unwrap().is_empty());
        let const_i = MatrixPolynomial::new(2, 2, 1, vec![eye, CMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(
            infinite_multiplicities(&const_i, &tol()).unwrap(),
            vec![1, 1]
        );
    }

    #[test]
    fn complete_structure_of_zero_and_l2() {
        let z =
            complete_eigenstructure(&MatrixPolynomial::zeros(2, 3, 2).unwrap(), &tol()).unwrap();
        assert_eq!(z.rank, 0);
        assert_eq!(z.right, vec![0, 0, 0]);
        assert_eq!(z.left, vec![0, 0]);
        assert!(!z.has_elementary_divisors());

        let l2 = complete_eigenstructure(&pencil_poly(vec![KcfBlock::RightSingular(2)]), &tol())
            .unwrap();
        assert_eq!(l2.rank, 2);
        assert_eq!(l2.right, vec![2]);
        assert!(l2.left.is_empty());
        assert!(!l2.has_elementary_divisors());
    }

    #[test]
    fn complete_structure_with_defective_eigenvalue() {
        let spec = KcfSpec::new(vec![
            KcfBlock::Jordan {
                mu: c(-1.5),
                size: 3,
            },
            KcfBlock::Jordan {
                mu: c(-1.5),
                size: 1,
            },
            KcfBlock::JordanInf { size: 2 },
            KcfBlock::RightSingular(1),
        ]);
        let sig =
            complete_eigenstructure(&spec.materialize().to_polynomial().unwrap(), &tol()).unwrap();
        assert!(sig.matches(&spec.signature(1e-12), 1e-6), "{sig:?}");
    }

    #[test]
    fn kcf_roundtrip_of_jordan_block() {
        let spec = KcfSpec::new(vec![KcfBlock::Jordan {
            mu: c(0.0),
            size: 2,
        }]);
        let back = kcf_of_pencil(&spec.materialize(), &tol()).unwrap();
        assert_eq!(back.blocks().len(), 1);
        match back.blocks()[0] {
            KcfBlock::Jordan { mu, size } => {
                assert_eq!(size, 2);
                assert!(mu.norm() < 1e-8);
            }
            other => panic!("unexpected block {other:?}"),
        }
    }

    #[test]
    fn conjugate_partition_examples() {
        assert_eq!(conjugate_partition(&[2, 1]), vec![1, 2]);
        assert_eq!(conjugate_partition(&[3, 3, 1]), vec![2, 2, 3]);
        assert!(conjugate_partition(&[]).is_empty());
    }
}
