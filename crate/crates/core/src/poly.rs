//! Matrix polynomials, pencils and the Frobenius companion linearizations.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, random_matrix, CMatrix};

/// `P(λ) = λ^d A_d + ... + λ A_1 + A_0` with an explicitly stored grade `d`.
///
/// The grade is an upper bound on the degree; trailing zero coefficients are
/// kept.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial {
    m: usize,
    n: usize,
    coeffs: Vec<CMatrix>,
}

impl MatrixPolynomial {
    pub fn new(m: usize, n: usize, grade: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Shape(format!(
                "dimensions must be positive, got {m}x{n}"
            )));
        }
        if coeffs.len() != grade + 1 {
            return Err(Error::Shape(format!(
                "grade {grade} needs {} coefficients, got {}",
                grade + 1,
                coeffs.len()
            )));
        }
        if let Some((i, c)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| c.nrows() != m || c.ncols() != n)
        {
            return Err(Error::Shape(format!(
                "coefficient {i} is {}x{}, expected {m}x{n}",
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(Self { m, n, coeffs })
    }

    pub fn zeros(m: usize, n: usize, grade: usize) -> Result<Self> {
        Self::new(m, n, grade, vec![CMatrix::zeros(m, n); grade + 1])
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients in ascending powers of λ.
    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &CMatrix {
        &self.coeffs[i]
    }

    pub fn leading(&self) -> &CMatrix {
        &self.coeffs[self.grade()]
    }

    /// Largest power with a nonzero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .rposition(|c| c.iter().any(|z| *z != Complex64::new(0.0, 0.0)))
    }

    pub fn evaluate(&self, lambda: Complex64) -> CMatrix {
        let mut acc = self.leading().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * lambda + c;
        }
        acc
    }

    /// `λ^d P(1/λ)`, same grade.
    pub fn reversal(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { coeffs, ..*self }
    }

    /// Coefficient-wise transpose (not conjugated).
    pub fn transpose(&self) -> Self {
        Self {
            m: self.n,
            n: self.m,
            coeffs: self.coeffs.iter().map(|c| c.transpose()).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c * Complex64::new(factor, 0.0))
                .collect(),
            ..*self
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(frobenius_sq).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.m != other.m || self.n != other.n || self.grade() != other.grade() {
            return Err(Error::Shape(format!(
                "distance between {}x{} grade {} and {}x{} grade {}",
                self.m,
                self.n,
                self.grade(),
                other.m,
                other.n,
                other.grade()
            )));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| frobenius_sq(&(a - b)))
            .sum::<f64>()
            .sqrt())
    }

    /// Product `self(λ) * rhs(λ)`; the grade is the sum of the grades.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.m {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.m, self.n, rhs.m, rhs.n
            )));
        }
        let grade = self.grade() + rhs.grade();
        let mut coeffs = vec![CMatrix::zeros(self.m, rhs.n); grade + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(self.m, rhs.n, grade, coeffs)
    }

    /// Taylor coefficients `P^{(j)}(λ0) / j!` for `j = 0..=d`.
    pub fn taylor_coeffs(&self, lambda0: Complex64) -> Vec<CMatrix> {
        let d = self.grade();
        (0..=d)
            .map(|j| {
                let mut acc = CMatrix::zeros(self.m, self.n);
                let mut pow = Complex64::new(1.0, 0.0);
                for i in j..=d {
                    acc += &self.coeffs[i] * (pow * binomial(i, j) as f64);
                    pow *= lambda0;
                }
                acc
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolynomialRecord::from(self)).expect("polynomial serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: PolynomialRecord = serde_json::from_str(s)?;
        rec.try_into()
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// On-disk polynomial layout: ascending coefficients, row-major, `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialRecord {
    pub m: usize,
    pub n: usize,
    pub grade: usize,
    pub coeffs: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&MatrixPolynomial> for PolynomialRecord {
    fn from(p: &MatrixPolynomial) -> Self {
        let coeffs = p
            .coeffs
            .iter()
            .map(|c| {
                (0..p.m)
                    .map(|i| (0..p.n).map(|j| [c[(i, j)].re, c[(i, j)].im]).collect())
                    .collect()
            })
            .collect();
        Self {
            m: p.m,
            n: p.n,
            grade: p.grade(),
            coeffs,
        }
    }
}

impl TryFrom<PolynomialRecord> for MatrixPolynomial {
    type Error = Error;

    fn try_from(rec: PolynomialRecord) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(rec.coeffs.len());
        for (k, rows) in rec.coeffs.iter().enumerate() {
            if rows.len() != rec.m || rows.iter().any(|r| r.len() != rec.n) {
                return Err(Error::Shape(format!(
                    "coefficient {k} does not have shape {}x{}",
                    rec.m, rec.n
                )));
            }
            coeffs.push(CMatrix::from_fn(rec.m, rec.n, |i, j| {
                Complex64::new(rows[i][j][0], rows[i][j][1])
            }));
        }
        MatrixPolynomial::new(rec.m, rec.n, rec.grade, coeffs)
    }
}

/// The pencil `λA + B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    pub a: CMatrix,
    pub b: CMatrix,
}

impl Pencil {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        if a.shape() != b.shape() {
            return Err(Error::Shape(format!(
                "pencil parts {:?} and {:?} differ",
                a.shape(),
                b.shape()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            a: CMatrix::zeros(rows, cols),
            b: CMatrix::zeros(rows, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.a.shape() != other.a.shape() {
            return Err(Error::Shape("pencils of different size".into()));
        }
        Ok((frobenius_sq(&(&self.a - &other.a)) + frobenius_sq(&(&self.b - &other.b))).sqrt())
    }

    pub fn norm(&self) -> f64 {
        (frobenius_sq(&self.a) + frobenius_sq(&self.b)).sqrt()
    }

    /// `Q (λA + B) R`.
    pub fn transform(&self, q: &CMatrix, r: &CMatrix) -> Result<Self> {
        if q.ncols() != self.rows() || r.nrows() != self.cols() {
            return Err(Error::Shape(
                "transformation does not fit the pencil".into(),
            ));
        }
        Ok(Self {
            a: q * &self.a * r,
            b: q * &self.b * r,
        })
    }

    /// The pencil viewed as a grade-1 polynomial with coefficients `[B, A]`.
    ///
    /// Fails for pencils with a zero dimension, which have no polynomial form.
    pub fn to_polynomial(&self) -> Result<MatrixPolynomial> {
        MatrixPolynomial::new(
            self.rows(),
            self.cols(),
            1,
            vec![self.b.clone(), self.a.clone()],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompanionForm {
    First,
    Second,
}

/// A Frobenius companion pencil together with the shape of its source polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct CompanionPencil {
    pub pencil: Pencil,
    pub form: CompanionForm,
    pub m: usize,
    pub n: usize,
    pub d: usize,
}

impl CompanionPencil {
    /// `(rows, cols)` of a companion form for an `m x n` polynomial of grade `d`.
    pub fn size_of(form: CompanionForm, m: usize, n: usize, d: usize) -> (usize, usize) {
        match form {
            CompanionForm::First => (m + n * (d - 1), n * d),
            CompanionForm::Second => (m * d, n + m * (d - 1)),
        }
    }

    /// Bit-exact check of the identity / negated identity / zero blocks.
    pub fn has_companion_pattern(&self) -> bool {
        let (m, n, d) = (self.m, self.n, self.d);
        let (rows, cols) = Self::size_of(self.form, m, n, d);
        if self.pencil.rows() != rows || self.pencil.cols() != cols {
            return false;
        }
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (a, b) = (&self.pencil.a, &self.pencil.b);
        match self.form {
            CompanionForm::First => {
                for i in m..rows {
                    for j in 0..cols {
                        let bi = (i - m) / n;
                        let expect_a = if j >= n && i - m == j - n { one } else { zero };
                        let expect_b = if j / n == bi && (i - m) % n == j % n {
                            -one
                        } else {
                            zero
                        };
                        if a[(i, j)] != expect_a || b[(i, j)] != expect_b {
                            return false;
                        }
                    }
                }
                (0..m).all(|i| (n..cols).all(|j| a[(i, j)] == zero))
            }
            CompanionForm::Second => {
                for i in 0..rows {
                    for j in n..cols {
                        let expect_a = if i >= m && i - m == j - n { one } else { zero };
                        let expect_b = if i / m == (j - n) / m && i % m == (j - n) % m {
                            -one
                        } else {
                            zero
                        };
                        if a[(i, j)] != expect_a || b[(i, j)] != expect_b {
                            return false;
                        }
                    }
                }
                (m..rows).all(|i| (0..n).all(|j| a[(i, j)] == zero))
            }
        }
    }

    /// Reads the polynomial coefficients back out of a first or second companion form.
    pub fn source_polynomial(&self) -> Result<MatrixPolynomial> {
        let (m, n, d) = (self.m, self.n, self.d);
        let mut coeffs = vec![CMatrix::zeros(m, n); d + 1];
        match self.form {
            CompanionForm::First => {
                coeffs[d] = self.pencil.a.view((0, 0), (m, n)).into_owned();
                for k in 0..d {
                    coeffs[d - 1 - k] = self.pencil.b.view((0, k * n), (m, n)).into_owned();
                }
            }
            CompanionForm::Second => {
                coeffs[d] = self.pencil.a.view((0, 0), (m, n)).into_owned();
                for k in 0..d {
                    coeffs[d - 1 - k] = self.pencil.b.view((k * m, 0), (m, n)).into_owned();
                }
            }
        }
        MatrixPolynomial::new(m, n, d, coeffs)
    }
}

fn require_positive_grade(p: &MatrixPolynomial) -> Result<()> {
    if p.grade() == 0 {
        return Err(Error::InvalidArgument(
            "companion forms need grade at least 1".into(),
        ));
    }
    Ok(())
}

/// `λ diag(A_d, I_n, ..., I_n) + [A_{d-1} ... A_0; -I_n 0 ...; ...; 0 ... -I_n 0]`.
pub fn first_companion(p: &MatrixPolynomial) -> Result<CompanionPencil> {
    require_positive_grade(p)?;
    let (m, n, d) = (p.rows(), p.cols(), p.grade());
    let (rows, cols) = CompanionPencil::size_of(CompanionForm::First, m, n, d);
    let mut pencil = Pencil::zeros(rows, cols);
    pencil.a.view_mut((0, 0), (m, n)).copy_from(p.leading());
    for k in 0..d {
        pencil
            .b
            .view_mut((0, k * n), (m, n))
            .copy_from(p.coeff(d - 1 - k));
    }
    for k in 0..d - 1 {
        for i in 0..n {
            pencil.a[(m + k * n + i, (k + 1) * n + i)] = Complex64::new(1.0, 0.0);
            pencil.b[(m + k * n + i, k * n + i)] = Complex64::new(-1.0, 0.0);
        }
    }
    Ok(CompanionPencil {
        pencil,
        form: CompanionForm::First,
        m,
        n,
        d,
    })
}

/// `λ diag(A_d, I_m, ..., I_m) + [A_{d-1} -I_m ...; A_{d-2} 0 ...; ...; A_0 0 ... 0]`.
pub fn second_companion(p: &MatrixPolynomial) -> Result<CompanionPencil> {
    require_positive_grade(p)?;
    let (m, n, d) = (p.rows(), p.cols(), p.grade());
    let (rows, cols) = CompanionPencil::size_of(CompanionForm::Second, m, n, d);
    let mut pencil = Pencil::zeros(rows, cols);
    pencil.a.view_mut((0, 0), (m, n)).copy_from(p.leading());
    for k in 0..d {
        pencil
            .b
            .view_mut((k * m, 0), (m, n))
            .copy_from(p.coeff(d - 1 - k));
    }
    for k in 0..d - 1 {
        for i in 0..m {
            pencil.a[(m + k * m + i, n + k * m + i)] = Complex64::new(1.0, 0.0);
            pencil.b[(k * m + i, n + k * m + i)] = Complex64::new(-1.0, 0.0);
        }
    }
    Ok(CompanionPencil {
        pencil,
        form: CompanionForm::Second,
        m,
        n,
        d,
    })
}

/// I.i.d. standard complex Gaussian coefficients.
pub fn random_polynomial(m: usize, n: usize, d: usize, seed: u64) -> Result<MatrixPolynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..=d).map(|_| random_matrix(m, n, &mut rng)).collect();
    MatrixPolynomial::new(m, n, d, coeffs)
}

/// `E(λ) F(λ)` with `E` an `m x r` polynomial whose column `j` has grade
/// `col_degrees[j]` and `F` an `r x n` polynomial whose row `j` has grade
/// `d - col_degrees[j]`. The result has grade `d` and rank at most `r`.
pub fn random_bounded_rank(
    m: usize,
    n: usize,
    r: usize,
    d: usize,
    col_degrees: &[usize],
    seed: u64,
) -> Result<MatrixPolynomial> {
    if r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank bound {r} exceeds min({m}, {n})"
        )));
    }
    if col_degrees.len() != r {
        return Err(Error::InvalidArgument(format!(
            "expected {r} column degrees, got {}",
            col_degrees.len()
        )));
    }
    if let Some(bad) = col_degrees.iter().find(|&&dj| dj > d) {
        return Err(Error::InvalidArgument(format!(
            "column degree {bad} outside 0..={d}"
        )));
    }
    if r == 0 {
        return MatrixPolynomial::zeros(m, n, d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = vec![CMatrix::zeros(m, r); d + 1];
    for (j, &dj) in col_degrees.iter().enumerate() {
        for ek in e.iter_mut().take(dj + 1) {
            let col = random_matrix(m, 1, &mut rng);
            ek.set_column(j, &col.column(0));
        }
    }
    let mut f = vec![CMatrix::zeros(r, n); d + 1];
    for (j, &dj) in col_degrees.iter().enumerate() {
        for fk in f.iter_mut().take(d - dj + 1) {
            let row = random_matrix(1, n, &mut rng);
            fk.set_row(j, &row.row(0));
        }
    }
    // E and F carry grade d each so that their product can be truncated back to d.
    let e = MatrixPolynomial::new(m, r, d, e)?;
    let f = MatrixPolynomial::new(r, n, d, f)?;
    let full = e.mul(&f)?;
    MatrixPolynomial::new(m, n, d, full.coeffs[..=d].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(v: &[f64]) -> Vec<CMatrix> {
        v.iter()
            .map(|&x| CMatrix::from_element(1, 1, c(x, 0.0)))
            .collect()
    }

    #[test]
    fn monomial_has_degree_one() {
        let p = MatrixPolynomial::new(1, 1, 1, scalar(&[0.0, 1.0])).unwrap();
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.evaluate(c(3.0, 0.0))[(0, 0)], c(3.0, 0.0));
    }

    #[test]
    fn grade_exceeds_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a0 = random_matrix(2, 2, &mut rng);
        let a1 = random_matrix(2, 2, &mut rng);
        let p = MatrixPolynomial::new(2, 2, 2, vec![a0.clone(), a1, CMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(p.grade(), 2);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.evaluate(c(0.0, 0.0)), a0);
        assert_eq!(MatrixPolynomial::zeros(2, 3, 2).unwrap().degree(), None);
    }

    #[test]
    fn shape_errors() {
        let bad = vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 3)];
        assert!(matches!(
            MatrixPolynomial::new(2, 2, 1, bad),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            MatrixPolynomial::new(2, 2, 2, vec![CMatrix::zeros(2, 2)]),
            Err(Error::Shape(_))
        ));
        let p = MatrixPolynomial::zeros(2, 2, 1).unwrap();
        let q = MatrixPolynomial::zeros(2, 2, 2).unwrap();
        assert!(p.distance(&q).is_err());
    }

    #[test]
    fn row_polynomial_evaluation_and_reversal() {
        // [[λ, 1]]
        let a0 = CMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(1.0, 0.0)]);
        let a1 = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let p = MatrixPolynomial::new(1, 2, 1, vec![a0.clone(), a1.clone()]).unwrap();
        let v = p.evaluate(c(-1.0, 0.0));
        assert_eq!(
            v,
            CMatrix::from_row_slice(1, 2, &[c(-1.0, 0.0), c(1.0, 0.0)])
        );
        let rev = p.reversal();
        assert_eq!(rev.coeffs(), &[a1, a0]);
        assert_eq!(rev.reversal(), p);
    }

    #[test]
    fn monomial_norm_and_distance() {
        let p = MatrixPolynomial::new(1, 1, 1, scalar(&[0.0, 1.0])).unwrap();
        let z = MatrixPolynomial::zeros(1, 1, 1).unwrap();
        assert_eq!(p.distance(&z).unwrap(), 1.0);
        assert_eq!(p.norm(), 1.0);
        assert_eq!(p.distance(&p).unwrap(), 0.0);
    }

    #[test]
    fn scalar_quadratic_companion() {
        let (a0, a1) = (2.5, -0.75);
        let p = MatrixPolynomial::new(1, 1, 2, scalar(&[a0, a1, 1.0])).unwrap();
        let cp = first_companion(&p).unwrap();
        assert_eq!(cp.pencil.a, CMatrix::identity(2, 2));
        let b = CMatrix::from_row_slice(2, 2, &[c(a1, 0.0), c(a0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(cp.pencil.b, b);
        assert!(cp.has_companion_pattern());
    }

    #[test]
    fn companion_sizes_and_patterns() {
        let p = random_polynomial(2, 3, 2, 9).unwrap();
        let c1 = first_companion(&p).unwrap();
        assert_eq!((c1.pencil.rows(), c1.pencil.cols()), (5, 6));
        assert!(c1.has_companion_pattern());
        assert_eq!(c1.source_polynomial().unwrap(), p);
        let c2 = second_companion(&p).unwrap();
        assert_eq!((c2.pencil.rows(), c2.pencil.cols()), (4, 5));
        assert!(c2.has_companion_pattern());
        assert_eq!(c2.source_polynomial().unwrap(), p);

        let mut broken = c1.clone();
        broken.pencil.b[(3, 1)] = c(-0.5, 0.0);
        assert!(!broken.has_companion_pattern());

        let p0 = random_polynomial(2, 2, 0, 1).unwrap();
        assert!(first_companion(&p0).is_err());
        assert!(second_companion(&p0).is_err());
    }

    #[test]
    fn companion_evaluation_matches_block_structure() {
        // det-free check: C(λ) [λ^{d-1} x; ...; x] = [P(λ) x; 0]
        let p = random_polynomial(2, 3, 3, 4).unwrap();
        let cp = first_companion(&p).unwrap();
        let lam = c(0.3, -1.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_matrix(3, 1, &mut rng);
        let mut stacked = CMatrix::zeros(9, 1);
        for k in 0..3 {
            let pw = lam.powi(2 - k as i32);
            stacked.view_mut((3 * k, 0), (3, 1)).copy_from(&(&x * pw));
        }
        let lhs = (&cp.pencil.a * lam + &cp.pencil.b) * stacked;
        let px = p.evaluate(lam) * &x;
        assert!((lhs.view((0, 0), (2, 1)) - px).norm() < 1e-12);
        assert!(lhs.view((2, 0), (6, 1)).norm() < 1e-12);
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let p = random_polynomial(3, 2, 2, 77).unwrap();
        assert_eq!(p, random_polynomial(3, 2, 2, 77).unwrap());
        assert_ne!(p, random_polynomial(3, 2, 2, 78).unwrap());
    }

    #[test]
    fn gaussian_norm_scales_with_dimension() {
        let (m, n, d) = (3, 4, 2);
        let trials = 1000;
        let mean: f64 = (0..trials)
            .map(|s| random_polynomial(m, n, d, s).unwrap().norm())
            .sum::<f64>()
            / trials as f64;
        let expected = (((d + 1) * m * n) as f64).sqrt();
        assert!((mean / expected - 1.0).abs() < 0.1, "mean norm {mean}");
    }

    #[test]
    fn bounded_rank_argument_checks() {
        assert!(random_bounded_rank(2, 3, 3, 2, &[1, 1, 1], 0).is_err());
        assert!(random_bounded_rank(2, 3, 1, 2, &[3], 0).is_err());
        assert!(random_bounded_rank(2, 3, 1, 2, &[1, 1], 0).is_err());
        let p = random_bounded_rank(2, 3, 1, 2, &[1], 0).unwrap();
        assert_eq!(p.grade(), 2);
        assert_eq!(p.degree(), Some(2));
        // rank one at every point: 2x2 minors vanish
        let v = p.evaluate(c(0.4, 0.9));
        let minor = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
        assert!(minor.norm() < 1e-12);
    }

    #[test]
    fn json_layout() {
        let p = MatrixPolynomial::new(1, 1, 1, scalar(&[0.5, -2.0])).unwrap();
        assert_eq!(
            p.to_json(),
            r#"{"m":1,"n":1,"grade":1,"coeffs":[[[[0.5,0.0]]],[[[-2.0,0.0]]]]}"#
        );
        assert!(
            MatrixPolynomial::from_json(r#"{"m":1,"n":2,"grade":0,"coeffs":[[[[1,0]]]]}"#).is_err()
        );
        assert!(MatrixPolynomial::from_json("{not json").is_err());
    }

    fn arb_poly() -> impl Strategy<Value = MatrixPolynomial> {
        (1usize..4, 1usize..4, 0usize..4, any::<u64>())
            .prop_map(|(m, n, d, seed)| random_polynomial(m, n, d, seed).unwrap())
    }

    proptest! {
        #[test]
        fn json_roundtrip(p in arb_poly()) {
            prop_assert_eq!(MatrixPolynomial::from_json(&p.to_json()).unwrap(), p);
        }

        #[test]
        fn reversal_law(p in arb_poly(), r in 0.5f64..2.0, theta in 0.0f64..6.283) {
            let lam = Complex64::from_polar(r, theta);
            let lhs = p.reversal().evaluate(lam);
            let rhs = p.evaluate(Complex64::new(1.0, 0.0) / lam) * lam.powi(p.grade() as i32);
            prop_assert!((&lhs - &rhs).norm() <= 1e-10 * rhs.norm().max(1e-300));
            prop_assert_eq!(p.reversal().reversal(), p);
        }

        #[test]
        fn metric_axioms(s in any::<u64>()) {
            let p = random_polynomial(2, 3, 2, s).unwrap();
            let q = random_polynomial(2, 3, 2, s.wrapping_add(1)).unwrap();
            let r = random_polynomial(2, 3, 2, s.wrapping_add(2)).unwrap();
            let pq = p.distance(&q).unwrap();
            prop_assert_eq!(p.distance(&p).unwrap(), 0.0);
            prop_assert!((pq - q.distance(&p).unwrap()).abs() < 1e-12);
            prop_assert!(pq <= p.distance(&r).unwrap() + r.distance(&q).unwrap() + 1e-12);
        }

        #[test]
        fn first_companion_is_isometric(s in any::<u64>(), d in 1usize..4) {
            let p = random_polynomial(2, 3, d, s).unwrap();
            let q = random_polynomial(2, 3, d, s ^ 0xabcdef).unwrap();
            let cp = first_companion(&p).unwrap();
            let cq = first_companion(&q).unwrap();
            let dp = p.distance(&q).unwrap();
            prop_assert!((cp.pencil.distance(&cq.pencil).unwrap() - dp).abs() <= 1e-12 * dp);
            prop_assert!(cp.has_companion_pattern());
        }
    }
}
