//! Complete eigenstructure records and Kronecker canonical form block lists.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::poly::Pencil;

/// Partial multiplicities of one finite eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteEigen {
    pub eigenvalue: Complex64,
    /// Sorted ascending, all positive.
    pub multiplicities: Vec<usize>,
}

/// Complete eigenstructure of an `m x n` matrix polynomial of a given grade.
///
/// Multisets are kept sorted ascending and finite eigenvalues are ordered
/// lexicographically by `(re, im)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureSignature {
    pub m: usize,
    pub n: usize,
    pub grade: usize,
    pub rank: usize,
    pub right: Vec<usize>,
    pub left: Vec<usize>,
    pub finite: Vec<FiniteEigen>,
    pub infinite: Vec<usize>,
}

impl StructureSignature {
    /// Builds a signature, sorting every multiset into canonical order.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        n: usize,
        grade: usize,
        rank: usize,
        mut right: Vec<usize>,
        mut left: Vec<usize>,
        mut finite: Vec<FiniteEigen>,
        mut infinite: Vec<usize>,
    ) -> Self {
        right.sort_unstable();
        left.sort_unstable();
        infinite.sort_unstable();
        for f in &mut finite {
            f.multiplicities.sort_unstable();
        }
        finite.sort_by(|a, b| cmp_complex(&a.eigenvalue, &b.eigenvalue));
        Self {
            m,
            n,
            grade,
            rank,
            right,
            left,
            finite,
            infinite,
        }
    }

    /// Signature with minimal indices only and no elementary divisors.
    pub fn singular_only(
        m: usize,
        n: usize,
        grade: usize,
        rank: usize,
        right: Vec<usize>,
        left: Vec<usize>,
    ) -> Self {
        Self::new(m, n, grade, rank, right, left, Vec::new(), Vec::new())
    }

    pub fn has_elementary_divisors(&self) -> bool {
        !self.finite.is_empty() || !self.infinite.is_empty()
    }

    pub fn finite_degree(&self) -> usize {
        self.finite
            .iter()
            .flat_map(|f| f.multiplicities.iter())
            .sum()
    }

    pub fn index_sum(&self) -> usize {
        self.right.iter().sum::<usize>()
            + self.left.iter().sum::<usize>()
            + self.finite_degree()
            + self.infinite.iter().sum::<usize>()
    }

    /// `rank * grade` minus the total of minimal indices and elementary divisor
    /// degrees. Zero for every complete eigenstructure.
    pub fn balance_residual(&self) -> i64 {
        (self.rank * self.grade) as i64 - self.index_sum() as i64
    }

    /// Counts of minimal indices agree with the rank.
    pub fn counts_consistent(&self) -> bool {
        self.rank <= self.m.min(self.n)
            && self.right.len() == self.n - self.rank
            && self.left.len() == self.m - self.rank
    }

    /// Equality with finite eigenvalues compared up to `eig_tol * (1 + |λ|)`.
    pub fn matches(&self, other: &Self, eig_tol: f64) -> bool {
        self.m == other.m
            && self.n == other.n
            && self.grade == other.grade
            && self.rank == other.rank
            && self.right == other.right
            && self.left == other.left
            && self.infinite == other.infinite
            && self.finite.len() == other.finite.len()
            && self.finite_pairs_up(other, eig_tol)
    }

    // Greedy pairing; eigenvalues are assumed separated by far more than eig_tol.
    fn finite_pairs_up(&self, other: &Self, eig_tol: f64) -> bool {
        let mut used = vec![false; other.finite.len()];
        self.finite.iter().all(|a| {
            let hit = other.finite.iter().enumerate().position(|(i, b)| {
                !used[i]
                    && a.multiplicities == b.multiplicities
                    && (a.eigenvalue - b.eigenvalue).norm() <= eig_tol * (1.0 + a.eigenvalue.norm())
            });
            hit.map(|i| used[i] = true).is_some()
        })
    }

    pub fn to_record(&self) -> SignatureRecord {
        SignatureRecord {
            rank: self.rank,
            right: self.right.clone(),
            left: self.left.clone(),
            finite: self
                .finite
                .iter()
                .map(|f| FiniteRecord {
                    eig: [f.eigenvalue.re, f.eigenvalue.im],
                    mults: f.multiplicities.clone(),
                })
                .collect(),
            infinite: self.infinite.clone(),
        }
    }

    pub fn from_record(m: usize, n: usize, grade: usize, rec: SignatureRecord) -> Self {
        let finite = rec
            .finite
            .into_iter()
            .map(|f| FiniteEigen {
                eigenvalue: Complex64::new(f.eig[0], f.eig[1]),
                multiplicities: f.mults,
            })
            .collect();
        Self::new(
            m,
            n,
            grade,
            rec.rank,
            rec.right,
            rec.left,
            finite,
            rec.infinite,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("signature serializes")
    }
}

pub(crate) fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Wire form of a signature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignatureRecord {
    pub rank: usize,
    pub right: Vec<usize>,
    pub left: Vec<usize>,
    pub finite: Vec<FiniteRecord>,
    pub infinite: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteRecord {
    pub eig: [f64; 2],
    pub mults: Vec<usize>,
}

/// One Kronecker block.
///
/// `Jordan { mu, size }` is `E_j(μ) = λ I_j + J_j(μ)`, whose eigenvalue is `-μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KcfBlock {
    Jordan {
        mu: Complex64,
        size: usize,
    },
    JordanInf {
        size: usize,
    },
    /// `L_k`, a `k x (k+1)` block.
    RightSingular(usize),
    /// `L_k^T`, a `(k+1) x k` block.
    LeftSingular(usize),
}

impl KcfBlock {
    pub fn rows(&self) -> usize {
        match *self {
            KcfBlock::Jordan { size, .. } | KcfBlock::JordanInf { size } => size,
            KcfBlock::RightSingular(k) => k,
            KcfBlock::LeftSingular(k) => k + 1,
        }
    }

    pub fn cols(&self) -> usize {
        match *self {
            KcfBlock::Jordan { size, .. } | KcfBlock::JordanInf { size } => size,
            KcfBlock::RightSingular(k) => k + 1,
            KcfBlock::LeftSingular(k) => k,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            KcfBlock::RightSingular(_) => 0,
            KcfBlock::LeftSingular(_) => 1,
            KcfBlock::Jordan { .. } => 2,
            KcfBlock::JordanInf { .. } => 3,
        }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.kind_rank()
            .cmp(&other.kind_rank())
            .then_with(|| match (self, other) {
                (KcfBlock::RightSingular(a), KcfBlock::RightSingular(b))
                | (KcfBlock::LeftSingular(a), KcfBlock::LeftSingular(b)) => b.cmp(a),
                (KcfBlock::JordanInf { size: a }, KcfBlock::JordanInf { size: b }) => a.cmp(b),
                (KcfBlock::Jordan { mu: a, size: sa }, KcfBlock::Jordan { mu: b, size: sb }) => {
                    cmp_complex(a, b).then(sa.cmp(sb))
                }
                _ => Ordering::Equal,
            })
    }

    /// `(A, B)` with the block equal to `λA + B`.
    fn parts(&self) -> (CMatrix, CMatrix) {
        let one = Complex64::new(1.0, 0.0);
        let (r, c) = (self.rows(), self.cols());
        let mut a = CMatrix::zeros(r, c);
        let mut b = CMatrix::zeros(r, c);
        match *self {
            KcfBlock::Jordan { mu, size } => {
                for i in 0..size {
                    a[(i, i)] = one;
                    b[(i, i)] = mu;
                    if i + 1 < size {
                        b[(i, i + 1)] = one;
                    }
                }
            }
            KcfBlock::JordanInf { size } => {
                for i in 0..size {
                    b[(i, i)] = one;
                    if i + 1 < size {
                        a[(i, i + 1)] = one;
                    }
                }
            }
            // G_k = [I_k 0], F_k = [0 I_k]
            KcfBlock::RightSingular(k) => {
                for i in 0..k {
                    a[(i, i)] = one;
                    b[(i, i + 1)] = one;
                }
            }
            KcfBlock::LeftSingular(k) => {
                for i in 0..k {
                    a[(i, i)] = one;
                    b[(i + 1, i)] = one;
                }
            }
        }
        (a, b)
    }
}

/// Multiset of Kronecker blocks describing a strict equivalence orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct KcfSpec {
    blocks: Vec<KcfBlock>,
}

impl KcfSpec {
    pub fn new(mut blocks: Vec<KcfBlock>) -> Self {
        blocks.sort_by(|a, b| a.canonical_cmp(b));
        Self { blocks }
    }

    pub fn blocks(&self) -> &[KcfBlock] {
        &self.blocks
    }

    pub fn rows(&self) -> usize {
        self.blocks.iter().map(KcfBlock::rows).sum()
    }

    pub fn cols(&self) -> usize {
        self.blocks.iter().map(KcfBlock::cols).sum()
    }

    /// Normal rank of the pencil: every block except the extra column of `L_k`
    /// and the extra row of `L_k^T` contributes full rank.
    pub fn rank(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match *b {
                KcfBlock::RightSingular(k) | KcfBlock::LeftSingular(k) => k,
                KcfBlock::Jordan { size, .. } | KcfBlock::JordanInf { size } => size,
            })
            .sum()
    }

    /// Sizes of `L_k` blocks, ascending.
    pub fn right_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .blocks
            .iter()
            .filter_map(|b| match b {
                KcfBlock::RightSingular(k) => Some(*k),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    pub fn left_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .blocks
            .iter()
            .filter_map(|b| match b {
                KcfBlock::LeftSingular(k) => Some(*k),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    /// Converts a pencil signature into blocks. Eigenvalue `α` becomes `E_j(-α)`.
    pub fn from_signature(sig: &StructureSignature) -> Self {
        let mut blocks: Vec<KcfBlock> = Vec::new();
        blocks.extend(sig.right.iter().map(|&k| KcfBlock::RightSingular(k)));
        blocks.extend(sig.left.iter().map(|&k| KcfBlock::LeftSingular(k)));
        for f in &sig.finite {
            blocks.extend(f.multiplicities.iter().map(|&size| KcfBlock::Jordan {
                mu: -f.eigenvalue,
                size,
            }));
        }
        blocks.extend(
            sig.infinite
                .iter()
                .map(|&size| KcfBlock::JordanInf { size }),
        );
        Self::new(blocks)
    }

    /// The signature of the pencil these blocks describe (grade 1).
    pub fn signature(&self, eig_tol: f64) -> StructureSignature {
        let mut finite: Vec<FiniteEigen> = Vec::new();
        for b in &self.blocks {
            if let KcfBlock::Jordan { mu, size } = *b {
                let eig = -mu;
                match finite
                    .iter_mut()
                    .find(|f| (f.eigenvalue - eig).norm() <= eig_tol * (1.0 + eig.norm()))
                {
                    Some(f) => f.multiplicities.push(size),
                    None => finite.push(FiniteEigen {
                        eigenvalue: eig,
                        multiplicities: vec![size],
                    }),
                }
            }
        }
        let infinite = self
            .blocks
            .iter()
            .filter_map(|b| match b {
                KcfBlock::JordanInf { size } => Some(*size),
                _ => None,
            })
            .collect();
        StructureSignature::new(
            self.rows(),
            self.cols(),
            1,
            self.rank(),
            self.right_indices(),
            self.left_indices(),
            finite,
            infinite,
        )
    }

    /// Exact block-diagonal direct sum of the canonical blocks.
    pub fn materialize(&self) -> Pencil {
        let mut out = Pencil::zeros(self.rows(), self.cols());
        let (mut r0, mut c0) = (0, 0);
        for b in &self.blocks {
            let (a, bb) = b.parts();
            let (r, c) = (b.rows(), b.cols());
            out.a.view_mut((r0, c0), (r, c)).copy_from(&a);
            out.b.view_mut((r0, c0), (r, c)).copy_from(&bb);
            r0 += r;
            c0 += c;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn l1_materializes_to_lambda_one() {
        let p = KcfSpec::new(vec![KcfBlock::RightSingular(1)]).materialize();
        assert_eq!(p.a, CMatrix::from_row_slice(1, 2, &[c(1.0), c(0.0)]));
        assert_eq!(p.b, CMatrix::from_row_slice(1, 2, &[c(0.0), c(1.0)]));
    }

    #[test]
    fn zero_size_blocks_add_empty_rows_and_columns() {
        let spec = KcfSpec::new(vec![
            KcfBlock::RightSingular(0),
            KcfBlock::LeftSingular(0),
            KcfBlock::Jordan {
                mu: c(2.0),
                size: 2,
            },
        ]);
        assert_eq!((spec.rows(), spec.cols()), (3, 3));
        assert_eq!(spec.rank(), 2);
        let p = spec.materialize();
        assert_eq!(p.rows(), 3);
        let sig = spec.signature(1e-12);
        assert_eq!(sig.right, vec![0]);
        assert_eq!(sig.left, vec![0]);
        assert_eq!(sig.finite[0].eigenvalue, c(-2.0));
        assert_eq!(sig.finite[0].multiplicities, vec![2]);
        assert_eq!(sig.balance_residual(), 0);
    }

    #[test]
    fn infinite_block_layout() {
        let p = KcfSpec::new(vec![KcfBlock::JordanInf { size: 2 }]).materialize();
        assert_eq!(p.b, CMatrix::identity(2, 2));
        assert_eq!(p.a[(0, 1)], c(1.0));
        assert_eq!(p.a[(0, 0)], c(0.0));
    }

    #[test]
    fn signature_roundtrip_through_blocks() {
        let sig = StructureSignature::new(4, 5, 1, 3, vec![2, 0], vec![1], vec![], vec![]);
        assert_eq!(sig.right, vec![0, 2]);
        let spec = KcfSpec::from_signature(&sig);
        assert_eq!((spec.rows(), spec.cols()), (4, 5));
        assert_eq!(spec.signature(1e-12), sig);
    }

    #[test]
    fn record_layout() {
        let sig = StructureSignature::new(
            2,
            2,
            2,
            2,
            vec![],
            vec![],
            vec![
                FiniteEigen {
                    eigenvalue: Complex64::new(1.0, -1.0),
                    multiplicities: vec![2, 1],
                },
                FiniteEigen {
                    eigenvalue: Complex64::new(0.0, 3.0),
                    multiplicities: vec![1],
                },
            ],
            vec![],
        );
        assert_eq!(
            sig.to_json(),
            r#"{"rank":2,"right":[],"left":[],"finite":[{"eig":[0.0,3.0],"mults":[1]},{"eig":[1.0,-1.0],"mults":[1,2]}],"infinite":[]}"#
        );
        let back = StructureSignature::from_record(2, 2, 2, sig.to_record());
        assert_eq!(back, sig);
    }
}
