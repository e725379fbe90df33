//! Generic eigenstructures of bounded-rank matrix polynomials.
//!
//! For `m x n` polynomials of grade `d` and rank at most `r < min(m, n)` there
//! are `rd + 1` generic families `K_a`, `a = 0..=rd`, none with elementary
//! divisors. With `α = ⌊a/(n-r)⌋`, `s = a mod (n-r)`,
//! `β = ⌊(rd-a)/(m-r)⌋`, `t = (rd-a) mod (m-r)`:
//!
//! * right minimal indices: `α+1` repeated `s` times, `α` repeated `n-r-s` times;
//! * left minimal indices: `β+1` repeated `t` times, `β` repeated `m-r-t` times.
//!
//! Everything here is exact integer arithmetic except [`realize`], which
//! samples a polynomial and checks it with the numerical eigenstructure code.

use serde_json::{json, Value};

use crate::eigen::{complete_eigenstructure, numerical_rank};
use crate::error::{Error, Result};
use crate::linalg::ToleranceProfile;
use crate::poly::{random_bounded_rank, random_polynomial, MatrixPolynomial};
use crate::structure::{KcfBlock, KcfSpec, StructureSignature};

/// `(q + 1)` repeated `rem` times followed by `q` repeated `count - rem` times,
/// returned ascending.
fn balanced_indices(total: usize, count: usize) -> (usize, usize, Vec<usize>) {
    let q = total / count;
    let rem = total % count;
    let mut v = vec![q; count - rem];
    v.extend(std::iter::repeat_n(q + 1, rem));
    (q, rem, v)
}

/// One generic family `K_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericStructure {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub a: usize,
    pub alpha: usize,
    pub s: usize,
    pub beta: usize,
    pub t: usize,
    pub codim: i64,
    pub signature: StructureSignature,
}

impl GenericStructure {
    pub fn to_json_value(&self) -> Value {
        let mut v = serde_json::to_value(self.signature.to_record()).expect("record serializes");
        let obj = v.as_object_mut().expect("record is an object");
        obj.insert("a".into(), json!(self.a));
        obj.insert("alpha".into(), json!(self.alpha));
        obj.insert("s".into(), json!(self.s));
        obj.insert("beta".into(), json!(self.beta));
        obj.insert("t".into(), json!(self.t));
        obj.insert("codim".into(), json!(self.codim));
        v
    }
}

fn check_bounded_rank(m: usize, n: usize, r: usize, d: usize) -> Result<()> {
    if m < 2 || n < 2 {
        return Err(Error::Hypothesis(format!("need m, n >= 2 (got {m}x{n})")));
    }
    if d < 1 {
        return Err(Error::Hypothesis("need d >= 1".into()));
    }
    if r < 1 || r >= m.min(n) {
        return Err(Error::Hypothesis(format!(
            "need 1 <= r <= min(m, n) - 1 = {} (got r = {r}); use the full-rank families for r = min(m, n)",
            m.min(n) - 1
        )));
    }
    Ok(())
}

fn generic_structure(m: usize, n: usize, r: usize, d: usize, a: usize) -> GenericStructure {
    let (alpha, s, right) = balanced_indices(a, n - r);
    let (beta, t, left) = balanced_indices(r * d - a, m - r);
    GenericStructure {
        m,
        n,
        r,
        d,
        a,
        alpha,
        s,
        beta,
        t,
        codim: codim_simplified(m, n, r, d, a),
        signature: StructureSignature::singular_only(m, n, d, r, right, left),
    }
}

/// The `rd + 1` generic families for `m x n`, grade `d`, rank at most `r`,
/// indexed by `a = 0..=rd`.
pub fn generic_structures(m: usize, n: usize, r: usize, d: usize) -> Result<Vec<GenericStructure>> {
    check_bounded_rank(m, n, r, d)?;
    Ok((0..=r * d)
        .map(|a| generic_structure(m, n, r, d, a))
        .collect())
}

pub fn generic_structure_at(
    m: usize,
    n: usize,
    r: usize,
    d: usize,
    a: usize,
) -> Result<GenericStructure> {
    check_bounded_rank(m, n, r, d)?;
    if a > r * d {
        return Err(Error::Hypothesis(format!(
            "need 0 <= a <= rd = {} (got {a})",
            r * d
        )));
    }
    Ok(generic_structure(m, n, r, d, a))
}

/// Generic structure when the rank bound is `min(m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub enum FullRankGeneric {
    /// `m < n`: right indices `α+1` (×s) and `α` with `α = ⌊md/(n-m)⌋`.
    RightSingular {
        m: usize,
        n: usize,
        d: usize,
        alpha: usize,
        s: usize,
        signature: StructureSignature,
    },
    /// `m > n`: left indices `β+1` (×t) and `β` with `β = ⌊nd/(m-n)⌋`.
    LeftSingular {
        m: usize,
        n: usize,
        d: usize,
        beta: usize,
        t: usize,
        signature: StructureSignature,
    },
    /// `m = n`: regular with `nd` simple eigenvalues; a class, not one signature.
    Regular { n: usize, d: usize },
}

impl FullRankGeneric {
    pub fn signature(&self) -> Option<&StructureSignature> {
        match self {
            FullRankGeneric::RightSingular { signature, .. }
            | FullRankGeneric::LeftSingular { signature, .. } => Some(signature),
            FullRankGeneric::Regular { .. } => None,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        match *self {
            FullRankGeneric::RightSingular { m, n, d, .. }
            | FullRankGeneric::LeftSingular { m, n, d, .. } => (m, n, d),
            FullRankGeneric::Regular { n, d } => (n, n, d),
        }
    }

    /// Sum of right minimal indices of the family.
    pub fn a(&self) -> usize {
        match self {
            FullRankGeneric::RightSingular { signature, .. } => signature.right.iter().sum(),
            _ => 0,
        }
    }

    /// True when `sig` belongs to this generic family.
    pub fn accepts(&self, sig: &StructureSignature) -> bool {
        match self {
            FullRankGeneric::RightSingular { signature, .. }
            | FullRankGeneric::LeftSingular { signature, .. } => sig == signature,
            FullRankGeneric::Regular { n, d } => {
                sig.m == *n
                    && sig.n == *n
                    && sig.rank == *n
                    && sig.right.is_empty()
                    && sig.left.is_empty()
                    && sig.infinite.is_empty()
                    && sig.finite.len() == n * d
                    && sig.finite.iter().all(|f| f.multiplicities == [1])
            }
        }
    }

    pub fn to_json_value(&self) -> Value {
        match self {
            FullRankGeneric::RightSingular {
                alpha,
                s,
                signature,
                ..
            } => {
                let mut v = serde_json::to_value(signature.to_record()).expect("record serializes");
                let obj = v.as_object_mut().expect("object");
                obj.insert("a".into(), json!(self.a()));
                obj.insert("alpha".into(), json!(alpha));
                obj.insert("s".into(), json!(s));
                obj.insert("codim".into(), json!(0));
                v
            }
            FullRankGeneric::LeftSingular {
                beta, t, signature, ..
            } => {
                let mut v = serde_json::to_value(signature.to_record()).expect("record serializes");
                let obj = v.as_object_mut().expect("object");
                obj.insert("a".into(), json!(0));
                obj.insert("beta".into(), json!(beta));
                obj.insert("t".into(), json!(t));
                obj.insert("codim".into(), json!(0));
                v
            }
            FullRankGeneric::Regular { n, d } => json!({
                "rank": n,
                "regular": true,
                "simple_eigenvalues": n * d,
                "codim": 0,
            }),
        }
    }
}

pub fn generic_full_rank(m: usize, n: usize, d: usize) -> Result<FullRankGeneric> {
    if m == 0 || n == 0 || d == 0 {
        return Err(Error::Hypothesis(format!(
            "need positive m, n, d (got {m}, {n}, {d})"
        )));
    }
    Ok(if m < n {
        let (alpha, s, right) = balanced_indices(m * d, n - m);
        FullRankGeneric::RightSingular {
            m,
            n,
            d,
            alpha,
            s,
            signature: StructureSignature::singular_only(m, n, d, m, right, Vec::new()),
        }
    } else if m > n {
        let (beta, t, left) = balanced_indices(n * d, m - n);
        FullRankGeneric::LeftSingular {
            m,
            n,
            d,
            beta,
            t,
            signature: StructureSignature::singular_only(m, n, d, n, Vec::new(), left),
        }
    } else {
        FullRankGeneric::Regular { n, d }
    })
}

/// One of the `r1 + 1` generic KCFs of `m1 x n1` pencils with rank at most `r1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PencilGenericStructure {
    pub m1: usize,
    pub n1: usize,
    pub r1: usize,
    pub a1: usize,
    pub alpha1: usize,
    pub s1: usize,
    pub beta1: usize,
    pub t1: usize,
    pub kcf: KcfSpec,
}

pub fn generic_pencil_structures(
    m1: usize,
    n1: usize,
    r1: usize,
) -> Result<Vec<PencilGenericStructure>> {
    check_bounded_rank(m1, n1, r1, 1)?;
    Ok((0..=r1)
        .map(|a1| {
            let (alpha1, s1, right) = balanced_indices(a1, n1 - r1);
            let (beta1, t1, left) = balanced_indices(r1 - a1, m1 - r1);
            let blocks = right
                .into_iter()
                .map(KcfBlock::RightSingular)
                .chain(left.into_iter().map(KcfBlock::LeftSingular))
                .collect();
            PencilGenericStructure {
                m1,
                n1,
                r1,
                a1,
                alpha1,
                s1,
                beta1,
                t1,
                kcf: KcfSpec::new(blocks),
            }
        })
        .collect())
}

/// Generic KCFs of full-rank rectangular pencils (`m1 != n1`).
pub fn generic_full_rank_pencil(m1: usize, n1: usize) -> Result<KcfSpec> {
    match generic_full_rank(m1, n1, 1)? {
        FullRankGeneric::Regular { .. } => Err(Error::Hypothesis(
            "square full-rank pencils have no single generic KCF".into(),
        )),
        other => Ok(KcfSpec::from_signature(
            other.signature().expect("rectangular"),
        )),
    }
}

/// KCF of the first companion form of a polynomial with structure `K`: right
/// indices shift by `d - 1`, left indices are unchanged.
pub fn companion_structure_of(k: &GenericStructure) -> KcfSpec {
    let shift = k.d - 1;
    let blocks = k
        .signature
        .right
        .iter()
        .map(|&e| KcfBlock::RightSingular(e + shift))
        .chain(k.signature.left.iter().map(|&e| KcfBlock::LeftSingular(e)))
        .collect();
    KcfSpec::new(blocks)
}

/// Index `a1` of the generic pencil family equivalent to the first companion
/// form of `K_a`; checks the blockwise equality.
pub fn match_linearization(k: &GenericStructure) -> Result<usize> {
    let (m, n, r, d) = (k.m, k.n, k.r, k.d);
    let m1 = m + n * (d - 1);
    let n1 = n * d;
    let r1 = r + n * (d - 1);
    let a1 = smallest_companion_a1(n, r, d) + k.a;
    let families = generic_pencil_structures(m1, n1, r1)?;
    let family = families
        .get(a1)
        .ok_or_else(|| Error::Internal(format!("a1 = {a1} outside 0..={r1}")))?;
    let own = companion_structure_of(k);
    if own != family.kcf {
        return Err(Error::Internal(format!(
            "companion KCF {own:?} differs from pencil family a1 = {a1}: {:?}",
            family.kcf
        )));
    }
    Ok(a1)
}

/// `n(d-1) + r - rd`: pencil families with smaller `a1` have `L` blocks below
/// size `d - 1` and are the companion form of no polynomial.
pub fn smallest_companion_a1(n: usize, r: usize, d: usize) -> usize {
    n * (d - 1) + r - r * d
}

/// Whether the pencil family `a1` of `(m + n(d-1)) x nd` pencils with rank
/// `r + n(d-1)` is strictly equivalent to a first companion form.
pub fn pencil_family_is_companion(n: usize, r: usize, d: usize, a1: usize) -> bool {
    a1 >= smallest_companion_a1(n, r, d)
}

fn codim_simplified(m: usize, n: usize, r: usize, d: usize, a: usize) -> i64 {
    let (m, n, r, d, a) = (m as i64, n as i64, r as i64, d as i64, a as i64);
    (n - r) * (m * (d + 1) - r) + a * (m - n)
}

fn codim_pencil_level(m: usize, n: usize, r: usize, d: usize, a: usize) -> i64 {
    let (m, n, r, d, a) = (m as i64, n as i64, r as i64, d as i64, a as i64);
    (n - r) * (2 * m + n * (d - 1) - r) + ((n * (d - 1) + r) - r * d + a) * (m - n)
}

/// Both codimension expressions; they agree for every valid input.
pub fn codim_both(m: usize, n: usize, r: usize, d: usize, a: usize) -> Result<(i64, i64)> {
    generic_structure_at(m, n, r, d, a)?;
    Ok((
        codim_simplified(m, n, r, d, a),
        codim_pencil_level(m, n, r, d, a),
    ))
}

/// Codimension of the orbit of `K_a` in the space of grade-`d` polynomials.
pub fn codim_generic(m: usize, n: usize, r: usize, d: usize, a: usize) -> Result<i64> {
    let (simple, pencil) = codim_both(m, n, r, d, a)?;
    if simple != pencil {
        return Err(Error::Internal(format!(
            "codimension formulas disagree: {simple} vs {pencil}"
        )));
    }
    Ok(simple)
}

/// Column degrees of `rd - a` split into `r` parts differing by at most one.
pub fn balanced_split(r: usize, d: usize, a: usize) -> Vec<usize> {
    let total = r * d - a;
    let q = total / r;
    let rem = total % r;
    (0..r).map(|j| if j < rem { q + 1 } else { q }).collect()
}

/// What [`realize`] should produce.
#[derive(Clone, Debug, PartialEq)]
pub enum RealizeTarget {
    Bounded(GenericStructure),
    FullRank(FullRankGeneric),
}

impl RealizeTarget {
    fn dims(&self) -> (usize, usize, usize) {
        match self {
            RealizeTarget::Bounded(k) => (k.m, k.n, k.d),
            RealizeTarget::FullRank(f) => f.dims(),
        }
    }

    fn rank(&self) -> usize {
        match self {
            RealizeTarget::Bounded(k) => k.r,
            RealizeTarget::FullRank(f) => {
                let (m, n, _) = f.dims();
                m.min(n)
            }
        }
    }

    pub fn accepts(&self, sig: &StructureSignature) -> bool {
        match self {
            RealizeTarget::Bounded(k) => *sig == k.signature,
            RealizeTarget::FullRank(f) => f.accepts(sig),
        }
    }
}

/// Seed of the `attempt`-th draw for a realization seed.
fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x2545_f491_4f6c_dd1d))
}

/// Draws a polynomial with the target structure, degree exactly `d`, and a
/// leading coefficient of full possible rank, verifying each draw.
pub fn realize(
    target: &RealizeTarget,
    seed: u64,
    tol: &ToleranceProfile,
) -> Result<MatrixPolynomial> {
    let split = match target {
        RealizeTarget::Bounded(k) => Some(balanced_split(k.r, k.d, k.a)),
        RealizeTarget::FullRank(_) => None,
    };
    realize_inner(target, split.as_deref(), seed, tol)
}

/// Like [`realize`] with explicit column degrees summing to `rd - a`.
pub fn realize_with_split(
    k: &GenericStructure,
    split: &[usize],
    seed: u64,
    tol: &ToleranceProfile,
) -> Result<MatrixPolynomial> {
    if split.len() != k.r || split.iter().sum::<usize>() != k.r * k.d - k.a {
        return Err(Error::InvalidArgument(format!(
            "split {split:?} is not a composition of rd - a = {} into {} parts",
            k.r * k.d - k.a,
            k.r
        )));
    }
    realize_inner(&RealizeTarget::Bounded(k.clone()), Some(split), seed, tol)
}

fn realize_inner(
    target: &RealizeTarget,
    split: Option<&[usize]>,
    seed: u64,
    tol: &ToleranceProfile,
) -> Result<MatrixPolynomial> {
    tol.validate()?;
    let (m, n, d) = target.dims();
    let rank = target.rank();
    let mut last: Option<StructureSignature> = None;
    let mut detail = String::from("no draw attempted");
    for attempt in 0..tol.max_retry {
        let draw_seed = attempt_seed(seed, attempt);
        let p = match split {
            Some(split) => random_bounded_rank(m, n, rank, d, split, draw_seed)?,
            None => random_polynomial(m, n, d, draw_seed)?,
        };
        let lead_rank = numerical_rank(p.leading(), tol)?;
        if lead_rank != rank {
            detail = format!("leading coefficient rank {lead_rank}, expected {rank}");
            continue;
        }
        match complete_eigenstructure(&p, &tol.with_seed(draw_seed ^ tol.seed)) {
            Ok(sig) if target.accepts(&sig) => return Ok(p),
            Ok(sig) => {
                detail = format!("computed signature {}", sig.to_json());
                last = Some(sig);
            }
            Err(e) => detail = e.to_string(),
        }
    }
    Err(Error::RealizationFailed {
        attempts: tol.max_retry,
        detail,
        last: last.map(Box::new),
    })
}
