//! Monte-Carlo drivers: genericity sweeps and companion perturbation runs.
//!
//! Trials use seeds `seed + trial` and run in parallel; results are collected
//! in trial order, so output does not depend on scheduling.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::complete_eigenstructure;
use crate::error::{Error, Result};
use crate::generic::{balanced_split, generic_full_rank, generic_structures};
use crate::linalg::ToleranceProfile;
use crate::poly::{first_companion, random_bounded_rank, random_polynomial};
use crate::recovery::{companion_recovery, random_unit_pencil};
use crate::structure::{SignatureRecord, StructureSignature};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub d: usize,
    /// Column degrees for every draw; `None` draws them uniformly per trial.
    pub split: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    /// Sample dense polynomials and classify against the full-rank family.
    pub full_rank: bool,
}

impl SweepConfig {
    /// Balanced column degrees aimed at the family `a`.
    pub fn targeting(
        m: usize,
        n: usize,
        r: usize,
        d: usize,
        a: usize,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self {
            m,
            n,
            r,
            d,
            split: Some(balanced_split(r, d, a)),
            trials,
            seed,
            full_rank: false,
        }
    }
}

/// Outcome of one sweep trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub trial: usize,
    /// Matched family, `None` when unmatched or failed.
    pub a: Option<usize>,
    pub right: Vec<usize>,
    pub left: Vec<usize>,
    /// `None` when the analysis failed before a signature was assembled.
    pub residual_balance: Option<i64>,
    pub failure: Option<String>,
    pub signature: Option<SignatureRecord>,
}

/// An analyzed trial whose signature is none of the generic families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnmatchedTrial {
    pub trial: usize,
    pub signature: SignatureRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub histogram: BTreeMap<usize, usize>,
    pub unmatched: usize,
    pub unmatched_details: Vec<UnmatchedTrial>,
    pub failures: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn count(&self, a: usize) -> usize {
        self.histogram.get(&a).copied().unwrap_or(0)
    }

    /// Histogram, unmatched and failures add up to the trial count.
    pub fn is_conserved(&self) -> bool {
        self.histogram.values().sum::<usize>() + self.unmatched + self.failures.len()
            == self.config.trials
    }

    pub fn to_csv(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        let mut out =
            String::from("trial,a_classified,right_indices,left_indices,residual_balance\n");
        for row in &self.rows {
            let a = row.a.map_or(-1, |a| a as i64);
            let residual = row
                .residual_balance
                .map_or_else(|| "NA".to_string(), |r| r.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.trial,
                a,
                join(&row.right),
                join(&row.left),
                residual
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn sweep_row_from_error(trial: usize, e: &Error) -> SweepRow {
    let (right, left, residual) = match e {
        Error::BalanceViolation {
            residual,
            signature,
        } => (
            signature.right.clone(),
            signature.left.clone(),
            Some(*residual),
        ),
        _ => (Vec::new(), Vec::new(), None),
    };
    SweepRow {
        trial,
        a: None,
        right,
        left,
        residual_balance: residual,
        failure: Some(e.to_string()),
        signature: None,
    }
}

/// Samples bounded-rank (or dense) polynomials and classifies their computed
/// signatures against the generic families.
pub fn sweep(config: &SweepConfig, tol: &ToleranceProfile) -> Result<SweepReport> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    tol.validate()?;
    let (m, n, d) = (config.m, config.n, config.d);

    // Classifier: signature -> family index.
    let classify: Box<dyn Fn(&StructureSignature) -> Option<usize> + Sync> = if config.full_rank {
        let family = generic_full_rank(m, n, d)?;
        Box::new(move |sig| family.accepts(sig).then(|| family.a()))
    } else {
        let families = generic_structures(m, n, config.r, d)?;
        if let Some(split) = &config.split {
            // validate once up front
            random_bounded_rank(m, n, config.r, d, split, 0)?;
        }
        Box::new(move |sig| families.iter().position(|k| k.signature == *sig))
    };

    let rows: Vec<SweepRow> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = config.seed.wrapping_add(trial as u64);
            let drawn = if config.full_rank {
                random_polynomial(m, n, d, seed)
            } else {
                let split = config.split.clone().unwrap_or_else(|| {
                    use rand::{Rng, SeedableRng};
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5b17);
                    (0..config.r).map(|_| rng.gen_range(0..=d)).collect()
                });
                random_bounded_rank(m, n, config.r, d, &split, seed)
            };
            let analysis =
                drawn.and_then(|p| complete_eigenstructure(&p, &tol.with_seed(seed ^ tol.seed)));
            match analysis {
                Ok(sig) => SweepRow {
                    trial,
                    a: classify(&sig),
                    right: sig.right.clone(),
                    left: sig.left.clone(),
                    residual_balance: Some(sig.balance_residual()),
                    failure: None,
                    signature: Some(sig.to_record()),
                },
                Err(e) => sweep_row_from_error(trial, &e),
            }
        })
        .collect();

    let mut histogram = BTreeMap::new();
    let mut unmatched_details = Vec::new();
    let mut failures = Vec::new();
    for row in &rows {
        match (&row.failure, row.a) {
            (Some(f), _) => failures.push(format!("trial {}: {f}", row.trial)),
            (None, Some(a)) => *histogram.entry(a).or_insert(0) += 1,
            (None, None) => unmatched_details.push(UnmatchedTrial {
                trial: row.trial,
                signature: row
                    .signature
                    .clone()
                    .expect("analyzed rows carry a signature"),
            }),
        }
    }
    Ok(SweepReport {
        config: config.clone(),
        histogram,
        unmatched: unmatched_details.len(),
        unmatched_details,
        failures,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbConfig {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbReport {
    pub delta: f64,
    pub trials: usize,
    /// Largest `d(C¹_P, C¹_P̃) / d(C¹_P, L)` over successful trials.
    pub max_ratio: f64,
    /// `4 d (1 + ‖P‖_F)` with `‖P‖_F = 1`.
    pub bound: f64,
    /// Largest perturbation for which recovery is guaranteed, `π / (12 d^{3/2})`.
    pub threshold: f64,
    pub above_threshold: bool,
    pub pivot_failures: usize,
    pub failures: Vec<String>,
}

impl PerturbReport {
    pub fn within_bound(&self) -> bool {
        self.max_ratio <= self.bound
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn recovery_threshold(d: usize) -> f64 {
    PI / (12.0 * (d as f64).powf(1.5))
}

/// Perturbs the first companion form of unit-norm random polynomials by
/// `delta` in a random direction and measures how far the recovered
/// polynomial's companion form moved.
pub fn perturb(config: &PerturbConfig, tol: &ToleranceProfile) -> Result<PerturbReport> {
    let PerturbConfig {
        m,
        n,
        d,
        delta,
        trials,
        seed,
    } = *config;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if d == 0 || !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need d >= 1 and delta >= 0 (got d = {d}, delta = {delta})"
        )));
    }
    let threshold = recovery_threshold(d);
    let outcomes: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = seed.wrapping_add(trial as u64);
            let raw = random_polynomial(m, n, d, s)?;
            let p = raw.scale(1.0 / raw.norm());
            let c = first_companion(&p)?.pencil;
            if delta == 0.0 {
                companion_recovery(&c, m, n, d, tol)?;
                return Ok(0.0);
            }
            let e = random_unit_pencil(c.rows(), c.cols(), s ^ 0xe77);
            let scale = Complex64::new(delta, 0.0);
            let l = crate::poly::Pencil {
                a: &c.a + &e.a * scale,
                b: &c.b + &e.b * scale,
            };
            let recovered = companion_recovery(&l, m, n, d, tol)?;
            let moved = first_companion(&recovered)?.pencil.distance(&c)?;
            Ok(moved / c.distance(&l)?)
        })
        .collect();

    let mut max_ratio: f64 = 0.0;
    let mut pivot_failures = 0;
    let mut failures = Vec::new();
    for (trial, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(ratio) => max_ratio = max_ratio.max(ratio),
            Err(e) => {
                if matches!(e, Error::PivotSingular(_)) {
                    pivot_failures += 1;
                }
                failures.push(format!("trial {trial}: {e}"));
            }
        }
    }
    Ok(PerturbReport {
        delta,
        trials,
        max_ratio,
        bound: 4.0 * d as f64 * 2.0,
        threshold,
        above_threshold: delta >= threshold,
        pivot_failures,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targeted_sweep_concentrates() {
        let config = SweepConfig::targeting(2, 3, 1, 2, 1, 20, 100);
        let report = sweep(&config, &ToleranceProfile::default()).unwrap();
        assert!(report.is_conserved());
        assert!(report.count(1) >= 19, "{:?}", report.histogram);
        let csv = report.to_csv();
        assert!(csv.starts_with("trial,a_classified,right_indices,left_indices,residual_balance\n"));
        assert!(csv.contains("\n0,1,0;1,1,0\n"));
    }

    #[test]
    fn unsplit_sweep_is_conserved_and_deterministic() {
        let config = SweepConfig {
            m: 3,
            n: 3,
            r: 2,
            d: 2,
            split: None,
            trials: 12,
            seed: 5,
            full_rank: false,
        };
        let tol = ToleranceProfile::default();
        let a = sweep(&config, &tol).unwrap();
        let b = sweep(&config, &tol).unwrap();
        assert!(a.is_conserved());
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn zero_trials_rejected() {
        let mut config = SweepConfig::targeting(2, 3, 1, 2, 1, 1, 0);
        config.trials = 0;
        assert!(sweep(&config, &ToleranceProfile::default()).is_err());
    }

    #[test]
    fn perturb_zero_delta() {
        let report = perturb(
            &PerturbConfig {
                m: 2,
                n: 3,
                d: 2,
                delta: 0.0,
                trials: 3,
                seed: 1,
            },
            &ToleranceProfile::default(),
        )
        .unwrap();
        assert_eq!(report.max_ratio, 0.0);
        assert!(report.within_bound());
        assert!(!report.above_threshold);
    }

    #[test]
    fn perturb_above_threshold_still_reports() {
        let report = perturb(
            &PerturbConfig {
                m: 2,
                n: 2,
                d: 2,
                delta: 0.5,
                trials: 4,
                seed: 1,
            },
            &ToleranceProfile::default(),
        )
        .unwrap();
        assert!(report.above_threshold);
        assert_eq!(report.trials, 4);
    }
}
