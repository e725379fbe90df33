use std::fmt::Write as _;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use polyrank::generic::{codim_generic, generic_structure_at};
use polyrank::harness::{perturb, recovery_threshold, sweep, PerturbConfig, SweepConfig};
use polyrank::{
    complete_eigenstructure, generic_full_rank, generic_structures, realize, Error,
    MatrixPolynomial, RealizeTarget, StructureSignature, ToleranceProfile,
};

#[derive(Parser)]
#[command(
    name = "polyrank",
    version,
    about = "Generic eigenstructures of bounded-rank matrix polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "POLYRANK_SEED")]
    seed: Option<u64>,
    /// Relative rank tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV (sweep only).
    #[arg(long, global = true)]
    csv: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct Dims {
    #[arg(short)]
    m: usize,
    #[arg(short)]
    n: usize,
    #[arg(short = 'd', long = "grade")]
    d: usize,
}

#[derive(Subcommand)]
enum Command {
    /// List the generic families with their codimensions.
    Enumerate {
        #[command(flatten)]
        dims: Dims,
        #[arg(short, required_unless_present = "full_rank")]
        r: Option<usize>,
        #[arg(long)]
        full_rank: bool,
    },
    /// Compute the complete eigenstructure of a polynomial file ("-" for stdin).
    Analyze { path: PathBuf },
    /// Draw a polynomial from a generic family.
    Realize {
        #[command(flatten)]
        dims: Dims,
        #[arg(short, required_unless_present = "full_rank")]
        r: Option<usize>,
        #[arg(short, default_value_t = 0)]
        a: usize,
        #[arg(long)]
        full_rank: bool,
    },
    /// Sample random polynomials and classify them against the families.
    Sweep {
        #[command(flatten)]
        dims: Dims,
        #[arg(short, required_unless_present = "full_rank")]
        r: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Column degrees of the right factor, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "a")]
        split: Option<Vec<usize>>,
        /// Target family; uses the balanced split for it.
        #[arg(short)]
        a: Option<usize>,
        #[arg(long, conflicts_with_all = ["split", "a"])]
        full_rank: bool,
    },
    /// Perturb companion forms and measure the recovered distance.
    Perturb {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Codimension of one family.
    Codim {
        #[command(flatten)]
        dims: Dims,
        #[arg(short)]
        r: usize,
        #[arg(short)]
        a: usize,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() || matches!(e, Error::Internal(_)) {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn profile(common: &Common) -> Result<ToleranceProfile, Failure> {
    let mut tol = ToleranceProfile::default();
    if let Some(seed) = common.seed {
        tol = tol.with_seed(seed);
    }
    if let Some(t) = common.tol {
        tol = tol.with_rel_rank_tol(t);
    }
    tol.validate()?;
    Ok(tol)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let tol = profile(&cli.common)?;
    let json_out = cli.common.json;
    let text = match &cli.command {
        Command::Enumerate { dims, r, full_rank } => enumerate(*dims, *r, *full_rank, json_out)?,
        Command::Analyze { path } => analyze(path, &tol)?,
        Command::Realize {
            dims,
            r,
            a,
            full_rank,
        } => {
            let target = if *full_rank {
                RealizeTarget::FullRank(generic_full_rank(dims.m, dims.n, dims.d)?)
            } else {
                let r = r.expect("clap enforces -r");
                RealizeTarget::Bounded(generic_structure_at(dims.m, dims.n, r, dims.d, *a)?)
            };
            realize(&target, tol.seed, &tol)?.to_json() + "\n"
        }
        Command::Sweep {
            dims,
            r,
            trials,
            split,
            a,
            full_rank,
        } => {
            let r = if *full_rank {
                dims.m.min(dims.n)
            } else {
                r.expect("clap enforces -r")
            };
            let config = match a {
                Some(a) => SweepConfig::targeting(dims.m, dims.n, r, dims.d, *a, *trials, tol.seed),
                None => SweepConfig {
                    m: dims.m,
                    n: dims.n,
                    r,
                    d: dims.d,
                    split: split.clone(),
                    trials: *trials,
                    seed: tol.seed,
                    full_rank: *full_rank,
                },
            };
            let report = sweep(&config, &tol)?;
            if cli.common.csv {
                report.to_csv()
            } else if json_out {
                report.to_json() + "\n"
            } else {
                let mut out = String::from("a\tcount\n");
                for (a, count) in &report.histogram {
                    let _ = writeln!(out, "{a}\t{count}");
                }
                let _ = writeln!(out, "unmatched\t{}", report.unmatched);
                let _ = writeln!(out, "failures\t{}", report.failures.len());
                for u in &report.unmatched_details {
                    let _ = writeln!(
                        out,
                        "# unmatched trial {}: {}",
                        u.trial,
                        serde_json::to_string(&u.signature).expect("record serializes")
                    );
                }
                out
            }
        }
        Command::Perturb {
            dims,
            delta,
            trials,
        } => {
            let threshold = recovery_threshold(dims.d);
            if *delta >= threshold {
                eprintln!(
                    "warning: delta {delta:e} is not below the recovery threshold {threshold:.6}; the bound may not apply"
                );
            }
            let config = PerturbConfig {
                m: dims.m,
                n: dims.n,
                d: dims.d,
                delta: *delta,
                trials: *trials,
                seed: tol.seed,
            };
            let report = perturb(&config, &tol)?;
            if json_out {
                report.to_json() + "\n"
            } else {
                format!(
                    "delta\t{:e}\ntrials\t{}\nmax_ratio\t{:.6}\nbound\t{:.6}\nwithin_bound\t{}\npivot_failures\t{}\n",
                    report.delta,
                    report.trials,
                    report.max_ratio,
                    report.bound,
                    report.within_bound(),
                    report.pivot_failures
                )
            }
        }
        Command::Codim { dims, r, a } => {
            let c = codim_generic(dims.m, dims.n, *r, dims.d, *a)?;
            if json_out {
                json!({ "codim": c }).to_string() + "\n"
            } else {
                format!("{c}\n")
            }
        }
    };
    emit(&cli.common, &text)
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn join(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

fn enumerate(
    dims: Dims,
    r: Option<usize>,
    full_rank: bool,
    json_out: bool,
) -> Result<String, Failure> {
    let rows: Vec<(Value, usize, Vec<usize>, Vec<usize>, i64)> = if full_rank {
        let g = generic_full_rank(dims.m, dims.n, dims.d)?;
        let (right, left) = g
            .signature()
            .map(|s| (s.right.clone(), s.left.clone()))
            .unwrap_or_default();
        vec![(g.to_json_value(), g.a(), right, left, 0)]
    } else {
        let r = r.expect("clap enforces -r");
        generic_structures(dims.m, dims.n, r, dims.d)?
            .into_iter()
            .map(|k| {
                let v = k.to_json_value();
                (v, k.a, k.signature.right, k.signature.left, k.codim)
            })
            .collect()
    };
    if json_out {
        let values: Vec<Value> = rows.into_iter().map(|row| row.0).collect();
        return Ok(serde_json::to_string_pretty(&values).expect("values serialize") + "\n");
    }
    let mut out = String::from("a\tright\tleft\tcodim\n");
    for (_, a, right, left, codim) in rows {
        let _ = writeln!(out, "{a}\t{}\t{}\t{codim}", join(&right), join(&left));
    }
    Ok(out)
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|s| text = s)
    };
    res.map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

/// The generic family containing `sig`, if any.
fn classify(sig: &StructureSignature) -> Option<usize> {
    let (m, n, d) = (sig.m, sig.n, sig.grade);
    if d == 0 {
        return None;
    }
    if sig.rank == m.min(n) {
        let g = generic_full_rank(m, n, d).ok()?;
        return g.accepts(sig).then(|| g.a());
    }
    if sig.rank == 0 {
        return None;
    }
    generic_structures(m, n, sig.rank, d)
        .ok()?
        .into_iter()
        .find(|k| &k.signature == sig)
        .map(|k| k.a)
}

fn analyze(path: &PathBuf, tol: &ToleranceProfile) -> Result<String, Failure> {
    let p = MatrixPolynomial::from_json(&read_input(path)?)?;
    let sig = complete_eigenstructure(&p, tol)?;
    let mut v = serde_json::to_value(sig.to_record()).expect("record serializes");
    let obj = v.as_object_mut().expect("object");
    obj.insert("m".into(), json!(sig.m));
    obj.insert("n".into(), json!(sig.n));
    obj.insert("grade".into(), json!(sig.grade));
    obj.insert("generic_a".into(), json!(classify(&sig)));
    Ok(serde_json::to_string_pretty(&v).expect("value serializes") + "\n")
}
