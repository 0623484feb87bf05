//! Command-line front end. Each subcommand loads its inputs, calls one
//! library operation and writes JSON or CSV.
//!
//! Exit status: 0 on success, 2 when a checked inequality fails, 1 on
//! malformed input or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bhlab::{csv_string, ksz_build, ksz_lift, ratio_scan_multi, ScanConfig};
use crate::compose::{
    hyper_inequality_report, ideal_inequality_report, summing_ratio, HyperIneqConfig, LinearMap, SummingMode,
    VectorMultiPolynomial,
};
use crate::error::{Error, Result};
use crate::index::MultiDegree;
use crate::norms::{sup_norm_estimate_with, NormOptions};
use crate::polarize::{form_norm_bounds, poly_from_form, to_symmetric_form, SymmetricForm};
use crate::poly::MultiPolynomial;
use crate::scalar::{Field, Scalar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MALFORMED: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "MULTIPOLY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "multipoly", version, about = "Sup norms, polarization, compositions and coefficient-growth scans")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed for random starts and sign draws.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random starts for coordinate ascent.
    #[arg(long, global = true, default_value_t = 64)]
    pub starts: usize,
    /// Relative stagnation tolerance for coordinate ascent.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Scalar field applied to every loaded object.
    #[arg(long, global = true)]
    pub field: Option<Field>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sup-norm bracket of a polynomial.
    Norm {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Symmetric form of a single-block polynomial, or the reverse.
    Polarize {
        /// Polynomial to polarize.
        #[arg(long = "in", conflicts_with = "form", required_unless_present = "form")]
        input: Option<PathBuf>,
        /// Symmetric form to turn back into a polynomial.
        #[arg(long)]
        form: Option<PathBuf>,
        /// Report the norm comparison between the form and its diagonal.
        #[arg(long)]
        bounds: bool,
        #[arg(long, default_value_t = 1e-9)]
        check_tol: f64,
    },
    /// Ideal inequality for t∘P∘(u₁,…,u_m).
    #[command(name = "compose-check")]
    ComposeCheck {
        #[arg(long)]
        t: PathBuf,
        #[arg(long = "P")]
        p: PathBuf,
        /// Comma-separated inner maps, one per block.
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        check_tol: f64,
    },
    /// Hyper-ideal inequality for R∘P∘(Q₁,…,Q_n).
    #[command(name = "hyper-check")]
    HyperCheck {
        #[arg(long = "R")]
        r: PathBuf,
        #[arg(long = "P")]
        p: PathBuf,
        /// Comma-separated inner polynomials, one per block of P.
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<PathBuf>,
        /// JSON with c_seq, k_seq and tol; all constants 1 when absent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summing ratio of a polynomial along vector families.
    Summing {
        #[arg(long = "P")]
        p: PathBuf,
        /// JSON list of m families, each a list of vectors.
        #[arg(long)]
        families: PathBuf,
        #[arg(long)]
        p_exp: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, default_value = "abs")]
        mode: SummingMode,
    },
    /// Coefficient-to-norm ratio scan over random-sign lifts.
    #[command(name = "bh-scan")]
    BhScan {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        /// Extra seeds per r while the best norm exceeds the running bound (defaults to --seeds).
        #[arg(long)]
        max_retries: Option<usize>,
        #[arg(long, default_value_t = 32)]
        vertex_budget: u32,
        /// Summary JSON file; printed to stdout when --out is given and this is absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Random-sign multilinear form, or its lift to a multidegree.
    Ksz {
        #[arg(long)]
        r: usize,
        #[arg(long = "M")]
        m: u32,
        /// Lift to this multidegree instead of printing the signs.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u32>>,
    },
}

/// Outcome of a successful run: text for the output sink and whether the
/// checked inequality held.
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

fn in_field(path: &Path, err: Error) -> Error {
    let strip = |m: String| m.replace("malformed input: ", "");
    match err {
        Error::Malformed(m) => Error::Malformed(format!("{}: {m}", path.display())),
        Error::Shape(m) => Error::Shape(format!("{}: {m}", path.display())),
        Error::Json(e) => Error::Malformed(format!("{}: {}", path.display(), strip(e.to_string()))),
        Error::Io(e) => Error::Malformed(format!("{}: {e}", path.display())),
        other => other,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| in_field(path, e.into()))
}

fn load_poly(path: &Path, field: Option<Field>) -> Result<MultiPolynomial> {
    let p = MultiPolynomial::from_json(&read(path)?).map_err(|e| in_field(path, e))?;
    match field {
        Some(f) => p.with_field(f).map_err(|e| in_field(path, e)),
        None => Ok(p),
    }
}

/// Accepts `{"components":[...]}` or a bare polynomial.
fn load_vector(path: &Path, field: Option<Field>) -> Result<VectorMultiPolynomial> {
    let text = read(path)?;
    let v = match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(serde_json::Value::Object(o)) if o.contains_key("components") => {
            VectorMultiPolynomial::from_json(&text).map_err(|e| in_field(path, e))?
        }
        _ => VectorMultiPolynomial::scalar(MultiPolynomial::from_json(&text).map_err(|e| in_field(path, e))?),
    };
    match field {
        Some(f) => VectorMultiPolynomial::new(
            v.into_components().iter().map(|c| c.with_field(f)).collect::<Result<_>>().map_err(|e| in_field(path, e))?,
        ),
        None => Ok(v),
    }
}

fn load_map(path: &Path) -> Result<LinearMap> {
    LinearMap::from_json(&read(path)?).map_err(|e| in_field(path, e))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string(v)? + "\n")
}

fn options(c: &Common) -> NormOptions {
    NormOptions { starts: c.starts, tol: c.tol, seed: c.seed, ..NormOptions::default() }
}

fn ok(text: String) -> Outcome {
    Outcome { text, pass: true }
}

/// Runs a parsed command. Extra files (the scan summary) are written here;
/// the returned text goes to `--out` or stdout.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    if !(c.tol > 0.0) {
        return Err(Error::Malformed(format!("--tol: must be positive, got {}", c.tol)));
    }
    if c.starts == 0 {
        return Err(Error::Malformed("--starts: must be positive".into()));
    }
    let opts = options(c);
    match &cli.command {
        Command::Norm { input } => {
            let p = load_poly(input, c.field)?;
            Ok(ok(to_json(&sup_norm_estimate_with(&p, &opts))?))
        }
        Command::Polarize { input, form, bounds, check_tol } => {
            let (a, text) = match (input, form) {
                (Some(path), _) => {
                    let a = to_symmetric_form(&load_poly(path, c.field)?).map_err(|e| in_field(path, e))?;
                    let text = to_json(&a)?;
                    (a, text)
                }
                (None, Some(path)) => {
                    let a = SymmetricForm::from_json(&read(path)?).map_err(|e| in_field(path, e))?;
                    let mut p = poly_from_form(&a)?;
                    if let Some(f) = c.field {
                        p = p.with_field(f).map_err(|e| in_field(path, e))?;
                    }
                    let text = p.to_json()? + "\n";
                    (a, text)
                }
                (None, None) => return Err(Error::Malformed("--in or --form is required".into())),
            };
            if *bounds {
                let report = form_norm_bounds(&a, &opts, *check_tol)?;
                return Ok(Outcome { text: to_json(&report)?, pass: report.pass() });
            }
            Ok(ok(text))
        }
        Command::ComposeCheck { t, p, u, check_tol } => {
            let t = load_map(t)?;
            let pv = load_vector(p, c.field)?;
            let us = u.iter().map(|path| load_map(path)).collect::<Result<Vec<_>>>()?;
            let report = ideal_inequality_report(&t, &pv, &us, &opts, *check_tol)?;
            Ok(Outcome { text: to_json(&report)?, pass: report.pass })
        }
        Command::HyperCheck { r, p, q, config } => {
            let r = load_vector(r, c.field)?;
            let pv = load_vector(p, c.field)?;
            let qs = q.iter().map(|path| load_vector(path, c.field)).collect::<Result<Vec<_>>>()?;
            let config: HyperIneqConfig = match config {
                Some(path) => serde_json::from_str(&read(path)?).map_err(|e| in_field(path, e.into()))?,
                None => HyperIneqConfig::default(),
            };
            let report = hyper_inequality_report(&r, &pv, &qs, &config, &opts)?;
            Ok(Outcome { text: to_json(&report)?, pass: report.pass })
        }
        Command::Summing { p, families, p_exp, q, mode } => {
            let pv = load_vector(p, c.field)?;
            let fams = load_families(families)?;
            Ok(ok(to_json(&summing_ratio(&pv, &fams, *p_exp, q, *mode)?)?))
        }
        Command::BhScan { n, p, r, seeds, max_retries, vertex_budget, summary } => {
            if c.field == Some(Field::Complex) {
                return Err(Error::Unsupported("--field: scans use real random-sign forms".into()));
            }
            let n = MultiDegree::new(n.clone()).map_err(|e| Error::Malformed(format!("--n: {e}")))?;
            let cfg = ScanConfig {
                starts: c.starts,
                base_seed: c.seed,
                max_retries: max_retries.unwrap_or(*seeds),
                vertex_budget_log2: *vertex_budget,
                ..ScanConfig::new(n, p.clone(), r.clone(), *seeds)
            };
            let results = ratio_scan_multi(&cfg)?;
            let summaries: Vec<_> = results.iter().map(|r| r.summary()).collect();
            let summary_json = serde_json::to_string_pretty(&summaries)? + "\n";
            let csv = csv_string(&results)?;
            match (summary, &c.out) {
                (Some(path), _) => {
                    fs::write(path, summary_json).map_err(|e| in_field(path, e.into()))?;
                    Ok(ok(csv))
                }
                (None, Some(path)) => {
                    fs::write(path, csv).map_err(|e| in_field(path, e.into()))?;
                    print!("{summary_json}");
                    Ok(ok(String::new()))
                }
                (None, None) => Ok(ok(csv)),
            }
        }
        Command::Ksz { r, m, n } => {
            if c.field == Some(Field::Complex) {
                return Err(Error::Unsupported("--field: random-sign forms are real".into()));
            }
            let inst = ksz_build(*r, *m, c.seed)?;
            match n {
                Some(n) => {
                    let n = MultiDegree::new(n.clone()).map_err(|e| Error::Malformed(format!("--n: {e}")))?;
                    Ok(ok(ksz_lift(&inst, &n)?.to_json()? + "\n"))
                }
                None => Ok(ok(to_json(&inst)?)),
            }
        }
    }
}

fn load_families(path: &Path) -> Result<Vec<Vec<Vec<Scalar>>>> {
    #[derive(serde::Deserialize)]
    struct Family(#[serde(with = "crate::scalar::vec_of_vec")] Vec<Vec<Scalar>>);
    let fams: Vec<Family> = serde_json::from_str(&read(path)?).map_err(|e| in_field(path, e.into()))?;
    Ok(fams.into_iter().map(|f| f.0).collect())
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // an already initialized pool keeps its size
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
        }
    };
    init_threads();
    match execute(&cli) {
        Ok(outcome) => {
            let written = match &cli.common.out {
                Some(path) if !outcome.text.is_empty() => fs::write(path, &outcome.text),
                _ => std::io::stdout().write_all(outcome.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: output: {e}");
                return EXIT_MALFORMED;
            }
            if outcome.pass {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_MALFORMED
        }
    }
}
