//! Command-line front end wiring the algebra, decomposition, certification
//! and numeric modules into one tool, `chernvan`.
//!
//! Subcommands: `normal-form`, `decompose`, `verify-theorem`,
//! `enumerate-good`, `check-blocks`, `check-pigeonhole`, `holonomy-test`.
//!
//! Results go to standard output (or `--output`), progress to standard
//! error. With `--json` every result is wrapped in an [`Envelope`] carrying
//! `"schema": 1`. Exit codes: 0 when every check passed, 2 when a report
//! contains a failed check, 1 on usage errors (bad flags, unparsable input,
//! violated preconditions).
//!
//! Monomial grammar: factors `y+ij^e` / `y-ij^e` joined by `*`, with an
//! optional leading rational coefficient; indices ≥ 10 are bracketed
//! (`y+[10][2]`).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use chern_core::blocks::check_block_lemmas;
use chern_core::decomposer::{decompose_full_with, so5_decomposition, theorem_bound, EngineConfig};
use chern_core::oracle::{
    check_decomposition, check_pigeonhole_lemmas, verify_theorem, GoodSource,
};
use chern_core::{
    enumerate_good, normal_form, Block, EnumerationCaps, IndexSet, Monomial, Polynomial,
};
use chern_holonomy::{duality_check, kappa_homomorphism, stress_lemma, FormSpec, StressConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version of every JSON report layout.
pub const SCHEMA: u32 = 1;

/// Exit code for a report with a failed check.
pub const EXIT_FAILED: i32 = 2;

/// Exit code for usage errors.
pub const EXIT_USAGE: i32 = 1;

/// Why a command could not produce a report.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or arguments.
    #[error("usage: {0}")]
    Usage(String),
    /// An error from the algebra layer.
    #[error(transparent)]
    Core(#[from] chern_core::Error),
    /// An error from the numeric layer.
    #[error(transparent)]
    Holonomy(#[from] chern_holonomy::HolonomyError),
    /// Output could not be written.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    /// A report could not be serialized.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// The exit code: internal guarantee failures count as failed checks,
    /// everything else as usage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(chern_core::Error::TheoremViolation(_)) => EXIT_FAILED,
            _ => EXIT_USAGE,
        }
    }
}

/// The JSON wrapper of every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    /// Layout version, currently [`SCHEMA`].
    pub schema: u32,
    /// The subcommand that produced the report.
    pub command: String,
    /// False iff the report contains a failed check.
    pub passed: bool,
    /// The command-specific report.
    pub result: T,
}

#[derive(Debug, Parser)]
#[command(
    name = "chernvan",
    version,
    about = "Vanishing of Chern-class products: algebra, certificates and numeric checks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for parallelizable commands.
    #[arg(long, global = true, default_value_t = 1, env = "CHERNVAN_JOBS")]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normal form of a polynomial in the diagonal generators d1..dn.
    NormalForm {
        #[arg(long)]
        n: u32,
        /// Polynomial in the text format, e.g. "y+12" or "1/2*y-12^2 + 3*y+11".
        #[arg(long)]
        poly: String,
    },
    /// Decompose a monomial into good monomials and certify the result.
    Decompose {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        g: u32,
        /// Monomial, e.g. "y+11^8".
        #[arg(long)]
        monomial: String,
        /// Record the lemma trace.
        #[arg(long)]
        trace: bool,
        /// Reduction to use.
        #[arg(long, value_enum, default_value_t = Method::Full)]
        method: Method,
        /// Abort when an intermediate polynomial exceeds this many terms.
        #[arg(long, default_value_t = 1_000_000, env = "CHERNVAN_TERM_CAP")]
        term_cap: usize,
    },
    /// Certify every degree-d monomial against capped good monomials.
    VerifyTheorem {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        g: u32,
        /// Degree (defaults to the theorem bound 2gn² + ½(n−1)(n−2)).
        #[arg(long)]
        degree: Option<u32>,
        /// Enumeration caps, e.g. "depth=2,blocks=2".
        #[arg(long, default_value = "depth=2,blocks=2", env = "CHERNVAN_CAPS")]
        caps: String,
        /// Use the named rank-two basis instead of the enumeration (n = 2).
        #[arg(long)]
        so5_basis: bool,
    },
    /// List good monomials with their construction trees.
    EnumerateGood {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        g: u32,
        #[arg(long, default_value_t = 2)]
        max_depth: usize,
        #[arg(long, default_value_t = 2)]
        max_blocks: usize,
    },
    /// Exhaustive check of the block combination rules.
    CheckBlocks {
        #[arg(long, default_value_t = 6)]
        max_size: usize,
    },
    /// Exhaustive arithmetic scan of the degree-counting lemmas.
    CheckPigeonhole {
        #[arg(long, default_value_t = 8)]
        m_max: u32,
        #[arg(long, default_value_t = 3)]
        g_max: u32,
    },
    /// Numeric stress test of the structured matrix forms.
    HolonomyTest {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        g: usize,
        /// Form kind; `grid` runs the plus form and every minus form, `all` adds the embedded forms.
        #[arg(long, value_enum, default_value_t = FormKind::Plusmat)]
        form: FormKind,
        /// First side of the signing block, e.g. "1,3" (minusmat, embed).
        #[arg(long)]
        side: Option<String>,
        /// Structured indices of the embedded form, e.g. "1,2".
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9, env = "CHERNVAN_TOL")]
        tol: f64,
        /// Random unitary pairs for the κ homomorphism check.
        #[arg(long, default_value_t = 1000)]
        kappa_pairs: usize,
        /// Samples per form for the section-duality check.
        #[arg(long, default_value_t = 1000)]
        duality_samples: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    /// The general reduction.
    Full,
    /// The rank-two reduction (n = 2).
    So5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormKind {
    Plusmat,
    Minusmat,
    So5Plus,
    So5Pm,
    BlockDiagonalEmbed,
    Grid,
    All,
}

/// A finished command: its JSON result, its text rendering and the verdict.
struct Outcome {
    command: &'static str,
    passed: bool,
    result: serde_json::Value,
    text: String,
}

/// Runs the tool on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli).and_then(|o| emit(&cli.common, o)) {
        Ok(passed) => {
            if passed {
                0
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("chernvan: {e}");
            e.exit_code()
        }
    }
}

fn emit(common: &Common, o: Outcome) -> Result<bool, CliError> {
    let body = if common.json {
        let env = Envelope {
            schema: SCHEMA,
            command: o.command.to_string(),
            passed: o.passed,
            result: o.result,
        };
        serde_json::to_string_pretty(&env)? + "\n"
    } else {
        o.text
    };
    match &common.output {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(o.passed)
}

fn index_set(n: u32) -> Result<IndexSet, CliError> {
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    Ok(IndexSet::range1(n)?)
}

fn positive(name: &str, v: u32) -> Result<(), CliError> {
    if v == 0 {
        return Err(CliError::Usage(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn index_list(s: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<u32>()
                .map_err(|_| CliError::Usage(format!("bad index {p:?} in {s:?}")))
        })
        .collect()
}

fn block_over(x: &[u32], side: &str) -> Result<Block, CliError> {
    let v = index_list(side)?;
    if v.iter().any(|i| !x.contains(i)) {
        return Err(CliError::Usage(format!(
            "side {side:?} is not inside {x:?}"
        )));
    }
    Ok(Block::from_slices(&v, x)?)
}

fn json<T: Serialize>(t: &T) -> Result<serde_json::Value, CliError> {
    Ok(serde_json::to_value(t)?)
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::NormalForm { n, poly } => {
            let x = index_set(*n)?;
            let p = Polynomial::parse(poly)?;
            let nf = normal_form(&p, x)?;
            let text = format!("{nf}\n");
            let result = serde_json::json!({"input": p.to_string(), "normal_form": nf.to_string(), "polynomial": nf});
            Ok(Outcome {
                command: "normal-form",
                passed: true,
                result,
                text,
            })
        }
        Command::Decompose {
            n,
            g,
            monomial,
            trace,
            method,
            term_cap,
        } => {
            index_set(*n)?;
            positive("g", *g)?;
            let m = Monomial::parse(monomial)?;
            eprintln!("decomposing {m} (n = {n}, g = {g})");
            let start = Instant::now();
            let dec = match method {
                Method::Full => {
                    let config = EngineConfig {
                        trace: *trace,
                        term_cap: *term_cap,
                        ..EngineConfig::default()
                    };
                    decompose_full_with(&m, *n, *g, config)?
                }
                Method::So5 if *n == 2 => so5_decomposition(&m, *g)?,
                Method::So5 => {
                    return Err(CliError::Usage(format!(
                        "the rank-two reduction needs n = 2, got {n}"
                    )))
                }
            };
            let micros = start.elapsed().as_micros();
            let check = check_decomposition(&dec)?;
            let mut text = format!(
                "{} = sum of {} good terms ({micros} µs)\n",
                dec.input,
                dec.terms.len()
            );
            for t in &dec.terms {
                text += &format!("  ({}) * [{}]\n", t.theta, t.good.monomial);
            }
            if *trace {
                for s in &dec.trace.steps {
                    text += &format!("  trace: {} / {}: {}\n", s.lemma, s.branch, s.detail);
                }
            }
            text += &format!(
                "check: normal forms agree = {}, monomials match provenance = {}, provenance consistent = {}\n",
                check.normal_forms_agree, check.monomials_match_provenance, check.provenance_consistent
            );
            let result = serde_json::json!({
                "method": method,
                "micros": micros,
                "decomposition": dec,
                "check": check,
            });
            Ok(Outcome {
                command: "decompose",
                passed: check.passed(),
                result,
                text,
            })
        }
        Command::VerifyTheorem {
            n,
            g,
            degree,
            caps,
            so5_basis,
        } => {
            index_set(*n)?;
            positive("g", *g)?;
            let bound = theorem_bound(*g, *n as usize).max(0) as u32;
            let d = degree.unwrap_or(bound);
            let source = if *so5_basis {
                GoodSource::So5Basis
            } else {
                GoodSource::Enumerate(caps.parse()?)
            };
            eprintln!("certifying degree {d} (n = {n}, g = {g}, bound {bound})");
            let report = verify_theorem(*n, *g, d, source)?;
            let mut text = format!(
                "n = {n}, g = {g}, degree {d}: {}/{} monomials certified; rank {} of {} from {} goods; rank check {}\n",
                report.certified(),
                report.monomials.len(),
                report.rank,
                report.dimension,
                report.goods,
                if report.rank_check.agrees() { "agrees" } else { "DISAGREES" }
            );
            for m in &report.monomials {
                let status = serde_json::to_value(m.status)?;
                text += &format!(
                    "  d^{:?}: {} (size {}, {} µs)\n",
                    m.exponents,
                    status.as_str().unwrap_or("?"),
                    m.certificate_size,
                    m.micros
                );
            }
            Ok(Outcome {
                command: "verify-theorem",
                passed: report.passed(),
                result: json(&report)?,
                text,
            })
        }
        Command::EnumerateGood {
            n,
            g,
            max_depth,
            max_blocks,
        } => {
            index_set(*n)?;
            positive("g", *g)?;
            let goods = enumerate_good(
                *n,
                *g,
                EnumerationCaps {
                    depth: *max_depth,
                    blocks: *max_blocks,
                },
            )?;
            let mut text = format!("{} good monomials (n = {n}, g = {g}, depth ≤ {max_depth}, blocks ≤ {max_blocks})\n", goods.len());
            for gm in &goods {
                text += &format!(
                    "  {}  [split depth {}]\n",
                    gm.monomial,
                    gm.provenance.split_depth()
                );
            }
            Ok(Outcome {
                command: "enumerate-good",
                passed: true,
                result: json(&goods)?,
                text,
            })
        }
        Command::CheckBlocks { max_size } => {
            let report = check_block_lemmas(*max_size);
            let mut text = format!(
                "block rules up to |X| = {max_size}: {} sym-diff, {} restrict, {} extend, {} combine instances; {} failures\n",
                report.sym_diff_instances,
                report.restrict_instances,
                report.extend_instances,
                report.combine_instances,
                report.failures.len()
            );
            for f in &report.failures {
                text += &format!("  FAIL {f}\n");
            }
            Ok(Outcome {
                command: "check-blocks",
                passed: report.passed(),
                result: json(&report)?,
                text,
            })
        }
        Command::CheckPigeonhole { m_max, g_max } => {
            let report = check_pigeonhole_lemmas(*m_max, *g_max);
            let mut text = format!("degree-counting lemmas for m ≤ {m_max}, g ≤ {g_max}\n");
            for l in &report.lemmas {
                text += &format!(
                    "  {}: {} configurations ({} vacuous), {} instances, {} failures\n",
                    l.lemma,
                    l.configurations,
                    l.vacuous,
                    l.instances,
                    l.failures.len()
                );
                for f in &l.failures {
                    text += &format!("    FAIL {f}\n");
                }
            }
            Ok(Outcome {
                command: "check-pigeonhole",
                passed: report.passed(),
                result: json(&report)?,
                text,
            })
        }
        Command::HolonomyTest {
            n,
            g,
            form,
            side,
            subset,
            trials,
            seed,
            tol,
            kappa_pairs,
            duality_samples,
        } => {
            if *n == 0 || *g == 0 {
                return Err(CliError::Usage("n and g must be at least 1".into()));
            }
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(CliError::Usage(format!(
                    "tolerance must be positive, got {tol}"
                )));
            }
            let all: Vec<u32> = (1..=*n as u32).collect();
            let forms = match form {
                FormKind::Plusmat => vec![FormSpec::Plusmat],
                FormKind::So5Plus => vec![FormSpec::So5Plus],
                FormKind::So5Pm => vec![FormSpec::So5Pm],
                FormKind::Minusmat => {
                    let side = side
                        .as_deref()
                        .ok_or_else(|| CliError::Usage("minusmat needs --side".into()))?;
                    vec![FormSpec::Minusmat {
                        block: block_over(&all, side)?,
                    }]
                }
                FormKind::BlockDiagonalEmbed => {
                    let sub = subset.as_deref().ok_or_else(|| {
                        CliError::Usage("the embedded form needs --subset".into())
                    })?;
                    let xs = index_list(sub)?;
                    let x = IndexSet::from_slice(&xs)?;
                    let block = side.as_deref().map(|s| block_over(&xs, s)).transpose()?;
                    vec![FormSpec::BlockDiagonalEmbed { x, block }]
                }
                FormKind::Grid => FormSpec::grid(*n)?,
                FormKind::All => FormSpec::all(*n)?,
            };
            let mut stress = Vec::new();
            let mut duality = Vec::new();
            for spec in &forms {
                eprintln!(
                    "stress: {} (n = {n}, g = {g}, {trials} trials)",
                    spec.label()
                );
                let cfg = StressConfig {
                    n: *n,
                    g: *g,
                    form: spec.clone(),
                    trials: *trials,
                    seed: *seed,
                    tol: *tol,
                    jobs: cli.common.jobs,
                };
                stress.push(stress_lemma(&cfg)?);
                if *duality_samples > 0 {
                    duality.push(duality_check(spec, *n, *duality_samples, *seed)?);
                }
            }
            let kappa = if *kappa_pairs > 0 {
                Some(kappa_homomorphism(*n, *kappa_pairs, *seed)?)
            } else {
                None
            };
            let passed = stress.iter().all(|r| r.passed())
                && duality.iter().all(|r| r.passed())
                && kappa.as_ref().is_none_or(|k| k.passed());
            let mut text = String::new();
            for r in &stress {
                text += &format!(
                    "{} n={} g={}: {} trials, {} violations, {} torus-form products, max |det−1| {:.1e}, max structure defect {:.1e}\n",
                    r.form, r.n, r.g, r.trials, r.violations, r.torus_products, r.max_determinant_residual, r.max_structure_defect
                );
                for v in &r.examples {
                    text += &format!("  FAIL trial {} (seed {}): {}\n", v.trial, v.seed, v.reason);
                }
            }
            for r in &duality {
                text += &format!(
                    "duality {}: max vanishing {:.1e}, min other {:.1e}, {} of {} perturbations unbroken{}\n",
                    r.form,
                    r.max_vanishing_value,
                    r.min_other_value,
                    r.unbroken,
                    r.perturbations,
                    if r.passed() { "" } else { " FAIL" }
                );
            }
            if let Some(k) = &kappa {
                text += &format!(
                    "kappa n={}: {} pairs, homomorphism {:.1e}, round trip {:.1e}, group {:.1e}{}\n",
                    k.n,
                    k.pairs,
                    k.max_homomorphism_residual,
                    k.max_roundtrip_residual,
                    k.max_group_residual,
                    if k.passed() { "" } else { " FAIL" }
                );
            }
            text += if passed { "passed\n" } else { "FAILED\n" };
            let result = serde_json::json!({"stress": stress, "duality": duality, "kappa": kappa});
            Ok(Outcome {
                command: "holonomy-test",
                passed,
                result,
                text,
            })
        }
    }
}
