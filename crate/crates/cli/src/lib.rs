//! The `two-squares` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use two_squares::checkpoint::{run_checkpointed, write_atomic, RunOutcome};
use two_squares::csv::{float, Table};
use two_squares::heuristics::{
    self, crossover_csv, crossover_scan, f_r_detailed, family_transition, heuristic_pmf,
    psi_curve_csv, EulerProduct, Family, Model, PredictionKind, StarVariant,
};
use two_squares::lemmas::{sweep, sweep_csv, SweepConfig};
use two_squares::sieve::{SegmentPlan, DEFAULT_SEGMENT_SIZE};
use two_squares::stats::{self, comparisons_csv, comparisons_json, AngleEndpoint, AngleInterval};
use two_squares::{pair_sieve, Error, TallyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPABILITY: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

/// Parses a non-negative integer, allowing forms like `1e9` or `2.5e6`.
pub fn parse_sci_u64(text: &str) -> Result<u64, String> {
    let t = text.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (
            m,
            e.parse::<i32>()
                .map_err(|_| format!("bad exponent in {text:?}"))?,
        ),
        None => (t.as_str(), 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(format!("{text:?} is not a non-negative integer"));
    }
    let digits: String = format!("{int}{frac}");
    let shift = exp - frac.len() as i32;
    let mut value: u128 = digits
        .parse()
        .map_err(|_| format!("{text:?} is too large"))?;
    if shift >= 0 {
        for _ in 0..shift {
            value = value
                .checked_mul(10)
                .ok_or_else(|| format!("{text:?} is too large"))?;
        }
    } else {
        let div = 10u128
            .checked_pow((-shift) as u32)
            .ok_or_else(|| format!("{text:?} is not an integer"))?;
        if !value.is_multiple_of(div) {
            return Err(format!("{text:?} is not an integer"));
        }
        value /= div;
    }
    u64::try_from(value).map_err(|_| format!("{text:?} exceeds 64 bits"))
}

fn parse_sci_u32(text: &str) -> Result<u32, String> {
    let v = parse_sci_u64(text)?;
    u32::try_from(v).map_err(|_| format!("{text:?} exceeds 32 bits"))
}

fn parse_threads(text: &str) -> Result<usize, String> {
    match parse_sci_u64(text)? {
        0 => Err("thread budget must be at least 1".into()),
        v => Ok(v as usize),
    }
}

fn parse_angle(text: &str) -> Result<AngleEndpoint, String> {
    AngleEndpoint::parse(text).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "two-squares",
    version,
    about = "Counts and heuristics for n = a² + p²"
)]
pub struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "TWO_SQUARES_THREADS", value_parser = parse_threads)]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Output file, written atomically; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CountArgs {
    /// Upper limit x (at least 100).
    #[arg(long, value_parser = parse_sci_u64)]
    x: u64,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_SIZE, value_parser = parse_sci_u64)]
    segment_size: u64,
}

#[derive(Debug, Args)]
struct ReportSource {
    /// Count up to this x.
    #[arg(long, value_parser = parse_sci_u64, required_unless_present = "report")]
    x: Option<u64>,
    /// Read a TallyReport JSON instead of counting.
    #[arg(long, conflicts_with = "x")]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_SIZE, value_parser = parse_sci_u64)]
    segment_size: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the pair sieve up to x and emit the TallyReport.
    Count {
        #[command(flatten)]
        count: CountArgs,
        /// Keep one checkpoint per completed segment here and resume from it.
        #[arg(long)]
        checkpoint_dir: Option<PathBuf>,
        /// Stop after computing this many new segments (exit 0, no report).
        #[arg(long, value_parser = parse_sci_u64, requires = "checkpoint_dir")]
        stop_after: Option<u64>,
    },
    /// N_r(x) for every r ≥ 1.
    NrTable {
        #[command(flatten)]
        source: ReportSource,
    },
    /// π_𝒩(x; k) for every k.
    PiN {
        #[arg(long, value_parser = parse_sci_u64)]
        x: u64,
    },
    /// Σ C(r₁(n), 2) against (9/8)·x/log x.
    Daniel {
        #[command(flatten)]
        source: ReportSource,
    },
    /// Count lattice points in S_{m,k}(I, R).
    Keysums {
        #[arg(long, value_parser = parse_sci_u64)]
        m: u64,
        #[arg(long, value_parser = parse_sci_u32)]
        k: u32,
        /// Lower angle: 0, pi/4, pi/2 or radians.
        #[arg(long, default_value = "0", value_parser = parse_angle)]
        lo: AngleEndpoint,
        /// Upper angle (excluded).
        #[arg(long, default_value = "pi/2", value_parser = parse_angle)]
        hi: AngleEndpoint,
        #[arg(long = "big-r")]
        big_r: f64,
    },
    /// δ, τ, λ, c_λ and κ.
    Constants {
        #[arg(long, default_value = "1e7", value_parser = parse_sci_u64)]
        prime_limit: u64,
    },
    /// Sample ψ_r or ψ* over one period.
    Psi {
        /// Values of r (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
        r: Vec<u32>,
        /// Sample ψ₀*, ψ₁* or ψ₂* instead.
        #[arg(long, conflicts_with = "r")]
        star: Option<u8>,
        #[arg(long, default_value = "64", value_parser = parse_sci_u32)]
        samples: u32,
        #[arg(long, default_value = "1e7", value_parser = parse_sci_u64)]
        prime_limit: u64,
    },
    /// The self-similar sum f_R(β).
    #[command(allow_negative_numbers = true)]
    Fr {
        #[arg(long = "big-r")]
        big_r: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Scan f_{r−1−τ}(β) ≥ f_{r−τ}(β)/(r+1) over r.
    Crossover {
        #[arg(long, default_value = "2", value_parser = parse_sci_u32)]
        r_min: u32,
        #[arg(long, default_value = "30", value_parser = parse_sci_u32)]
        r_max: u32,
        #[arg(long, default_value = "256", value_parser = parse_sci_u32)]
        grid_points: u32,
    },
    /// Heuristic predictions.
    Predict {
        #[arg(long, value_enum)]
        kind: PredictKind,
        /// Evaluation point (real, scientific notation allowed).
        #[arg(long)]
        x: f64,
        #[arg(long)]
        r: u32,
        /// ω* stratum for pi-n-kr.
        #[arg(long)]
        k: Option<u32>,
        /// R = r₀*(n) for pmf.
        #[arg(long = "big-r")]
        big_r: Option<u64>,
        #[arg(long, default_value = "1e7", value_parser = parse_sci_u64)]
        prime_limit: u64,
    },
    /// Empirical counts against the asymptotic formulas.
    Compare {
        #[command(flatten)]
        source: ReportSource,
        /// Strata k for the π_𝒩 comparison.
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        k: Vec<u32>,
        #[arg(long, default_value = "1e7", value_parser = parse_sci_u64)]
        prime_limit: u64,
    },
    /// Exhaustive checks of the ℓ and ν lemmas on random contexts.
    VerifyLemmas {
        #[arg(long, default_value = "1", value_parser = parse_sci_u64)]
        seed: u64,
        #[arg(long, default_value = "200", value_parser = parse_sci_u64)]
        ell_contexts: u64,
        #[arg(long, default_value = "50", value_parser = parse_sci_u64)]
        nu_contexts: u64,
        #[arg(long, default_value = "500", value_parser = parse_sci_u64)]
        pairs: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PredictKind {
    Nr,
    PiNKr,
    Pmf,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capability(_) => EXIT_CAPABILITY,
            Error::Invariant(_) | Error::Overflow(_) | Error::Numerical(_) => EXIT_INVARIANT,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

struct Ctx {
    threads: usize,
    format: Option<Format>,
}

impl Ctx {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load_report(source: &ReportSource, threads: usize) -> Result<TallyReport, Failure> {
    match (&source.report, source.x) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
            Ok(TallyReport::from_json(&text)?)
        }
        (None, Some(x)) => Ok(pair_sieve(x, source.segment_size, threads)?),
        (None, None) => Err(input("either --x or --report is required")),
    }
}

fn json_text(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    text
}

fn count_map_output(map: &BTreeMap<u32, u64>, key: &str, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut table = Table::new([key, "count"]);
            for (k, c) in map {
                table.row([k.to_string(), c.to_string()]);
            }
            table.render()
        }
        Format::Json => {
            let rows: Vec<_> = map.iter().map(|(k, c)| json!([k, c])).collect();
            json_text(&json!(rows))
        }
    }
}

fn execute(cli: &Cli) -> Result<Option<String>, Failure> {
    let ctx = Ctx {
        threads: cli.threads.unwrap_or_else(default_threads),
        format: cli.format,
    };
    let text = match &cli.command {
        Command::Count {
            count,
            checkpoint_dir,
            stop_after,
        } => {
            let report = match checkpoint_dir {
                Some(dir) => {
                    let plan = SegmentPlan::new(count.x, count.segment_size)?;
                    let stop = stop_after.map(|s| s as usize);
                    match run_checkpointed(&plan, ctx.threads, dir, stop)? {
                        RunOutcome::Complete(report) => report,
                        RunOutcome::Interrupted { done, total } => {
                            eprintln!("stopped with {done} of {total} segments checkpointed");
                            return Ok(None);
                        }
                    }
                }
                None => pair_sieve(count.x, count.segment_size, ctx.threads)?,
            };
            match ctx.format(Format::Json) {
                Format::Json => report.to_json()?,
                Format::Csv => report.joint_csv(),
            }
        }
        Command::NrTable { source } => {
            let report = load_report(source, ctx.threads)?;
            count_map_output(&stats::n_r_table(&report)?, "r", ctx.format(Format::Csv))
        }
        Command::PiN { x } => count_map_output(
            &stats::pi_n_histogram(*x, ctx.threads)?,
            "k",
            ctx.format(Format::Csv),
        ),
        Command::Daniel { source } => {
            let report = load_report(source, ctx.threads)?;
            comparison_output(&[stats::daniel_ratio(&report)?], ctx.format(Format::Csv))?
        }
        Command::Keysums {
            m,
            k,
            lo,
            hi,
            big_r,
        } => {
            let interval = AngleInterval::new(*lo, *hi)?;
            let count = stats::keysums_count(*m, *k, &interval, *big_r)?;
            match ctx.format(Format::Csv) {
                Format::Csv => {
                    let mut table = Table::new(["m", "k", "lo", "hi", "R", "count"]);
                    table.row([
                        m.to_string(),
                        k.to_string(),
                        float(lo.radians()),
                        float(hi.radians()),
                        float(*big_r),
                        count.to_string(),
                    ]);
                    table.render()
                }
                Format::Json => json_text(&json!({
                    "m": m, "k": k, "lo": lo.radians(), "hi": hi.radians(), "R": big_r, "count": count
                })),
            }
        }
        Command::Constants { prime_limit } => {
            let constants = heuristics::compute_constants(*prime_limit)?;
            match ctx.format(Format::Csv) {
                Format::Csv => {
                    let mut csv = constants.to_csv();
                    csv.push_str(&format!("kappa_reference,{},\n", float(0.29356)));
                    csv
                }
                Format::Json => json_text(&json!({
                    "constants": constants,
                    "kappa_reference": 0.29356,
                })),
            }
        }
        Command::Psi {
            r,
            star,
            samples,
            prime_limit,
        } => {
            let model = Model::with_prime_limit(*prime_limit)?;
            psi_output(&model, r, *star, *samples, ctx.format(Format::Csv))?
        }
        Command::Fr { big_r, beta, tol } => {
            let sum = f_r_detailed(*big_r, *beta, *tol)?;
            match ctx.format(Format::Csv) {
                Format::Csv => {
                    let mut table = Table::new([
                        "R",
                        "beta",
                        "value",
                        "ln_value",
                        "m_lo",
                        "m_hi",
                        "lower_tail",
                        "upper_tail",
                    ]);
                    table.row([
                        float(*big_r),
                        float(*beta),
                        float(sum.value()),
                        float(sum.ln_value),
                        sum.m_lo.to_string(),
                        sum.m_hi.to_string(),
                        float(sum.lower_tail_bound),
                        float(sum.upper_tail_bound),
                    ]);
                    table.render()
                }
                Format::Json => json_text(&json!({
                    "R": big_r, "beta": beta, "value": sum.value(), "detail": sum
                })),
            }
        }
        Command::Crossover {
            r_min,
            r_max,
            grid_points,
        } => {
            let reports = two_squares::sieve::with_thread_budget(ctx.threads, || {
                crossover_scan(*r_min, *r_max, *grid_points)
            })??;
            for family in Family::ALL {
                match family_transition(&reports, family) {
                    Some(r) => eprintln!("{} family: verdict changes at r = {r}", family.label()),
                    None => eprintln!("{} family: uniform verdict", family.label()),
                }
            }
            match ctx.format(Format::Csv) {
                Format::Csv => crossover_csv(&reports),
                Format::Json => json_text(&serde_json::to_value(&reports).map_err(Error::from)?),
            }
        }
        Command::Predict {
            kind,
            x,
            r,
            k,
            big_r,
            prime_limit,
        } => {
            let value = match kind {
                PredictKind::Pmf => {
                    let big_r = big_r.ok_or_else(|| input("--big-r is required for pmf"))?;
                    heuristic_pmf(big_r, x.ln(), *r as u64)?
                }
                PredictKind::Nr => Model::with_prime_limit(*prime_limit)?
                    .predict(PredictionKind::NR { r: *r }, *x)?,
                PredictKind::PiNKr => {
                    let k = k.ok_or_else(|| input("--k is required for pi-n-kr"))?;
                    Model::with_prime_limit(*prime_limit)?
                        .predict(PredictionKind::PiNKR { k, r: *r }, *x)?
                }
            };
            let name = kind
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
                .to_string();
            match ctx.format(Format::Csv) {
                Format::Csv => {
                    let mut table = Table::new(["kind", "x", "r", "value"]);
                    table.row([name, float(*x), r.to_string(), float(value)]);
                    table.render()
                }
                Format::Json => json_text(&json!({"kind": name, "x": x, "r": r, "value": value})),
            }
        }
        Command::Compare {
            source,
            k,
            prime_limit,
        } => {
            let report = load_report(source, ctx.threads)?;
            let product = EulerProduct::new(*prime_limit)?;
            let histogram = stats::pi_n_from_report(&report)?;
            let mut rows = stats::run_summary(&report)?.comparisons;
            for &k in k {
                rows.push(stats::compare_pi_n(report.x, k, &histogram, &product)?);
            }
            comparison_output(&rows, ctx.format(Format::Csv))?
        }
        Command::VerifyLemmas {
            seed,
            ell_contexts,
            nu_contexts,
            pairs,
        } => {
            let config = SweepConfig {
                seed: *seed,
                ell_contexts: *ell_contexts as usize,
                nu_contexts: *nu_contexts as usize,
                multiplicative_pairs: *pairs as usize,
                ..SweepConfig::default()
            };
            let rows = two_squares::sieve::with_thread_budget(ctx.threads, || sweep(&config))??;
            let failed = rows.iter().filter(|r| !r.pass).count();
            let text = match ctx.format(Format::Csv) {
                Format::Csv => sweep_csv(&rows),
                Format::Json => json_text(&serde_json::to_value(&rows).map_err(Error::from)?),
            };
            if failed > 0 {
                emit(cli.out.as_deref(), &text)?;
                return Err(Failure {
                    code: EXIT_INVARIANT,
                    message: format!("{failed} of {} lemma checks failed", rows.len()),
                });
            }
            text
        }
    };
    Ok(Some(text))
}

fn comparison_output(
    rows: &[stats::AsymptoticComparison],
    format: Format,
) -> Result<String, Failure> {
    Ok(match format {
        Format::Csv => comparisons_csv(rows),
        Format::Json => comparisons_json(rows)?,
    })
}

fn psi_output(
    model: &Model,
    rs: &[u32],
    star: Option<u8>,
    samples: u32,
    format: Format,
) -> Result<String, Failure> {
    if samples == 0 {
        return Err(input("--samples must be positive"));
    }
    let ts: Vec<f64> = (0..samples).map(|i| i as f64 / samples as f64).collect();
    match (star, format) {
        (None, Format::Csv) => Ok(psi_curve_csv(model, rs, samples)?),
        (None, Format::Json) => {
            let mut rows = Vec::new();
            for &r in rs {
                for &t in &ts {
                    rows.push(json!({"t": t, "r": r, "psi": model.psi_r(r, t)?}));
                }
            }
            Ok(json_text(&json!(rows)))
        }
        (Some(v), format) => {
            let variant = StarVariant::try_from(v)?;
            let mut values = Vec::with_capacity(ts.len());
            for &t in &ts {
                values.push(model.psi_star(variant, t)?);
            }
            Ok(match format {
                Format::Csv => {
                    let mut table = Table::new(["t", "variant", "psi"]);
                    for (t, v2) in ts.iter().zip(&values) {
                        table.row([float(*t), v.to_string(), float(*v2)]);
                    }
                    table.render()
                }
                Format::Json => {
                    let rows: Vec<_> = ts
                        .iter()
                        .zip(&values)
                        .map(|(t, p)| json!({"t": t, "variant": v, "psi": p}))
                        .collect();
                    json_text(&json!(rows))
                }
            })
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(Failure::from),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| input(format!("cannot write output: {e}")))
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|text| match text {
        Some(text) => emit(cli.out.as_deref(), &text),
        None => Ok(()),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}
