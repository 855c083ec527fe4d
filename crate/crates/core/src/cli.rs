//! Command-line front end. Sweeps are written as CSV, single records as JSON.
//!
//! Exit status: 0 on success, 1 on usage or I/O errors, 2 when a bound check
//! reports a failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    check_gamma_bounds, envelope_report, predict_bell, scan_k, bad_approx_sequence, BellParams, RationalPoint,
};
use crate::chain::{build_matrix, ShuffleParams};
use crate::error::{Error, Result};
use crate::gamma::{cf_expand, gamma_min};
use crate::mixsim::{simulate_card, simulate_deck, tv_exact, SimConfig, EXACT_DECK_MAX_N};
use crate::report::{self, BellRow, SimTable};
use crate::spectra::{oracle_gap, seeded_spectrum, spectral_gap, ORACLE_MAX_N};

#[derive(Debug, Parser)]
#[command(name = "overlap-shuffle", version, about = "Spectral gap of the overlapping-cycles shuffle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// γ(n,k) and the numeric spectral gap for one (n, k), as JSON
    Gap(GapArgs),
    /// γ and relaxation time for every k, as CSV
    Scan(ScanArgs),
    /// Every eigenvalue of the single-card chain, as CSV
    Eigs(EigsArgs),
    /// γ against the closed-form prediction around k ≈ np/q, as CSV
    Bells(BellsArgs),
    /// Relaxation time against the √k lower envelope, as CSV
    Envelope(EnvelopeArgs),
    /// Upper, lower and counting bounds on γ for every k, as JSON
    #[command(name = "thm2")]
    Bounds(BoundsArgs),
    /// γ(n,k) n^{3/2} along a sequence of badly approximable decks, as JSON
    #[command(name = "thm5")]
    BadApprox(BadApproxArgs),
    /// Exact or sampled mixing in total variation, as CSV
    Simulate(SimArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write to this file instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GapMethod {
    Analytic,
    Newton,
    Oracle,
    All,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = GapMethod::All)]
    pub method: GapMethod,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub n: usize,
    /// Also compute the numeric gap
    #[arg(long)]
    pub numeric: bool,
    /// With --numeric, only for k divisible by this
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EigsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Also write the dense transition matrix to this file
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BellsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub q: u64,
    /// Number of k on each side of round(np/q)
    #[arg(long, default_value_t = 40)]
    pub halfwidth: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    /// Thresholds for the counting bound (repeatable)
    #[arg(long = "delta", default_values_t = vec![0.01])]
    pub deltas: Vec<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BadApproxArgs {
    /// k/n ratio; defaults to the golden ratio conjugate
    #[arg(long, default_value_t = 0.618_033_988_749_894_9)]
    pub alpha: f64,
    /// Explicit q values (comma separated); defaults to the continued-fraction
    /// denominators of (1 − α)/2 up to --q-max
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<u64>,
    #[arg(long, default_value_t = 400)]
    pub q_max: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMode {
    /// Exact evolution of the card's law
    Exact,
    /// Sampled trajectories of one card
    Card,
    /// Sampled whole-deck permutations
    Deck,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = SimMode::Exact)]
    pub mode: SimMode,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Starting position of the tracked card
    #[arg(long, default_value_t = 1)]
    pub start: usize,
    /// Spacing between reported steps
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    #[command(flatten)]
    pub output: Output,
}

/// What a subcommand produced: the bytes to emit and whether a check failed.
struct Outcome {
    bytes: Vec<u8>,
    failed_check: bool,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            failed_check: false,
        }
    }
}

fn params(n: usize, k: usize) -> Result<ShuffleParams> {
    ShuffleParams::new(n, k)
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
struct GapRecord {
    n: usize,
    k: usize,
    gamma: f64,
    m_star: i64,
    r: i64,
    /// `k m² + r²`, so that `γ = π²·numerator/(2n³)`
    numerator: i128,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_newton: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio_newton: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio_oracle: Option<f64>,
}

fn run_gap(a: &GapArgs) -> Result<Outcome> {
    let pr = params(a.n, a.k)?;
    let wants_oracle = matches!(a.method, GapMethod::Oracle | GapMethod::All);
    if a.method == GapMethod::Oracle && a.n > ORACLE_MAX_N {
        return Err(Error::InvalidParams(format!(
            "--method oracle needs n <= {ORACLE_MAX_N}"
        )));
    }
    let g = gamma_min::<f64>(pr);
    let mut rec = GapRecord {
        n: a.n,
        k: a.k,
        gamma: g.value,
        m_star: g.m_star,
        r: g.r,
        numerator: g.numerator,
        gap_newton: None,
        ratio_newton: None,
        gap_oracle: None,
        ratio_oracle: None,
    };
    if matches!(a.method, GapMethod::Newton | GapMethod::All) {
        let gap = spectral_gap::<f64>(pr)?.gap;
        rec.gap_newton = Some(gap);
        rec.ratio_newton = Some(gap / g.value);
    }
    if wants_oracle && a.n <= ORACLE_MAX_N {
        let gap = oracle_gap::<f64>(pr)?.gap;
        rec.gap_oracle = Some(gap);
        rec.ratio_oracle = Some(gap / g.value);
    }
    Ok(Outcome::ok(json(&rec)?))
}

fn run_scan(a: &ScanArgs) -> Result<Outcome> {
    let rows = scan_k(a.n, a.numeric, a.stride)?;
    let mut buf = Vec::new();
    report::write_scan(&mut buf, &rows)?;
    Ok(Outcome::ok(buf))
}

fn run_eigs(a: &EigsArgs) -> Result<Outcome> {
    let pr = params(a.n, a.k)?;
    if let Some(path) = &a.dump_matrix {
        let mut buf = Vec::new();
        report::write_matrix(&mut buf, &build_matrix::<f64>(pr))?;
        std::fs::write(path, buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let s = seeded_spectrum::<f64>(pr)?;
    let mut buf = Vec::new();
    report::write_spectrum(&mut buf, &s)?;
    Ok(Outcome::ok(buf))
}

fn run_bells(a: &BellsArgs) -> Result<Outcome> {
    let point = RationalPoint::new(a.p, a.q)?;
    if a.n < 2 {
        return Err(Error::InvalidParams(format!("n = {} must be at least 2", a.n)));
    }
    let center = point.nearest_k(a.n);
    let lo = center.saturating_sub(a.halfwidth).max(1);
    let hi = (center + a.halfwidth).min(a.n - 1);
    let rows: Vec<BellRow> = (lo..=hi)
        .map(|k| {
            let g = gamma_min::<f64>(params(a.n, k)?);
            let prediction = BellParams::new(point, a.n, k).ok().map(|b| predict_bell::<f64>(&b));
            Ok(BellRow {
                k,
                gamma: g.value,
                prediction,
            })
        })
        .collect::<Result<_>>()?;
    let mut buf = Vec::new();
    report::write_bells(&mut buf, &rows)?;
    Ok(Outcome::ok(buf))
}

fn run_envelope(a: &EnvelopeArgs) -> Result<Outcome> {
    let rep = envelope_report(a.n)?;
    let mut buf = Vec::new();
    report::write_envelope(&mut buf, &rep.rows)?;
    Ok(Outcome::ok(buf))
}

fn run_bounds(a: &BoundsArgs) -> Result<Outcome> {
    let rep = check_gamma_bounds(a.n, &a.deltas)?;
    #[derive(Serialize)]
    struct Out<'a> {
        passed: bool,
        #[serde(flatten)]
        report: &'a crate::analysis::BoundsReport,
    }
    let passed = rep.passed();
    Ok(Outcome {
        bytes: json(&Out { passed, report: &rep })?,
        failed_check: !passed,
    })
}

/// Continued-fraction denominators of the `f64` value `x ∈ [0, 1)`, which is
/// an exact dyadic rational; only the leading ones are meaningful for the
/// real number it approximates.
pub fn cf_denominators_of(x: f64, q_max: u64) -> Result<Vec<u64>> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} is not in [0, 1)")));
    }
    let den = 1u64 << 62;
    let num = (x * den as f64) as u64;
    let cf = cf_expand(num, den)?;
    Ok(cf.denominators().filter(|&q| q <= q_max).collect())
}

fn run_bad_approx(a: &BadApproxArgs) -> Result<Outcome> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Error::InvalidParams(format!("--alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let q_list = if a.q.is_empty() {
        cf_denominators_of((1.0 - a.alpha) / 2.0, a.q_max)?
    } else {
        a.q.clone()
    };
    let rep = bad_approx_sequence(a.alpha, &q_list)?;
    #[derive(Serialize)]
    struct Out<'a> {
        passed: bool,
        #[serde(flatten)]
        report: &'a crate::analysis::BadApproxReport,
    }
    let passed = rep.passed();
    Ok(Outcome {
        bytes: json(&Out { passed, report: &rep })?,
        failed_check: !passed,
    })
}

fn run_simulate(a: &SimArgs) -> Result<Outcome> {
    let pr = params(a.n, a.k)?;
    if a.every == 0 {
        return Err(Error::InvalidParams("--every must be positive".into()));
    }
    let cfg = SimConfig::new(pr, a.start, a.trials, a.steps, a.seed)?;
    let checkpoints: Vec<usize> = (0..=a.steps).step_by(a.every).collect();
    let mut notes = vec![
        ("n".to_string(), a.n.to_string()),
        ("k".to_string(), a.k.to_string()),
    ];
    let table = match a.mode {
        SimMode::Exact => {
            let s = tv_exact(pr, a.start, a.steps)?;
            notes.push(("mode".into(), "exact evolution; trials and seed unused".into()));
            notes.push(("start".into(), a.start.to_string()));
            SimTable {
                column: "tv",
                trials: 0,
                rng_seed: a.seed,
                notes,
                rows: checkpoints.iter().map(|&t| (t, vec![s.values[t]])).collect(),
                extra_columns: vec![],
            }
        }
        SimMode::Card => {
            let c = simulate_card(&cfg, &checkpoints)?;
            notes.push(("mode".into(), "sampled single-card trajectories".into()));
            notes.push(("start".into(), a.start.to_string()));
            SimTable {
                column: "tv",
                trials: a.trials,
                rng_seed: a.seed,
                notes,
                rows: checkpoints.iter().copied().zip(c.empirical_tv().into_iter().map(|v| vec![v])).collect(),
                extra_columns: vec![],
            }
        }
        SimMode::Deck => {
            let s = simulate_deck(&cfg, &checkpoints)?;
            notes.push(("mode".into(), "sampled whole-deck permutations from the identity".into()));
            let exact = s.exact_tv.as_ref();
            notes.push((
                "deck_tv".into(),
                if exact.is_some() {
                    "exact law on S_n".to_string()
                } else {
                    format!("not computed for n > {EXACT_DECK_MAX_N}; proxy statistics only")
                },
            ));
            let rows = s
                .stats
                .iter()
                .map(|st| {
                    let mut v = vec![st.mean_fixed_points, st.mean_cycles];
                    if let Some(e) = exact {
                        v.push(e.values[st.t]);
                    }
                    (st.t, v)
                })
                .collect();
            let mut extra = vec!["mean_cycles"];
            if exact.is_some() {
                extra.push("deck_tv");
            }
            SimTable {
                column: "mean_fixed_points",
                trials: a.trials,
                rng_seed: a.seed,
                notes,
                rows,
                extra_columns: extra,
            }
        }
    };
    let mut buf = Vec::new();
    report::write_sim(&mut buf, &table)?;
    Ok(Outcome::ok(buf))
}

fn dispatch(cmd: &Command) -> (Result<Outcome>, Option<&PathBuf>) {
    match cmd {
        Command::Gap(a) => (run_gap(a), a.output.out.as_ref()),
        Command::Scan(a) => (run_scan(a), a.output.out.as_ref()),
        Command::Eigs(a) => (run_eigs(a), a.output.out.as_ref()),
        Command::Bells(a) => (run_bells(a), a.output.out.as_ref()),
        Command::Envelope(a) => (run_envelope(a), a.output.out.as_ref()),
        Command::Bounds(a) => (run_bounds(a), a.output.out.as_ref()),
        Command::BadApprox(a) => (run_bad_approx(a), a.output.out.as_ref()),
        Command::Simulate(a) => (run_simulate(a), a.output.out.as_ref()),
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    let (result, out_path) = dispatch(&cli.command);
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let written = match out_path {
        Some(path) => std::fs::write(path, &outcome.bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(&outcome.bytes).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return 1;
    }
    if outcome.failed_check {
        let _ = writeln!(stderr, "check failed; see report");
        return 2;
    }
    0
}
