//! `substoch`: command-line access to cycles, spectra, constructions,
//! recurrence classification, inequality suites and sweeps.

use std::fs;
use std::io::{self, Read, Write};
use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use substoch_core::classification::{classify, ClassifyOptions, Confidence, Verdict};
use substoch_core::constructions::{build_named, Prop2, FAMILY_NAMES};
use substoch_core::cycles::{enumerate_cycles, omega, GainReport};
use substoch_core::digraph::{DigraphFile, WeightedDigraph};
use substoch_core::fvs::{min_cycle_transversal, DEFAULT_NODE_BUDGET};
use substoch_core::inequalities::{run_suite, Suite, SuiteSpec};
use substoch_core::scalar::{Mode, Rational, Scalar};
use substoch_core::spectral::{
    lambda_ladder, perron_root, spectral_report, CharpolyMethod, LadderMode, DEFAULT_SUBSET_BUDGET,
};
use substoch_core::sweep::{fit_decay, log_grid, run_sweep_with_progress, SweepOp, SweepSpec, SweepTable, SWEEP_COLUMNS, SWEEP_FORMAT_VERSION};

const EXIT_NUMERICAL: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

#[derive(Parser)]
#[command(name = "substoch", version, about = "Spectral analysis of substochastic weightings of strong digraphs")]
struct Cli {
    /// Arithmetic: exact rationals or f64. Defaults to exact for digraph files
    /// and inequality suites, float for family ladders, sweeps and classification.
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Seed for randomized suites and sweep bookkeeping.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Simple cycles, minimum cycle transversals and maximal cycle gains.
    #[command(subcommand)]
    Cycles(CyclesCmd),
    /// Perron roots, characteristic polynomials and truncation ladders.
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// Transient/recurrent verdict for a named family.
    Classify(ClassifyArgs),
    /// Emit a truncation of a built-in construction as a digraph file.
    Construct(ConstructArgs),
    /// Run a seeded inequality suite.
    Verify(VerifyArgs),
    /// Per-n table of λ_n, ω_n and FVS size for a named family.
    Sweep(SweepArgs),
    /// Fit gap ≈ A·n^b (optionally times (ln n)^c) to a sweep table.
    Fit(FitArgs),
}

#[derive(Args)]
struct InputArg {
    /// Digraph JSON file ({order, arcs: [[u, v, "w"], ...]}, 1-based); `-` or
    /// absent reads standard input.
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CyclesCmd {
    /// List simple cycles with their gains.
    Enumerate {
        #[command(flatten)]
        input: InputArg,
        /// Longest cycle length to report.
        #[arg(long)]
        max_len: Option<usize>,
        /// Stop after this many cycles.
        #[arg(long)]
        max_count: Option<usize>,
    },
    /// Minimum cycle transversal (feedback vertex set).
    Fvs {
        #[command(flatten)]
        input: InputArg,
        /// Branch-and-bound node budget.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
    },
    /// Largest gain over cycles of length at most N.
    Omega {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        n: usize,
        /// Skip a cycle that uses every arc of the digraph.
        #[arg(long)]
        proper_only: bool,
        /// Cap on the number of cycles visited.
        #[arg(long)]
        budget: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SpectralCmd {
    /// Perron root with a Collatz–Wielandt bracket.
    Perron {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// det(I − zA) coefficients, nonzero eigenvalue count and det(I − A).
    Charpoly {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value = "coates")]
        method: CharpolyMethod,
        /// Cap on cycle unions visited by the Coates expansion.
        #[arg(long, default_value_t = 1 << 22)]
        budget: usize,
    },
    /// λ_n over a list of truncation orders.
    Ladder {
        #[command(flatten)]
        family: FamilyArgs,
        /// Comma-separated orders.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// `leading` truncations or `sup-exact` over all n-subsets.
        #[arg(long, default_value = "leading")]
        ladder_mode: LadderMode,
        /// Universe size for `sup-exact`.
        #[arg(long)]
        universe: Option<usize>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// Built-in family name.
    #[arg(long)]
    family: String,
    /// Family parameters as JSON.
    #[arg(long, default_value = "{}")]
    params: String,
}

impl FamilyArgs {
    fn params(&self) -> Result<Value> {
        serde_json::from_str(&self.params).context("--params is not valid JSON")
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Largest truncation order used for Green sums.
    #[arg(long, default_value_t = 64)]
    n_max: usize,
    /// Number of Neumann terms.
    #[arg(long, default_value_t = 2000)]
    p_max: usize,
    /// Return vertex, 1-based.
    #[arg(long)]
    vertex: Option<usize>,
    /// Divergence threshold on successive Green increments.
    #[arg(long, default_value_t = 1.0)]
    growth_ratio: f64,
}

#[derive(Args)]
struct ConstructArgs {
    /// One of example1, example2, prop1, prop2, corollary1, theorem2-fast, loop, finite.
    family: String,
    #[arg(long, default_value = "{}")]
    params: String,
    /// Truncation order to emit.
    #[arg(long)]
    emit_truncation: Option<usize>,
    /// Emit the certification report instead (prop2 only).
    #[arg(long)]
    report: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// boyle-handelman, ksv, lemma-a1, lemma-a2, a1-product, sigma-k, zeta or conjecture.
    suite: Suite,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    order_min: usize,
    #[arg(long, default_value_t = 8)]
    order_max: usize,
    /// Largest denominator of the random weights.
    #[arg(long, default_value_t = 8)]
    max_denominator: u32,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Comma-separated, strictly increasing orders.
    #[arg(long, value_delimiter = ',', num_args = 0.., conflicts_with = "log_grid")]
    n_grid: Vec<usize>,
    /// Geometric grid `lo:hi:count`.
    #[arg(long)]
    log_grid: Option<String>,
    /// Comma-separated subset of lambda, omega, fvs.
    #[arg(long, value_delimiter = ',', default_value = "lambda,omega,fvs")]
    ops: Vec<String>,
    /// Cap on cycles visited per ω_n cell.
    #[arg(long)]
    cycle_budget: Option<usize>,
    /// Suppress progress on standard error.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep table (CSV or JSON); `-` or absent reads standard input.
    input: Option<PathBuf>,
    /// Column holding the order.
    #[arg(long, default_value = "n")]
    x: String,
    /// Column holding the gap.
    #[arg(long, default_value = "gap_to_limit")]
    y: String,
    /// Row range `a..b` (0-based, after dropping empty cells).
    #[arg(long)]
    window: Option<String>,
    /// Include a ln ln n regressor.
    #[arg(long)]
    log_correction: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

enum Output {
    Json(Value),
    Csv(String),
}

fn run(cli: &Cli) -> Result<u8> {
    let (out, code) = dispatch(cli)?;
    let text = match out {
        Output::Json(v) => serde_json::to_string_pretty(&v)? + "\n",
        Output::Csv(s) => s,
    };
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(code)
}

fn to_json<S: Serialize>(s: &S) -> Result<Output> {
    Ok(Output::Json(serde_json::to_value(s)?))
}

fn json_only(cli: &Cli, what: &str) -> Result<()> {
    if cli.format == Format::Csv {
        bail!("{what} has no CSV form; use --format json");
    }
    Ok(())
}

fn read_text(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn read_digraph<T: Scalar>(input: &InputArg) -> Result<WeightedDigraph<T>> {
    let file = DigraphFile::parse(&read_text(&input.input)?)?;
    Ok(file.to_digraph()?)
}

fn dispatch(cli: &Cli) -> Result<(Output, u8)> {
    let exact = |default: Mode| cli.mode.unwrap_or(default) == Mode::Exact;
    match &cli.command {
        Command::Cycles(c) => {
            json_only(cli, "cycles")?;
            let out = if exact(Mode::Exact) { cycles::<Rational>(c)? } else { cycles::<f64>(c)? };
            Ok((out, 0))
        }
        Command::Spectral(c) => {
            let out = if exact(if matches!(c, SpectralCmd::Ladder { .. }) { Mode::Float } else { Mode::Exact }) {
                spectral::<Rational>(cli, c)?
            } else {
                spectral::<f64>(cli, c)?
            };
            Ok((out, 0))
        }
        Command::Classify(a) => {
            json_only(cli, "classify")?;
            if exact(Mode::Float) { classify_cmd::<Rational>(a) } else { classify_cmd::<f64>(a) }
        }
        Command::Construct(a) => {
            json_only(cli, "construct")?;
            let out = if exact(Mode::Exact) { construct::<Rational>(a)? } else { construct::<f64>(a)? };
            Ok((out, 0))
        }
        Command::Verify(a) => {
            json_only(cli, "verify")?;
            let spec = SuiteSpec {
                count: a.count,
                seed: cli.seed,
                order_min: a.order_min,
                order_max: a.order_max,
                max_denominator: a.max_denominator as _,
            };
            if spec.order_min < 1 || spec.order_min > spec.order_max {
                bail!("need 1 ≤ --order-min ≤ --order-max");
            }
            let report = if exact(Mode::Exact) { run_suite::<Rational>(a.suite, &spec) } else { run_suite::<f64>(a.suite, &spec) };
            let code = if report.passed() { 0 } else { 1 };
            if code != 0 {
                eprintln!("{} violation(s) of {}", report.violations.len(), a.suite.name());
            }
            Ok((to_json(&report)?, code))
        }
        Command::Sweep(a) => Ok((sweep(cli, a)?, 0)),
        Command::Fit(a) => {
            json_only(cli, "fit")?;
            Ok((fit(a)?, 0))
        }
    }
}

fn cycles<T: Scalar>(c: &CyclesCmd) -> Result<Output> {
    match c {
        CyclesCmd::Enumerate { input, max_len, max_count } => {
            let d = read_digraph::<T>(input)?;
            let e = enumerate_cycles(&d, *max_len, *max_count);
            let list: Vec<Value> = e
                .cycles
                .iter()
                .map(|c| {
                    let g = GainReport::from(&c.gain());
                    json!({
                        "vertices": c.vertices.iter().map(|v| v + 1).collect::<Vec<_>>(),
                        "gain": g.gain,
                        "weight": g.weight,
                        "length": g.length,
                    })
                })
                .collect();
            Ok(Output::Json(json!({ "count": list.len(), "truncated": e.truncated, "cycles": list })))
        }
        CyclesCmd::Fvs { input, budget } => {
            let d = read_digraph::<T>(input)?;
            let t = min_cycle_transversal(&d, *budget);
            Ok(Output::Json(json!({
                "vertices": t.vertices.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "size": t.size(),
                "optimality": t.optimality,
            })))
        }
        CyclesCmd::Omega { input, n, proper_only, budget } => {
            let d = read_digraph::<T>(input)?;
            let (best, complete) = match omega(&d, *n, *proper_only, *budget) {
                Ok(g) => (g, true),
                Err(e) => (e.partial, false),
            };
            Ok(Output::Json(json!({
                "n": n,
                "proper_only": proper_only,
                "complete": complete,
                "omega": best.as_ref().map(GainReport::from),
            })))
        }
    }
}

fn spectral<T: Scalar>(cli: &Cli, c: &SpectralCmd) -> Result<Output> {
    match c {
        SpectralCmd::Perron { input, tol } => {
            json_only(cli, "spectral perron")?;
            to_json(&perron_root(&read_digraph::<T>(input)?, *tol))
        }
        SpectralCmd::Charpoly { input, method, budget } => {
            json_only(cli, "spectral charpoly")?;
            to_json(&spectral_report(&read_digraph::<T>(input)?, *method, *budget)?)
        }
        SpectralCmd::Ladder { family, n_list, ladder_mode, universe } => {
            let f = build_named::<T>(&family.family, &family.params()?)?;
            let s = lambda_ladder(&f, n_list, *ladder_mode, *universe, DEFAULT_SUBSET_BUDGET)?;
            match cli.format {
                Format::Json => to_json(&s),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["n", "lambda_n", "lower", "upper", "lambda_closed_form", "gap_to_limit"])?;
                    for r in &s.rows {
                        w.write_record([
                            r.n.to_string(),
                            fmt_f64(Some(r.lambda)),
                            fmt_f64(Some(r.lower)),
                            fmt_f64(Some(r.upper)),
                            fmt_f64(r.closed_form),
                            fmt_f64(r.gap_to_limit),
                        ])?;
                    }
                    Ok(Output::Csv(String::from_utf8(w.into_inner()?)?))
                }
            }
        }
    }
}

fn fmt_f64(x: Option<f64>) -> String {
    x.map_or_else(String::new, |x| format!("{x:.17e}"))
}

fn classify_cmd<T: Scalar>(a: &ClassifyArgs) -> Result<(Output, u8)> {
    let f = build_named::<T>(&a.family.family, &a.family.params()?)?;
    let vertex = match a.vertex {
        Some(0) => bail!("--vertex is 1-based"),
        v => v.map(|v| v - 1),
    };
    let opts = ClassifyOptions {
        n_max: a.n_max,
        p_max: a.p_max,
        vertex,
        growth_ratio: a.growth_ratio,
        ..ClassifyOptions::default()
    };
    let v = classify(&f, &opts);
    let code = match (v.verdict, v.confidence) {
        (Verdict::Unknown, _) => EXIT_UNKNOWN,
        (_, Confidence::Numerical) => EXIT_NUMERICAL,
        (_, Confidence::Certified) => 0,
    };
    Ok((to_json(&v)?, code))
}

fn construct<T: Scalar>(a: &ConstructArgs) -> Result<Output> {
    let params: Value = serde_json::from_str(&a.params).context("--params is not valid JSON")?;
    if a.report {
        if a.family != "prop2" {
            bail!("--report is available for prop2 only");
        }
        return to_json(Prop2::from_params(params)?.report());
    }
    if !FAMILY_NAMES.contains(&a.family.as_str()) && a.family != "theorem2_fast" {
        bail!("unknown family {:?}; expected one of {}", a.family, FAMILY_NAMES.join(", "));
    }
    let n = a.emit_truncation.ok_or_else(|| anyhow!("--emit-truncation N is required"))?;
    let f = build_named::<T>(&a.family, &params)?;
    to_json(&f.truncate(n)?.to_file())
}

fn parse_ops(ops: &[String]) -> Result<Vec<SweepOp>> {
    ops.iter()
        .map(|o| match o.as_str() {
            "lambda" => Ok(SweepOp::Lambda),
            "omega" => Ok(SweepOp::Omega),
            "fvs" => Ok(SweepOp::Fvs),
            o => Err(anyhow!("unknown sweep operation {o:?}; expected lambda, omega or fvs")),
        })
        .collect()
}

fn parse_log_grid(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("--log-grid {s:?} is not lo:hi:count"))?;
    match parts[..] {
        [lo, hi, count] if lo >= 1 && lo <= hi => Ok(log_grid(lo, hi, count)),
        _ => bail!("--log-grid {s:?} is not lo:hi:count with 1 ≤ lo ≤ hi"),
    }
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<Output> {
    let grid = match &a.log_grid {
        Some(g) => parse_log_grid(g)?,
        None => a.n_grid.clone(),
    };
    let mut spec = SweepSpec::new(&a.family.family, grid);
    spec.params = a.family.params()?;
    spec.ops = parse_ops(&a.ops)?;
    spec.seed = cli.seed;
    spec.mode = cli.mode.unwrap_or(Mode::Float);
    if let Some(b) = a.cycle_budget {
        spec.cycle_budget = b;
    }
    let total = spec.n_grid.len();
    let done = AtomicUsize::new(0);
    let quiet = a.quiet;
    let progress = move |n: usize| {
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        if !quiet {
            eprintln!("sweep: n = {n} done ({k}/{total})");
        }
    };
    let table = run_sweep_with_progress(&spec, &progress)?;
    match cli.format {
        Format::Json => to_json(&table),
        Format::Csv => Ok(Output::Csv(sweep_csv(&table)?)),
    }
}

fn sweep_csv(t: &SweepTable) -> Result<String> {
    let limit = t.declared_limit.map_or_else(|| "none".to_string(), |l| format!("{l:.17e}"));
    let mode = match t.mode {
        Mode::Exact => "exact",
        Mode::Float => "float",
    };
    let mut buf = format!(
        "# substoch-sweep v{SWEEP_FORMAT_VERSION} family={} mode={mode} seed={} declared_limit={limit}\n",
        t.family, t.seed
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS)?;
    for r in &t.rows {
        w.write_record(r.fields())?;
    }
    buf.push_str(&String::from_utf8(w.into_inner()?)?);
    Ok(buf)
}

fn parse_window(s: &str) -> Result<Range<usize>> {
    let (a, b) = s.split_once("..").ok_or_else(|| anyhow!("--window {s:?} is not a..b"))?;
    Ok(a.trim().parse()?..b.trim().parse()?)
}

/// (x, y) pairs from a sweep table in CSV or JSON, skipping rows where either
/// cell is empty.
fn read_series(text: &str, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let v: Value = serde_json::from_str(trimmed)?;
        let rows = match &v {
            Value::Object(o) => o.get("rows").and_then(Value::as_array).ok_or_else(|| anyhow!("JSON input has no rows array"))?,
            Value::Array(a) => a,
            _ => unreachable!(),
        };
        return Ok(rows
            .iter()
            .filter_map(|r| Some((r.get(x)?.as_f64()?, r.get(y)?.as_f64()?)))
            .collect());
    }
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rd.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| anyhow!("no column {name:?}"));
    let (ix, iy) = (col(x)?, col(y)?);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let (sx, sy) = (&rec[ix], &rec[iy]);
        if sx.is_empty() || sy.is_empty() {
            continue;
        }
        out.push((sx.parse().with_context(|| format!("bad {x} value {sx:?}"))?, sy.parse().with_context(|| format!("bad {y} value {sy:?}"))?));
    }
    Ok(out)
}

fn fit(a: &FitArgs) -> Result<Output> {
    let series = read_series(&read_text(&a.input)?, &a.x, &a.y)?;
    let window = a.window.as_deref().map(parse_window).transpose()?;
    to_json(&fit_decay(&series, window, a.log_correction)?)
}
