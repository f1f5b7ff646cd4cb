//! strip-euler command-line front end.
//!
//! Exit codes: 0 success, 2 hypothesis or constraint failure (reported),
//! 1 internal error, 64 usage error.

mod manifest;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use manifest::RunManifest;
use strip_euler::certify::{run_criterion, CertifyOptions, ToleranceProfile, CRITERIA};
use strip_euler::dynamics::{epsilon_scaling, run, stability_report, DiagnosticsSeries, InitialCondition, SimConfig};
use strip_euler::functionals::{energy_decomposition, regularized_energy};
use strip_euler::geometry::{default_cell_size, Patch};
use strip_euler::variational::{gap_close, lemma_oned_certify, minimize_binned_intervals, minimize_binned_on_grid};
use strip_euler::{kernel_k, lattice_sum_oracle, par, phi_binned, BinConstraints, IntervalSet};

const EXIT_FAILURE_REPORTED: u8 = 2;
const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "strip-euler", version, about = "Vortex patches on the cylinder R x T")]
struct Cli {
    /// JSON configuration file (required by `simulate`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted. A manifest is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Falls back to STRIP_EULER_THREADS.
    #[arg(long, global = true, env = "STRIP_EULER_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    tolerance_profile: Profile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Profile {
    Strict,
    Default,
}

impl Profile {
    fn name(self) -> &'static str {
        match self {
            Self::Strict => "strict",
            Self::Default => "default",
        }
    }

    fn to_lib(self) -> ToleranceProfile {
        match self {
            Self::Strict => ToleranceProfile::Strict,
            Self::Default => ToleranceProfile::Default,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form kernel against the truncated lattice sum on a grid.
    KernelCheck(KernelCheckArgs),
    /// Regularized energy and its decomposition for a patch file.
    Energy(EnergyArgs),
    /// Gap-closing rearrangement trace for an interval set.
    Rearrange(RearrangeArgs),
    /// Minimizer of Phi under per-bin mass constraints.
    Minimize(MinimizeArgs),
    /// Contour-dynamics run writing a diagnostics CSV.
    Simulate,
    /// Stability verdict for one or more diagnostics series.
    StabilityReport(StabilityArgs),
    /// Runs the acceptance criteria and aggregates pass/fail.
    Certify(CertifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct KernelCheckArgs {
    #[arg(long, default_value_t = 20)]
    grid: usize,
    #[arg(long, default_value_t = 1_000_000)]
    trunc: u64,
}

#[derive(Args, Debug, Serialize)]
struct EnergyArgs {
    #[arg(long)]
    patch: PathBuf,
    #[arg(long = "L")]
    l: f64,
    /// Mask cell size; defaults to min(0.01, L/400).
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct RearrangeArgs {
    #[arg(long)]
    intervals: PathBuf,
    #[arg(long = "L")]
    l: f64,
}

#[derive(Args, Debug, Serialize)]
struct MinimizeArgs {
    #[arg(long)]
    bins: PathBuf,
    /// Largest number of nonempty bins per side searched exhaustively.
    #[arg(long)]
    n_active: Option<usize>,
    #[arg(long, default_value_t = 64)]
    cells_per_bin: usize,
}

#[derive(Args, Debug, Serialize)]
struct StabilityArgs {
    /// Diagnostics CSV; repeat together with --epsilon for a scaling verdict.
    #[arg(long, required = true)]
    series: Vec<PathBuf>,
    #[arg(long = "L")]
    l: f64,
    #[arg(long, required = true)]
    epsilon: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    /// Comma-separated criterion numbers; all when omitted.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
}

/// `simulate --config` file: the initial patch and the (possibly partial)
/// run configuration; missing fields take the defaults for the patch's L.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateFile {
    initial: InitialCondition,
    #[serde(default)]
    sim: Value,
}

enum CliError {
    Usage(String),
    Reported(String),
    Internal(String),
}

impl From<strip_euler::Error> for CliError {
    fn from(e: strip_euler::Error) -> Self {
        use strip_euler::Error as E;
        match e {
            E::Hypothesis(_) | E::Constraint { .. } | E::Domain(_) | E::Geometry(_) | E::Singular { .. } => {
                CliError::Reported(e.to_string())
            }
            E::Velocity(_) | E::Io(_) | E::Json(_) | E::Csv(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Result of a command: the bytes to emit, the resolved configuration for
/// the manifest, and whether a reported failure should set exit code 2.
struct Output {
    bytes: Vec<u8>,
    config: Value,
    failed: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli.threads.unwrap_or(0);
    match par::with_threads(threads, || dispatch(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Reported(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(EXIT_FAILURE_REPORTED)
        }
        Err(CliError::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let start = Instant::now();
    let (name, out) = match &cli.command {
        Command::KernelCheck(a) => ("kernel-check", kernel_check(a)?),
        Command::Energy(a) => ("energy", energy(a)?),
        Command::Rearrange(a) => ("rearrange", rearrange(a)?),
        Command::Minimize(a) => ("minimize", minimize(a)?),
        Command::Simulate => ("simulate", simulate(cli)?),
        Command::StabilityReport(a) => ("stability-report", stability(a)?),
        Command::Certify(a) => ("certify", certify(cli, a)?),
    };
    match &cli.out {
        Some(path) => {
            fs::write(path, &out.bytes)?;
            let mut m = RunManifest::new(name, out.config, cli.seed, par::current_threads(), cli.tolerance_profile.name());
            m.record(path, &out.bytes);
            m.duration_seconds = start.elapsed().as_secs_f64();
            m.write(path)?;
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&out.bytes)?;
        }
    }
    match out.failed {
        Some(msg) => Err(CliError::Reported(msg)),
        None => Ok(()),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn pretty(v: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn kernel_check(a: &KernelCheckArgs) -> CliResult<Output> {
    if a.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let n = a.grid;
    let half = n / 2;
    // |a| in [0.1, 5], half the rows negative
    let a_vals: Vec<f64> = (0..n)
        .map(|i| {
            let (k, m, sign) = if i < half { (i, half, -1.0) } else { (i - half, n - half, 1.0) };
            sign * (0.1 + 4.9 * k as f64 / (m.max(2) - 1) as f64)
        })
        .collect();
    let rows = par::map_indexed(n * n, |k| -> strip_euler::Result<[f64; 8]> {
        let (x, y) = (a_vals[k / n], -PI + 2.0 * PI * (k % n) as f64 / n as f64);
        let c = kernel_k(x, y)?;
        let s = lattice_sum_oracle(x, y, a.trunc)?;
        let err = (c - s.value).norm();
        Ok([x, y, c.u1, c.u2, s.value.u1, s.value.u2, err, s.tail_bound])
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(["a", "b", "u1", "u2", "u1_lattice", "u2_lattice", "abs_err", "tail_bound"]).map_err(csv_err)?;
    let mut max_err: f64 = 0.0;
    for r in rows {
        let r = r?;
        max_err = max_err.max(r[6]);
        w.write_record(r.iter().map(|v| format!("{v:?}"))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    eprintln!("kernel-check: max abs_err {max_err:e} over {} points", n * n);
    Ok(Output { bytes, config: serde_json::to_value(a)?, failed: None })
}

fn energy(a: &EnergyArgs) -> CliResult<Output> {
    let h = a.h.unwrap_or_else(|| default_cell_size(a.l));
    let p = Patch::from_json_str(&read(&a.patch)?)?.with_cell_size(h)?;
    let report = energy_decomposition(&p, a.l).or_else(|e| match e {
        // off the 4 pi L area constraint: F alone is still meaningful
        strip_euler::Error::Hypothesis(m) => Err(CliError::Reported(format!(
            "{m}; F = {:?}",
            regularized_energy(&p).unwrap_or(f64::NAN)
        ))),
        e => Err(e.into()),
    })?;
    let residual = report.identity_residual();
    let body = json!({ "F": report.F, "report": report, "identity_residual": residual });
    Ok(Output { bytes: pretty(&body)?, config: json!({ "patch": a.patch, "L": a.l, "h": h }), failed: None })
}

fn rearrange(a: &RearrangeArgs) -> CliResult<Output> {
    let j: IntervalSet = serde_json::from_str(&read(&a.intervals)?)
        .map_err(|e| CliError::Reported(format!("invalid interval set: {e}")))?;
    let (fin, trace) = gap_close(&j, a.l)?;
    let lemma = lemma_oned_certify(&j, a.l)?;
    let body = json!({
        "final": fin,
        "total_delta_phi": trace.total_delta(),
        "trace": trace,
        "lemma": lemma,
    });
    Ok(Output { bytes: pretty(&body)?, config: serde_json::to_value(a)?, failed: None })
}

fn minimize(a: &MinimizeArgs) -> CliResult<Output> {
    let c: BinConstraints = serde_json::from_str(&read(&a.bins)?)
        .map_err(|e| CliError::Reported(format!("invalid bin constraints: {e}")))?;
    c.validate()?;
    let n_active = a.n_active.unwrap_or_else(|| c.rho_plus.len().max(c.rho_minus.len()));
    let (set, phi) = minimize_binned_intervals(&c, n_active)?;
    let density = minimize_binned_on_grid(&c, n_active, a.cells_per_bin)?;
    let phi_grid = phi_binned(&c, &density)?;
    let body = json!({ "intervals": set, "phi": phi, "phi_on_grid": phi_grid, "density": density });
    Ok(Output { bytes: pretty(&body)?, config: serde_json::to_value(a)?, failed: None })
}

fn simulate(cli: &Cli) -> CliResult<Output> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("simulate needs --config".into()))?;
    let file: SimulateFile =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("invalid simulate config: {e}")))?;
    let p0 = file.initial.build()?;
    let l = match &file.initial {
        InitialCondition::Rectangle { l, .. } | InitialCondition::Sinusoidal { l, .. } => *l,
        InitialCondition::Disc { .. } => {
            file.sim.get("L").and_then(Value::as_f64).unwrap_or_else(|| p0.contour_area() / (4.0 * PI))
        }
    };
    let mut base = serde_json::to_value(SimConfig::for_length(l))?;
    if let InitialCondition::Sinusoidal { epsilon, .. } = file.initial {
        base["epsilon"] = json!(epsilon);
    }
    match &file.sim {
        Value::Null => {}
        Value::Object(m) => {
            for (k, v) in m {
                base[k] = v.clone();
            }
        }
        _ => return Err(CliError::Usage("`sim` must be an object".into())),
    }
    if let Some(s) = cli.seed {
        base["seed"] = json!(s);
    }
    let cfg: SimConfig =
        serde_json::from_value(base).map_err(|e| CliError::Usage(format!("invalid sim config: {e}")))?;
    cfg.validate()?;
    let series = run(&p0, &cfg)?;
    if series.exploratory {
        eprintln!("simulate: initial patch fails the hypothesis check; run flagged exploratory");
    }
    let failed = series.halted.as_ref().map(|h| format!("run halted: {h}"));
    let config = json!({ "initial": file.initial, "sim": cfg });
    Ok(Output { bytes: series.to_csv_string()?.into_bytes(), config, failed })
}

fn stability(a: &StabilityArgs) -> CliResult<Output> {
    if a.series.len() != a.epsilon.len() {
        return Err(CliError::Usage("give one --epsilon per --series".into()));
    }
    let mut reports = Vec::new();
    for (path, &eps) in a.series.iter().zip(&a.epsilon) {
        let f = fs::File::open(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let s = DiagnosticsSeries::read_csv(f)?;
        reports.push(stability_report(&s, a.l, eps)?);
    }
    let body = if reports.len() == 1 {
        json!({ "report": reports[0], "passes_1e-3": reports[0].passes(1e-3) })
    } else {
        json!({ "reports": reports, "scaling": epsilon_scaling(&reports) })
    };
    Ok(Output { bytes: pretty(&body)?, config: serde_json::to_value(a)?, failed: None })
}

fn certify(cli: &Cli, a: &CertifyArgs) -> CliResult<Output> {
    let ids = if a.criteria.is_empty() { CRITERIA.to_vec() } else { a.criteria.clone() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.contains(id)) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let mut opts = CertifyOptions { profile: cli.tolerance_profile.to_lib(), ..CertifyOptions::default() };
    if let Some(s) = cli.seed {
        opts.seed = s;
    }
    let mut outcomes = Vec::new();
    for id in ids {
        let o = run_criterion(id, &opts);
        eprintln!("{o}");
        outcomes.push(o);
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    let body = json!({ "passed": failed.is_empty(), "outcomes": outcomes });
    let failed = (!failed.is_empty()).then(|| format!("criteria {failed:?} failed"));
    // wall-clock timings vary between runs; keep them out of the output
    let mut body = body;
    if let Some(list) = body["outcomes"].as_array_mut() {
        for o in list {
            if let Some(m) = o.as_object_mut() {
                m.remove("seconds");
            }
        }
    }
    Ok(Output { bytes: pretty(&body)?, config: json!({ "seed": opts.seed, "profile": opts.profile }), failed })
}
