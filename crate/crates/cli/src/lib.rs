//! Argument handling and subcommands for the `anneal` binary.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use anneal_core::ensemble::{self, default_workers, Mode};
use anneal_core::lindblad::propagate_density;
use anneal_core::oracle::{lz_propagate, lz_sweep, LzParams};
use anneal_core::record::{self, LzRecord, RunRecord};
use anneal_core::{
    AnnealError, AnnealParams, Annealer, EnsembleConfig, IsingDiagonal, QubitCount, SegmentSchedule,
};

/// Exit status for a run that finished but exhausted its term budget.
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_INVALID: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Anneal(#[from] AnnealError),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Parser)]
#[command(name = "anneal", version, about = "Quantum annealing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Anneal one random instance.
    Single(SingleArgs),
    /// Success-probability histogram over many instances.
    Ensemble(EnsembleArgs),
    /// Density-matrix anneal of one instance with `L = lscale·â`.
    Lindblad(LindbladArgs),
    /// `P(T)` for one instance over a range of anneal times.
    Sweep(SweepArgs),
    /// Two-level sweep benchmark.
    Lz(LzArgs),
    /// Two-level `P(T)` curve.
    LzSweep(LzSweepArgs),
    /// Wall time per instance against register size.
    Scaling(ScalingArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// Segments on [0, 1]; defaults to ceil(T).
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_terms: usize,
}

impl ScheduleArgs {
    fn schedule(&self) -> Result<SegmentSchedule, CliError> {
        let mut s = SegmentSchedule::default()
            .with_tol(self.tol)
            .with_max_terms(self.max_terms);
        if let Some(k) = self.segments {
            s = s.with_segments(k);
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SingleArgs {
    #[arg(long)]
    pub qubits: u32,
    #[arg(long)]
    pub time: f64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// JSON record destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub qubits: u32,
    #[arg(long)]
    pub time: f64,
    #[arg(long)]
    pub runs: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// `json` writes the full run record, `csv` the histogram table.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Use the master equation with this Lindblad scale.
    #[arg(long)]
    pub lscale: Option<f64>,
    /// Worker threads; overrides ANNEAL_WORKERS.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Debug, Args)]
pub struct LindbladArgs {
    #[arg(long)]
    pub qubits: u32,
    #[arg(long)]
    pub time: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lscale: f64,
    #[arg(long)]
    pub seed: u64,
    /// JSON record destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of the final populations.
    #[arg(long)]
    pub populations: Option<PathBuf>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub qubits: u32,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub tmin: f64,
    #[arg(long)]
    pub tmax: f64,
    #[arg(long)]
    pub points: usize,
    #[arg(long)]
    pub lscale: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Debug, Args)]
pub struct LzArgs {
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 20.0)]
    pub time: f64,
    #[arg(long, default_value_t = 2)]
    pub segments: usize,
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_terms: usize,
    /// One segment capped at 100 terms, to show the blow-up.
    #[arg(long)]
    pub pathology: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LzSweepArgs {
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 20.0)]
    pub tmin: f64,
    #[arg(long, default_value_t = 50.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Comma-separated register sizes, e.g. `8,10,12,14`.
    #[arg(long)]
    pub qubits_list: String,
    #[arg(long, default_value_t = 10.0)]
    pub time: f64,
    #[arg(long, default_value_t = 3)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(true) => 0,
        Ok(false) => EXIT_NOT_CONVERGED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

/// Returns whether every propagation converged.
pub fn execute(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Single(a) => cmd_single(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Lindblad(a) => cmd_lindblad(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Lz(a) => cmd_lz(a),
        Command::LzSweep(a) => cmd_lz_sweep(a),
        Command::Scaling(a) => cmd_scaling(a),
    }
}

fn check_out(path: &Path) -> Result<(), CliError> {
    if path.as_os_str().is_empty() {
        return Err(CliError::Invalid("output path must not be empty".into()));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("records serialize") + "\n"
}

/// Wall-clock metadata lives beside the result, never inside it.
pub fn timing_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".timing.json");
    PathBuf::from(s)
}

fn check_lscale(l: f64) -> Result<(), CliError> {
    if l >= 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "--lscale must be non-negative, got {l}"
        )))
    }
}

#[derive(Debug, Serialize)]
struct SingleRecord {
    schema_version: &'static str,
    qubits: QubitCount,
    time: f64,
    seed: u64,
    schedule: SegmentSchedule,
    probability: f64,
    norm_drift: f64,
    terms_per_segment: Vec<usize>,
    converged: bool,
    ground_energy: i64,
    degeneracy: usize,
}

fn cmd_single(a: SingleArgs) -> Result<bool, CliError> {
    let qubits = QubitCount::new(a.qubits)?;
    let params = AnnealParams::new(qubits, a.time)?;
    let schedule = a.schedule.schedule()?;
    if let Some(out) = &a.out {
        check_out(out)?;
    }
    let hf = IsingDiagonal::random(qubits, a.seed);
    let res = Annealer::new(qubits).propagate(params.time, &hf, &schedule)?;

    println!("P = {}", res.success_p);
    println!("norm drift = {:e}", res.norm_drift);
    println!("terms per segment = {:?}", res.terms_per_segment);
    if !res.converged {
        println!("warning: term budget exhausted, result not converged");
    }
    if let Some(out) = &a.out {
        let rec = SingleRecord {
            schema_version: record::SCHEMA_VERSION,
            qubits,
            time: a.time,
            seed: a.seed,
            schedule,
            probability: res.success_p,
            norm_drift: res.norm_drift,
            terms_per_segment: res.terms_per_segment.clone(),
            converged: res.converged,
            ground_energy: res.ground.energy,
            degeneracy: 2 * res.ground.degeneracy(),
        };
        write_file(out, &to_json(&rec))?;
    }
    Ok(res.converged)
}

fn cmd_ensemble(a: EnsembleArgs) -> Result<bool, CliError> {
    check_out(&a.out)?;
    let qubits = QubitCount::new(a.qubits)?;
    let mut config = EnsembleConfig::new(qubits, a.time, a.runs, a.seed);
    config.bins = a.bins;
    config.schedule = a.schedule.schedule()?;
    if let Some(l) = a.lscale {
        check_lscale(l)?;
        config.mode = Mode::Lindblad { l_scale: l };
    }
    config.validate()?;
    if a.workers == Some(0) {
        return Err(CliError::Invalid("--workers must be at least 1".into()));
    }
    let workers = a.workers.unwrap_or_else(default_workers);

    let res = ensemble::run_ensemble_with_workers(&config, workers)?;
    let body = match a.format {
        Format::Json => RunRecord::from_result(&res).to_json() + "\n",
        Format::Csv => record::histogram_csv(&res.histogram),
    };
    write_file(&a.out, &body)?;
    write_file(&timing_path(&a.out), &to_json(&res.timing))?;

    println!(
        "{} runs, {} converged, {} failed",
        res.records.len(),
        res.probabilities.len(),
        res.failures.len()
    );
    Ok(res.failures.is_empty())
}

#[derive(Debug, Serialize)]
struct LindbladRecord {
    schema_version: &'static str,
    qubits: QubitCount,
    time: f64,
    l_scale: f64,
    seed: u64,
    schedule: SegmentSchedule,
    probability: f64,
    diagnostics: anneal_core::lindblad::DensityDiagnostics,
    populations: Vec<f64>,
}

fn cmd_lindblad(a: LindbladArgs) -> Result<bool, CliError> {
    let qubits = QubitCount::new(a.qubits)?;
    let params = AnnealParams::new(qubits, a.time)?;
    let schedule = a.schedule.schedule()?;
    check_lscale(a.lscale)?;
    for p in a.out.iter().chain(&a.populations) {
        check_out(p)?;
    }
    let hf = IsingDiagonal::random(qubits, a.seed);
    let run = propagate_density(&params, &hf, a.lscale, &schedule)?;
    let d = &run.diagnostics;

    println!("P = {}", run.success_p);
    println!("trace drift = {:e}", d.trace_drift);
    println!("terms per segment = {:?}", d.terms_per_segment);
    let populations = run.rho.populations();
    if let Some(out) = &a.out {
        let rec = LindbladRecord {
            schema_version: record::SCHEMA_VERSION,
            qubits,
            time: a.time,
            l_scale: a.lscale,
            seed: a.seed,
            schedule,
            probability: run.success_p,
            diagnostics: d.clone(),
            populations: populations.clone(),
        };
        write_file(out, &to_json(&rec))?;
    }
    if let Some(path) = &a.populations {
        write_file(path, &record::populations_csv(&populations))?;
    }
    Ok(d.converged)
}

fn grid(tmin: f64, tmax: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 || !(tmin > 0.0 && tmax >= tmin && tmax.is_finite()) {
        return Err(CliError::Invalid(format!(
            "need 0 < tmin <= tmax and points >= 1, got [{tmin}, {tmax}] with {points}"
        )));
    }
    Ok((0..points)
        .map(|i| {
            if points == 1 {
                tmin
            } else {
                tmin + (tmax - tmin) * i as f64 / (points - 1) as f64
            }
        })
        .collect())
}

fn cmd_sweep(a: SweepArgs) -> Result<bool, CliError> {
    check_out(&a.out)?;
    let qubits = QubitCount::new(a.qubits)?;
    let schedule = a.schedule.schedule()?;
    let times = grid(a.tmin, a.tmax, a.points)?;
    let mode = match a.lscale {
        Some(l) => {
            check_lscale(l)?;
            if qubits.get() > anneal_core::lindblad::MAX_LINDBLAD_QUBITS {
                return Err(AnnealError::Capacity {
                    what: "density matrix",
                    found: qubits.get(),
                    max: anneal_core::lindblad::MAX_LINDBLAD_QUBITS,
                }
                .into());
            }
            Mode::Lindblad { l_scale: l }
        }
        None => Mode::Unitary,
    };
    let curve = ensemble::sweep_t(qubits, a.seed, &times, mode, &schedule)?;
    write_file(&a.out, &record::tcurve_csv(&curve))?;
    let missing = curve.probabilities.iter().filter(|p| p.is_none()).count();
    println!("{} points, {} failed", curve.times.len(), missing);
    Ok(missing == 0)
}

fn cmd_lz(a: LzArgs) -> Result<bool, CliError> {
    let params = LzParams::new(a.delta, a.time)?;
    let schedule = if a.pathology {
        SegmentSchedule::default()
            .with_segments(1)
            .with_max_terms(100)
            .with_tol(a.tol)
    } else {
        SegmentSchedule::default()
            .with_segments(a.segments)
            .with_tol(a.tol)
            .with_max_terms(a.max_terms)
    };
    if let Some(out) = &a.out {
        check_out(out)?;
    }
    let res = lz_propagate(&params, &schedule)?;
    println!("psi(1) = ({}, {})", fmt_c(res.psi[0]), fmt_c(res.psi[1]));
    println!("P = {}", res.probability);
    println!("|psi(1)| = {:e}", res.magnitude());
    println!("terms per segment = {:?}", res.terms_per_segment);
    if !res.converged {
        println!("warning: term budget exhausted, result not converged");
    }
    if let Some(out) = &a.out {
        write_file(out, &to_json(&LzRecord::new(a.delta, a.time, &res)))?;
    }
    Ok(res.converged)
}

fn fmt_c(z: anneal_core::Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn cmd_lz_sweep(a: LzSweepArgs) -> Result<bool, CliError> {
    check_out(&a.out)?;
    let schedule = a.schedule.schedule()?;
    grid(a.tmin, a.tmax, a.points)?;
    let pts = lz_sweep(a.delta, a.tmin, a.tmax, a.points, &schedule)?;
    write_file(&a.out, &record::points_csv("T,P", &pts))?;
    println!("{} points written", pts.len());
    Ok(true)
}

/// Parses `8,10,12` into register sizes.
pub fn parse_qubits_list(s: &str) -> Result<Vec<QubitCount>, CliError> {
    let list: Vec<QubitCount> = s
        .split(',')
        .map(|t| {
            let n: u32 = t.trim().parse().map_err(|_| {
                CliError::Invalid(format!("bad qubit count {t:?} in --qubits-list"))
            })?;
            Ok(QubitCount::new(n)?)
        })
        .collect::<Result<_, CliError>>()?;
    if list.is_empty() {
        return Err(CliError::Invalid("--qubits-list is empty".into()));
    }
    Ok(list)
}

fn cmd_scaling(a: ScalingArgs) -> Result<bool, CliError> {
    check_out(&a.out)?;
    let qubits = parse_qubits_list(&a.qubits_list)?;
    let schedule = a.schedule.schedule()?;
    for &n in &qubits {
        AnnealParams::new(n, a.time)?;
    }
    let report = ensemble::scaling_sweep(&qubits, a.time, a.runs, &schedule, a.seed)?;
    write_file(&a.out, &record::scaling_csv(&report))?;
    for p in &report.points {
        println!("N = {:2}: {:.6} s per instance", p.qubits, p.mean_secs);
    }
    if let Some(fit) = report.fit {
        println!("fit: t ≈ {:.3e}·exp({:.4}·N)", fit.prefactor, fit.slope);
    }
    Ok(report.points.iter().all(|p| p.converged == p.runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_list_parsing() {
        let l = parse_qubits_list("8, 10,12").unwrap();
        assert_eq!(
            l.iter().map(|q| q.get()).collect::<Vec<_>>(),
            vec![8, 10, 12]
        );
        assert!(parse_qubits_list("8,x").is_err());
        assert!(parse_qubits_list("1").is_err());
        assert!(parse_qubits_list("").is_err());
    }

    #[test]
    fn time_grid() {
        assert_eq!(grid(2.0, 4.0, 3).unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(grid(5.0, 5.0, 1).unwrap(), vec![5.0]);
        assert!(grid(0.0, 4.0, 3).is_err());
        assert!(grid(4.0, 2.0, 3).is_err());
    }

    #[test]
    fn timing_sidecar_name() {
        assert_eq!(
            timing_path(Path::new("a/b.json")),
            PathBuf::from("a/b.json.timing.json")
        );
    }

    #[test]
    fn invalid_flags_exit_one() {
        assert_eq!(
            run(["anneal", "single", "--qubits", "1", "--time", "4", "--seed", "1"]),
            1
        );
        assert_eq!(run(["anneal", "single", "--qubits", "4"]), 1);
        assert_eq!(run(["anneal", "bogus"]), 1);
    }
}
