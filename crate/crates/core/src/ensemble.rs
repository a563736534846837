//! Many-instance runs: success-probability ensembles, `P(T)` curves and
//! timing sweeps.
//!
//! Instance `k` always uses the Ising couplings drawn from
//! [`instance_seed`]`(master_seed, k)`, and results are gathered in instance
//! order, so an ensemble is a pure function of its configuration whatever
//! the worker count.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::lindblad::propagate_density;
use crate::seed::instance_seed;
use crate::spin_system::{ground_space, IsingDiagonal, QubitCount};
use crate::taylor::{AnnealParams, Annealer, SegmentSchedule};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "ANNEAL_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Unitary,
    /// Master equation with `L = l_scale·â`.
    Lindblad {
        l_scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub qubits: QubitCount,
    pub time: f64,
    pub runs: usize,
    pub master_seed: u64,
    pub schedule: SegmentSchedule,
    pub bins: usize,
    pub mode: Mode,
}

impl EnsembleConfig {
    /// Unitary ensemble with 32 bins and the default schedule.
    pub fn new(qubits: QubitCount, time: f64, runs: usize, master_seed: u64) -> Self {
        Self {
            qubits,
            time,
            runs,
            master_seed,
            schedule: SegmentSchedule::default(),
            bins: 32,
            mode: Mode::Unitary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        AnnealParams::new(self.qubits, self.time)?;
        self.schedule.validate()?;
        if self.runs == 0 {
            return Err(AnnealError::InvalidParameter(
                "runs must be at least 1".into(),
            ));
        }
        if self.bins < 2 {
            return Err(AnnealError::InvalidParameter(
                "bins must be at least 2".into(),
            ));
        }
        if let Mode::Lindblad { l_scale } = self.mode {
            if !(l_scale >= 0.0 && l_scale.is_finite()) {
                return Err(AnnealError::InvalidParameter(format!(
                    "Lindblad scale must be non-negative, got {l_scale}"
                )));
            }
            if self.qubits.get() > crate::lindblad::MAX_LINDBLAD_QUBITS {
                return Err(AnnealError::Capacity {
                    what: "density matrix",
                    found: self.qubits.get(),
                    max: crate::lindblad::MAX_LINDBLAD_QUBITS,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub seed: u64,
    /// `None` when the propagation failed outright.
    pub probability: Option<f64>,
    pub converged: bool,
    /// Norm drift (unitary) or trace drift (Lindblad).
    pub drift: f64,
    pub terms_per_segment: Vec<usize>,
    pub ground_energy: i64,
    /// Ground-space degeneracy in the full space.
    pub degeneracy: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl InstanceRecord {
    pub fn is_success(&self) -> bool {
        self.converged && self.probability.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_secs: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub config: EnsembleConfig,
    /// Converged instances only, in instance order.
    pub probabilities: Vec<f64>,
    pub failures: Vec<Failure>,
    pub histogram: Vec<u64>,
    pub records: Vec<InstanceRecord>,
    /// Wall-clock data; not part of the deterministic payload.
    #[serde(skip)]
    pub timing: Timing,
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Wall-clock start; `None` on wasm32, where timings read zero.
fn clock() -> Option<Instant> {
    (!cfg!(target_arch = "wasm32")).then(Instant::now)
}

fn seconds_since(start: Option<Instant>) -> f64 {
    start.map_or(0.0, |s| s.elapsed().as_secs_f64())
}

/// Maps `f` over `0..len` on `workers` threads, keeping index order.
fn ordered_map<T, F>(len: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if workers > 1 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(|| (0..len).into_par_iter().map(&f).collect());
            }
        }
    }
    let _ = workers;
    (0..len).map(f).collect()
}

fn run_instance(annealer: &Annealer, config: &EnsembleConfig, index: usize) -> InstanceRecord {
    let seed = instance_seed(config.master_seed, index as u64);
    let hf = IsingDiagonal::random(config.qubits, seed);
    let gs = ground_space(&hf);
    let mut record = InstanceRecord {
        index,
        seed,
        probability: None,
        converged: false,
        drift: f64::NAN,
        terms_per_segment: Vec::new(),
        ground_energy: gs.energy,
        degeneracy: 2 * gs.degeneracy(),
        error: None,
    };
    let outcome = match config.mode {
        Mode::Unitary => annealer
            .propagate(config.time, &hf, &config.schedule)
            .map(|r| (r.success_p, r.converged, r.norm_drift, r.terms_per_segment)),
        Mode::Lindblad { l_scale } => AnnealParams::new(config.qubits, config.time)
            .and_then(|p| propagate_density(&p, &hf, l_scale, &config.schedule))
            .map(|r| {
                let d = r.diagnostics;
                (r.success_p, d.converged, d.trace_drift, d.terms_per_segment)
            }),
    };
    match outcome {
        Ok((p, converged, drift, terms)) => {
            record.probability = Some(p);
            record.converged = converged;
            record.drift = drift;
            record.terms_per_segment = terms;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleResult> {
    run_ensemble_with_workers(config, default_workers())
}

pub fn run_ensemble_with_workers(
    config: &EnsembleConfig,
    workers: usize,
) -> Result<EnsembleResult> {
    config.validate()?;
    let workers = workers.max(1);
    let start = clock();
    let annealer = Annealer::new(config.qubits);
    let records = ordered_map(config.runs, workers, |k| run_instance(&annealer, config, k));

    let mut probabilities = Vec::with_capacity(records.len());
    let mut failures = Vec::new();
    for r in &records {
        match (r.probability, r.converged) {
            (Some(p), true) => probabilities.push(p),
            _ => failures.push(Failure {
                index: r.index,
                seed: r.seed,
                reason: r
                    .error
                    .clone()
                    .unwrap_or_else(|| "term budget exhausted".to_string()),
            }),
        }
    }
    let histogram = histogram(&probabilities, config.bins)?;
    Ok(EnsembleResult {
        config: config.clone(),
        probabilities,
        failures,
        histogram,
        records,
        timing: Timing {
            elapsed_secs: seconds_since(start),
            workers,
        },
    })
}

/// Counts over `bins` equal bins of `[0, 1]`; bin `i` is
/// `[i/bins, (i+1)/bins)` except the last, which also holds `1`.
pub fn histogram(ps: &[f64], bins: usize) -> Result<Vec<u64>> {
    if bins == 0 {
        return Err(AnnealError::InvalidParameter(
            "bins must be positive".into(),
        ));
    }
    let mut counts = vec![0u64; bins];
    for &p in ps {
        if !(0.0..=1.0).contains(&p) {
            return Err(AnnealError::InvariantViolation(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let idx = ((p * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

/// `[low, high)` edges of histogram bin `i`.
pub fn bin_edges(i: usize, bins: usize) -> (f64, f64) {
    (i as f64 / bins as f64, (i + 1) as f64 / bins as f64)
}

/// Indices of strict local maxima of a histogram, allowing flat tops: a
/// plateau counts once if both neighbours of the plateau are lower.
pub fn local_maxima(counts: &[u64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < counts.len() {
        let mut j = i;
        while j + 1 < counts.len() && counts[j + 1] == counts[i] {
            j += 1;
        }
        let left_lower = i == 0 || counts[i - 1] < counts[i];
        let right_lower = j + 1 == counts.len() || counts[j + 1] < counts[i];
        if left_lower && right_lower && counts[i] > 0 {
            peaks.push(i);
        }
        i = j + 1;
    }
    peaks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TCurve {
    pub times: Vec<f64>,
    /// `None` where the point failed to converge or errored.
    pub probabilities: Vec<Option<f64>>,
}

/// Evolves one instance (couplings from `seed`) for every anneal time.
pub fn sweep_t(
    qubits: QubitCount,
    seed: u64,
    times: &[f64],
    mode: Mode,
    schedule: &SegmentSchedule,
) -> Result<TCurve> {
    schedule.validate()?;
    for &t in times {
        AnnealParams::new(qubits, t)?;
    }
    let hf = IsingDiagonal::random(qubits, seed);
    let annealer = Annealer::new(qubits);
    let probabilities = ordered_map(times.len(), default_workers(), |i| {
        let t = times[i];
        match mode {
            Mode::Unitary => annealer
                .propagate(t, &hf, schedule)
                .ok()
                .filter(|r| r.converged)
                .map(|r| r.success_p),
            Mode::Lindblad { l_scale } => AnnealParams::new(qubits, t)
                .and_then(|p| propagate_density(&p, &hf, l_scale, schedule))
                .ok()
                .filter(|r| r.diagnostics.converged)
                .map(|r| r.success_p),
        }
    });
    Ok(TCurve {
        times: times.to_vec(),
        probabilities,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub qubits: u32,
    pub runs: usize,
    pub mean_secs: f64,
    pub converged: usize,
}

/// Least-squares fit `time ≈ c·e^{m·N}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub slope: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub time: f64,
    pub points: Vec<ScalingPoint>,
    /// Fit over the three largest registers; absent with a single size.
    pub fit: Option<ExpFit>,
}

/// Times `runs_per_n` sequential propagations per register size.
pub fn scaling_sweep(
    qubits: &[QubitCount],
    time: f64,
    runs_per_n: usize,
    schedule: &SegmentSchedule,
    master_seed: u64,
) -> Result<ScalingReport> {
    schedule.validate()?;
    if runs_per_n == 0 || qubits.is_empty() {
        return Err(AnnealError::InvalidParameter(
            "scaling sweep needs at least one size and one run".into(),
        ));
    }
    let mut points = Vec::with_capacity(qubits.len());
    for &n in qubits {
        AnnealParams::new(n, time)?;
        let annealer = Annealer::new(n);
        let mut total = 0.0;
        let mut converged = 0;
        for k in 0..runs_per_n {
            let hf = IsingDiagonal::random(n, instance_seed(master_seed, k as u64));
            let start = clock();
            let res = annealer.propagate(time, &hf, schedule);
            total += seconds_since(start);
            converged += res.map_or(0, |r| r.converged as usize);
        }
        points.push(ScalingPoint {
            qubits: n.get(),
            runs: runs_per_n,
            mean_secs: total / runs_per_n as f64,
            converged,
        });
    }

    let mut by_size: Vec<&ScalingPoint> = points.iter().collect();
    by_size.sort_by_key(|p| p.qubits);
    let tail = &by_size[by_size.len().saturating_sub(3)..];
    let fit = (tail.len() >= 2).then(|| fit_exponential(tail));
    Ok(ScalingReport { time, points, fit })
}

fn fit_exponential(points: &[&ScalingPoint]) -> ExpFit {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.qubits as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_secs.max(1e-12).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    ExpFit {
        slope,
        prefactor: (my - slope * mx).exp(),
    }
}
