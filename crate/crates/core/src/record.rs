//! Output formats: the JSON run record and the CSV tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ensemble::{
    bin_edges, EnsembleConfig, EnsembleResult, Failure, InstanceRecord, ScalingReport, TCurve,
};
use crate::oracle::LzOutcome;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub converged: usize,
    pub failed: usize,
    pub mean_probability: Option<f64>,
}

/// Self-describing ensemble record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: String,
    pub config: EnsembleConfig,
    pub summary: Summary,
    pub histogram: Vec<HistogramBin>,
    pub failures: Vec<Failure>,
    pub instances: Vec<InstanceRecord>,
}

impl RunRecord {
    pub fn from_result(res: &EnsembleResult) -> Self {
        let bins = res.histogram.len();
        let ps = &res.probabilities;
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            config: res.config.clone(),
            summary: Summary {
                runs: res.records.len(),
                converged: ps.len(),
                failed: res.failures.len(),
                mean_probability: (!ps.is_empty())
                    .then(|| ps.iter().sum::<f64>() / ps.len() as f64),
            },
            histogram: res
                .histogram
                .iter()
                .enumerate()
                .map(|(i, &count)| {
                    let (bin_low, bin_high) = bin_edges(i, bins);
                    HistogramBin {
                        bin_low,
                        bin_high,
                        count,
                    }
                })
                .collect(),
            failures: res.failures.clone(),
            instances: res.records.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

pub fn histogram_csv(counts: &[u64]) -> String {
    let mut out = String::from("bin_low,bin_high,count\n");
    for (i, c) in counts.iter().enumerate() {
        let (lo, hi) = bin_edges(i, counts.len());
        let _ = writeln!(out, "{lo},{hi},{c}");
    }
    out
}

/// `T,P` rows; a failed point leaves `P` empty.
pub fn tcurve_csv(curve: &TCurve) -> String {
    let mut out = String::from("T,P\n");
    for (t, p) in curve.times.iter().zip(&curve.probabilities) {
        match p {
            Some(p) => writeln!(out, "{t},{p}"),
            None => writeln!(out, "{t},"),
        }
        .ok();
    }
    out
}

pub fn points_csv(header: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("{header}\n");
    for (x, y) in points {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

pub fn scaling_csv(report: &ScalingReport) -> String {
    let mut out = String::from("qubits,runs,mean_seconds,converged\n");
    for p in &report.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.qubits, p.runs, p.mean_secs, p.converged
        );
    }
    out
}

/// Diagonal of a density matrix as `index,population` rows.
pub fn populations_csv(populations: &[f64]) -> String {
    let mut out = String::from("index,population\n");
    for (i, p) in populations.iter().enumerate() {
        let _ = writeln!(out, "{i},{p}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LzRecord {
    pub delta: f64,
    pub time: f64,
    pub psi_re: [f64; 2],
    pub psi_im: [f64; 2],
    pub probability: f64,
    pub magnitude: f64,
    pub terms_per_segment: Vec<usize>,
    pub converged: bool,
}

impl LzRecord {
    pub fn new(delta: f64, time: f64, out: &LzOutcome) -> Self {
        Self {
            delta,
            time,
            psi_re: [out.psi[0].re, out.psi[1].re],
            psi_im: [out.psi[0].im, out.psi[1].im],
            probability: out.probability,
            magnitude: out.magnitude(),
            terms_per_segment: out.terms_per_segment.clone(),
            converged: out.converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{run_ensemble_with_workers, ScalingPoint};
    use crate::spin_system::QubitCount;

    #[test]
    fn histogram_table() {
        let csv = histogram_csv(&[1, 2]);
        assert_eq!(csv, "bin_low,bin_high,count\n0,0.5,1\n0.5,1,2\n");
    }

    #[test]
    fn curve_table_marks_missing_points() {
        let curve = TCurve {
            times: vec![1.0, 2.5],
            probabilities: vec![Some(0.25), None],
        };
        assert_eq!(tcurve_csv(&curve), "T,P\n1,0.25\n2.5,\n");
    }

    #[test]
    fn scaling_table() {
        let rep = ScalingReport {
            time: 1.0,
            points: vec![ScalingPoint {
                qubits: 4,
                runs: 2,
                mean_secs: 0.5,
                converged: 2,
            }],
            fit: None,
        };
        assert_eq!(
            scaling_csv(&rep),
            "qubits,runs,mean_seconds,converged\n4,2,0.5,2\n"
        );
    }

    #[test]
    fn record_round_trips() {
        let cfg = EnsembleConfig::new(QubitCount::new(3).unwrap(), 2.0, 6, 5);
        let res = run_ensemble_with_workers(&cfg, 1).unwrap();
        let rec = RunRecord::from_result(&res);
        assert_eq!(rec.schema_version, "1");
        assert_eq!(rec.histogram.len(), 32);
        assert_eq!(rec.histogram.last().unwrap().bin_high, 1.0);
        let back: RunRecord = serde_json::from_str(&rec.to_json()).unwrap();
        assert_eq!(back, rec);
    }
}
