//! Reference solvers used to validate the Taylor propagators.
//!
//! Nothing here goes through the Taylor recurrence except
//! [`lz_propagate`], which is the two-level benchmark of that engine. The
//! Runge-Kutta integrators build their own full-space Hamiltonians from the
//! Ising couplings and their own dense superoperator, so agreement with the
//! propagators is evidence rather than tautology.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::lindblad::{DensityMatrix, SuperopContext};
use crate::spin_system::{IsingDiagonal, QubitCount};
use crate::taylor::{run_segments, DenseGenerator, SegmentSchedule};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest register [`dense_spectrum`] will diagonalise.
pub const MAX_SPECTRUM_QUBITS: u32 = 10;

/// `max(10⁴, 100·T·N²)`
pub fn default_rk4_steps(n: QubitCount, time: f64) -> usize {
    let n = n.get() as f64;
    (100.0 * time * n * n).ceil().max(1e4) as usize
}

/// Full Ising diagonal recomputed straight from the couplings.
pub fn ising_full_diagonal(hf: &IsingDiagonal) -> Vec<f64> {
    let n = hf.qubits().get();
    (0..hf.qubits().full_dim())
        .map(|i| {
            let spin = |k: u32| if (i >> (n - k)) & 1 == 0 { 1.0 } else { -1.0 };
            let mut e = 0.0;
            for k in 1..=n {
                for l in k + 1..=n {
                    e -= hf.coupling(k, l) as f64 * spin(k) * spin(l);
                }
            }
            e
        })
        .collect()
}

/// Fixed-step classic RK4 for `dψ/ds = -iT·H(s)ψ`, `s ∈ [0, 1]`, where
/// `hamiltonian(s, x, out)` writes `H(s)·x`.
pub fn rk4_path<F>(
    mut hamiltonian: F,
    time: f64,
    steps: usize,
    psi0: &[Complex64],
) -> Vec<Complex64>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let dim = psi0.len();
    let h = 1.0 / steps as f64;
    let c = Complex64::new(0.0, -time);
    let mut psi = psi0.to_vec();
    let mut k = [
        vec![ZERO; dim],
        vec![ZERO; dim],
        vec![ZERO; dim],
        vec![ZERO; dim],
    ];
    let mut stage = vec![ZERO; dim];

    let mut rhs = |s: f64, x: &[Complex64], out: &mut [Complex64]| {
        hamiltonian(s, x, out);
        out.iter_mut().for_each(|v| *v *= c);
    };

    for step in 0..steps {
        let s = step as f64 * h;
        rhs(s, &psi, &mut k[0]);
        for i in 0..dim {
            stage[i] = psi[i] + k[0][i] * (0.5 * h);
        }
        rhs(s + 0.5 * h, &stage, &mut k[1]);
        for i in 0..dim {
            stage[i] = psi[i] + k[1][i] * (0.5 * h);
        }
        rhs(s + 0.5 * h, &stage, &mut k[2]);
        for i in 0..dim {
            stage[i] = psi[i] + k[2][i] * h;
        }
        rhs(s + h, &stage, &mut k[3]);
        for i in 0..dim {
            psi[i] += (k[0][i] + k[1][i] * 2.0 + k[2][i] * 2.0 + k[3][i]) * (h / 6.0);
        }
    }
    psi
}

/// RK4 reference for the annealing Schrödinger equation in the full space.
pub fn rk4_schrodinger(
    n: QubitCount,
    hf: &IsingDiagonal,
    time: f64,
    steps: usize,
    psi0_full: &[Complex64],
) -> Result<Vec<Complex64>> {
    if psi0_full.len() != n.full_dim() || hf.qubits() != n {
        return Err(AnnealError::DimensionMismatch {
            expected: n.full_dim(),
            found: psi0_full.len(),
        });
    }
    if steps == 0 {
        return Err(AnnealError::InvalidParameter(
            "RK4 needs at least one step".into(),
        ));
    }
    let diag = ising_full_diagonal(hf);
    let bits = n.get();
    Ok(rk4_path(
        |s, x, out| {
            for (i, o) in out.iter_mut().enumerate() {
                let mut flip = ZERO;
                for b in 0..bits {
                    flip += x[i ^ (1 << b)];
                }
                *o = -flip * (1.0 - s) + x[i] * (s * diag[i]);
            }
        },
        time,
        steps,
        psi0_full,
    ))
}

/// Ground-space weight of a full-space state, ground space found afresh.
pub fn full_success_probability(hf: &IsingDiagonal, psi_full: &[Complex64]) -> f64 {
    let diag = ising_full_diagonal(hf);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    diag.iter()
        .zip(psi_full)
        .filter(|(&e, _)| e == min)
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

/// Fixed-step RK4 on `dρ/ds = [A + sB, ρ] + T(LρL† - ½{L†L, ρ})` with
/// dense matrices.
pub fn rk4_lindblad(
    ctx: &SuperopContext,
    steps: usize,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    let dim = ctx.dim();
    if rho0.dim() != dim {
        return Err(AnnealError::DimensionMismatch {
            expected: dim,
            found: rho0.dim(),
        });
    }
    let a = ctx.a.to_dense();
    let b = ctx.b.to_dense();
    let l = ctx.l.matrix.to_dense() * Complex64::new(ctx.l.scale, 0.0);
    let l_adj = l.adjoint();
    let ldl = &l_adj * &l;
    let t = Complex64::new(ctx.time, 0.0);
    let half = Complex64::new(0.5, 0.0);

    let rhs = |s: f64, r: &DMatrix<Complex64>| -> DMatrix<Complex64> {
        let h = &a + &b * Complex64::new(s, 0.0);
        let comm = &h * r - r * &h;
        let diss = &l * r * &l_adj - (&ldl * r + r * &ldl) * half;
        comm + diss * t
    };

    let mut rho = DMatrix::from_row_slice(dim, dim, rho0.as_slice());
    let h = 1.0 / steps as f64;
    let hc = Complex64::new(h, 0.0);
    for step in 0..steps {
        let s = step as f64 * h;
        let k1 = rhs(s, &rho);
        let k2 = rhs(s + 0.5 * h, &(&rho + &k1 * (hc * 0.5)));
        let k3 = rhs(s + 0.5 * h, &(&rho + &k2 * (hc * 0.5)));
        let k4 = rhs(s + h, &(&rho + &k3 * hc));
        let two = Complex64::new(2.0, 0.0);
        rho += (k1 + k2 * two + k3 * two + k4) * (hc / 6.0);
    }
    DensityMatrix::from_row_major(dim, rho.transpose().as_slice().to_vec())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSlice {
    pub s: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
}

/// Full spectrum of `(1-s)H_i + s·H_f` by dense diagonalisation.
pub fn dense_spectrum(n: QubitCount, hf: &IsingDiagonal, s: f64) -> Result<SpectralSlice> {
    if n.get() > MAX_SPECTRUM_QUBITS {
        return Err(AnnealError::Capacity {
            what: "dense spectrum",
            found: n.get(),
            max: MAX_SPECTRUM_QUBITS,
        });
    }
    let dim = n.full_dim();
    let diag = ising_full_diagonal(hf);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = s * diag[i];
        for b in 0..n.get() {
            m[(i, i ^ (1 << b))] -= 1.0 - s;
        }
    }
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let gap = eigenvalues[1] - eigenvalues[0];
    Ok(SpectralSlice {
        s,
        eigenvalues,
        gap,
    })
}

/// Two-level sweep `H(s) = (1 - 2s)σ_z + Δσ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LzParams {
    pub delta: f64,
    pub time: f64,
}

impl LzParams {
    pub fn new(delta: f64, time: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(AnnealError::InvalidParameter(format!(
                "Δ must be positive, got {delta}"
            )));
        }
        if !(time > 0.0 && time.is_finite()) {
            return Err(AnnealError::InvalidParameter(format!(
                "T must be positive, got {time}"
            )));
        }
        Ok(Self { delta, time })
    }

    /// `H(s)` as a real symmetric 2×2 `[[h, Δ], [Δ, -h]]` with `h = 1 - 2s`.
    pub fn hamiltonian(&self, s: f64) -> [[f64; 2]; 2] {
        let h = 1.0 - 2.0 * s;
        [[h, self.delta], [self.delta, -h]]
    }
}

/// `E_1(s) - E_0(s) = 2√(Δ² + (1 - 2s)²)`
pub fn lz_gap(delta: f64, s: f64) -> f64 {
    2.0 * (delta * delta + (1.0 - 2.0 * s).powi(2)).sqrt()
}

/// Normalised ground state of `[[h, d], [d, -h]]`, phase chosen so the last
/// nonzero component is real and positive.
pub fn two_level_ground(h: f64, d: f64) -> [Complex64; 2] {
    let r = (h * h + d * d).sqrt();
    // Rows of (H + r)v = 0 give v ∝ (d, -(h + r)) or v ∝ (r - h, -d).
    let (x, y) = if (h + r).abs() >= (r - h).abs() {
        (d, -(h + r))
    } else {
        (r - h, -d)
    };
    let norm = (x * x + y * y).sqrt();
    let sign = if y != 0.0 { y.signum() } else { x.signum() };
    let (x, y) = (sign * x / norm, sign * y / norm);
    [Complex64::new(x, 0.0), Complex64::new(y, 0.0)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LzOutcome {
    pub psi: [Complex64; 2],
    /// `|⟨g(1)|ψ(1)⟩|²`; meaningless when the run blew up.
    pub probability: f64,
    pub terms_per_segment: Vec<usize>,
    pub converged: bool,
}

impl LzOutcome {
    pub fn magnitude(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn lz_overlap(params: &LzParams, psi: &[Complex64]) -> f64 {
    let [[h, d], _] = params.hamiltonian(1.0);
    let g = two_level_ground(h, d);
    (g[0].conj() * psi[0] + g[1].conj() * psi[1]).norm_sqr()
}

/// Runs the Taylor engine on the two-level sweep with
/// `A = -iT(σ_z + Δσ_x)`, `B = 2iT·σ_z`, from the ground state of `H(0)`.
pub fn lz_propagate(params: &LzParams, schedule: &SegmentSchedule) -> Result<LzOutcome> {
    schedule.validate()?;
    let ct = Complex64::new(0.0, -params.time);
    let h0 = params.hamiltonian(0.0);
    let a = DMatrix::from_fn(2, 2, |r, c| ct * h0[r][c]);
    let b = DMatrix::from_row_slice(2, 2, &[ct * -2.0, ZERO, ZERO, ct * 2.0]);
    let base = DenseGenerator::new(a, b)?;
    let mut gen = base.clone();
    let psi0 = two_level_ground(h0[0][0], h0[0][1]).to_vec();
    let (psi, terms, converged) = run_segments(
        &mut gen,
        |g, s0| *g = base.shifted(s0),
        psi0,
        schedule.segments_for(params.time),
        schedule.tol,
        schedule.max_terms,
    )?;
    Ok(LzOutcome {
        probability: lz_overlap(params, &psi),
        psi: [psi[0], psi[1]],
        terms_per_segment: terms,
        converged,
    })
}

/// RK4 reference for the two-level sweep.
pub fn lz_rk4(params: &LzParams, steps: usize) -> LzOutcome {
    let h0 = params.hamiltonian(0.0);
    let psi0 = two_level_ground(h0[0][0], h0[0][1]);
    let delta = params.delta;
    let psi = rk4_path(
        |s, x, out| {
            let h = 1.0 - 2.0 * s;
            out[0] = x[0] * h + x[1] * delta;
            out[1] = x[0] * delta - x[1] * h;
        },
        params.time,
        steps,
        &psi0,
    );
    LzOutcome {
        probability: lz_overlap(params, &psi),
        psi: [psi[0], psi[1]],
        terms_per_segment: Vec::new(),
        converged: true,
    }
}

/// `P(T)` on `points` evenly spaced anneal times in `[t_min, t_max]`.
pub fn lz_sweep(
    delta: f64,
    t_min: f64,
    t_max: f64,
    points: usize,
    schedule: &SegmentSchedule,
) -> Result<Vec<(f64, f64)>> {
    if points == 0 || t_min.is_nan() || t_max.is_nan() || t_max < t_min {
        return Err(AnnealError::InvalidParameter(format!(
            "bad sweep range [{t_min}, {t_max}] with {points} points"
        )));
    }
    (0..points)
        .map(|i| {
            let t = if points == 1 {
                t_min
            } else {
                t_min + (t_max - t_min) * i as f64 / (points - 1) as f64
            };
            let out = lz_propagate(&LzParams::new(delta, t)?, schedule)?;
            Ok((t, out.probability))
        })
        .collect()
}
