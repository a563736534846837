//! Density-matrix annealing under a master equation with one Lindblad
//! operator.
//!
//! In reduced time the master equation reads `dρ/ds = L_A[ρ] + s·L_B[ρ]`
//! with
//!
//! ```text
//! L_A[ρ] = [A, ρ] + T(LρL† - ½L†Lρ - ½ρL†L),    L_B[ρ] = [B, ρ],
//! ```
//!
//! `A = -iT·H_i` and `B = -iT(H_f - H_i)`. The Taylor coefficients satisfy
//! `ρ_{n+1} = (L_A[ρ_n] + L_B[ρ_{n-1}]) / (n + 1)`, which is exactly the
//! pure-state recurrence with the superoperators in place of `A` and `B`,
//! so segments are summed by [`taylor_segment`] over the flattened matrix.
//! The flattened Euclidean norm is the Hilbert-Schmidt norm.
//!
//! Everything lives in the full `2^N` space: the energy ladder operator does
//! not commute with the global spin flip.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::sparse::SparseOp;
use crate::spin_system::{ground_space, IsingDiagonal, QubitCount};
use crate::taylor::{
    run_segments, taylor_segment, AnnealParams, Generator, SegmentOutcome, SegmentSchedule,
};

/// Desk-scale cap: a `2^N × 2^N` density matrix and its Taylor buffers.
pub const MAX_LINDBLAD_QUBITS: u32 = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    /// Row-major entries.
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(AnnealError::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// `|ψ⟩⟨ψ|`
    pub fn pure(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                data.push(a * b.conj());
            }
        }
        Self { dim, data }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut data = vec![ZERO; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = Complex64::new(d, 0.0);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖ρ - ρ†‖_HS`
    pub fn hermiticity_defect(&self) -> f64 {
        let mut sq = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                sq += (self.get(r, c) - self.get(c, r).conj()).norm_sqr();
            }
        }
        sq.sqrt()
    }

    pub fn hs_distance(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// A Lindblad operator `scale · matrix`, stored sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladOp {
    pub matrix: SparseOp,
    pub scale: f64,
    /// For the energy ladder: basis indices listed from the bottom rung up.
    pub order: Option<Vec<usize>>,
}

impl LindbladOp {
    pub fn new(matrix: SparseOp, scale: f64) -> Self {
        Self {
            matrix,
            scale,
            order: None,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(SparseOp::zero(dim), 0.0)
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn effective(&self) -> SparseOp {
        self.matrix.scaled(Complex64::new(self.scale, 0.0))
    }
}

/// Energy lowering ladder for a diagonal `H_f`: with basis states sorted by
/// `(energy, index)` as `e_0, e_1, …`, it maps `e_{p+1} ↦ √(p+1)·e_p`.
/// Scale is 1.
pub fn build_ahat(hf_full_diag: &[i64]) -> LindbladOp {
    let dim = hf_full_diag.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by_key(|&i| (hf_full_diag[i], i));
    let triplets = order
        .windows(2)
        .enumerate()
        .map(|(p, w)| (w[0], w[1], Complex64::new(((p + 1) as f64).sqrt(), 0.0)))
        .collect();
    LindbladOp {
        matrix: SparseOp::from_triplets(dim, triplets),
        scale: 1.0,
        order: Some(order),
    }
}

/// Operators defining the two superoperators.
#[derive(Debug, Clone)]
pub struct SuperopContext {
    pub a: SparseOp,
    pub b: SparseOp,
    pub l: LindbladOp,
    pub time: f64,
    l_eff: SparseOp,
    l_adj: SparseOp,
    l_dag_l: SparseOp,
}

impl SuperopContext {
    pub fn new(a: SparseOp, b: SparseOp, l: LindbladOp, time: f64) -> Result<Self> {
        let dim = a.dim();
        for d in [b.dim(), l.matrix.dim()] {
            if d != dim {
                return Err(AnnealError::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        let l_eff = l.effective();
        let l_adj = l_eff.adjoint();
        let l_dag_l = l_adj.matmul(&l_eff);
        Ok(Self {
            a,
            b,
            l,
            time,
            l_eff,
            l_adj,
            l_dag_l,
        })
    }

    /// `A = -iT·H_i`, `B = -iT(H_f - H_i)` in the full space.
    pub fn for_ising(hf: &IsingDiagonal, time: f64, l: LindbladOp) -> Result<Self> {
        let n = hf.qubits();
        check_capacity(n)?;
        let hi = full_transverse(n);
        let diag = hf.full_diag();
        let hf_op = SparseOp::from_triplets(
            diag.len(),
            diag.iter()
                .enumerate()
                .map(|(i, &e)| (i, i, Complex64::new(e as f64, 0.0)))
                .collect(),
        );
        let c = Complex64::new(0.0, -time);
        let a = hi.scaled(c);
        let b = hf_op.add_scaled(&hi, Complex64::new(-1.0, 0.0)).scaled(c);
        Self::new(a, b, l, time)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `out += T(LxL† - ½L†Lx - ½xL†L)`
    fn add_dissipator(&self, x: &[Complex64], scratch: &mut [Complex64], out: &mut [Complex64]) {
        if self.l_eff.nnz() == 0 {
            return;
        }
        let t = Complex64::new(self.time, 0.0);
        scratch.fill(ZERO);
        self.l_eff.add_left_product(x, t, scratch);
        self.l_adj
            .add_right_product(scratch, Complex64::new(1.0, 0.0), out);
        let half = Complex64::new(-0.5 * self.time, 0.0);
        self.l_dag_l.add_left_product(x, half, out);
        self.l_dag_l.add_right_product(x, half, out);
    }
}

/// Full-space `H_i = -Σ_k σ^x_k` as a sparse matrix.
pub fn full_transverse(n: QubitCount) -> SparseOp {
    let dim = n.full_dim();
    let t = (0..dim)
        .flat_map(|i| (0..n.get()).map(move |b| (i, i ^ (1 << b), Complex64::new(-1.0, 0.0))))
        .collect();
    SparseOp::from_triplets(dim, t)
}

fn check_capacity(n: QubitCount) -> Result<()> {
    if n.get() > MAX_LINDBLAD_QUBITS {
        return Err(AnnealError::Capacity {
            what: "density matrix",
            found: n.get(),
            max: MAX_LINDBLAD_QUBITS,
        });
    }
    Ok(())
}

fn check_rho(ctx: &SuperopContext, rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != ctx.dim() {
        return Err(AnnealError::DimensionMismatch {
            expected: ctx.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

pub fn apply_la(rho: &DensityMatrix, ctx: &SuperopContext) -> Result<DensityMatrix> {
    check_rho(ctx, rho)?;
    let len = rho.data.len();
    let mut out = vec![ZERO; len];
    let mut scratch = vec![ZERO; len];
    ctx.a
        .add_commutator(&rho.data, Complex64::new(1.0, 0.0), &mut out);
    ctx.add_dissipator(&rho.data, &mut scratch, &mut out);
    DensityMatrix::from_row_major(rho.dim, out)
}

pub fn apply_lb(rho: &DensityMatrix, ctx: &SuperopContext) -> Result<DensityMatrix> {
    check_rho(ctx, rho)?;
    let mut out = vec![ZERO; rho.data.len()];
    ctx.b
        .add_commutator(&rho.data, Complex64::new(1.0, 0.0), &mut out);
    DensityMatrix::from_row_major(rho.dim, out)
}

/// `(L_A + s0·L_B, L_B)` acting on flattened density matrices.
pub struct LindbladGenerator<'a> {
    ctx: &'a SuperopContext,
    a_shifted: SparseOp,
    scratch: Vec<Complex64>,
}

impl<'a> LindbladGenerator<'a> {
    pub fn new(ctx: &'a SuperopContext) -> Self {
        let k = ctx.dim();
        Self {
            ctx,
            a_shifted: ctx.a.clone(),
            scratch: vec![ZERO; k * k],
        }
    }

    pub fn set_shift(&mut self, s0: f64) {
        self.a_shifted = self.ctx.a.add_scaled(&self.ctx.b, Complex64::new(s0, 0.0));
    }
}

impl Generator for LindbladGenerator<'_> {
    fn dim(&self) -> usize {
        self.scratch.len()
    }

    fn apply(&mut self, x: &[Complex64], y: Option<&[Complex64]>, out: &mut [Complex64]) {
        let one = Complex64::new(1.0, 0.0);
        out.fill(ZERO);
        self.a_shifted.add_commutator(x, one, out);
        self.ctx.add_dissipator(x, &mut self.scratch, out);
        if let Some(y) = y {
            self.ctx.b.add_commutator(y, one, out);
        }
    }
}

/// Sums one segment `[s0, s0 + step]` of the density-matrix Taylor series.
pub fn lindblad_segment(
    ctx: &SuperopContext,
    rho_in: &DensityMatrix,
    s0: f64,
    step: f64,
    tol: f64,
    max_terms: usize,
) -> Result<(DensityMatrix, usize, bool)> {
    check_rho(ctx, rho_in)?;
    let mut gen = LindbladGenerator::new(ctx);
    gen.set_shift(s0);
    let SegmentOutcome {
        state,
        terms,
        converged,
        ..
    } = taylor_segment(&mut gen, &rho_in.data, step, tol, max_terms)?;
    Ok((
        DensityMatrix::from_row_major(rho_in.dim, state)?,
        terms,
        converged,
    ))
}

/// Evolves `rho0` over `[0, 1]` in `segments` equal pieces.
pub fn evolve_density(
    ctx: &SuperopContext,
    rho0: &DensityMatrix,
    segments: usize,
    tol: f64,
    max_terms: usize,
) -> Result<(DensityMatrix, Vec<usize>, bool)> {
    check_rho(ctx, rho0)?;
    if segments == 0 {
        return Err(AnnealError::InvalidParameter(
            "segment count must be at least 1".into(),
        ));
    }
    let mut gen = LindbladGenerator::new(ctx);
    let (rho, terms, converged) = run_segments(
        &mut gen,
        |g, s0| g.set_shift(s0),
        rho0.data.clone(),
        segments,
        tol,
        max_terms,
    )?;
    Ok((
        DensityMatrix::from_row_major(rho0.dim, rho)?,
        terms,
        converged,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityDiagnostics {
    pub terms_per_segment: Vec<usize>,
    pub converged: bool,
    /// `|Tr ρ(1) - 1|`
    pub trace_drift: f64,
    pub hermiticity_defect: f64,
    /// Rung order of the ladder operator, bottom first.
    pub ladder_order: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DensityRun {
    pub rho: DensityMatrix,
    pub success_p: f64,
    pub diagnostics: DensityDiagnostics,
}

/// Anneals `|ψ_0⟩⟨ψ_0|` (uniform `ψ_0`) with `L = l_scale·â` and returns
/// `P = Tr(Πρ(1))`.
pub fn propagate_density(
    params: &AnnealParams,
    hf: &IsingDiagonal,
    l_scale: f64,
    schedule: &SegmentSchedule,
) -> Result<DensityRun> {
    let n = params.qubits;
    check_capacity(n)?;
    if hf.qubits() != n {
        return Err(AnnealError::DimensionMismatch {
            expected: n.half_dim(),
            found: hf.half_diag().len(),
        });
    }
    if !(l_scale >= 0.0 && l_scale.is_finite()) {
        return Err(AnnealError::InvalidParameter(format!(
            "Lindblad scale must be non-negative, got {l_scale}"
        )));
    }
    schedule.validate()?;

    let full_diag = hf.full_diag();
    let ahat = build_ahat(&full_diag).with_scale(l_scale);
    let order = ahat.order.clone().unwrap_or_default();
    let ctx = SuperopContext::for_ising(hf, params.time, ahat)?;

    let dim = n.full_dim();
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    let rho0 = DensityMatrix::pure(&vec![amp; dim]);
    let (rho, terms, converged) = evolve_density(
        &ctx,
        &rho0,
        schedule.segments_for(params.time),
        schedule.tol,
        schedule.max_terms,
    )?;

    let ground = ground_space(hf).full_indices(n);
    let p: f64 = ground.iter().map(|&i| rho.get(i, i).re).sum();
    if converged
        && !(-crate::taylor::PROBABILITY_SLACK..=1.0 + crate::taylor::PROBABILITY_SLACK)
            .contains(&p)
    {
        return Err(AnnealError::InvariantViolation(format!(
            "success probability {p} outside [0, 1]"
        )));
    }
    let diagnostics = DensityDiagnostics {
        terms_per_segment: terms,
        converged,
        trace_drift: (rho.trace() - 1.0).norm(),
        hermiticity_defect: rho.hermiticity_defect(),
        ladder_order: order,
    };
    Ok(DensityRun {
        rho,
        success_p: if converged { p.clamp(0.0, 1.0) } else { p },
        diagnostics,
    })
}
