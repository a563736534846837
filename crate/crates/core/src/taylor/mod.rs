//! Pure-state propagation by the three-term Taylor-coefficient recurrence.
//!
//! On a segment starting at `s0` the local variable `τ = s - s0` obeys
//! `dψ/dτ = (A' + τB)ψ` with `A' = A + s0·B`, and the Taylor coefficients of
//! `ψ(τ)` satisfy
//!
//! ```text
//! ψ_1 = A'ψ_0,    ψ_n = (A'ψ_{n-1} + Bψ_{n-2}) / n   (n ≥ 2).
//! ```
//!
//! A segment of length `h` sums `Σ ψ_n hⁿ` and stops at the first `n ≥ 2`
//! whose contribution `‖ψ_n hⁿ‖` is at most `tol`. Only the accumulator and
//! the last two coefficients are kept alive.

pub mod bounds;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::spin_system::{
    check_dim, ground_space, uniform_initial_state, GroundSpace, HalfStateVector, IsingDiagonal,
    QubitCount, TransverseField,
};

pub use bounds::{
    coefficient_bound_closed, coefficient_bound_recurrence, decay_envelope, root_test_index,
    BoundSequence,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Probabilities above one by less than this are rounding and get clamped.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Action of the generator pair `(A, B)` on a segment. `A` already carries
/// the segment shift `A + s0·B`.
pub trait Generator {
    fn dim(&self) -> usize;

    /// `out = A·x + B·y`, or `out = A·x` when `y` is `None`.
    fn apply(&mut self, x: &[Complex64], y: Option<&[Complex64]>, out: &mut [Complex64]);
}

/// Generator built from two independent operator actions.
pub struct FnGenerator<FA, FB> {
    dim: usize,
    apply_a: FA,
    apply_b: FB,
    scratch: Vec<Complex64>,
}

impl<FA, FB> FnGenerator<FA, FB>
where
    FA: FnMut(&[Complex64], &mut [Complex64]),
    FB: FnMut(&[Complex64], &mut [Complex64]),
{
    pub fn new(dim: usize, apply_a: FA, apply_b: FB) -> Self {
        Self {
            dim,
            apply_a,
            apply_b,
            scratch: vec![ZERO; dim],
        }
    }
}

impl<FA, FB> Generator for FnGenerator<FA, FB>
where
    FA: FnMut(&[Complex64], &mut [Complex64]),
    FB: FnMut(&[Complex64], &mut [Complex64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&mut self, x: &[Complex64], y: Option<&[Complex64]>, out: &mut [Complex64]) {
        (self.apply_a)(x, out);
        if let Some(y) = y {
            (self.apply_b)(y, &mut self.scratch);
            for (o, s) in out.iter_mut().zip(&self.scratch) {
                *o += s;
            }
        }
    }
}

/// Dense `(A, B)` pair for small systems.
#[derive(Debug, Clone)]
pub struct DenseGenerator {
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

impl DenseGenerator {
    pub fn new(a: DMatrix<Complex64>, b: DMatrix<Complex64>) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(AnnealError::DimensionMismatch {
                expected: a.nrows(),
                found: b.nrows(),
            });
        }
        Ok(Self { a, b })
    }

    /// `(A + s0·B, B)`
    pub fn shifted(&self, s0: f64) -> Self {
        Self {
            a: &self.a + &self.b * Complex64::new(s0, 0.0),
            b: self.b.clone(),
        }
    }
}

impl Generator for DenseGenerator {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&mut self, x: &[Complex64], y: Option<&[Complex64]>, out: &mut [Complex64]) {
        let d = self.dim();
        for (r, o) in out.iter_mut().enumerate().take(d) {
            let mut acc: Complex64 = x
                .iter()
                .take(d)
                .enumerate()
                .map(|(c, v)| self.a[(r, c)] * v)
                .sum();
            if let Some(y) = y {
                acc += y
                    .iter()
                    .take(d)
                    .enumerate()
                    .map(|(c, v)| self.b[(r, c)] * v)
                    .sum::<Complex64>();
            }
            *o = acc;
        }
    }
}

/// Matrix-free annealing generator on the symmetric half space:
/// `A' = -iT[(1-s0)H_i + s0·H_f]` and `B = -iT(H_f - H_i)`.
///
/// `A'x + By = -iT[H_i((1-s0)x - y) + H_f(s0·x + y)]`, so each term costs a
/// single transverse-field product.
pub struct IsingGenerator<'a> {
    tf: &'a TransverseField,
    diag: Vec<f64>,
    coeff: Complex64,
    s0: f64,
    u: Vec<Complex64>,
    hu: Vec<Complex64>,
}

impl<'a> IsingGenerator<'a> {
    pub fn new(tf: &'a TransverseField, hf: &IsingDiagonal, time: f64) -> Result<Self> {
        check_dim(tf.dim(), hf.half_diag().len())?;
        let dim = tf.dim();
        Ok(Self {
            tf,
            diag: hf.half_diag().iter().map(|&e| e as f64).collect(),
            coeff: Complex64::new(0.0, -time),
            s0: 0.0,
            u: vec![ZERO; dim],
            hu: vec![ZERO; dim],
        })
    }

    pub fn set_shift(&mut self, s0: f64) {
        self.s0 = s0;
    }
}

impl Generator for IsingGenerator<'_> {
    fn dim(&self) -> usize {
        self.tf.dim()
    }

    fn apply(&mut self, x: &[Complex64], y: Option<&[Complex64]>, out: &mut [Complex64]) {
        let keep = 1.0 - self.s0;
        let s0 = self.s0;
        match y {
            Some(y) => {
                for ((u, &xi), &yi) in self.u.iter_mut().zip(x).zip(y) {
                    *u = xi * keep - yi;
                }
                self.tf.apply_into(&self.u, &mut self.hu);
                for i in 0..out.len() {
                    out[i] = self.coeff * (self.hu[i] + (x[i] * s0 + y[i]) * self.diag[i]);
                }
            }
            None => {
                self.tf.apply_into(x, &mut self.hu);
                for i in 0..out.len() {
                    out[i] = self.coeff * (self.hu[i] * keep + x[i] * (s0 * self.diag[i]));
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutcome {
    pub state: Vec<Complex64>,
    /// Index of the last coefficient added.
    pub terms: usize,
    pub converged: bool,
    /// `‖ψ_n hⁿ‖` of the last coefficient added.
    pub last_contribution: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Sums one segment of the Taylor series. See the module docs for the
/// recurrence and the stopping rule.
///
/// Running out of `max_terms` is reported through `converged = false`; a
/// non-finite coefficient is an error.
pub fn taylor_segment<G: Generator + ?Sized>(
    gen: &mut G,
    psi_in: &[Complex64],
    step: f64,
    tol: f64,
    max_terms: usize,
) -> Result<SegmentOutcome> {
    check_dim(gen.dim(), psi_in.len())?;
    if !(step > 0.0 && step <= 1.0) {
        return Err(AnnealError::InvalidParameter(format!(
            "segment step must lie in (0, 1], got {step}"
        )));
    }
    validate_tolerance(tol, max_terms)?;

    let dim = psi_in.len();
    let mut acc = psi_in.to_vec();
    let mut prev2 = psi_in.to_vec();
    let mut prev1 = vec![ZERO; dim];
    let mut next = vec![ZERO; dim];

    gen.apply(&prev2, None, &mut prev1);
    for (a, p) in acc.iter_mut().zip(&prev1) {
        *a += p * step;
    }

    let mut scale = step;
    let mut n = 1;
    let mut contribution = f64::INFINITY;
    while n < max_terms {
        n += 1;
        gen.apply(&prev1, Some(&prev2), &mut next);
        let inv_n = 1.0 / n as f64;
        scale *= step;
        let mut sq = 0.0;
        for (v, a) in next.iter_mut().zip(acc.iter_mut()) {
            *v *= inv_n;
            let cor = *v * scale;
            sq += cor.norm_sqr();
            *a += cor;
        }
        contribution = sq.sqrt();
        if !contribution.is_finite() {
            return Err(AnnealError::NumericOverflow { term: n });
        }
        std::mem::swap(&mut prev2, &mut prev1);
        std::mem::swap(&mut prev1, &mut next);
        if contribution <= tol {
            break;
        }
    }

    Ok(SegmentOutcome {
        state: acc,
        terms: n,
        converged: contribution <= tol,
        last_contribution: contribution,
    })
}

/// Norms `‖ψ_n‖` of the unscaled Taylor coefficients for `n = 0..=n_max`.
pub fn coefficient_norms<G: Generator + ?Sized>(
    gen: &mut G,
    psi0: &[Complex64],
    n_max: usize,
) -> Vec<f64> {
    let dim = psi0.len();
    let mut norms = vec![norm(psi0)];
    if n_max == 0 {
        return norms;
    }
    let mut prev2 = psi0.to_vec();
    let mut prev1 = vec![ZERO; dim];
    let mut next = vec![ZERO; dim];
    gen.apply(&prev2, None, &mut prev1);
    norms.push(norm(&prev1));
    for n in 2..=n_max {
        gen.apply(&prev1, Some(&prev2), &mut next);
        let inv_n = 1.0 / n as f64;
        next.iter_mut().for_each(|v| *v *= inv_n);
        norms.push(norm(&next));
        std::mem::swap(&mut prev2, &mut prev1);
        std::mem::swap(&mut prev1, &mut next);
    }
    norms
}

pub(crate) fn validate_tolerance(tol: f64, max_terms: usize) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(AnnealError::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    if max_terms < 2 {
        return Err(AnnealError::InvalidParameter(format!(
            "max_terms must be at least 2, got {max_terms}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealParams {
    pub time: f64,
    pub qubits: QubitCount,
}

impl AnnealParams {
    pub fn new(qubits: QubitCount, time: f64) -> Result<Self> {
        if !(time > 0.0 && time.is_finite()) {
            return Err(AnnealError::InvalidParameter(format!(
                "anneal time must be positive, got {time}"
            )));
        }
        Ok(Self { time, qubits })
    }
}

/// How the interval `[0, 1]` is cut into segments and when a segment's
/// series is considered summed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSchedule {
    /// Fixed segment count; `None` means `⌈T⌉`.
    pub segments: Option<usize>,
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for SegmentSchedule {
    fn default() -> Self {
        Self {
            segments: None,
            tol: 1e-12,
            max_terms: 500,
        }
    }
}

impl SegmentSchedule {
    pub fn with_segments(mut self, segments: usize) -> Self {
        self.segments = Some(segments);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn segments_for(&self, time: f64) -> usize {
        self.segments
            .unwrap_or_else(|| (time.ceil() as usize).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments == Some(0) {
            return Err(AnnealError::InvalidParameter(
                "segment count must be at least 1".into(),
            ));
        }
        validate_tolerance(self.tol, self.max_terms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub psi_final: HalfStateVector,
    pub success_p: f64,
    /// `|2‖ψ(1)‖² - 1|`, the full-space norm error.
    pub norm_drift: f64,
    pub terms_per_segment: Vec<usize>,
    pub converged: bool,
    pub ground: GroundSpace,
}

/// Runs every segment of `[0, 1]` through `gen`, shifting it before each one.
pub(crate) fn run_segments<G, F>(
    gen: &mut G,
    mut set_shift: F,
    psi0: Vec<Complex64>,
    segments: usize,
    tol: f64,
    max_terms: usize,
) -> Result<(Vec<Complex64>, Vec<usize>, bool)>
where
    G: Generator + ?Sized,
    F: FnMut(&mut G, f64),
{
    let step = 1.0 / segments as f64;
    let mut psi = psi0;
    let mut terms = Vec::with_capacity(segments);
    let mut converged = true;
    for k in 0..segments {
        set_shift(gen, k as f64 * step);
        let out = taylor_segment(gen, &psi, step, tol, max_terms)?;
        terms.push(out.terms);
        converged &= out.converged;
        psi = out.state;
    }
    Ok((psi, terms, converged))
}

/// Reusable propagator for one register size; the transverse field is built
/// once and shared read-only.
#[derive(Debug, Clone)]
pub struct Annealer {
    tf: TransverseField,
}

impl Annealer {
    pub fn new(qubits: QubitCount) -> Self {
        Self {
            tf: TransverseField::new(qubits),
        }
    }

    pub fn qubits(&self) -> QubitCount {
        self.tf.qubits()
    }

    pub fn transverse_field(&self) -> &TransverseField {
        &self.tf
    }

    /// Evolves an arbitrary symmetric state from `s = 0` to `s = 1`.
    pub fn evolve(
        &self,
        time: f64,
        hf: &IsingDiagonal,
        schedule: &SegmentSchedule,
        psi0: &HalfStateVector,
    ) -> Result<(HalfStateVector, Vec<usize>, bool)> {
        AnnealParams::new(self.qubits(), time)?;
        schedule.validate()?;
        check_dim(self.tf.dim(), psi0.len())?;
        let mut gen = IsingGenerator::new(&self.tf, hf, time)?;
        let (psi, terms, converged) = run_segments(
            &mut gen,
            |g, s0| g.set_shift(s0),
            psi0.0.clone(),
            schedule.segments_for(time),
            schedule.tol,
            schedule.max_terms,
        )?;
        Ok((HalfStateVector(psi), terms, converged))
    }

    pub fn propagate(
        &self,
        time: f64,
        hf: &IsingDiagonal,
        schedule: &SegmentSchedule,
    ) -> Result<PropagationResult> {
        check_dim(self.tf.dim(), hf.half_diag().len())?;
        let psi0 = uniform_initial_state(self.qubits());
        let (psi, terms, converged) = self.evolve(time, hf, schedule, &psi0)?;
        let ground = ground_space(hf);
        let success_p = if converged {
            success_probability(&psi, &ground)?
        } else {
            ground_weight(&psi, &ground)?
        };
        let norm_drift = (2.0 * psi.norm_sqr() - 1.0).abs();
        Ok(PropagationResult {
            psi_final: psi,
            success_p,
            norm_drift,
            terms_per_segment: terms,
            converged,
            ground,
        })
    }
}

/// One-shot propagation from the uniform state; builds its own
/// [`Annealer`].
pub fn propagate(
    params: &AnnealParams,
    hf: &IsingDiagonal,
    schedule: &SegmentSchedule,
) -> Result<PropagationResult> {
    check_dim(params.qubits.pairs(), hf.couplings().len())?;
    Annealer::new(params.qubits).propagate(params.time, hf, schedule)
}

/// `2·Σ_{i∈ground} |ψ_i|²`, the full-space ground-space weight of a
/// symmetric state, unchecked.
pub fn ground_weight(psi: &HalfStateVector, gs: &GroundSpace) -> Result<f64> {
    let mut weight = 0.0;
    for &i in &gs.indices {
        let amp = psi.0.get(i).ok_or(AnnealError::DimensionMismatch {
            expected: i + 1,
            found: psi.len(),
        })?;
        weight += amp.norm_sqr();
    }
    Ok(2.0 * weight)
}

/// [`ground_weight`] of a normalised state; values above `1` by less than
/// [`PROBABILITY_SLACK`] are clamped, larger ones are an error.
pub fn success_probability(psi: &HalfStateVector, gs: &GroundSpace) -> Result<f64> {
    let p = ground_weight(psi, gs)?;
    if p.is_nan() || p > 1.0 + PROBABILITY_SLACK {
        return Err(AnnealError::InvariantViolation(format!(
            "success probability {p} exceeds 1"
        )));
    }
    Ok(p.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_system::random_ising_half;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn q(n: u32) -> QubitCount {
        QubitCount::new(n).unwrap()
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn half_turn_of_sigma_x() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[ZERO, cx(0.0, -FRAC_PI_2), cx(0.0, -FRAC_PI_2), ZERO],
        );
        let mut gen = DenseGenerator::new(a, DMatrix::zeros(2, 2)).unwrap();
        let out = taylor_segment(&mut gen, &[cx(1.0, 0.0), ZERO], 1.0, 1e-15, 200).unwrap();
        assert!(out.converged);
        assert!((out.state[0] - ZERO).norm() < 1e-14);
        assert!((out.state[1] - cx(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_generator_is_identity() {
        let mut gen = DenseGenerator::new(DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)).unwrap();
        let psi = [cx(0.1, 0.2), cx(-0.3, 0.0), cx(0.0, 0.9)];
        let out = taylor_segment(&mut gen, &psi, 0.5, 1e-12, 50).unwrap();
        assert_eq!(out.state, psi.to_vec());
        assert_eq!(out.terms, 2);
        assert!(out.converged);
    }

    #[test]
    fn closure_generator_matches_dense() {
        let a = DMatrix::from_fn(3, 3, |r, c| cx((r + 2 * c) as f64 * 0.1, -(r as f64) * 0.2));
        let b = DMatrix::from_fn(3, 3, |r, c| cx(0.0, (r * c) as f64 * 0.05 - 0.1));
        let psi = [cx(1.0, 0.0), cx(0.0, 1.0), cx(0.5, -0.5)];
        let mut dense = DenseGenerator::new(a.clone(), b.clone()).unwrap();
        let (am, bm) = (a.clone(), b.clone());
        let mut closures = FnGenerator::new(
            3,
            move |x: &[Complex64], out: &mut [Complex64]| {
                let v = &am * nalgebra::DVector::from_column_slice(x);
                out.copy_from_slice(v.as_slice());
            },
            move |x: &[Complex64], out: &mut [Complex64]| {
                let v = &bm * nalgebra::DVector::from_column_slice(x);
                out.copy_from_slice(v.as_slice());
            },
        );
        let d = taylor_segment(&mut dense, &psi, 0.7, 1e-14, 100).unwrap();
        let c = taylor_segment(&mut closures, &psi, 0.7, 1e-14, 100).unwrap();
        assert_eq!(d.terms, c.terms);
        for (x, y) in d.state.iter().zip(&c.state) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn segment_rejects_bad_input() {
        let mut gen = DenseGenerator::new(DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)).unwrap();
        let psi = [cx(1.0, 0.0), ZERO];
        assert!(taylor_segment(&mut gen, &psi, 0.0, 1e-12, 10).is_err());
        assert!(taylor_segment(&mut gen, &psi, 1.5, 1e-12, 10).is_err());
        assert!(taylor_segment(&mut gen, &psi, 1.0, 0.0, 10).is_err());
        assert!(taylor_segment(&mut gen, &psi, 1.0, 1e-12, 1).is_err());
        assert!(taylor_segment(&mut gen, &[ZERO; 3], 1.0, 1e-12, 10).is_err());
    }

    #[test]
    fn overflow_is_an_error() {
        let big = DMatrix::from_element(2, 2, cx(1e300, 0.0));
        let mut gen = DenseGenerator::new(big.clone(), big).unwrap();
        let err = taylor_segment(&mut gen, &[cx(1.0, 0.0), ZERO], 1.0, 1e-12, 50).unwrap_err();
        assert!(matches!(err, AnnealError::NumericOverflow { .. }));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let a = DMatrix::from_row_slice(2, 2, &[ZERO, cx(0.0, -30.0), cx(0.0, -30.0), ZERO]);
        let mut gen = DenseGenerator::new(a, DMatrix::zeros(2, 2)).unwrap();
        let out = taylor_segment(&mut gen, &[cx(1.0, 0.0), ZERO], 1.0, 1e-12, 20).unwrap();
        assert!(!out.converged);
        assert_eq!(out.terms, 20);
    }

    #[test]
    fn exhausted_run_reports_unchecked_probability() {
        let n = q(4);
        let hf = random_ising_half(n, 1);
        let sched = SegmentSchedule::default()
            .with_segments(1)
            .with_max_terms(5);
        let run = Annealer::new(n).propagate(10.0, &hf, &sched).unwrap();
        assert!(!run.converged);
        assert!(run.success_p.is_finite());
    }

    #[test]
    fn ising_generator_matches_split_actions() {
        let n = q(5);
        let tf = TransverseField::new(n);
        let hf = random_ising_half(n, 3);
        let t = 2.5;
        let s0 = 0.3;
        let mut gen = IsingGenerator::new(&tf, &hf, t).unwrap();
        gen.set_shift(s0);
        let dim = tf.dim();
        let x: Vec<Complex64> = (0..dim).map(|i| cx((i as f64).sin(), 0.3)).collect();
        let y: Vec<Complex64> = (0..dim).map(|i| cx(0.1, (i as f64).cos())).collect();
        let mut got = vec![ZERO; dim];
        gen.apply(&x, Some(&y), &mut got);

        let c = cx(0.0, -t);
        let mut hix = vec![ZERO; dim];
        let mut hiy = vec![ZERO; dim];
        tf.apply_into(&x, &mut hix);
        tf.apply_into(&y, &mut hiy);
        for i in 0..dim {
            let h = hf.half_diag()[i] as f64;
            let ax = c * (hix[i] * (1.0 - s0) + x[i] * (s0 * h));
            let by = c * (y[i] * h - hiy[i]);
            assert!((got[i] - (ax + by)).norm() < 1e-12);
        }
    }

    #[test]
    fn stationary_ground_state_picks_up_phase() {
        // B = 0 and A = -iT·H_i: the uniform state only gains e^{iTN}.
        let n = q(4);
        let tf = TransverseField::new(n);
        let t = 3.0;
        let psi0 = uniform_initial_state(n);
        let tf_a = tf.clone();
        let mut gen = FnGenerator::new(
            tf.dim(),
            move |x: &[Complex64], out: &mut [Complex64]| {
                tf_a.apply_into(x, out);
                out.iter_mut().for_each(|v| *v *= cx(0.0, -t));
            },
            |_: &[Complex64], out: &mut [Complex64]| out.fill(ZERO),
        );
        let (psi, _, converged) =
            run_segments(&mut gen, |_, _| {}, psi0.0.clone(), 3, 1e-14, 200).unwrap();
        assert!(converged);
        let phase = Complex64::from_polar(1.0, t * 4.0);
        for (p, p0) in psi.iter().zip(&psi0.0) {
            assert!((p - p0 * phase).norm() < 1e-12);
        }
        let all = GroundSpace {
            indices: (0..tf.dim()).collect(),
            energy: -4,
        };
        assert_relative_eq!(
            success_probability(&HalfStateVector(psi), &all).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn vanishing_time_keeps_initial_state() {
        for seed in 0..5 {
            let n = q(5);
            let hf = random_ising_half(n, seed);
            let params = AnnealParams::new(n, 1e-8).unwrap();
            let res = propagate(&params, &hf, &SegmentSchedule::default()).unwrap();
            let expected = res.ground.degeneracy() as f64 / n.half_dim() as f64;
            assert_relative_eq!(res.success_p, expected, epsilon = 1e-7);
            assert!(res.converged);
            assert_eq!(res.terms_per_segment.len(), 1);
        }
    }

    #[test]
    fn success_probability_examples() {
        let psi0 = uniform_initial_state(q(2));
        let gs = GroundSpace {
            indices: vec![0],
            energy: -1,
        };
        assert_relative_eq!(success_probability(&psi0, &gs).unwrap(), 0.5);

        let on_ground = HalfStateVector(vec![cx(0.0, 0.5f64.sqrt()), ZERO]);
        assert_relative_eq!(
            success_probability(&on_ground, &gs).unwrap(),
            1.0,
            epsilon = 1e-15
        );

        let marginal = HalfStateVector(vec![cx((0.5 + 2e-10f64).sqrt(), 0.0), ZERO]);
        assert_eq!(success_probability(&marginal, &gs).unwrap(), 1.0);

        let blown = HalfStateVector(vec![cx(1.0, 0.0), ZERO]);
        assert!(matches!(
            success_probability(&blown, &gs),
            Err(AnnealError::InvariantViolation(_))
        ));
    }

    #[test]
    fn segment_count_robustness() {
        for n in [3u32, 5, 6] {
            let qn = q(n);
            let annealer = Annealer::new(qn);
            for (seed, t) in [(1u64, 1.0f64), (2, 4.0), (3, 7.5), (4, 10.0)] {
                let hf = random_ising_half(qn, seed);
                let k = t.ceil() as usize;
                let coarse = SegmentSchedule::default().with_segments(k);
                let fine = SegmentSchedule::default().with_segments(4 * k);
                let a = annealer.propagate(t, &hf, &coarse).unwrap();
                let b = annealer.propagate(t, &hf, &fine).unwrap();
                assert!((a.success_p - b.success_p).abs() < 1e-8, "N={n} T={t}");
                assert!(a.norm_drift < 1e-10);
            }
        }
    }

    #[test]
    fn schedule_defaults() {
        let s = SegmentSchedule::default();
        assert_eq!(s.segments_for(4.0), 4);
        assert_eq!(s.segments_for(4.2), 5);
        assert_eq!(s.segments_for(1e-8), 1);
        assert_eq!(s.with_segments(7).segments_for(4.0), 7);
        assert!(s.with_segments(0).validate().is_err());
        assert!(s.with_tol(1.0).validate().is_err());
        assert!(AnnealParams::new(q(3), 0.0).is_err());
        assert!(AnnealParams::new(q(3), f64::NAN).is_err());
    }

    proptest::proptest! {
        #[test]
        fn phase_does_not_change_success(theta in -3.2f64..3.2, seed in 0u64..1000) {
            let n = q(4);
            let hf = random_ising_half(n, seed);
            let gs = ground_space(&hf);
            let psi = Annealer::new(n).propagate(2.0, &hf, &SegmentSchedule::default()).unwrap().psi_final;
            let rot = Complex64::from_polar(1.0, theta);
            let turned = HalfStateVector(psi.0.iter().map(|z| z * rot).collect());
            let a = success_probability(&psi, &gs).unwrap();
            let b = success_probability(&turned, &gs).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn unitary_runs_preserve_norm(seed in 0u64..10_000, t in 0.5f64..8.0) {
            let n = q(5);
            let hf = random_ising_half(n, seed);
            let sched = SegmentSchedule::default();
            let res = Annealer::new(n).propagate(t, &hf, &sched).unwrap();
            proptest::prop_assert!(res.converged);
            proptest::prop_assert!(res.norm_drift < 10.0 * sched.tol);
        }
    }
}
