//! Transverse-field and random Ising Hamiltonians in the spin-flip-symmetric
//! half space.
//!
//! Both `H_i = -Σ_k σ^x_k` and `H_f = -Σ_{k<l} J_kl σ^z_k σ^z_l` commute with
//! the global spin flip, so an annealing run that starts from the uniform
//! superposition never leaves the symmetric subspace. A symmetric vector of
//! length `2^N` is a palindrome and is stored by its first half only.
//!
//! # Index convention
//!
//! Qubit `k` (1-based, `k = 1..=N`) is bit `N - k` of the basis index, so
//! qubit 1 is the most significant bit. A zero bit means `z_k = +1`, a set
//! bit means `z_k = -1`. The half space holds the indices whose top bit
//! (qubit 1) is zero; the partner of half-space index `i` under the global
//! flip is `2^N - 1 - i`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::seed::coupling_rng;

/// Largest register the symmetric pure-state code will allocate for.
pub const MAX_QUBITS: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct QubitCount(u32);

impl QubitCount {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(AnnealError::QubitRange {
                found: n,
                min: 2,
                max: MAX_QUBITS,
            });
        }
        if n > MAX_QUBITS {
            return Err(AnnealError::Capacity {
                what: "state vector",
                found: n,
                max: MAX_QUBITS,
            });
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `2^(N-1)`
    pub fn half_dim(self) -> usize {
        1usize << (self.0 - 1)
    }

    /// `2^N`
    pub fn full_dim(self) -> usize {
        1usize << self.0
    }

    /// Number of coupled pairs, `N(N-1)/2`.
    pub fn pairs(self) -> usize {
        let n = self.0 as usize;
        n * (n - 1) / 2
    }
}

impl TryFrom<u32> for QubitCount {
    type Error = AnnealError;
    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<QubitCount> for u32 {
    fn from(n: QubitCount) -> u32 {
        n.0
    }
}

/// Single-bit flips on qubits `2..=N` inside the half space, stored in CSR
/// form with every value equal to `-1`.
///
/// The flip of qubit 1 maps the half space onto its mirror image and is
/// applied separately as a reversal (see [`TransverseField::apply_into`]).
#[derive(Debug, Clone)]
pub struct TransverseField {
    qubits: QubitCount,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
}

impl TransverseField {
    /// Builds the flip structure by the doubling iteration: start from the
    /// one-qubit pair `(0,1),(1,0)`, then for every further qubit copy the
    /// pattern shifted by `2^k` and add the couplings `p <-> p + 2^k`.
    pub fn new(qubits: QubitCount) -> Self {
        let bits = qubits.get() - 1;
        let dim = qubits.half_dim();

        let mut rows: Vec<u32> = vec![0, 1];
        let mut cols: Vec<u32> = vec![1, 0];
        for k in 1..bits {
            let shift = 1u32 << k;
            let len = rows.len();
            for e in 0..len {
                rows.push(rows[e] + shift);
                cols.push(cols[e] + shift);
            }
            for p in 0..shift {
                rows.push(p);
                cols.push(p + shift);
            }
            for p in 0..shift {
                rows.push(p + shift);
                cols.push(p);
            }
        }

        let mut entries: Vec<(u32, u32)> = rows.into_iter().zip(cols).collect();
        entries.sort_unstable();
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _) in &entries {
            row_ptr[r as usize + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let cols = entries.into_iter().map(|(_, c)| c).collect();

        Self {
            qubits,
            row_ptr,
            cols,
        }
    }

    pub fn qubits(&self) -> QubitCount {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Column indices of the nonzeros in `row` (each entry is `-1`).
    pub fn row(&self, row: usize) -> &[u32] {
        &self.cols[self.row_ptr[row]..self.row_ptr[row + 1]]
    }

    /// `(row, col)` pairs of all nonzero entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c as usize)))
    }

    /// `out = couplings·x - reverse(x)`, the full `H_i` restricted to
    /// symmetric vectors.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim();
        debug_assert_eq!(x.len(), dim);
        debug_assert_eq!(out.len(), dim);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = x[dim - 1 - r];
            for &c in self.row(r) {
                acc += x[c as usize];
            }
            *o = -acc;
        }
    }

    pub fn apply(&self, psi: &HalfStateVector) -> Result<HalfStateVector> {
        check_dim(self.dim(), psi.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(psi.as_slice(), &mut out);
        Ok(HalfStateVector(out))
    }
}

/// Builds the half-space transverse field for `n` qubits.
pub fn transverse_field_half(n: QubitCount) -> TransverseField {
    TransverseField::new(n)
}

/// Applies `H_i` to a symmetric half-space state.
pub fn apply_initial(tf: &TransverseField, psi: &HalfStateVector) -> Result<HalfStateVector> {
    tf.apply(psi)
}

/// Diagonal of a random all-to-all `±1` Ising Hamiltonian, kept as exact
/// integers over the half space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsingDiagonal {
    qubits: QubitCount,
    seed: Option<u64>,
    /// `J_kl` for `k < l`, in lexicographic pair order.
    couplings: Vec<i8>,
    half_diag: Vec<i64>,
}

impl IsingDiagonal {
    /// Draws the `N(N-1)/2` couplings from the ChaCha8 stream of `seed`, in
    /// lexicographic pair order `(1,2), (1,3), …, (N-1,N)`.
    pub fn random(qubits: QubitCount, seed: u64) -> Self {
        let mut rng = coupling_rng(seed);
        let couplings = (0..qubits.pairs())
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let mut h = Self::from_couplings(qubits, couplings).expect("pair count matches");
        h.seed = Some(seed);
        h
    }

    pub fn from_couplings(qubits: QubitCount, couplings: Vec<i8>) -> Result<Self> {
        check_dim(qubits.pairs(), couplings.len())?;
        if let Some(bad) = couplings.iter().find(|&&j| j != 1 && j != -1) {
            return Err(AnnealError::InvalidParameter(format!(
                "couplings must be ±1, found {bad}"
            )));
        }
        let n = qubits.get();
        let pairs: Vec<(u32, u32, i64)> = pair_iter(n)
            .zip(&couplings)
            .map(|((k, l), &j)| (n - 1 - k, n - 1 - l, j as i64))
            .collect();
        let half_diag = (0..qubits.half_dim())
            .map(|i| {
                pairs
                    .iter()
                    .map(|&(bk, bl, j)| {
                        let anti = ((i >> bk) ^ (i >> bl)) & 1;
                        if anti == 0 {
                            -j
                        } else {
                            j
                        }
                    })
                    .sum()
            })
            .collect();
        Ok(Self {
            qubits,
            seed: None,
            couplings,
            half_diag,
        })
    }

    pub fn qubits(&self) -> QubitCount {
        self.qubits
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn couplings(&self) -> &[i8] {
        &self.couplings
    }

    /// `J_kl` for 1-based qubits `k != l`.
    pub fn coupling(&self, k: u32, l: u32) -> i8 {
        let (k, l) = if k < l { (k, l) } else { (l, k) };
        let n = self.qubits.get();
        assert!(k >= 1 && l <= n && k < l, "qubit pair out of range");
        let (k0, l0) = ((k - 1) as usize, (l - 1) as usize);
        let n = n as usize;
        // pairs with first index < k0 come first
        let before = k0 * n - k0 * (k0 + 1) / 2;
        self.couplings[before + (l0 - k0 - 1)]
    }

    pub fn half_diag(&self) -> &[i64] {
        &self.half_diag
    }

    /// The full `2^N` diagonal: the half diagonal followed by its reversal.
    pub fn full_diag(&self) -> Vec<i64> {
        let mut full = self.half_diag.clone();
        full.extend(self.half_diag.iter().rev());
        full
    }
}

/// 0-based pairs `(k, l)`, `k < l`, in lexicographic order.
pub(crate) fn pair_iter(n: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..n).flat_map(move |k| (k + 1..n).map(move |l| (k, l)))
}

/// Draws a random Ising instance; see [`IsingDiagonal::random`].
pub fn random_ising_half(n: QubitCount, seed: u64) -> IsingDiagonal {
    IsingDiagonal::random(n, seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSpace {
    /// Sorted half-space indices attaining the minimum.
    pub indices: Vec<usize>,
    pub energy: i64,
}

impl GroundSpace {
    /// Degeneracy counted in the half space; the full-space degeneracy is
    /// twice this.
    pub fn degeneracy(&self) -> usize {
        self.indices.len()
    }

    /// Ground indices in the full `2^N` space, sorted.
    pub fn full_indices(&self, qubits: QubitCount) -> Vec<usize> {
        let top = qubits.full_dim() - 1;
        let mut all: Vec<usize> = self.indices.iter().flat_map(|&i| [i, top - i]).collect();
        all.sort_unstable();
        all
    }
}

pub fn ground_space(h: &IsingDiagonal) -> GroundSpace {
    ground_space_of(h.half_diag())
}

pub(crate) fn ground_space_of(half_diag: &[i64]) -> GroundSpace {
    let energy = *half_diag.iter().min().expect("diagonal is never empty");
    let indices = half_diag
        .iter()
        .enumerate()
        .filter_map(|(i, &e)| (e == energy).then_some(i))
        .collect();
    GroundSpace { indices, energy }
}

/// Amplitudes of a symmetric state over the half space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfStateVector(pub Vec<Complex64>);

impl HalfStateVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Palindromic extension to the full `2^N` vector.
    pub fn lift_to_full(&self) -> Vec<Complex64> {
        let mut full = self.0.clone();
        full.extend(self.0.iter().rev());
        full
    }
}

/// Ground state of `H_i`: every full-space amplitude equals `2^(-N/2)`.
pub fn uniform_initial_state(n: QubitCount) -> HalfStateVector {
    let amp = (n.full_dim() as f64).sqrt().recip();
    HalfStateVector(vec![Complex64::new(amp, 0.0); n.half_dim()])
}

pub fn lift_to_full(psi: &HalfStateVector) -> Vec<Complex64> {
    psi.lift_to_full()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(AnnealError::DimensionMismatch { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn q(n: u32) -> QubitCount {
        QubitCount::new(n).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn dense(tf: &TransverseField) -> Vec<Vec<i32>> {
        let d = tf.dim();
        let mut m = vec![vec![0; d]; d];
        for (r, c) in tf.entries() {
            m[r][c] -= 1;
        }
        m
    }

    #[test]
    fn qubit_count_bounds() {
        assert!(matches!(
            QubitCount::new(1),
            Err(AnnealError::QubitRange { found: 1, .. })
        ));
        assert!(matches!(
            QubitCount::new(MAX_QUBITS + 1),
            Err(AnnealError::Capacity { .. })
        ));
        assert_eq!(q(5).half_dim(), 16);
        assert_eq!(q(5).pairs(), 10);
    }

    #[test]
    fn transverse_field_two_qubits() {
        let tf = transverse_field_half(q(2));
        assert_eq!(dense(&tf), vec![vec![0, -1], vec![-1, 0]]);
    }

    #[test]
    fn transverse_field_three_qubits() {
        // Hand trace of the doubling loop for two half-space bits (1-based
        // pairs (1,2),(3,4),(1,3),(2,4) and their transposes).
        let tf = transverse_field_half(q(3));
        let expected = vec![
            vec![0, -1, -1, 0],
            vec![-1, 0, 0, -1],
            vec![-1, 0, 0, -1],
            vec![0, -1, -1, 0],
        ];
        assert_eq!(dense(&tf), expected);
    }

    #[test]
    fn transverse_field_nonzero_count() {
        for n in 2..=12 {
            let tf = transverse_field_half(q(n));
            assert_eq!(tf.nnz(), (n as usize - 1) << (n - 1));
            // symmetric, zero diagonal, single-bit flips only
            for (r, c) in tf.entries() {
                assert_ne!(r, c);
                assert_eq!((r ^ c).count_ones(), 1);
                assert!(tf.row(c).contains(&(r as u32)));
            }
        }
        assert_eq!(transverse_field_half(q(4)).nnz(), 24);
    }

    #[test]
    fn apply_initial_examples() {
        let tf = transverse_field_half(q(2));
        let out = apply_initial(&tf, &HalfStateVector(vec![c(0.5), c(0.5)])).unwrap();
        assert_eq!(out.0, vec![c(-1.0), c(-1.0)]);

        let tf3 = transverse_field_half(q(3));
        let psi0 = uniform_initial_state(q(3));
        let out = apply_initial(&tf3, &psi0).unwrap();
        for (o, p) in out.0.iter().zip(&psi0.0) {
            assert_relative_eq!(o.re, -3.0 * p.re, epsilon = 1e-15);
        }

        let e0 = HalfStateVector(vec![c(1.0), c(0.0), c(0.0), c(0.0)]);
        let out = apply_initial(&tf3, &e0).unwrap();
        assert_eq!(out.0, vec![c(0.0), c(-1.0), c(-1.0), c(-1.0)]);
    }

    #[test]
    fn apply_initial_dimension_mismatch() {
        let tf = transverse_field_half(q(3));
        let err = apply_initial(&tf, &HalfStateVector(vec![c(1.0); 3])).unwrap_err();
        assert_eq!(
            err,
            AnnealError::DimensionMismatch {
                expected: 4,
                found: 3
            }
        );
    }

    /// Full-space `H_i` from explicit σ^x flips on every bit.
    fn dense_full_hi(n: u32) -> Vec<Vec<f64>> {
        let d = 1usize << n;
        let mut m = vec![vec![0.0; d]; d];
        for (i, row) in m.iter_mut().enumerate() {
            for b in 0..n {
                row[i ^ (1 << b)] -= 1.0;
            }
        }
        m
    }

    #[test]
    fn apply_initial_matches_dense_full_space() {
        for n in 2..=6 {
            let qn = q(n);
            let tf = transverse_field_half(qn);
            let full = dense_full_hi(n);
            let half = HalfStateVector(
                (0..qn.half_dim())
                    .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64).cos()))
                    .collect(),
            );
            let lifted = half.lift_to_full();
            let want: Vec<Complex64> = full
                .iter()
                .map(|row| row.iter().zip(&lifted).map(|(&a, &x)| x * a).sum())
                .collect();
            let got = tf.apply(&half).unwrap().lift_to_full();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn transverse_operator_norm_is_n() {
        use nalgebra::DMatrix;
        for n in 2..=6 {
            let d = 1usize << n;
            let full = dense_full_hi(n);
            let m = DMatrix::from_fn(d, d, |r, c| full[r][c]);
            let sv = m.singular_values();
            assert_relative_eq!(sv.max(), n as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn ising_examples() {
        let h = IsingDiagonal::from_couplings(q(2), vec![1]).unwrap();
        assert_eq!(h.half_diag(), &[-1, 1]);
        let gs = ground_space(&h);
        assert_eq!(
            (gs.indices.clone(), gs.energy, gs.degeneracy()),
            (vec![0], -1, 1)
        );

        let h = IsingDiagonal::from_couplings(q(3), vec![1, 1, 1]).unwrap();
        assert_eq!(h.half_diag(), &[-3, 1, 1, 1]);
        let gs = ground_space(&h);
        assert_eq!(gs.indices, vec![0]);
        assert_eq!(gs.full_indices(q(3)), vec![0, 7]);

        // J12 = J13 = +1, J23 = -1
        let h = IsingDiagonal::from_couplings(q(3), vec![1, 1, -1]).unwrap();
        assert_eq!(h.half_diag(), &[-1, -1, -1, 3]);
        let gs = ground_space(&h);
        assert_eq!(gs.indices, vec![0, 1, 2]);
        assert_eq!(gs.degeneracy(), 3);
        assert_eq!(h.coupling(2, 3), -1);
        assert_eq!(h.coupling(3, 1), 1);
    }

    #[test]
    fn ising_matches_enumeration() {
        let n = 5;
        let h = random_ising_half(q(n), 99);
        for i in 0..(1usize << n) {
            let z = |k: u32| if (i >> (n - k)) & 1 == 0 { 1i64 } else { -1 };
            let mut e = 0i64;
            for k in 1..=n {
                for l in k + 1..=n {
                    e -= h.coupling(k, l) as i64 * z(k) * z(l);
                }
            }
            assert_eq!(h.full_diag()[i], e);
        }
    }

    #[test]
    fn rejects_bad_couplings() {
        assert!(IsingDiagonal::from_couplings(q(3), vec![1, 0, 1]).is_err());
        assert!(IsingDiagonal::from_couplings(q(3), vec![1, 1]).is_err());
    }

    #[test]
    fn uniform_state_and_lift() {
        let psi = uniform_initial_state(q(2));
        assert_eq!(psi.0, vec![c(0.5), c(0.5)]);
        assert_eq!(psi.lift_to_full(), vec![c(0.5); 4]);
        let psi = uniform_initial_state(q(3));
        assert_relative_eq!(psi.0[0].re, 8f64.sqrt().recip());

        let ab = HalfStateVector(vec![c(1.0), c(2.0)]);
        assert_eq!(lift_to_full(&ab), vec![c(1.0), c(2.0), c(2.0), c(1.0)]);
    }

    proptest! {
        #[test]
        fn ising_invariants(n in 2u32..=10, seed in any::<u64>()) {
            let qn = q(n);
            let h = random_ising_half(qn, seed);
            let full = h.full_diag();
            let rev: Vec<i64> = full.iter().rev().copied().collect();
            prop_assert_eq!(&full, &rev);

            let bound = qn.pairs() as i64;
            for &e in h.half_diag() {
                prop_assert!(e >= -bound && e <= bound);
                prop_assert_eq!((e - bound).rem_euclid(2), 0);
            }
            prop_assert_eq!(h.clone(), random_ising_half(qn, seed));

            let gs = ground_space(&h);
            prop_assert!(!gs.indices.is_empty());
            prop_assert!(gs.indices.iter().all(|&i| h.half_diag()[i] == gs.energy));
        }

        #[test]
        fn uniform_state_half_norm(n in 2u32..=16) {
            let psi = uniform_initial_state(q(n));
            prop_assert!((psi.norm_sqr() - 0.5).abs() < 1e-12);
            let full: f64 = psi.lift_to_full().iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((full - 1.0).abs() < 1e-12);
        }
    }
}
