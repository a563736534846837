//! Compressed-row complex matrices acting on dense row-major `K×K` arrays.

use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != ZERO);

        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: merged.iter().map(|e| e.1).collect(),
            vals: merged.iter().map(|e| e.2).collect(),
        }
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        assert!(m.is_square());
        let dim = m.nrows();
        let mut t = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                if m[(r, c)] != ZERO {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(dim, t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |e| (r, self.cols[e], self.vals[e]))
        })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.dim,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect(),
        )
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= alpha);
        out.retain_nonzero();
        out
    }

    /// `self + alpha·other`
    pub fn add_scaled(&self, other: &SparseOp, alpha: Complex64) -> Self {
        assert_eq!(self.dim, other.dim);
        let t = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, v * alpha)))
            .collect();
        Self::from_triplets(self.dim, t)
    }

    /// Sparse product `self·other`.
    pub fn matmul(&self, other: &SparseOp) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut t = Vec::new();
        for (r, j, v) in self.triplets() {
            for e in other.row_ptr[j]..other.row_ptr[j + 1] {
                t.push((r, other.cols[e], v * other.vals[e]));
            }
        }
        Self::from_triplets(self.dim, t)
    }

    fn retain_nonzero(&mut self) {
        if self.vals.iter().all(|&v| v != ZERO) {
            return;
        }
        *self = Self::from_triplets(self.dim, self.triplets().collect());
    }

    pub fn hs_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `out += coef·(S·X)` for a row-major `K×K` array `X`.
    pub fn add_left_product(&self, x: &[Complex64], coef: Complex64, out: &mut [Complex64]) {
        let k = self.dim;
        for r in 0..k {
            let out_row = &mut out[r * k..(r + 1) * k];
            for e in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.vals[e] * coef;
                let x_row = &x[self.cols[e] * k..(self.cols[e] + 1) * k];
                for (o, &xv) in out_row.iter_mut().zip(x_row) {
                    *o += v * xv;
                }
            }
        }
    }

    /// `out += coef·(X·S)` for a row-major `K×K` array `X`.
    pub fn add_right_product(&self, x: &[Complex64], coef: Complex64, out: &mut [Complex64]) {
        let k = self.dim;
        for r in 0..k {
            let x_row = &x[r * k..(r + 1) * k];
            let out_row = &mut out[r * k..(r + 1) * k];
            for (j, &xv) in x_row.iter().enumerate() {
                if xv == ZERO {
                    continue;
                }
                let xv = xv * coef;
                for e in self.row_ptr[j]..self.row_ptr[j + 1] {
                    out_row[self.cols[e]] += xv * self.vals[e];
                }
            }
        }
    }

    /// `out += coef·[S, X]`
    pub fn add_commutator(&self, x: &[Complex64], coef: Complex64, out: &mut [Complex64]) {
        self.add_left_product(x, coef, out);
        self.add_right_product(x, -coef, out);
    }
}
