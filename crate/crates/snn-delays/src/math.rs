//! Dense row-major matrices and a finite-difference gradient oracle.
//!
//! Training runs in 64-bit floating point throughout; nothing here drops to
//! f32. Dimension mismatches are programmer errors and panic.

use crate::error::{Result, SnnError};
use crate::rng::RngStream;

/// Dense matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(SnnError::dim(
                "Matrix::from_vec",
                format!("{} values for {}x{}", data.len(), rows, cols),
            ));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(SnnError::NonFinite(format!(
                "matrix entry {bad} = {}",
                data[bad]
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Fills every entry with an independent uniform draw from `(lo, hi]`.
    pub fn fill_uniform(&mut self, rng: &mut RngStream, lo: f64, hi: f64) {
        for v in &mut self.data {
            *v = rng.uniform_unchecked(lo, hi);
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self · x`. Panics on dimension mismatch.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(
            self.cols,
            x.len(),
            "matvec: matrix is {}x{}, vector has {}",
            self.rows,
            self.cols,
            x.len()
        );
        assert_eq!(self.rows, out.len(), "matvec: output length mismatch");
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(r), x);
        }
    }

    /// `selfᵀ · x`. Panics on dimension mismatch.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tr_matvec_into(x, &mut out);
        out
    }

    pub fn tr_matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(self.rows, x.len(), "tr_matvec: row/vector mismatch");
        assert_eq!(self.cols, out.len(), "tr_matvec: output length mismatch");
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &xv) in x.iter().enumerate() {
            if xv != 0.0 {
                axpy(xv, self.row(r), out);
            }
        }
    }

    /// Rank-1 accumulation `self += g · sᵀ`.
    pub fn add_outer(&mut self, g: &[f64], s: &[f64]) {
        assert_eq!(self.rows, g.len(), "add_outer: row mismatch");
        assert_eq!(self.cols, s.len(), "add_outer: col mismatch");
        for (r, &gv) in g.iter().enumerate() {
            if gv != 0.0 {
                axpy(gv, s, self.row_mut(r));
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// `out += a * x`.
#[inline]
pub fn axpy(a: f64, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(x.len(), out.len());
    for i in 0..x.len() {
        out[i] += a * x[i];
    }
}

/// `a · bᵀ` for `a: T x K`, `b: N x K` (both row-major, so every inner
/// product runs over contiguous rows).
pub fn matmul_nt(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(
        a.cols(),
        b.cols(),
        "matmul_nt: inner dimensions {} vs {}",
        a.cols(),
        b.cols()
    );
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for t in 0..a.rows() {
        let a_row = a.row(t);
        let out_row = out.row_mut(t);
        for (n, o) in out_row.iter_mut().enumerate() {
            *o = dot(a_row, b.row(n));
        }
    }
    out
}

/// Central-difference gradient of `f` at `x`.
///
/// Used as the independent oracle when validating reverse-mode gradients.
/// Errors if any probe evaluates non-finite, naming the coordinate.
pub fn finite_diff_grad<F>(mut f: F, x: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if eps.is_nan() || eps <= 0.0 {
        return Err(SnnError::InvalidArg(format!(
            "finite_diff_grad: eps must be positive, got {eps}"
        )));
    }
    let mut probe = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let fp = f(&probe);
        probe[i] = orig - eps;
        let fm = f(&probe);
        probe[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(SnnError::NonFinite(format!(
                "finite_diff_grad: f non-finite at coordinate {i} (f+ = {fp}, f- = {fm})"
            )));
        }
        grad[i] = (fp - fm) / (2.0 * eps);
    }
    Ok(grad)
}

/// Relative error with an absolute floor, used by gradient checks.
#[inline]
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matvec_identity() {
        let m = Matrix::identity(3);
        assert_eq!(m.matvec(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn matvec_zero_matrix() {
        let m = Matrix::zeros(4, 3);
        assert_eq!(m.matvec(&[5.0, -1.0, 2.0]), vec![0.0; 4]);
    }

    #[test]
    fn matvec_hand_case() {
        let m = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![3.0, 7.0]);
    }

    #[test]
    #[should_panic(expected = "matvec")]
    fn matvec_dim_mismatch_panics() {
        let m = Matrix::zeros(2, 3);
        let _ = m.matvec(&[1.0, 2.0]);
    }

    #[test]
    fn from_vec_rejects_nan() {
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Matrix::from_vec(1, 2, vec![1.0]).is_err());
    }

    #[test]
    fn tr_matvec_matches_transpose() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        // transpose is [[1,4],[2,5],[3,6]]
        assert_eq!(m.tr_matvec(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn finite_diff_on_square() {
        let g = finite_diff_grad(|x| x[0] * x[0], &[3.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn finite_diff_constant_is_zero() {
        let g = finite_diff_grad(|_| 4.2, &[1.0, 2.0, 3.0], 1e-5).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn finite_diff_sum_of_squares() {
        let g = finite_diff_grad(|x| x.iter().map(|v| v * v).sum(), &[1.0, 2.0], 1e-5).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-6);
        assert!((g[1] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn finite_diff_reports_bad_coordinate() {
        let err = finite_diff_grad(
            |x| if x[1] > 1.0 { f64::NAN } else { 0.0 },
            &[0.0, 1.0],
            1e-3,
        )
        .unwrap_err();
        assert!(err.to_string().contains("coordinate 1"), "{err}");
    }

    #[test]
    fn finite_diff_cubic_matches_analytic() {
        // O(eps^2) accuracy on degree-3 polynomials.
        let f = |x: &[f64]| x[0].powi(3) + 2.0 * x[0] * x[1] + x[1].powi(2);
        let x = [1.5, -0.5];
        let g = finite_diff_grad(f, &x, 1e-5).unwrap();
        let analytic = [3.0 * x[0] * x[0] + 2.0 * x[1], 2.0 * x[0] + 2.0 * x[1]];
        for i in 0..2 {
            assert!((g[i] - analytic[i]).abs() < 1e-8, "coord {i}: {} vs {}", g[i], analytic[i]);
        }
    }

    proptest! {
        #[test]
        fn matvec_is_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            xs in proptest::collection::vec(-5.0f64..5.0, 4),
            ys in proptest::collection::vec(-5.0f64..5.0, 4),
            entries in proptest::collection::vec(-2.0f64..2.0, 12),
        ) {
            let m = Matrix::from_vec(3, 4, entries).unwrap();
            let mixed: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| a * x + b * y).collect();
            let lhs = m.matvec(&mixed);
            let mx = m.matvec(&xs);
            let my = m.matvec(&ys);
            for i in 0..3 {
                let rhs = a * mx[i] + b * my[i];
                let scale = lhs[i].abs().max(rhs.abs()).max(1.0);
                prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * scale);
            }
        }
    }
}
