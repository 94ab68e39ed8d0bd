//! Dense row-major matrices in 64-bit floating point.
//!
//! Every layer and the factorization solver exchange [`DenseMatrix`] values.
//! Graphs in the target benchmarks stay below a few hundred nodes, so the
//! adjacency is stored dense as well.
//!
//! All products accumulate in a fixed order (row-major, inner loop over the
//! shared dimension), which makes results bit-identical across calls.

use std::fmt;

use crate::error::{Error, Result};

/// Floor applied to denominators by [`ElementwiseOp::DivGuarded`].
pub const EPS_DIV: f64 = 1e-9;

/// A dense real matrix stored in row-major order: `data[i * cols + j]`.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Elementwise binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementwiseOp {
    /// Hadamard product.
    Mul,
    /// `a / max(b, EPS_DIV)`.
    DivGuarded,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting empty shapes, length
    /// mismatches and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidShape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
                value: data[pos],
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices.
    ///
    /// Panics on ragged or empty input; meant for literals in code and tests.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "row {i} has {} columns, expected {cols}", row.len());
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data).expect("invalid matrix literal")
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 1.0)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    /// Matrix product `self · b`.
    pub fn matmul(&self, b: &Self) -> Result<Self> {
        if self.cols != b.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                left: self.shape(),
                right: b.shape(),
            });
        }
        let (m, k, n) = (self.rows, self.cols, b.cols);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let out_row = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let a_ip = self.data[i * k + p];
                if a_ip == 0.0 {
                    continue;
                }
                let b_row = &b.data[p * n..(p + 1) * n];
                for (o, &b_pj) in out_row.iter_mut().zip(b_row) {
                    *o += a_ip * b_pj;
                }
            }
        }
        Ok(Self { rows: m, cols: n, data: out })
    }

    /// `selfᵀ · b` without materializing the transpose.
    pub fn t_matmul(&self, b: &Self) -> Result<Self> {
        if self.rows != b.rows {
            return Err(Error::ShapeMismatch {
                op: "t_matmul",
                left: self.shape(),
                right: b.shape(),
            });
        }
        let (k, m, n) = (self.rows, self.cols, b.cols);
        let mut out = vec![0.0; m * n];
        for p in 0..k {
            let a_row = self.row(p);
            let b_row = b.row(p);
            for (i, &a_pi) in a_row.iter().enumerate() {
                if a_pi == 0.0 {
                    continue;
                }
                let out_row = &mut out[i * n..(i + 1) * n];
                for (o, &b_pj) in out_row.iter_mut().zip(b_row) {
                    *o += a_pi * b_pj;
                }
            }
        }
        Ok(Self { rows: m, cols: n, data: out })
    }

    /// `self · bᵀ` without materializing the transpose.
    pub fn matmul_t(&self, b: &Self) -> Result<Self> {
        if self.cols != b.cols {
            return Err(Error::ShapeMismatch {
                op: "matmul_t",
                left: self.shape(),
                right: b.shape(),
            });
        }
        let (m, n) = (self.rows, b.rows);
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            let a_row = self.row(i);
            for j in 0..n {
                let mut acc = 0.0;
                for (x, y) in a_row.iter().zip(b.row(j)) {
                    acc += x * y;
                }
                out.push(acc);
            }
        }
        Ok(Self { rows: m, cols: n, data: out })
    }

    pub fn transpose(&self) -> Self {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.data[i * self.cols + j]);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    pub fn elementwise(&self, b: &Self, op: ElementwiseOp) -> Result<Self> {
        self.check_same_shape(b, "elementwise")?;
        let data = self
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| match op {
                ElementwiseOp::Mul => x * y,
                ElementwiseOp::DivGuarded => x / y.max(EPS_DIV),
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add(&self, b: &Self) -> Result<Self> {
        self.check_same_shape(b, "add")?;
        Ok(self.zip_map(b, |x, y| x + y))
    }

    pub fn sub(&self, b: &Self) -> Result<Self> {
        self.check_same_shape(b, "sub")?;
        Ok(self.zip_map(b, |x, y| x - y))
    }

    /// `self += alpha * b`.
    pub fn add_scaled(&mut self, b: &Self, alpha: f64) -> Result<()> {
        self.check_same_shape(b, "add_scaled")?;
        for (x, &y) in self.data.iter_mut().zip(&b.data) {
            *x += alpha * y;
        }
        Ok(())
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|x| alpha * x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    fn zip_map(&self, b: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn relu(&self) -> Self {
        self.map(|x| x.max(0.0))
    }

    /// 1 where the entry is strictly positive, 0 elsewhere.
    pub fn relu_mask(&self) -> Self {
        self.map(|x| if x > 0.0 { 1.0 } else { 0.0 })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Column means as a `1 × cols` matrix.
    pub fn column_means(&self) -> Self {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                *o += x;
            }
        }
        let n = self.rows as f64;
        out.iter_mut().for_each(|x| *x /= n);
        Self {
            rows: 1,
            cols: self.cols,
            data: out,
        }
    }

    /// Largest absolute difference from the transpose; 0 for symmetric input.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    /// `(self + selfᵀ) / 2` for square matrices.
    pub fn symmetrized(&self) -> Self {
        debug_assert_eq!(self.rows, self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    /// Largest elementwise absolute difference. Shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Softmax cross-entropy of a `1 × C` logit row against a class index.
    ///
    /// Returns the loss and its gradient `softmax(logits) - onehot(label)`.
    pub fn row_softmax_cross_entropy(&self, label: usize) -> Result<(f64, Self)> {
        if self.rows != 1 {
            return Err(Error::ShapeMismatch {
                op: "row_softmax_cross_entropy",
                left: self.shape(),
                right: (1, self.cols),
            });
        }
        if label >= self.cols {
            return Err(Error::LabelOutOfRange {
                label,
                classes: self.cols,
            });
        }
        let shift = self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = self.data.iter().map(|&x| (x - shift).exp()).collect();
        let total: f64 = exps.iter().sum();
        let loss = total.ln() - (self.data[label] - shift);
        let mut grad: Vec<f64> = exps.iter().map(|e| e / total).collect();
        grad[label] -= 1.0;
        Ok((
            loss,
            Self {
                rows: 1,
                cols: self.cols,
                data: grad,
            },
        ))
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => Err(Error::NonFinite {
                row: pos / self.cols,
                col: pos % self.cols,
                value: self.data[pos],
            }),
        }
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
            (0..a.cols()).map(|p| a.get(i, p) * b.get(p, j)).sum()
        })
    }

    #[test]
    fn matmul_identity_and_small_case() {
        let b = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(DenseMatrix::identity(2).matmul(&b).unwrap(), b);
        let col = DenseMatrix::from_rows(&[&[0.0], &[1.0]]);
        assert_eq!(
            b.matmul(&col).unwrap(),
            DenseMatrix::from_rows(&[&[2.0], &[4.0]])
        );
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let a = random(7, 5, 1);
        let b = random(5, 3, 2);
        let fast = a.matmul(&b).unwrap();
        assert!(fast.max_abs_diff(&naive_matmul(&a, &b)) < 1e-12);
        assert!(a.t_matmul(&random(7, 4, 3)).unwrap().max_abs_diff(
            &naive_matmul(&a.transpose(), &random(7, 4, 3))
        ) < 1e-12);
        assert!(a.matmul_t(&random(2, 5, 4)).unwrap().max_abs_diff(
            &naive_matmul(&a, &random(2, 5, 4).transpose())
        ) < 1e-12);
    }

    #[test]
    fn matmul_shape_error_names_shapes() {
        let err = random(2, 3, 0).matmul(&random(2, 3, 0)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3"), "{msg}");
    }

    #[test]
    fn zero_sized_and_non_finite_rejected() {
        assert!(DenseMatrix::new(0, 0, vec![]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn transpose_cases() {
        let row = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0]]);
        assert_eq!(
            row.transpose(),
            DenseMatrix::from_rows(&[&[1.0], &[2.0], &[3.0]])
        );
        let a = random(4, 6, 9);
        assert_eq!(a.transpose().transpose(), a);
        let s = a.matmul_t(&a).unwrap();
        assert_eq!(s.transpose(), s);
    }

    #[test]
    fn elementwise_ops() {
        let a = random(3, 3, 5);
        let b = random(3, 3, 6);
        assert_eq!(
            a.elementwise(&DenseMatrix::ones(3, 3), ElementwiseOp::Mul).unwrap(),
            a
        );
        assert_eq!(
            a.elementwise(&b, ElementwiseOp::Mul).unwrap(),
            b.elementwise(&a, ElementwiseOp::Mul).unwrap()
        );
        let q = DenseMatrix::from_rows(&[&[1.0]])
            .elementwise(&DenseMatrix::from_rows(&[&[0.0]]), ElementwiseOp::DivGuarded)
            .unwrap();
        assert!((q.get(0, 0) - 1e9).abs() < 1e-3);
        assert!(a.elementwise(&random(2, 3, 0), ElementwiseOp::Mul).is_err());
    }

    #[test]
    fn relu_and_mask() {
        let a = DenseMatrix::from_rows(&[&[-1.0, 2.0]]);
        assert_eq!(a.relu(), DenseMatrix::from_rows(&[&[0.0, 2.0]]));
        assert_eq!(a.relu_mask(), DenseMatrix::from_rows(&[&[0.0, 1.0]]));
        let r = random(4, 4, 3);
        assert_eq!(r.relu().relu(), r.relu());
    }

    #[test]
    fn frobenius_cases() {
        assert_eq!(DenseMatrix::zeros(3, 2).frobenius_norm(), 0.0);
        assert_eq!(DenseMatrix::from_rows(&[&[3.0, 4.0]]).frobenius_norm(), 5.0);
        let a = random(6, 4, 11);
        let via_trace = a.t_matmul(&a).unwrap().trace().sqrt();
        assert!((a.frobenius_norm() - via_trace).abs() < 1e-12);
    }

    #[test]
    fn softmax_cross_entropy_cases() {
        let (loss, grad) = DenseMatrix::zeros(1, 2).row_softmax_cross_entropy(0).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(grad.sum().abs() < 1e-12);
        assert!(DenseMatrix::zeros(1, 2).row_softmax_cross_entropy(2).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let logits = DenseMatrix::from_fn(1, 5, |_, _| rng.gen_range(-20.0..20.0));
            let label = rng.gen_range(0..5);
            let (loss, grad) = logits.row_softmax_cross_entropy(label).unwrap();
            assert!(grad.sum().abs() < 1e-12);
            // Direct -log(softmax) with a compensated sum as the reference.
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for &x in logits.data() {
                let y = x.exp() - c;
                let t = s + y;
                c = (t - s) - y;
                s = t;
            }
            let reference = -(logits.get(0, label).exp() / s).ln();
            assert!((loss - reference).abs() < 1e-10 * reference.abs().max(1.0));
        }
    }

    #[test]
    fn softmax_is_stable_for_huge_logits() {
        let logits = DenseMatrix::from_rows(&[&[1000.0, 0.0]]);
        let (loss, grad) = logits.row_softmax_cross_entropy(1).unwrap();
        assert!((loss - 1000.0).abs() < 1e-9);
        assert!(grad.check_finite().is_ok());
    }

    proptest! {
        #[test]
        fn matmul_associative(seed in 0u64..1000, m in 1usize..6, k in 1usize..6, n in 1usize..6, p in 1usize..6) {
            let a = random(m, k, seed);
            let b = random(k, n, seed + 1);
            let c = random(n, p, seed + 2);
            let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
            let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
            let scale = left.max_abs().max(1.0);
            prop_assert!(left.max_abs_diff(&right) <= 1e-9 * scale);
        }

        #[test]
        fn transpose_of_product(seed in 0u64..1000, m in 1usize..6, k in 1usize..6, n in 1usize..6) {
            let a = random(m, k, seed);
            let b = random(k, n, seed + 7);
            let lhs = a.matmul(&b).unwrap().transpose();
            let rhs = b.transpose().matmul(&a.transpose()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn norms_and_relu_are_non_negative(seed in 0u64..1000) {
            let a = random(4, 3, seed);
            prop_assert!(a.relu().min() >= 0.0);
            prop_assert!(a.frobenius_norm() > 0.0);
            prop_assert_eq!(a.matmul(&a.transpose()).unwrap(), a.matmul(&a.transpose()).unwrap());
        }
    }
}
