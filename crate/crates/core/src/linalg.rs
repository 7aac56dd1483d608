//! Small dense linear algebra: matrices, block vectors, norms and spectral
//! estimates. Everything here is sized for desk-scale problems (tens of
//! unknowns), so the routines favour exactness and determinism over speed.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Iteration cap for the SVD, the Schur form and the Perron power iteration.
pub const POWER_ITERATION_CAP: usize = 10_000;
/// Pivots smaller than this fraction of the largest entry count as zero.
pub const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("weight {index} is not strictly positive ({value})")]
    InvalidWeight { index: usize, value: f64 },
    #[error(
        "iteration did not converge after {iterations} iterations (last estimate {estimate})"
    )]
    NotConverged { estimate: f64, iterations: usize },
    #[error("singular matrix: pivot {pivot:e} in column {column}")]
    Singular { column: usize, pivot: f64 },
}

/// Which norm an analysis result was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// Max-abs for vectors, max row sum for matrices.
    Infinity,
    /// Euclidean norm for vectors, largest singular value for matrices.
    #[default]
    Spectral,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Infinity => "infinity",
            NormKind::Spectral => "spectral",
        }
    }
}

/// Norm of a plain vector.
pub fn vector_norm(v: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::Infinity => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        NormKind::Spectral => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Max-abs distance between two equally sized vectors.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for DenseMatrix {
    type Error = LinalgError;

    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        DenseMatrix::from_row_major(raw.rows, raw.cols, raw.data)
    }
}

impl From<DenseMatrix> for RawMatrix {
    fn from(m: DenseMatrix) -> Self {
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data,
        }
    }
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows * cols != data.len() {
            return Err(LinalgError::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite(idx));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn max_abs(&self) -> f64 {
        vector_norm(&self.data, NormKind::Infinity)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// `self · x`, summed left to right per row.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> DenseMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, exponent: usize) -> DenseMatrix {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..exponent {
            out = out.matmul(self);
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c));
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DenseMatrix {
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, self.get(r0 + r, c0 + c));
            }
        }
        out
    }

    fn require_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }
}

/// The stacked interface vector `(x_0, ..., x_p)`; every block has the same
/// length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVector {
    blocks: Vec<Vec<f64>>,
}

impl BlockVector {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        if let Some(first) = blocks.first() {
            let d = first.len();
            if blocks.iter().any(|b| b.len() != d) {
                return Err(LinalgError::Dimension(
                    "blocks must share one dimension".into(),
                ));
            }
        }
        Ok(BlockVector { blocks })
    }

    pub fn zeros(count: usize, block_dim: usize) -> Self {
        BlockVector {
            blocks: vec![vec![0.0; block_dim]; count],
        }
    }

    pub fn from_flat(flat: &[f64], block_dim: usize) -> Result<Self, LinalgError> {
        if block_dim == 0 || !flat.len().is_multiple_of(block_dim) {
            return Err(LinalgError::Dimension(format!(
                "length {} is not a multiple of block size {block_dim}",
                flat.len()
            )));
        }
        Ok(BlockVector {
            blocks: flat.chunks(block_dim).map(<[f64]>::to_vec).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_dim(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.blocks.concat()
    }

    /// Max over blocks of the inner block norm.
    pub fn max_norm(&self, kind: NormKind) -> f64 {
        self.blocks
            .iter()
            .fold(0.0_f64, |m, b| m.max(vector_norm(b, kind)))
    }

    /// Block-max norm of `self - other`.
    pub fn distance(&self, other: &BlockVector, kind: NormKind) -> f64 {
        assert_eq!(self.len(), other.len(), "block count mismatch");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                vector_norm(&diff, kind)
            })
            .fold(0.0_f64, f64::max)
    }

    /// Bitwise equality of every entry (distinguishes `0.0` from `-0.0`).
    pub fn bitwise_eq(&self, other: &BlockVector) -> bool {
        self.len() == other.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

/// `max_i ‖x_i‖∞ / w_i`.
pub fn weighted_max_norm(x: &BlockVector, weights: &[f64]) -> Result<f64, LinalgError> {
    if weights.len() != x.len() {
        return Err(LinalgError::Dimension(format!(
            "{} weights for {} blocks",
            weights.len(),
            x.len()
        )));
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
        return Err(LinalgError::InvalidWeight { index, value });
    }
    Ok(x.blocks()
        .iter()
        .zip(weights)
        .map(|(b, w)| vector_norm(b, NormKind::Infinity) / w)
        .fold(0.0_f64, f64::max))
}

pub fn abs_matrix(m: &DenseMatrix) -> DenseMatrix {
    DenseMatrix {
        rows: m.rows,
        cols: m.cols,
        data: m.data.iter().map(|x| x.abs()).collect(),
    }
}

/// Induced operator norm of a square matrix.
pub fn operator_norm(m: &DenseMatrix, kind: NormKind) -> Result<f64, LinalgError> {
    m.require_square()?;
    match kind {
        NormKind::Infinity => Ok((0..m.rows)
            .map(|r| m.row(r).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)),
        NormKind::Spectral => largest_singular_value(m),
    }
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows, m.cols, &m.data)
}

/// `σ_max` from the singular values.
fn largest_singular_value(m: &DenseMatrix) -> Result<f64, LinalgError> {
    if m.rows == 0 || m.cols == 0 {
        return Ok(0.0);
    }
    let svd = to_nalgebra(m)
        .try_svd(false, false, f64::EPSILON, POWER_ITERATION_CAP)
        .ok_or(LinalgError::NotConverged {
            estimate: to_nalgebra(m).norm(),
            iterations: POWER_ITERATION_CAP,
        })?;
    Ok(svd.singular_values.max())
}

/// Largest eigenvalue modulus, from the real Schur form.
///
/// Nilpotent inputs whose `n`-th power vanishes exactly give exactly 0. If
/// the QR iteration does not converge the result is
/// [`LinalgError::NotConverged`] carrying the Frobenius norm, an upper
/// bound.
pub fn spectral_radius(m: &DenseMatrix) -> Result<f64, LinalgError> {
    m.require_square()?;
    let n = m.rows;
    if n == 0 {
        return Ok(0.0);
    }
    let a = to_nalgebra(m);
    let mut power = a.clone();
    for _ in 1..n {
        power = &power * &a;
    }
    if power.iter().all(|x| *x == 0.0) {
        return Ok(0.0);
    }
    let schur =
        a.try_schur(f64::EPSILON, POWER_ITERATION_CAP)
            .ok_or(LinalgError::NotConverged {
                estimate: to_nalgebra(m).norm(),
                iterations: POWER_ITERATION_CAP,
            })?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &DenseMatrix) -> Result<Self, LinalgError> {
        m.require_square()?;
        let n = m.rows;
        let threshold = PIVOT_TOL * m.max_abs();
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot) =
                (col..n)
                    .map(|r| (r, lu[r * n + col]))
                    .fold((col, 0.0_f64), |best, (r, v)| {
                        if v.abs() > best.1.abs() {
                            (r, v)
                        } else {
                            best
                        }
                    });
            if pivot.abs() <= threshold || pivot == 0.0 {
                return Err(LinalgError::Singular { column: col, pivot });
            }
            if pivot_row != col {
                for c in 0..n {
                    lu.swap(col * n + c, pivot_row * n + c);
                }
                perm.swap(col, pivot_row);
            }
            for r in col + 1..n {
                let factor = lu[r * n + col] / pivot;
                lu[r * n + col] = factor;
                if factor != 0.0 {
                    for c in col + 1..n {
                        lu[r * n + c] -= factor * lu[col * n + c];
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n, "rhs dimension mismatch");
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                x[r] -= self.lu[r * n + c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= self.lu[r * n + c] * x[c];
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }

    /// Solves `self · X = B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        let bt = b.transpose();
        let mut out = DenseMatrix::zeros(b.rows, b.cols);
        for c in 0..b.cols {
            let col = self.solve(bt.row(c));
            for (r, v) in col.into_iter().enumerate() {
                out.set(r, c, v);
            }
        }
        out
    }
}
