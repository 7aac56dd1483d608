//! Asynchronous relaxation `x ← x + M⁻¹(b − A x)` with scalar components.

use super::{AsyncMapping, Read};
use crate::linalg::{DenseMatrix, LinalgError, Lu};

#[derive(Debug, Clone)]
pub struct LinearRelaxation {
    /// `I − M⁻¹A`.
    pub iteration: DenseMatrix,
    /// `M⁻¹b`.
    pub shift: Vec<f64>,
    sources: Vec<Vec<usize>>,
}

impl LinearRelaxation {
    pub fn new(a: &DenseMatrix, m: &DenseMatrix, b: &[f64]) -> Result<Self, LinalgError> {
        if !a.is_square() || a.rows() != m.rows() || m.rows() != m.cols() || b.len() != a.rows() {
            return Err(LinalgError::Dimension(format!(
                "A is {}x{}, M is {}x{}, b has length {}",
                a.rows(),
                a.cols(),
                m.rows(),
                m.cols(),
                b.len()
            )));
        }
        let lu = Lu::factor(m)?;
        let n = a.rows();
        let iteration = DenseMatrix::identity(n).sub(&lu.solve_matrix(a));
        let shift = lu.solve(b);
        let sources = (0..n)
            .map(|i| (0..n).filter(|&j| iteration.get(i, j) != 0.0).collect())
            .collect();
        Ok(LinearRelaxation {
            iteration,
            shift,
            sources,
        })
    }

    /// Jacobi splitting: `M = diag(A)`.
    pub fn jacobi(a: &DenseMatrix, b: &[f64]) -> Result<Self, LinalgError> {
        let diag: Vec<f64> = (0..a.rows().min(a.cols())).map(|i| a.get(i, i)).collect();
        Self::new(a, &DenseMatrix::diag(&diag), b)
    }
}

impl AsyncMapping for LinearRelaxation {
    fn components(&self) -> usize {
        self.shift.len()
    }

    fn arity(&self) -> usize {
        1
    }

    fn read_set(&self, i: usize) -> Vec<Read> {
        self.sources[i]
            .iter()
            .map(|&source| Read { source, slot: 1 })
            .collect()
    }

    fn eval(&self, i: usize, inputs: &[&[f64]]) -> Vec<f64> {
        let sum = self.sources[i]
            .iter()
            .zip(inputs)
            .fold(0.0, |acc, (&j, x)| acc + self.iteration.get(i, j) * x[0]);
        vec![sum + self.shift[i]]
    }
}
