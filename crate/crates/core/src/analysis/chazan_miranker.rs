use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::linalg::{abs_matrix, spectral_radius, DenseMatrix, LinalgError, Lu};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmReport {
    /// `ρ(|I − M⁻¹A|)`.
    pub radius: f64,
    pub holds: bool,
    pub abs_iteration: DenseMatrix,
}

/// `ρ(|I − M⁻¹A|) < 1`: asynchronous relaxation with bounded delays
/// converges for every fair schedule.
pub fn chazan_miranker_check(a: &DenseMatrix, m: &DenseMatrix) -> Result<CmReport, AnalysisError> {
    if !a.is_square() || !m.is_square() || a.rows() != m.rows() {
        return Err(LinalgError::Dimension(format!(
            "A is {}x{}, M is {}x{}",
            a.rows(),
            a.cols(),
            m.rows(),
            m.cols()
        ))
        .into());
    }
    let lu = Lu::factor(m)?;
    let h = DenseMatrix::identity(a.rows()).sub(&lu.solve_matrix(a));
    let abs_h = abs_matrix(&h);
    let radius = spectral_radius(&abs_h)?;
    Ok(CmReport {
        radius,
        holds: radius < 1.0,
        abs_iteration: abs_h,
    })
}

/// Positive weights `w` and `γ = maxᵢ (|H| w)ᵢ / wᵢ`, so that
/// `‖|H| x‖_w ≤ γ ‖x‖_w`. For irreducible `|H|` the weights approach the
/// Perron vector and `γ` approaches `ρ(|H|)`.
pub fn perron_weights(abs_h: &DenseMatrix) -> (Vec<f64>, f64) {
    let n = abs_h.rows();
    let shifted = abs_h.add(&DenseMatrix::identity(n));
    let mut v = vec![1.0; n];
    for _ in 0..crate::linalg::POWER_ITERATION_CAP {
        let next = shifted.matvec(&v);
        let top = next.iter().fold(0.0_f64, |m, x| m.max(*x));
        let next: Vec<f64> = next.iter().map(|x| x / top).collect();
        let change = crate::linalg::max_abs_diff(&next, &v);
        v = next;
        if change < 1e-14 {
            break;
        }
    }
    let floor = 1e-6;
    let w: Vec<f64> = v.iter().map(|x| x.max(floor)).collect();
    let hw = abs_h.matvec(&w);
    let gamma = hw
        .iter()
        .zip(&w)
        .map(|(a, b)| a / b)
        .fold(0.0_f64, f64::max);
    (w, gamma)
}

/// `γ^⌈n/(D+1)⌉ · e0`: error bound after `n` fairness windows with delay
/// bound `D`, in the `w`-weighted max norm.
pub fn window_bound(gamma: f64, windows: usize, delay_bound: usize, e0: f64) -> f64 {
    let exponent = windows.div_ceil(delay_bound + 1);
    gamma.powi(exponent as i32) * e0
}

/// `maxᵢ |xᵢ| / wᵢ` for a flat vector.
pub fn weighted_error(x: &[f64], y: &[f64], w: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((a, b), wi)| (a - b).abs() / wi)
        .fold(0.0_f64, f64::max)
}
