use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::linalg::{operator_norm, NormKind};
use crate::model::AffinePropagator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub norm_g: f64,
    pub norm_fmg: f64,
    pub theta: f64,
    /// Synchronous factor `((1−θᵖ)/(1−θ))·‖ℱ−𝒢‖`.
    pub alpha: f64,
    /// Asynchronous factor `‖𝒢‖ + ‖ℱ−𝒢‖`.
    pub alpha_tilde: f64,
    pub p: usize,
    pub norm_kind: NormKind,
}

pub fn contraction_factors(
    g: &AffinePropagator,
    f: &AffinePropagator,
    p: usize,
    kind: NormKind,
    theta: Option<f64>,
) -> Result<ContractionReport, AnalysisError> {
    let norm_g = operator_norm(&g.matrix, kind)?;
    let norm_fmg = operator_norm(&f.matrix.sub(&g.matrix), kind)?;
    factors_from_norms(norm_g, norm_fmg, p, kind, theta)
}

/// Same as [`contraction_factors`] from precomputed norms.
pub fn factors_from_norms(
    norm_g: f64,
    norm_fmg: f64,
    p: usize,
    kind: NormKind,
    theta: Option<f64>,
) -> Result<ContractionReport, AnalysisError> {
    let theta = theta.unwrap_or(norm_g);
    if theta < norm_g {
        return Err(AnalysisError::InvalidTheta { theta, norm_g });
    }
    let geometric = if theta == 1.0 {
        p as f64
    } else {
        (1.0 - theta.powi(p as i32)) / (1.0 - theta)
    };
    Ok(ContractionReport {
        norm_g,
        norm_fmg,
        theta,
        alpha: geometric * norm_fmg,
        alpha_tilde: norm_g + norm_fmg,
        p,
        norm_kind: kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    pub holds: bool,
    /// Smallest slack among the strict inequalities.
    pub margin: f64,
}

/// `‖𝒢‖ < 1` and `‖𝒢‖ + ‖ℱ−𝒢‖ < 1 + ‖𝒢‖ᵖ‖ℱ−𝒢‖`.
pub fn sync_convergence_check(report: &ContractionReport) -> ConvergenceCheck {
    let first = 1.0 - report.norm_g;
    let second = 1.0 + report.norm_g.powi(report.p as i32) * report.norm_fmg - report.alpha_tilde;
    let margin = first.min(second);
    ConvergenceCheck {
        holds: first > 0.0 && second > 0.0,
        margin,
    }
}

/// `‖𝒢‖ + ‖ℱ−𝒢‖ < 1`.
pub fn async_convergence_check(report: &ContractionReport) -> ConvergenceCheck {
    let margin = 1.0 - report.alpha_tilde;
    ConvergenceCheck {
        holds: margin > 0.0,
        margin,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RateComparison {
    /// `α < α̃`, with `gap = α̃ − α`.
    Holds {
        gap: f64,
    },
    /// `α̃ ≥ 1`: nothing to certify.
    NotApplicable,
    Violated {
        alpha: f64,
        alpha_tilde: f64,
    },
}

pub fn compare_factors(report: &ContractionReport) -> RateComparison {
    if !(report.alpha_tilde < 1.0) {
        return RateComparison::NotApplicable;
    }
    if report.alpha < report.alpha_tilde {
        RateComparison::Holds {
            gap: report.alpha_tilde - report.alpha,
        }
    } else {
        RateComparison::Violated {
            alpha: report.alpha,
            alpha_tilde: report.alpha_tilde,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_report() -> ContractionReport {
        let g = AffinePropagator::scalar(0.8, 0.0, 1.0);
        let f = AffinePropagator::scalar(0.77880, 0.0, 25.0);
        contraction_factors(&g, &f, 4, NormKind::Spectral, None).unwrap()
    }

    #[test]
    fn scalar_factors() {
        let r = scalar_report();
        assert!((r.norm_g - 0.8).abs() < 1e-12);
        assert!((r.norm_fmg - 0.02120).abs() < 1e-12);
        assert!((r.alpha_tilde - 0.82120).abs() < 1e-12);
        let alpha = (1.0 - 0.8_f64.powi(4)) / 0.2 * 0.02120;
        assert!((r.alpha - alpha).abs() < 1e-12);
        assert!((r.alpha - 0.06258).abs() < 1e-5);
        assert_eq!(r.alpha_tilde, r.norm_g + r.norm_fmg);
    }

    #[test]
    fn equal_propagators() {
        let g = AffinePropagator::scalar(0.6, 0.0, 1.0);
        let r = contraction_factors(&g, &g, 5, NormKind::Infinity, None).unwrap();
        assert_eq!(r.alpha, 0.0);
        assert_eq!(r.alpha_tilde, r.norm_g);
    }

    #[test]
    fn theta_limit_and_validation() {
        let r = factors_from_norms(0.5, 0.1, 6, NormKind::Spectral, Some(1.0)).unwrap();
        assert!((r.alpha - 0.6).abs() < 1e-15);
        assert!(matches!(
            factors_from_norms(0.5, 0.1, 6, NormKind::Spectral, Some(0.4)),
            Err(AnalysisError::InvalidTheta { .. })
        ));
    }

    #[test]
    fn sync_predicate() {
        let c = sync_convergence_check(&scalar_report());
        assert!(c.holds);
        let rhs = 1.0 + 0.8_f64.powi(4) * 0.02120;
        assert!((rhs - 1.00868).abs() < 1e-5);
        assert!((c.margin - (rhs - 0.82120)).abs() < 1e-12);
        let bad = factors_from_norms(1.1, 0.0, 3, NormKind::Spectral, None).unwrap();
        assert!(!sync_convergence_check(&bad).holds);
        let easy = factors_from_norms(0.5, 0.0, 3, NormKind::Spectral, None).unwrap();
        let c = sync_convergence_check(&easy);
        assert!(c.holds);
        assert!((c.margin - 0.5).abs() < 1e-15);
    }

    #[test]
    fn async_predicate() {
        let c = async_convergence_check(&scalar_report());
        assert!(c.holds);
        assert!((c.margin - 0.17880).abs() < 1e-12);
        let edge = factors_from_norms(0.6, 0.4, 3, NormKind::Spectral, None).unwrap();
        assert!(!async_convergence_check(&edge).holds);
        let zero = factors_from_norms(0.0, 0.0, 3, NormKind::Spectral, None).unwrap();
        assert_eq!(async_convergence_check(&zero).margin, 1.0);
    }

    #[test]
    fn comparison() {
        match compare_factors(&scalar_report()) {
            RateComparison::Holds { gap } => assert!((gap - 0.75862).abs() < 1e-5),
            other => panic!("{other:?}"),
        }
        let big = factors_from_norms(0.9, 0.3, 3, NormKind::Spectral, None).unwrap();
        assert_eq!(compare_factors(&big), RateComparison::NotApplicable);
        let no_corr = factors_from_norms(0.9, 0.0, 3, NormKind::Spectral, None).unwrap();
        assert_eq!(
            compare_factors(&no_corr),
            RateComparison::Holds { gap: 0.9 }
        );
    }
}
