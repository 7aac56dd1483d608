//! Abstract work-unit cost model for sequential, synchronous and
//! asynchronous runs. `c_bar` is the average non-overlapped communication
//! overhead per synchronous iteration.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub p: usize,
    pub c_f: f64,
    pub c_g: f64,
    pub c_bar: f64,
    pub k: Option<usize>,
    pub kappa: Option<usize>,
}

impl CostParams {
    pub fn new(p: usize, c_f: f64, c_g: f64, c_bar: f64) -> Self {
        CostParams {
            p,
            c_f,
            c_g,
            c_bar,
            k: None,
            kappa: None,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_kappa(mut self, kappa: usize) -> Self {
        self.kappa = Some(kappa);
        self
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        for (name, v) in [("C_F", self.c_f), ("C_G", self.c_g), ("C_bar", self.c_bar)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(AnalysisError::InvalidCost(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    fn k(&self) -> Result<usize, AnalysisError> {
        self.k
            .ok_or_else(|| AnalysisError::InvalidCost("iteration count k missing".into()))
    }

    fn kappa(&self) -> Result<usize, AnalysisError> {
        self.kappa
            .ok_or_else(|| AnalysisError::InvalidCost("async count kappa missing".into()))
    }
}

/// `p·C_F`.
pub fn sequential_cost(c: &CostParams) -> f64 {
    c.p as f64 * c.c_f
}

/// `p·C_G + k·(C_F + C_G + (p − 1 − (k+1)/2)·C̄)`.
pub fn sync_cost(c: &CostParams) -> Result<f64, AnalysisError> {
    c.validate()?;
    let k = c.k()?;
    if k > c.p {
        return Err(AnalysisError::InvalidCost(format!(
            "k = {k} exceeds p = {}",
            c.p
        )));
    }
    let (p, kf) = (c.p as f64, k as f64);
    Ok(p * c.c_g + kf * (c.c_f + c.c_g + (p - 1.0 - (kf + 1.0) / 2.0) * c.c_bar))
}

/// `p·C_G + κ·(C_F + C_G)`.
pub fn async_cost(c: &CostParams) -> Result<f64, AnalysisError> {
    c.validate()?;
    let kappa = c.kappa()?;
    Ok(c.p as f64 * c.c_g + kappa as f64 * (c.c_f + c.c_g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    /// `1 + (p−2)·C̄/(C_F + C_G)`.
    pub bound: f64,
    /// `sync_cost / async_cost` when both counts are known.
    pub achieved: Option<f64>,
    /// Whether `achieved ≤ bound`; only evaluated when `κ ≥ k`.
    pub within_bound: Option<bool>,
}

pub fn speedup_bound(c: &CostParams) -> Result<SpeedupReport, AnalysisError> {
    c.validate()?;
    if c.p < 2 {
        return Err(AnalysisError::InvalidCost(format!("p = {} < 2", c.p)));
    }
    let work = c.c_f + c.c_g;
    if !(work > 0.0) {
        return Err(AnalysisError::InvalidCost(
            "C_F + C_G must be positive".into(),
        ));
    }
    let bound = 1.0 + (c.p as f64 - 2.0) * c.c_bar / work;
    let (achieved, within_bound) = match (c.k, c.kappa) {
        (Some(k), Some(kappa)) => {
            let ratio = sync_cost(c)? / async_cost(c)?;
            (
                Some(ratio),
                (kappa >= k).then_some(ratio <= bound * (1.0 + 1e-12)),
            )
        }
        _ => (None, None),
    };
    Ok(SpeedupReport {
        bound,
        achieved,
        within_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    /// `C_F / (C_G + k·C̄)`.
    pub sync_vs_seq: f64,
    /// `C_F / C_G`.
    pub async_vs_seq: f64,
    /// `1 + k·C̄/C_G`.
    pub async_vs_sync: f64,
}

/// Speedups in the limit `p → ∞`.
pub fn asymptotic_speedups(c: &CostParams) -> Result<Asymptotics, AnalysisError> {
    c.validate()?;
    if c.c_g == 0.0 {
        return Err(AnalysisError::UndefinedLimit);
    }
    let k = c.k()? as f64;
    Ok(Asymptotics {
        sync_vs_seq: c.c_f / (c.c_g + k * c.c_bar),
        async_vs_seq: c.c_f / c.c_g,
        async_vs_sync: 1.0 + k * c.c_bar / c.c_g,
    })
}

/// Inverts [`sync_cost`] for `C̄` given a measured total; negative fits are
/// floored at 0.
pub fn fit_overhead(
    t_measured: f64,
    p: usize,
    k: usize,
    c_f: f64,
    c_g: f64,
) -> Result<f64, AnalysisError> {
    let (pf, kf) = (p as f64, k as f64);
    let denom = kf * (pf - 1.0) - kf * (kf + 1.0) / 2.0;
    if !(denom > 0.0) {
        return Err(AnalysisError::Unfittable(format!(
            "k(p-1) - k(k+1)/2 = {denom} for p = {p}, k = {k}"
        )));
    }
    let c_bar = (t_measured - pf * c_g - kf * (c_f + c_g)) / denom;
    Ok(c_bar.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> CostParams {
        CostParams::new(16, 14.0, 0.14, 1.53)
    }

    #[test]
    fn sync_cost_examples() {
        let c = row().with_k(10);
        assert!((sync_cost(&c).unwrap() - 288.99).abs() < 1e-9);
        let free = CostParams::new(16, 14.0, 0.14, 0.0).with_k(10);
        assert!((sync_cost(&free).unwrap() - (16.0 * 0.14 + 10.0 * 14.14)).abs() < 1e-12);
        assert!((sync_cost(&row().with_k(0)).unwrap() - 2.24).abs() < 1e-12);
        assert!(sync_cost(&row().with_k(17)).is_err());
    }

    #[test]
    fn async_cost_examples() {
        let c = row().with_kappa(24);
        let v = async_cost(&c).unwrap();
        assert!((v - 341.60).abs() < 1e-9);
        assert!((async_cost(&row().with_kappa(0)).unwrap() - 2.24).abs() < 1e-12);
        let free = CostParams::new(8, 3.0, 0.5, 0.0).with_k(5).with_kappa(5);
        assert!((async_cost(&free).unwrap() - sync_cost(&free).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn speedup_examples() {
        let s = speedup_bound(&row()).unwrap();
        assert!((s.bound - (1.0 + 14.0 * 1.53 / 14.14)).abs() < 1e-12);
        assert!((s.bound - 2.515).abs() < 1e-3);
        assert_eq!(s.achieved, None);
        assert_eq!(
            speedup_bound(&CostParams::new(16, 14.0, 0.14, 0.0))
                .unwrap()
                .bound,
            1.0
        );
        assert_eq!(
            speedup_bound(&CostParams::new(2, 14.0, 0.14, 1.53))
                .unwrap()
                .bound,
            1.0
        );
        assert!(speedup_bound(&CostParams::new(1, 14.0, 0.14, 1.53)).is_err());
        let both = speedup_bound(&row().with_k(10).with_kappa(24)).unwrap();
        assert_eq!(both.within_bound, Some(true));
        let fewer = speedup_bound(&row().with_k(10).with_kappa(5)).unwrap();
        assert_eq!(fewer.within_bound, None);
    }

    #[test]
    fn asymptotic_examples() {
        let a = asymptotic_speedups(&row().with_k(10)).unwrap();
        assert!((a.sync_vs_seq - 14.0 / 15.44).abs() < 1e-12);
        assert!((a.sync_vs_seq - 0.9067).abs() < 1e-4);
        assert!((a.async_vs_seq - 100.0).abs() < 1e-9);
        assert!((a.async_vs_sync - 110.2857).abs() < 1e-4);
        let free = asymptotic_speedups(&CostParams::new(16, 14.0, 0.14, 0.0).with_k(10)).unwrap();
        assert_eq!(free.sync_vs_seq, free.async_vs_seq);
        assert_eq!(free.async_vs_sync, 1.0);
        let unit = asymptotic_speedups(&CostParams::new(4, 1.0, 0.5, 0.5).with_k(1)).unwrap();
        assert_eq!(unit.async_vs_sync, 2.0);
        assert_eq!(
            asymptotic_speedups(&CostParams::new(4, 1.0, 0.0, 0.5).with_k(1)),
            Err(AnalysisError::UndefinedLimit)
        );
    }

    #[test]
    fn fit_examples() {
        let t = sync_cost(&row().with_k(10)).unwrap();
        assert!((fit_overhead(t, 16, 10, 14.0, 0.14).unwrap() - 1.53).abs() < 1e-12);
        let free = 16.0 * 0.14 + 10.0 * 14.14;
        assert_eq!(fit_overhead(free, 16, 10, 14.0, 0.14).unwrap(), 0.0);
        let c = fit_overhead(280.0, 16, 10, 14.0, 0.14).unwrap();
        assert!((c - 136.36 / 95.0).abs() < 1e-12);
        assert!((c - 1.436).abs() < 1e-3);
        assert!(fit_overhead(10.0, 16, 0, 14.0, 0.14).is_err());
        assert!(fit_overhead(10.0, 2, 1, 14.0, 0.14).is_err());
    }
}
