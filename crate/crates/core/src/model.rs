//! Linear initial-value problems `du/dt = A u + c` and the affine
//! propagators that advance them over one time subinterval.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{DenseMatrix, LinalgError, Lu};

/// Work units charged for one implicit step (one linear solve).
pub const UNIT_STEP_COST: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular step matrix for dt = {dt}: pivot {pivot:e} in column {column}")]
    SingularStep { dt: f64, column: usize, pivot: f64 },
    #[error("invalid time decomposition: {0}")]
    Decomposition(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `du/dt = A u + c`, `u(0) = u0`, on `[0, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearIvp {
    #[serde(rename = "a")]
    pub generator: DenseMatrix,
    #[serde(rename = "c")]
    pub source: Vec<f64>,
    #[serde(rename = "u0")]
    pub initial: Vec<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub label: String,
}

impl LinearIvp {
    pub fn new(
        generator: DenseMatrix,
        source: Vec<f64>,
        initial: Vec<f64>,
        t_end: f64,
        label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let ivp = LinearIvp {
            generator,
            source,
            initial,
            t_end,
            label: label.into(),
        };
        ivp.validate()?;
        Ok(ivp)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let a = &self.generator;
        if !a.is_square() {
            return Err(ModelError::Dimension(format!(
                "generator is {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if a.rows() == 0 {
            return Err(ModelError::Degenerate("empty state".into()));
        }
        if self.source.len() != a.rows() || self.initial.len() != a.rows() {
            return Err(ModelError::Dimension(format!(
                "generator has dimension {}, source {}, initial state {}",
                a.rows(),
                self.source.len(),
                self.initial.len()
            )));
        }
        if self
            .source
            .iter()
            .chain(&self.initial)
            .any(|x| !x.is_finite())
        {
            return Err(ModelError::Degenerate(
                "non-finite source or initial state".into(),
            ));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(ModelError::Degenerate(format!("final time {}", self.t_end)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    /// `A u + c`.
    pub fn rhs(&self, u: &[f64]) -> Vec<f64> {
        self.generator
            .matvec(u)
            .into_iter()
            .zip(&self.source)
            .map(|(a, c)| a + c)
            .collect()
    }
}

/// Second-order finite differences for `u_t = u_xx` on `(0, length)` with
/// Dirichlet values at both ends and a uniform initial temperature.
pub fn heat1d_system(
    n_interior: usize,
    length: f64,
    boundary_left: f64,
    boundary_right: f64,
    initial_temp: f64,
    t_end: f64,
) -> Result<LinearIvp, ModelError> {
    if n_interior == 0 {
        return Err(ModelError::Degenerate(
            "heat1d needs at least one interior node".into(),
        ));
    }
    if !(length > 0.0) {
        return Err(ModelError::Degenerate(format!("length {length}")));
    }
    let h = length / (n_interior as f64 + 1.0);
    let inv_h2 = 1.0 / (h * h);
    let mut a = DenseMatrix::zeros(n_interior, n_interior);
    for i in 0..n_interior {
        a.set(i, i, -2.0 * inv_h2);
        if i > 0 {
            a.set(i, i - 1, inv_h2);
        }
        if i + 1 < n_interior {
            a.set(i, i + 1, inv_h2);
        }
    }
    let mut c = vec![0.0; n_interior];
    c[0] += boundary_left * inv_h2;
    c[n_interior - 1] += boundary_right * inv_h2;
    LinearIvp::new(
        a,
        c,
        vec![initial_temp; n_interior],
        t_end,
        format!("heat1d(n={n_interior})"),
    )
}

/// Scalar `u' = -rate·u`, `u(0) = u0`.
pub fn scalar_decay(rate: f64, u0: f64, t_end: f64) -> Result<LinearIvp, ModelError> {
    LinearIvp::new(
        DenseMatrix::from_row_major(1, 1, vec![-rate])?,
        vec![0.0],
        vec![u0],
        t_end,
        "scalar-decay",
    )
}

/// Uniform split of `[0, p·ΔT]` with one coarse step per subinterval and
/// `ΔT/δt` fine steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDecomposition {
    pub p: usize,
    pub boundaries: Vec<f64>,
    pub coarse_dt: f64,
    pub fine_dt: f64,
    pub fine_steps: usize,
}

impl TimeDecomposition {
    pub fn uniform(p: usize, coarse_dt: f64, fine_dt: f64) -> Result<Self, ModelError> {
        if p == 0 {
            return Err(ModelError::Decomposition("p must be at least 1".into()));
        }
        if !(coarse_dt > 0.0) || !(fine_dt > 0.0) {
            return Err(ModelError::Decomposition(format!(
                "time steps must be positive (coarse {coarse_dt}, fine {fine_dt})"
            )));
        }
        let ratio = coarse_dt / fine_dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio {
            return Err(ModelError::Decomposition(format!(
                "fine step {fine_dt} does not divide coarse step {coarse_dt}"
            )));
        }
        Ok(TimeDecomposition {
            p,
            boundaries: (0..=p).map(|i| i as f64 * coarse_dt).collect(),
            coarse_dt,
            fine_dt,
            fine_steps: steps as usize,
        })
    }

    pub fn t_end(&self) -> f64 {
        self.boundaries[self.p]
    }
}

/// The affine map `x ↦ M x + b` together with the work it costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePropagator {
    pub matrix: DenseMatrix,
    pub offset: Vec<f64>,
    pub cost_units: f64,
}

impl AffinePropagator {
    pub fn new(matrix: DenseMatrix, offset: Vec<f64>, cost_units: f64) -> Result<Self, ModelError> {
        if !matrix.is_square() || matrix.rows() != offset.len() {
            return Err(ModelError::Dimension(format!(
                "{}x{} matrix with offset of length {}",
                matrix.rows(),
                matrix.cols(),
                offset.len()
            )));
        }
        Ok(AffinePropagator {
            matrix,
            offset,
            cost_units,
        })
    }

    pub fn identity(dim: usize) -> Self {
        AffinePropagator {
            matrix: DenseMatrix::identity(dim),
            offset: vec![0.0; dim],
            cost_units: 0.0,
        }
    }

    /// Scalar map `x ↦ m·x + b`.
    pub fn scalar(m: f64, b: f64, cost_units: f64) -> Self {
        AffinePropagator {
            matrix: DenseMatrix::diag(&[m]),
            offset: vec![b],
            cost_units,
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, state: &[f64]) -> Result<Vec<f64>, ModelError> {
        if state.len() != self.dim() {
            return Err(ModelError::Dimension(format!(
                "state of length {} for a propagator of dimension {}",
                state.len(),
                self.dim()
            )));
        }
        Ok(self.eval(state))
    }

    /// `M x + b` without the dimension check.
    pub(crate) fn eval(&self, state: &[f64]) -> Vec<f64> {
        let mut out = self.matrix.matvec(state);
        out.iter_mut().zip(&self.offset).for_each(|(o, b)| *o += b);
        out
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &AffinePropagator) -> AffinePropagator {
        let mut offset = self.matrix.matvec(&first.offset);
        offset
            .iter_mut()
            .zip(&self.offset)
            .for_each(|(o, b)| *o += b);
        AffinePropagator {
            matrix: self.matrix.matmul(&first.matrix),
            offset,
            cost_units: self.cost_units + first.cost_units,
        }
    }
}

/// Time-integration rule used to build a propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    BackwardEuler,
    Trapezoidal,
}

impl Rule {
    pub fn propagator(
        self,
        ivp: &LinearIvp,
        span: f64,
        steps: usize,
    ) -> Result<AffinePropagator, ModelError> {
        match self {
            Rule::BackwardEuler => backward_euler_propagator(ivp, span, steps),
            Rule::Trapezoidal => trapezoidal_propagator(ivp, span, steps),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::BackwardEuler => "backward-euler",
            Rule::Trapezoidal => "trapezoidal",
        }
    }
}

fn step_count(span: f64, steps: usize) -> Result<f64, ModelError> {
    if steps == 0 {
        return Err(ModelError::Degenerate(
            "step count must be at least 1".into(),
        ));
    }
    if !(span > 0.0) || !span.is_finite() {
        return Err(ModelError::Degenerate(format!("span {span}")));
    }
    Ok(span / steps as f64)
}

/// `u ↦ L⁻¹ (R u + dt·c)` for the implicit left factor `L` and explicit
/// right factor `R`.
fn implicit_step(
    ivp: &LinearIvp,
    dt: f64,
    implicit_weight: f64,
    explicit_weight: f64,
) -> Result<AffinePropagator, ModelError> {
    let n = ivp.dim();
    let id = DenseMatrix::identity(n);
    let lhs = id.sub(&ivp.generator.scale(implicit_weight * dt));
    let lu = Lu::factor(&lhs).map_err(|e| match e {
        LinalgError::Singular { column, pivot } => ModelError::SingularStep { dt, column, pivot },
        other => ModelError::Linalg(other),
    })?;
    let rhs = if explicit_weight == 0.0 {
        id
    } else {
        id.add(&ivp.generator.scale(explicit_weight * dt))
    };
    let matrix = lu.solve_matrix(&rhs);
    let forcing: Vec<f64> = ivp.source.iter().map(|c| dt * c).collect();
    let offset = lu.solve(&forcing);
    Ok(AffinePropagator {
        matrix,
        offset,
        cost_units: UNIT_STEP_COST,
    })
}

pub fn backward_euler_propagator(
    ivp: &LinearIvp,
    span: f64,
    steps: usize,
) -> Result<AffinePropagator, ModelError> {
    let dt = step_count(span, steps)?;
    Ok(fine_from_onestep(&implicit_step(ivp, dt, 1.0, 0.0)?, steps))
}

pub fn trapezoidal_propagator(
    ivp: &LinearIvp,
    span: f64,
    steps: usize,
) -> Result<AffinePropagator, ModelError> {
    let dt = step_count(span, steps)?;
    Ok(fine_from_onestep(&implicit_step(ivp, dt, 0.5, 0.5)?, steps))
}

/// `count`-fold composition of a one-step map; costs add up. A count of 0
/// is treated as 1.
pub fn fine_from_onestep(onestep: &AffinePropagator, count: usize) -> AffinePropagator {
    let mut total = onestep.clone();
    for _ in 1..count {
        total = onestep.after(&total);
    }
    total
}
