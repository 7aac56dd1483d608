//! Sequential reference solve, synchronous Parareal and its block
//! Richardson form.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::linalg::{BlockVector, DenseMatrix, NormKind};
use crate::model::{AffinePropagator, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Threshold,
    KMax,
    Exact,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Threshold => "threshold",
            StopReason::KMax => "k-max",
            StopReason::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncTrace {
    /// `λ⁰, λ¹, …, λ^k_final`.
    pub iterates: Vec<BlockVector>,
    pub k_final: usize,
    pub stop_reason: StopReason,
    /// `deltas[k-1] = ‖λᵏ − λᵏ⁻¹‖∞`.
    pub deltas: Vec<f64>,
}

impl SyncTrace {
    pub fn final_iterate(&self) -> &BlockVector {
        &self.iterates[self.k_final]
    }

    pub fn to_json(&self, include_iterates: bool) -> serde_json::Value {
        let mut value = json!({
            "k_final": self.k_final,
            "stop_reason": self.stop_reason,
            "deltas": self.deltas,
        });
        if include_iterates {
            value["iterates"] = json!(self.iterates);
        }
        value
    }
}

pub(crate) fn check_dims(
    g: &AffinePropagator,
    f: &AffinePropagator,
    u0: &[f64],
) -> Result<(), ModelError> {
    if g.dim() != f.dim() || g.dim() != u0.len() {
        return Err(ModelError::Dimension(format!(
            "coarse dimension {}, fine dimension {}, initial state {}",
            g.dim(),
            f.dim(),
            u0.len()
        )));
    }
    Ok(())
}

fn propagate(prop: &AffinePropagator, u0: &[f64], p: usize) -> Result<BlockVector, ModelError> {
    if prop.dim() != u0.len() {
        return Err(ModelError::Dimension(format!(
            "propagator dimension {} with initial state {}",
            prop.dim(),
            u0.len()
        )));
    }
    let mut blocks = Vec::with_capacity(p + 1);
    blocks.push(u0.to_vec());
    for i in 1..=p {
        let next = prop.eval(&blocks[i - 1]);
        blocks.push(next);
    }
    Ok(BlockVector::new(blocks)?)
}

/// `λ_seq[i] = F(λ_seq[i−1])`, the reference every run is measured against.
pub fn sequential_fine_solve(
    f: &AffinePropagator,
    u0: &[f64],
    p: usize,
) -> Result<BlockVector, ModelError> {
    propagate(f, u0, p)
}

pub fn coarse_init(g: &AffinePropagator, u0: &[f64], p: usize) -> Result<BlockVector, ModelError> {
    propagate(g, u0, p)
}

/// `G(fresh) + F(stale) − G(stale)`.
///
/// Evaluated as `(G(fresh) − G(stale)) + F(stale)` so that equal inputs
/// return `F(stale)` bit for bit.
pub(crate) fn correction(
    g: &AffinePropagator,
    f: &AffinePropagator,
    fresh: &[f64],
    stale: &[f64],
) -> Vec<f64> {
    let g_fresh = g.eval(fresh);
    let g_stale = g.eval(stale);
    let f_stale = f.eval(stale);
    g_fresh
        .iter()
        .zip(&g_stale)
        .zip(f_stale)
        .map(|((a, b), fv)| {
            let d = a - b;
            // keeps a -0.0 from F intact
            if d == 0.0 {
                fv
            } else {
                d + fv
            }
        })
        .collect()
}

/// One sweep in ascending order; components `0..=frozen` are copied.
fn sweep(
    g: &AffinePropagator,
    f: &AffinePropagator,
    lam: &BlockVector,
    frozen: usize,
) -> BlockVector {
    let mut next = lam.clone();
    for i in (frozen + 1)..lam.len() {
        let value = correction(g, f, next.block(i - 1), lam.block(i - 1));
        *next.block_mut(i) = value;
    }
    next
}

/// One full Parareal iteration: `λ⁺₀ = λ₀`,
/// `λ⁺ᵢ = G(λ⁺ᵢ₋₁) + F(λᵢ₋₁) − G(λᵢ₋₁)`.
pub fn parareal_iterate(
    g: &AffinePropagator,
    f: &AffinePropagator,
    lam: &BlockVector,
) -> Result<BlockVector, ModelError> {
    if lam.is_empty() {
        return Err(ModelError::Dimension("empty interface vector".into()));
    }
    check_dims(g, f, lam.block(0))?;
    Ok(sweep(g, f, lam, 0))
}

/// Synchronous Parareal from the coarse initial guess. Iteration `k+1`
/// only recomputes components `i > k`. Stops on `‖λᵏ − λᵏ⁻¹‖∞ < ε`, at
/// `k = p`, or at `k_max` (default `p`), checked in that order.
pub fn run_parareal(
    g: &AffinePropagator,
    f: &AffinePropagator,
    u0: &[f64],
    p: usize,
    epsilon: f64,
    k_max: Option<usize>,
) -> Result<SyncTrace, ModelError> {
    check_dims(g, f, u0)?;
    if p == 0 {
        return Err(ModelError::Decomposition("p must be at least 1".into()));
    }
    let k_max = k_max.unwrap_or(p).min(p);
    let mut iterates = vec![coarse_init(g, u0, p)?];
    let mut deltas = Vec::new();
    if k_max == 0 {
        return Ok(SyncTrace {
            iterates,
            k_final: 0,
            stop_reason: StopReason::KMax,
            deltas,
        });
    }
    loop {
        let k = iterates.len() - 1;
        let next = sweep(g, f, &iterates[k], k);
        let delta = next.distance(&iterates[k], NormKind::Infinity);
        log::debug!("sync iteration {}: delta {delta:e}", k + 1);
        iterates.push(next);
        deltas.push(delta);
        let k = k + 1;
        let reason = if delta < epsilon {
            Some(StopReason::Threshold)
        } else if k == p {
            Some(StopReason::Exact)
        } else if k == k_max {
            Some(StopReason::KMax)
        } else {
            None
        };
        if let Some(stop_reason) = reason {
            return Ok(SyncTrace {
                iterates,
                k_final: k,
                stop_reason,
                deltas,
            });
        }
    }
}

/// `A λ = b` with `A = I − ℱ` on the subdiagonal and preconditioner `M`
/// carrying `−𝒢` there instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSystem {
    pub a_block: DenseMatrix,
    pub m_block: DenseMatrix,
    pub b_block: Vec<f64>,
    pub p: usize,
    pub block_dim: usize,
    coarse: DenseMatrix,
}

pub fn build_parareal_system(
    g: &AffinePropagator,
    f: &AffinePropagator,
    u0: &[f64],
    p: usize,
) -> Result<BlockSystem, ModelError> {
    check_dims(g, f, u0)?;
    let d = u0.len();
    let n = (p + 1) * d;
    let mut a = DenseMatrix::identity(n);
    let mut m = DenseMatrix::identity(n);
    let neg_f = f.matrix.scale(-1.0);
    let neg_g = g.matrix.scale(-1.0);
    let mut b = Vec::with_capacity(n);
    b.extend_from_slice(u0);
    for i in 1..=p {
        a.set_block(i * d, (i - 1) * d, &neg_f);
        m.set_block(i * d, (i - 1) * d, &neg_g);
        b.extend_from_slice(&f.offset);
    }
    Ok(BlockSystem {
        a_block: a,
        m_block: m,
        b_block: b,
        p,
        block_dim: d,
        coarse: g.matrix.clone(),
    })
}

impl BlockSystem {
    /// `M⁻¹ X` by forward block substitution.
    fn precondition(&self, x: &DenseMatrix) -> DenseMatrix {
        let d = self.block_dim;
        let mut out = x.clone();
        for i in 1..=self.p {
            let prev = out.block((i - 1) * d, 0, d, x.cols());
            let own = out.block(i * d, 0, d, x.cols());
            out.set_block(i * d, 0, &own.add(&self.coarse.matmul(&prev)));
        }
        out
    }

    /// `I − M⁻¹A`.
    pub fn iteration_matrix(&self) -> DenseMatrix {
        let n = self.a_block.rows();
        DenseMatrix::identity(n).sub(&self.precondition(&self.a_block))
    }

    /// `M⁻¹ b`.
    pub fn preconditioned_rhs(&self) -> Vec<f64> {
        let column = DenseMatrix::from_row_major(self.b_block.len(), 1, self.b_block.clone())
            .expect("finite right-hand side");
        self.precondition(&column).data().to_vec()
    }

    /// `λ ↦ (I − M⁻¹A) λ + M⁻¹ b` on the stacked vector.
    pub fn richardson_step(&self, lam: &[f64]) -> Vec<f64> {
        let mut out = self.iteration_matrix().matvec(lam);
        out.iter_mut()
            .zip(self.preconditioned_rhs())
            .for_each(|(o, c)| *o += c);
        out
    }

    /// `A λ − b`.
    pub fn residual(&self, lam: &[f64]) -> Vec<f64> {
        self.a_block
            .matvec(lam)
            .into_iter()
            .zip(&self.b_block)
            .map(|(x, b)| x - b)
            .collect()
    }
}
