use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::engine::AsyncSchedule;
use crate::linalg::{DenseMatrix, NormKind};
use crate::model::{heat1d_system, scalar_decay, LinearIvp, Rule, TimeDecomposition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Heat1d {
        #[serde(default = "default_nodes")]
        n_interior: usize,
        #[serde(default = "one")]
        length: f64,
        #[serde(default = "boundary")]
        boundary_left: f64,
        #[serde(default = "boundary")]
        boundary_right: f64,
        #[serde(default = "initial_temp")]
        initial_temp: f64,
    },
    ScalarDecay {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        u0: f64,
    },
    Custom {
        a: DenseMatrix,
        c: Vec<f64>,
        u0: Vec<f64>,
    },
}

fn default_nodes() -> usize {
    8
}
fn one() -> f64 {
    1.0
}
fn boundary() -> f64 {
    23.0
}
fn initial_temp() -> f64 {
    30.0
}
fn default_epsilon() -> f64 {
    1e-6
}
fn coarse_rule() -> Rule {
    Rule::BackwardEuler
}
fn fine_rule() -> Rule {
    Rule::Trapezoidal
}
fn one_step() -> usize {
    1
}
fn all_modes() -> Vec<Mode> {
    vec![Mode::Sequential, Mode::Sync, Mode::Async]
}

impl ProblemSpec {
    pub fn build(&self, t_end: f64) -> Result<LinearIvp, ExperimentError> {
        let ivp = match self {
            ProblemSpec::Heat1d {
                n_interior,
                length,
                boundary_left,
                boundary_right,
                initial_temp,
            } => heat1d_system(
                *n_interior,
                *length,
                *boundary_left,
                *boundary_right,
                *initial_temp,
                t_end,
            ),
            ProblemSpec::ScalarDecay { rate, u0 } => scalar_decay(*rate, *u0, t_end),
            ProblemSpec::Custom { a, c, u0 } => {
                LinearIvp::new(a.clone(), c.clone(), u0.clone(), t_end, "custom")
            }
        };
        ivp.map_err(|e| ExperimentError::config("problem", e.to_string()))
    }
}

/// One subinterval count or several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValues {
    One(usize),
    Many(Vec<usize>),
}

impl PValues {
    pub fn values(&self) -> Vec<usize> {
        match self {
            PValues::One(p) => vec![*p],
            PValues::Many(ps) => ps.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSpec {
    pub p: PValues,
    pub coarse_dt: f64,
    pub fine_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorSpec {
    #[serde(default = "coarse_rule")]
    pub coarse: Rule,
    #[serde(default = "fine_rule")]
    pub fine: Rule,
    #[serde(default = "one_step")]
    pub coarse_steps: usize,
    /// Must equal `coarse_dt / fine_dt` when given.
    #[serde(default)]
    pub fine_steps: Option<usize>,
}

impl Default for PropagatorSpec {
    fn default() -> Self {
        PropagatorSpec {
            coarse: coarse_rule(),
            fine: fine_rule(),
            coarse_steps: 1,
            fine_steps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sequential,
    Sync,
    Async,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sequential => "sequential",
            Mode::Sync => "sync",
            Mode::Async => "async",
        }
    }
}

/// Cost overrides in work units. Without them `C_F` and `C_G` are the step
/// counts of the propagators and `C̄ = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    #[serde(default)]
    pub c_f: Option<f64>,
    #[serde(default)]
    pub c_g: Option<f64>,
    #[serde(default)]
    pub c_bar: Option<f64>,
    /// Measured synchronous cost, used to fit `C̄` for every `p`.
    #[serde(default)]
    pub measured_sync_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub decomposition: DecompositionSpec,
    #[serde(default)]
    pub propagators: PropagatorSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub schedules: Vec<AsyncSchedule>,
    #[serde(default = "all_modes")]
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub cost: CostSpec,
    #[serde(default)]
    pub norm: NormKind,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| ExperimentError::Config {
                field: "<document>".into(),
                message: e.to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ExperimentError::config("<file>", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let ps = self.decomposition.p.values();
        if ps.is_empty() || ps.contains(&0) {
            return Err(ExperimentError::config(
                "decomposition.p",
                "every p must be at least 1",
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(ExperimentError::config("epsilon", "must be positive"));
        }
        if self.modes.is_empty() {
            return Err(ExperimentError::config(
                "modes",
                "at least one mode required",
            ));
        }
        if self.modes.contains(&Mode::Async) && self.schedules.is_empty() {
            return Err(ExperimentError::config(
                "schedules",
                "async mode needs at least one schedule",
            ));
        }
        if self.propagators.coarse_steps == 0 {
            return Err(ExperimentError::config(
                "propagators.coarse_steps",
                "must be at least 1",
            ));
        }
        let decomposition = self.decomposition_for(ps[0])?;
        if let Some(steps) = self.propagators.fine_steps {
            if steps != decomposition.fine_steps {
                return Err(ExperimentError::config(
                    "propagators.fine_steps",
                    format!(
                        "{steps} disagrees with coarse_dt / fine_dt = {}",
                        decomposition.fine_steps
                    ),
                ));
            }
        }
        self.problem.build(decomposition.t_end())?;
        Ok(())
    }

    pub fn decomposition_for(&self, p: usize) -> Result<TimeDecomposition, ExperimentError> {
        TimeDecomposition::uniform(p, self.decomposition.coarse_dt, self.decomposition.fine_dt)
            .map_err(|e| ExperimentError::config("decomposition", e.to_string()))
    }

    /// Schedule `i` with its seed replaced by `base + i`.
    pub fn override_seeds(&mut self, base: u64) {
        for (i, s) in self.schedules.iter_mut().enumerate() {
            s.seed = base.wrapping_add(i as u64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "problem": {"kind": "scalar-decay"},
        "decomposition": {"p": 4, "coarse_dt": 0.25, "fine_dt": 0.01},
        "schedules": [{"policy": "random-fair", "seed": 42, "delay_bound": 2}]
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.epsilon, 1e-6);
        assert_eq!(c.modes, vec![Mode::Sequential, Mode::Sync, Mode::Async]);
        assert_eq!(c.propagators.coarse, Rule::BackwardEuler);
        assert_eq!(c.norm, NormKind::Spectral);
        assert_eq!(c.decomposition_for(4).unwrap().fine_steps, 25);
    }

    #[test]
    fn errors_name_the_field() {
        let bad_eps = MINIMAL.replace("\"schedules\"", "\"epsilon\": 0.0, \"schedules\"");
        match ExperimentConfig::from_json(&bad_eps) {
            Err(ExperimentError::Config { field, .. }) => assert_eq!(field, "epsilon"),
            other => panic!("{other:?}"),
        }
        let typo = MINIMAL.replace("delay_bound", "delay");
        match ExperimentConfig::from_json(&typo) {
            Err(ExperimentError::Config { message, .. }) => {
                assert!(message.contains("delay_bound"))
            }
            other => panic!("{other:?}"),
        }
        let indivisible = MINIMAL.replace("0.01", "0.03");
        assert!(matches!(
            ExperimentConfig::from_json(&indivisible),
            Err(ExperimentError::Config { .. })
        ));
    }

    #[test]
    fn seed_override() {
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.schedules.push(c.schedules[0].clone());
        c.override_seeds(100);
        assert_eq!(c.schedules[0].seed, 100);
        assert_eq!(c.schedules[1].seed, 101);
    }

    #[test]
    fn p_list() {
        let multi = MINIMAL.replace("\"p\": 4", "\"p\": [2, 4, 8]");
        let c = ExperimentConfig::from_json(&multi).unwrap();
        assert_eq!(c.decomposition.p.values(), vec![2, 4, 8]);
    }
}
