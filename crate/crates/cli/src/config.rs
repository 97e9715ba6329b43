//! Scenario files.

use std::path::{Path, PathBuf};

use hypstab_core::acceptance::AcceptanceConfig;
use hypstab_core::sampling::{random_bv, random_step, random_step_pair, rng, StepSpec};
use hypstab_core::wave_measures::BVFunction;
use hypstab_core::{builtin, FluxModel, ModelId, PiecewiseConstantFn, StabilityConstants};
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Functionals,
    PhiPair,
    Evolve,
    ApproxStudy,
    Calibrate,
    Acceptance,
}

/// Initial data given inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inline {
    Step(PiecewiseConstantFn),
    Bv(BVFunction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Step,
    StepPair,
    Bv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub spec: StepSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub u: Option<Inline>,
    #[serde(default)]
    pub u_tilde: Option<Inline>,
    #[serde(default)]
    pub generator: Option<Generator>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub seed: u64,
}

fn default_samples() -> usize {
    1000
}

fn default_t_final() -> f64 {
    1.0
}

fn default_sample_times() -> usize {
    21
}

fn default_nu() -> Vec<usize> {
    vec![10, 20, 40, 80]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub task: Task,
    #[serde(default = "default_model")]
    pub model: ModelId,
    /// Normalization constants `k_j`, one per family.
    #[serde(default)]
    pub k: Option<Vec<f64>>,
    #[serde(default)]
    pub constants: Option<StabilityConstants>,
    #[serde(default)]
    pub data: Option<DataSpec>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Number of equally spaced sample times in `[0, T]`.
    #[serde(default = "default_sample_times")]
    pub sample_times: usize,
    #[serde(default = "default_nu")]
    pub nu: Vec<usize>,
    /// Cap on collision events per trajectory.
    #[serde(default)]
    pub max_events: Option<usize>,
    #[serde(default)]
    pub calibration: Option<CalibrationSpec>,
    #[serde(default)]
    pub acceptance: Option<AcceptanceConfig>,
    /// Output directory relative to the run's output root.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_model() -> ModelId {
    ModelId::Burgers
}

/// A config file holds one scenario or a batch.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    Batch { scenarios: Vec<Scenario> },
    Single(Box<Scenario>),
}

pub fn load(path: &Path) -> Result<Vec<Scenario>, RunError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ConfigFile =
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    let scenarios = match parsed {
        ConfigFile::Batch { scenarios } => scenarios,
        ConfigFile::Single(s) => vec![*s],
    };
    if scenarios.is_empty() {
        return Err(RunError::Config("the batch has no scenarios".into()));
    }
    for s in &scenarios {
        s.validate()?;
    }
    Ok(scenarios)
}

/// Prepared initial data.
pub enum Data {
    Step(PiecewiseConstantFn),
    Bv(BVFunction),
}

impl Data {
    pub fn as_bv(&self) -> BVFunction {
        match self {
            Data::Step(u) => BVFunction::from_pcf(u),
            Data::Bv(u) => u.clone(),
        }
    }

    pub fn as_step(&self) -> Result<&PiecewiseConstantFn, RunError> {
        match self {
            Data::Step(u) => Ok(u),
            Data::Bv(_) => Err(RunError::Config("this task needs piecewise constant data".into())),
        }
    }
}

impl Scenario {
    pub fn label(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("scenario_{index}"))
    }

    fn validate(&self) -> Result<(), RunError> {
        if let Some(c) = &self.constants {
            c.validate().map_err(|e| RunError::Config(e.to_string()))?;
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(RunError::Config("every eps must be positive".into()));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(RunError::Config("t_final must be finite and nonnegative".into()));
        }
        if self.nu.contains(&0) {
            return Err(RunError::Config("every nu must be positive".into()));
        }
        let needs_data = matches!(
            self.task,
            Task::Functionals | Task::PhiPair | Task::Evolve | Task::ApproxStudy
        );
        if needs_data && self.data.is_none() {
            return Err(RunError::Config(format!(
                "task {:?} needs a \"data\" section",
                self.task
            )));
        }
        if self.task == Task::Evolve && self.eps.is_empty() {
            return Err(RunError::Config("task evolve needs at least one eps".into()));
        }
        if self.task == Task::Calibrate && self.calibration.is_none() {
            return Err(RunError::Config(
                "task calibrate needs a \"calibration\" section with a seed".into(),
            ));
        }
        if let Some(d) = &self.data {
            match (&d.u, &d.generator) {
                (Some(_), Some(_)) => {
                    return Err(RunError::Config(
                        "give either inline data or a generator, not both".into(),
                    ))
                }
                (None, None) => return Err(RunError::Config("data needs \"u\" or a \"generator\"".into())),
                (None, Some(_)) if d.u_tilde.is_some() => {
                    return Err(RunError::Config(
                        "\"u_tilde\" cannot be combined with a generator".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<FluxModel, RunError> {
        let m = builtin(&self.model).map_err(|e| RunError::Config(e.to_string()))?;
        match &self.k {
            Some(k) => m.with_k(k.clone()).map_err(|e| RunError::Config(e.to_string())),
            None => Ok(m),
        }
    }

    pub fn consts(&self) -> StabilityConstants {
        self.constants.unwrap_or_default()
    }

    /// The data `(u, ũ)`, with `--seed` replacing the generator seed.
    pub fn data(&self, model: &FluxModel, seed: Option<u64>) -> Result<(Data, Option<Data>), RunError> {
        let d = self
            .data
            .as_ref()
            .ok_or_else(|| RunError::Config("missing \"data\" section".into()))?;
        let inline = |i: &Inline| -> Result<Data, RunError> {
            let data = match i {
                Inline::Step(u) => Data::Step(u.clone()),
                Inline::Bv(u) => Data::Bv(u.clone()),
            };
            let bv = data.as_bv();
            if bv.dim() != model.dim() {
                return Err(RunError::Config(format!(
                    "data has dimension {} but the model has {}",
                    bv.dim(),
                    model.dim()
                )));
            }
            let r = model.domain_radius();
            for p in bv.pieces() {
                if p.at(p.a).norm() > r || p.at(p.b).norm() > r {
                    return Err(RunError::Config(format!(
                        "data leave the state domain of radius {r} on [{}, {})",
                        p.a, p.b
                    )));
                }
            }
            Ok(data)
        };
        if let Some(g) = &d.generator {
            let mut r = rng(seed.unwrap_or(g.seed));
            let c0 = self.consts().c0;
            let err = |e: hypstab_core::Error| RunError::Config(format!("generator: {e}"));
            return Ok(match g.kind {
                GeneratorKind::Step => (Data::Step(random_step(model, &mut r, &g.spec, c0).map_err(err)?), None),
                GeneratorKind::StepPair => {
                    let (v, vt) = random_step_pair(model, &mut r, &g.spec, c0).map_err(err)?;
                    (Data::Step(v), Some(Data::Step(vt)))
                }
                GeneratorKind::Bv => (
                    Data::Bv(random_bv(model, &mut r, &g.spec, &self.consts()).map_err(err)?),
                    None,
                ),
            });
        }
        let u = inline(d.u.as_ref().expect("validated"))?;
        let ut = d.u_tilde.as_ref().map(inline).transpose()?;
        Ok((u, ut))
    }
}
