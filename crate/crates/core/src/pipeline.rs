//! End-to-end generation of a predictor for an unseen condition.
//!
//! * HPM samples every source model on one shared grid, builds a deformable
//!   model over the sampled shapes, learns conditions → deformable
//!   parameters and fits a fresh regressor to the generated shape.
//! * HPM2 lets every task have its own input range; shapes stack the inputs
//!   and outputs, and the generated shape is split back into both halves.
//! * HM is the coefficient baseline: conditions → source coefficients,
//!   which requires one common polynomial family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypermodel::{Condition, HyperModel, TargetKind, UnderdeterminedPolicy};
use crate::numeric::{linspace, Matrix};
use crate::regressors::{Regressor, RegressorFamily};
use crate::ssm::{self, ComponentSelection, DeformableModel, DeformableParams, Shape};

/// A trained source model together with its task description.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTask {
    pub id: String,
    pub regressor: Regressor,
    pub condition: Condition,
}

impl SourceTask {
    pub fn new(id: impl Into<String>, regressor: Regressor, condition: Condition) -> Self {
        SourceTask {
            id: id.into(),
            regressor,
            condition,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hpm,
    Hpm2,
    Hm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Hpm => "HPM",
            Method::Hpm2 => "HPM2",
            Method::Hm => "HM",
        })
    }
}

/// Settings shared by the shape-based methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeConfig {
    /// Landmarks (samples) per shape.
    pub landmarks: usize,
    pub selection: ComponentSelection,
    pub hyper_degree: usize,
    pub policy: UnderdeterminedPolicy,
    /// Family fitted to the generated shape.
    pub new_model_family: RegressorFamily,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        ShapeConfig {
            landmarks: 100,
            selection: ComponentSelection::VarianceFraction(0.95),
            hyper_degree: 3,
            policy: UnderdeterminedPolicy::Reject,
            new_model_family: RegressorFamily::Polynomial { degree: 7 },
        }
    }
}

/// Everything needed to re-run a generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Method,
    pub task_ids: Vec<String>,
    pub hyper_degree: usize,
    pub policy: UnderdeterminedPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<ComponentSelection>,
    /// Retained modes (shape methods) or the common source degree (HM).
    pub components_or_degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmarks: Option<usize>,
    /// Input range per task (one row for HPM, one per task for HPM2).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub input_ranges: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_model_family: Option<RegressorFamily>,
    pub hyper_r2_mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explained_variance: Option<f64>,
    /// `|bᵢ| > 3√λᵢ` per retained mode; never enforced.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plausibility_flags: Vec<bool>,
    /// HPM2 only: the generated inputs are not strictly increasing.
    #[serde(default)]
    pub non_monotone_inputs: bool,
    /// Parameters produced by the hyper-model (b or λ).
    pub generated_params: Vec<f64>,
}

/// A predictor produced for an unseen condition.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedModel {
    pub regressor: Regressor,
    pub condition: Condition,
    /// Inputs the final regressor was trained on (absent for HM).
    pub inputs: Option<Vec<f64>>,
    /// Generated shape (absent for HM).
    pub shape: Option<Shape>,
    pub provenance: Provenance,
}

fn check_tasks(tasks: &[SourceTask], target: &Condition) -> Result<()> {
    if tasks.len() < 2 {
        return Err(Error::invalid(format!(
            "at least 2 source tasks are required, got {}",
            tasks.len()
        )));
    }
    let dim = tasks[0].condition.dim();
    for t in tasks {
        t.regressor.validate()?;
        if t.condition.dim() != dim {
            return Err(Error::DimensionMismatch {
                what: "source condition dimension",
                expected: dim,
                found: t.condition.dim(),
            });
        }
    }
    if target.dim() != dim {
        return Err(Error::DimensionMismatch {
            what: "target condition dimension",
            expected: dim,
            found: target.dim(),
        });
    }
    Ok(())
}

/// Sampling grid for one input range. Source regressors are univariate, so
/// the range must have exactly one input feature.
pub fn generate_input(min: &[f64], max: &[f64], n: usize) -> Result<Vec<f64>> {
    if min.len() != max.len() {
        return Err(Error::DimensionMismatch {
            what: "input range bounds",
            expected: min.len(),
            found: max.len(),
        });
    }
    if min.len() != 1 {
        return Err(Error::invalid(format!(
            "source models take one input feature, range has {}",
            min.len()
        )));
    }
    linspace(min[0], max[0], n)
}

/// Trained state of HPM or HPM2: deformable model plus hyper-model.
#[derive(Debug, Clone)]
pub struct ShapeHyperModel {
    method: Method,
    config: ShapeConfig,
    /// Shared grid (HPM only).
    grid: Vec<f64>,
    input_ranges: Vec<(f64, f64)>,
    task_ids: Vec<String>,
    condition_dim: usize,
    deformable: DeformableModel,
    hyper: HyperModel,
}

impl ShapeHyperModel {
    /// HPM training: one grid for every task.
    pub fn train_hpm(tasks: &[SourceTask], min: &[f64], max: &[f64], config: ShapeConfig) -> Result<Self> {
        if tasks.len() < 2 {
            return Err(Error::invalid("at least 2 source tasks are required"));
        }
        let grid = generate_input(min, max, config.landmarks)?;
        let shapes = tasks
            .iter()
            .map(|t| t.regressor.predict(&grid).map(Shape))
            .collect::<Result<Vec<_>>>()?;
        Self::from_shapes(Method::Hpm, tasks, shapes, grid, vec![(min[0], max[0])], config)
    }

    /// HPM2 training: row `i` of `min`/`max` is the input range of task `i`.
    pub fn train_hpm2(tasks: &[SourceTask], min: &Matrix, max: &Matrix, config: ShapeConfig) -> Result<Self> {
        if tasks.len() < 2 {
            return Err(Error::invalid("at least 2 source tasks are required"));
        }
        for (what, m) in [("input minimum rows", min), ("input maximum rows", max)] {
            if m.rows() != tasks.len() {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: tasks.len(),
                    found: m.rows(),
                });
            }
        }
        let mut shapes = Vec::with_capacity(tasks.len());
        let mut ranges = Vec::with_capacity(tasks.len());
        for (i, t) in tasks.iter().enumerate() {
            let xi = generate_input(min.row(i), max.row(i), config.landmarks)?;
            let yi = t.regressor.predict(&xi)?;
            ranges.push((min.row(i)[0], max.row(i)[0]));
            let mut s = xi;
            s.extend(yi);
            shapes.push(Shape(s));
        }
        Self::from_shapes(Method::Hpm2, tasks, shapes, Vec::new(), ranges, config)
    }

    fn from_shapes(
        method: Method,
        tasks: &[SourceTask],
        shapes: Vec<Shape>,
        grid: Vec<f64>,
        input_ranges: Vec<(f64, f64)>,
        config: ShapeConfig,
    ) -> Result<Self> {
        check_tasks(tasks, &tasks[0].condition)?;
        let deformable = ssm::build(&shapes, config.selection)?;
        let params = shapes
            .iter()
            .map(|s| ssm::project(&deformable, s).map(|b| b.0))
            .collect::<Result<Vec<_>>>()?;
        let targets = Matrix::from_rows(&params)?;
        let conditions: Vec<Condition> = tasks.iter().map(|t| t.condition.clone()).collect();
        let hyper = HyperModel::train(
            &conditions,
            &targets,
            config.hyper_degree,
            TargetKind::DeformableParams,
            config.policy,
        )?;
        Ok(ShapeHyperModel {
            method,
            config,
            grid,
            input_ranges,
            task_ids: tasks.iter().map(|t| t.id.clone()).collect(),
            condition_dim: conditions[0].dim(),
            deformable,
            hyper,
        })
    }

    pub fn deformable(&self) -> &DeformableModel {
        &self.deformable
    }

    pub fn hyper(&self) -> &HyperModel {
        &self.hyper
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Generates the shape and the final regressor for `target`.
    pub fn generate(&self, target: &Condition) -> Result<GeneratedModel> {
        if target.dim() != self.condition_dim {
            return Err(Error::DimensionMismatch {
                what: "target condition dimension",
                expected: self.condition_dim,
                found: target.dim(),
            });
        }
        let b = DeformableParams(self.hyper.generate_params(target)?);
        let flags = ssm::plausibility_check(&self.deformable, &b);
        let shape = ssm::reconstruct(&self.deformable, &b)?;

        let (inputs, outputs, non_monotone) = match self.method {
            Method::Hpm2 => {
                let n = self.config.landmarks;
                let x = shape.as_slice()[..n].to_vec();
                let y = shape.as_slice()[n..].to_vec();
                let non_monotone = x.windows(2).any(|w| w[1] <= w[0]);
                (x, y, non_monotone)
            }
            _ => (self.grid.clone(), shape.0.clone(), false),
        };
        let regressor = Regressor::fit(self.config.new_model_family, &inputs, &outputs)?;

        Ok(GeneratedModel {
            regressor,
            condition: target.clone(),
            inputs: Some(inputs),
            shape: Some(shape),
            provenance: Provenance {
                method: self.method,
                task_ids: self.task_ids.clone(),
                hyper_degree: self.config.hyper_degree,
                policy: self.config.policy,
                selection: Some(self.config.selection),
                components_or_degree: self.deformable.components(),
                landmarks: Some(self.config.landmarks),
                input_ranges: self.input_ranges.clone(),
                new_model_family: Some(self.config.new_model_family),
                hyper_r2_mean: self.hyper.r2_mean(),
                explained_variance: Some(self.deformable.explained_variance()),
                plausibility_flags: flags,
                non_monotone_inputs: non_monotone,
                generated_params: b.0,
            },
        })
    }
}

/// Trained state of the coefficient baseline.
#[derive(Debug, Clone)]
pub struct CoefficientHyperModel {
    degree: usize,
    task_ids: Vec<String>,
    policy: UnderdeterminedPolicy,
    hyper: HyperModel,
}

impl CoefficientHyperModel {
    pub fn train(tasks: &[SourceTask], hyper_degree: usize, policy: UnderdeterminedPolicy) -> Result<Self> {
        let first = tasks
            .first()
            .ok_or_else(|| Error::invalid("at least 2 source tasks are required"))?;
        check_tasks(tasks, &first.condition)?;
        let family = first.regressor.family;
        let degree = match family {
            RegressorFamily::Polynomial { degree } => degree,
            other => {
                return Err(Error::HeterogeneousFamilies {
                    first: other.to_string(),
                    other: "polynomial".into(),
                })
            }
        };
        if let Some(t) = tasks.iter().find(|t| t.regressor.family != family) {
            return Err(Error::HeterogeneousFamilies {
                first: family.to_string(),
                other: t.regressor.family.to_string(),
            });
        }
        let rows: Vec<Vec<f64>> = tasks.iter().map(|t| t.regressor.coefficients.clone()).collect();
        let targets = Matrix::from_rows(&rows)?;
        let conditions: Vec<Condition> = tasks.iter().map(|t| t.condition.clone()).collect();
        let hyper = HyperModel::train(
            &conditions,
            &targets,
            hyper_degree,
            TargetKind::ModelCoefficients,
            policy,
        )?;
        Ok(CoefficientHyperModel {
            degree,
            task_ids: tasks.iter().map(|t| t.id.clone()).collect(),
            policy,
            hyper,
        })
    }

    pub fn hyper(&self) -> &HyperModel {
        &self.hyper
    }

    pub fn generate(&self, target: &Condition) -> Result<GeneratedModel> {
        let coefficients = self.hyper.generate_params(target)?;
        let regressor =
            Regressor::from_coefficients(RegressorFamily::Polynomial { degree: self.degree }, coefficients.clone())?;
        Ok(GeneratedModel {
            regressor,
            condition: target.clone(),
            inputs: None,
            shape: None,
            provenance: Provenance {
                method: Method::Hm,
                task_ids: self.task_ids.clone(),
                hyper_degree: self.hyper.degree(),
                policy: self.policy,
                selection: None,
                components_or_degree: self.degree,
                landmarks: None,
                input_ranges: Vec::new(),
                new_model_family: None,
                hyper_r2_mean: self.hyper.r2_mean(),
                explained_variance: None,
                plausibility_flags: Vec::new(),
                non_monotone_inputs: false,
                generated_params: coefficients,
            },
        })
    }
}

/// Hyper-process modelling on a grid shared by every source task.
pub fn hpm(
    tasks: &[SourceTask],
    target: &Condition,
    min: &[f64],
    max: &[f64],
    config: ShapeConfig,
) -> Result<GeneratedModel> {
    check_tasks(tasks, target)?;
    ShapeHyperModel::train_hpm(tasks, min, max, config)?.generate(target)
}

/// HPM with per-task input ranges; rows of `min`/`max` follow `tasks`.
pub fn hpm2(
    tasks: &[SourceTask],
    target: &Condition,
    min: &Matrix,
    max: &Matrix,
    config: ShapeConfig,
) -> Result<GeneratedModel> {
    check_tasks(tasks, target)?;
    ShapeHyperModel::train_hpm2(tasks, min, max, config)?.generate(target)
}

/// Coefficient-space baseline; every task must be a polynomial of one degree.
pub fn hm_baseline(
    tasks: &[SourceTask],
    target: &Condition,
    hyper_degree: usize,
    policy: UnderdeterminedPolicy,
) -> Result<GeneratedModel> {
    check_tasks(tasks, target)?;
    CoefficientHyperModel::train(tasks, hyper_degree, policy)?.generate(target)
}
