//! Beta-density benchmark: 25 source curves, 16 unseen curves, and the
//! HM / HPM sweeps over source degree (or retained modes) × hyper degree.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypermodel::{Condition, UnderdeterminedPolicy};
use crate::numeric::linspace;
use crate::pipeline::{CoefficientHyperModel, GeneratedModel, Method, ShapeConfig, ShapeHyperModel, SourceTask};
use crate::regressors::{beta_pdf, mse, Regressor, RegressorFamily};
use crate::ssm::ComponentSelection;

/// Scenario definition. `Default` is the published setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// α and β values crossed to form the source tasks.
    pub train_values: Vec<f64>,
    /// α and β values crossed to form the unseen tasks.
    pub test_values: Vec<f64>,
    pub grid_lo: f64,
    pub grid_hi: f64,
    /// Points the source models are trained on.
    pub train_points: usize,
    /// Points the generated curves are scored on.
    pub eval_points: usize,
    /// Landmarks per shape for HPM.
    pub landmarks: usize,
    /// Source degrees (HM) or retained modes (HPM).
    pub model_settings: Vec<usize>,
    pub hyper_degrees: Vec<usize>,
    /// Family fitted to each HPM generated shape.
    pub final_family: RegressorFamily,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            train_values: vec![0.5, 1.0, 5.0, 10.0, 15.0],
            test_values: vec![4.0, 6.0, 8.0, 12.0],
            grid_lo: 0.01,
            grid_hi: 0.99,
            train_points: 20,
            eval_points: 100,
            landmarks: 100,
            model_settings: vec![3, 4, 5, 6],
            hyper_degrees: vec![3, 4, 5, 6],
            final_family: RegressorFamily::Polynomial { degree: 7 },
        }
    }
}

fn cross(values: &[f64]) -> Vec<Condition> {
    values
        .iter()
        .flat_map(|&a| values.iter().map(move |&b| Condition::new([a, b])))
        .collect()
}

impl ScenarioSpec {
    pub fn train_params(&self) -> Vec<Condition> {
        cross(&self.train_values)
    }

    pub fn test_params(&self) -> Vec<Condition> {
        cross(&self.test_values)
    }

    pub fn train_grid(&self) -> Result<Vec<f64>> {
        linspace(self.grid_lo, self.grid_hi, self.train_points)
    }

    pub fn eval_grid(&self) -> Result<Vec<f64>> {
        linspace(self.grid_lo, self.grid_hi, self.eval_points)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grid_lo > 0.0 && self.grid_hi < 1.0 && self.grid_lo < self.grid_hi) {
            return Err(Error::invalid("benchmark grid must lie strictly inside (0, 1)"));
        }
        if self.train_values.iter().chain(&self.test_values).any(|&v| !(v > 0.0)) {
            return Err(Error::invalid("beta parameters must be positive"));
        }
        if self.train_values.is_empty() || self.test_values.is_empty() {
            return Err(Error::invalid("train and test parameter sets must be non-empty"));
        }
        if self.model_settings.is_empty() || self.hyper_degrees.is_empty() {
            return Err(Error::invalid("the sweep needs at least one setting per axis"));
        }
        self.train_grid()?;
        self.eval_grid()?;
        linspace(self.grid_lo, self.grid_hi, self.landmarks)?;
        Ok(())
    }
}

/// Family used for the HPM source model of `beta(α, β)`.
///
/// Both parameters above 1 give a bell curve (Gaussian). Both below 1 give a
/// U shape and both equal to 1 the flat density (polynomial). Everything else
/// is monotone on (0, 1) (exponential).
pub fn assign_family(alpha: f64, beta: f64) -> RegressorFamily {
    if alpha > 1.0 && beta > 1.0 {
        RegressorFamily::Gaussian
    } else if (alpha < 1.0 && beta < 1.0) || (alpha == 1.0 && beta == 1.0) {
        RegressorFamily::Polynomial { degree: 7 }
    } else {
        RegressorFamily::Exponential
    }
}

/// Aggregated result of one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    /// Source degree (HM) or retained modes (HPM).
    pub param1: usize,
    /// Hyper-model degree.
    pub param2: usize,
    pub mean_mse: f64,
    pub std_mse: f64,
    pub hyper_r2: f64,
}

/// One generated curve scored against the true density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub method: Method,
    pub param1: usize,
    pub param2: usize,
    pub alpha: f64,
    pub beta: f64,
    pub x: Vec<f64>,
    pub predicted: Vec<f64>,
    pub truth: Vec<f64>,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub rows: Vec<ResultRow>,
    pub curves: Vec<CurveRecord>,
}

fn source_task(c: &Condition, family: RegressorFamily, grid: &[f64]) -> Result<SourceTask> {
    let (a, b) = (c.0[0], c.0[1]);
    let y = beta_pdf(a, b, grid)?;
    let regressor = Regressor::fit(family, grid, &y)?;
    Ok(SourceTask::new(format!("beta({a},{b})"), regressor, c.clone()))
}

/// Source tasks for the HM sweep: one common polynomial degree.
pub fn hm_sources(spec: &ScenarioSpec, degree: usize) -> Result<Vec<SourceTask>> {
    let grid = spec.train_grid()?;
    spec.train_params()
        .iter()
        .map(|c| source_task(c, RegressorFamily::Polynomial { degree }, &grid))
        .collect()
}

/// Source tasks for the HPM sweep, each with its own family.
pub fn hpm_sources(spec: &ScenarioSpec) -> Result<Vec<SourceTask>> {
    let grid = spec.train_grid()?;
    spec.train_params()
        .iter()
        .map(|c| source_task(c, assign_family(c.0[0], c.0[1]), &grid))
        .collect()
}

fn score(
    method: Method,
    param1: usize,
    param2: usize,
    generated: &GeneratedModel,
    eval_grid: &[f64],
) -> Result<CurveRecord> {
    let (alpha, beta) = (generated.condition.0[0], generated.condition.0[1]);
    let predicted = generated.regressor.predict(eval_grid)?;
    let truth = beta_pdf(alpha, beta, eval_grid)?;
    let mse = mse(&predicted, &truth);
    Ok(CurveRecord {
        method,
        param1,
        param2,
        alpha,
        beta,
        x: eval_grid.to_vec(),
        predicted,
        truth,
        mse,
    })
}

fn aggregate(method: Method, param1: usize, param2: usize, curves: &[CurveRecord], hyper_r2: f64) -> ResultRow {
    let n = curves.len().max(1) as f64;
    let mean = curves.iter().map(|c| c.mse).sum::<f64>() / n;
    let var = curves.iter().map(|c| (c.mse - mean) * (c.mse - mean)).sum::<f64>() / n;
    ResultRow {
        method,
        param1,
        param2,
        mean_mse: mean,
        std_mse: var.sqrt(),
        hyper_r2,
    }
}

fn hpm_config(spec: &ScenarioSpec, components: usize, hyper_degree: usize) -> ShapeConfig {
    ShapeConfig {
        landmarks: spec.landmarks,
        selection: ComponentSelection::Count(components),
        hyper_degree,
        policy: UnderdeterminedPolicy::MinimumNorm,
        new_model_family: spec.final_family,
    }
}

fn hm_cell(spec: &ScenarioSpec, sources: &[SourceTask], degree: usize, hyper_degree: usize) -> Result<(ResultRow, Vec<CurveRecord>)> {
    let eval = spec.eval_grid()?;
    let model = CoefficientHyperModel::train(sources, hyper_degree, UnderdeterminedPolicy::MinimumNorm)?;
    let curves = spec
        .test_params()
        .iter()
        .map(|c| score(Method::Hm, degree, hyper_degree, &model.generate(c)?, &eval))
        .collect::<Result<Vec<_>>>()?;
    let row = aggregate(Method::Hm, degree, hyper_degree, &curves, model.hyper().r2_mean());
    Ok((row, curves))
}

fn hpm_cell(spec: &ScenarioSpec, sources: &[SourceTask], components: usize, hyper_degree: usize) -> Result<(ResultRow, Vec<CurveRecord>)> {
    let eval = spec.eval_grid()?;
    let model = ShapeHyperModel::train_hpm(
        sources,
        &[spec.grid_lo],
        &[spec.grid_hi],
        hpm_config(spec, components, hyper_degree),
    )?;
    let curves = spec
        .test_params()
        .iter()
        .map(|c| score(Method::Hpm, components, hyper_degree, &model.generate(c)?, &eval))
        .collect::<Result<Vec<_>>>()?;
    let row = aggregate(Method::Hpm, components, hyper_degree, &curves, model.hyper().r2_mean());
    Ok((row, curves))
}

/// Full HM sweep with per-curve records. Rows are ordered by hyper degree,
/// then source degree.
pub fn hm_report(spec: &ScenarioSpec) -> Result<GridReport> {
    spec.validate()?;
    let sources = spec
        .model_settings
        .iter()
        .map(|&d| hm_sources(spec, d))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for &hd in &spec.hyper_degrees {
        for (&d, src) in spec.model_settings.iter().zip(&sources) {
            let (row, mut c) = hm_cell(spec, src, d, hd)?;
            rows.push(row);
            curves.append(&mut c);
        }
    }
    Ok(GridReport { rows, curves })
}

/// Full HPM sweep with per-curve records. Rows are ordered by hyper degree,
/// then retained modes.
pub fn hpm_report(spec: &ScenarioSpec) -> Result<GridReport> {
    spec.validate()?;
    let sources = hpm_sources(spec)?;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for &hd in &spec.hyper_degrees {
        for &p in &spec.model_settings {
            let (row, mut c) = hpm_cell(spec, &sources, p, hd)?;
            rows.push(row);
            curves.append(&mut c);
        }
    }
    Ok(GridReport { rows, curves })
}

pub fn run_hm_grid(spec: &ScenarioSpec) -> Result<Vec<ResultRow>> {
    Ok(hm_report(spec)?.rows)
}

pub fn run_hpm_grid(spec: &ScenarioSpec) -> Result<Vec<ResultRow>> {
    Ok(hpm_report(spec)?.rows)
}

/// Curve data for one method, setting and condition.
pub fn curve_report(
    spec: &ScenarioSpec,
    method: Method,
    param1: usize,
    param2: usize,
    condition: &Condition,
) -> Result<CurveRecord> {
    spec.validate()?;
    if !spec.model_settings.contains(&param1) || !spec.hyper_degrees.contains(&param2) {
        return Err(Error::invalid(format!(
            "setting ({param1}, {param2}) is outside the benchmark sweep"
        )));
    }
    if condition.dim() != 2 {
        return Err(Error::DimensionMismatch {
            what: "beta condition",
            expected: 2,
            found: condition.dim(),
        });
    }
    let eval = spec.eval_grid()?;
    let generated = match method {
        Method::Hm => CoefficientHyperModel::train(&hm_sources(spec, param1)?, param2, UnderdeterminedPolicy::MinimumNorm)?
            .generate(condition)?,
        Method::Hpm => ShapeHyperModel::train_hpm(
            &hpm_sources(spec)?,
            &[spec.grid_lo],
            &[spec.grid_hi],
            hpm_config(spec, param1, param2),
        )?
        .generate(condition)?,
        Method::Hpm2 => return Err(Error::invalid("the benchmark covers HM and HPM only")),
    };
    score(method, param1, param2, &generated, &eval)
}

/// Settings where HPM exceeds `slack ×` the HM mean MSE.
pub fn dominance_violations(hm: &[ResultRow], hpm: &[ResultRow], slack: f64) -> Vec<(ResultRow, ResultRow)> {
    hpm.iter()
        .filter_map(|h| {
            hm.iter()
                .find(|m| m.param1 == h.param1 && m.param2 == h.param2)
                .filter(|m| h.mean_mse > m.mean_mse * slack)
                .map(|m| (m.clone(), h.clone()))
        })
        .collect()
}

pub const TABLE_HEADER: &str = "method,param1,param2,mean_mse,std_mse,hyper_r2";

/// Writes rows as CSV with a fixed column order.
pub fn write_table_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    writeln!(out, "{TABLE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method, r.param1, r.param2, r.mean_mse, r.std_mse, r.hyper_r2
        )?;
    }
    Ok(())
}

/// Writes one JSON object per curve record.
pub fn write_curves_jsonl<W: Write>(curves: &[CurveRecord], mut out: W) -> Result<()> {
    for c in curves {
        serde_json::to_writer(&mut out, c)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_rule_matches_examples() {
        assert_eq!(assign_family(5.0, 10.0), RegressorFamily::Gaussian);
        assert_eq!(assign_family(15.0, 5.0), RegressorFamily::Gaussian);
        assert_eq!(assign_family(0.5, 1.0), RegressorFamily::Exponential);
        assert_eq!(assign_family(5.0, 0.5), RegressorFamily::Exponential);
        assert_eq!(assign_family(1.0, 1.0), RegressorFamily::Polynomial { degree: 7 });
        assert_eq!(assign_family(0.5, 0.5), RegressorFamily::Polynomial { degree: 7 });
        assert_eq!(assign_family(1.0, 0.5), RegressorFamily::Exponential);
        assert_eq!(assign_family(1.0, 15.0), RegressorFamily::Exponential);
    }

    #[test]
    fn scenario_counts() {
        let s = ScenarioSpec::default();
        assert_eq!(s.train_params().len(), 25);
        assert_eq!(s.test_params().len(), 16);
        assert_eq!(s.train_grid().unwrap().len(), 20);
        assert_eq!(s.eval_grid().unwrap().len(), 100);
    }

    #[test]
    fn curve_report_rejects_outside_sweep() {
        let s = ScenarioSpec::default();
        let err = curve_report(&s, Method::Hm, 2, 3, &Condition::new([4.0, 6.0]));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        let err = curve_report(&s, Method::Hpm, 4, 7, &Condition::new([4.0, 6.0]));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn aggregation_uses_population_std() {
        let mk = |mse| CurveRecord {
            method: Method::Hm,
            param1: 3,
            param2: 3,
            alpha: 1.0,
            beta: 1.0,
            x: vec![],
            predicted: vec![],
            truth: vec![],
            mse,
        };
        let row = aggregate(Method::Hm, 3, 3, &[mk(1.0), mk(3.0)], 0.5);
        assert_eq!(row.mean_mse, 2.0);
        assert_eq!(row.std_mse, 1.0);
    }
}
