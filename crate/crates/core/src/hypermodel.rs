//! Hyper-models: one polynomial regression per output parameter, each
//! mapping the task condition vector to that single parameter.
//!
//! Monomial features are standardised (zero mean, unit population standard
//! deviation over the training conditions) and fitted together with a free
//! intercept. Rank-deficient designs resolve to the minimum-norm solution in
//! the standardised space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, lstsq, Matrix};

/// Task description vector, e.g. the `(α, β)` of a beta density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Condition(pub Vec<f64>);

impl Condition {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        Condition(values.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// What the hyper-model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    DeformableParams,
    ModelCoefficients,
}

/// What to do when there are fewer training conditions than features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnderdeterminedPolicy {
    #[default]
    Reject,
    MinimumNorm,
}

/// Identifier of the feature ordering written to model files.
pub const FEATURE_ORDERING: &str = "graded-lex";

/// Exponent tuples of every monomial in `dim` variables with total degree
/// `≤ degree`, graded by total degree and lexicographically descending
/// within a grade: `1, a, b, a², ab, b², …`.
pub fn monomial_exponents(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    fn fill(dim: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == dim {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=remaining).rev() {
            prefix.push(e);
            fill(dim, remaining - e, prefix, out);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    if dim == 0 {
        out.push(Vec::new());
        return out;
    }
    for total in 0..=degree as u32 {
        fill(dim, total, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

/// Number of monomials of total degree `≤ degree` in `dim` variables.
pub fn feature_count(dim: usize, degree: usize) -> usize {
    // C(dim + degree, degree)
    let mut c: usize = 1;
    for i in 1..=degree {
        c = c * (dim + i) / i;
    }
    c
}

/// Full polynomial basis of `condition` up to total degree `degree`.
pub fn expand_conditions(condition: &Condition, degree: usize) -> Vec<f64> {
    monomial_exponents(condition.dim(), degree)
        .iter()
        .map(|exps| {
            exps.iter()
                .zip(condition.as_slice())
                .map(|(&e, &v)| v.powi(e as i32))
                .product()
        })
        .collect()
}

/// Per-output polynomial map from conditions to a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperModel {
    pub(crate) degree: usize,
    pub(crate) condition_dim: usize,
    pub(crate) target_kind: TargetKind,
    pub(crate) feature_mean: Vec<f64>,
    pub(crate) feature_scale: Vec<f64>,
    pub(crate) per_output: Vec<Vec<f64>>,
    pub(crate) r2_per_output: Vec<f64>,
    pub(crate) r2_mean: f64,
}

/// R² below this total sum of squares is reported as 0.
const SST_FLOOR: f64 = 1e-12;

impl HyperModel {
    /// Fits one regression per target column.
    ///
    /// `targets` is `N × dim`, one row per condition.
    pub fn train(
        conditions: &[Condition],
        targets: &Matrix,
        degree: usize,
        target_kind: TargetKind,
        policy: UnderdeterminedPolicy,
    ) -> Result<Self> {
        let n = conditions.len();
        if n == 0 {
            return Err(Error::invalid("hyper-model needs at least one condition"));
        }
        if degree == 0 {
            return Err(Error::invalid("hyper-model degree must be at least 1"));
        }
        if targets.rows() != n {
            return Err(Error::DimensionMismatch {
                what: "hyper-model target rows",
                expected: n,
                found: targets.rows(),
            });
        }
        let cdim = conditions[0].dim();
        for c in conditions {
            if c.dim() != cdim {
                return Err(Error::DimensionMismatch {
                    what: "condition dimension",
                    expected: cdim,
                    found: c.dim(),
                });
            }
            if c.as_slice().iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("conditions must be finite"));
            }
        }
        let features = feature_count(cdim, degree);
        if n < features && policy == UnderdeterminedPolicy::Reject {
            return Err(Error::Underdetermined {
                degree,
                features,
                samples: n,
            });
        }

        let raw: Vec<Vec<f64>> = conditions.iter().map(|c| expand_conditions(c, degree)).collect();
        let mut feature_mean = vec![0.0; features];
        let mut feature_scale = vec![1.0; features];
        for j in 1..features {
            let mu = raw.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            let var = raw.iter().map(|r| (r[j] - mu) * (r[j] - mu)).sum::<f64>() / n as f64;
            feature_mean[j] = mu;
            if var > 0.0 {
                feature_scale[j] = var.sqrt();
            }
        }
        let mut design = Matrix::zeros(n, features - 1);
        for (i, r) in raw.iter().enumerate() {
            for j in 1..features {
                design[(i, j - 1)] = (r[j] - feature_mean[j]) / feature_scale[j];
            }
        }

        let mut per_output = Vec::with_capacity(targets.cols());
        let mut r2_per_output = Vec::with_capacity(targets.cols());
        for k in 0..targets.cols() {
            let y = targets.column(k);
            let y_mean = y.iter().sum::<f64>() / n as f64;
            let centred: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
            let mut coeffs = Vec::with_capacity(features);
            coeffs.push(y_mean);
            coeffs.extend(lstsq(&design, &centred)?);

            let sst: f64 = centred.iter().map(|v| v * v).sum();
            let sse: f64 = (0..n)
                .map(|i| {
                    let fitted = y_mean + dot(design.row(i), &coeffs[1..]);
                    (y[i] - fitted) * (y[i] - fitted)
                })
                .sum();
            r2_per_output.push(if sst < SST_FLOOR { 0.0 } else { 1.0 - sse / sst });
            per_output.push(coeffs);
        }
        let r2_mean = if r2_per_output.is_empty() {
            0.0
        } else {
            r2_per_output.iter().sum::<f64>() / r2_per_output.len() as f64
        };

        Ok(HyperModel {
            degree,
            condition_dim: cdim,
            target_kind,
            feature_mean,
            feature_scale,
            per_output,
            r2_per_output,
            r2_mean,
        })
    }

    /// Reassembles a stored hyper-model, checking shapes.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        degree: usize,
        condition_dim: usize,
        target_kind: TargetKind,
        feature_mean: Vec<f64>,
        feature_scale: Vec<f64>,
        per_output: Vec<Vec<f64>>,
        r2_per_output: Vec<f64>,
        r2_mean: f64,
    ) -> Result<Self> {
        let features = feature_count(condition_dim, degree);
        for (what, len) in [
            ("hyper-model feature means", feature_mean.len()),
            ("hyper-model feature scales", feature_scale.len()),
        ] {
            if len != features {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: features,
                    found: len,
                });
            }
        }
        for c in &per_output {
            if c.len() != features {
                return Err(Error::DimensionMismatch {
                    what: "hyper-model coefficients",
                    expected: features,
                    found: c.len(),
                });
            }
        }
        if r2_per_output.len() != per_output.len() {
            return Err(Error::DimensionMismatch {
                what: "hyper-model R² entries",
                expected: per_output.len(),
                found: r2_per_output.len(),
            });
        }
        if feature_scale.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("feature scales must be positive"));
        }
        Ok(HyperModel {
            degree,
            condition_dim,
            target_kind,
            feature_mean,
            feature_scale,
            per_output,
            r2_per_output,
            r2_mean,
        })
    }

    /// Predicted parameter vector at `condition`.
    pub fn generate_params(&self, condition: &Condition) -> Result<Vec<f64>> {
        if condition.dim() != self.condition_dim {
            return Err(Error::DimensionMismatch {
                what: "condition dimension",
                expected: self.condition_dim,
                found: condition.dim(),
            });
        }
        if condition.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("condition must be finite"));
        }
        let z: Vec<f64> = expand_conditions(condition, self.degree)
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 { 1.0 } else { (v - self.feature_mean[j]) / self.feature_scale[j] })
            .collect();
        Ok(self.per_output.iter().map(|c| dot(c, &z)).collect())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn condition_dim(&self) -> usize {
        self.condition_dim
    }

    pub fn target_kind(&self) -> TargetKind {
        self.target_kind
    }

    pub fn output_dim(&self) -> usize {
        self.per_output.len()
    }

    pub fn feature_mean(&self) -> &[f64] {
        &self.feature_mean
    }

    pub fn feature_scale(&self) -> &[f64] {
        &self.feature_scale
    }

    /// Coefficients per output: intercept first, then one weight per
    /// standardised monomial in [`monomial_exponents`] order.
    pub fn per_output(&self) -> &[Vec<f64>] {
        &self.per_output
    }

    pub fn r2_per_output(&self) -> &[f64] {
        &self.r2_per_output
    }

    pub fn r2_mean(&self) -> f64 {
        self.r2_mean
    }
}

/// Free-function form of [`HyperModel::train`].
pub fn train(
    conditions: &[Condition],
    targets: &Matrix,
    degree: usize,
    target_kind: TargetKind,
    policy: UnderdeterminedPolicy,
) -> Result<HyperModel> {
    HyperModel::train(conditions, targets, degree, target_kind, policy)
}
