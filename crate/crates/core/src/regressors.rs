//! Source-model families: polynomial, exponential and Gaussian curve fits,
//! plus the beta density used to generate the benchmark curves.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{gauss_newton, lstsq, vandermonde, GaussNewtonOptions, Matrix};

/// Functional form of a regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum RegressorFamily {
    /// `Σ λᵢ xⁱ` for `i = 0..=degree`.
    Polynomial { degree: usize },
    /// `a·exp(b·x) + c`.
    Exponential,
    /// `a·exp(−(x − m)² / (2s²))`.
    Gaussian,
}

impl RegressorFamily {
    /// Number of coefficients a fitted member carries.
    pub fn arity(&self) -> usize {
        match self {
            RegressorFamily::Polynomial { degree } => degree + 1,
            RegressorFamily::Exponential | RegressorFamily::Gaussian => 3,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            RegressorFamily::Polynomial { .. } => "polynomial",
            RegressorFamily::Exponential => "exponential",
            RegressorFamily::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for RegressorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegressorFamily::Polynomial { degree } => write!(f, "polynomial({degree})"),
            other => f.write_str(other.tag()),
        }
    }
}

/// A fitted univariate regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regressor {
    #[serde(flatten)]
    pub family: RegressorFamily,
    pub coefficients: Vec<f64>,
    pub train_mse: f64,
    pub converged: bool,
}

impl Regressor {
    /// Wraps known coefficients, checking them against the family arity.
    pub fn from_coefficients(family: RegressorFamily, coefficients: Vec<f64>) -> Result<Self> {
        let r = Regressor {
            family,
            coefficients,
            train_mse: 0.0,
            converged: true,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.len() != self.family.arity() {
            return Err(Error::DimensionMismatch {
                what: "regressor coefficients",
                expected: self.family.arity(),
                found: self.coefficients.len(),
            });
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("regressor coefficients must be finite"));
        }
        if !(self.train_mse >= 0.0) {
            return Err(Error::invalid("train_mse must be non-negative"));
        }
        Ok(())
    }

    /// Least-squares fit of `family` to the pairs `(x, y)`.
    ///
    /// Nonlinear families that fail to converge still return their best
    /// parameters, with `converged == false`.
    pub fn fit(family: RegressorFamily, x: &[f64], y: &[f64]) -> Result<Self> {
        check_training_data(family, x, y)?;
        let (coefficients, converged) = match family {
            RegressorFamily::Polynomial { degree } => (lstsq(&vandermonde(x, degree), y)?, true),
            RegressorFamily::Exponential => fit_exponential(x, y)?,
            RegressorFamily::Gaussian => fit_gaussian(x, y)?,
        };
        let mut r = Regressor {
            family,
            coefficients,
            train_mse: 0.0,
            converged,
        };
        r.train_mse = mse(&r.predict(x)?, y);
        r.validate()?;
        Ok(r)
    }

    /// Value at a single input.
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        match self.family {
            RegressorFamily::Polynomial { .. } => c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci),
            RegressorFamily::Exponential => c[0] * (c[1] * x).exp() + c[2],
            RegressorFamily::Gaussian => {
                let d = x - c[1];
                c[0] * (-(d * d) / (2.0 * c[2] * c[2])).exp()
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("prediction inputs must be finite"));
        }
        Ok(x.iter().map(|&v| self.eval(v)).collect())
    }
}

/// Free-function form of [`Regressor::fit`].
pub fn fit(family: RegressorFamily, x: &[f64], y: &[f64]) -> Result<Regressor> {
    Regressor::fit(family, x, y)
}

/// Free-function form of [`Regressor::predict`].
pub fn predict(r: &Regressor, x: &[f64]) -> Result<Vec<f64>> {
    r.predict(x)
}

pub(crate) fn mse(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(1) as f64;
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / n
}

fn check_training_data(family: RegressorFamily, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "training pairs",
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < family.arity() {
        return Err(Error::invalid(format!(
            "{family} needs at least {} points, got {}",
            family.arity(),
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("training data must be finite"));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("training inputs must be distinct"));
    }
    Ok(())
}

fn nonlinear_options() -> GaussNewtonOptions {
    GaussNewtonOptions {
        max_iter: 500,
        tol: 1e-12,
    }
}

/// Rate grid (in units of 1/span(x)) scanned for the exponential start point.
const EXP_RATE_SCAN: f64 = 40.0;
const EXP_RATE_STEPS: usize = 80;

fn fit_exponential(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, bool)> {
    let x0 = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let x1 = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = x1 - x0;

    // For a fixed rate b the model is linear in (a, c), so scan b and keep
    // the best linear solve as the starting point.
    let mut best: Option<(f64, [f64; 3])> = None;
    for k in -(EXP_RATE_STEPS as i64)..=(EXP_RATE_STEPS as i64) {
        if k == 0 {
            continue;
        }
        let rate = EXP_RATE_SCAN * k as f64 / (EXP_RATE_STEPS as f64 * span);
        let basis: Vec<f64> = x.iter().map(|&xi| (rate * (xi - x0)).exp()).collect();
        let design = Matrix::from_columns(&[basis.clone(), vec![1.0; x.len()]])?;
        let ac = lstsq(&design, y)?;
        let sse: f64 = basis
            .iter()
            .zip(y)
            .map(|(e, yi)| {
                let r = ac[0] * e + ac[1] - yi;
                r * r
            })
            .sum();
        let a = ac[0] * (-rate * x0).exp();
        let candidate = [a, rate, ac[1]];
        if candidate.iter().all(|v| v.is_finite()) && best.is_none_or(|(s, _)| sse < s) {
            best = Some((sse, candidate));
        }
    }
    let init = best
        .map(|(_, p)| p.to_vec())
        .ok_or_else(|| Error::Numerical("no finite exponential start point".into()))?;

    let res = gauss_newton(
        |p| x.iter().zip(y).map(|(&xi, yi)| p[0] * (p[1] * xi).exp() + p[2] - yi).collect(),
        |p| {
            let mut j = Matrix::zeros(x.len(), 3);
            for (i, &xi) in x.iter().enumerate() {
                let e = (p[1] * xi).exp();
                j[(i, 0)] = e;
                j[(i, 1)] = p[0] * xi * e;
                j[(i, 2)] = 1.0;
            }
            j
        },
        &init,
        nonlinear_options(),
    )?;
    Ok((res.params, res.converged))
}

fn fit_gaussian(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, bool)> {
    let (peak_idx, peak) = y
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let init = [peak, x[peak_idx], 0.25 * (hi - lo)];

    let res = gauss_newton(
        |p| {
            x.iter()
                .zip(y)
                .map(|(&xi, yi)| {
                    let d = xi - p[1];
                    p[0] * (-(d * d) / (2.0 * p[2] * p[2])).exp() - yi
                })
                .collect()
        },
        |p| {
            let mut j = Matrix::zeros(x.len(), 3);
            let s2 = p[2] * p[2];
            for (i, &xi) in x.iter().enumerate() {
                let d = xi - p[1];
                let e = (-(d * d) / (2.0 * s2)).exp();
                j[(i, 0)] = e;
                j[(i, 1)] = p[0] * e * d / s2;
                j[(i, 2)] = p[0] * e * d * d / (s2 * p[2]);
            }
            j
        },
        &init,
        nonlinear_options(),
    )?;
    let mut params = res.params;
    // only s² enters the model
    params[2] = params[2].abs();
    Ok((params, res.converged))
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments (Lanczos, g = 7).
pub fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        // reflection: Γ(z)Γ(1−z) = π / sin(πz)
        return (PI / (PI * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// `ln B(α, β)`.
pub fn ln_beta(alpha: f64, beta: f64) -> f64 {
    ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta)
}

/// Beta density `x^(α−1)·(1−x)^(β−1) / B(α, β)` at each `x` in `(0, 1)`.
pub fn beta_pdf(alpha: f64, beta: f64, x: &[f64]) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::invalid(format!(
            "beta parameters must be positive, got ({alpha}, {beta})"
        )));
    }
    if let Some(bad) = x.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::invalid(format!(
            "beta density is evaluated strictly inside (0, 1), got {bad}"
        )));
    }
    let log_norm = ln_beta(alpha, beta);
    Ok(x
        .iter()
        .map(|&v| ((alpha - 1.0) * v.ln() + (beta - 1.0) * (-v).ln_1p() - log_norm).exp())
        .collect())
}
