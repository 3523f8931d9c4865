//! Statistical shape model over landmark vectors.
//!
//! Shapes share a sampling grid, so landmarks correspond by construction and
//! no alignment step is performed. The covariance uses the `1/N`
//! normalisation; when there are fewer shapes than landmarks (the usual case)
//! the eigenproblem is solved on the `N×N` Gram matrix and mapped back.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, norm, sym_eig, Matrix};

/// Landmark vector sampled from one source model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Shape(pub Vec<f64>);

impl Shape {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Shape {
    fn from(v: Vec<f64>) -> Self {
        Shape(v)
    }
}

/// Coordinates of a shape in the deformation basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeformableParams(pub Vec<f64>);

impl DeformableParams {
    pub fn zeros(p: usize) -> Self {
        DeformableParams(vec![0.0; p])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// How many deformation modes to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentSelection {
    /// Exactly this many modes.
    Count(usize),
    /// Fewest modes whose cumulative eigenvalue share reaches the fraction.
    VarianceFraction(f64),
}

/// Mean shape plus an orthonormal basis of deformation modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformableModel {
    mean: Vec<f64>,
    /// `kn × p`, orthonormal columns.
    basis: Matrix,
    /// Descending, non-negative, length `p`.
    eigenvalues: Vec<f64>,
    /// Sum of every eigenvalue before truncation.
    total_variance: f64,
}

/// Relative tolerance under which negative eigenvalues count as roundoff.
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;
/// Length of `D·q`, relative to `√(N·trace)`, below which a mode is empty.
const NULL_MODE_TOL: f64 = 1e-10;

impl DeformableModel {
    /// Assembles a model from stored parts, checking its invariants.
    pub fn from_parts(
        mean: Vec<f64>,
        basis: Matrix,
        eigenvalues: Vec<f64>,
        total_variance: f64,
    ) -> Result<Self> {
        if basis.rows() != mean.len() {
            return Err(Error::DimensionMismatch {
                what: "deformation basis rows",
                expected: mean.len(),
                found: basis.rows(),
            });
        }
        if basis.cols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                what: "deformation eigenvalues",
                expected: basis.cols(),
                found: eigenvalues.len(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) || eigenvalues.iter().any(|&l| l < 0.0) {
            return Err(Error::invalid("eigenvalues must be non-negative and descending"));
        }
        if !basis.is_finite() || mean.iter().chain(&eigenvalues).any(|v| !v.is_finite()) {
            return Err(Error::invalid("deformable model contains non-finite values"));
        }
        Ok(DeformableModel {
            mean,
            basis,
            eigenvalues,
            total_variance,
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn landmark_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn components(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Share of the total variance carried by the retained modes.
    pub fn explained_variance(&self) -> f64 {
        if self.total_variance > 0.0 {
            self.eigenvalues.iter().sum::<f64>() / self.total_variance
        } else {
            1.0
        }
    }

    /// Builds the model from training shapes.
    pub fn build(shapes: &[Shape], retained: ComponentSelection) -> Result<Self> {
        build(shapes, retained)
    }

    pub fn project(&self, s: &Shape) -> Result<DeformableParams> {
        project(self, s)
    }

    pub fn reconstruct(&self, b: &DeformableParams) -> Result<Shape> {
        reconstruct(self, b)
    }
}

/// Mean shape of a set of equally long shapes.
pub fn mean_shape(shapes: &[Shape]) -> Result<Vec<f64>> {
    let first = shapes
        .first()
        .ok_or_else(|| Error::invalid("no shapes given"))?;
    let dim = first.len();
    let mut mean = vec![0.0; dim];
    for s in shapes {
        if s.len() != dim {
            return Err(Error::DimensionMismatch {
                what: "shape length",
                expected: dim,
                found: s.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(s.as_slice()) {
            *m += v;
        }
    }
    let n = shapes.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// Builds a deformable model with the small-sample Gram trick.
pub fn build(shapes: &[Shape], retained: ComponentSelection) -> Result<DeformableModel> {
    if shapes.len() < 2 {
        return Err(Error::invalid(format!(
            "a deformable model needs at least 2 shapes, got {}",
            shapes.len()
        )));
    }
    let mean = mean_shape(shapes)?;
    if shapes.iter().flat_map(|s| s.as_slice()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("shapes contain non-finite landmarks"));
    }
    let n_shapes = shapes.len();
    let dim = mean.len();
    // An orthonormal basis cannot have more columns than landmarks.
    let max_components = (n_shapes - 1).min(dim);

    if let ComponentSelection::Count(p) = retained {
        if p == 0 || p > max_components {
            return Err(Error::invalid(format!(
                "requested {p} components, valid range is 1..={max_components} for {n_shapes} shapes of {dim} landmarks"
            )));
        }
    }
    if let ComponentSelection::VarianceFraction(f) = retained {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::invalid(format!("variance fraction must lie in (0, 1], got {f}")));
        }
    }

    // D has one deviation column per shape.
    let deviations: Vec<Vec<f64>> = shapes
        .iter()
        .map(|s| s.as_slice().iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let scale = 1.0 / n_shapes as f64;
    let mut gram = Matrix::zeros(n_shapes, n_shapes);
    for i in 0..n_shapes {
        for j in i..n_shapes {
            let g = scale * dot(&deviations[i], &deviations[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let eig = sym_eig(&gram)?;
    let total_variance: f64 = (0..n_shapes).map(|i| gram[(i, i)]).sum();

    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut values = Vec::with_capacity(n_shapes);
    for &v in &eig.values {
        if v >= 0.0 {
            values.push(v);
        } else if v >= -NEGATIVE_EIGEN_TOL * lambda_max.max(f64::MIN_POSITIVE) {
            values.push(0.0);
        } else {
            return Err(Error::Numerical(format!(
                "covariance eigenvalue {v} is negative beyond roundoff"
            )));
        }
    }

    let p = match retained {
        ComponentSelection::Count(p) => p,
        ComponentSelection::VarianceFraction(f) => {
            if total_variance > 0.0 {
                let mut acc = 0.0;
                let mut p = max_components;
                for (k, v) in values.iter().take(max_components).enumerate() {
                    acc += v;
                    if acc / total_variance >= f - 1e-12 {
                        p = k + 1;
                        break;
                    }
                }
                p
            } else {
                1
            }
        }
    };

    // Map Gram eigenvectors back: φ_k = D·q_k / ‖D·q_k‖, largest-magnitude
    // entry positive. D·q_k is re-orthogonalised against the earlier modes,
    // since Jacobi leaks roundoff from large modes into tiny ones. A mode
    // whose remainder is at roundoff level carries no variance and gets an
    // orthonormal completion instead.
    let null_len = NULL_MODE_TOL * (total_variance * n_shapes as f64).sqrt();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut eigenvalues = Vec::with_capacity(p);
    for k in 0..p {
        let q = eig.vectors.column(k);
        let mut phi = vec![0.0; dim];
        for (dev, &qi) in deviations.iter().zip(&q) {
            for (f, d) in phi.iter_mut().zip(dev) {
                *f += d * qi;
            }
        }
        for _ in 0..2 {
            for other in columns.iter().filter(|c| !c.is_empty()) {
                let d = dot(&phi, other);
                phi.iter_mut().zip(other).for_each(|(a, b)| *a -= d * b);
            }
        }
        let len = norm(&phi);
        if values[k] > 0.0 && len > null_len {
            let pivot = phi.iter().fold(0.0_f64, |m, &f| if f.abs() > m.abs() { f } else { m });
            let scale = if pivot < 0.0 { -1.0 / len } else { 1.0 / len };
            phi.iter_mut().for_each(|f| *f *= scale);
            columns.push(phi);
            eigenvalues.push(values[k]);
        } else {
            columns.push(Vec::new());
            eigenvalues.push(0.0);
        }
    }
    complete_basis(&mut columns, dim)?;

    let basis = Matrix::from_columns(&columns)?;
    DeformableModel::from_parts(mean, basis, eigenvalues, total_variance)
}

/// Fills empty columns with unit vectors orthogonal to everything else,
/// drawn deterministically from the canonical basis by Gram-Schmidt.
fn complete_basis(columns: &mut [Vec<f64>], dim: usize) -> Result<()> {
    let mut candidate = 0;
    for k in 0..columns.len() {
        if !columns[k].is_empty() {
            continue;
        }
        loop {
            if candidate >= dim {
                return Err(Error::invalid(format!(
                    "cannot complete {} orthonormal modes in dimension {dim}",
                    columns.len()
                )));
            }
            let mut v = vec![0.0; dim];
            v[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for other in columns.iter().filter(|c| !c.is_empty()) {
                    let d = dot(&v, other);
                    v.iter_mut().zip(other).for_each(|(a, b)| *a -= d * b);
                }
            }
            let len = norm(&v);
            if len > 1e-8 {
                v.iter_mut().for_each(|a| *a /= len);
                columns[k] = v;
                break;
            }
        }
    }
    Ok(())
}

/// `b = φᵀ(s − x̄)`.
pub fn project(m: &DeformableModel, s: &Shape) -> Result<DeformableParams> {
    if s.len() != m.landmark_dim() {
        return Err(Error::DimensionMismatch {
            what: "shape length",
            expected: m.landmark_dim(),
            found: s.len(),
        });
    }
    let centred: Vec<f64> = s.as_slice().iter().zip(&m.mean).map(|(v, mu)| v - mu).collect();
    Ok(DeformableParams(m.basis.tr_matvec(&centred)?))
}

/// `x' = x̄ + φ·b`.
pub fn reconstruct(m: &DeformableModel, b: &DeformableParams) -> Result<Shape> {
    if b.0.len() != m.components() {
        return Err(Error::DimensionMismatch {
            what: "deformable parameters",
            expected: m.components(),
            found: b.0.len(),
        });
    }
    let offset = m.basis.matvec(&b.0)?;
    Ok(Shape(m.mean.iter().zip(offset).map(|(mu, d)| mu + d).collect()))
}

/// Per-mode flag, set where `|bᵢ| > 3·√λᵢ`. Informational only.
pub fn plausibility_check(m: &DeformableModel, b: &DeformableParams) -> Vec<bool> {
    m.eigenvalues
        .iter()
        .zip(&b.0)
        .map(|(l, bi)| bi.abs() > 3.0 * l.sqrt())
        .collect()
}

/// Mean squared reconstruction error `(1/N)·Σᵢ‖xᵢ − x̂ᵢ‖²` over `shapes`.
pub fn reconstruction_error(m: &DeformableModel, shapes: &[Shape]) -> Result<f64> {
    let mut total = 0.0;
    for s in shapes {
        let r = reconstruct(m, &project(m, s)?)?;
        total += s
            .as_slice()
            .iter()
            .zip(r.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total / shapes.len().max(1) as f64)
}
