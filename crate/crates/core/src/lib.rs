//! Zero-shot regression by hyper-process modelling.
//!
//! Source regressors are sampled on a common grid, the samples are treated
//! as shapes of a statistical shape model, and a hyper-model learns how task
//! conditions move a shape through its deformation modes. A new condition
//! then yields a new shape, and a regressor fitted to it predicts the unseen
//! task. The coefficient-space hyper-model baseline and the beta-density
//! benchmark live alongside.

pub mod benchmark;
pub mod error;
pub mod hypermodel;
pub mod numeric;
pub mod persistence;
pub mod pipeline;
pub mod regressors;
pub mod ssm;

pub use error::{Error, Result};
pub use hypermodel::{Condition, HyperModel, TargetKind, UnderdeterminedPolicy};
pub use numeric::Matrix;
pub use pipeline::{GeneratedModel, Method, ShapeConfig, SourceTask};
pub use regressors::{Regressor, RegressorFamily};
pub use ssm::{ComponentSelection, DeformableModel, DeformableParams, Shape};
