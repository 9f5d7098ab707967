//! Principal component analysis of extreme functional data: polar
//! decomposition of curves, covariance operators of extreme angles,
//! finite-sample deviation bounds, simulation models with known limits and
//! regular-variation diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cov;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod polar;
pub mod sim;

pub use error::{FxError, Result};
pub use linalg::{rho_distance, symmetric_eigen, EigenSystem, Subspace, SymmetricOperator};
pub use polar::{polar_decompose, select_extremes, FunctionalSample, PolarSample};
