//! Glimm functionals, the L¹ stability functional in its step-function and
//! wave-measure forms, and an ε-approximate front-tracking engine for
//! strictly hyperbolic 1-D systems of conservation laws.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod acceptance;
pub mod calibration;
pub mod error;
pub mod flux_models;
pub mod front_tracking;
pub mod functionals;
pub mod linalg;
pub mod quadrature;
pub mod riemann;
pub mod sampling;
pub mod wave_measures;

pub use error::{Error, Result};
pub use flux_models::{builtin, check_hyperbolicity, EigenData, FieldKind, FluxModel, ModelId};
pub use functionals::{stability_phi, PiecewiseConstantFn, StabilityConstants, WaveList};
pub use linalg::{state, State};
pub use riemann::{riemann_fan, solve_shock_strengths, solve_strengths, Fan, FanWave, WaveKind, WaveStrengths};
