//! Stochastic master equation simulation for two qubits under continuous
//! collective measurement, with Lyapunov-based feedback towards a Bell state.
//!
//! The crate is organised bottom-up: [`linalg4`] provides fixed-size 4x4
//! complex arithmetic, [`model`] the measurement and Hamiltonian operators,
//! [`control`] the feedback laws, [`sde`] the integrators, [`metrics`] the
//! scalar diagnostics and [`ensemble`] the Monte Carlo driver. [`scenario`]
//! holds the five reference experiments and [`checks`] the pointwise
//! sampling suites.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod checks;
pub mod control;
pub mod ensemble;
pub mod error;
pub mod linalg4;
pub mod metrics;
pub mod model;
pub mod sampling;
pub mod scenario;
pub mod sde;

pub use control::{ControlVector, Controller};
pub use ensemble::{run_campaign, CampaignConfig, EnsembleSummary, InitialState};
pub use error::{Error, Result};
pub use linalg4::{Cplx, Mat4};
pub use metrics::{Classification, ExponentFit, ScalarSeries};
pub use model::{BellLabel, DensityMatrix, ModelParams, OperatorSet};
pub use scenario::ScenarioPreset;
pub use sde::{RngStream, SdeConfig};
