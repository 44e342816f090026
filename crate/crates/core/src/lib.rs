//! Channel estimation for LEO-satellite massive MIMO OFDM uplinks.
//!
//! The crate synthesizes ground-truth channels from satellite geometry,
//! builds phase-shift pilots and allocates them with a greedy max-S-cut, and
//! implements the joint MMSE estimator next to the two-stage estimator (TSCE)
//! that replaces the joint solve by per-UT space combining and a Levinson
//! solve over frequency. [`experiments`] wraps everything into seeded
//! Monte-Carlo sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dsp;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod pilots;
pub mod satgeo;
pub mod toeplitz;

pub use channel::{array_response, delay_grid, exp_pdp, ArrayGeometry, DelayGrid, OfdmGrid, PathSet, Pdp, UtChannel};
pub use dsp::C64;
pub use error::{Error, Result};
pub use estimators::{EstimateReport, EstimatorKind, EstimatorPlan, MmsePlan, RxPilotSignal, Scenario, TscePlan};
pub use experiments::{ScenarioConfig, SweepRow};
pub use pilots::{Allocation, PilotSet, WeightGraph};
pub use satgeo::{LinkBudget, OrbitParams, SpaceAngle, UtGeometry};
pub use toeplitz::HermitianToeplitz;
