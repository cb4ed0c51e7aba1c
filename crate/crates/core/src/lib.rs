//! Kaplan–Meier estimation with expert judgments on the status of closed
//! claims, including belief kernels on the true event times, weighted
//! semi-parametric fits and a contamination simulator.

pub mod cli;
pub mod curve;
pub mod error;
pub mod expert;
pub mod io;
pub mod kernel;
pub mod product_limit;
pub mod quadrature;
pub mod sample;
pub mod semiparametric;
pub mod sim;
pub mod special;

pub use curve::StepCurve;
pub use error::{Error, Result};
pub use expert::{ExpertSample, MixtureCurve};
pub use kernel::{BeliefKernel, KernelKind};
pub use product_limit::{KmCurve, DIVISION_EPS};
pub use sample::{sort_sample, Observation, SortedSample, TieOrder};
pub use semiparametric::{ExpertMode, FitMethod, FitResult, ParametricModel};
