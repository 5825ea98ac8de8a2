//! Conditional entropy spectra via Legendre duality.

pub mod cycles;
mod flow;
pub(crate) mod map;
pub mod range;

pub use flow::flow_conditional_spectrum;
pub use map::{conditional_entropy_spectrum, conditional_entropy_spectrum_2d, conditional_pressure_spectrum};
pub use range::{birkhoff_range, flow_ratio_range, rotation_set_2d, BirkhoffRange, RatioRange, RotationSet};

use crate::measures::MarkovComponent;
use serde::Serialize;

/// Directions sampled when testing interiority for two observables.
pub const ROTATION_DIRECTIONS: usize = 64;
/// Inner-hull margin for two-observable interior tests.
pub const INTERIOR_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Interior,
}

/// Value of a conditional spectrum at `alpha` with the dual parameters and
/// an ergodic Markov witness attaining it.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub alpha: Vec<f64>,
    pub value: f64,
    /// `β`, `(β₁, β₂)`, or `(β, s)` for flows.
    pub dual: Vec<f64>,
    pub witness: MarkovComponent,
    /// Entropy of the witness (Abramov entropy for flows).
    pub witness_entropy: f64,
    /// Averages of the constrained observables under the witness (flow
    /// averages for flows).
    pub witness_mean: Vec<f64>,
    pub status: Status,
}
