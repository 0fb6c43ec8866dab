//! Estimators for the integrated density of states.
//!
//! - [`exhaustion_estimate`]: normalized Dirichlet counts on an increasing box
//!   sequence, for a single realization.
//! - [`bloch_oracle`]: exact IDS of a periodic model from Floquet fibers.
//! - [`bracketing_bounds`]: single-cell Dirichlet/Neumann Monte Carlo bounds.
//! - [`trace_estimate`]: the central-cell trace of the spectral projector.
//! - [`wegner_experiment`]: expected eigenvalue counts in small windows and
//!   their log-log fit in window width and region size.
//! - [`self_averaging`]: ensemble mean and variance of the counting function.
//!
//! All Monte Carlo loops derive one seed per realization from the master seed
//! and reduce in realization order, so results do not depend on the number of
//! worker threads.

mod bloch;
mod bracket;
mod exhaustion;
mod selfavg;
pub mod stats;
mod trace;
mod wegner;

use serde::Serialize;

pub use bloch::bloch_oracle;
pub use bracket::{bracketing_bounds, Bracket};
pub use exhaustion::{exhaustion_estimate, Exhaustion, ExhaustionOptions, ExhaustionStep};
pub use selfavg::{self_averaging, SelfAvgRow};
pub use trace::{trace_estimate, TraceOptions};
pub use wegner::{fit_wegner, wegner_experiment, WegnerFit, WegnerRow, WegnerTable};

use crate::fields::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exhaustion,
    Bloch,
    BracketLower,
    BracketUpper,
    Trace,
}

/// A sampled distribution function `λ ↦ N(λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdsCurve {
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub estimator: Estimator,
    pub seed: Option<u64>,
    pub region: String,
}

impl IdsCurve {
    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// `sup_λ |N(λ) - N'(λ)|` over a shared grid.
    pub fn sup_distance(&self, other: &IdsCurve) -> f64 {
        assert_eq!(self.lambdas, other.lambdas, "curves live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Value at an exact grid point.
    pub fn at(&self, lambda: f64) -> Option<f64> {
        self.lambdas.iter().position(|&l| l == lambda).map(|k| self.values[k])
    }
}

/// Seed of realization `index` within work group `group`.
pub fn realization_seed(master: u64, group: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master, group), index)
}

/// Uniform grid of `points` values on `[start, stop]`.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
            .collect(),
    }
}
