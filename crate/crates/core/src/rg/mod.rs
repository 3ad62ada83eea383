//! Renormalization map at the kernel level: first decimation of a particle
//! Hamiltonian, Wick recombination of the Neumann series, and the iterated
//! field-only flow.

mod decimation;
mod equivalence;
mod flow;
mod wick;

use serde::{Deserialize, Serialize};

use crate::C64;

pub use decimation::{first_decimation, neumann_ratio_estimate, wick_recombine};
pub use equivalence::{equivalence, Equivalence};
pub use flow::{flow, flow_neumann_ratio, flow_step, FlowConfig, FlowResult};

/// Parameters of one decimation step.
#[derive(Clone, Debug, PartialEq)]
pub struct WickConfig {
    /// Neumann depth `L_max ≥ 1`.
    pub l_max: usize,
    /// Spectral parameter, in the frame where the field energy enters with
    /// unit coefficient.
    pub lambda: C64,
    pub rho: f64,
    pub j: usize,
    /// Largest stored order `M + N`.
    pub max_mn: usize,
    /// Extra rescaled energies added to the `w_{0,0}` grid.
    pub extra_r: Vec<f64>,
}

impl WickConfig {
    pub fn new(lambda: C64, rho: f64, j: usize) -> Self {
        Self { l_max: 4, lambda, rho, j, max_mn: 2, extra_r: vec![] }
    }
}

/// One row of a flow trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub step: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub w00_at_0_re: f64,
    pub w00_at_0_im: f64,
    pub interaction_norm: f64,
    pub discarded_norm: f64,
    /// `γ_{t} / γ_{t−1}`; 0 when the previous interaction vanished.
    pub ratio: f64,
}

/// Step 0 is the input sequence; one further row per completed step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub rows: Vec<FlowRow>,
}

impl FlowTrace {
    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gamma).collect()
    }
}
