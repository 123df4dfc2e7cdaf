//! Precoder design: fully digital baseline and the hybrid solvers.

pub mod altmin;
pub mod codebook;
pub mod daosa;
pub mod digital;
pub mod omp;
pub mod sic;
pub mod waterfilling;
pub mod wsms;

pub use altmin::{altmin_hybrid, AltMinOptions};
pub use codebook::{ttd_codebook_select, Band, Codebook, CodebookEntry};
pub use daosa::{daosa_select, DaosaBudget, DaosaOutcome, DaosaStep};
pub use digital::{fully_digital_baseline, FullyDigitalSolution};
pub use omp::{omp_hybrid, steering_dictionary};
pub use sic::{sic_aosa, SicOutcome};
pub use waterfilling::waterfilling;
pub use wsms::wsms_solve;

use crate::architectures::HybridBeamformer;

/// Iteration record of an iterative solver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every half-step, in solver-specific units.
    pub objective_trace: Vec<f64>,
}

/// A hybrid beamformer together with how it was obtained.
#[derive(Debug, Clone)]
pub struct Solved {
    pub beamformer: HybridBeamformer,
    pub report: SolveReport,
}
