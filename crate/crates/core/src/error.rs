use thiserror::Error;

/// Everything that can go wrong inside the laboratory.
///
/// Variants are split in two families: malformed input (bad parameters,
/// unresolved modes, mismatched grids) and violated mathematical
/// preconditions (a field that is not divergence-free, a non-exact
/// structure, a flow with a fixed point). The CLI maps the two families to
/// different exit codes, see [`LabError::is_precondition`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid of {n} points per axis cannot resolve wavevector {wavevector:?} (need every |k_i| < n/2)")]
    Unresolved { wavevector: [i64; 3], n: usize },

    #[error("grid mismatch: {left} vs {right} points per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("not a Hamiltonian structure: max |div W| = {max_div:.3e} exceeds {tolerance:.1e} x max |W|")]
    NotDivergenceFree { max_div: f64, tolerance: f64 },

    #[error("flux slices disagree on axis {axis}: {first} vs {second}")]
    FluxSliceMismatch { axis: usize, first: f64, second: f64 },

    #[error("non-exact Hamiltonian structure: flux periods {periods:?} are not zero, helicity undefined")]
    NonExact { periods: [f64; 3] },

    #[error("point ({x}, {y}) lies outside the surface domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("surface domains differ: {0}")]
    DomainMismatch(String),

    #[error("plug support leaks out of its box: {0}")]
    SupportLeak(String),

    #[error("plug boxes overlap: {0}")]
    BoxOverlap(String),

    #[error("field inside the plug box is not the expected suspension (max deviation {deviation:.3e})")]
    NotSuspension { deviation: f64 },

    #[error("fixed point present: |W| = {min_norm:.3e} at node {node:?}")]
    FixedPoint { min_norm: f64, node: [usize; 3] },

    #[error("lift ambiguity: circle-map increment {increment:.3} is not below a quarter turn, reduce the step")]
    LiftAmbiguity { increment: f64 },

    #[error("curves too close: min distance {distance:.3e} below {bound:.3e}")]
    CurvesTooClose { distance: f64, bound: f64 },

    #[error("resolution too coarse: {0}")]
    CoarseResolution(String),
}

impl LabError {
    /// True when the input was well formed but violates a mathematical
    /// hypothesis of the requested operation.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            LabError::NotDivergenceFree { .. }
                | LabError::FluxSliceMismatch { .. }
                | LabError::NonExact { .. }
                | LabError::NotSuspension { .. }
                | LabError::FixedPoint { .. }
                | LabError::LiftAmbiguity { .. }
                | LabError::CurvesTooClose { .. }
                | LabError::SupportLeak(_)
                | LabError::BoxOverlap(_)
                | LabError::OutsideDomain { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
