use thiserror::Error;

/// Errors shared across the solver stack.
#[derive(Debug, Error)]
pub enum SboError {
    #[error("invalid site state (S={s}, m={m}, n={n}): {constraint}")]
    InvalidState {
        s: u32,
        m: i32,
        n: u32,
        constraint: &'static str,
    },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("frequency {omega} is within {tol} of the transition {from} -> {to}")]
    PoleProximity {
        omega: f64,
        tol: f64,
        from: String,
        to: String,
    },

    #[error("Green's-function matrix is singular at the requested point (boundary pole)")]
    BoundaryPole,

    #[error("Bose function diverges: pole at omega = {omega} with T = {temperature}")]
    BosePole { omega: f64, temperature: f64 },

    #[error("motion-equation eigenproblem is numerically degenerate (residue defect {defect}); perturb the parameters")]
    NumericalDegeneracy { defect: f64 },

    #[error("complex pole frequencies encountered (|Im| = {im_max}); the scan is past an instability")]
    EvanescentModes { im_max: f64 },

    #[error("fixed point failed to converge after {iterations} iterations (last max |dD| = {last_delta})")]
    NotConverged { iterations: usize, last_delta: f64 },

    #[error("occupation update left [0, 1] (worst value {min}); the state is past an instability")]
    UnstableOccupations { min: f64 },

    #[error("no phase boundary bracketed for t in ({lo}, {hi}]")]
    NoTransition { lo: f64, hi: f64 },

    #[error("chemical potential {mu} lies outside the lobe window; no positive root for t_c")]
    NoPositiveRoot { mu: f64 },

    #[error("the t = 0 lobe window for n = {n} is empty")]
    EmptyWindow { n: u32 },

    #[error("top eigenvalue of N11(0) is degenerate (gap {gap}); use the two-particle classifier")]
    DegenerateTopEigenvalue { gap: f64 },

    #[error("Clebsch-Gordan table is missing the entry {0}")]
    MissingCgEntry(String),

    #[error("{0}")]
    Invalid(String),
}
