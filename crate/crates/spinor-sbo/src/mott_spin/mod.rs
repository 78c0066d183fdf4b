//! Effective spin models inside the Mott lobes: the n = 1
//! bilinear-biquadratic model with linear/quadratic Zeeman terms and the
//! n = 2 pair-coupling model, with their excitation spectra, gap-closure
//! boundaries and magnetic phase diagrams.

pub mod n1;
pub mod n2;

use crate::error::SboError;
use crate::Result;

/// Couplings of the effective n = 1 spin Hamiltonian
/// `-sum_<ij> [J1 S_i.S_j + J2 (S_i.S_j)^2] + sum_i (-lambda S_z + q S_z^2)`.
#[derive(Debug, Clone, Copy)]
pub struct SpinExchangeParams {
    /// Bilinear coupling.
    pub j1: f64,
    /// Biquadratic coupling.
    pub j2: f64,
    /// Linear Zeeman strength (results are symmetric under lambda -> -lambda).
    pub lambda: f64,
    /// Quadratic Zeeman strength (assumed >= 0).
    pub q: f64,
    /// Coordination number.
    pub z: f64,
}

impl SpinExchangeParams {
    pub fn new(j1: f64, j2: f64, z: f64) -> Self {
        Self { j1, j2, lambda: 0.0, q: 0.0, z }
    }

    /// Polar parametrization `J1 = -J cos(theta)`, `J2 = -J sin(theta)`;
    /// both couplings are positive for theta in (-pi, -pi/2).
    pub fn from_theta(j: f64, theta: f64, z: f64) -> Self {
        Self::new(-j * theta.cos(), -j * theta.sin(), z)
    }

    /// Coupling magnitude J = sqrt(J1^2 + J2^2).
    pub fn magnitude(&self) -> f64 {
        self.j1.hypot(self.j2)
    }

    pub fn theta(&self) -> f64 {
        (-self.j2).atan2(-self.j1)
    }

    pub fn with_zeeman(mut self, lambda: f64, q: f64) -> Self {
        self.lambda = lambda;
        self.q = q;
        self
    }

    /// Scale both exchange couplings (hopping path parametrization:
    /// J's grow quadratically with t).
    pub fn scaled(&self, factor: f64) -> Self {
        Self { j1: self.j1 * factor, j2: self.j2 * factor, ..*self }
    }
}

/// Second-order perturbation theory couplings from the scattering
/// strengths: `J1 = 2 t^2 / g2`, `J2 = 4 t^2/(3 g0) + 2 t^2/(3 g2)`.
pub fn exchange_couplings_from_scattering(t: f64, g0: f64, g2: f64, z: f64) -> Result<SpinExchangeParams> {
    if !(g0 > 0.0) || !(g2 > 0.0) {
        return Err(SboError::InvalidParams(format!(
            "scattering strengths must be > 0, got g0 = {g0}, g2 = {g2}"
        )));
    }
    let t2 = t * t;
    Ok(SpinExchangeParams::new(
        2.0 * t2 / g2,
        4.0 * t2 / (3.0 * g0) + 2.0 * t2 / (3.0 * g2),
        z,
    ))
}

/// Same couplings driven by the Hubbard interactions via
/// `g0 = U0 - 2 U2`, `g2 = U0 + U2`.
pub fn exchange_couplings(t: f64, u0: f64, u2: f64, z: f64) -> Result<SpinExchangeParams> {
    let (g0, g2) = crate::params::scattering_from_interactions(u0, u2)?;
    exchange_couplings_from_scattering(t, g0, g2, z)
}
