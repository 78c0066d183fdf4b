//! Model parameters of the spin-1 Bose-Hubbard Hamiltonian and the on-site
//! energy function they define.

use crate::error::SboError;
use crate::site_basis::SpinSiteState;
use crate::Result;

/// Parameters of the lattice Hamiltonian. Energies are in the caller's
/// units (the CLI normalizes everything to `u0`); `k_B = 1` so the
/// temperature is an energy as well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Hopping energy t.
    pub t: f64,
    /// Spin-independent on-site repulsion U0 (> 0).
    pub u0: f64,
    /// Spin-dependent interaction U2 (< 0 ferromagnetic, > 0 antiferromagnetic).
    pub u2: f64,
    /// Chemical potential.
    pub mu: f64,
    /// Linear-field strength: adds -eta * m to the on-site energy.
    pub eta: f64,
    /// Temperature (>= 0).
    pub temperature: f64,
    /// Lattice dimension (1..=3); the coordination number is z = 2 * dim.
    pub dim: u32,
}

impl ModelParams {
    /// Hypercubic-lattice defaults at zero hopping: everything expressed in
    /// units of `u0 = 1`.
    pub fn new(u0: f64, u2: f64, mu: f64, dim: u32) -> Self {
        Self {
            t: 0.0,
            u0,
            u2,
            mu,
            eta: 0.0,
            temperature: 0.0,
            dim,
        }
    }

    /// Coordination number z = 2 * dim.
    pub fn z(&self) -> f64 {
        f64::from(2 * self.dim)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u0 > 0.0) {
            return Err(SboError::InvalidParams(format!("U0 must be > 0, got {}", self.u0)));
        }
        if self.temperature < 0.0 {
            return Err(SboError::InvalidParams(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !(1..=3).contains(&self.dim) {
            return Err(SboError::InvalidParams(format!("dim must be 1..=3, got {}", self.dim)));
        }
        Ok(())
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }
}

/// On-site eigenenergy of |S, m; n>:
/// `-mu n + U0/2 n(n-1) + U2/2 [S(S+1) - 2n]`.
///
/// The state is degenerate in m; a linear field shifts it by `-eta * m`,
/// which the caller applies separately (see [`on_site_energy_with_field`]).
pub fn on_site_energy(s: u32, n: u32, p: &ModelParams) -> Result<f64> {
    SpinSiteState::new(s, s as i32, n)?;
    let nf = f64::from(n);
    let sf = f64::from(s);
    Ok(-p.mu * nf + 0.5 * p.u0 * nf * (nf - 1.0) + 0.5 * p.u2 * (sf * (sf + 1.0) - 2.0 * nf))
}

/// On-site energy including the linear-field shift `-eta * m`.
pub fn on_site_energy_with_field(s: u32, m: i32, n: u32, p: &ModelParams) -> Result<f64> {
    SpinSiteState::new(s, m, n)?;
    Ok(on_site_energy(s, n, p)? - p.eta * f64::from(m))
}

/// Map spin-channel scattering strengths (g0, g2) to the Hubbard
/// interactions: `U0 = (g0 + 2 g2)/3`, `U2 = (g2 - g0)/3`.
pub fn interactions_from_scattering(g0: f64, g2: f64) -> Result<(f64, f64)> {
    if !(g0 > 0.0) || !(g2 > 0.0) {
        return Err(SboError::InvalidParams(format!(
            "scattering strengths must be > 0, got g0 = {g0}, g2 = {g2}"
        )));
    }
    Ok(((g0 + 2.0 * g2) / 3.0, (g2 - g0) / 3.0))
}

/// Inverse of [`interactions_from_scattering`]: `g0 = U0 - 2 U2`,
/// `g2 = U0 + U2`. Errors when either channel strength is non-positive.
pub fn scattering_from_interactions(u0: f64, u2: f64) -> Result<(f64, f64)> {
    let g0 = u0 - 2.0 * u2;
    let g2 = u0 + u2;
    if !(g0 > 0.0) || !(g2 > 0.0) {
        return Err(SboError::InvalidParams(format!(
            "(U0, U2) = ({u0}, {u2}) maps to non-positive scattering strengths (g0 = {g0}, g2 = {g2})"
        )));
    }
    Ok((g0, g2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_site_has_zero_energy() {
        let p = ModelParams::new(1.0, 0.1, 0.7, 2);
        assert_eq!(on_site_energy(0, 0, &p).unwrap(), 0.0);
    }

    #[test]
    fn direct_evaluation_even_singlet() {
        // n = 2 singlet at mu = 0.5 U0, U2 = 0.1 U0.
        let p = ModelParams::new(1.0, 0.1, 0.5, 2);
        assert_relative_eq!(on_site_energy(0, 2, &p).unwrap(), -0.2, epsilon = 1e-14);
    }

    #[test]
    fn direct_evaluation_odd_triplet() {
        // n = 1, S = 1: the U2 term vanishes because S(S+1) - 2n = 0.
        let p = ModelParams::new(1.0, 0.1, 0.3, 2);
        assert_relative_eq!(on_site_energy(1, 1, &p).unwrap(), -0.3, epsilon = 1e-14);
    }

    #[test]
    fn field_shift_breaks_m_degeneracy_only() {
        let p = ModelParams::new(1.0, 0.04, 0.4, 2).with_eta(0.05);
        let e0 = on_site_energy(1, 1, &p).unwrap();
        for m in -1..=1 {
            let em = on_site_energy_with_field(1, m, 1, &p).unwrap();
            assert_relative_eq!(em, e0 - 0.05 * f64::from(m), epsilon = 1e-14);
        }
    }

    #[test]
    fn invalid_states_are_rejected() {
        let p = ModelParams::new(1.0, 0.1, 0.3, 2);
        assert!(on_site_energy(2, 1, &p).is_err()); // S > n
        assert!(on_site_energy(0, 1, &p).is_err()); // S + n odd
    }

    #[test]
    fn scattering_round_trip() {
        let (u0, u2) = interactions_from_scattering(0.8, 1.1).unwrap();
        let (g0, g2) = scattering_from_interactions(u0, u2).unwrap();
        assert_relative_eq!(g0, 0.8, epsilon = 1e-14);
        assert_relative_eq!(g2, 1.1, epsilon = 1e-14);
    }
}
