//! Spectral-theorem occupation updates and the damped self-consistency
//! loop.
//!
//! Every Green's function produced by [`super::motion`] is rational with
//! simple poles, so the spectral-theorem frequency integral reduces to a
//! residue sum: `<L_xx> = (1/N_s) sum_k sum_p f(omega_p) Res_p[F(k, .)]`
//! with `f` the Bose function. `F` combines the Green's functions of one
//! coupled channel block, weighted by the matrix elements of the physical
//! probe operator (`a_sigma^dag` for the lattice bosons, the spin ladder
//! for the effective spin models) relative to the principal channel.

use nalgebra::DMatrix;

use crate::error::SboError;
use crate::kgrid::KGrid;
use crate::par;
use crate::params::ModelParams;
use crate::site_basis::{SiteBasis, SIGMAS};
use crate::Result;

use super::motion::MotionSpace;
use super::{TableState, TransitionTable};

/// Frequencies closer to zero than this trip the Bose-divergence signal.
const BOSE_POLE_TOL: f64 = 1e-9;

/// Bose occupation factor `f(omega) = 1/(exp(omega/T) - 1)`; at T = 0 it
/// degenerates to 0 for positive and -1 for negative frequencies. A mode
/// pinned exactly at zero (a symmetry-protected degeneracy) takes the
/// symmetric principal value -1/2 at T = 0; at finite temperature a zero
/// pole is a genuine divergence and is reported as
/// [`SboError::BosePole`] (the evaluation sits on a phase boundary).
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if omega.abs() < BOSE_POLE_TOL {
        if temperature == 0.0 {
            return Ok(-0.5);
        }
        return Err(SboError::BosePole { omega, temperature });
    }
    if temperature == 0.0 {
        Ok(if omega > 0.0 { 0.0 } else { -1.0 })
    } else {
        let x = omega / temperature;
        if x > 700.0 {
            Ok(0.0)
        } else if x < -700.0 {
            Ok(-1.0)
        } else {
            Ok(1.0 / (x.exp() - 1.0))
        }
    }
}

/// Damped fixed-point settings (paper gives no scheme; these are the
/// artifact defaults).
#[derive(Debug, Clone, Copy)]
pub struct FixedPointOpts {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOpts {
    fn default() -> Self {
        Self { damping: 0.5, tol: 1e-8, max_iter: 10_000 }
    }
}

/// Dense pair tensor over a small state set.
#[derive(Debug, Clone)]
pub struct PairTensor {
    ns: usize,
    data: Vec<f64>,
}

impl PairTensor {
    pub fn from_fn<F: Fn(usize, usize, usize, usize) -> f64>(ns: usize, f: F) -> Self {
        let mut data = vec![0.0; ns * ns * ns * ns];
        for a in 0..ns {
            for b in 0..ns {
                for c in 0..ns {
                    for d in 0..ns {
                        data[((a * ns + b) * ns + c) * ns + d] = f(a, b, c, d);
                    }
                }
            }
        }
        Self { ns, data }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.ns + b) * self.ns + c) * self.ns + d]
    }

    pub fn n_states(&self) -> usize {
        self.ns
    }
}

/// Occupation update rule for one excited state (local indices).
///
/// `Spectral` evaluates the correlator `<L_xy L_yx>` through the coupled
/// channel block sourced at (partner, state). `Boltzmann` weighs the
/// state against the reference state with the bare energy difference;
/// it is the stable closure for states that lack a direct ladder channel
/// to the reference state, where the spectral route would amplify
/// quantum depletion of the intermediate state by exp(|dE|/T).
#[derive(Debug, Clone, Copy)]
pub enum UpdateRule {
    Spectral { state: usize, partner: usize },
    Boltzmann { state: usize },
}

impl UpdateRule {
    pub fn state(&self) -> usize {
        match *self {
            UpdateRule::Spectral { state, .. } | UpdateRule::Boltzmann { state } => state,
        }
    }
}

/// A self-consistency problem over a small retained state set.
pub struct FluctuationProblem {
    /// Bare on-site matrix V (diagonal energies plus any bare couplings).
    pub v: DMatrix<f64>,
    pub tensor: PairTensor,
    pub z: f64,
    /// kappa(zeta) = kappa_factor * zeta; `t` for lattice bosons
    /// (epsilon(k) = t zeta(k)), -1 for the effective spin models.
    pub kappa_factor: f64,
    pub updates: Vec<UpdateRule>,
    /// Probe amplitude of a channel (alpha, beta) for a given update
    /// (first argument: index into `updates`); weights inside F are probe
    /// ratios relative to the principal channel.
    pub probe: Box<dyn Fn(usize, usize, usize) -> f64 + Sync + Send>,
    /// Evaluate each spectral update with every occupation other than the
    /// (partner, state) pair masked to zero. Keeps the channel blocks
    /// minimal when many excited states are populated.
    pub pair_masked: bool,
    /// Occupation-difference pruning passed to the motion space (see
    /// [`MotionSpace::with_pruning`]); 0 = exact.
    pub prune_rel: f64,
}

impl FluctuationProblem {
    /// One sweep of the spectral-theorem update at fixed occupations.
    /// Returns the full new occupation vector (ground state closing the
    /// sum to one).
    ///
    /// The correlator identity `<L_xx> = S (D_y - D_x)` (with `S` the
    /// unit-source spectral sum of the (y, x) block) is solved for the
    /// updated value, `D_x = S D_y / (1 + S)`: same fixed point as the
    /// direct update, but stable when `x` lies below its route partner
    /// (where the direct map has slope |f| > 1). In the atomic limit this
    /// reproduces exact Boltzmann weights.
    pub fn step(&self, occ: &[f64], grid: &KGrid, temperature: f64) -> Result<Vec<f64>> {
        let ns = occ.len();
        let shared_space;
        let mut masked_spaces = Vec::new();
        if self.pair_masked {
            shared_space = None;
            for u in &self.updates {
                if let UpdateRule::Spectral { state, partner } = *u {
                    let mut masked = vec![0.0; ns];
                    masked[state] = occ[state];
                    masked[partner] = occ[partner];
                    masked_spaces.push(Some(MotionSpace::with_pruning(
                        &masked,
                        &self.v,
                        self.z,
                        |a, b, c, d| self.tensor.get(a, b, c, d),
                        self.prune_rel,
                    )));
                } else {
                    masked_spaces.push(None);
                }
            }
        } else {
            shared_space = Some(MotionSpace::with_pruning(
                occ,
                &self.v,
                self.z,
                |a, b, c, d| self.tensor.get(a, b, c, d),
                self.prune_rel,
            ));
        }

        // Structural subsystems and probe weights for the spectral updates.
        let mut systems = Vec::new();
        for (uidx, u) in self.updates.iter().enumerate() {
            let UpdateRule::Spectral { state, partner } = *u else {
                continue;
            };
            let space = if self.pair_masked {
                masked_spaces[uidx].as_ref().unwrap()
            } else {
                shared_space.as_ref().unwrap()
            };
            let sys = space.subsystem((partner, state))?;
            let channels = sys.channels();
            let o_src = (self.probe)(uidx, partner, state);
            if o_src == 0.0 {
                return Err(SboError::Invalid(format!(
                    "zero probe amplitude on principal channel ({partner}, {state})"
                )));
            }
            let weights: Vec<f64> =
                channels.iter().map(|&(a, b)| (self.probe)(uidx, a, b) / o_src).collect();
            systems.push((state, partner, sys, weights));
        }

        // Zone sum over the zeta histogram; contributions collected in
        // order and reduced sequentially for bit-stable results.
        let hist = grid.zeta_histogram();
        let partials: Vec<Result<Vec<f64>>> = par::map_collect(hist, |&(zeta, mult)| {
            let kappa = self.kappa_factor * zeta;
            let mut acc = vec![0.0; systems.len()];
            for (ui, (_, _, sys, weights)) in systems.iter().enumerate() {
                let pd = sys.pole_decomposition_unit_source(kappa)?;
                for (p, res) in pd.poles.iter().zip(&pd.residues) {
                    let weighted: f64 = res.iter().zip(weights).map(|(r, w)| r * w).sum();
                    // Poles carrying no probe weight (e.g. zero-frequency
                    // transitions between degenerate spectator states) do
                    // not feed the correlator.
                    if weighted.abs() < 1e-12 {
                        continue;
                    }
                    let f = bose_occupation(*p, temperature)?;
                    acc[ui] += f * weighted * mult as f64;
                }
            }
            Ok(acc)
        });

        let mut sums = vec![0.0; systems.len()];
        for part in partials {
            let part = part?;
            for (s, p) in sums.iter_mut().zip(&part) {
                *s += p;
            }
        }

        let n_sites = grid.n_sites() as f64;
        let mut new_occ = vec![0.0; ns];
        for ((state, partner, _, _), sum) in systems.iter().zip(&sums) {
            // <L_xx> = S (D_partner - D_x), solved for D_x.
            let s = sum / n_sites;
            if 1.0 + s < 1e-12 {
                return Err(SboError::UnstableOccupations { min: 1.0 + s });
            }
            let d = s * occ[*partner] / (1.0 + s);
            // Small negative transients are numerical noise on the way to
            // the fixed point; clamp them and only flag real runaways.
            if d < -1e-3 {
                return Err(SboError::UnstableOccupations { min: d });
            }
            new_occ[*state] = d.max(0.0);
        }
        for u in &self.updates {
            let UpdateRule::Boltzmann { state } = *u else {
                continue;
            };
            let de = self.v[(state, state)] - self.v[(0, 0)];
            new_occ[state] = if temperature == 0.0 {
                0.0
            } else {
                occ[0] * (-de / temperature).exp()
            };
        }
        // The reference state closes the sum; every non-updated excited
        // state keeps occupation zero.
        let excited: f64 = new_occ.iter().sum();
        if excited > 1.0 + 1e-7 {
            return Err(SboError::UnstableOccupations { min: 1.0 - excited });
        }
        new_occ[0] = (1.0 - excited).clamp(0.0, 1.0);
        Ok(new_occ)
    }

    /// Damped iteration `D <- (1 - a) D + a D_new` until
    /// `max |D_new - D| < tol`, with periodic Aitken extrapolation along
    /// the dominant contraction mode (the loop slows critically near a
    /// phase boundary).
    pub fn converge(
        &self,
        start: &[f64],
        grid: &KGrid,
        temperature: f64,
        opts: &FixedPointOpts,
    ) -> Result<(Vec<f64>, usize)> {
        let mut d = start.to_vec();
        let mut last_delta = f64::INFINITY;
        let mut prev_step: Option<Vec<f64>> = None;
        for iter in 1..=opts.max_iter {
            let d_new = self.step(&d, grid, temperature)?;
            last_delta = d
                .iter()
                .zip(&d_new)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            let step: Vec<f64> = d
                .iter()
                .zip(&d_new)
                .map(|(a, b)| opts.damping * (b - a))
                .collect();
            if last_delta < opts.tol {
                for (cur, s) in d.iter_mut().zip(&step) {
                    *cur += s;
                }
                return Ok((d, iter));
            }
            // Aitken: estimate the geometric step ratio and jump to the
            // extrapolated limit when the iteration is clearly linear.
            let mut accel = None;
            if iter % 4 == 0 {
                if let Some(prev) = &prev_step {
                    let num: f64 = step.iter().zip(prev).map(|(a, b)| a * b).sum();
                    let den: f64 = prev.iter().map(|b| b * b).sum();
                    if den > 0.0 {
                        let r = num / den;
                        if (0.2..=0.999).contains(&r) {
                            accel = Some(r / (1.0 - r));
                        }
                    }
                }
            }
            let boost = accel.map_or(1.0, |g| 1.0 + g);
            let mut ok = true;
            let mut d_next = d.clone();
            for (cur, s) in d_next.iter_mut().zip(&step) {
                *cur += boost * s;
                if !(-1e-6..=1.0 + 1e-6).contains(cur) {
                    ok = false;
                }
            }
            if ok {
                d = d_next;
            } else {
                // Extrapolation left the physical region; plain step.
                for (cur, s) in d.iter_mut().zip(&step) {
                    *cur += s;
                }
            }
            prev_step = Some(step);
        }
        Err(SboError::NotConverged { iterations: opts.max_iter, last_delta })
    }
}

/// Occupation-update policy for retained states without a direct ladder
/// channel to the ground state (they only matter at finite temperature).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalMode {
    /// Weigh them against the ground state with bare Boltzmann factors
    /// (stable; exact in the atomic limit; zero at T = 0).
    #[default]
    GroundBoltzmann,
    /// Route them spectrally through their lowest-energy neighbour.
    /// Kept as the fully-coupled alternative; near marginal temperatures
    /// the chained route amplifies quantum depletion of the intermediate
    /// state and can fail with an instability signal.
    CoupledChain,
}

/// Fluctuation problem for the lattice-boson scenarios: retained on-site
/// eigenstates (ground first), hopping tensor from the ladder tables,
/// probe = the `a_sigma`/`a_sigma^dag` matrix elements.
pub struct BosonFluctuations<'a> {
    basis: &'a SiteBasis,
    pub retained: Vec<usize>,
    pub energies: Vec<f64>,
    problem: FluctuationProblem,
}

impl<'a> BosonFluctuations<'a> {
    /// `retained[0]` must be the reference (ground) state. Every other
    /// state needs a ladder connection to at least one retained state.
    pub fn new(basis: &'a SiteBasis, params: &ModelParams, retained: Vec<usize>) -> Result<Self> {
        Self::with_thermal_mode(basis, params, retained, ThermalMode::default())
    }

    pub fn with_thermal_mode(
        basis: &'a SiteBasis,
        params: &ModelParams,
        retained: Vec<usize>,
        thermal_mode: ThermalMode,
    ) -> Result<Self> {
        if retained.is_empty() {
            return Err(SboError::Invalid("empty retained state set".into()));
        }
        let ns = retained.len();
        let energies: Vec<f64> = retained
            .iter()
            .map(|&g| {
                let st = basis.state(g);
                crate::params::on_site_energy_with_field(st.s, st.m, st.n, params)
            })
            .collect::<Result<_>>()?;

        // c[sigma](a, b) = <retained[a]| a_sigma |retained[b]>
        let elem = |sigma: i8, a: usize, b: usize| basis.annihilation(sigma, retained[a], retained[b]);
        let tensor = PairTensor::from_fn(ns, |a, b, c, d| {
            SIGMAS
                .iter()
                .map(|&s| elem(s, a, b) * elem(s, d, c) + elem(s, b, a) * elem(s, c, d))
                .sum()
        });

        let mut v = DMatrix::zeros(ns, ns);
        for (i, &e) in energies.iter().enumerate() {
            v[(i, i)] = e;
        }

        let connected = |x: usize, y: usize| SIGMAS.iter().any(|&s| elem(s, x, y) != 0.0 || elem(s, y, x) != 0.0);
        let mut updates = Vec::new();
        for x in 1..ns {
            if connected(x, 0) {
                updates.push(UpdateRule::Spectral { state: x, partner: 0 });
                continue;
            }
            match thermal_mode {
                ThermalMode::GroundBoltzmann => updates.push(UpdateRule::Boltzmann { state: x }),
                ThermalMode::CoupledChain => {
                    let mut partner = None;
                    for y in 1..ns {
                        if y == x || !connected(x, y) {
                            continue;
                        }
                        let better = match partner {
                            None => true,
                            Some(p) => energies[y] < energies[p] - 1e-15,
                        };
                        if better {
                            partner = Some(y);
                        }
                    }
                    let partner = partner.ok_or_else(|| {
                        SboError::Invalid(format!("retained state {x} has no ladder connection"))
                    })?;
                    updates.push(UpdateRule::Spectral { state: x, partner });
                }
            }
        }

        // Probe amplitudes: creation channels carry <alpha| a^dag |beta>,
        // annihilation channels <alpha| a |beta>, with the spin component
        // fixed by the m difference.
        let states: Vec<crate::site_basis::SpinSiteState> =
            retained.iter().map(|&g| basis.state(g)).collect();
        let probe_elems = {
            let mut map = vec![0.0; ns * ns];
            for a in 0..ns {
                for b in 0..ns {
                    if a == b {
                        continue;
                    }
                    let (sa, sb) = (states[a], states[b]);
                    let val = if sa.n == sb.n + 1 {
                        let sigma = sa.m - sb.m;
                        if sigma.abs() <= 1 {
                            basis.creation(sigma as i8, retained[a], retained[b])
                        } else {
                            0.0
                        }
                    } else if sa.n + 1 == sb.n {
                        let sigma = sb.m - sa.m;
                        if sigma.abs() <= 1 {
                            basis.annihilation(sigma as i8, retained[a], retained[b])
                        } else {
                            0.0
                        }
                    } else {
                        0.0
                    };
                    map[a * ns + b] = val;
                }
            }
            map
        };
        let probe = Box::new(move |_u: usize, a: usize, b: usize| probe_elems[a * ns + b]);

        let problem = FluctuationProblem {
            v,
            tensor,
            z: params.z(),
            kappa_factor: params.t,
            updates,
            probe,
            pair_masked: false,
            prune_rel: 0.0,
        };
        Ok(Self { basis, retained, energies, problem })
    }

    pub fn frozen_occupations(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.retained.len()];
        d[0] = 1.0;
        d
    }

    /// Re-target the hopping without rebuilding tables.
    pub fn set_hopping(&mut self, t: f64) {
        self.problem.kappa_factor = t;
    }

    pub fn step(&self, occ: &[f64], grid: &KGrid, temperature: f64) -> Result<Vec<f64>> {
        self.problem.step(occ, grid, temperature)
    }

    pub fn converge(
        &self,
        grid: &KGrid,
        temperature: f64,
        opts: &FixedPointOpts,
    ) -> Result<(Vec<f64>, usize)> {
        self.problem.converge(&self.frozen_occupations(), grid, temperature, opts)
    }

    /// Transition table at the given occupations (for N-matrix assembly).
    pub fn transition_table(&self, occ: &[f64]) -> Result<TransitionTable> {
        let states: Vec<TableState> = self
            .retained
            .iter()
            .zip(&self.energies)
            .map(|(&g, &e)| TableState {
                components: vec![(g, num_complex::Complex64::ONE)],
                energy: e,
            })
            .collect();
        TransitionTable::new(states, occ.to_vec())
    }

    pub fn basis(&self) -> &SiteBasis {
        self.basis
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bose_limits() {
        assert_eq!(bose_occupation(0.5, 0.0).unwrap(), 0.0);
        assert_eq!(bose_occupation(-0.5, 0.0).unwrap(), -1.0);
        assert!(matches!(
            bose_occupation(1e-12, 0.1),
            Err(SboError::BosePole { .. })
        ));
        // f(w) + f(-w) = -1 for any T.
        let f1 = bose_occupation(0.3, 0.17).unwrap();
        let f2 = bose_occupation(-0.3, 0.17).unwrap();
        assert_relative_eq!(f1 + f2, -1.0, epsilon = 1e-12);
    }
}
