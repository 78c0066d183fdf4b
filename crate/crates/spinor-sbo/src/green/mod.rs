//! SBO Green's-function machinery: transition tables, the frequency-space
//! N-matrices, the 3x3 lattice Green's function and its boundary-pole
//! criterion.
//!
//! Sign convention: the N-matrices are assembled literally as the sum of
//! simple poles `D_{mu mu'} / (omega + E_mu - E_mu')` weighted by ladder
//! matrix elements. Evaluated at omega = 0 on a stable Mott state this
//! makes N11 negative-definite; the positive constants quoted by the
//! closed-form boundaries (Omega, Upsilon, N0 combinations in
//! [`crate::misf`]) are the negatives of these eigenvalues, and the
//! boundary condition det[I - eps(0) N11(0)] = 0 reads
//! `z t_c * (positive combination) = 1`.

pub mod motion;
pub mod spectral;

use nalgebra::{Matrix3, Matrix6, Vector3};
use num_complex::Complex64;

use crate::error::SboError;
use crate::params::ModelParams;
use crate::site_basis::{SiteBasis, SIGMAS};
use crate::Result;

/// Frequencies closer than this to a transition energy are rejected.
pub const POLE_TOL: f64 = 1e-9;

/// A (possibly superposed) on-site state entering a transition table.
/// Components must live in one boson sector and share one energy.
#[derive(Debug, Clone)]
pub struct TableState {
    /// (global basis index, amplitude) pairs; normalized.
    pub components: Vec<(usize, Complex64)>,
    /// On-site energy (field shift included).
    pub energy: f64,
}

impl TableState {
    pub fn sharp(basis: &SiteBasis, idx: usize, params: &ModelParams) -> Result<Self> {
        let st = basis.state(idx);
        let energy = crate::params::on_site_energy_with_field(st.s, st.m, st.n, params)?;
        Ok(Self { components: vec![(idx, Complex64::ONE)], energy })
    }

    /// Normalized superposition of degenerate basis states.
    pub fn superposition(
        basis: &SiteBasis,
        components: Vec<(usize, Complex64)>,
        params: &ModelParams,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(SboError::Invalid("empty superposition".into()));
        }
        let norm2: f64 = components.iter().map(|(_, a)| a.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(SboError::Invalid("zero-norm superposition".into()));
        }
        let scale = norm2.sqrt();
        let components: Vec<(usize, Complex64)> =
            components.into_iter().map(|(i, a)| (i, a / scale)).collect();
        let energies: Vec<f64> = components
            .iter()
            .map(|&(i, _)| {
                let st = basis.state(i);
                crate::params::on_site_energy_with_field(st.s, st.m, st.n, params)
            })
            .collect::<Result<_>>()?;
        let e0 = energies[0];
        if energies.iter().any(|e| (e - e0).abs() > 1e-9) {
            return Err(SboError::Invalid(
                "superposition components are not degenerate".into(),
            ));
        }
        Ok(Self { components, energy: e0 })
    }

    /// `<self| a_sigma |other>` by linearity over the components.
    pub fn annihilation(&self, basis: &SiteBasis, sigma: i8, other: &TableState) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &(b, ab) in &self.components {
            for &(k, ak) in &other.components {
                let v = basis.annihilation(sigma, b, k);
                if v != 0.0 {
                    acc += ab.conj() * ak * v;
                }
            }
        }
        acc
    }
}

/// Per-state energies, occupations and the transition list feeding the
/// motion equation. Occupations satisfy `sum D = 1` within 1e-8 and
/// `D in [0, 1]`.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    pub states: Vec<TableState>,
    pub occupations: Vec<f64>,
    /// Ordered pairs (i, j) with `D_i - D_j != 0`.
    pub transitions: Vec<(usize, usize)>,
}

impl TransitionTable {
    pub fn new(states: Vec<TableState>, occupations: Vec<f64>) -> Result<Self> {
        if states.len() != occupations.len() {
            return Err(SboError::Invalid("state/occupation length mismatch".into()));
        }
        let total: f64 = occupations.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(SboError::Invalid(format!(
                "occupations sum to {total}, expected 1"
            )));
        }
        if occupations.iter().any(|&d| !(-1e-12..=1.0 + 1e-12).contains(&d)) {
            return Err(SboError::Invalid("occupations outside [0, 1]".into()));
        }
        let mut transitions = Vec::new();
        for i in 0..states.len() {
            for j in 0..states.len() {
                if i != j && (occupations[i] - occupations[j]).abs() > 0.0 {
                    transitions.push((i, j));
                }
            }
        }
        Ok(Self { states, occupations, transitions })
    }

    /// Table with full weight on the first state (zero-fluctuation limit).
    pub fn frozen(occupied: TableState, extras: Vec<TableState>) -> Result<Self> {
        let mut states = vec![occupied];
        states.extend(extras);
        let mut occ = vec![0.0; states.len()];
        occ[0] = 1.0;
        Self::new(states, occ)
    }

    pub fn occupation_diff(&self, i: usize, j: usize) -> f64 {
        self.occupations[i] - self.occupations[j]
    }
}

/// The four 3x3 frequency-dependent matrices of the RPA-closed motion
/// equation, evaluated at one frequency. Row/column order is the spin
/// component (+1, 0, -1).
#[derive(Debug, Clone)]
pub struct NMatrices {
    pub n11: Matrix3<Complex64>,
    pub n12: Matrix3<Complex64>,
    pub n21: Matrix3<Complex64>,
    pub n22: Matrix3<Complex64>,
}

/// Assemble the N-matrices from the table at frequency `omega`.
///
/// Errors with [`SboError::PoleProximity`] when `omega` sits within
/// [`POLE_TOL`] of a contributing transition energy.
pub fn build_n_matrices(
    basis: &SiteBasis,
    table: &TransitionTable,
    omega: f64,
) -> Result<NMatrices> {
    let mut n11 = Matrix3::zeros();
    let mut n12 = Matrix3::zeros();
    let mut n21 = Matrix3::zeros();
    let mut n22 = Matrix3::zeros();

    for &(i, j) in &table.transitions {
        let d = table.occupation_diff(i, j);
        let si = &table.states[i];
        let sj = &table.states[j];
        // c^sigma_{ij} = <i| a_sigma |j>, c^sigma_{ji} = <j| a_sigma |i>.
        let cij: Vec<Complex64> = SIGMAS.iter().map(|&s| si.annihilation(basis, s, sj)).collect();
        let cji: Vec<Complex64> = SIGMAS.iter().map(|&s| sj.annihilation(basis, s, si)).collect();
        if cij.iter().all(|c| c.norm() == 0.0) && cji.iter().all(|c| c.norm() == 0.0) {
            continue;
        }
        let denom = omega + si.energy - sj.energy;
        if denom.abs() < POLE_TOL {
            return Err(SboError::PoleProximity {
                omega,
                tol: POLE_TOL,
                from: format!("state {i}"),
                to: format!("state {j}"),
            });
        }
        let w = Complex64::new(d / denom, 0.0);
        for a in 0..3 {
            for b in 0..3 {
                // d^b_{ji} = conj(c^b_{ij}); d^a_{ij} = conj(c^a_{ji}).
                n11[(a, b)] += w * cij[a] * cij[b].conj();
                n12[(a, b)] += w * cij[a] * cji[b];
                n21[(a, b)] += w * cji[a].conj() * cij[b].conj();
                n22[(a, b)] += w * cji[a].conj() * cji[b];
            }
        }
    }
    Ok(NMatrices { n11, n12, n21, n22 })
}

fn invert3(m: &Matrix3<Complex64>) -> Result<Matrix3<Complex64>> {
    let scale = m.iter().map(|c| c.norm()).fold(1.0_f64, f64::max);
    let det = m.determinant();
    if det.norm() < 1e-12 * scale.powi(3) {
        return Err(SboError::BoundaryPole);
    }
    m.try_inverse().ok_or(SboError::BoundaryPole)
}

/// Full Green's-function matrix
/// `G = [I - eps Pi]^-1 Pi`, `Pi = N11 + eps N12 [I - eps N22]^-1 N21`.
pub fn green_matrix(nm: &NMatrices, eps_k: f64) -> Result<Matrix3<Complex64>> {
    let eps = Complex64::new(eps_k, 0.0);
    let inner = Matrix3::identity() - nm.n22 * eps;
    let gamma = nm.n12 * invert3(&inner)? * nm.n21;
    let pi = nm.n11 + gamma * eps;
    let outer = Matrix3::identity() - pi * eps;
    Ok(invert3(&outer)? * pi)
}

/// Simplified form valid when N12 = N21 = 0:
/// `G = [I - eps N11]^-1 N11`.
pub fn green_matrix_simplified(nm: &NMatrices, eps_k: f64) -> Result<Matrix3<Complex64>> {
    let eps = Complex64::new(eps_k, 0.0);
    let outer = Matrix3::identity() - nm.n11 * eps;
    Ok(invert3(&outer)? * nm.n11)
}

/// Eigen-decomposition of a 3x3 hermitian matrix via the real 6x6
/// embedding [[Re, -Im], [Im, Re]]. Returns eigenvalues ascending with
/// phase-canonicalized eigenvectors (largest component real positive).
pub fn hermitian_eigen3(m: &Matrix3<Complex64>) -> (Vector3<f64>, [Vector3<Complex64>; 3]) {
    let mut big = Matrix6::<f64>::zeros();
    for r in 0..3 {
        for c in 0..3 {
            let v = m[(r, c)];
            big[(r, c)] = v.re;
            big[(r, c + 3)] = -v.im;
            big[(r + 3, c)] = v.im;
            big[(r + 3, c + 3)] = v.re;
        }
    }
    // Symmetrize against roundoff in the caller's matrix.
    big = (big + big.transpose()) * 0.5;
    let eig = big.symmetric_eigen();
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut values = Vector3::zeros();
    let mut vectors = [Vector3::zeros(), Vector3::zeros(), Vector3::zeros()];
    for k in 0..3 {
        // Doubled spectrum: every hermitian eigenvalue appears twice.
        let idx = order[2 * k];
        values[k] = eig.eigenvalues[idx];
        let col = eig.eigenvectors.column(idx);
        let mut v = Vector3::new(
            Complex64::new(col[0], col[3]),
            Complex64::new(col[1], col[4]),
            Complex64::new(col[2], col[5]),
        );
        // Canonical phase and normalization.
        let lead = (0..3).max_by(|&a, &b| v[a].norm().partial_cmp(&v[b].norm()).unwrap()).unwrap();
        let phase = v[lead] / v[lead].norm();
        v /= phase;
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v /= Complex64::new(norm, 0.0);
        vectors[k] = v;
    }
    (values, vectors)
}

/// Smallest eigenvalue of `I - eps(0) N11(0)` with `eps(0) = -z t`.
/// Positive inside the Mott phase; a zero crossing marks the boundary.
pub fn stability_indicator(n11_at_zero: &Matrix3<Complex64>, z_times_t: f64) -> f64 {
    let (vals, _) = hermitian_eigen3(n11_at_zero);
    (0..3).map(|k| 1.0 + z_times_t * vals[k]).fold(f64::INFINITY, f64::min)
}
