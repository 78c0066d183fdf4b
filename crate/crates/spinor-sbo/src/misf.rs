//! Mott-insulator / superfluid boundaries and order-symmetry
//! classification: t = 0 lobe windows, the closed-form critical hoppings
//! for ferromagnetic and antiferromagnetic interactions, the
//! polar/ferromagnetic classifier of the superfluid order vector, and the
//! self-consistent boundary including quantum/thermal fluctuations.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::SboError;
use crate::green::spectral::{BosonFluctuations, FixedPointOpts};
use crate::green::{
    build_n_matrices, hermitian_eigen3, stability_indicator, NMatrices, TableState,
    TransitionTable,
};
use crate::kgrid::KGrid;
use crate::par;
use crate::params::{on_site_energy, ModelParams};
use crate::site_basis::SiteBasis;
use crate::Result;

/// Classifier thresholds on Theta_pol = |chi_0^2 - 2 chi_+ chi_-|.
pub const POLAR_THRESHOLD: f64 = 0.99;
pub const FERRO_THRESHOLD: f64 = 0.01;

/// Ground-state total spin at t = 0: S = n for ferromagnetic interactions,
/// minimal S (n mod 2) otherwise.
pub fn ground_spin(u2: f64, n: u32) -> u32 {
    if u2 < 0.0 {
        n
    } else {
        n % 2
    }
}

/// Chemical-potential window of the n-lobe at t = 0, from the lower
/// envelope of the on-site ground energies `E(mu) = -mu n' + a(n')`.
/// `Ok(None)` marks an empty window (odd AFM lobes vanish for
/// U2 >= 0.5 U0).
pub fn lobe_window_t0(n: u32, p: &ModelParams) -> Result<Option<(f64, f64)>> {
    if n == 0 {
        return Err(SboError::InvalidParams("lobe filling must be >= 1".into()));
    }
    p.validate()?;
    let at_zero_mu = ModelParams { mu: 0.0, ..*p };
    let a = |m: u32| on_site_energy(ground_spin(p.u2, m), m, &at_zero_mu);
    let a_n = a(n)?;
    let mut lower = f64::NEG_INFINITY;
    for m in 0..n {
        lower = lower.max((a_n - a(m)?) / f64::from(n - m));
    }
    let mut upper = f64::INFINITY;
    for m in (n + 1)..=(n + 8) {
        upper = upper.min((a(m)? - a_n) / f64::from(m - n));
    }
    if lower < upper {
        Ok(Some((lower, upper)))
    } else {
        Ok(None)
    }
}

/// Lobe index whose t = 0 window contains `mu`, if any.
pub fn lobe_at(mu: f64, p: &ModelParams, n_max: u32) -> Result<Option<u32>> {
    for n in 1..=n_max {
        if let Some((lo, hi)) = lobe_window_t0(n, p)? {
            if mu > lo && mu < hi {
                return Ok(Some(n));
            }
        }
    }
    Ok(None)
}

fn require_inside_window(n: u32, p: &ModelParams) -> Result<()> {
    match lobe_window_t0(n, p)? {
        Some((lo, hi)) if p.mu > lo && p.mu < hi => Ok(()),
        Some(_) => Err(SboError::NoPositiveRoot { mu: p.mu }),
        None => Err(SboError::EmptyWindow { n }),
    }
}

/// Inverse excitation gaps of the ferromagnetic lobe (stretched ground
/// state |n, n; n>).
#[derive(Debug, Clone, Copy)]
pub struct FmConstants {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
}

pub fn fm_constants(n: u32, p: &ModelParams) -> Result<FmConstants> {
    let eg = on_site_energy(n, n, p)?;
    Ok(FmConstants {
        omega1: 1.0 / (on_site_energy(n - 1, n + 1, p)? - eg),
        omega2: 1.0 / (on_site_energy(n + 1, n + 1, p)? - eg),
        omega3: 1.0 / (on_site_energy(n - 1, n - 1, p)? - eg),
    })
}

/// Largest one-particle response of the ferromagnetic lobe,
/// `lambda_m = (n+1) Omega2 + n Omega3`.
pub fn fm_lambda_max(n: u32, p: &ModelParams) -> Result<f64> {
    let c = fm_constants(n, p)?;
    Ok(f64::from(n + 1) * c.omega2 + f64::from(n) * c.omega3)
}

/// Closed-form ferromagnetic boundary: `z t_c lambda_m = 1`.
pub fn boundary_ferro(n: u32, p: &ModelParams) -> Result<f64> {
    if p.u2 >= 0.0 {
        return Err(SboError::InvalidParams("ferromagnetic boundary needs U2 < 0".into()));
    }
    require_inside_window(n, p)?;
    Ok(1.0 / (p.z() * fm_lambda_max(n, p)?))
}

/// Weighted inverse gaps of the odd antiferromagnetic lobe (S = 1 ground
/// multiplet).
#[derive(Debug, Clone, Copy)]
pub struct AfmOddConstants {
    pub upsilon1: f64,
    pub upsilon2: f64,
    pub upsilon3: f64,
    pub upsilon4: f64,
}

pub fn afm_odd_constants(n: u32, p: &ModelParams) -> Result<AfmOddConstants> {
    let eg = on_site_energy(1, n, p)?;
    let upsilon4 = if n == 1 {
        0.0 // the (S=2, n-1) weight (n-1)/15 vanishes identically
    } else {
        (f64::from(n) - 1.0) / 15.0 / (on_site_energy(2, n - 1, p)? - eg)
    };
    Ok(AfmOddConstants {
        upsilon1: (f64::from(n) + 1.0) / 3.0 / (on_site_energy(0, n + 1, p)? - eg),
        upsilon2: (f64::from(n) + 4.0) / 15.0 / (on_site_energy(2, n + 1, p)? - eg),
        upsilon3: (f64::from(n) + 2.0) / 3.0 / (on_site_energy(0, n - 1, p)? - eg),
        upsilon4,
    })
}

/// One-particle response eigenvalues of the odd AFM lobe for a ground
/// superposition with classifier value `rho = |c0^2 - 2 c1 c-1|`:
/// lambda_0 and lambda_-/lambda_+.
pub fn afm_odd_eigenvalues(c: &AfmOddConstants, rho: f64) -> [f64; 3] {
    let l0 = 3.0 * (c.upsilon2 + c.upsilon4);
    let mid = 0.5 * (c.upsilon1 + c.upsilon3 + 7.0 * (c.upsilon2 + c.upsilon4));
    let k1 = 3.0 * c.upsilon2 + c.upsilon3 - 2.0 * c.upsilon4;
    let k2 = c.upsilon1 - 2.0 * c.upsilon2 + 3.0 * c.upsilon4;
    let disc = ((k1 - k2).powi(2) + 4.0 * k1 * k2 * rho * rho).max(0.0).sqrt();
    [l0, mid - 0.5 * disc, mid + 0.5 * disc]
}

/// Isotropic one-particle response of the even AFM lobe:
/// `N0 = (n/3 + 1)/dE1 + (n/3)/dE2`.
pub fn afm_even_n0(n: u32, p: &ModelParams) -> Result<f64> {
    let eg = on_site_energy(0, n, p)?;
    let de1 = on_site_energy(1, n + 1, p)? - eg;
    let de2 = on_site_energy(1, n - 1, p)? - eg;
    Ok((f64::from(n) / 3.0 + 1.0) / de1 + (f64::from(n) / 3.0) / de2)
}

/// Closed-form antiferromagnetic boundary, odd or even by the parity
/// of n: `z t_c (Y1 + 4 Y2 + Y3 + 4 Y4) = 1` or `z t_c N0 = 1`.
pub fn boundary_afm(n: u32, p: &ModelParams) -> Result<f64> {
    if p.u2 <= 0.0 {
        return Err(SboError::InvalidParams("antiferromagnetic boundary needs U2 > 0".into()));
    }
    require_inside_window(n, p)?;
    let response = if n % 2 == 1 {
        let c = afm_odd_constants(n, p)?;
        c.upsilon1 + 4.0 * c.upsilon2 + c.upsilon3 + 4.0 * c.upsilon4
    } else {
        afm_even_n0(n, p)?
    };
    Ok(1.0 / (p.z() * response))
}

/// Dispatch on the interaction sign.
pub fn boundary_analytic(n: u32, p: &ModelParams) -> Result<f64> {
    if p.u2 < 0.0 {
        boundary_ferro(n, p)
    } else {
        boundary_afm(n, p)
    }
}

/// Two-particle response weights of the even AFM lobe.
#[derive(Debug, Clone, Copy)]
pub struct TwoParticleConstants {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

pub fn two_particle_constants(n: u32, p: &ModelParams) -> Result<TwoParticleConstants> {
    let eg = on_site_energy(0, n, p)?;
    let nf = f64::from(n);
    let lambda1 = if n == 2 {
        0.0 // weight n(n-2) vanishes
    } else {
        nf * (nf - 2.0) / 15.0 / (on_site_energy(2, n - 2, p)? - eg)
    };
    Ok(TwoParticleConstants {
        lambda1,
        lambda2: nf * (nf + 1.0) / 9.0 / (on_site_energy(0, n - 2, p)? - eg),
        lambda3: (nf + 3.0) * (nf + 5.0) / 15.0 / (on_site_energy(2, n + 2, p)? - eg),
        lambda4: (nf + 2.0) * (nf + 3.0) / 9.0 / (on_site_energy(0, n + 2, p)? - eg),
    })
}

/// Two-particle response at zero momentum and frequency as a function of
/// the classifier value `theta = |chi_0^2 - 2 chi_+ chi_-|`:
/// `2(L1 + L3) + (L2 + L4 - 2/3 L1 - 2/3 L3) theta^2`.
pub fn two_particle_response(c: &TwoParticleConstants, theta: f64) -> f64 {
    2.0 * (c.lambda1 + c.lambda3) + two_particle_coefficient(c) * theta * theta
}

pub fn two_particle_coefficient(c: &TwoParticleConstants) -> f64 {
    c.lambda2 + c.lambda4 - 2.0 / 3.0 * (c.lambda1 + c.lambda3)
}

/// Normalized superfluid order vector (chi_+1, chi_0, chi_-1).
#[derive(Debug, Clone, Copy)]
pub struct OrderVector {
    pub chi: [Complex64; 3],
}

impl OrderVector {
    pub fn new(chi: [Complex64; 3]) -> Self {
        let norm = chi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        Self {
            chi: [chi[0] / norm, chi[1] / norm, chi[2] / norm],
        }
    }

    /// Polar classifier `|chi_0^2 - 2 chi_+ chi_-| in [0, 1]`.
    pub fn theta_pol(&self) -> f64 {
        (self.chi[1] * self.chi[1] - 2.0 * self.chi[0] * self.chi[2]).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderLabel {
    Polar,
    Ferro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyMode {
    OneParticle,
    TwoParticle,
}

#[derive(Debug, Clone, Copy)]
pub struct Classification {
    pub order: OrderVector,
    pub theta_pol: f64,
    pub label: OrderLabel,
}

fn label_from_theta(theta: f64) -> Result<OrderLabel> {
    if theta >= POLAR_THRESHOLD {
        Ok(OrderLabel::Polar)
    } else if theta <= FERRO_THRESHOLD {
        Ok(OrderLabel::Ferro)
    } else {
        Err(SboError::Invalid(format!(
            "classifier value {theta} falls between the ferro/polar thresholds"
        )))
    }
}

/// One-particle classifier: dominant eigenvector of N11(0). A degenerate
/// top eigenvalue (the even AFM lobe) signals that the two-particle mode
/// must be used instead.
pub fn classify_one_particle(n11_at_zero: &Matrix3<Complex64>) -> Result<Classification> {
    let (vals, vecs) = hermitian_eigen3(n11_at_zero);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| vals[b].abs().partial_cmp(&vals[a].abs()).unwrap());
    let scale = vals[order[0]].abs().max(1.0);
    let gap = vals[order[0]].abs() - vals[order[1]].abs();
    if gap < 1e-9 * scale {
        return Err(SboError::DegenerateTopEigenvalue { gap });
    }
    let chi = vecs[order[0]];
    let order_vec = OrderVector::new([chi[0], chi[1], chi[2]]);
    let theta = order_vec.theta_pol();
    Ok(Classification { order: order_vec, theta_pol: theta, label: label_from_theta(theta)? })
}

/// Two-particle classifier for the even AFM lobe: maximize the
/// two-particle response over the unit order vector. A positive
/// coefficient selects theta = 1 (polar); a negative one theta = 0.
pub fn classify_two_particle(n: u32, p: &ModelParams) -> Result<Classification> {
    let c = two_particle_constants(n, p)?;
    let coeff = two_particle_coefficient(&c);
    let (chi, theta) = if coeff > 0.0 {
        ([Complex64::ZERO, Complex64::ONE, Complex64::ZERO], 1.0)
    } else {
        (
            [
                Complex64::new(0.5, 0.0),
                Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            0.0,
        )
    };
    let order = OrderVector::new(chi);
    debug_assert!((order.theta_pol() - theta).abs() < 1e-12);
    Ok(Classification { order, theta_pol: theta, label: label_from_theta(theta)? })
}

/// Spec-level dispatcher over the two classifier modes.
pub fn classify_order(
    nm_at_zero: &NMatrices,
    mode: ClassifyMode,
    n: u32,
    p: &ModelParams,
) -> Result<Classification> {
    match mode {
        ClassifyMode::OneParticle => classify_one_particle(&nm_at_zero.n11),
        ClassifyMode::TwoParticle => classify_two_particle(n, p),
    }
}

/// Ground [`TableState`] of a lobe: the stretched state for U2 < 0, the
/// m = 0 member of the S = 1 triplet for odd AFM lobes, the singlet for
/// even ones.
pub fn default_ground(basis: &SiteBasis, p: &ModelParams, n: u32) -> Result<TableState> {
    let s = ground_spin(p.u2, n);
    let m = if p.u2 < 0.0 { n as i32 } else { 0 };
    TableState::sharp(basis, basis.require(s, m, n)?, p)
}

/// Ground superposition over the degenerate (S, n) multiplet,
/// coefficients keyed by m.
pub fn superposition_ground(
    basis: &SiteBasis,
    p: &ModelParams,
    s: u32,
    n: u32,
    coeffs: &[(i32, Complex64)],
) -> Result<TableState> {
    let components = coeffs
        .iter()
        .map(|&(m, a)| Ok((basis.require(s, m, n)?, a)))
        .collect::<Result<Vec<_>>>()?;
    TableState::superposition(basis, components, p)
}

/// Frozen transition table: the given ground state plus every basis state
/// in the adjacent boson sectors at zero occupation.
pub fn frozen_table(basis: &SiteBasis, p: &ModelParams, ground: TableState) -> Result<TransitionTable> {
    let n = basis.state(ground.components[0].0).n;
    let mut extras = Vec::new();
    for (idx, st) in basis.states().iter().enumerate() {
        if st.n + 1 == n || st.n == n + 1 {
            extras.push(TableState::sharp(basis, idx, p)?);
        }
    }
    TransitionTable::frozen(ground, extras)
}

/// N11(0) of a frozen lobe ground state.
pub fn frozen_n11(basis: &SiteBasis, p: &ModelParams, ground: TableState) -> Result<Matrix3<Complex64>> {
    let table = frozen_table(basis, p, ground)?;
    Ok(build_n_matrices(basis, &table, 0.0)?.n11)
}

/// Numeric pole search: smallest t with a (k = 0, omega = 0) pole of the
/// Green's function built from the frozen numeric N11(0). With frozen
/// occupations the indicator `1 + z t nu` is linear in t, so the search
/// reduces to the most negative eigenvalue nu of N11(0).
pub fn numeric_tc(basis: &SiteBasis, p: &ModelParams, ground: TableState) -> Result<f64> {
    let n11 = frozen_n11(basis, p, ground)?;
    let (vals, _) = hermitian_eigen3(&n11);
    let nu_min = vals[0];
    if nu_min >= -1e-14 {
        return Err(SboError::NoTransition { lo: 0.0, hi: f64::INFINITY });
    }
    let tc = -1.0 / (p.z() * nu_min);
    debug_assert!(stability_indicator(&n11, p.z() * tc).abs() < 1e-9);
    Ok(tc)
}

/// Self-consistency scenarios of the MI-SF solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisfScenario {
    Fm { n: u32 },
    AfmOdd { n: u32 },
    AfmEven { n: u32 },
    /// Single-atom filling in a linear external field (finite-T set:
    /// the S = 1 triplet, the empty site, |2,2;2> and |0,0;2>).
    AfmFieldN1,
}

impl MisfScenario {
    pub fn lobe_n(&self) -> u32 {
        match self {
            MisfScenario::Fm { n } | MisfScenario::AfmOdd { n } | MisfScenario::AfmEven { n } => *n,
            MisfScenario::AfmFieldN1 => 1,
        }
    }

    /// Pick the scenario for a lobe from the interaction sign and parity.
    pub fn for_lobe(p: &ModelParams, n: u32) -> Self {
        if p.u2 < 0.0 {
            MisfScenario::Fm { n }
        } else if n % 2 == 1 {
            if p.eta != 0.0 && n == 1 {
                MisfScenario::AfmFieldN1
            } else {
                MisfScenario::AfmOdd { n }
            }
        } else {
            MisfScenario::AfmEven { n }
        }
    }
}

/// Retained fluctuation states (global basis indices, ground first).
/// Even AFM lobes keep only the singlet: atoms pair into on-site
/// singlets and the one-particle fluctuation channels are neglected.
pub fn retained_states(basis: &SiteBasis, scenario: MisfScenario) -> Result<Vec<usize>> {
    Ok(match scenario {
        MisfScenario::Fm { n } => vec![
            basis.require(n, n as i32, n)?,
            basis.require(n + 1, n as i32 + 1, n + 1)?,
            basis.require(n - 1, n as i32 - 1, n - 1)?,
        ],
        MisfScenario::AfmOdd { n } => vec![
            basis.require(1, 0, n)?,
            basis.require(0, 0, n - 1)?,
            basis.require(0, 0, n + 1)?,
            basis.require(2, 0, n + 1)?,
        ],
        MisfScenario::AfmEven { n } => vec![basis.require(0, 0, n)?],
        MisfScenario::AfmFieldN1 => vec![
            basis.require(1, 1, 1)?,
            basis.require(1, 0, 1)?,
            basis.require(1, -1, 1)?,
            basis.require(0, 0, 0)?,
            basis.require(2, 2, 2)?,
            basis.require(0, 0, 2)?,
        ],
    })
}

/// Transition table for the boundary criterion: retained states carry the
/// converged occupations; every adjacent-sector basis state enters at
/// zero occupation so all fluctuation transitions contribute to N11.
pub fn boundary_table(
    basis: &SiteBasis,
    p: &ModelParams,
    retained: &[usize],
    occ: &[f64],
) -> Result<TransitionTable> {
    let mut states = Vec::new();
    let mut occupations = Vec::new();
    let mut present: Vec<usize> = retained.to_vec();
    for (&g, &d) in retained.iter().zip(occ) {
        states.push(TableState::sharp(basis, g, p)?);
        occupations.push(d);
    }
    for (&g, &d) in retained.iter().zip(occ) {
        if d <= 1e-12 {
            continue;
        }
        let n = basis.state(g).n;
        for (idx, st) in basis.states().iter().enumerate() {
            let adjacent = st.n + 1 == n || st.n == n + 1;
            if adjacent && !present.contains(&idx) {
                present.push(idx);
                states.push(TableState::sharp(basis, idx, p)?);
                occupations.push(0.0);
            }
        }
    }
    TransitionTable::new(states, occupations)
}

/// Options of the self-consistent boundary search.
#[derive(Debug, Clone, Copy)]
pub struct ScBoundaryOpts {
    /// Switch the fluctuation channels off to recover the frozen loop.
    pub fluctuations: bool,
    pub fixed_point: FixedPointOpts,
    /// Absolute bisection tolerance on t (the artifact default is
    /// 1e-6 * U0, applied by [`ScBoundaryOpts::for_params`]).
    pub t_tol: f64,
    /// Upper end of the bracket (default U0).
    pub t_max: f64,
}

impl ScBoundaryOpts {
    pub fn for_params(p: &ModelParams) -> Self {
        Self {
            fluctuations: true,
            fixed_point: FixedPointOpts::default(),
            t_tol: 1e-6 * p.u0,
            t_max: p.u0,
        }
    }
}

/// Converged boundary data.
#[derive(Debug, Clone)]
pub struct ScBoundary {
    pub t_c: f64,
    /// Occupations of the retained states at the last stable hopping.
    pub occupations: Vec<f64>,
    /// Fixed-point iterations at the last stable hopping.
    pub iterations: usize,
}

fn unstable_side(err: &SboError) -> bool {
    matches!(
        err,
        SboError::EvanescentModes { .. }
            | SboError::BosePole { .. }
            | SboError::UnstableOccupations { .. }
            | SboError::BoundaryPole
            | SboError::PoleProximity { .. }
    )
}

/// Occupations and boundary indicator at one hopping value.
fn indicator_at(
    basis: &SiteBasis,
    p: &ModelParams,
    retained: &[usize],
    t: f64,
    grid: &KGrid,
    opts: &ScBoundaryOpts,
) -> Result<(f64, Vec<f64>, usize)> {
    let pt = p.with_t(t);
    let (occ, iters) = if opts.fluctuations && retained.len() > 1 && t > 0.0 {
        let flux = BosonFluctuations::new(basis, &pt, retained.to_vec())?;
        flux.converge(grid, p.temperature, &opts.fixed_point)?
    } else {
        let mut d = vec![0.0; retained.len()];
        d[0] = 1.0;
        (d, 0)
    };
    let table = boundary_table(basis, &pt, retained, &occ)?;
    let n11 = build_n_matrices(basis, &table, 0.0)?.n11;
    Ok((stability_indicator(&n11, p.z() * t), occ, iters))
}

/// Bisect the hopping until the converged Green's function develops a
/// pole at (k = 0, omega = 0). The reported `t_c` is the largest hopping
/// verified stable; the pole onset lies within `t_tol` above it.
pub fn self_consistent_boundary(
    basis: &SiteBasis,
    p: &ModelParams,
    scenario: MisfScenario,
    grid: &KGrid,
    opts: &ScBoundaryOpts,
) -> Result<ScBoundary> {
    let retained = retained_states(basis, scenario)?;
    let eval =
        |t: f64| -> Result<(f64, Vec<f64>, usize)> { indicator_at(basis, p, &retained, t, grid, opts) };

    // t = 0 is always stable inside a lobe window.
    let mut lo = 0.0;
    let mut stable = {
        let mut d = vec![0.0; retained.len()];
        d[0] = 1.0;
        (d, 0usize)
    };
    let mut hi = opts.t_max;
    match eval(hi) {
        Ok((s, _, _)) if s > 0.0 => {
            return Err(SboError::NoTransition { lo, hi });
        }
        Ok(_) => {}
        Err(e) if unstable_side(&e) => {}
        Err(e) => return Err(e),
    }

    while hi - lo > opts.t_tol {
        let mid = 0.5 * (lo + hi);
        match eval(mid) {
            Ok((s, occ, iters)) if s > 0.0 => {
                lo = mid;
                stable = (occ, iters);
            }
            Ok(_) => hi = mid,
            Err(e) if unstable_side(&e) => hi = mid,
            Err(e) => return Err(e),
        }
    }
    Ok(ScBoundary { t_c: lo, occupations: stable.0, iterations: stable.1 })
}

/// Boundary method of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    SelfConsistent,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Analytic => write!(f, "analytic"),
            Method::SelfConsistent => write!(f, "self-consistent"),
        }
    }
}

/// Superfluid phase label at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseLabel {
    SfPolar,
    SfFerro,
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseLabel::SfPolar => write!(f, "SF-polar"),
            PhaseLabel::SfFerro => write!(f, "SF-ferro"),
        }
    }
}

/// One sweep point: parameters, lobe, boundary and symmetry data; failed
/// points carry the error text instead of aborting the sweep.
#[derive(Debug, Clone)]
pub struct PhaseRecord {
    pub mu: f64,
    pub temperature: f64,
    pub method: Method,
    pub lobe_n: Option<u32>,
    pub t_c: Option<f64>,
    pub label: Option<PhaseLabel>,
    pub classifier: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub error: Option<String>,
}

fn classify_lobe(basis: &SiteBasis, p: &ModelParams, n: u32) -> Result<Classification> {
    let ground = default_ground(basis, p, n)?;
    let n11 = frozen_n11(basis, p, ground)?;
    match classify_one_particle(&n11) {
        Ok(c) => Ok(c),
        Err(SboError::DegenerateTopEigenvalue { .. }) => classify_two_particle(n, p),
        Err(e) => Err(e),
    }
}

fn sweep_point(
    basis: &SiteBasis,
    p: &ModelParams,
    mu: f64,
    method: Method,
    grid: &KGrid,
    opts: &ScBoundaryOpts,
) -> PhaseRecord {
    let pm = p.with_mu(mu);
    let mut rec = PhaseRecord {
        mu,
        temperature: p.temperature,
        method,
        lobe_n: None,
        t_c: None,
        label: None,
        classifier: None,
        converged: false,
        iterations: 0,
        error: None,
    };
    let lobe = match lobe_at(mu, &pm, basis.n_max().saturating_sub(2)) {
        Ok(Some(n)) => n,
        Ok(None) => {
            rec.error = Some("mu outside every lobe window".into());
            return rec;
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.lobe_n = Some(lobe);

    let result = (|| -> Result<(f64, usize)> {
        match method {
            Method::Analytic => Ok((boundary_analytic(lobe, &pm)?, 0)),
            Method::SelfConsistent => {
                let scenario = MisfScenario::for_lobe(&pm, lobe);
                let b = self_consistent_boundary(basis, &pm, scenario, grid, opts)?;
                Ok((b.t_c, b.iterations))
            }
        }
    })();
    match result {
        Ok((tc, iters)) => {
            rec.t_c = Some(tc);
            rec.iterations = iters;
            rec.converged = true;
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    }
    match classify_lobe(basis, &pm, lobe) {
        Ok(c) => {
            rec.classifier = Some(c.theta_pol);
            rec.label = Some(match c.label {
                OrderLabel::Polar => PhaseLabel::SfPolar,
                OrderLabel::Ferro => PhaseLabel::SfFerro,
            });
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            rec.converged = false;
        }
    }
    rec
}

/// Boundary sweep over a list of chemical potentials. Points are
/// independent and evaluated in parallel; records come back in input
/// order.
pub fn sweep_diagram(
    basis: &SiteBasis,
    p: &ModelParams,
    mu_values: &[f64],
    method: Method,
    grid: &KGrid,
    opts: &ScBoundaryOpts,
) -> Vec<PhaseRecord> {
    par::map_collect(mu_values, |&mu| sweep_point(basis, p, mu, method, grid, opts))
}
