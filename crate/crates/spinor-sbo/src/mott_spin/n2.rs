//! Magnetic phases of the n = 2 Mott lobe: the six-state pair-coupling
//! model over {singlet, S = 2 quintet}, its excitation spectra, the
//! singlet/canted-nematic/ferromagnetic boundaries and the
//! self-consistent singlet boundary including quantum fluctuations.

use nalgebra::DMatrix;

use crate::cg::clebsch_gordan;
use crate::error::SboError;
use crate::green::motion::MotionSpace;
use crate::green::spectral::{FixedPointOpts, FluctuationProblem, PairTensor, UpdateRule};
use crate::kgrid::KGrid;
use crate::Result;

/// Local state order: |s> = |0,0;2>, then |2,m;2> with m = 2..-2.
pub const N_STATES: usize = 6;
const S_IDX: usize = 0;

/// Spin projection of each local state.
pub fn sz_of(idx: usize) -> i64 {
    match idx {
        0 => 0,
        k => 3 - k as i64, // idx 1..=5 -> m = 2..-2
    }
}

fn m_state(m: i64) -> usize {
    (3 - m) as usize
}

/// Pair-coupling tensor of the n = 2 effective model, built from the
/// closed-form entries (with their hermitian and site-swap images) and
/// validated for write consistency. All entries obey total-S_z selection.
pub struct HTensorN2 {
    tensor: PairTensor,
    pub t: f64,
    pub u0: f64,
    pub u2: f64,
    pub z: f64,
}

impl HTensorN2 {
    pub fn tensor(&self) -> &PairTensor {
        &self.tensor
    }

    pub fn get(&self, a: usize, a2: usize, b: usize, b2: usize) -> f64 {
        self.tensor.get(a, a2, b, b2)
    }
}

/// Assemble the tensor at hopping `t`. The perturbative couplings assume
/// t << U0.
pub fn build_h_tensor_n2(t: f64, u0: f64, u2: f64, z: f64) -> Result<HTensorN2> {
    if !(u0 > 0.0) || !(u2 > 0.0) {
        return Err(SboError::InvalidParams(format!(
            "the n = 2 model needs U0 > 0 and U2 > 0, got ({u0}, {u2})"
        )));
    }
    let t2 = t * t;
    let mut data = vec![f64::NAN; N_STATES.pow(4)];
    let idx = |a: usize, a2: usize, b: usize, b2: usize| ((a * 6 + a2) * 6 + b) * 6 + b2;
    let put = |data: &mut Vec<f64>, a: usize, a2: usize, b: usize, b2: usize, v: f64| {
        // One physical entry fixes four tensor slots: itself, the i<->j
        // swap and the hermitian images. Conflicting writes are a
        // transcription bug, not a runtime condition.
        for (p, q, r, s) in [(a, a2, b, b2), (b, b2, a, a2), (a2, a, b2, b), (b2, b, a2, a)] {
            let slot = &mut data[idx(p, q, r, s)];
            if slot.is_nan() {
                *slot = v;
            } else {
                assert!(
                    (*slot - v).abs() < 1e-12 * (1.0 + v.abs()),
                    "inconsistent tensor entry ({p},{q},{r},{s}): {} vs {v}",
                    *slot
                );
            }
        }
    };

    // Singlet-pair hopping.
    put(&mut data, S_IDX, S_IDX, S_IDX, S_IDX, -20.0 * t2 / (3.0 * u0));
    for m in -2..=2i64 {
        let mi = m_state(m);
        // Excitation transfer between neighbouring sites.
        put(&mut data, mi, S_IDX, S_IDX, mi, -8.0 * t2 / (3.0 * u0));
        // Quintet population next to a singlet (carries the on-site
        // splitting 3 U2 split over the z bonds).
        put(&mut data, mi, mi, S_IDX, S_IDX, -20.0 * t2 / (3.0 * u0) + 3.0 * u2 / z);
        // Pair excitation into (m, -m).
        let sign = if (1 - m).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        put(&mut data, mi, S_IDX, m_state(-m), S_IDX, sign * 8.0 * t2 / (3.0 * u0));
    }
    // Singlet de-excitation against a quintet rearrangement.
    for m in -2..=2i64 {
        for mp in -2..=2i64 {
            let l = m + mp;
            if l.abs() > 2 {
                continue;
            }
            let v = 4.0 * 7.0_f64.sqrt() * t2 / (3.0 * u0)
                * clebsch_gordan(0, 0, 2, l, 2, l)
                * clebsch_gordan(2, m, 2, mp, 2, l);
            put(&mut data, S_IDX, m_state(m), m_state(l), m_state(mp), v);
        }
    }
    // Quintet-quintet coupling through the five total-spin channels.
    let weights = [
        6.0 * u2 / z - 16.0 * t2 / (3.0 * u0),
        6.0 * u2 / z - 4.0 * t2 / u0,
        6.0 * u2 / z - 8.0 * t2 / (3.0 * u0),
        6.0 * u2 / z - 4.0 * t2 / u0,
        6.0 * u2 / z - 12.0 * t2 / u0,
    ];
    for m in -2..=2i64 {
        for mp in -2..=2i64 {
            for l in -2..=2i64 {
                let lp = m + mp - l;
                if lp.abs() > 2 {
                    continue;
                }
                let mut v = 0.0;
                for (j, w) in weights.iter().enumerate() {
                    v += w
                        * clebsch_gordan(2, m, 2, mp, j as i64, m + mp)
                        * clebsch_gordan(2, l, 2, lp, j as i64, l + lp);
                }
                put(&mut data, m_state(m), m_state(l), m_state(mp), m_state(lp), v);
            }
        }
    }

    for v in &mut data {
        if v.is_nan() {
            *v = 0.0;
        }
    }
    let tensor = PairTensor::from_fn(N_STATES, |a, a2, b, b2| data[idx(a, a2, b, b2)]);
    Ok(HTensorN2 { tensor, t, u0, u2, z })
}

/// Bare Zeeman energies `V_a = -lambda S_z(a)`.
pub fn zeeman_energies_n2(lambda: f64) -> [f64; N_STATES] {
    let mut v = [0.0; N_STATES];
    for (i, e) in v.iter_mut().enumerate() {
        *e = -lambda * sz_of(i) as f64;
    }
    v
}

fn motion_space(h: &HTensorN2, lambda: f64, occ: &[f64; N_STATES]) -> MotionSpace {
    let mut v = DMatrix::zeros(N_STATES, N_STATES);
    for (i, e) in zeeman_energies_n2(lambda).into_iter().enumerate() {
        v[(i, i)] = e;
    }
    let data = self_tensor_copy(h);
    MotionSpace::new(occ, &v, h.z, move |a, b, c, d| data.get(a, b, c, d))
}

fn self_tensor_copy(h: &HTensorN2) -> PairTensor {
    PairTensor::from_fn(N_STATES, |a, b, c, d| h.get(a, b, c, d))
}

/// Excitation poles of the singlet-ground scenario toward |2, m>:
/// the coupled block sourced at the (s, m) channel. kappa = -zeta.
pub fn spectrum_n2_singlet(
    h: &HTensorN2,
    lambda: f64,
    occ: &[f64; N_STATES],
    target_m: i64,
    zeta: f64,
) -> Result<Vec<f64>> {
    let space = motion_space(h, lambda, occ);
    let sys = space.subsystem((S_IDX, m_state(target_m)))?;
    Ok(sys.pole_decomposition(-zeta)?.poles)
}

/// Excitation poles of the ferromagnetic-ground (|2,2>) scenario toward
/// the coupled {s, |2,0>} sector.
pub fn spectrum_n2_fm(
    h: &HTensorN2,
    lambda: f64,
    occ: &[f64; N_STATES],
    zeta: f64,
) -> Result<Vec<f64>> {
    let space = motion_space(h, lambda, occ);
    let sys = space.subsystem((m_state(2), S_IDX))?;
    Ok(sys.pole_decomposition(-zeta)?.poles)
}

fn frozen_occ(ground: usize) -> [f64; N_STATES] {
    let mut d = [0.0; N_STATES];
    d[ground] = 1.0;
    d
}

/// Which pole of a block tracks the soft excitation branch: the largest
/// (singlet-side block: one particle branch above hole-like conjugates)
/// or the smallest (ferromagnetic-side block: every pole positive while
/// stable).
#[derive(Clone, Copy)]
enum SoftBranch {
    Max,
    Min,
}

/// Zone minimum of the soft-branch frequency; non-positive values mean
/// the gap has closed.
fn zone_gap<F>(grid: &KGrid, branch: SoftBranch, poles_at: F) -> Result<f64>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let mut gap = f64::INFINITY;
    for &(zeta, _) in grid.zeta_histogram() {
        let poles = poles_at(zeta)?;
        let soft = match branch {
            SoftBranch::Max => poles.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            SoftBranch::Min => poles.iter().copied().fold(f64::INFINITY, f64::min),
        };
        gap = gap.min(soft);
    }
    Ok(gap)
}

/// Frozen singlet-side gap at the zone minimum.
pub fn singlet_gap_frozen(h: &HTensorN2, lambda: f64, grid: &KGrid) -> Result<f64> {
    let occ = frozen_occ(S_IDX);
    zone_gap(grid, SoftBranch::Max, |zeta| spectrum_n2_singlet(h, lambda, &occ, 2, zeta))
}

/// Closed-form frozen critical hopping of the singlet-to-nematic
/// transition, `t_c = sqrt(U0 (9 U2^2 - 4 lambda^2) / (16 z U2))`,
/// defined for |lambda| < 3 U2 / 2. The lambda = 0 value is
/// `0.75 sqrt(U0 U2 / z)`.
pub fn tc_singlet_frozen(lambda: f64, u0: f64, u2: f64, z: f64) -> Result<f64> {
    if lambda.abs() >= 1.5 * u2 {
        return Err(SboError::InvalidParams(
            "the singlet ground state needs |lambda| < 3 U2 / 2".into(),
        ));
    }
    Ok((u0 * (9.0 * u2 * u2 - 4.0 * lambda * lambda) / (16.0 * z * u2)).sqrt())
}

/// Characteristic hopping scale t0 = sqrt(U0 U2 / z).
pub fn t0_scale(u0: f64, u2: f64, z: f64) -> f64 {
    (u0 * u2 / z).sqrt()
}

/// Blind bisection of the frozen singlet gap closure in t.
pub fn tc_singlet_numeric(lambda: f64, u0: f64, u2: f64, z: f64, grid: &KGrid) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 2.0 * t0_scale(u0, u2, z);
    let gap_at = |t: f64| -> Result<f64> {
        let h = build_h_tensor_n2(t, u0, u2, z)?;
        singlet_gap_frozen(&h, lambda, grid)
    };
    match gap_at(hi) {
        Ok(g) if g > 0.0 => return Err(SboError::NoTransition { lo, hi }),
        _ => {}
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * t0_scale(u0, u2, z).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match gap_at(mid) {
            Ok(g) if g > 1e-12 => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ferromagnetic-side excitation boundary, `z t^2 / U0 =
/// (3 lambda U2 - 2 lambda^2) / (8 (lambda - U2))`: the t^2 value (if a
/// positive one exists, i.e. U2 < lambda < 3 U2 / 2).
pub fn fm_boundary_t2(lambda: f64, u0: f64, u2: f64, z: f64) -> Option<f64> {
    let rhs = (3.0 * lambda * u2 - 2.0 * lambda * lambda) / (8.0 * (lambda - u2));
    if rhs > 0.0 && rhs.is_finite() {
        Some(rhs * u0 / z)
    } else {
        None
    }
}

/// Minimal positive gap of the ferromagnetic background at hopping t.
pub fn fm_gap(t: f64, lambda: f64, u0: f64, u2: f64, z: f64, grid: &KGrid) -> Result<f64> {
    let h = build_h_tensor_n2(t, u0, u2, z)?;
    let occ = frozen_occ(m_state(2));
    zone_gap(grid, SoftBranch::Min, |zeta| spectrum_n2_fm(&h, lambda, &occ, zeta))
}

/// Self-consistent singlet boundary at linear field `lambda`: the
/// quintet occupations are updated through the spectral theorem (the
/// conjugate channel weighted by its quadrupole-probe sign) and the
/// hopping is bisected on the gap of the dressed system. The reported
/// value is the largest hopping verified stable; the closure lies within
/// the bisection tolerance above it.
pub fn tc_singlet_self_consistent(
    lambda: f64,
    u0: f64,
    u2: f64,
    z: f64,
    grid: &KGrid,
    temperature: f64,
    opts: &FixedPointOpts,
) -> Result<f64> {
    let problem_at = |t: f64| -> Result<FluctuationProblem> {
        let h = build_h_tensor_n2(t, u0, u2, z)?;
        let mut v = DMatrix::zeros(N_STATES, N_STATES);
        for (i, e) in zeeman_energies_n2(lambda).into_iter().enumerate() {
            v[(i, i)] = e;
        }
        let updates = (1..N_STATES)
            .map(|state| UpdateRule::Spectral { state, partner: S_IDX })
            .collect();
        Ok(FluctuationProblem {
            v,
            tensor: self_tensor_copy(&h),
            z,
            kappa_factor: -1.0,
            updates,
            // Hermitian quadrupole probe of the s <-> |2, m> sector: the
            // conjugate (|2,-m>, s) channel carries the Wigner-Eckart
            // sign (-1)^m relative to the principal channel.
            probe: Box::new(|uidx, a, b| {
                let m = sz_of(uidx + 1); // updates follow state order 1..=5
                let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let pm = m_state(m);
                let mm = m_state(-m);
                if (a, b) == (S_IDX, pm) || (a, b) == (pm, S_IDX) {
                    sign
                } else if (a, b) == (S_IDX, mm) || (a, b) == (mm, S_IDX) {
                    1.0
                } else {
                    0.0
                }
            }),
            // Full occupation bookkeeping: every retained state feeds the
            // energy shifts and channel weights. (The pair-masked variant
            // mirroring the closed 3x3 systems with D_mu = 0 for
            // mu != s, target over-softens the boundary.) Weak
            // quintet-quintet channels are pruned to keep the blocks
            // small; at lambda = 0 they vanish exactly anyway.
            pair_masked: false,
            prune_rel: 0.02,
        })
    };

    // Runtime guard: near the boundary the loop slows critically and the
    // stall itself marks the boundary, so long tails buy nothing.
    let fp = FixedPointOpts { max_iter: opts.max_iter.min(400), ..*opts };
    let eval = |t: f64| -> Result<f64> {
        let problem = problem_at(t)?;
        let mut start = vec![0.0; N_STATES];
        start[S_IDX] = 1.0;
        let (occ, _) = problem.converge(&start, grid, temperature, &fp)?;
        let h = build_h_tensor_n2(t, u0, u2, z)?;
        let mut occ_arr = [0.0; N_STATES];
        occ_arr.copy_from_slice(&occ);
        zone_gap(grid, SoftBranch::Max, |zeta| spectrum_n2_singlet(&h, lambda, &occ_arr, 2, zeta))
    };

    let t0 = t0_scale(u0, u2, z);
    let mut lo = 0.0;
    let mut hi = 1.5 * t0;
    match eval(hi) {
        Ok(g) if g > 0.0 => return Err(SboError::NoTransition { lo, hi }),
        _ => {}
    }
    for _ in 0..40 {
        if hi - lo <= 1e-6 * t0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match eval(mid) {
            Ok(g) if g > 1e-12 => lo = mid,
            Ok(_) => hi = mid,
            Err(e)
                if matches!(
                    e,
                    SboError::EvanescentModes { .. }
                        | SboError::BosePole { .. }
                        | SboError::UnstableOccupations { .. }
                ) =>
            {
                hi = mid
            }
            // Critical slowing of the occupation loop marks the boundary.
            Err(SboError::NotConverged { .. }) => {
                lo = mid;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(lo)
}

/// Regions of the n = 2 magnetic phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionN2 {
    Singlet,
    CantedNematic,
    Ferromagnetic,
}

impl std::fmt::Display for RegionN2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionN2::Singlet => write!(f, "singlet"),
            RegionN2::CantedNematic => write!(f, "canted-nematic"),
            RegionN2::Ferromagnetic => write!(f, "ferromagnetic"),
        }
    }
}

/// Label one (lambda, t) point with the frozen boundaries: the t = 0
/// seed is the singlet for lambda < 3 U2/2 and |2,2> above; a closed
/// excitation gap turns either seed into the canted nematic.
pub fn region_n2(lambda: f64, t: f64, u0: f64, u2: f64, z: f64, grid: &KGrid) -> Result<RegionN2> {
    let lam = lambda.abs(); // diagrams are symmetric under lambda -> -lambda
    if lam < 1.5 * u2 {
        let stable = match tc_singlet_frozen(lam, u0, u2, z) {
            Ok(tc) => t < tc,
            Err(_) => false,
        };
        Ok(if stable { RegionN2::Singlet } else { RegionN2::CantedNematic })
    } else {
        let gap = fm_gap(t, lam, u0, u2, z, grid);
        match gap {
            Ok(g) if g > 1e-12 => Ok(RegionN2::Ferromagnetic),
            Ok(_) => Ok(RegionN2::CantedNematic),
            Err(SboError::EvanescentModes { .. }) => Ok(RegionN2::CantedNematic),
            Err(e) => Err(e),
        }
    }
}
