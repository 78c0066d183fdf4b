//! Acceptance suite. One test per criterion; each prints a PASS line
//! with the measured figure once its assertions hold.
//!
//! Run with `cargo test -p spinor-sbo --release --test acceptance -- --nocapture`.

use std::time::Instant;

use approx::assert_relative_eq;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use spinor_sbo::green::hermitian_eigen3;
use spinor_sbo::green::spectral::FixedPointOpts;
use spinor_sbo::misf::{self, MisfScenario, OrderLabel, OrderVector, ScBoundaryOpts};
use spinor_sbo::mott_spin::{n1, n2, SpinExchangeParams};
use spinor_sbo::{KGrid, ModelParams, SiteBasis};

fn basis() -> SiteBasis {
    SiteBasis::build(7)
}

/// Criterion 1: numeric pole-search t_c matches the closed forms for
/// n <= 4 over 20 random parameter sets each, |dt_c| < 1e-8 U0, < 10 s.
#[test]
fn criterion_1_closed_form_boundaries() {
    let start = Instant::now();
    let basis = basis();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=4u32 {
        for _ in 0..20 {
            let dim = rng.random_range(1..=3u32);
            // Ferromagnetic lobe.
            let u2 = -(0.02 + 0.28 * rng.random::<f64>());
            let p = ModelParams::new(1.0, u2, 0.0, dim);
            let (lo, hi) = misf::lobe_window_t0(n, &p).unwrap().unwrap();
            let mu = lo + (0.05 + 0.9 * rng.random::<f64>()) * (hi - lo);
            let p = p.with_mu(mu);
            let closed = misf::boundary_ferro(n, &p).unwrap();
            let numeric = misf::numeric_tc(&basis, &p, misf::default_ground(&basis, &p, n).unwrap()).unwrap();
            worst = worst.max((closed - numeric).abs());
            cases += 1;

            // Antiferromagnetic lobe (odd lobes need U2 < 0.5 U0).
            let u2 = if n % 2 == 1 {
                0.02 + 0.4 * rng.random::<f64>()
            } else {
                0.02 + 0.28 * rng.random::<f64>()
            };
            let p = ModelParams::new(1.0, u2, 0.0, dim);
            let (lo, hi) = misf::lobe_window_t0(n, &p).unwrap().unwrap();
            let mu = lo + (0.05 + 0.9 * rng.random::<f64>()) * (hi - lo);
            let p = p.with_mu(mu);
            let closed = misf::boundary_afm(n, &p).unwrap();
            let numeric = misf::numeric_tc(&basis, &p, misf::default_ground(&basis, &p, n).unwrap()).unwrap();
            worst = worst.max((closed - numeric).abs());
            cases += 1;
        }
    }
    assert!(worst < 1e-8, "worst |dt_c| = {worst:e}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 1: PASS — {cases} boundaries, worst |dt_c| = {worst:.2e} U0 in {elapsed:?}"
    );
}

/// Criterion 2: order-symmetry classification in all three sectors.
#[test]
fn criterion_2_symmetry_classification() {
    let basis = basis();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // Odd AFM lobes: maximal-classifier superpositions give Theta = 1.
    let mut worst_theta: f64 = 0.0;
    for n in [1u32, 3] {
        let p = ModelParams::new(1.0, 0.1, f64::from(n) - 0.6, 2);
        for _ in 0..20 {
            // c_{-1} = -c_1 keeps |c0^2 - 2 c1 c-1| = 1.
            let c1 = 0.7 * (rng.random::<f64>() - 0.5);
            let c0 = (1.0 - 2.0 * c1 * c1).sqrt();
            let ground = misf::superposition_ground(
                &basis,
                &p,
                1,
                n,
                &[
                    (0, Complex64::new(c0, 0.0)),
                    (1, Complex64::new(c1, 0.0)),
                    (-1, Complex64::new(-c1, 0.0)),
                ],
            )
            .unwrap();
            let n11 = misf::frozen_n11(&basis, &p, ground).unwrap();
            let c = misf::classify_one_particle(&n11).unwrap();
            assert_eq!(c.label, OrderLabel::Polar);
            worst_theta = worst_theta.max((c.theta_pol - 1.0).abs());
        }
    }
    assert!(worst_theta < 1e-9);

    // Ferromagnetic sector: spin-coherent ground states satisfy the
    // eigenvector conditions and carry |<S>|^2 = n^2.
    let mut worst_r: f64 = 0.0;
    let mut worst_s2: f64 = 0.0;
    for n in 1..=3u32 {
        let p = ModelParams::new(1.0, -0.1, (f64::from(n) - 0.5) * 0.9, 2);
        for _ in 0..10 {
            let theta = rng.random::<f64>() * 2.5 + 0.2;
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            let coeffs: Vec<(i32, Complex64)> = (-(n as i32)..=n as i32)
                .map(|m| {
                    let k = (n as i32 - m) as u32;
                    let binom = (0..k).fold(1.0_f64, |acc, j| {
                        acc * f64::from(2 * n - j) / f64::from(j + 1)
                    });
                    let amp = binom.sqrt()
                        * (theta / 2.0).cos().powi((n as i32 + m) as i32)
                        * (theta / 2.0).sin().powi(k as i32);
                    (m, Complex64::from_polar(amp, -phi * k as f64))
                })
                .collect();
            let ground = misf::superposition_ground(&basis, &p, n, n, &coeffs).unwrap();
            let sv = basis.spin_vector_expectation(&ground.components).unwrap();
            let s2: f64 = sv.iter().map(|x| x * x).sum();
            worst_s2 = worst_s2.max((s2 - f64::from(n * n)).abs());

            let n11 = misf::frozen_n11(&basis, &p, ground).unwrap();
            let (_, vecs) = hermitian_eigen3(&n11);
            let chi = vecs[0];
            if chi[1].norm() > 1e-6 {
                let r10 = chi[0] / chi[1];
                let rm10 = chi[2] / chi[1];
                worst_r = worst_r.max((Complex64::ONE - 2.0 * r10 * rm10).norm());
            }
        }
    }
    assert!(worst_r < 1e-9, "worst |1 - 2 R10 R-10| = {worst_r:e}");
    assert!(worst_s2 < 1e-9, "worst |<S>^2 - n^2| = {worst_s2:e}");

    // Even AFM lobes: positive two-particle coefficient throughout.
    for n in [2u32, 4] {
        for k in 1..=6 {
            let u2 = 0.05 * f64::from(k);
            let p = ModelParams::new(1.0, u2, 0.0, 2);
            let (lo, hi) = misf::lobe_window_t0(n, &p).unwrap().unwrap();
            let pm = p.with_mu(0.5 * (lo + hi));
            let c = misf::two_particle_constants(n, &pm).unwrap();
            assert!(misf::two_particle_coefficient(&c) > 0.0, "n = {n}, u2 = {u2}");
            let cls = misf::classify_two_particle(n, &pm).unwrap();
            assert_eq!(cls.label, OrderLabel::Polar);
        }
    }
    println!(
        "criterion 2: PASS — polar Theta dev {worst_theta:.2e}, ferro conditions dev {worst_r:.2e}, <S>^2 dev {worst_s2:.2e}, even-lobe coefficient positive"
    );
}

/// Criterion 3: the one-particle response of any ferromagnetic-lobe
/// superposition is bounded by lambda_m (positive-semidefiniteness).
#[test]
fn criterion_3_response_bound_psd() {
    let basis = basis();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for n in 1..=4u32 {
        let p = ModelParams::new(1.0, -0.12, (f64::from(n) - 0.45) * 0.88, 2);
        let lambda_m = misf::fm_lambda_max(n, &p).unwrap();
        for _ in 0..100 {
            let coeffs: Vec<(i32, Complex64)> = (-(n as i32)..=n as i32)
                .map(|m| {
                    (
                        m,
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                    )
                })
                .collect();
            let ground = misf::superposition_ground(&basis, &p, n, n, &coeffs).unwrap();
            let n11 = misf::frozen_n11(&basis, &p, ground).unwrap();
            // lambda_m I - (-N11) is PSD iff min eig(lambda_m I + N11) >= 0.
            let shifted = n11 + nalgebra::Matrix3::identity() * Complex64::new(lambda_m, 0.0);
            let (vals, _) = hermitian_eigen3(&shifted);
            worst = worst.min(vals[0]);
        }
    }
    assert!(worst >= -1e-10, "min eigenvalue {worst:e}");
    println!("criterion 3: PASS — 400 random superpositions, min eigenvalue {worst:.2e} >= -1e-10");
}

/// Criterion 4: n = 2 lobe boundaries: frozen t_c/t0 = 0.75 to 1e-8 from
/// blind gap closure; self-consistent lambda = 0 value within 0.70 +- 0.05
/// at L = 64 in under five minutes.
#[test]
fn criterion_4_n2_quantitative() {
    let start = Instant::now();
    let (u0, u2, z) = (1.0, 0.04, 4.0);
    let grid16 = KGrid::new(2, 16).unwrap();
    let t0 = n2::t0_scale(u0, u2, z);
    let frozen = n2::tc_singlet_numeric(0.0, u0, u2, z, &grid16).unwrap() / t0;
    assert_relative_eq!(frozen, 0.75, epsilon = 1e-8);

    let grid64 = KGrid::new(2, 64).unwrap();
    let sc = n2::tc_singlet_self_consistent(0.0, u0, u2, z, &grid64, 0.0, &FixedPointOpts::default())
        .unwrap()
        / t0;
    assert!((sc - 0.70).abs() <= 0.05 + 1e-12, "self-consistent t_c/t0 = {sc}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0);
    println!(
        "criterion 4: PASS — frozen t_c/t0 = {frozen:.10} (= 0.75), self-consistent {sc:.4} in 0.70 +- 0.05, {elapsed:?}"
    );
}

/// Criterion 5: n = 1 lobe: blind gap-closure bisection reproduces the
/// closed nematic boundary over a 10 x 10 grid to 1e-8, and the frozen
/// q_c equals 2 z (J1 - J2) to 1e-10.
#[test]
fn criterion_5_n1_boundary() {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        // Couplings from antiferro-like to strongly ferro-like.
        let j1 = 0.05 + 0.01 * i as f64;
        let xp = SpinExchangeParams::new(j1, 0.04, 4.0);
        for k in 0..10 {
            let q = (0.3 + 0.6 * k as f64) * xp.z * (xp.j1 - xp.j2).abs().max(0.02);
            let rhs = n1::nematic_boundary_rhs(&xp, q);
            if rhs <= 0.0 {
                continue;
            }
            let gap = |lambda: f64| -> f64 {
                let xpl = xp.with_zeeman(lambda, q);
                let mut best = f64::INFINITY;
                for s in 0..=64 {
                    let zeta = -xp.z + 2.0 * xp.z * s as f64 / 64.0;
                    match n1::spectrum_n1_frozen(&xpl, zeta) {
                        Ok((_, hi)) => best = best.min(hi),
                        Err(_) => return -1.0,
                    }
                }
                best
            };
            let (mut lo, mut hi) = (0.0, 4.0 * rhs.sqrt().max(1.0));
            assert!(gap(lo) > 0.0 && gap(hi) <= 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if gap(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let lambda_num = 0.5 * (lo + hi);
            worst = worst.max((lambda_num * lambda_num - rhs).abs() / rhs.max(1e-12));
        }
    }
    assert!(worst < 1e-8, "worst boundary mismatch {worst:e}");

    let grid = KGrid::new(2, 8).unwrap();
    let xp = SpinExchangeParams::new(0.10, 0.04, 4.0);
    let r = n1::qc_self_consistent(&xp, &grid, 0.0, false, &FixedPointOpts::default()).unwrap();
    assert_relative_eq!(r.q_c, 2.0 * xp.z * (xp.j1 - xp.j2), epsilon = 1e-10);
    println!(
        "criterion 5: PASS — closed boundary reproduced to {worst:.2e} over the grid; frozen q_c = 2z(J1-J2)"
    );
}

/// Criterion 6: t = 0 lobe geometry. The odd antiferromagnetic width is
/// U0 - 2 U2 and odd lobes vanish for U2 >= 0.5 U0. The even width from
/// the ground-state-rule oracle is U0 + 2 U2 (the stated U0 + U2 is
/// inconsistent with the on-site energy minimization that defines the
/// windows; see the even-lobe edge values below).
#[test]
fn criterion_6_lobe_geometry() {
    for k in 1..=4 {
        let u2 = 0.1 * f64::from(k);
        let p = ModelParams::new(1.0, u2, 0.0, 2);
        for n in [1u32, 3] {
            match misf::lobe_window_t0(n, &p).unwrap() {
                Some((lo, hi)) => {
                    assert!(u2 < 0.5, "odd lobe must be empty at u2 = {u2}");
                    assert_relative_eq!(hi - lo, 1.0 - 2.0 * u2, epsilon = 1e-12);
                }
                None => assert!(u2 >= 0.5),
            }
        }
        for n in [2u32, 4] {
            let (lo, hi) = misf::lobe_window_t0(n, &p).unwrap().unwrap();
            assert_relative_eq!(hi - lo, 1.0 + 2.0 * u2, epsilon = 1e-12);
            // Edges sit where the on-site ground energies cross.
            assert_relative_eq!(lo, f64::from(n - 1) - 2.0 * u2, epsilon = 1e-12);
            assert_relative_eq!(hi, f64::from(n), epsilon = 1e-12);
        }
    }
    let p = ModelParams::new(1.0, 0.5, 0.0, 2);
    assert!(misf::lobe_window_t0(1, &p).unwrap().is_none());
    println!(
        "criterion 6: PASS — odd width U0 - 2U2, odd lobes empty for U2 >= 0.5 U0, even width U0 + 2U2 (energy-minimization oracle; deviates from the quoted U0 + U2)"
    );
}

/// Criterion 7: analytic response constants against the fully numeric
/// Fock-oracle construction, n <= 4, to 1e-10.
#[test]
fn criterion_7_oracle_equivalence() {
    let basis = basis();
    let mut worst: f64 = 0.0;
    // Ferromagnetic lobes: diagonal response with maximum lambda_m.
    for n in 1..=4u32 {
        let p = ModelParams::new(1.0, -0.1, (f64::from(n) - 0.55) * 0.9, 2);
        let n11 = misf::frozen_n11(&basis, &p, misf::default_ground(&basis, &p, n).unwrap()).unwrap();
        let (vals, _) = hermitian_eigen3(&n11);
        worst = worst.max((-vals[0] - misf::fm_lambda_max(n, &p).unwrap()).abs());
    }
    // Odd AFM lobes: the three eigenvalues at a generic superposition.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1u32, 3] {
        let p = ModelParams::new(1.0, 0.12, f64::from(n) - 0.55, 2);
        let consts = misf::afm_odd_constants(n, &p).unwrap();
        for _ in 0..10 {
            let c1 = 0.6 * (rng.random::<f64>() - 0.5);
            let cm1 = 0.6 * (rng.random::<f64>() - 0.5);
            let c0 = (1.0 - c1 * c1 - cm1 * cm1).sqrt();
            let rho = (c0 * c0 - 2.0 * c1 * cm1).abs();
            let ground = misf::superposition_ground(
                &basis,
                &p,
                1,
                n,
                &[
                    (0, Complex64::new(c0, 0.0)),
                    (1, Complex64::new(c1, 0.0)),
                    (-1, Complex64::new(cm1, 0.0)),
                ],
            )
            .unwrap();
            let n11 = misf::frozen_n11(&basis, &p, ground).unwrap();
            let (vals, _) = hermitian_eigen3(&n11);
            let mut numeric: Vec<f64> = (0..3).map(|k| -vals[k]).collect();
            numeric.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut analytic = misf::afm_odd_eigenvalues(&consts, rho).to_vec();
            analytic.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (x, y) in numeric.iter().zip(&analytic) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    // Even AFM lobes: isotropic response N0.
    for n in [2u32, 4] {
        let p = ModelParams::new(1.0, 0.1, f64::from(n) - 0.6, 2);
        let n0 = misf::afm_even_n0(n, &p).unwrap();
        let n11 = misf::frozen_n11(&basis, &p, misf::default_ground(&basis, &p, n).unwrap()).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let expect = if a == b { -n0 } else { 0.0 };
                worst = worst.max((n11[(a, b)].re - expect).abs());
                worst = worst.max(n11[(a, b)].im.abs());
            }
        }
    }
    assert!(worst < 1e-10, "worst oracle mismatch {worst:e}");
    println!("criterion 7: PASS — analytic vs Fock-oracle response entries, worst {worst:.2e}");
}

/// Criterion 8: self-consistency sanity: normalized occupations, the
/// frozen loop reproducing the closed forms, and a monotone
/// finite-temperature shift for the external-field scenario.
#[test]
fn criterion_8_self_consistency() {
    let basis = basis();

    // Converged occupations are normalized and physical.
    let p = ModelParams::new(1.0, 0.1, 0.4, 2);
    let grid = KGrid::new(2, 32).unwrap();
    let opts = ScBoundaryOpts::for_params(&p);
    let b = misf::self_consistent_boundary(&basis, &p, MisfScenario::AfmOdd { n: 1 }, &grid, &opts)
        .unwrap();
    let total: f64 = b.occupations.iter().sum();
    assert!((total - 1.0).abs() < 1e-8);
    assert!(b.occupations.iter().all(|&d| (0.0..=1.0).contains(&d)));

    // Channels disabled: the loop degenerates to the closed forms.
    let mut frozen_opts = ScBoundaryOpts::for_params(&p);
    frozen_opts.fluctuations = false;
    let mut worst: f64 = 0.0;
    for (scenario, pm) in [
        (MisfScenario::AfmOdd { n: 1 }, ModelParams::new(1.0, 0.1, 0.4, 2)),
        (MisfScenario::AfmEven { n: 2 }, ModelParams::new(1.0, 0.1, 1.4, 2)),
        (MisfScenario::Fm { n: 1 }, ModelParams::new(1.0, -0.1, 0.405, 2)),
    ] {
        let fo = ScBoundaryOpts { fluctuations: false, ..ScBoundaryOpts::for_params(&pm) };
        let b = misf::self_consistent_boundary(&basis, &pm, scenario, &grid, &fo).unwrap();
        let closed = misf::boundary_analytic(scenario.lobe_n(), &pm).unwrap();
        worst = worst.max((b.t_c - closed).abs());
    }
    assert!(worst < 1e-6, "frozen-loop mismatch {worst:e}");

    // External-field scenario: t_c shifts monotonically with T.
    let pf = ModelParams::new(1.0, 0.04, 0.4, 2).with_eta(0.05);
    let mut tcs = Vec::new();
    for temp in [0.0, 0.05, 0.1] {
        let pt = pf.with_temperature(temp);
        let o = ScBoundaryOpts::for_params(&pt);
        let b = misf::self_consistent_boundary(&basis, &pt, MisfScenario::AfmFieldN1, &grid, &o)
            .unwrap();
        tcs.push(b.t_c);
    }
    assert!(
        (tcs[0] > tcs[1] && tcs[1] > tcs[2]) || (tcs[0] < tcs[1] && tcs[1] < tcs[2]),
        "t_c(T) not monotone: {tcs:?}"
    );
    println!(
        "criterion 8: PASS — sum D = {total:.10}, frozen loop within {worst:.2e} of closed forms, field-scenario t_c(T) monotone {tcs:?}"
    );
}
