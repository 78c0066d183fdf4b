//! Integration checks of the MI-SF phase module: the one-particle
//! response bound, order-classifier invariances, two-particle response
//! against a Fock-space oracle, and sweep behavior.

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use spinor_sbo::green::hermitian_eigen3;
use spinor_sbo::misf::{self, Method, OrderVector, PhaseLabel, ScBoundaryOpts};
use spinor_sbo::params::on_site_energy;
use spinor_sbo::{KGrid, ModelParams, SiteBasis};

fn random_multiplet_state(
    rng: &mut ChaCha8Rng,
    basis: &SiteBasis,
    p: &ModelParams,
    s: u32,
    n: u32,
) -> spinor_sbo::green::TableState {
    let coeffs: Vec<(i32, Complex64)> = (-(s as i32)..=s as i32)
        .map(|m| {
            (
                m,
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            )
        })
        .collect();
    misf::superposition_ground(basis, p, s, n, &coeffs).unwrap()
}

/// Random ferromagnetic-multiplet superpositions never push the
/// one-particle response past lambda_m = (n+1) Omega2 + n Omega3.
#[test]
fn response_bound_for_random_superpositions() {
    let basis = SiteBasis::build(6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=4u32 {
        let p = ModelParams::new(1.0, -0.1, (f64::from(n) - 0.55) * 0.9, 2);
        let lambda_m = misf::fm_lambda_max(n, &p).unwrap();
        for _ in 0..25 {
            let ground = random_multiplet_state(&mut rng, &basis, &p, n, n);
            let n11 = misf::frozen_n11(&basis, &p, ground).unwrap();
            let (vals, _) = hermitian_eigen3(&n11);
            // Honest sign: the response eigenvalues are -vals.
            assert!(-vals[0] <= lambda_m + 1e-10, "n = {n}");
        }
    }
}

/// The stretched state saturates the bound and the dominant eigenvector
/// satisfies the ferromagnetic conditions; spin-coherent rotations share
/// both properties and carry |<S>|^2 = n^2.
#[test]
fn coherent_states_saturate_the_bound() {
    let basis = SiteBasis::build(6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3u32 {
        let p = ModelParams::new(1.0, -0.1, (f64::from(n) - 0.5) * 0.9, 2);
        let lambda_m = misf::fm_lambda_max(n, &p).unwrap();
        for _ in 0..10 {
            let theta: f64 = rng.random::<f64>() * std::f64::consts::PI;
            let phi: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
            // Spin-coherent superposition of the stretched multiplet.
            let coeffs: Vec<(i32, Complex64)> = (-(n as i32)..=n as i32)
                .map(|m| {
                    let k = (n as i32 - m) as u32; // lowering steps from m = n
                    let binom = (0..k).fold(1.0_f64, |acc, j| {
                        acc * f64::from(2 * n - j) / f64::from(j + 1)
                    });
                    let amp = binom.sqrt()
                        * (theta / 2.0).cos().powi((n as i32 + m) as i32)
                        * (theta / 2.0).sin().powi(k as i32);
                    let phase = Complex64::from_polar(1.0, -phi * k as f64);
                    (m, phase * amp)
                })
                .collect();
            let ground = misf::superposition_ground(&basis, &p, n, n, &coeffs).unwrap();
            // |<S>|^2 = n^2 from the Fock oracle.
            let components: Vec<(usize, Complex64)> = ground.components.clone();
            let sv = basis.spin_vector_expectation(&components).unwrap();
            let s2: f64 = sv.iter().map(|x| x * x).sum();
            assert_relative_eq!(s2, f64::from(n * n), epsilon = 1e-9);

            let n11 = misf::frozen_n11(&basis, &p, ground).unwrap();
            let (vals, vecs) = hermitian_eigen3(&n11);
            assert_relative_eq!(-vals[0], lambda_m, epsilon = 1e-9 * lambda_m);
            // Eigenvector conditions: 2 R_{1,0} R_{-1,0} = 1 in the
            // (chi_+, chi_0, chi_-) components.
            let chi = vecs[0];
            if chi[1].norm() > 1e-8 {
                let r10 = chi[0] / chi[1];
                let r_m10 = chi[2] / chi[1];
                assert!((2.0 * r10 * r_m10 - Complex64::ONE).norm() < 1e-8);
                let order = OrderVector::new([chi[0], chi[1], chi[2]]);
                assert!(order.theta_pol() < 1e-9);
            }
        }
    }
}

/// Two-particle response against a brute-force Fock oracle: the response
/// of |0,0;n> to the squared excitation operator, summed over both
/// two-particle shells, must follow 2(L1+L3) + coeff * theta^2.
#[test]
fn two_particle_response_matches_fock_oracle() {
    let basis = SiteBasis::build(8);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in [2u32, 4] {
        let p = ModelParams::new(1.0, 0.1, f64::from(n) - 0.6, 2);
        let c = misf::two_particle_constants(n, &p).unwrap();
        let ground = basis.require(0, 0, n).unwrap();
        let eg = on_site_energy(0, n, &p).unwrap();
        for _ in 0..6 {
            // Random normalized complex order vector (chi_+, chi_0, chi_-).
            let mut chi = [Complex64::ZERO; 3];
            for comp in &mut chi {
                *comp = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            }
            let order = OrderVector::new(chi);
            let chi = order.chi;
            let theta = order.theta_pol();

            // <x| A^2 |g> over the (n-2)-shell and <x| (A^dag)^2 |g> over
            // the (n+2)-shell, via two ladder steps through the
            // intermediate sector.
            let mut response = 0.0;
            for (x_idx, x) in basis.states().iter().enumerate() {
                let (shell_down, shell_up) = (n >= 2 && x.n == n - 2, x.n == n + 2);
                if !shell_down && !shell_up {
                    continue;
                }
                let mut amp = Complex64::ZERO;
                for (mid_idx, mid) in basis.states().iter().enumerate() {
                    if shell_down && mid.n == n - 1 {
                        for (si, &sigma) in [1i8, 0, -1].iter().enumerate() {
                            for (sj, &tau) in [1i8, 0, -1].iter().enumerate() {
                                amp += chi[si]
                                    * chi[sj]
                                    * basis.annihilation(sigma, x_idx, mid_idx)
                                    * basis.annihilation(tau, mid_idx, ground);
                            }
                        }
                    }
                    if shell_up && mid.n == n + 1 {
                        for (si, &sigma) in [1i8, 0, -1].iter().enumerate() {
                            for (sj, &tau) in [1i8, 0, -1].iter().enumerate() {
                                amp += chi[si].conj()
                                    * chi[sj].conj()
                                    * basis.creation(sigma, x_idx, mid_idx)
                                    * basis.creation(tau, mid_idx, ground);
                            }
                        }
                    }
                }
                let de = on_site_energy(x.s, x.n, &p).unwrap() - eg;
                response += amp.norm_sqr() / de;
            }
            let expect = misf::two_particle_response(&c, theta);
            assert_relative_eq!(response, expect, epsilon = 1e-9, max_relative = 1e-9);
        }
    }
}

/// Sweeps: the antiferromagnetic diagram shows lobes 1..3 with the even
/// lobe widest; every ferromagnetic lobe is labeled ferro; U2 = 0 windows
/// reduce to the scalar (n-1, n) U0 intervals.
#[test]
fn sweep_diagram_structure() {
    let basis = SiteBasis::build(6);
    let grid = KGrid::new(2, 8).unwrap();

    let p = ModelParams::new(1.0, 0.1, 0.0, 2);
    let mu: Vec<f64> = (0..120).map(|i| 0.01 + 2.98 * i as f64 / 119.0).collect();
    let opts = ScBoundaryOpts::for_params(&p);
    let records = misf::sweep_diagram(&basis, &p, &mu, Method::Analytic, &grid, &opts);
    let lobes: std::collections::BTreeSet<u32> =
        records.iter().filter_map(|r| r.lobe_n).collect();
    // mu up to 3 U0 sees lobes 1..3 plus the opening sliver of lobe 4.
    assert!(lobes.is_superset(&[1u32, 2, 3].into_iter().collect()));
    assert!(records
        .iter()
        .filter(|r| r.error.is_none())
        .all(|r| r.label == Some(PhaseLabel::SfPolar)));
    let width = |n: u32| {
        let (lo, hi) = misf::lobe_window_t0(n, &p).unwrap().unwrap();
        hi - lo
    };
    assert!(width(2) > width(1) && width(2) > width(3));

    let pf = ModelParams::new(1.0, -0.1, 0.0, 2);
    let muf: Vec<f64> = (0..60).map(|i| 0.01 + 3.5 * i as f64 / 59.0).collect();
    let optsf = ScBoundaryOpts::for_params(&pf);
    let fm_records = misf::sweep_diagram(&basis, &pf, &muf, Method::Analytic, &grid, &optsf);
    assert!(fm_records
        .iter()
        .filter(|r| r.error.is_none())
        .all(|r| r.label == Some(PhaseLabel::SfFerro)));

    // Spin-blind cross-check of the windows at U2 = 0.
    let p0 = ModelParams::new(1.0, 0.0, 0.0, 2);
    for n in 1..=3u32 {
        let (lo, hi) = misf::lobe_window_t0(n, &p0).unwrap().unwrap();
        assert_relative_eq!(lo, f64::from(n - 1), epsilon = 1e-12);
        assert_relative_eq!(hi, f64::from(n), epsilon = 1e-12);
    }
}

/// t_c(mu) is continuous inside a lobe window and closes at both edges.
#[test]
fn boundary_continuity_inside_the_lobe() {
    let p = ModelParams::new(1.0, 0.1, 0.0, 2);
    let (lo, hi) = misf::lobe_window_t0(2, &p).unwrap().unwrap();
    let mut prev: Option<f64> = None;
    for i in 0..=200 {
        let mu = lo + (hi - lo) * (0.001 + 0.998 * i as f64 / 200.0);
        let tc = misf::boundary_afm(2, &p.with_mu(mu)).unwrap();
        if let Some(last) = prev {
            assert!((tc - last).abs() < 5e-3, "jump at mu = {mu}");
        }
        prev = Some(tc);
    }
    assert!(misf::boundary_afm(2, &p.with_mu(lo + 1e-10)).unwrap() < 1e-8);
    assert!(misf::boundary_afm(2, &p.with_mu(hi - 1e-10)).unwrap() < 1e-8);
}

proptest! {
    /// Theta_pol is invariant under a global phase and under spin
    /// rotations about z.
    #[test]
    fn classifier_invariance(
        re in proptest::array::uniform3(-1.0_f64..1.0),
        im in proptest::array::uniform3(-1.0_f64..1.0),
        global in 0.0_f64..std::f64::consts::TAU,
        rot in 0.0_f64..std::f64::consts::TAU,
    ) {
        let chi = [
            Complex64::new(re[0], im[0]),
            Complex64::new(re[1], im[1]),
            Complex64::new(re[2], im[2]),
        ];
        let norm: f64 = chi.iter().map(|c| c.norm_sqr()).sum();
        prop_assume!(norm > 1e-3);
        let base = OrderVector::new(chi);
        let g = Complex64::from_polar(1.0, global);
        // S_z rotation multiplies chi_sigma by exp(-i sigma rot).
        let rz = |sigma: f64| Complex64::from_polar(1.0, -sigma * rot);
        let transformed = OrderVector::new([
            g * rz(1.0) * chi[0],
            g * rz(0.0) * chi[1],
            g * rz(-1.0) * chi[2],
        ]);
        prop_assert!((base.theta_pol() - transformed.theta_pol()).abs() < 1e-10);
        prop_assert!(base.theta_pol() <= 1.0 + 1e-12);
    }
}
