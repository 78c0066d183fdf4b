//! Brute-force Fock-space oracle for `n` spin-1 bosons on one site.
//!
//! States are expanded over occupation vectors (n_{+1}, n_0, n_{-1}).
//! S_z is diagonal there, so S^2 is diagonalized inside each S_z block;
//! the resulting multiplets obey the (S + n even, 0 <= S <= n) counting
//! rule. Phases are fixed by making the highest-weight state (m = S)
//! positive on the lexicographically largest occupation vector and
//! generating lower m with S_minus.

use nalgebra::DMatrix;

/// Eigenvalue clustering tolerance when reading S(S+1) off the S^2 spectrum.
const S2_CLUSTER_TOL: f64 = 1e-10;

/// Occupation vectors (n_plus, n_zero, n_minus) with fixed total `n`,
/// in lexicographically descending order.
pub fn occupations(n: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(((n + 1) * (n + 2) / 2) as usize);
    for np in (0..=n).rev() {
        for n0 in (0..=(n - np)).rev() {
            out.push([np, n0, n - np - n0]);
        }
    }
    out
}

/// One (S, m) eigenstate of a boson-number sector, expanded over that
/// sector's occupation vectors.
#[derive(Debug, Clone)]
pub struct SectorState {
    pub s: u32,
    pub m: i32,
    pub coeffs: Vec<f64>,
}

/// Simultaneous (N, S^2, S_z) eigenbasis of the `n`-boson sector.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub n: u32,
    pub occs: Vec<[u32; 3]>,
    pub states: Vec<SectorState>,
}

fn occ_index(occs: &[[u32; 3]], target: [u32; 3]) -> usize {
    occs.iter().position(|&o| o == target).expect("occupation in sector")
}

/// Dense matrix of `a_sigma^dagger a_sigma'` within one sector
/// (sigma indices: 0 -> +1, 1 -> 0, 2 -> -1).
fn hop_matrix(occs: &[[u32; 3]], create: usize, destroy: usize) -> DMatrix<f64> {
    let dim = occs.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (col, &occ) in occs.iter().enumerate() {
        if occ[destroy] == 0 {
            continue;
        }
        let mut target = occ;
        target[destroy] -= 1;
        target[create] += 1;
        let row = occ_index(occs, target);
        let amp = ((occ[destroy]) as f64).sqrt() * ((target[create]) as f64).sqrt();
        m[(row, col)] += amp;
    }
    m
}

/// S_z, S_plus and S^2 matrices on the occupation basis of one sector.
pub fn spin_matrices(occs: &[[u32; 3]]) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let dim = occs.len();
    let mut sz = DMatrix::zeros(dim, dim);
    for (i, occ) in occs.iter().enumerate() {
        sz[(i, i)] = occ[0] as f64 - occ[2] as f64;
    }
    // S_plus = sqrt(2) (a+^dag a0 + a0^dag a-)
    let sp = (hop_matrix(occs, 0, 1) + hop_matrix(occs, 1, 2)) * 2.0_f64.sqrt();
    let s2 = sp.transpose() * &sp + &sz * &sz + &sz;
    (sz, sp, s2)
}

/// Build the simultaneous eigenbasis of the `n`-boson sector.
pub fn sector_basis(n: u32) -> SectorBasis {
    let occs = occupations(n);
    let dim = occs.len();
    let (_, sp, s2) = spin_matrices(&occs);
    let sm = sp.transpose();

    // Indices of the occupation vectors in each S_z block.
    let block = |m: i32| -> Vec<usize> {
        occs.iter()
            .enumerate()
            .filter(|(_, o)| o[0] as i32 - o[2] as i32 == m)
            .map(|(i, _)| i)
            .collect()
    };

    let mut states = Vec::with_capacity(dim);
    let mut s_values: Vec<u32> = (0..=n).filter(|s| (s + n) % 2 == 0).collect();
    s_values.sort_unstable();

    for &s in &s_values {
        // Highest-weight state from the m = S block of S^2.
        let idx = block(s as i32);
        let bdim = idx.len();
        let mut s2_block = DMatrix::zeros(bdim, bdim);
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                s2_block[(a, b)] = s2[(ia, ib)];
            }
        }
        let eig = s2_block.symmetric_eigen();
        let target = (s * (s + 1)) as f64;
        let mut hit = None;
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if (lam - target).abs() < S2_CLUSTER_TOL.max(1e-8 * target.max(1.0)) {
                assert!(hit.is_none(), "S^2 eigenvalue {target} duplicated in one S_z block");
                hit = Some(k);
            }
        }
        let k = hit.expect("every (S, n) multiplet with S + n even appears once");
        let mut full = vec![0.0; dim];
        for (a, &ia) in idx.iter().enumerate() {
            full[ia] = eig.eigenvectors[(a, k)];
        }
        // Sign convention: positive coefficient on the lexicographically
        // largest occupation vector carrying weight.
        let lead = full.iter().position(|c| c.abs() > 1e-8).expect("nonzero state");
        if full[lead] < 0.0 {
            for c in &mut full {
                *c = -*c;
            }
        }
        states.push(SectorState {
            s,
            m: s as i32,
            coeffs: full,
        });

        // Walk down the multiplet with S_minus.
        let mut current = states.last().unwrap().coeffs.clone();
        for m in (-(s as i32)..=(s as i32 - 1)).rev() {
            let v = DMatrix::from_column_slice(dim, 1, &current);
            let lowered = &sm * v;
            let norm = lowered.norm();
            assert!(norm > 1e-12, "S_minus annihilated an m > -S state");
            let coeffs: Vec<f64> = lowered.column(0).iter().map(|c| c / norm).collect();
            states.push(SectorState { s, m, coeffs: coeffs.clone() });
            current = coeffs;
        }
    }

    // Deterministic ordering: S ascending, then m descending.
    states.sort_by(|a, b| a.s.cmp(&b.s).then(b.m.cmp(&a.m)));
    SectorBasis { n, occs, states }
}

/// Count of (S, m) states allowed by the constraints
/// 0 <= S <= n, -S <= m <= S, S + n even.
pub fn constraint_state_count(n: u32) -> usize {
    (0..=n)
        .filter(|s| (s + n) % 2 == 0)
        .map(|s| 2 * s as usize + 1)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sector_dimensions() {
        for n in 0..=8 {
            let occs = occupations(n);
            assert_eq!(occs.len(), ((n + 1) * (n + 2) / 2) as usize);
            let basis = sector_basis(n);
            assert_eq!(basis.states.len(), occs.len());
            assert_eq!(basis.states.len(), constraint_state_count(n));
        }
    }

    #[test]
    fn single_boson_is_a_spin_triplet() {
        let basis = sector_basis(1);
        assert_eq!(basis.states.len(), 3);
        assert!(basis.states.iter().all(|s| s.s == 1));
        let ms: Vec<i32> = basis.states.iter().map(|s| s.m).collect();
        assert_eq!(ms, vec![1, 0, -1]);
    }

    #[test]
    fn two_boson_singlet_matches_hand_diagonalization() {
        // Diagonalizing the 6x6 S^2 by hand gives one S = 0 state and a
        // five-fold S = 2 multiplet; the singlet is
        // (a0^dag^2 - 2 a+^dag a-^dag)/sqrt(6) |vac>, i.e. coefficients
        // (sqrt(2) |020> - 2 |101>)/sqrt(6) up to overall sign.
        let basis = sector_basis(2);
        let n_s0 = basis.states.iter().filter(|s| s.s == 0).count();
        let n_s2 = basis.states.iter().filter(|s| s.s == 2).count();
        assert_eq!((n_s0, n_s2), (1, 5));

        let singlet = basis.states.iter().find(|s| s.s == 0).unwrap();
        let i_101 = basis.occs.iter().position(|&o| o == [1, 0, 1]).unwrap();
        let i_020 = basis.occs.iter().position(|&o| o == [0, 2, 0]).unwrap();
        let expect_101 = -2.0 / 6.0_f64.sqrt();
        let expect_020 = (2.0_f64).sqrt() / 6.0_f64.sqrt();
        let overlap = singlet.coeffs[i_101] * expect_101 + singlet.coeffs[i_020] * expect_020;
        assert_relative_eq!(overlap.abs(), 1.0, epsilon = 1e-12);
        // Phase convention: lexicographically largest occupation (1,0,1)
        // carries a positive coefficient.
        assert!(singlet.coeffs[i_101] > 0.0);
    }

    #[test]
    fn three_bosons_skip_s2_by_parity() {
        let basis = sector_basis(3);
        let mut counts = std::collections::BTreeMap::new();
        for st in &basis.states {
            *counts.entry(st.s).or_insert(0usize) += 1;
        }
        assert_eq!(counts.get(&1), Some(&3));
        assert_eq!(counts.get(&3), Some(&7));
        assert_eq!(counts.get(&2), None);
        assert_eq!(basis.states.len(), 10);
    }

    #[test]
    fn states_are_sharp_s2_and_sz_eigenstates() {
        for n in 0..=5 {
            let basis = sector_basis(n);
            let (sz, _, s2) = spin_matrices(&basis.occs);
            for st in &basis.states {
                let v = DMatrix::from_column_slice(st.coeffs.len(), 1, &st.coeffs);
                let s2v = &s2 * &v;
                let szv = &sz * &v;
                let target = (st.s * (st.s + 1)) as f64;
                assert!((&s2v - &v * target).norm() < 1e-9);
                assert!((&szv - &v * st.m as f64).norm() < 1e-10);
            }
        }
    }
}
