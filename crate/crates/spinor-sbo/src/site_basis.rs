//! On-site spinor eigenbasis |S, m; n> with annihilation/creation
//! matrix-element tables, built from the Fock-space oracle in [`crate::fock`].

use std::collections::HashMap;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::SboError;
use crate::fock::{self, SectorBasis};
use crate::Result;

/// Matrix elements with |value| below this are snapped to exact zero so
/// selection rules hold exactly downstream.
pub const ELEMENT_SNAP_TOL: f64 = 1e-12;

/// Quantum numbers (S, m, n) of one on-site eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinSiteState {
    pub s: u32,
    pub m: i32,
    pub n: u32,
}

impl SpinSiteState {
    /// Validates 0 <= S <= n, -S <= m <= S and S + n even.
    pub fn new(s: u32, m: i32, n: u32) -> Result<Self> {
        if s > n {
            return Err(SboError::InvalidState { s, m, n, constraint: "S <= n" });
        }
        if m.unsigned_abs() > s {
            return Err(SboError::InvalidState { s, m, n, constraint: "-S <= m <= S" });
        }
        if (s + n) % 2 != 0 {
            return Err(SboError::InvalidState { s, m, n, constraint: "S + n even" });
        }
        Ok(Self { s, m, n })
    }
}

impl std::fmt::Display for SpinSiteState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{},{};{}>", self.s, self.m, self.n)
    }
}

fn sigma_idx(sigma: i8) -> usize {
    match sigma {
        1 => 0,
        0 => 1,
        -1 => 2,
        _ => panic!("sigma must be one of -1, 0, +1"),
    }
}

/// All spin components in table order (+1, 0, -1).
pub const SIGMAS: [i8; 3] = [1, 0, -1];

/// Enumerated on-site states up to `n_max` together with the tables
/// `c(sigma, bra, ket) = <bra| a_sigma |ket>` and the derived creation
/// table `d(sigma, bra, ket) = c(sigma, ket, bra)`.
///
/// Immutable after construction; shared concurrent reads are safe.
pub struct SiteBasis {
    n_max: u32,
    states: Vec<SpinSiteState>,
    index: HashMap<SpinSiteState, usize>,
    sectors: Vec<SectorBasis>,
    /// Offset of each sector's states in `states`.
    sector_offset: Vec<usize>,
    /// Nonzero annihilation elements keyed by (sigma index, bra, ket).
    c_map: HashMap<(usize, usize, usize), f64>,
}

impl SiteBasis {
    /// Diagonalize every boson sector up to `n_max` (default used by the
    /// solvers is 8) and tabulate all annihilation matrix elements.
    pub fn build(n_max: u32) -> Self {
        let sectors: Vec<SectorBasis> = (0..=n_max).map(fock::sector_basis).collect();
        let mut states = Vec::new();
        let mut sector_offset = Vec::with_capacity(sectors.len());
        for sector in &sectors {
            sector_offset.push(states.len());
            for st in &sector.states {
                states.push(SpinSiteState { s: st.s, m: st.m, n: sector.n });
            }
        }
        let index: HashMap<_, _> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();

        // a_sigma maps the n-sector to the (n-1)-sector; tabulate
        // <bra| a_sigma |ket> between eigenstates.
        let mut c_map = HashMap::new();
        for n in 1..=n_max {
            let ket_sector = &sectors[n as usize];
            let bra_sector = &sectors[(n - 1) as usize];
            for (si, &sigma) in SIGMAS.iter().enumerate() {
                // Occupation-space action of a_sigma.
                let mode = sigma_idx(sigma);
                for (ki, kst) in ket_sector.states.iter().enumerate() {
                    // Apply a_sigma to the ket expansion.
                    let mut image = vec![0.0; bra_sector.occs.len()];
                    for (oi, &occ) in ket_sector.occs.iter().enumerate() {
                        if occ[mode] == 0 || kst.coeffs[oi] == 0.0 {
                            continue;
                        }
                        let mut t = occ;
                        t[mode] -= 1;
                        let ti = bra_sector.occs.iter().position(|&o| o == t).unwrap();
                        image[ti] += kst.coeffs[oi] * (occ[mode] as f64).sqrt();
                    }
                    for (bi, bst) in bra_sector.states.iter().enumerate() {
                        if bst.m != kst.m - i32::from(sigma) {
                            continue;
                        }
                        let val: f64 = bst.coeffs.iter().zip(&image).map(|(a, b)| a * b).sum();
                        if val.abs() > ELEMENT_SNAP_TOL {
                            let bra_global = sector_offset[(n - 1) as usize] + bi;
                            let ket_global = sector_offset[n as usize] + ki;
                            c_map.insert((si, bra_global, ket_global), val);
                        }
                    }
                }
            }
        }

        Self { n_max, states, index, sectors, sector_offset, c_map }
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn states(&self) -> &[SpinSiteState] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> SpinSiteState {
        self.states[idx]
    }

    pub fn index_of(&self, state: &SpinSiteState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Index lookup that errors with the offending quantum numbers.
    pub fn require(&self, s: u32, m: i32, n: u32) -> Result<usize> {
        let st = SpinSiteState::new(s, m, n)?;
        self.index_of(&st).ok_or_else(|| {
            SboError::Invalid(format!("state {st} exceeds n_max = {}", self.n_max))
        })
    }

    /// `<bra| a_sigma |ket>` by global state index; exact zero whenever the
    /// boson numbers do not satisfy n_bra = n_ket - 1.
    pub fn annihilation(&self, sigma: i8, bra: usize, ket: usize) -> f64 {
        self.c_map
            .get(&(sigma_idx(sigma), bra, ket))
            .copied()
            .unwrap_or(0.0)
    }

    /// `<bra| a_sigma^dagger |ket>` = `<ket| a_sigma |bra>`.
    pub fn creation(&self, sigma: i8, bra: usize, ket: usize) -> f64 {
        self.annihilation(sigma, ket, bra)
    }

    /// `<bra| a_sigma |ket>` for explicit quantum numbers. States beyond
    /// `n_max` or with mismatched boson numbers give exact zero; invalid
    /// quantum numbers are an error.
    pub fn annihilation_element(
        &self,
        sigma: i8,
        bra: &SpinSiteState,
        ket: &SpinSiteState,
    ) -> Result<f64> {
        SpinSiteState::new(bra.s, bra.m, bra.n)?;
        SpinSiteState::new(ket.s, ket.m, ket.n)?;
        match (self.index_of(bra), self.index_of(ket)) {
            (Some(b), Some(k)) => Ok(self.annihilation(sigma, b, k)),
            _ => Err(SboError::Invalid(format!(
                "state {bra} or {ket} exceeds n_max = {}",
                self.n_max
            ))),
        }
    }

    /// All states `bra` with nonzero `<bra| a_sigma |ket>`.
    pub fn annihilation_targets(&self, sigma: i8, ket: usize) -> Vec<(usize, f64)> {
        let n = self.states[ket].n;
        if n == 0 {
            return Vec::new();
        }
        let si = sigma_idx(sigma);
        let lo = self.sector_offset[(n - 1) as usize];
        let hi = lo + self.sectors[(n - 1) as usize].states.len();
        let mut out = Vec::new();
        for bra in lo..hi {
            if let Some(&v) = self.c_map.get(&(si, bra, ket)) {
                out.push((bra, v));
            }
        }
        out
    }

    /// All states `bra` with nonzero `<bra| a_sigma^dagger |ket>`.
    pub fn creation_targets(&self, sigma: i8, ket: usize) -> Vec<(usize, f64)> {
        let n = self.states[ket].n;
        if n + 1 > self.n_max {
            return Vec::new();
        }
        let si = sigma_idx(sigma);
        let lo = self.sector_offset[(n + 1) as usize];
        let hi = lo + self.sectors[(n + 1) as usize].states.len();
        let mut out = Vec::new();
        for bra in lo..hi {
            // <bra| a^dag |ket> = <ket| a |bra>
            if let Some(&v) = self.c_map.get(&(si, ket, bra)) {
                out.push((bra, v));
            }
        }
        out
    }

    /// Oracle access: the sector eigenbasis for `n` bosons.
    pub fn sector(&self, n: u32) -> &SectorBasis {
        &self.sectors[n as usize]
    }

    /// Expectation value (<S_x>, <S_y>, <S_z>) of a normalized superposition
    /// of same-sector eigenstates, given as (global index, amplitude) pairs.
    pub fn spin_vector_expectation(&self, components: &[(usize, Complex64)]) -> Result<[f64; 3]> {
        let n = self.states[components[0].0].n;
        if components.iter().any(|&(i, _)| self.states[i].n != n) {
            return Err(SboError::Invalid(
                "spin expectation requires all components in one boson sector".into(),
            ));
        }
        let sector = &self.sectors[n as usize];
        let dim = sector.occs.len();
        let offset = self.sector_offset[n as usize];
        let mut psi = vec![Complex64::ZERO; dim];
        for &(gi, amp) in components {
            let st = &sector.states[gi - offset];
            for (k, &c) in st.coeffs.iter().enumerate() {
                psi[k] += amp * c;
            }
        }
        let (sz, sp, _) = fock::spin_matrices(&sector.occs);
        let apply = |m: &DMatrix<f64>| -> Vec<Complex64> {
            (0..dim)
                .map(|r| (0..dim).map(|c| m[(r, c)] * psi[c]).sum())
                .collect()
        };
        let inner = |v: &[Complex64]| -> Complex64 {
            psi.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
        };
        let spv = apply(&sp);
        let smv = apply(&sp.transpose());
        let szv = apply(&sz);
        let plus = inner(&spv);
        let minus = inner(&smv);
        let z = inner(&szv);
        // S_x = (S+ + S-)/2, S_y = (S+ - S-)/(2i)
        let sx = 0.5 * (plus + minus);
        let sy = (plus - minus) / Complex64::new(0.0, 2.0);
        Ok([sx.re, sy.re, z.re])
    }

    /// Plain-text dump of every nonzero annihilation element, one row per
    /// entry: `sigma, S_bra, m_bra, n_bra, S_ket, m_ket, n_ket, value`.
    pub fn write_annihilation_table(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "sigma, S_bra, m_bra, n_bra, S_ket, m_ket, n_ket, value")?;
        for &sigma in &SIGMAS {
            let si = sigma_idx(sigma);
            for ket in 0..self.states.len() {
                for bra in 0..self.states.len() {
                    if let Some(&v) = self.c_map.get(&(si, bra, ket)) {
                        let b = self.states[bra];
                        let k = self.states[ket];
                        writeln!(
                            w,
                            "{}, {}, {}, {}, {}, {}, {}, {:.15e}",
                            sigma, b.s, b.m, b.n, k.s, k.m, k.n, v
                        )?;
                    }
                }
            }
        }
        Ok(())
    }
}
