//! RPA motion equation as a finite linear system over transition channels.
//!
//! For a Hamiltonian `sum V_a L_aa' + sum_<ij> T_{aa',bb'} L^i_aa' L^j_bb'`
//! the Fourier-transformed equation of motion closes on the channel vector
//! `G_i = G_{alpha_i beta_i, source}(k, omega)`:
//!
//! `omega G = A(kappa) G + r`,
//! `A_ij = kappa D_i T[beta_i alpha_i][alpha_j beta_j]
//!        + delta_{alpha_i alpha_j} W[beta_i beta_j]
//!        - delta_{beta_i beta_j}  W[alpha_j alpha_i]`,
//!
//! with `W = V + z sum_nu D_nu T[a b nu nu]` (diagonal part: the shifted
//! on-site energies; off-diagonal part: the gamma-type couplings) and
//! `kappa` the hopping factor (`t zeta(k)` for the lattice bosons,
//! `-zeta(k)` for the effective spin models, which absorb the coupling
//! sign into T).
//!
//! Poles are the eigenvalues of A; residues come from Lagrange spectral
//! projectors, which only need matrix-vector products and stay exact for
//! diagonalizable A. The residue sum rule `sum_p Res_p = r` doubles as
//! the diagnostic for numerically defective systems.

use nalgebra::{DMatrix, DVector};

use crate::error::SboError;
use crate::Result;

/// Relative tolerance on |Im(pole)| before a system counts as evanescent.
/// Weakly coupled near-degenerate modes pick up spurious imaginary parts
/// of this order from the non-hermitian RPA matrix; genuinely unstable
/// systems develop order-one imaginary frequencies. The residue sum rule
/// below still rejects decompositions this tolerance lets through
/// wrongly.
const IM_TOL: f64 = 1e-3;
/// Relative pole-clustering tolerance.
const CLUSTER_TOL: f64 = 1e-9;
/// Relative residue-sum defect treated as a degeneracy failure.
const RESIDUE_DEFECT_TOL: f64 = 1e-6;

/// All transition channels of a state set together with the coupling
/// tensor restricted to them. Channels are ordered pairs (alpha, beta),
/// alpha != beta, enumerated alpha-major for determinism.
pub struct MotionSpace {
    n_states: usize,
    channels: Vec<(usize, usize)>,
    occ_diff: Vec<f64>,
    /// coupling[(i, j)] = T[beta_i alpha_i][alpha_j beta_j]
    coupling: DMatrix<f64>,
    w: DMatrix<f64>,
}

impl MotionSpace {
    /// Build the channel space for `occ.len()` states with bare on-site
    /// matrix `v` (usually diagonal) and pair tensor `tensor(a, a', b, b')`.
    pub fn new<F>(occ: &[f64], v: &DMatrix<f64>, z: f64, tensor: F) -> Self
    where
        F: Fn(usize, usize, usize, usize) -> f64,
    {
        Self::with_pruning(occ, v, z, tensor, 0.0)
    }

    /// Like [`MotionSpace::new`], but channels whose occupation difference
    /// is below `prune_rel` times the largest one carry no RPA coupling.
    /// Keeps the coupled blocks small when many states hold comparable
    /// small occupations; `prune_rel = 0` is exact.
    pub fn with_pruning<F>(occ: &[f64], v: &DMatrix<f64>, z: f64, tensor: F, prune_rel: f64) -> Self
    where
        F: Fn(usize, usize, usize, usize) -> f64,
    {
        let ns = occ.len();
        let mut channels = Vec::with_capacity(ns * (ns - 1));
        for a in 0..ns {
            for b in 0..ns {
                if a != b {
                    channels.push((a, b));
                }
            }
        }
        let raw_diff: Vec<f64> = channels.iter().map(|&(a, b)| occ[a] - occ[b]).collect();
        let gate = prune_rel * raw_diff.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let occ_diff: Vec<f64> =
            raw_diff.into_iter().map(|d| if d.abs() <= gate { 0.0 } else { d }).collect();

        // W = V + z * sum_nu D_nu T[a b nu nu]
        let mut w = v.clone();
        for a in 0..ns {
            for b in 0..ns {
                let mut shift = 0.0;
                for nu in 0..ns {
                    if occ[nu] != 0.0 {
                        shift += occ[nu] * tensor(a, b, nu, nu);
                    }
                }
                w[(a, b)] += z * shift;
            }
        }

        let nc = channels.len();
        let mut coupling = DMatrix::zeros(nc, nc);
        for (i, &(ai, bi)) in channels.iter().enumerate() {
            if occ_diff[i] == 0.0 {
                continue; // row carries no RPA coupling
            }
            for (j, &(aj, bj)) in channels.iter().enumerate() {
                coupling[(i, j)] = tensor(bi, ai, aj, bj);
            }
        }

        Self { n_states: ns, channels, occ_diff, coupling, w }
    }

    pub fn channel_index(&self, alpha: usize, beta: usize) -> Option<usize> {
        if alpha == beta || alpha >= self.n_states || beta >= self.n_states {
            return None;
        }
        // alpha-major enumeration with the diagonal removed.
        let row = alpha * (self.n_states - 1);
        let col = if beta < alpha { beta } else { beta - 1 };
        Some(row + col)
    }

    /// Structural nonzero test of A_ij at generic kappa.
    fn edge(&self, i: usize, j: usize) -> bool {
        let (ai, bi) = self.channels[i];
        let (aj, bj) = self.channels[j];
        if self.occ_diff[i] != 0.0 && self.coupling[(i, j)] != 0.0 {
            return true;
        }
        if i != j {
            if ai == aj && self.w[(bi, bj)] != 0.0 {
                return true;
            }
            if bi == bj && self.w[(aj, ai)] != 0.0 {
                return true;
            }
        }
        false
    }

    /// The closed subsystem seen by a source on channel
    /// `(source.0, source.1)`: every channel with a coupling path to the
    /// source (all others have identically zero Green's function).
    pub fn subsystem(&self, source: (usize, usize)) -> Result<ChannelSystem<'_>> {
        let src = self
            .channel_index(source.0, source.1)
            .ok_or_else(|| SboError::Invalid(format!("invalid source channel {source:?}")))?;
        let nc = self.channels.len();
        // Backward reachability: i is kept iff a directed A-path i -> src exists.
        let mut reach = vec![false; nc];
        reach[src] = true;
        let mut stack = vec![src];
        while let Some(j) = stack.pop() {
            for i in 0..nc {
                if !reach[i] && self.edge(i, j) {
                    reach[i] = true;
                    stack.push(i);
                }
            }
        }
        let members: Vec<usize> = (0..nc).filter(|&i| reach[i]).collect();
        let source_local = members.binary_search(&src).unwrap();
        Ok(ChannelSystem { space: self, members, source_local })
    }
}

/// A closed channel subsystem with one source.
pub struct ChannelSystem<'a> {
    space: &'a MotionSpace,
    members: Vec<usize>,
    source_local: usize,
}

/// Poles (distinct, ascending) and per-pole residue vectors over the
/// subsystem channels; degenerate poles carry their summed residue.
#[derive(Debug, Clone)]
pub struct PoleDecomp {
    pub poles: Vec<f64>,
    pub residues: Vec<DVector<f64>>,
}

impl<'a> ChannelSystem<'a> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Channels of the subsystem as (alpha, beta) state pairs.
    pub fn channels(&self) -> Vec<(usize, usize)> {
        self.members.iter().map(|&i| self.space.channels[i]).collect()
    }

    /// Local index of a channel within the subsystem, if present.
    pub fn local_index(&self, alpha: usize, beta: usize) -> Option<usize> {
        let global = self.space.channel_index(alpha, beta)?;
        self.members.binary_search(&global).ok()
    }

    pub fn source_index(&self) -> usize {
        self.source_local
    }

    /// Dense A(kappa) over the subsystem.
    pub fn a_matrix(&self, kappa: f64) -> DMatrix<f64> {
        let n = self.members.len();
        let mut a = DMatrix::zeros(n, n);
        for (il, &i) in self.members.iter().enumerate() {
            let (ai, bi) = self.space.channels[i];
            for (jl, &j) in self.members.iter().enumerate() {
                let (aj, bj) = self.space.channels[j];
                let mut v = kappa * self.space.occ_diff[i] * self.space.coupling[(i, j)];
                if ai == aj {
                    v += self.space.w[(bi, bj)];
                }
                if bi == bj {
                    v -= self.space.w[(aj, ai)];
                }
                a[(il, jl)] = v;
            }
        }
        a
    }

    /// Source vector r (the commutator inhomogeneity).
    pub fn source_vector(&self) -> DVector<f64> {
        let n = self.members.len();
        let mut r = DVector::zeros(n);
        r[self.source_local] = self.space.occ_diff[self.members[self.source_local]];
        r
    }

    /// Poles and residues of `G(omega) = (omega I - A)^-1 r`.
    pub fn pole_decomposition(&self, kappa: f64) -> Result<PoleDecomp> {
        let a = self.a_matrix(kappa);
        let r = self.source_vector();
        decompose(&a, &r)
    }

    /// Same decomposition with a unit source on the source channel;
    /// residues scale linearly with the physical source.
    pub fn pole_decomposition_unit_source(&self, kappa: f64) -> Result<PoleDecomp> {
        let a = self.a_matrix(kappa);
        let mut r = DVector::zeros(self.members.len());
        r[self.source_local] = 1.0;
        decompose(&a, &r)
    }
}

/// Pole/residue decomposition of `(omega I - A)^-1 r` for a real matrix
/// with (numerically) real spectrum.
pub fn decompose(a: &DMatrix<f64>, r: &DVector<f64>) -> Result<PoleDecomp> {
    let n = a.nrows();
    if n == 0 {
        return Ok(PoleDecomp { poles: vec![], residues: vec![] });
    }
    if n == 1 {
        return Ok(PoleDecomp { poles: vec![a[(0, 0)]], residues: vec![r.clone()] });
    }
    let eig = a.clone().complex_eigenvalues();
    let scale = eig.iter().map(|c| c.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let im_max = eig.iter().map(|c| c.im.abs()).fold(0.0_f64, f64::max);
    if im_max > IM_TOL * scale {
        return Err(SboError::EvanescentModes { im_max });
    }
    let mut poles: Vec<f64> = eig.iter().map(|c| c.re).collect();
    poles.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // Cluster numerically equal poles (each cluster keeps one frequency
    // and the summed residue). Near-degenerate pairs poison the Lagrange
    // product, so widen the clustering until the residue sum rule holds.
    let mut worst_defect = f64::INFINITY;
    for widen in [1.0, 1e2, 1e4] {
        let tol = CLUSTER_TOL * scale * widen;
        let mut distinct: Vec<f64> = Vec::new();
        for &p in &poles {
            match distinct.last() {
                Some(&last) if (p - last).abs() <= tol => {}
                _ => distinct.push(p),
            }
        }

        // Lagrange projector: Res_j = prod_{q != j} (A - w_q I)/(w_j - w_q) r.
        let mut residues = Vec::with_capacity(distinct.len());
        for (j, &wj) in distinct.iter().enumerate() {
            let mut v = r.clone();
            for (q, &wq) in distinct.iter().enumerate() {
                if q == j {
                    continue;
                }
                v = (a * &v - &v * wq) / (wj - wq);
            }
            residues.push(v);
        }

        let mut sum = DVector::zeros(n);
        for res in &residues {
            sum += res;
        }
        let defect = (&sum - r).norm() / r.norm().max(1.0);
        if defect <= RESIDUE_DEFECT_TOL {
            return Ok(PoleDecomp { poles: distinct, residues });
        }
        worst_defect = worst_defect.min(defect);
    }
    Err(SboError::NumericalDegeneracy { defect: worst_defect })
}
