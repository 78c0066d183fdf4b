//! Discretized Brillouin zone of a hypercubic lattice (lattice constant 1).
//!
//! The dispersions only enter through `zeta(k) = -2 sum_s cos(k_s)`
//! (and `epsilon(k) = t * zeta(k)`), so the grid also carries an exact
//! histogram of zeta values; zone sums run over the histogram instead of
//! the full grid.

use crate::error::SboError;
use crate::Result;

#[derive(Debug, Clone)]
pub struct KGrid {
    dim: u32,
    points_per_axis: usize,
    zeta: Vec<f64>,
    histogram: Vec<(f64, u64)>,
}

impl KGrid {
    /// Uniform grid `k_s = 2 pi i / L`, `i = 0..L`, so the Gamma point is
    /// sampled exactly.
    pub fn new(dim: u32, points_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(SboError::InvalidParams(format!("dim must be 1..=3, got {dim}")));
        }
        if points_per_axis < 2 {
            return Err(SboError::InvalidParams(format!(
                "points per axis must be >= 2, got {points_per_axis}"
            )));
        }
        let l = points_per_axis;
        // Fold i -> min(i, L - i); cos is exactly symmetric under it, which
        // makes the histogram grouping exact.
        let canon: Vec<usize> = (0..l).map(|i| i.min(l - i)).collect();
        let cosines: Vec<f64> = (0..=l / 2)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / l as f64).cos())
            .collect();

        let n_points = l.pow(dim);
        let mut zeta = Vec::with_capacity(n_points);
        let mut hist = std::collections::BTreeMap::new();
        for flat in 0..n_points {
            let mut rem = flat;
            let mut key = [0usize; 3];
            for ax in 0..dim as usize {
                key[ax] = canon[rem % l];
                rem /= l;
            }
            key[..dim as usize].sort_unstable();
            let z = -2.0 * key[..dim as usize].iter().map(|&i| cosines[i]).sum::<f64>();
            zeta.push(z);
            *hist.entry(key).or_insert(0u64) += 1;
        }
        let histogram: Vec<(f64, u64)> = hist
            .into_iter()
            .map(|(key, count)| {
                let z = -2.0 * key[..dim as usize].iter().map(|&i| cosines[i]).sum::<f64>();
                (z, count)
            })
            .collect();

        Ok(Self { dim, points_per_axis, zeta, histogram })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Total number of lattice sites N_s = L^dim.
    pub fn n_sites(&self) -> usize {
        self.zeta.len()
    }

    /// zeta(k) on every grid point, in flat row-major order.
    pub fn zeta_values(&self) -> &[f64] {
        &self.zeta
    }

    /// Distinct zeta values with multiplicities; deterministic order.
    pub fn zeta_histogram(&self) -> &[(f64, u64)] {
        &self.histogram
    }

    /// epsilon(k) = t * zeta(k) at the Gamma point equals -z t.
    pub fn zeta_at_gamma(&self) -> f64 {
        self.zeta[0]
    }
}
