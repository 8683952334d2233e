//! Dyadic cubes on the periodic box and cube suprema of sample averages.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::Grid;

/// One dyadic scale: cubes of side `side` holding `samples` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubeScale {
    pub side: f64,
    pub samples: usize,
}

/// A cube reported as the maximizer of some average.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cube {
    pub side: f64,
    pub origin: Vec<f64>,
}

/// Dyadic cubes of sides `2^k` (`k` an integer) that are at least one grid
/// cell and at most the period, each scale tiling `[0, L)^n`, together with
/// the translates shifted by half a side along every combination of axes.
#[derive(Clone, Debug)]
pub struct DyadicCubeSet {
    grid: Grid,
    scales: Vec<CubeScale>,
}

impl DyadicCubeSet {
    pub fn new(grid: &Grid) -> Result<Self> {
        let per_unit = grid.points() as f64 / grid.length();
        let mut scales = Vec::new();
        let mut m = 1usize;
        while m <= grid.points() {
            let side = m as f64 / per_unit;
            let exponent = side.log2().round();
            if (side - exponent.exp2()).abs() > 1e-9 * side {
                return Err(Error::CubeAlignment(format!(
                    "a cube of {m} samples has side {side}, not a power of two; \
                     the period L = {} must be a power of two",
                    grid.length()
                )));
            }
            scales.push(CubeScale {
                side: exponent.exp2(),
                samples: m,
            });
            m *= 2;
        }
        Ok(DyadicCubeSet { grid: *grid, scales })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Scales ordered from the smallest cubes up.
    pub fn scales(&self) -> &[CubeScale] {
        &self.scales
    }

    /// Cube origins (per-axis sample indices) at a scale: the dyadic tiling
    /// and, for cubes of at least two samples, its half-shifted translates.
    pub fn origins(&self, m: usize) -> Vec<[usize; 2]> {
        let n = self.grid.points();
        let shifts: Vec<usize> = if m >= 2 && m < n { vec![0, m / 2] } else { vec![0] };
        let axis: Vec<usize> = shifts
            .iter()
            .flat_map(|&s| (0..n / m).map(move |i| i * m + s))
            .collect();
        match self.grid.dim() {
            1 => axis.iter().map(|&a| [a, 0]).collect(),
            _ => axis.iter().flat_map(|&a| axis.iter().map(move |&b| [a, b])).collect(),
        }
    }

    /// Flat sample indices inside the cube with the given origin.
    pub fn members(&self, origin: [usize; 2], m: usize) -> Vec<usize> {
        let n = self.grid.points();
        match self.grid.dim() {
            1 => (0..m).map(|t| (origin[0] + t) % n).collect(),
            _ => (0..m)
                .flat_map(|a| (0..m).map(move |b| ((origin[0] + a) % n) * n + (origin[1] + b) % n))
                .collect(),
        }
    }

    /// Periodic window sums `W[x] = sum_{y in x + [0, m)^n} v[y]` at every sample.
    pub fn window_sums(&self, values: &[f64], m: usize) -> Vec<f64> {
        let n = self.grid.points();
        let along = |row: &[f64]| -> Vec<f64> {
            let mut prefix = Vec::with_capacity(2 * n + 1);
            prefix.push(0.0);
            for t in 0..2 * n {
                prefix.push(prefix[t] + row[t % n]);
            }
            (0..n).map(|x| prefix[x + m] - prefix[x]).collect()
        };
        match self.grid.dim() {
            1 => along(values),
            _ => {
                let mut rows: Vec<f64> = Vec::with_capacity(n * n);
                for r in 0..n {
                    rows.extend(along(&values[r * n..(r + 1) * n]));
                }
                let mut out = vec![0.0; n * n];
                let mut column = vec![0.0; n];
                for c in 0..n {
                    for r in 0..n {
                        column[r] = rows[r * n + c];
                    }
                    for (r, v) in along(&column).into_iter().enumerate() {
                        out[r * n + c] = v;
                    }
                }
                out
            }
        }
    }

    fn cube(&self, scale: &CubeScale, origin: [usize; 2]) -> Cube {
        let h = self.grid.spacing();
        Cube {
            side: scale.side,
            origin: origin[..self.grid.dim()].iter().map(|&i| i as f64 * h).collect(),
        }
    }

    /// Largest cube mean of `values` at one scale.
    pub fn max_mean(&self, values: &[f64], scale: &CubeScale) -> (f64, Cube) {
        let m = scale.samples;
        let sums = self.window_sums(values, m);
        let count = m.pow(self.grid.dim() as u32) as f64;
        let mut best = (f64::NEG_INFINITY, [0, 0]);
        for origin in self.origins(m) {
            let v = sums[self.grid.flatten(origin)] / count;
            if v > best.0 {
                best = (v, origin);
            }
        }
        (best.0, self.cube(scale, best.1))
    }

    /// Largest mean oscillation `|Q|^{-1} int_Q |f - f_Q|` at one scale.
    pub fn max_oscillation(&self, f: &[Complex64], scale: &CubeScale) -> (f64, Cube) {
        let m = scale.samples;
        let mut best = (f64::NEG_INFINITY, [0, 0]);
        for origin in self.origins(m) {
            let members = self.members(origin, m);
            let count = members.len() as f64;
            let mean = members.iter().map(|&i| f[i]).sum::<Complex64>() / count;
            let osc = members.iter().map(|&i| (f[i] - mean).norm()).sum::<f64>() / count;
            if osc > best.0 {
                best = (osc, origin);
            }
        }
        (best.0, self.cube(scale, best.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_cover_cell_to_period() {
        let grid = Grid::new(1, 1024, 64.0).unwrap();
        let cubes = DyadicCubeSet::new(&grid).unwrap();
        let sides: Vec<f64> = cubes.scales().iter().map(|s| s.side).collect();
        assert_eq!(sides.first(), Some(&(1.0 / 16.0)));
        assert_eq!(sides.last(), Some(&64.0));
        assert_eq!(sides.len(), 11);
    }

    #[test]
    fn misaligned_period_is_rejected() {
        let grid = Grid::new(1, 64, 2.0 * std::f64::consts::PI).unwrap();
        assert!(matches!(DyadicCubeSet::new(&grid), Err(Error::CubeAlignment(_))));
    }

    #[test]
    fn each_scale_tiles_exactly() {
        for dim in [1, 2] {
            let grid = Grid::new(dim, 16, 4.0).unwrap();
            let cubes = DyadicCubeSet::new(&grid).unwrap();
            for scale in cubes.scales() {
                let m = scale.samples;
                let n = grid.points();
                let tiling: Vec<[usize; 2]> = cubes
                    .origins(m)
                    .into_iter()
                    .filter(|o| o[..dim].iter().all(|&a| a % m == 0))
                    .collect();
                let mut hits = vec![0usize; grid.len()];
                for o in &tiling {
                    for i in cubes.members(*o, m) {
                        hits[i] += 1;
                    }
                }
                assert!(hits.iter().all(|&h| h == 1), "dim {dim}, m {m}");
                assert_eq!(tiling.len(), (n / m).pow(dim as u32));
            }
        }
    }

    #[test]
    fn window_sums_match_direct() {
        let grid = Grid::new(2, 8, 8.0).unwrap();
        let cubes = DyadicCubeSet::new(&grid).unwrap();
        let values: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64).collect();
        for m in [1, 2, 4, 8] {
            let sums = cubes.window_sums(&values, m);
            for origin in cubes.origins(m) {
                let direct: f64 = cubes.members(origin, m).iter().map(|&i| values[i]).sum();
                assert!((sums[grid.flatten(origin)] - direct).abs() < 1e-12);
            }
        }
    }
}
