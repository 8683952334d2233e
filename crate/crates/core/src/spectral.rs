//! Sampled periodic functions on `[0, L)^n` and their Fourier coefficients.
//!
//! Normalization: the spectrum approximates `f^(xi) = int f(x) e^{-i x.xi} dx`
//! by the trapezoid rule on the torus, `f^(xi_k) = h^n sum_x f(x) e^{-i x.xi_k}`,
//! and the inverse uses the normalized measure `d-bar xi = (2 pi)^{-n} d xi`,
//! which on the lattice `xi_k = 2 pi k / L` becomes `L^{-n} sum_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::transform_nd;
use crate::par;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Uniform periodic grid with `points` samples per axis on `[0, length)^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points} must be a power of two >= 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("period {length} must be positive")));
        }
        Ok(Grid { dim, points, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Cell volume `h^n`.
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lattice step `2 pi / L` in frequency space.
    pub fn frequency_step(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Largest representable frequency magnitude per axis, `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.points as f64 / self.length
    }

    /// `sum |F_k|^2 / sum |f_x|^2`, which equals `L^{2n} / N^n`.
    pub fn parseval_constant(&self) -> f64 {
        self.volume().powi(2) / self.len() as f64
    }

    pub(crate) fn shape(&self) -> Vec<usize> {
        vec![self.points; self.dim]
    }

    /// Integer wavenumber of an FFT-ordered axis index, in `[-N/2, N/2)`.
    pub fn wavenumber(&self, index: usize) -> i64 {
        let n = self.points as i64;
        let i = index as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Axis index holding wavenumber `k` (taken modulo `N`).
    pub fn axis_index(&self, k: i64) -> usize {
        k.rem_euclid(self.points as i64) as usize
    }

    /// Per-axis indices of a flat row-major index.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.points, flat % self.points],
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * self.points + idx[1],
        }
    }

    /// Wavenumber vector of a flat spectrum index.
    pub fn wavevector(&self, flat: usize) -> [i64; 2] {
        let idx = self.unflatten(flat);
        let mut k = [0i64; 2];
        for a in 0..self.dim {
            k[a] = self.wavenumber(idx[a]);
        }
        k
    }

    /// Frequency `xi_k = 2 pi k / L` of a flat spectrum index; unused
    /// components are zero.
    pub fn frequency(&self, flat: usize) -> [f64; 2] {
        let k = self.wavevector(flat);
        let step = self.frequency_step();
        [k[0] as f64 * step, k[1] as f64 * step]
    }

    /// Physical coordinate of a flat sample index.
    pub fn coordinate(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        let mut x = [0.0; 2];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    /// Flat index of the spectrum entry for wavevector `k` (modulo `N`).
    pub fn spectrum_index(&self, k: &[i64]) -> usize {
        let mut idx = [0usize; 2];
        for a in 0..self.dim {
            idx[a] = self.axis_index(k[a]);
        }
        self.flatten(idx)
    }
}

/// Euclidean norm of the first `dim` components.
pub fn magnitude(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Japanese bracket `<xi> = (1 + |xi|^2)^{1/2}`.
pub fn bracket(v: &[f64]) -> f64 {
    (1.0 + v.iter().map(|c| c * c).sum::<f64>()).sqrt()
}

/// Complex samples of a function on a [`Grid`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        Ok(GridFunction { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            samples: vec![ZERO; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: Complex64) -> Self {
        GridFunction {
            grid,
            samples: vec![value; grid.len()],
        }
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let samples = (0..grid.len()).map(|i| f(&grid.coordinate(i)[..grid.dim])).collect();
        GridFunction { grid, samples }
    }

    /// `e^{i xi_k . x}` for an integer wavevector `k`.
    pub fn mode(grid: Grid, k: &[i64]) -> Self {
        let step = grid.frequency_step();
        GridFunction::from_fn(grid, |x| {
            let phase: f64 = x.iter().zip(k).map(|(x, &k)| x * k as f64 * step).sum();
            Complex64::from_polar(1.0, phase)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        self.map(|z| z * c)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> GridFunction {
        GridFunction {
            grid: self.grid,
            samples: self.samples.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Samplewise `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &GridFunction) -> Result<GridFunction> {
        self.ensure_same_grid(other)?;
        Ok(GridFunction {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Discrete `l^2` norm of the raw samples (no quadrature weight).
    pub fn l2_samples(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Fourier coefficients on the frequency lattice, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Spectrum {
            grid,
            coeffs: vec![ZERO; grid.len()],
        }
    }

    /// Coefficients given as a function of the frequency vector.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let coeffs = (0..grid.len()).map(|i| f(&grid.frequency(i)[..grid.dim])).collect();
        Spectrum { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at integer wavevector `k`, if it lies in `[-N/2, N/2)^n`.
    pub fn at(&self, k: &[i64]) -> Option<Complex64> {
        let half = (self.grid.points / 2) as i64;
        if k.iter().take(self.grid.dim).any(|&c| c < -half || c >= half) {
            return None;
        }
        Some(self.coeffs[self.grid.spectrum_index(k)])
    }

    /// Multiply every coefficient by `a(t xi)`.
    pub fn multiply<A>(&self, a: A, t: f64) -> Result<Spectrum>
    where
        A: Fn(&[f64]) -> Complex64,
    {
        let dim = self.grid.dim;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut xi = self.grid.frequency(i);
            for v in xi.iter_mut().take(dim) {
                *v *= t;
            }
            let m = a(&xi[..dim]);
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::NonFiniteMultiplier {
                    frequency: xi[..dim].to_vec(),
                });
            }
            out.push(c * m);
        }
        Ok(Spectrum {
            grid: self.grid,
            coeffs: out,
        })
    }

    /// Multiply by a real radial profile `a(t |xi|)`.
    pub fn multiply_radial<A>(&self, a: A, t: f64) -> Result<Spectrum>
    where
        A: Fn(f64) -> f64,
    {
        self.multiply(|xi| Complex64::new(a(magnitude(xi)), 0.0), t)
    }

    /// `l^2` norm of the coefficient array.
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Fraction of the coefficient `l^2` mass at frequencies with some
    /// component (or the magnitude) above `cutoff`.
    pub fn mass_above(&self, cutoff: f64) -> f64 {
        let total: f64 = self.coeffs.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let dim = self.grid.dim;
        let above: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| magnitude(&self.grid.frequency(*i)[..dim]) > cutoff)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        (above / total).sqrt()
    }
}

pub fn forward_transform(f: &GridFunction) -> Spectrum {
    let grid = f.grid;
    let mut data = f.samples.clone();
    transform_nd(&mut data, &grid.shape(), false);
    let cell = grid.cell();
    data.iter_mut().for_each(|z| *z *= cell);
    Spectrum { grid, coeffs: data }
}

pub fn inverse_transform(spectrum: &Spectrum) -> GridFunction {
    let grid = spectrum.grid;
    let mut data = spectrum.coeffs.clone();
    transform_nd(&mut data, &grid.shape(), true);
    let inv_volume = 1.0 / grid.volume();
    data.iter_mut().for_each(|z| *z *= inv_volume);
    GridFunction { grid, samples: data }
}

/// `a(tD) f`: the spectrum of the result is `a(t xi_k) f^(xi_k)`.
pub fn apply_multiplier<A>(a: A, t: f64, f: &GridFunction) -> Result<GridFunction>
where
    A: Fn(&[f64]) -> Complex64,
{
    let spectrum = forward_transform(f).multiply(a, t)?;
    Ok(inverse_transform(&spectrum))
}

/// Radial real multiplier `a(t |D|)`.
pub fn apply_radial<A>(a: A, t: f64, f: &GridFunction) -> Result<GridFunction>
where
    A: Fn(f64) -> f64,
{
    apply_multiplier(|xi| Complex64::new(a(magnitude(xi)), 0.0), t, f)
}

/// Quadrature `L^p` (quasi-)norm `(h^n sum |f|^p)^{1/p}`; the sample maximum
/// for `p = inf`.
pub fn lp_norm(f: &GridFunction, p: f64) -> f64 {
    assert!(p > 0.0, "lp_norm requires p > 0, got {p}");
    lp_norm_of(f.samples.iter().map(|z| z.norm()), f.grid.cell(), p)
}

/// `L^p` norm of nonnegative sample magnitudes with cell volume `cell`.
pub(crate) fn lp_norm_of<I>(values: I, cell: f64, p: f64) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let max = values.clone().fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    let sum: f64 = values.map(|v| (v / max).powf(p)).sum();
    max * (cell * sum).powf(1.0 / p)
}

pub fn pointwise_product(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.ensure_same_grid(g)?;
    Ok(GridFunction {
        grid: f.grid,
        samples: f.samples.iter().zip(&g.samples).map(|(a, b)| a * b).collect(),
    })
}

/// Multiply one spectrum by several radial multipliers and invert each, in
/// parallel. Used for Littlewood-Paley blocks and dyadic cutoff families.
pub(crate) fn radial_family<A>(spectrum: &Spectrum, count: usize, profile: A) -> Vec<GridFunction>
where
    A: Fn(usize, f64) -> f64 + Sync + Send,
{
    let grid = spectrum.grid;
    let radii: Vec<f64> = (0..grid.len())
        .map(|i| magnitude(&grid.frequency(i)[..grid.dim]))
        .collect();
    par::map_range(count, |j| {
        let coeffs = spectrum
            .coeffs
            .iter()
            .zip(&radii)
            .map(|(c, &r)| c * profile(j, r))
            .collect();
        inverse_transform(&Spectrum { grid, coeffs })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(3, 16, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new(1, 4, 1.0).is_err());
        assert!(Grid::new(1, 16, 0.0).is_err());
    }

    #[test]
    fn constant_concentrates_at_zero() {
        for grid in [Grid::new(1, 64, 64.0).unwrap(), Grid::new(2, 16, 3.0).unwrap()] {
            let spec = forward_transform(&GridFunction::constant(grid, c(1.0, 0.0)));
            let vol = grid.volume();
            assert!((spec.at(&[0, 0]).unwrap() - c(vol, 0.0)).norm() < 1e-12 * vol);
            for (i, z) in spec.coeffs().iter().enumerate().skip(1) {
                assert!(z.norm() <= 1e-12 * vol, "index {i}: {z}");
            }
        }
    }

    #[test]
    fn pure_mode_has_single_coefficient() {
        let grid = Grid::new(2, 16, 5.0).unwrap();
        let f = GridFunction::mode(grid, &[3, -2]);
        let spec = forward_transform(&f);
        let vol = grid.volume();
        let idx = grid.spectrum_index(&[3, -2]);
        for (i, z) in spec.coeffs().iter().enumerate() {
            let expect = if i == idx { vol } else { 0.0 };
            assert!((z - c(expect, 0.0)).norm() < 1e-11 * vol);
        }
        let back = inverse_transform(&spec);
        assert!(rel_err(back.samples(), f.samples()) < 1e-12);
    }

    #[test]
    fn matches_direct_dft_on_five_modes() {
        let grid = Grid::new(1, 64, 7.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let modes: Vec<(i64, Complex64)> = (0..5)
            .map(|_| {
                let k = rng.random_range(-31..32);
                (k, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            })
            .collect();
        let step = grid.frequency_step();
        let f = GridFunction::from_fn(grid, |x| {
            modes
                .iter()
                .map(|(k, a)| a * Complex64::from_polar(1.0, *k as f64 * step * x[0]))
                .sum()
        });
        let spec = forward_transform(&f);
        let h = grid.spacing();
        let direct: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let xi = grid.frequency(i)[0];
                f.samples()
                    .iter()
                    .enumerate()
                    .map(|(m, v)| v * Complex64::from_polar(h, -(m as f64) * h * xi))
                    .sum()
            })
            .collect();
        assert!(rel_err(spec.coeffs(), &direct) < 1e-10);
    }

    #[test]
    fn parseval_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for grid in [Grid::new(1, 128, 64.0).unwrap(), Grid::new(2, 32, 2.0).unwrap()] {
            let f = GridFunction::new(
                grid,
                (0..grid.len())
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            )
            .unwrap();
            let spec = forward_transform(&f);
            let ratio = spec.l2().powi(2) / f.l2_samples().powi(2);
            assert!((ratio / grid.parseval_constant() - 1.0).abs() < 1e-12);
            let back = inverse_transform(&spec);
            assert!(rel_err(back.samples(), f.samples()) < 1e-12);
        }
    }

    #[test]
    fn multiplier_identity_and_eigenfunction() {
        let grid = Grid::new(1, 64, 10.0).unwrap();
        let f = GridFunction::mode(grid, &[5]);
        let same = apply_multiplier(|_| c(1.0, 0.0), 1.0, &f).unwrap();
        assert!(rel_err(same.samples(), f.samples()) < 1e-12);
        let xi0 = 5.0 * grid.frequency_step();
        let lap = apply_multiplier(|xi| c(xi[0] * xi[0], 0.0), 1.0, &f).unwrap();
        let expect = f.scale(c(xi0 * xi0, 0.0));
        assert!(rel_err(lap.samples(), expect.samples()) < 1e-12);
    }

    #[test]
    fn multiplier_rejects_non_finite_values() {
        let grid = Grid::new(1, 16, 1.0).unwrap();
        let f = GridFunction::constant(grid, c(1.0, 0.0));
        let err = apply_multiplier(|xi| c(1.0 / xi[0], 0.0), 1.0, &f).unwrap_err();
        match err {
            Error::NonFiniteMultiplier { frequency } => assert_eq!(frequency, vec![0.0]),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn lp_norm_of_constants() {
        let grid = Grid::new(2, 16, 3.0).unwrap();
        let f = GridFunction::constant(grid, c(0.0, -2.0));
        for p in [0.5, 1.0, 2.0, 3.5] {
            let expect = 2.0 * grid.volume().powf(1.0 / p);
            assert!((lp_norm(&f, p) - expect).abs() < 1e-12 * expect);
        }
        assert_eq!(lp_norm(&f, f64::INFINITY), 2.0);
    }

    #[test]
    fn lp_norm_is_homogeneous() {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let bump = GridFunction::from_fn(grid, |x| c((-(x[0] - 8.0).powi(2)).exp(), 0.0));
        for p in [0.7, 1.0, 2.0, f64::INFINITY] {
            let a = lp_norm(&bump, p);
            let b = lp_norm(&bump.scale(c(2.0, 0.0)), p);
            assert!((b - 2.0 * a).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn l2_norm_matches_parseval() {
        let grid = Grid::new(1, 128, 9.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = GridFunction::new(
            grid,
            (0..grid.len()).map(|_| c(rng.random_range(-1.0..1.0), 0.0)).collect(),
        )
        .unwrap();
        let spec = forward_transform(&f);
        let parseval = (spec.l2().powi(2) / grid.volume()).sqrt();
        assert!((lp_norm(&f, 2.0) - parseval).abs() < 1e-10 * parseval);
    }

    #[test]
    fn product_of_modes_adds_frequencies() {
        let grid = Grid::new(1, 32, 4.0).unwrap();
        let f = GridFunction::mode(grid, &[3]);
        let g = GridFunction::mode(grid, &[-7]);
        let fg = pointwise_product(&f, &g).unwrap();
        let expect = GridFunction::mode(grid, &[-4]);
        assert!(rel_err(fg.samples(), expect.samples()) < 1e-12);
        let one = GridFunction::constant(grid, c(1.0, 0.0));
        assert_eq!(pointwise_product(&f, &one).unwrap(), f);
        let other = GridFunction::zeros(Grid::new(1, 64, 4.0).unwrap());
        assert!(matches!(pointwise_product(&f, &other), Err(Error::GridMismatch)));
    }
}
