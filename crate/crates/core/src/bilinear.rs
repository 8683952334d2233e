//! Bilinear pseudodifferential operators
//! `T_sigma(f, g)(x) = iint sigma(x, xi, eta) f^(xi) g^(eta) e^{i x.(xi + eta)} d-bar xi d-bar eta`,
//! their `BS^m_{1,1}` seminorms, the paraproduct split `sigma = sigma^0 + sigma^1`
//! and the Fourier-series expansion of its pieces into elementary symbols.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::fft::transform_nd;
use crate::par;
use crate::partition::{AnnulusCutoffs, ResolutionOfUnity};
use crate::spectral::{forward_transform, inverse_transform, magnitude, Grid, GridFunction, Spectrum};
use crate::weights::least_squares_slope;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

type SymbolFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> Complex64 + Send + Sync>;

/// Frequency-side function used by elementary symbols.
pub type FrequencyFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A symbol `sigma(x, xi, eta)` with its declared order `m`.
#[derive(Clone)]
pub struct BilinearSymbol {
    name: String,
    order: f64,
    x_dependent: bool,
    eval: SymbolFn,
}

impl std::fmt::Debug for BilinearSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BilinearSymbol")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("x_dependent", &self.x_dependent)
            .finish()
    }
}

/// Names accepted by [`BilinearSymbol::builtin`].
pub const BUILTIN_SYMBOLS: [&str; 5] = ["one", "bracket", "inverse-bracket", "modulated", "chirp"];

impl BilinearSymbol {
    pub fn new<F>(name: &str, order: f64, eval: F) -> Self
    where
        F: Fn(&[f64], &[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        BilinearSymbol {
            name: name.to_string(),
            order,
            x_dependent: true,
            eval: Arc::new(eval),
        }
    }

    pub fn x_independent<F>(name: &str, order: f64, eval: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        BilinearSymbol {
            name: name.to_string(),
            order,
            x_dependent: false,
            eval: Arc::new(move |_, xi, eta| eval(xi, eta)),
        }
    }

    /// `sigma = 1`; `T_sigma` is the pointwise product.
    pub fn one() -> Self {
        Self::x_independent("one", 0.0, |_, _| Complex64::new(1.0, 0.0))
    }

    /// Built-in test symbols. `period` fixes the `x`-periodicity of the
    /// `x`-dependent ones.
    ///
    /// * `one`: `1`, order 0.
    /// * `bracket`: `(1 + |xi|^2 + |eta|^2)^{1/2}`, order 1.
    /// * `inverse-bracket`: `(1 + |xi|^2 + |eta|^2)^{-1/2}`, order -1.
    /// * `modulated`: `(1 + cos(2 pi x_1 / L) / 2) <xi> / <(xi, eta)>`, order 0.
    /// * `chirp`: `e^{i |xi|^2}`, declared order 0 but outside `BS^0_{1,1}`.
    pub fn builtin(name: &str, period: f64) -> Result<Self> {
        let sq = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
        Ok(match name {
            "one" => Self::one(),
            "bracket" => Self::x_independent(name, 1.0, move |xi, eta| {
                Complex64::new((1.0 + sq(xi) + sq(eta)).sqrt(), 0.0)
            }),
            "inverse-bracket" => Self::x_independent(name, -1.0, move |xi, eta| {
                Complex64::new((1.0 + sq(xi) + sq(eta)).sqrt().recip(), 0.0)
            }),
            "modulated" => {
                let omega = 2.0 * PI / period;
                Self::new(name, 0.0, move |x, xi, eta| {
                    let a = 1.0 + 0.5 * (omega * x[0]).cos();
                    Complex64::new(a * ((1.0 + sq(xi)) / (1.0 + sq(xi) + sq(eta))).sqrt(), 0.0)
                })
            }
            "chirp" => Self::x_independent(name, 0.0, move |xi, _| Complex64::from_polar(1.0, sq(xi))),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown symbol {other:?}; expected one of {BUILTIN_SYMBOLS:?}"
                )))
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn is_x_dependent(&self) -> bool {
        self.x_dependent
    }

    pub fn eval(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Complex64 {
        (self.eval)(x, xi, eta)
    }
}

fn finite(z: Complex64, xi: &[f64], eta: &[f64]) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        let mut frequency = xi.to_vec();
        frequency.extend_from_slice(eta);
        Err(Error::NonFiniteMultiplier { frequency })
    }
}

/// `T_sigma` bound to one grid, with the symbol table of an `x`-independent
/// symbol sampled once on the frequency product.
pub struct BilinearOperator {
    symbol: BilinearSymbol,
    grid: Grid,
    table: Option<Vec<Complex64>>,
}

impl BilinearOperator {
    pub fn new(symbol: &BilinearSymbol, grid: &Grid) -> Result<Self> {
        let table = if symbol.x_dependent {
            None
        } else {
            let len = grid.len();
            let dim = grid.dim();
            let rows = par::try_map_range(len, |i| {
                let xi = grid.frequency(i);
                (0..len)
                    .map(|k| {
                        let eta = grid.frequency(k);
                        finite(symbol.eval(&[], &xi[..dim], &eta[..dim]), &xi[..dim], &eta[..dim])
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            Some(rows.into_iter().flatten().collect())
        };
        Ok(BilinearOperator {
            symbol: symbol.clone(),
            grid: *grid,
            table,
        })
    }

    pub fn symbol(&self) -> &BilinearSymbol {
        &self.symbol
    }

    fn check(&self, f: &GridFunction, g: &GridFunction) -> Result<()> {
        f.ensure_same_grid(g)?;
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `x`-independent symbols: accumulate `sigma f^ g^` on the output
    /// wavevector `(k + l) mod N` and invert once. `x`-dependent symbols:
    /// the double frequency sum at every sample point.
    pub fn apply(&self, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
        self.check(f, g)?;
        let fh = forward_transform(f);
        let gh = forward_transform(g);
        let grid = self.grid;
        let len = grid.len();
        let scale = 1.0 / grid.volume();
        match &self.table {
            Some(table) => {
                let mut out = vec![ZERO; len];
                for (i, a) in fh.coeffs().iter().enumerate() {
                    if *a == ZERO {
                        continue;
                    }
                    let ki = grid.wavevector(i);
                    let row = &table[i * len..(i + 1) * len];
                    for (k, b) in gh.coeffs().iter().enumerate() {
                        if *b == ZERO {
                            continue;
                        }
                        let kk = grid.wavevector(k);
                        let target = grid.spectrum_index(&[ki[0] + kk[0], ki[1] + kk[1]]);
                        out[target] += row[k] * a * b;
                    }
                }
                out.iter_mut().for_each(|z| *z *= scale);
                Ok(inverse_transform(&Spectrum::new(grid, out)?))
            }
            None => direct(&self.symbol, &fh, &gh),
        }
    }
}

/// Reference double sum evaluated at every sample point.
fn direct(symbol: &BilinearSymbol, fh: &Spectrum, gh: &Spectrum) -> Result<GridFunction> {
    let grid = *fh.grid();
    let dim = grid.dim();
    let len = grid.len();
    let scale = grid.volume().powi(-2);
    let support_f: Vec<usize> = (0..len).filter(|&i| fh.coeffs()[i] != ZERO).collect();
    let support_g: Vec<usize> = (0..len).filter(|&i| gh.coeffs()[i] != ZERO).collect();
    let samples = par::try_map_range(len, |p| {
        let x = grid.coordinate(p);
        let mut acc = ZERO;
        for &i in &support_f {
            let xi = grid.frequency(i);
            let phase_f: f64 = (0..dim).map(|a| x[a] * xi[a]).sum();
            let a = fh.coeffs()[i] * Complex64::from_polar(1.0, phase_f);
            for &k in &support_g {
                let eta = grid.frequency(k);
                let phase_g: f64 = (0..dim).map(|c| x[c] * eta[c]).sum();
                let s = finite(symbol.eval(&x[..dim], &xi[..dim], &eta[..dim]), &xi[..dim], &eta[..dim])?;
                acc += s * a * gh.coeffs()[k] * Complex64::from_polar(1.0, phase_g);
            }
        }
        Ok::<_, Error>(acc * scale)
    })?;
    GridFunction::new(grid, samples)
}

/// `T_sigma(f, g)` on the common grid of `f` and `g`.
pub fn apply_bilinear(symbol: &BilinearSymbol, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    BilinearOperator::new(symbol, f.grid())?.apply(f, g)
}

/// Reference implementation: the double sum evaluated directly at every
/// sample point, `O(N^{3n})`.
pub fn apply_bilinear_direct(symbol: &BilinearSymbol, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.ensure_same_grid(g)?;
    direct(symbol, &forward_transform(f), &forward_transform(g))
}

/// `x`-independent symbols through one `2n`-dimensional inverse FFT of
/// `sigma(xi, eta) f^(xi) g^(eta)`, read off on the diagonal `x = y`.
pub fn apply_bilinear_fft(symbol: &BilinearSymbol, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.ensure_same_grid(g)?;
    if symbol.x_dependent {
        return Err(Error::Unsupported(
            "the 2n-dimensional FFT path needs an x-independent symbol".into(),
        ));
    }
    let grid = *f.grid();
    let dim = grid.dim();
    let len = grid.len();
    if len * len > 1 << 22 {
        return Err(Error::Unsupported(format!(
            "the 2n-dimensional FFT path holds N^(2n) = {} values; use apply_bilinear",
            len * len
        )));
    }
    let fh = forward_transform(f);
    let gh = forward_transform(g);
    let mut data = vec![ZERO; len * len];
    for i in 0..len {
        let xi = grid.frequency(i);
        for k in 0..len {
            let eta = grid.frequency(k);
            let s = finite(symbol.eval(&[], &xi[..dim], &eta[..dim]), &xi[..dim], &eta[..dim])?;
            data[i * len + k] = s * fh.coeffs()[i] * gh.coeffs()[k];
        }
    }
    let shape = vec![grid.points(); 2 * dim];
    transform_nd(&mut data, &shape, true);
    let scale = grid.volume().powi(-2);
    let samples = (0..len).map(|p| data[p * len + p] * scale).collect();
    GridFunction::new(grid, samples)
}

/// Lattice for finite-difference seminorm estimates at refinement `level`:
/// `17` frequencies per axis on `[-R, R]`, `R = 2^{level + 3}`, and
/// difference step `h = 2^{-level - 3}`.
fn seminorm_lattice(level: u32) -> (f64, f64, usize) {
    let radius = ((level + 3) as f64).exp2();
    let h = (-((level + 3) as f64)).exp2();
    (radius, h, 8)
}

/// Finite-difference surrogate of `||sigma||_{BS^m_{1,1;N}}` on the lattice
/// of refinement `level` (see [`bs_seminorm_sweep`]); one-dimensional symbols.
pub fn bs_seminorm(symbol: &BilinearSymbol, order: usize, level: u32, period: f64) -> Result<f64> {
    if order > 3 {
        return Err(Error::InvalidParameter(format!("seminorm order {order} > 3")));
    }
    let (radius, h, per_side) = seminorm_lattice(level);
    let freqs: Vec<f64> = (-(per_side as i64)..=per_side as i64)
        .map(|i| radius * i as f64 / per_side as f64)
        .collect();
    let xs: Vec<f64> = (0..4).map(|i| period * i as f64 / 4.0).collect();
    let hx = period / 256.0;
    let m = symbol.order;
    let mut indices = Vec::new();
    for a in 0..=order {
        if a > 0 && !symbol.x_dependent {
            continue;
        }
        for b in 0..=order {
            for c in 0..=order {
                indices.push([a, b, c]);
            }
        }
    }
    let points: Vec<(f64, f64, f64)> = xs
        .iter()
        .flat_map(|&x| {
            let freqs = &freqs;
            freqs
                .iter()
                .flat_map(move |&xi| freqs.iter().map(move |&eta| (x, xi, eta)))
        })
        .collect();
    let eval = |p: &[f64]| -> Complex64 { symbol.eval(&p[0..1], &p[1..2], &p[2..3]) };
    let sups = par::map_range(points.len(), |i| {
        let (x, xi, eta) = points[i];
        let weight_base = 1.0 + xi.abs() + eta.abs();
        indices
            .iter()
            .map(|idx| {
                let d: Complex64 = fd::partial(&eval, &[x, xi, eta], idx, &[hx, h, h]);
                let exponent = m + idx[0] as f64 - idx[1] as f64 - idx[2] as f64;
                d.norm() * weight_base.powf(-exponent)
            })
            .fold(0.0, f64::max)
    });
    Ok(sups.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormSweep {
    pub order: usize,
    pub values: Vec<f64>,
    /// Last value over the previous one.
    pub growth: f64,
    pub stable: bool,
}

/// Seminorm surrogate over refinement levels `0..levels`; stable when the
/// last refinement changes the value by at most 25%.
pub fn bs_seminorm_sweep(symbol: &BilinearSymbol, order: usize, levels: u32, period: f64) -> Result<SeminormSweep> {
    let values = (0..levels.max(2))
        .map(|l| bs_seminorm(symbol, order, l, period))
        .collect::<Result<Vec<_>>>()?;
    let last = values[values.len() - 1];
    let prev = values[values.len() - 2];
    let growth = if prev > 0.0 { last / prev } else { 1.0 };
    Ok(SeminormSweep {
        order,
        stable: growth <= 1.25,
        growth,
        values,
    })
}

/// The paraproduct split of a symbol,
/// `sigma^0_j = sigma phi_j(xi) phi_0(2^{-j} eta)`, `0 <= j <= J`, and
/// `sigma^1_k = sigma phi_0(2^{-k+1} xi) phi_k(eta)`, `1 <= k <= J`.
#[derive(Clone, Debug)]
pub struct SymbolDecomposition {
    symbol: BilinearSymbol,
    resolution: ResolutionOfUnity,
    cutoffs: AnnulusCutoffs,
}

pub fn split_paraproduct(symbol: &BilinearSymbol, resolution: &ResolutionOfUnity) -> SymbolDecomposition {
    SymbolDecomposition {
        symbol: symbol.clone(),
        resolution: *resolution,
        cutoffs: AnnulusCutoffs::new(resolution.profile()),
    }
}

impl SymbolDecomposition {
    pub fn symbol(&self) -> &BilinearSymbol {
        &self.symbol
    }

    pub fn resolution(&self) -> &ResolutionOfUnity {
        &self.resolution
    }

    pub fn cutoffs(&self) -> &AnnulusCutoffs {
        &self.cutoffs
    }

    fn low_cut(&self, j: u32, eta: &[f64]) -> f64 {
        self.resolution.partial_sum(j as i32, magnitude(eta))
    }

    pub fn sigma0(&self, j: u32, x: &[f64], xi: &[f64], eta: &[f64]) -> Complex64 {
        let c = self.resolution.eval(j, xi) * self.low_cut(j, eta);
        if c == 0.0 {
            return ZERO;
        }
        self.symbol.eval(x, xi, eta) * c
    }

    pub fn sigma1(&self, k: u32, x: &[f64], xi: &[f64], eta: &[f64]) -> Complex64 {
        let c = self.resolution.partial_sum(k as i32 - 1, magnitude(xi)) * self.resolution.eval(k, eta);
        if c == 0.0 {
            return ZERO;
        }
        self.symbol.eval(x, xi, eta) * c
    }

    /// `sum_j sigma^0_j + sum_k sigma^1_k`.
    pub fn reconstruct(&self, x: &[f64], xi: &[f64], eta: &[f64]) -> Complex64 {
        let j_max = self.resolution.j_max();
        let mut acc = ZERO;
        for j in 0..=j_max {
            acc += self.sigma0(j, x, xi, eta);
        }
        for k in 1..=j_max {
            acc += self.sigma1(k, x, xi, eta);
        }
        acc
    }

    /// Sup of `|sum of pieces - sigma|` over grid frequency pairs with
    /// `|xi|, |eta| <= 2^{J-1}` and the sample points `xs`.
    pub fn reconstruction_residual(&self, grid: &Grid, xs: &[Vec<f64>]) -> f64 {
        let dim = grid.dim();
        let limit = ((self.resolution.j_max() - 1) as f64).exp2();
        let freqs: Vec<[f64; 2]> = (0..grid.len())
            .map(|i| grid.frequency(i))
            .filter(|f| magnitude(&f[..dim]) <= limit)
            .collect();
        let xs: Vec<Vec<f64>> = if xs.is_empty() {
            vec![vec![0.0; dim]]
        } else {
            xs.to_vec()
        };
        let per_x = par::map_range(xs.len(), |t| {
            let x = &xs[t];
            let mut worst: f64 = 0.0;
            for xi in &freqs {
                for eta in &freqs {
                    let r = self.reconstruct(x, &xi[..dim], &eta[..dim]);
                    let s = self.symbol.eval(x, &xi[..dim], &eta[..dim]);
                    worst = worst.max((r - s).norm());
                }
            }
            worst
        });
        per_x.into_iter().fold(0.0, f64::max)
    }
}

/// Fourier coefficients `c_{j,k,l}` of `(xi, eta) -> sigma(x, 2^j xi, 2^j eta)
/// chi(xi) chi_0(eta)` on `[-pi, pi]^2` (`chi_0` in both slots for `j = 0`),
/// normalized so that the function equals `sum c_{k,l} e^{i(k xi + l eta)}`.
#[derive(Clone, Debug, Serialize)]
pub struct ElementarySymbolSeries {
    pub level: u32,
    pub k_max: usize,
    /// Quadrature points per axis.
    pub points: usize,
    pub x: Vec<f64>,
    /// Row-major over `k, l in -k_max..=k_max`.
    #[serde(skip)]
    pub coefficients: Vec<Complex64>,
    /// `l^1` mass of the computed coefficients outside the `k_max` box.
    pub tail: f64,
    /// Sup error of the truncated series on the quadrature grid.
    pub reconstruction_error: f64,
}

impl ElementarySymbolSeries {
    pub fn coefficient(&self, k: i64, l: i64) -> Complex64 {
        let w = 2 * self.k_max as i64 + 1;
        let (a, b) = (k + self.k_max as i64, l + self.k_max as i64);
        assert!(
            (0..w).contains(&a) && (0..w).contains(&b),
            "index outside the series box"
        );
        self.coefficients[(a * w + b) as usize]
    }

    /// Least-squares decay exponents `(a_k, a_l)` of the envelopes
    /// `max_l |c_{k,l}|` against `1 + |k|` (and symmetrically), `1 <= |k| <= k_max`.
    pub fn decay_exponents(&self) -> (f64, f64) {
        let k = self.k_max as i64;
        let env = |row: bool| -> Vec<(f64, f64)> {
            (1..=k)
                .map(|a| {
                    let m = (-k..=k)
                        .flat_map(|b| {
                            if row {
                                [self.coefficient(a, b).norm(), self.coefficient(-a, b).norm()]
                            } else {
                                [self.coefficient(b, a).norm(), self.coefficient(b, -a).norm()]
                            }
                        })
                        .fold(0.0, f64::max);
                    ((1.0 + a as f64).ln(), m.max(f64::MIN_POSITIVE).ln())
                })
                .collect()
        };
        (-least_squares_slope(&env(true)), -least_squares_slope(&env(false)))
    }

    /// `2^{-jm} max (1+|k|)^a (1+|l|)^b |c_{j,k,l}|`.
    pub fn normalized_max(&self, order: f64, a: i32, b: i32) -> f64 {
        let k = self.k_max as i64;
        let mut best: f64 = 0.0;
        for p in -k..=k {
            for q in -k..=k {
                let v = (1.0 + p.abs() as f64).powi(a) * (1.0 + q.abs() as f64).powi(b) * self.coefficient(p, q).norm();
                best = best.max(v);
            }
        }
        best * (-(order * self.level as f64)).exp2()
    }
}

/// Compute the series of level `j` at the point `x` (one-dimensional symbols).
pub fn fourier_series(
    decomposition: &SymbolDecomposition,
    j: u32,
    k_max: usize,
    x: &[f64],
) -> Result<ElementarySymbolSeries> {
    if j > decomposition.resolution.j_max() {
        return Err(Error::LevelOutOfRange {
            level: j,
            j_max: decomposition.resolution.j_max(),
        });
    }
    if x.len() > 1 {
        return Err(Error::Unsupported(
            "symbol Fourier coefficients are implemented for n = 1".into(),
        ));
    }
    let m = (4 * k_max).next_power_of_two().max(1024);
    let cut = &decomposition.cutoffs;
    let scale = (j as f64).exp2();
    let node = |a: usize| -PI + 2.0 * PI * a as f64 / m as f64;
    let mut data = vec![ZERO; m * m];
    for a in 0..m {
        let u = node(a);
        let wx = if j == 0 { cut.chi0(u.abs()) } else { cut.chi(u.abs()) };
        if wx == 0.0 {
            continue;
        }
        for b in 0..m {
            let v = node(b);
            let wy = cut.chi0(v.abs());
            if wy == 0.0 {
                continue;
            }
            let s = decomposition.symbol.eval(x, &[scale * u], &[scale * v]);
            data[a * m + b] = finite(s, &[scale * u], &[scale * v])? * (wx * wy);
        }
    }
    let samples = data.clone();
    transform_nd(&mut data, &[m, m], false);
    let norm = 1.0 / (m * m) as f64;
    let sign = |k: i64| if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let idx = |k: i64| k.rem_euclid(m as i64) as usize;
    let kk = k_max as i64;
    let half = m as i64 / 2;
    let mut coefficients = Vec::with_capacity((2 * k_max + 1).pow(2));
    let mut truncated = vec![ZERO; m * m];
    let mut tail = 0.0;
    for p in -half..half {
        for q in -half..half {
            let c = data[idx(p) * m + idx(q)] * norm * sign(p + q);
            if p.abs() <= kk && q.abs() <= kk {
                truncated[idx(p) * m + idx(q)] = data[idx(p) * m + idx(q)];
            } else {
                tail += c.norm();
            }
        }
    }
    for p in -kk..=kk {
        for q in -kk..=kk {
            coefficients.push(data[idx(p) * m + idx(q)] * norm * sign(p + q));
        }
    }
    transform_nd(&mut truncated, &[m, m], true);
    let reconstruction_error = truncated
        .iter()
        .zip(&samples)
        .map(|(t, s)| (t * norm - s).norm())
        .fold(0.0, f64::max);
    Ok(ElementarySymbolSeries {
        level: j,
        k_max,
        points: m,
        x: x.to_vec(),
        coefficients,
        tail,
        reconstruction_error,
    })
}

/// [`fourier_series`], rejecting series whose tail exceeds `tolerance`.
pub fn fourier_coefficients(
    decomposition: &SymbolDecomposition,
    j: u32,
    k_max: usize,
    x: &[f64],
    tolerance: f64,
) -> Result<ElementarySymbolSeries> {
    let series = fourier_series(decomposition, j, k_max, x)?;
    let tail = series.tail.max(series.reconstruction_error);
    if tail > tolerance {
        return Err(Error::TailTooLarge {
            level: j,
            tail,
            tolerance,
        });
    }
    Ok(series)
}

/// One term `m(x) psi(xi) phi(eta)` of an elementary symbol.
#[derive(Clone)]
pub struct ElementaryTerm {
    pub level: u32,
    pub multiplier: FrequencyFn,
    pub psi: FrequencyFn,
    pub phi: FrequencyFn,
}

/// Elementary symbol `sum_j m_j(x) psi_j(xi) phi_j(eta)` with
/// `supp psi_0 <= {|xi| <= 2}`, `supp psi_j <= {2^{j-1} <= |xi| <= 2^{j+1}}`
/// and `supp phi_j <= {|eta| <= 2^{j+1}}`.
#[derive(Clone, Default)]
pub struct ElementaryFamily {
    terms: Vec<ElementaryTerm>,
}

fn constant(c: Complex64) -> FrequencyFn {
    Arc::new(move |_| c)
}

impl ElementaryFamily {
    pub fn new(terms: Vec<ElementaryTerm>) -> Self {
        ElementaryFamily { terms }
    }

    pub fn terms(&self) -> &[ElementaryTerm] {
        &self.terms
    }

    pub fn push(&mut self, term: ElementaryTerm) {
        self.terms.push(term);
    }

    /// The `sigma^0` pieces of `sigma = 1`: `m_j = 1`, `psi_j = phi_j`,
    /// `phi_j = phi_0(2^{-j} .)`.
    pub fn paraproduct_low(resolution: &ResolutionOfUnity) -> Self {
        let terms = (0..=resolution.j_max())
            .map(|j| {
                let r = *resolution;
                let r2 = *resolution;
                ElementaryTerm {
                    level: j,
                    multiplier: constant(Complex64::new(1.0, 0.0)),
                    psi: Arc::new(move |xi| Complex64::new(r.eval(j, xi), 0.0)),
                    phi: Arc::new(move |eta| Complex64::new(r2.partial_sum(j as i32, magnitude(eta)), 0.0)),
                }
            })
            .collect();
        ElementaryFamily { terms }
    }

    /// The `sigma^1` pieces of `sigma = 1` with the roles of the arguments
    /// exchanged: `psi_k = phi_k`, `phi_k = phi_0(2^{-k+1} .)`, `1 <= k <= J`.
    pub fn paraproduct_high(resolution: &ResolutionOfUnity) -> Self {
        let terms = (1..=resolution.j_max())
            .map(|k| {
                let r = *resolution;
                let r2 = *resolution;
                ElementaryTerm {
                    level: k,
                    multiplier: constant(Complex64::new(1.0, 0.0)),
                    psi: Arc::new(move |xi| Complex64::new(r.eval(k, xi), 0.0)),
                    phi: Arc::new(move |eta| Complex64::new(r2.partial_sum(k as i32 - 1, magnitude(eta)), 0.0)),
                }
            })
            .collect();
        ElementaryFamily { terms }
    }

    /// Truncated Fourier-series expansion of the `sigma^0` pieces of an
    /// `x`-independent one-dimensional symbol: terms
    /// `c_{j,k,l} e^{i k 2^{-j} xi} phi_j(xi) e^{i l 2^{-j} eta} phi_0(2^{-j} eta)`.
    pub fn from_series(decomposition: &SymbolDecomposition, k_max: usize) -> Result<Self> {
        if decomposition.symbol.x_dependent {
            return Err(Error::Unsupported(
                "series families are built for x-independent symbols".into(),
            ));
        }
        let resolution = decomposition.resolution;
        let levels = (0..=resolution.j_max())
            .map(|j| fourier_series(decomposition, j, k_max, &[0.0]))
            .collect::<Result<Vec<_>>>()?;
        let kk = k_max as i64;
        let mut terms = Vec::new();
        for series in levels {
            let j = series.level;
            let t = (-(j as f64)).exp2();
            for k in -kk..=kk {
                for l in -kk..=kk {
                    let c = series.coefficient(k, l);
                    let r = resolution;
                    let r2 = resolution;
                    terms.push(ElementaryTerm {
                        level: j,
                        multiplier: constant(c),
                        psi: Arc::new(move |xi| Complex64::from_polar(r.eval(j, xi), k as f64 * t * xi[0])),
                        phi: Arc::new(move |eta| {
                            Complex64::from_polar(r2.partial_sum(j as i32, magnitude(eta)), l as f64 * t * eta[0])
                        }),
                    });
                }
            }
        }
        Ok(ElementaryFamily { terms })
    }

    /// Verify the support conditions on the grid frequencies.
    pub fn check_support(&self, grid: &Grid) -> Result<()> {
        let dim = grid.dim();
        for term in &self.terms {
            let scale = (term.level as f64).exp2();
            for i in 0..grid.len() {
                let xi = grid.frequency(i);
                let r = magnitude(&xi[..dim]);
                let in_psi = if term.level == 0 {
                    r <= 2.0
                } else {
                    r >= scale / 2.0 && r <= 2.0 * scale
                };
                if !in_psi && (term.psi)(&xi[..dim]) != ZERO {
                    return Err(Error::SupportViolation(format!(
                        "psi_{} is nonzero at |xi| = {r}",
                        term.level
                    )));
                }
                if r > 2.0 * scale && (term.phi)(&xi[..dim]) != ZERO {
                    return Err(Error::SupportViolation(format!(
                        "phi_{} is nonzero at |eta| = {r}",
                        term.level
                    )));
                }
            }
        }
        Ok(())
    }

    /// `sum_j m_j(x) (psi_j(D) f)(x) (phi_j(D) g)(x)`.
    pub fn apply(&self, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
        f.ensure_same_grid(g)?;
        let grid = *f.grid();
        self.check_support(&grid)?;
        let fh = forward_transform(f);
        let gh = forward_transform(g);
        let dim = grid.dim();
        let coords: Vec<[f64; 2]> = (0..grid.len()).map(|p| grid.coordinate(p)).collect();
        let parts = par::try_map_range(self.terms.len(), |t| {
            let term = &self.terms[t];
            let a = inverse_transform(&fh.multiply(|xi| (term.psi)(xi), 1.0)?);
            let b = inverse_transform(&gh.multiply(|eta| (term.phi)(eta), 1.0)?);
            Ok::<_, Error>(
                coords
                    .iter()
                    .zip(a.samples().iter().zip(b.samples()))
                    .map(|(x, (u, v))| (term.multiplier)(&x[..dim]) * u * v)
                    .collect::<Vec<_>>(),
            )
        })?;
        let mut out = vec![ZERO; grid.len()];
        for part in parts {
            for (o, v) in out.iter_mut().zip(part) {
                *o += v;
            }
        }
        GridFunction::new(grid, out)
    }

    /// The symbol `sum_j m_j(x) psi_j(xi) phi_j(eta)`.
    pub fn assembled_symbol(&self, name: &str, order: f64) -> BilinearSymbol {
        let terms = self.terms.clone();
        BilinearSymbol::new(name, order, move |x, xi, eta| {
            terms
                .iter()
                .map(|t| (t.multiplier)(x) * (t.psi)(xi) * (t.phi)(eta))
                .sum()
        })
    }
}

/// `T_sigma(f, g)` for `sigma = 1` through the paraproduct split:
/// `sum_j (phi_j(D) f)(phi_0(2^{-j} D) g) + sum_k (phi_0(2^{-k+1} D) f)(phi_k(D) g)`.
pub fn paraproduct_product(resolution: &ResolutionOfUnity, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let low = ElementaryFamily::paraproduct_low(resolution).apply(f, g)?;
    let high = ElementaryFamily::paraproduct_high(resolution).apply(g, f)?;
    low.add(&high)
}

/// Per-level summary of a symbol's Fourier-series expansion.
#[derive(Clone, Debug, Serialize)]
pub struct LevelSummary {
    pub level: u32,
    pub tail: f64,
    pub reconstruction_error: f64,
    /// Decay exponents fitted in `k` and in `l`.
    pub decay: (f64, f64),
    /// `2^{-jm} max (1+|k|)^a (1+|l|)^b |c_{j,k,l}|`.
    pub normalized_max: f64,
}

/// Paraproduct reconstruction, per-level coefficient tails and decay, and the
/// trend of the normalized coefficient maxima over the upper half of the
/// levels, `max(1, J/2) <= j <= J`, past the transient of the rescaling.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub symbol: String,
    pub order: f64,
    pub j_max: u32,
    pub k_max: usize,
    pub exponents: (i32, i32),
    pub reconstruction_residual: f64,
    pub levels: Vec<LevelSummary>,
    pub max_tail: f64,
    pub tail_tolerance: f64,
    /// Least-squares slope of `ln normalized_max` against `j`.
    pub coefficient_slope: f64,
    pub coefficient_trend_passed: bool,
}

/// Trend slopes up to this value count as no growth.
pub const TREND_TOLERANCE: f64 = 0.05;

/// Series truncation `|k|, |l| <= K_MAX` used by default.
pub const DEFAULT_K_MAX: usize = 16;

/// Default weights `(1+|k|)^a (1+|l|)^b` of the coefficient bound.
pub const DEFAULT_DECAY_EXPONENTS: (i32, i32) = (4, 4);

/// Expand every `sigma^0_j` of a one-dimensional symbol into its Fourier
/// series. `x`-dependent symbols are expanded at four points of the grid
/// period and the worst values are kept.
pub fn decompose(
    symbol: &BilinearSymbol,
    resolution: &ResolutionOfUnity,
    grid: &Grid,
    k_max: usize,
    exponents: (i32, i32),
    tail_tolerance: f64,
) -> Result<DecompositionReport> {
    if grid.dim() != 1 {
        return Err(Error::Unsupported(
            "symbol decompositions are implemented for n = 1".into(),
        ));
    }
    let d = split_paraproduct(symbol, resolution);
    let xs: Vec<Vec<f64>> = if symbol.x_dependent {
        (0..4).map(|i| vec![grid.length() * i as f64 / 4.0]).collect()
    } else {
        vec![vec![0.0]]
    };
    let reconstruction_residual = d.reconstruction_residual(grid, &xs);
    let j_max = resolution.j_max();
    let levels = par::try_map_range(j_max as usize + 1, |j| {
        let mut summary: Option<LevelSummary> = None;
        for x in &xs {
            let series = fourier_series(&d, j as u32, k_max, x)?;
            let (ak, al) = series.decay_exponents();
            let current = LevelSummary {
                level: j as u32,
                tail: series.tail,
                reconstruction_error: series.reconstruction_error,
                decay: (ak, al),
                normalized_max: series.normalized_max(symbol.order, exponents.0, exponents.1),
            };
            summary = Some(match summary {
                None => current,
                Some(s) => LevelSummary {
                    level: s.level,
                    tail: s.tail.max(current.tail),
                    reconstruction_error: s.reconstruction_error.max(current.reconstruction_error),
                    decay: (s.decay.0.min(current.decay.0), s.decay.1.min(current.decay.1)),
                    normalized_max: s.normalized_max.max(current.normalized_max),
                },
            });
        }
        Ok::<_, Error>(summary.expect("at least one sample point"))
    })?;
    let points: Vec<(f64, f64)> = levels
        .iter()
        .filter(|l| l.level >= (j_max / 2).max(1) && l.normalized_max > 0.0)
        .map(|l| (l.level as f64, l.normalized_max.ln()))
        .collect();
    let coefficient_slope = least_squares_slope(&points);
    let max_tail = levels
        .iter()
        .map(|l| l.tail.max(l.reconstruction_error))
        .fold(0.0, f64::max);
    Ok(DecompositionReport {
        symbol: symbol.name.clone(),
        order: symbol.order,
        j_max,
        k_max,
        exponents,
        reconstruction_residual,
        levels,
        max_tail,
        tail_tolerance,
        coefficient_slope,
        coefficient_trend_passed: coefficient_slope <= TREND_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::BumpProfile;
    use crate::spectral::pointwise_product;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band_limited(grid: Grid, seed: u64, band: f64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..grid.len())
            .map(|i| {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                let xi = grid.frequency(i);
                if magnitude(&xi[..grid.dim()]) <= band {
                    Complex64::new(a, b)
                } else {
                    ZERO
                }
            })
            .collect();
        inverse_transform(&Spectrum::new(grid, coeffs).unwrap())
    }

    fn rel(a: &GridFunction, b: &GridFunction) -> f64 {
        a.sub(b).unwrap().max_abs() / b.max_abs().max(1e-300)
    }

    #[test]
    fn unit_symbol_is_the_product() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = random_band_limited(grid, 1, 20.0);
        let g = random_band_limited(grid, 2, 20.0);
        let fg = pointwise_product(&f, &g).unwrap();
        let one = BilinearSymbol::one();
        assert!(rel(&apply_bilinear(&one, &f, &g).unwrap(), &fg) < 1e-10);
        assert!(rel(&apply_bilinear_direct(&one, &f, &g).unwrap(), &fg) < 1e-10);
        assert!(rel(&apply_bilinear_fft(&one, &f, &g).unwrap(), &fg) < 1e-10);
    }

    #[test]
    fn unit_symbol_two_dimensional() {
        let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = random_band_limited(grid, 3, 5.0);
        let g = random_band_limited(grid, 4, 5.0);
        let fg = pointwise_product(&f, &g).unwrap();
        let one = BilinearSymbol::one();
        assert!(rel(&apply_bilinear(&one, &f, &g).unwrap(), &fg) < 1e-10);
        assert!(rel(&apply_bilinear_fft(&one, &f, &g).unwrap(), &fg) < 1e-10);
    }

    #[test]
    fn separable_symbol() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = random_band_limited(grid, 5, 20.0);
        let g = random_band_limited(grid, 6, 20.0);
        let sigma = BilinearSymbol::x_independent("a", 2.0, |xi, _| Complex64::new(xi[0] * xi[0], 0.0));
        let af = crate::spectral::apply_multiplier(|xi| Complex64::new(xi[0] * xi[0], 0.0), 1.0, &f).unwrap();
        let expected = pointwise_product(&af, &g).unwrap();
        assert!(rel(&apply_bilinear(&sigma, &f, &g).unwrap(), &expected) < 1e-10);
    }

    #[test]
    fn fast_paths_match_direct_sum() {
        let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
        let f = random_band_limited(grid, 7, 12.0);
        let g = random_band_limited(grid, 8, 12.0);
        for name in ["bracket", "inverse-bracket", "chirp"] {
            let sigma = BilinearSymbol::builtin(name, grid.length()).unwrap();
            let d = apply_bilinear_direct(&sigma, &f, &g).unwrap();
            assert!(rel(&apply_bilinear(&sigma, &f, &g).unwrap(), &d) < 1e-10, "{name}");
            assert!(rel(&apply_bilinear_fft(&sigma, &f, &g).unwrap(), &d) < 1e-10, "{name}");
        }
    }

    #[test]
    fn two_mode_closed_form() {
        let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
        let sigma = BilinearSymbol::builtin("modulated", grid.length()).unwrap();
        let f = GridFunction::mode(grid, &[3]);
        let g = GridFunction::mode(grid, &[-5]);
        let out = apply_bilinear(&sigma, &f, &g).unwrap();
        for (p, v) in out.samples().iter().enumerate() {
            let x = grid.coordinate(p);
            let expected = sigma.eval(&x[..1], &[3.0], &[-5.0]) * Complex64::from_polar(1.0, -2.0 * x[0]);
            assert!((v - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn bilinearity() {
        let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
        let sigma = BilinearSymbol::builtin("modulated", grid.length()).unwrap();
        let f1 = random_band_limited(grid, 9, 10.0);
        let f2 = random_band_limited(grid, 10, 10.0);
        let g = random_band_limited(grid, 11, 10.0);
        let a = Complex64::new(0.3, -1.2);
        let lhs = apply_bilinear(&sigma, &f1.axpy(a, &f2).unwrap(), &g).unwrap();
        let rhs = apply_bilinear(&sigma, &f1, &g)
            .unwrap()
            .axpy(a, &apply_bilinear(&sigma, &f2, &g).unwrap())
            .unwrap();
        assert!(rel(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn grid_mismatch_and_non_finite() {
        let g1 = Grid::new(1, 32, 2.0 * PI).unwrap();
        let g2 = Grid::new(1, 64, 2.0 * PI).unwrap();
        let one = BilinearSymbol::one();
        assert!(matches!(
            apply_bilinear(&one, &GridFunction::mode(g1, &[1]), &GridFunction::mode(g2, &[1])),
            Err(Error::GridMismatch)
        ));
        let bad = BilinearSymbol::x_independent("bad", 0.0, |xi, _| Complex64::new(1.0 / xi[0], 0.0));
        assert!(matches!(
            apply_bilinear(&bad, &GridFunction::mode(g1, &[1]), &GridFunction::mode(g1, &[1])),
            Err(Error::NonFiniteMultiplier { .. })
        ));
    }

    #[test]
    fn seminorms() {
        let one = BilinearSymbol::one();
        assert!((bs_seminorm(&one, 2, 0, 2.0 * PI).unwrap() - 1.0).abs() < 1e-8);
        let bracket = BilinearSymbol::builtin("bracket", 2.0 * PI).unwrap();
        let sweep = bs_seminorm_sweep(&bracket, 2, 3, 2.0 * PI).unwrap();
        assert!(sweep.stable, "{sweep:?}");
        let chirp = BilinearSymbol::builtin("chirp", 2.0 * PI).unwrap();
        let sweep = bs_seminorm_sweep(&chirp, 1, 3, 2.0 * PI).unwrap();
        assert!(!sweep.stable, "{sweep:?}");
    }

    #[test]
    fn paraproduct_reconstruction() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let res = ResolutionOfUnity::new(BumpProfile::Mollifier, 4).unwrap();
        for name in ["one", "bracket", "modulated"] {
            let sigma = BilinearSymbol::builtin(name, grid.length()).unwrap();
            let d = split_paraproduct(&sigma, &res);
            let xs = vec![vec![0.0], vec![1.0], vec![2.5]];
            assert!(d.reconstruction_residual(&grid, &xs) < 1e-10, "{name}");
        }
        let d = split_paraproduct(&BilinearSymbol::one(), &res);
        assert_eq!(d.sigma0(3, &[0.0], &[1.0], &[0.5]), ZERO);
    }

    #[test]
    fn coefficients_of_unit_symbol() {
        let res = ResolutionOfUnity::new(BumpProfile::Mollifier, 5).unwrap();
        let d = split_paraproduct(&BilinearSymbol::one(), &res);
        let s1 = fourier_series(&d, 1, 8, &[0.0]).unwrap();
        let s3 = fourier_series(&d, 3, 8, &[0.0]).unwrap();
        for k in -8..=8 {
            for l in -8..=8 {
                assert!((s1.coefficient(k, l) - s3.coefficient(k, l)).norm() < 1e-15);
                let c = s1.coefficient(k, l);
                assert!((s1.coefficient(-k, -l) - c.conj()).norm() < 1e-12);
            }
        }
        // c_{0,0} = (2 pi)^{-2} int chi int chi_0, by a fine midpoint rule.
        let cut = AnnulusCutoffs::default();
        let n = 200_000;
        let h = 6.0 / n as f64;
        let (mut ia, mut ib) = (0.0, 0.0);
        for i in 0..n {
            let u = -3.0 + (i as f64 + 0.5) * h;
            ia += cut.chi(u.abs()) * h;
            ib += cut.chi0(u.abs()) * h;
        }
        let expected = ia * ib / (4.0 * PI * PI);
        let got = s1.coefficient(0, 0).re;
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn tail_errors_carry_the_measured_tail() {
        let res = ResolutionOfUnity::new(BumpProfile::Mollifier, 4).unwrap();
        let d = split_paraproduct(&BilinearSymbol::one(), &res);
        match fourier_coefficients(&d, 1, 4, &[0.0], 1e-12) {
            Err(Error::TailTooLarge { tail, level: 1, .. }) => assert!(tail > 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn elementary_family_reproduces_the_product() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 3, &grid).unwrap();
        let f = random_band_limited(grid, 12, 7.0);
        let g = random_band_limited(grid, 13, 7.0);
        let fg = pointwise_product(&f, &g).unwrap();
        assert!(rel(&paraproduct_product(&res, &f, &g).unwrap(), &fg) < 1e-9);
    }

    #[test]
    fn elementary_family_matches_assembled_symbol() {
        let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 2, &grid).unwrap();
        let d = split_paraproduct(&BilinearSymbol::builtin("bracket", grid.length()).unwrap(), &res);
        let family = ElementaryFamily::from_series(&d, 3).unwrap();
        let f = random_band_limited(grid, 14, 3.0);
        let g = random_band_limited(grid, 15, 3.0);
        let a = family.apply(&f, &g).unwrap();
        let b = apply_bilinear(&family.assembled_symbol("series", 1.0), &f, &g).unwrap();
        assert!(rel(&a, &b) < 1e-9);
    }

    #[test]
    fn single_term_and_support_violation() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let res = ResolutionOfUnity::new(BumpProfile::Mollifier, 4).unwrap();
        let f = random_band_limited(grid, 16, 10.0);
        let g = random_band_limited(grid, 17, 10.0);
        let low = ElementaryFamily::paraproduct_low(&res);
        let single = ElementaryFamily::new(vec![low.terms()[1].clone()]);
        let expected = pointwise_product(
            &res.band_project(1, &f).unwrap(),
            &crate::spectral::apply_radial(|r| res.partial_sum(1, r), 1.0, &g).unwrap(),
        )
        .unwrap();
        assert!(rel(&single.apply(&f, &g).unwrap(), &expected) < 1e-12);

        let wide = ElementaryFamily::new(vec![ElementaryTerm {
            level: 1,
            multiplier: constant(Complex64::new(1.0, 0.0)),
            psi: Arc::new(|_| Complex64::new(1.0, 0.0)),
            phi: Arc::new(|_| Complex64::new(1.0, 0.0)),
        }]);
        assert!(matches!(wide.apply(&f, &g), Err(Error::SupportViolation(_))));
    }

    #[test]
    fn coefficient_maxima_do_not_grow_with_level() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let res = ResolutionOfUnity::new(BumpProfile::Mollifier, 6).unwrap();
        for name in ["one", "bracket", "inverse-bracket"] {
            let sigma = BilinearSymbol::builtin(name, grid.length()).unwrap();
            let report = decompose(&sigma, &res, &grid, 8, DEFAULT_DECAY_EXPONENTS, 1e-6).unwrap();
            assert!(report.coefficient_trend_passed, "{name}: {}", report.coefficient_slope);
            assert!(report.reconstruction_residual < 1e-10);
            assert_eq!(report.levels.len(), 7);
        }
    }

    #[test]
    fn negative_order_family_decays_with_bandwidth() {
        let grid = Grid::new(1, 256, 2.0 * PI).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 6, &grid).unwrap();
        let mut family = ElementaryFamily::paraproduct_low(&res);
        let terms: Vec<ElementaryTerm> = family
            .terms()
            .iter()
            .map(|t| ElementaryTerm {
                multiplier: constant(Complex64::new((-(t.level as f64)).exp2(), 0.0)),
                ..t.clone()
            })
            .collect();
        family = ElementaryFamily::new(terms);
        let mut previous = f64::INFINITY;
        for b in 1..=5 {
            let f = GridFunction::mode(grid, &[1 << b]);
            let g = GridFunction::mode(grid, &[1]);
            let n = crate::spectral::lp_norm(&family.apply(&f, &g).unwrap(), 2.0);
            assert!(n < previous, "level {b}: {n} >= {previous}");
            previous = n;
        }
    }
}
