//! Empirical checks of the embedding, product and sharpness statements:
//! seeded ensembles of band-limited functions, norm ratios swept over the
//! bandwidth, and the growth scan for the sharpness counterexample.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{besov_norm, bmo_norm, f_norm, lifting_check, tl_infinity_norm, xw_norm, DyadicCubeSet, SpaceSpec};
use crate::par;
use crate::partition::{AnnulusCutoffs, BumpProfile, ResolutionOfUnity};
use crate::rational::{min_one, Exponent, Rational};
use crate::spectral::{bracket, forward_transform, inverse_transform, pointwise_product, Grid, GridFunction, Spectrum};
use crate::weights::{least_squares_slope, AdmissibleWeight};

/// Trend slopes of `ln(ratio)` against the bandwidth level up to this value
/// count as no trend.
pub const TREND_TOLERANCE: f64 = 0.05;

/// Default bound on `max / min` of a ratio band.
pub const SPREAD_BOUND: f64 = 16.0;

/// Extra decay `epsilon` of ensemble spectra beyond `s + n/2`.
pub const ENSEMBLE_EPSILON: f64 = 0.1;

/// Seeded random band-limited real functions with Gaussian coefficients of
/// size `<xi>^{-(s + n/2 + 0.1)}` on `|xi| <= 2^{level - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub count: usize,
    pub s: f64,
    pub level: u32,
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    spec: EnsembleSpec,
    members: Vec<GridFunction>,
}

impl Ensemble {
    /// Member `i` draws from the ChaCha8 stream `(level << 32) | i` of `seed`,
    /// so members are reproducible one at a time and in any order.
    pub fn generate(grid: &Grid, spec: EnsembleSpec) -> Result<Self> {
        let band = ((spec.level as f64) - 1.0).exp2();
        if band > grid.nyquist() {
            return Err(Error::InvalidParameter(format!(
                "ensemble band {band} exceeds the Nyquist bound {}",
                grid.nyquist()
            )));
        }
        let members = par::map_range(spec.count, |i| {
            member(grid, &spec, band, ((spec.level as u64) << 32) | i as u64)
        });
        Ok(Ensemble { spec, members })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn members(&self) -> &[GridFunction] {
        &self.members
    }
}

fn member(grid: &Grid, spec: &EnsembleSpec, band: f64, stream: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let dim = grid.dim();
    let exponent = -(spec.s + dim as f64 / 2.0 + ENSEMBLE_EPSILON);
    let volume = grid.volume();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let mirror = grid.spectrum_index(&[-k[0], -k[1]]);
        let xi = grid.frequency(i);
        let xi = &xi[..dim];
        if mirror < i || crate::spectral::magnitude(xi) > band {
            continue;
        }
        let amp = bracket(xi).powf(exponent) * volume;
        let a: f64 = StandardNormal.sample(&mut rng);
        if mirror == i {
            coeffs[i] = Complex64::new(a * amp, 0.0);
        } else {
            let b: f64 = StandardNormal.sample(&mut rng);
            let z = Complex64::new(a, b) * (amp / std::f64::consts::SQRT_2);
            coeffs[i] = z;
            coeffs[mirror] = z.conj();
        }
    }
    let mut f = inverse_transform(&Spectrum::new(*grid, coeffs).expect("coefficient count matches grid"));
    // The samples are real up to rounding; drop the residue.
    f = f.map(|z| Complex64::new(z.re, 0.0));
    f
}

/// Grid, resolution and bandwidth levels shared by a ratio sweep.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub grid: Grid,
    pub resolution: ResolutionOfUnity,
    pub seed: u64,
    pub count: usize,
    pub levels: Vec<u32>,
    pub spread_bound: f64,
}

impl SweepConfig {
    /// `n = 1`, `N = 4096`, `L = 16` (cubes align, `2^{J+1} <= pi N / L`
    /// holds up to `J = 8`), resolution `J = 8`, bandwidth levels `4..=8`.
    pub fn standard(seed: u64, count: usize) -> Result<Self> {
        let grid = Grid::new(1, 4096, 16.0)?;
        Ok(SweepConfig {
            resolution: ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 8, &grid)?,
            grid,
            seed,
            count,
            levels: (4..=8).collect(),
            spread_bound: SPREAD_BOUND,
        })
    }

    pub fn with_levels(mut self, levels: impl IntoIterator<Item = u32>) -> Self {
        self.levels = levels.into_iter().collect();
        self
    }

    fn ensembles(&self, s: f64) -> Result<Vec<Ensemble>> {
        self.levels
            .iter()
            .map(|&level| {
                Ensemble::generate(
                    &self.grid,
                    EnsembleSpec {
                        seed: self.seed,
                        count: self.count,
                        s,
                        level,
                    },
                )
            })
            .collect()
    }

    fn cubes(&self) -> Result<DyadicCubeSet> {
        DyadicCubeSet::new(&self.grid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioSample {
    pub level: u32,
    pub member: usize,
    pub value: f64,
}

/// Ratios over an ensemble sweep with their band and trend.
#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub name: String,
    pub samples: Vec<RatioSample>,
    pub min: f64,
    pub max: f64,
    /// `max / min`.
    pub spread: f64,
    pub spread_bound: f64,
    /// Least-squares slope of `ln(ratio)` against the level.
    pub trend_slope: f64,
    pub trend_tolerance: f64,
    pub skipped: usize,
    pub passed: bool,
}

impl RatioReport {
    pub fn new(name: &str, samples: Vec<RatioSample>, skipped: usize, spread_bound: f64) -> Self {
        let min = samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        let max = samples.iter().map(|s| s.value).fold(0.0, f64::max);
        let spread = if samples.is_empty() { f64::NAN } else { max / min };
        let points: Vec<(f64, f64)> = samples.iter().map(|s| (s.level as f64, s.value.ln())).collect();
        let trend_slope = least_squares_slope(&points);
        let passed = !samples.is_empty()
            && samples.iter().all(|s| s.value.is_finite() && s.value > 0.0)
            && spread <= spread_bound
            && trend_slope <= TREND_TOLERANCE;
        RatioReport {
            name: name.to_string(),
            samples,
            min,
            max,
            spread,
            spread_bound,
            trend_slope,
            trend_tolerance: TREND_TOLERANCE,
            skipped,
            passed,
        }
    }

    /// Per-level maxima, for plotting.
    pub fn level_maxima(&self) -> Vec<(f64, f64)> {
        let mut levels: Vec<u32> = self.samples.iter().map(|s| s.level).collect();
        levels.dedup();
        levels
            .into_iter()
            .map(|l| {
                let m = self
                    .samples
                    .iter()
                    .filter(|s| s.level == l)
                    .map(|s| s.value)
                    .fold(0.0, f64::max);
                (l as f64, m)
            })
            .collect()
    }
}

/// Evaluate `ratio` on every member of every level; zero denominators are
/// skipped. Members run in parallel and are collected in index order.
fn sweep<F>(config: &SweepConfig, s: f64, name: &str, ratio: F) -> Result<RatioReport>
where
    F: Fn(&[GridFunction], usize) -> Result<Option<f64>> + Sync + Send,
{
    let mut samples = Vec::new();
    let mut skipped = 0;
    for ensemble in config.ensembles(s)? {
        let level = ensemble.spec.level;
        let members = ensemble.members();
        let values = par::try_map_range(members.len(), |i| ratio(members, i))?;
        for (member, v) in values.into_iter().enumerate() {
            match v {
                Some(value) => samples.push(RatioSample { level, member, value }),
                None => skipped += 1,
            }
        }
    }
    Ok(RatioReport::new(name, samples, skipped, config.spread_bound))
}

fn quotient(num: f64, den: f64) -> Option<f64> {
    if den > 0.0 {
        Some(num / den)
    } else {
        None
    }
}

/// Parameters `0 < p < inf` (any `q`) or `p = inf` with `q <= 2`.
pub fn embedding_gate(p: Exponent, q: Exponent) -> Result<()> {
    if !p.is_positive() || !q.is_positive() {
        return Err(Error::Gate(format!("p = {p} and q = {q} must be positive")));
    }
    if p.is_infinite() && q > Exponent::int(2) {
        return Err(Error::Gate(format!("p = inf requires q <= 2, got q = {q}")));
    }
    Ok(())
}

/// `1 / r'` with `r = max(1, p)`.
pub fn refined_exponent(p: Exponent) -> Rational {
    let r = Exponent::int(1).max(p);
    Rational::from_integer(1) - r.recip()
}

/// `min(1, p, q) > p / (p + 1)` with `0 < p < inf`, decided exactly.
pub fn product_gate(p: Exponent, q: Exponent) -> Result<()> {
    if p.is_infinite() || !p.is_positive() || !q.is_positive() {
        return Err(Error::Gate(format!(
            "the product estimate needs 0 < p < inf and q > 0, got p = {p}, q = {q}"
        )));
    }
    let lhs = min_one(p, q);
    let rhs = p.p_over_p_plus_one();
    if lhs <= rhs {
        return Err(Error::Gate(format!(
            "min(1, p, q) = {lhs} <= p/(p+1) = {rhs} for p = {p}, q = {q}"
        )));
    }
    Ok(())
}

fn critical_spec(p: Exponent, q: Exponent, dim: usize, weight: AdmissibleWeight) -> Result<SpaceSpec> {
    let s = dim as f64 * rational_f64(p.recip());
    SpaceSpec::new(s, p.to_f64(), q.to_f64(), weight)
}

fn rational_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `||f||_{X_w} / ||f||_{F^{n/p}_{p,q}}` with `w(t) = (1 + log_+ 1/t)^a`.
pub fn embedding_ratio(config: &SweepConfig, p: Exponent, q: Exponent, a: f64) -> Result<RatioReport> {
    embedding_gate(p, q)?;
    let dim = config.grid.dim();
    let spec = critical_spec(p, q, dim, AdmissibleWeight::constant())?;
    let weight = AdmissibleWeight::prototype(a, 0.0)?;
    let cubes = config.cubes()?;
    let cutoffs = AnnulusCutoffs::new(config.resolution.profile());
    let res = config.resolution;
    let name = format!("X_w(a = {a}) / F^(n/p)_(p = {p}, q = {q})");
    sweep(config, spec.s, &name, |members, i| {
        let f = &members[i];
        let den = f_norm(f, &spec, &res, Some(&cubes))?;
        let num = xw_norm(f, &weight, &cutoffs, res.j_max(), &cubes)?;
        Ok(quotient(num, den))
    })
}

/// Per-member comparison of the refined weight exponent `a` against `b`:
/// counts members whose `X_{w_b}` norm exceeds the `X_{w_a}` norm.
#[derive(Clone, Debug, Serialize)]
pub struct WeightComparison {
    pub refined: f64,
    pub coarse: f64,
    pub members: usize,
    pub violations: usize,
    pub max_excess: f64,
}

pub fn compare_weight_exponents(config: &SweepConfig, s: f64, refined: f64, coarse: f64) -> Result<WeightComparison> {
    let wa = AdmissibleWeight::prototype(refined, 0.0)?;
    let wb = AdmissibleWeight::prototype(coarse, 0.0)?;
    let cubes = config.cubes()?;
    let cutoffs = AnnulusCutoffs::new(config.resolution.profile());
    let j = config.resolution.j_max();
    let mut members = 0;
    let mut violations = 0;
    let mut max_excess: f64 = 0.0;
    for ensemble in config.ensembles(s)? {
        let fs = ensemble.members();
        let pairs = par::try_map_range(fs.len(), |i| {
            let a = xw_norm(&fs[i], &wa, &cutoffs, j, &cubes)?;
            let b = xw_norm(&fs[i], &wb, &cutoffs, j, &cubes)?;
            Ok::<_, Error>((a, b))
        })?;
        for (a, b) in pairs {
            members += 1;
            if b > a {
                violations += 1;
                max_excess = max_excess.max(b - a);
            }
        }
    }
    Ok(WeightComparison {
        refined,
        coarse,
        members,
        violations,
        max_excess,
    })
}

/// `||f g||_{F^{n/p,1/w}_{p,q}} / (||f||_{F^{n/p}_{p,q}} ||g||_{F^{n/p}_{p,q}})`
/// with `w(t) = (1 + log_+ 1/t)^{1/r'}`; member `i` is paired with `i + 1`.
pub fn product_estimate_ratio(config: &SweepConfig, p: Exponent, q: Exponent) -> Result<RatioReport> {
    product_gate(p, q)?;
    let dim = config.grid.dim();
    let a = rational_f64(refined_exponent(p));
    let plain = critical_spec(p, q, dim, AdmissibleWeight::constant())?;
    let inverse = critical_spec(p, q, dim, AdmissibleWeight::prototype(-a, 0.0)?)?;
    let res = config.resolution;
    let name = format!("F^(n/p,1/w) product / F^(n/p) norms (p = {p}, q = {q})");
    sweep(config, plain.s, &name, |members, i| {
        let f = &members[i];
        let g = &members[(i + 1) % members.len()];
        let fg = pointwise_product(f, g)?;
        let num = f_norm(&fg, &inverse, &res, None)?;
        let den = f_norm(f, &plain, &res, None)? * f_norm(g, &plain, &res, None)?;
        Ok(quotient(num, den))
    })
}

/// Ratio of `F^{s,w}_{inf,q}` norms under the standard resolution and the
/// alternative one built on the other transition profile.
/// `||u||_{F^{n/p, omega}_{p,q}} / (||f||_{F^{n/p}_{p,q}} ||g||_{F^{n/p}_{p,q}})`
/// for `v(D) u = f g`, pairing member `i` with member `i + 1`.
pub fn log_schrodinger_ratio(config: &SweepConfig, p: f64, q: f64) -> Result<RatioReport> {
    let operator = crate::bilinear::BilinearOperator::new(&crate::bilinear::BilinearSymbol::one(), &config.grid)?;
    let res = config.resolution;
    let s = config.grid.dim() as f64 / p;
    let name = format!("log-Schrodinger F^(n/p,omega) / F^(n/p) norms (p = {p}, q = {q})");
    sweep(config, s, &name, |members, i| {
        let f = &members[i];
        let g = &members[(i + 1) % members.len()];
        let report = crate::pde::log_schrodinger_solve(&operator, f, g, p, q, &res)?;
        Ok(quotient(report.solution_norm, report.data_norms))
    })
}

pub fn resolution_independence_check(config: &SweepConfig, spec: &SpaceSpec) -> Result<RatioReport> {
    if !spec.p.is_infinite() {
        return Err(Error::InvalidSpace("the resolution check uses p = inf".into()));
    }
    let first = config.resolution;
    let other = match first.profile() {
        BumpProfile::Mollifier => BumpProfile::Smoothstep7,
        BumpProfile::Smoothstep7 => BumpProfile::Mollifier,
    };
    let second = ResolutionOfUnity::for_grid(other, first.j_max(), &config.grid)?;
    let cubes = config.cubes()?;
    let name = format!("F^(s = {}, w)_(inf, q = {}) under two resolutions", spec.s, spec.q);
    sweep(config, spec.s, &name, |members, i| {
        let a = tl_infinity_norm(&members[i], spec, &first, &cubes)?;
        let b = tl_infinity_norm(&members[i], spec, &second, &cubes)?;
        Ok(quotient(a, b))
    })
}

/// The two Besov / Triebel-Lizorkin embeddings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingCase {
    /// `B^{s + n/p}_{p,inf} -> F^s_{inf,q}`.
    BesovIntoTl { p: Exponent, s: Exponent, q: Exponent },
    /// `F^s_{p,q} -> B^{s1}_{p1,q1}` with `s - n/p = s1 - n/p1`, `p < p1`, `p <= q1`.
    TlIntoBesov {
        p: Exponent,
        q: Exponent,
        s: Exponent,
        p1: Exponent,
        q1: Exponent,
        s1: Exponent,
    },
}

fn finite(e: Exponent, name: &str) -> Result<Rational> {
    match e {
        Exponent::Finite(r) => Ok(r),
        Exponent::Infinite => Err(Error::IndexRelation(format!("{name} must be finite"))),
    }
}

impl EmbeddingCase {
    /// Check the index relations exactly.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            EmbeddingCase::BesovIntoTl { p, s, q } => {
                finite(s, "s")?;
                if p.is_infinite() || !p.is_positive() || !q.is_positive() {
                    return Err(Error::IndexRelation(format!(
                        "B^(s+n/p)_(p,inf) -> F^s_(inf,q) needs 0 < p < inf and q > 0, got p = {p}, q = {q}"
                    )));
                }
                Ok(())
            }
            EmbeddingCase::TlIntoBesov { p, q, s, p1, q1, s1 } => {
                let n = Rational::from_integer(dim as i64);
                let (s, s1) = (finite(s, "s")?, finite(s1, "s1")?);
                if !p.is_positive() || !q.is_positive() || !q1.is_positive() {
                    return Err(Error::IndexRelation("exponents must be positive".into()));
                }
                if p >= p1 {
                    return Err(Error::IndexRelation(format!("p = {p} must be below p1 = {p1}")));
                }
                if s - n * p.recip() != s1 - n * p1.recip() {
                    return Err(Error::IndexRelation(format!(
                        "s - n/p = {} differs from s1 - n/p1 = {}",
                        s - n * p.recip(),
                        s1 - n * p1.recip()
                    )));
                }
                if p > q1 {
                    return Err(Error::IndexRelation(format!(
                        "the embedding holds if and only if p <= q1; got p = {p}, q1 = {q1}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Target-space norm over source-space norm for one of the embeddings.
pub fn besov_tl_embedding_check(config: &SweepConfig, case: EmbeddingCase) -> Result<RatioReport> {
    let dim = config.grid.dim();
    case.validate(dim)?;
    let res = config.resolution;
    let cubes = config.cubes()?;
    match case {
        EmbeddingCase::BesovIntoTl { p, s, q } => {
            let s = s.to_f64();
            let source = SpaceSpec::classical(s + dim as f64 * rational_f64(p.recip()), p.to_f64(), f64::INFINITY)?;
            let target = SpaceSpec::classical(s, f64::INFINITY, q.to_f64())?;
            let name = format!("F^({s})_(inf,{q}) / B^(s+n/p)_({p},inf)");
            sweep(config, source.s, &name, |members, i| {
                let num = tl_infinity_norm(&members[i], &target, &res, &cubes)?;
                let den = besov_norm(&members[i], &source, &res)?;
                Ok(quotient(num, den))
            })
        }
        EmbeddingCase::TlIntoBesov { p, q, s, p1, q1, s1 } => {
            let source = SpaceSpec::classical(s.to_f64(), p.to_f64(), q.to_f64())?;
            let target = SpaceSpec::classical(s1.to_f64(), p1.to_f64(), q1.to_f64())?;
            let name = format!("B^({s1})_({p1},{q1}) / F^({s})_({p},{q})");
            sweep(config, source.s, &name, |members, i| {
                let num = besov_norm(&members[i], &target, &res)?;
                let den = f_norm(&members[i], &source, &res, Some(&cubes))?;
                Ok(quotient(num, den))
            })
        }
    }
}

/// Identification of `X_w` with `L^inf` (`w = 1`), of `X_w` with bmo
/// (`w = 1 + log_+ 1/t`), and of `F^0_{inf,2}` with bmo.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identification {
    XwConstantVsSup,
    XwLogVsBmo,
    TlInfinityVsBmo,
}

impl Identification {
    pub const ALL: [Identification; 3] = [
        Identification::XwConstantVsSup,
        Identification::XwLogVsBmo,
        Identification::TlInfinityVsBmo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identification::XwConstantVsSup => "X_1 / L^inf",
            Identification::XwLogVsBmo => "X_(1+log_+ 1/t) / bmo",
            Identification::TlInfinityVsBmo => "F^0_(inf,2) / bmo",
        }
    }
}

pub fn identification_check(config: &SweepConfig, kind: Identification) -> Result<RatioReport> {
    let res = config.resolution;
    let cubes = config.cubes()?;
    let cutoffs = AnnulusCutoffs::new(res.profile());
    let one = AdmissibleWeight::constant();
    let log = AdmissibleWeight::prototype(1.0, 0.0)?;
    let tl = SpaceSpec::classical(0.0, f64::INFINITY, 2.0)?;
    sweep(config, 0.0, kind.name(), |members, i| {
        let f = &members[i];
        let (num, den) = match kind {
            Identification::XwConstantVsSup => (xw_norm(f, &one, &cutoffs, res.j_max(), &cubes)?, f.max_abs()),
            Identification::XwLogVsBmo => (xw_norm(f, &log, &cutoffs, res.j_max(), &cubes)?, bmo_norm(f, &cubes)?),
            Identification::TlInfinityVsBmo => (tl_infinity_norm(f, &tl, &res, &cubes)?, bmo_norm(f, &cubes)?),
        };
        Ok(quotient(num, den))
    })
}

/// Lifting cases `(p, q, s, lambda)` with weight `(1 + log_+ 1/t)^lambda`.
pub fn lifting_sweep(config: &SweepConfig, cases: &[(f64, f64, f64, f64)]) -> Result<RatioReport> {
    let res = config.resolution;
    let cubes = config.cubes()?;
    let specs = cases
        .iter()
        .map(|&(p, q, s, lambda)| SpaceSpec::new(s, p, q, AdmissibleWeight::prototype(lambda, 0.0)?))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    let mut skipped = 0;
    for spec in &specs {
        let report = sweep(config, spec.s, "lifting", |members, i| {
            let r = lifting_check(&members[i], spec, &res, Some(&cubes))?;
            Ok(quotient(r.left, r.right))
        })?;
        samples.extend(report.samples);
        skipped += report.skipped;
    }
    Ok(RatioReport::new(
        "F^(s,w)_(p,q) / w(D) in F^s_(p,q)",
        samples,
        skipped,
        config.spread_bound,
    ))
}

/// `||phi(2^{-j} D) f||_inf / ((1 + j ln 2)^{1/r'} ||f||_{B^0_{inf,r}})` per level.
#[derive(Clone, Debug, Serialize)]
pub struct TelescopingReport {
    pub r: f64,
    pub values: Vec<(u32, f64)>,
    pub max: f64,
    pub trend_slope: f64,
    pub passed: bool,
}

pub fn telescoping_growth_check(f: &GridFunction, r: f64, resolution: &ResolutionOfUnity) -> Result<TelescopingReport> {
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must be at least 1")));
    }
    let besov = besov_norm(f, &SpaceSpec::classical(0.0, f64::INFINITY, r)?, resolution)?;
    let spectrum = forward_transform(f);
    let inv_r_prime = 1.0 - 1.0 / r;
    let values: Vec<(u32, f64)> = (0..=resolution.j_max())
        .map(|j| {
            let low = inverse_transform(
                &spectrum
                    .multiply_radial(|x| resolution.partial_sum(j as i32, x), 1.0)
                    .expect("finite cutoff"),
            );
            let denom = (1.0 + j as f64 * std::f64::consts::LN_2).powf(inv_r_prime) * besov;
            (j, if denom > 0.0 { low.max_abs() / denom } else { 0.0 })
        })
        .collect();
    let max = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let points: Vec<(f64, f64)> = values
        .iter()
        .filter(|v| v.1 > 0.0)
        .map(|v| (v.0 as f64, v.1.ln()))
        .collect();
    let trend_slope = least_squares_slope(&points);
    Ok(TelescopingReport {
        r,
        max,
        trend_slope,
        passed: max.is_finite() && trend_slope <= TREND_TOLERANCE,
        values,
    })
}

/// Parameters of the sharpness scan: `f_delta` with
/// `f^_delta(xi) = 1_{|xi| > e} / (|xi|^n log^delta |xi|)`, truncated at
/// `R_k = 2^k e`, `k = 2..=k_max`, and the weight `(1 + log_+ 1/t)^{-gamma}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SharpnessProfile {
    pub delta: f64,
    pub gamma: f64,
    pub points: usize,
    pub k_max: u32,
}

impl SharpnessProfile {
    /// `N = 2^14`, `L = 2 pi`, radii up to `2^9 e` (the square of the largest
    /// truncation stays below `2^{12}`, inside the resolution band).
    pub fn new(delta: f64, gamma: f64) -> Result<Self> {
        Self::with_grid(delta, gamma, 1 << 14, 9)
    }

    pub fn with_grid(delta: f64, gamma: f64, points: usize, k_max: u32) -> Result<Self> {
        if !(delta > 0.5) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta = {delta} must exceed 1/2")));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter("gamma must be finite".into()));
        }
        if k_max < 4 {
            return Err(Error::InvalidParameter("the radius sweep needs k_max >= 4".into()));
        }
        let top = (k_max as f64).exp2() * std::f64::consts::E;
        if 2.0 * top > points as f64 / 4.0 {
            return Err(Error::InvalidParameter(format!(
                "2 R = {:.1} exceeds N/4 = {}; use more points or a smaller k_max",
                2.0 * top,
                points / 4
            )));
        }
        Ok(SharpnessProfile {
            delta,
            gamma,
            points,
            k_max,
        })
    }

    /// `3 - 4 delta - 2 gamma`.
    pub fn exponent(&self) -> f64 {
        3.0 - 4.0 * self.delta - 2.0 * self.gamma
    }

    /// `gamma <= 3/2 - 2 delta`.
    pub fn diverges(&self) -> bool {
        self.exponent() >= 0.0
    }

    pub fn radii(&self) -> Vec<f64> {
        (2..=self.k_max)
            .map(|k| (k as f64).exp2() * std::f64::consts::E)
            .collect()
    }

    /// `g_delta(xi)` for `n = 1`.
    pub fn g(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a > std::f64::consts::E {
            1.0 / (a * a.ln().powf(self.delta))
        } else {
            0.0
        }
    }
}

/// `S(x) = c0 + c1 B_alpha(x)` with the Box-Cox transform
/// `B_alpha(x) = (x^alpha - 1) / alpha` (`ln x` at `alpha = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
    pub rss: f64,
}

fn box_cox(x: f64, alpha: f64) -> f64 {
    if alpha.abs() < 1e-12 {
        x.ln()
    } else {
        (x.powf(alpha) - 1.0) / alpha
    }
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c0 = my - c1 * mx;
    let rss = xs.iter().zip(ys).map(|(x, y)| (y - c0 - c1 * x).powi(2)).sum();
    (c0, c1, rss)
}

/// Variable projection: the linear coefficients are eliminated by least
/// squares for each `alpha`; `alpha` is scanned on `[-4, 4]` in steps of
/// `0.01` and refined by golden-section search around the best node.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidParameter("a power fit needs at least 3 points".into()));
    }
    if xs.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidParameter("power fits need positive abscissae".into()));
    }
    let rss = |alpha: f64| {
        let b: Vec<f64> = xs.iter().map(|&x| box_cox(x, alpha)).collect();
        linear_fit(&b, ys).2
    };
    let nodes: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.01).collect();
    let best = nodes
        .iter()
        .copied()
        .min_by(|a, b| rss(*a).total_cmp(&rss(*b)))
        .expect("non-empty scan");
    let (mut lo, mut hi) = (best - 0.01, best + 0.01);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if rss(a) < rss(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let b: Vec<f64> = xs.iter().map(|&x| box_cox(x, alpha)).collect();
    let (c0, c1, rss) = linear_fit(&b, ys);
    Ok(PowerFit { alpha, c0, c1, rss })
}

/// Composite Simpson rule with `2m` intervals.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Lower bound for `(g_delta * g_delta)(xi)`, `|xi| >= 2e`, `n = 1`.
pub fn convolution_lower_bound(delta: f64, xi: f64) -> f64 {
    let e = std::f64::consts::E;
    let a = xi.abs();
    ((a - e).ln().powf(1.0 - delta) - 1.0) / ((1.0 - delta) * (2.0 * a - e) * (2.0 * a - e).ln().powf(delta))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionCheck {
    pub xi: f64,
    pub convolution: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Increments of a sequence of partial values and their decay.
#[derive(Clone, Debug, Serialize)]
pub struct CauchyReport {
    pub increments: Vec<f64>,
    pub decreasing: bool,
    /// `|last| / |first|`.
    pub last_over_first: f64,
    pub passed: bool,
}

pub fn cauchy_check(values: &[f64]) -> CauchyReport {
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let decreasing = increments.windows(2).all(|w| w[1].abs() <= w[0].abs());
    let last_over_first = match (increments.first(), increments.last()) {
        (Some(a), Some(b)) if a.abs() > 0.0 => b.abs() / a.abs(),
        _ => 0.0,
    };
    CauchyReport {
        passed: decreasing && last_over_first < 0.1,
        decreasing,
        last_over_first,
        increments,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessReport {
    pub profile: SharpnessProfile,
    pub predicted_exponent: f64,
    pub divergence_predicted: bool,
    pub radii: Vec<f64>,
    /// `||f_delta^R||_{L^2_{1/2}}` per radius.
    pub membership_norms: Vec<f64>,
    pub membership: CauchyReport,
    /// `I(R) = int_{2e <= |xi| <= R} log^{2 - 4 delta - 2 gamma} |xi| / |xi|`.
    pub oracle_values: Vec<f64>,
    pub oracle_fit: PowerFit,
    pub oracle_passed: bool,
    /// `S(R) = ||(f_delta^R)^2||^2_{F^{1/2,w}_{2,2}}` per radius.
    pub growth_values: Vec<f64>,
    pub growth_fit: PowerFit,
    /// Plain slope of `ln S` against `ln ln R`.
    pub loglog_slope: f64,
    pub growth: CauchyReport,
    pub convolution: Vec<ConvolutionCheck>,
    pub convolution_passed: bool,
    pub passed: bool,
}

/// Membership, scalar oracle, convolution bound and growth fit for `f_delta`.
pub fn sharpness_scan(profile: &SharpnessProfile) -> Result<SharpnessReport> {
    let e = std::f64::consts::E;
    let grid = Grid::new(1, profile.points, 2.0 * std::f64::consts::PI)?;
    let j_max = ((grid.nyquist().log2()).floor() as u32).saturating_sub(1);
    let resolution = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, j_max, &grid)?;
    let radii = profile.radii();
    let alpha = profile.exponent();
    let beta = alpha - 1.0;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();

    // Scalar oracle, integrated in u = ln |xi| (both signs of xi).
    let lower = (2.0 * e).ln();
    let oracle_values: Vec<f64> = xs
        .iter()
        .map(|&x| 2.0 * simpson(|u| u.powf(beta), lower, x, 4096))
        .collect();
    let oracle_fit = fit_power_law(&xs, &oracle_values)?;
    let oracle_passed = (oracle_fit.alpha - alpha).abs() <= 0.02 * alpha.abs().max(1e-12);

    let spectrum_of = |radius: f64| {
        Spectrum::from_fn(grid, |xi| {
            if xi[0].abs() <= radius {
                Complex64::new(profile.g(xi[0]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let weight = AdmissibleWeight::prototype(-profile.gamma, 0.0)?;
    let spec = SpaceSpec::new(0.5, 2.0, 2.0, weight)?;
    let per_radius = par::try_map_range(radii.len(), |i| {
        let spectrum = spectrum_of(radii[i]);
        let sobolev = (spectrum
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| bracket(&grid.frequency(k)[..1]) * c.norm_sqr())
            .sum::<f64>()
            / grid.volume())
        .sqrt();
        let f = inverse_transform(&spectrum);
        let square = pointwise_product(&f, &f)?;
        let norm = f_norm(&square, &spec, &resolution, None)?;
        Ok::<_, Error>((sobolev, norm * norm))
    })?;
    let membership_norms: Vec<f64> = per_radius.iter().map(|v| v.0).collect();
    let growth_values: Vec<f64> = per_radius.iter().map(|v| v.1).collect();
    let growth_fit = fit_power_law(&xs, &growth_values)?;
    let loglog: Vec<(f64, f64)> = xs.iter().zip(&growth_values).map(|(x, s)| (x.ln(), s.ln())).collect();
    let loglog_slope = least_squares_slope(&loglog);
    let growth = cauchy_check(&growth_values);
    let membership = cauchy_check(&membership_norms);

    // The lower bound at sampled |xi| against the truncated lattice convolution.
    let top = radii[radii.len() - 1];
    let convolution: Vec<ConvolutionCheck> = (0..8)
        .map(|i| {
            let xi = (2.0 * e * (top / (2.0 * e)).powf(i as f64 / 7.0))
                .ceil()
                .min(top.floor());
            let kmax = top.floor() as i64;
            let conv: f64 = (-kmax..=kmax)
                .map(|k| {
                    let eta = k as f64;
                    let rest = xi - eta;
                    if rest.abs() > top {
                        0.0
                    } else {
                        profile.g(eta) * profile.g(rest)
                    }
                })
                .sum();
            let bound = convolution_lower_bound(profile.delta, xi);
            ConvolutionCheck {
                xi,
                convolution: conv,
                bound,
                ratio: conv / bound,
            }
        })
        .collect();
    let convolution_passed = convolution.iter().all(|c| c.convolution >= 0.95 * c.bound);

    let growth_passed = if alpha > 0.0 {
        (growth_fit.alpha - alpha).abs() <= 0.05 * alpha.abs() + 0.05
    } else {
        growth.passed
    };
    Ok(SharpnessReport {
        profile: *profile,
        predicted_exponent: alpha,
        divergence_predicted: profile.diverges(),
        radii,
        membership_norms,
        membership,
        oracle_values,
        oracle_fit,
        oracle_passed,
        growth_values,
        growth_fit,
        loglog_slope,
        growth,
        convolution,
        convolution_passed,
        passed: oracle_passed && growth_passed && convolution_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SweepConfig {
        let grid = Grid::new(1, 1024, 16.0).unwrap();
        SweepConfig {
            resolution: ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 6, &grid).unwrap(),
            grid,
            seed: 42,
            count: 6,
            levels: vec![4, 5, 6],
            spread_bound: SPREAD_BOUND,
        }
    }

    #[test]
    fn ensembles_are_reproducible_and_band_limited() {
        let grid = Grid::new(1, 1024, 16.0).unwrap();
        let spec = EnsembleSpec {
            seed: 42,
            count: 4,
            s: 0.5,
            level: 5,
        };
        let a = Ensemble::generate(&grid, spec).unwrap();
        let b = Ensemble::generate(&grid, spec).unwrap();
        for (x, y) in a.members().iter().zip(b.members()) {
            assert_eq!(x.samples(), y.samples());
            assert!(x.samples().iter().all(|z| z.im == 0.0));
            let s = forward_transform(x);
            assert!(s.mass_above(16.0) < 1e-14, "{}", s.mass_above(16.0));
        }
        assert_ne!(a.members()[0].samples(), a.members()[1].samples());
    }

    #[test]
    fn gates_are_exact() {
        assert!(product_gate(Exponent::int(2), Exponent::int(2)).is_ok());
        assert!(matches!(
            product_gate(Exponent::int(2), Exponent::ratio(1, 2)),
            Err(Error::Gate(_))
        ));
        assert!(matches!(
            product_gate(Exponent::int(2), Exponent::ratio(2, 3)),
            Err(Error::Gate(_))
        ));
        assert!(product_gate(Exponent::int(2), Exponent::ratio(2001, 3000)).is_ok());
        assert!(embedding_gate(Exponent::Infinite, Exponent::int(2)).is_ok());
        assert!(embedding_gate(Exponent::Infinite, Exponent::int(3)).is_err());
        assert_eq!(refined_exponent(Exponent::int(2)), Rational::new(1, 2));
        assert_eq!(refined_exponent(Exponent::ratio(1, 2)), Rational::from_integer(0));
        assert_eq!(refined_exponent(Exponent::Infinite), Rational::from_integer(1));
    }

    #[test]
    fn index_relations() {
        let case = |q1: Exponent, s1: Exponent| EmbeddingCase::TlIntoBesov {
            p: Exponent::int(2),
            q: Exponent::int(2),
            s: Exponent::ratio(1, 2),
            p1: Exponent::int(4),
            q1,
            s1,
        };
        assert!(case(Exponent::int(2), Exponent::ratio(1, 4)).validate(1).is_ok());
        assert!(matches!(
            case(Exponent::int(1), Exponent::ratio(1, 4)).validate(1),
            Err(Error::IndexRelation(_))
        ));
        assert!(matches!(
            case(Exponent::int(2), Exponent::ratio(1, 3)).validate(1),
            Err(Error::IndexRelation(_))
        ));
    }

    #[test]
    fn ratio_report_statistics() {
        let samples = vec![
            RatioSample {
                level: 4,
                member: 0,
                value: 1.0,
            },
            RatioSample {
                level: 5,
                member: 0,
                value: 2.0,
            },
            RatioSample {
                level: 6,
                member: 0,
                value: 4.0,
            },
        ];
        let r = RatioReport::new("t", samples, 0, 16.0);
        assert_eq!(r.spread, 4.0);
        assert!((r.trend_slope - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(!r.passed);
    }

    #[test]
    fn refined_weight_dominates_coarse_one() {
        let c = compare_weight_exponents(&small_config(), 0.5, 0.5, 1.0).unwrap();
        assert_eq!(c.violations, 0);
        assert_eq!(c.members, 18);
    }

    #[test]
    fn log_schrodinger_ratio_is_bounded() {
        let report = log_schrodinger_ratio(&small_config(), 2.0, 2.0).unwrap();
        assert_eq!(report.samples.len(), 18);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn product_ratio_for_equal_single_modes() {
        let config = small_config();
        let grid = config.grid;
        let res = config.resolution;
        let f = GridFunction::mode(grid, &[3]);
        let spec = SpaceSpec::classical(0.5, 2.0, 2.0).unwrap();
        let inverse = SpaceSpec::new(0.5, 2.0, 2.0, AdmissibleWeight::prototype(-0.5, 0.0).unwrap()).unwrap();
        let fg = pointwise_product(&f, &f).unwrap();
        let ratio = f_norm(&fg, &inverse, &res, None).unwrap() / f_norm(&f, &spec, &res, None).unwrap().powi(2);
        // One spectral line each: |xi| = 3 * 2 pi / 16 and twice that, with
        // ||e^{i xi x}||_2 = L^{1/2}.
        let xi = 3.0 * 2.0 * std::f64::consts::PI / 16.0;
        let w = AdmissibleWeight::prototype(-0.5, 0.0).unwrap();
        let block = |r: f64| -> f64 {
            (0..=res.j_max())
                .map(|j| (j as f64).exp2() * (w.at_level(j as i64) * res.level(j, r)).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let plain = |r: f64| -> f64 {
            (0..=res.j_max())
                .map(|j| (j as f64).exp2() * res.level(j, r).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let l = 16f64.sqrt();
        let expected = block(2.0 * xi) * l / (plain(xi) * l).powi(2);
        assert!((ratio - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn telescoping_plateau_mode() {
        let grid = Grid::new(1, 256, 2.0 * std::f64::consts::PI).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 5, &grid).unwrap();
        let f = GridFunction::mode(grid, &[1]);
        let r2 = telescoping_growth_check(&f, 2.0, &res).unwrap();
        let b = besov_norm(&f, &SpaceSpec::classical(0.0, f64::INFINITY, 2.0).unwrap(), &res).unwrap();
        for (j, v) in &r2.values {
            let expected = 1.0 / ((1.0 + *j as f64 * std::f64::consts::LN_2).sqrt() * b);
            assert!((v - expected).abs() < 1e-12);
        }
        let r1 = telescoping_growth_check(&f, 1.0, &res).unwrap();
        assert!(r1.values.iter().all(|v| (v.1 - r1.values[0].1).abs() < 1e-12));
        assert!(r1.passed && r2.passed);
    }

    #[test]
    fn power_fit_recovers_exact_laws() {
        let xs: Vec<f64> = (1..10).map(|i| 1.0 + i as f64 * 0.7).collect();
        for alpha in [-0.24, 0.16, 1.0, 0.0] {
            let ys: Vec<f64> = xs.iter().map(|&x| 3.0 - 2.0 * box_cox(x, alpha)).collect();
            let fit = fit_power_law(&xs, &ys).unwrap();
            assert!((fit.alpha - alpha).abs() < 1e-6, "{alpha}: {fit:?}");
        }
    }

    #[test]
    fn cauchy_increments() {
        assert!(cauchy_check(&[0.0, 1.0, 1.5, 1.55, 1.56]).passed);
        assert!(!cauchy_check(&[0.0, 1.0, 2.0, 3.0]).passed);
    }

    #[test]
    fn sharpness_profile_validation() {
        assert!(SharpnessProfile::new(0.5, 0.4).is_err());
        let p = SharpnessProfile::new(0.51, 0.4).unwrap();
        assert!((p.exponent() - 0.16).abs() < 1e-12);
        assert!(p.diverges());
        assert!(!SharpnessProfile::new(0.51, 0.6).unwrap().diverges());
    }

    #[test]
    fn convolution_bound_is_dominated() {
        let p = SharpnessProfile::with_grid(0.51, 0.4, 1 << 12, 6).unwrap();
        let report = sharpness_scan(&p).unwrap();
        assert!(report.convolution_passed, "{:?}", report.convolution);
        assert!(report.oracle_passed, "{:?}", report.oracle_fit);
        assert!(report.membership.decreasing);
    }
}
