//! Besov, Triebel-Lizorkin, bmo, BMO and `X_w` norms of band-limited
//! grid functions.
//!
//! Every dyadic sum is truncated at the resolution level `J_max`. Inputs must
//! carry no spectral mass above `2^{J_max}`, where the truncated family stops
//! summing to one, so the truncation is exact.

mod cubes;

pub use cubes::{Cube, CubeScale, DyadicCubeSet};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{AnnulusCutoffs, ResolutionOfUnity};
use crate::spectral::{self, forward_transform, lp_norm, lp_norm_of, GridFunction, Spectrum};
use crate::weights::{AdmissibleWeight, RegularizedWeight};

/// Relative spectral mass tolerated above the band limit.
pub const LEAKAGE_TOLERANCE: f64 = 1e-12;

/// Smoothness `s`, integrability `p`, summability `q` (either may be
/// infinite) and weight `w` of a space `F^{s,w}_{p,q}` or `B^s_{p,q}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub weight: AdmissibleWeight,
}

impl SpaceSpec {
    pub fn new(s: f64, p: f64, q: f64, weight: AdmissibleWeight) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidSpace(format!("smoothness {s} must be finite")));
        }
        if !(p > 0.0) || !(q > 0.0) {
            return Err(Error::InvalidSpace(format!("p = {p} and q = {q} must be positive")));
        }
        Ok(SpaceSpec { s, p, q, weight })
    }

    /// Unweighted space.
    pub fn classical(s: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(s, p, q, AdmissibleWeight::constant())
    }

    /// `tau_{p,q} = n (1 / min(1, p, q) - 1)`.
    pub fn tau(&self, dim: usize) -> f64 {
        dim as f64 * (1.0 / self.p.min(self.q).min(1.0) - 1.0)
    }

    /// `r = max(1, p)`.
    pub fn r(&self) -> f64 {
        self.p.max(1.0)
    }

    /// Conjugate exponent of `r`, infinite when `r = 1`.
    pub fn r_prime(&self) -> f64 {
        conjugate(self.r())
    }

    fn level_factor(&self, j: usize) -> f64 {
        (self.s * j as f64).exp2() * self.weight.at_level(j as i64)
    }
}

/// Conjugate exponent `r / (r - 1)`.
pub fn conjugate(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

/// Littlewood-Paley blocks `phi_j(D) f`, `0 <= j <= J_max`, of a band-limited function.
#[derive(Clone, Debug)]
pub struct Blocks {
    resolution: ResolutionOfUnity,
    spectrum: Spectrum,
    blocks: Vec<GridFunction>,
}

impl Blocks {
    pub fn new(f: &GridFunction, resolution: &ResolutionOfUnity) -> Result<Self> {
        Self::from_spectrum(forward_transform(f), resolution)
    }

    pub fn from_spectrum(spectrum: Spectrum, resolution: &ResolutionOfUnity) -> Result<Self> {
        check_band(&spectrum, resolution)?;
        let blocks = resolution.blocks_of(&spectrum)?;
        Ok(Blocks {
            resolution: *resolution,
            spectrum,
            blocks,
        })
    }

    pub fn resolution(&self) -> &ResolutionOfUnity {
        &self.resolution
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn blocks(&self) -> &[GridFunction] {
        &self.blocks
    }

    /// Sum of all blocks; reconstructs the input.
    pub fn reconstruct(&self) -> GridFunction {
        let grid = *self.spectrum.grid();
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        for b in &self.blocks {
            for (a, v) in acc.iter_mut().zip(b.samples()) {
                *a += v;
            }
        }
        GridFunction::new(grid, acc).expect("sample count matches grid")
    }
}

/// Reject spectra with relative mass above `2^{J_max}`.
pub fn check_band(spectrum: &Spectrum, resolution: &ResolutionOfUnity) -> Result<()> {
    resolution.check_grid(spectrum.grid())?;
    let cutoff = resolution.band_limit();
    let relative_mass = spectrum.mass_above(cutoff);
    if relative_mass > LEAKAGE_TOLERANCE {
        return Err(Error::BandLeakage { relative_mass, cutoff });
    }
    Ok(())
}

/// Value of a norm with its per-level contributions and the maximizing cube.
#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub norm: f64,
    /// `2^{js} w(2^{-j}) ||phi_j(D) f||_{L^p}` for each level.
    pub blocks: Vec<f64>,
    pub cube: Option<Cube>,
}

fn block_contributions(blocks: &Blocks, spec: &SpaceSpec) -> Vec<f64> {
    blocks
        .blocks
        .iter()
        .enumerate()
        .map(|(j, b)| spec.level_factor(j) * lp_norm(b, spec.p))
        .collect()
}

fn lq_sum(values: impl Iterator<Item = f64> + Clone, q: f64) -> f64 {
    lp_norm_of(values, 1.0, q)
}

/// `(sum_j 2^{jsq} ||phi_j(D) f||_p^q)^{1/q}`; the weight must be constant.
pub fn besov_norm(f: &GridFunction, spec: &SpaceSpec, resolution: &ResolutionOfUnity) -> Result<f64> {
    Ok(besov_report(&Blocks::new(f, resolution)?, spec)?.norm)
}

pub fn besov_report(blocks: &Blocks, spec: &SpaceSpec) -> Result<NormReport> {
    if !spec.weight.is_constant_one() {
        return Err(Error::InvalidSpace("Besov norms are unweighted".into()));
    }
    let contributions = block_contributions(blocks, spec);
    Ok(NormReport {
        norm: lq_sum(contributions.iter().copied(), spec.q),
        blocks: contributions,
        cube: None,
    })
}

/// `|| (sum_j 2^{jsq} w(2^{-j})^q |phi_j(D) f|^q)^{1/q} ||_{L^p}` for `p < inf`.
pub fn triebel_lizorkin_norm(f: &GridFunction, spec: &SpaceSpec, resolution: &ResolutionOfUnity) -> Result<f64> {
    Ok(triebel_lizorkin_report(&Blocks::new(f, resolution)?, spec)?.norm)
}

pub fn triebel_lizorkin_report(blocks: &Blocks, spec: &SpaceSpec) -> Result<NormReport> {
    if spec.p.is_infinite() {
        return Err(Error::InvalidSpace("p = inf requires the dyadic cube norm".into()));
    }
    let grid = *blocks.spectrum.grid();
    let factors: Vec<f64> = (0..blocks.blocks.len()).map(|j| spec.level_factor(j)).collect();
    let pointwise: Vec<f64> = (0..grid.len())
        .map(|x| {
            let terms = blocks
                .blocks
                .iter()
                .zip(&factors)
                .map(move |(b, c)| c * b.samples()[x].norm());
            lq_sum(terms, spec.q)
        })
        .collect();
    Ok(NormReport {
        norm: lp_norm_of(pointwise.iter().copied(), grid.cell(), spec.p),
        blocks: block_contributions(blocks, spec),
        cube: None,
    })
}

/// `||phi_0(D) f||_inf + sup_{l(Q) <= 1} (|Q|^{-1} int_Q sum_{j >= -log2 l(Q)}
/// 2^{sjq} w(2^{-j})^q |phi_j(D) f|^q)^{1/q}` for `q < inf`.
pub fn tl_infinity_norm(
    f: &GridFunction,
    spec: &SpaceSpec,
    resolution: &ResolutionOfUnity,
    cubes: &DyadicCubeSet,
) -> Result<f64> {
    Ok(tl_infinity_report(&Blocks::new(f, resolution)?, spec, cubes)?.norm)
}

pub fn tl_infinity_report(blocks: &Blocks, spec: &SpaceSpec, cubes: &DyadicCubeSet) -> Result<NormReport> {
    if spec.q.is_infinite() {
        return Err(Error::InvalidSpace("F_{inf,q} requires q < inf".into()));
    }
    if cubes.grid() != blocks.spectrum.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *blocks.spectrum.grid();
    let levels = blocks.blocks.len();
    let q = spec.q;
    // tails[k][x] = sum_{j >= k} (2^{js} w_j |b_j(x)|)^q
    let mut tails: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; levels + 1];
    for j in (0..levels).rev() {
        let c = spec.level_factor(j);
        let (head, rest) = tails.split_at_mut(j + 1);
        let next = &rest[0];
        for (x, t) in head[j].iter_mut().enumerate() {
            *t = next[x] + (c * blocks.blocks[j].samples()[x].norm()).powf(q);
        }
    }
    let mut sup = 0.0;
    let mut arg = None;
    for scale in cubes.scales().iter().filter(|s| s.side <= 1.0) {
        let k = (-scale.side.log2()).round() as usize;
        let values = &tails[k.min(levels)];
        let (mean, cube) = cubes.max_mean(values, scale);
        let v = mean.max(0.0).powf(1.0 / q);
        if arg.is_none() || v > sup {
            sup = v;
            arg = Some(cube);
        }
    }
    let low = blocks.blocks[0].max_abs();
    Ok(NormReport {
        norm: low + sup,
        blocks: block_contributions(blocks, spec),
        cube: arg,
    })
}

/// Triebel-Lizorkin norm for any `p`, using the cube definition at `p = inf`.
pub fn f_norm_report(blocks: &Blocks, spec: &SpaceSpec, cubes: Option<&DyadicCubeSet>) -> Result<NormReport> {
    if spec.p.is_infinite() {
        let cubes = cubes.ok_or_else(|| Error::InvalidSpace("p = inf needs a dyadic cube set".into()))?;
        tl_infinity_report(blocks, spec, cubes)
    } else {
        triebel_lizorkin_report(blocks, spec)
    }
}

pub fn f_norm(
    f: &GridFunction,
    spec: &SpaceSpec,
    resolution: &ResolutionOfUnity,
    cubes: Option<&DyadicCubeSet>,
) -> Result<f64> {
    Ok(f_norm_report(&Blocks::new(f, resolution)?, spec, cubes)?.norm)
}

/// `sup_Q |Q|^{-1} int_Q |f - f_Q|` over all cubes of the set.
pub fn big_bmo_norm(f: &GridFunction, cubes: &DyadicCubeSet) -> Result<f64> {
    Ok(big_bmo_report(f, cubes)?.0)
}

pub fn big_bmo_report(f: &GridFunction, cubes: &DyadicCubeSet) -> Result<(f64, Cube)> {
    oscillation_sup(f, cubes, |_| true)
}

fn oscillation_sup<P: Fn(f64) -> bool>(f: &GridFunction, cubes: &DyadicCubeSet, keep: P) -> Result<(f64, Cube)> {
    if cubes.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let mut best: Option<(f64, Cube)> = None;
    for scale in cubes.scales().iter().filter(|s| keep(s.side)) {
        let (v, cube) = cubes.max_oscillation(f.samples(), scale);
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, cube));
        }
    }
    best.ok_or_else(|| Error::InvalidSpace("no cubes in range".into()))
}

/// `sup_{l(Q) < 1}` mean oscillation `+ sup_{l(Q) >= 1} |Q|^{-1} int_Q |f|`.
pub fn bmo_norm(f: &GridFunction, cubes: &DyadicCubeSet) -> Result<f64> {
    Ok(bmo_report(f, cubes)?.norm)
}

pub fn bmo_report(f: &GridFunction, cubes: &DyadicCubeSet) -> Result<NormReport> {
    let has_small = cubes.scales().iter().any(|s| s.side < 1.0);
    let (osc, osc_cube) = if has_small {
        oscillation_sup(f, cubes, |side| side < 1.0)?
    } else {
        (
            0.0,
            Cube {
                side: 0.0,
                origin: vec![],
            },
        )
    };
    let magnitudes: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
    let mut mean_sup: Option<(f64, Cube)> = None;
    for scale in cubes.scales().iter().filter(|s| s.side >= 1.0) {
        let (v, cube) = cubes.max_mean(&magnitudes, scale);
        if mean_sup.as_ref().is_none_or(|b| v > b.0) {
            mean_sup = Some((v, cube));
        }
    }
    let (mean, mean_cube) =
        mean_sup.ok_or_else(|| Error::CubeAlignment("the period must be at least 1 for bmo".into()))?;
    Ok(NormReport {
        norm: osc + mean,
        blocks: vec![],
        cube: Some(if osc >= mean { osc_cube } else { mean_cube }),
    })
}

/// Per-scale terms of the `X_w` norm.
#[derive(Clone, Debug, Serialize)]
pub struct XwReport {
    pub norm: f64,
    pub bmo_part: f64,
    /// `(j, ||phi(2^{-j} D) f||_inf / w(2^{-j}))` for `-J <= j <= J`.
    pub scales: Vec<(i32, f64)>,
}

/// `||f||_BMO + max_{|j| <= J} ||phi(2^{-j} D) f||_inf / w(2^{-j})` with the
/// ball cutoff `phi` and `J = J_max`.
pub fn xw_norm(
    f: &GridFunction,
    weight: &AdmissibleWeight,
    cutoffs: &AnnulusCutoffs,
    j_max: u32,
    cubes: &DyadicCubeSet,
) -> Result<f64> {
    Ok(xw_report(f, weight, cutoffs, j_max, cubes)?.norm)
}

pub fn xw_report(
    f: &GridFunction,
    weight: &AdmissibleWeight,
    cutoffs: &AnnulusCutoffs,
    j_max: u32,
    cubes: &DyadicCubeSet,
) -> Result<XwReport> {
    weight.require_non_increasing(2 * j_max.max(16))?;
    let bmo_part = big_bmo_norm(f, cubes)?;
    let spectrum = forward_transform(f);
    let count = 2 * j_max as usize + 1;
    let filtered = spectral::radial_family(&spectrum, count, |i, r| {
        let j = i as i32 - j_max as i32;
        cutoffs.ball(r * (-(j as f64)).exp2())
    });
    let scales: Vec<(i32, f64)> = filtered
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let j = i as i32 - j_max as i32;
            (j, g.max_abs() / weight.at_level(j as i64))
        })
        .collect();
    let sup = scales.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(XwReport {
        norm: bmo_part + sup,
        bmo_part,
        scales,
    })
}

/// Both sides of a lifting equivalence and their ratio.
#[derive(Clone, Debug, Serialize)]
pub struct LiftingReport {
    pub left: f64,
    pub right: f64,
    pub ratio: f64,
}

fn ratio(left: f64, right: f64) -> LiftingReport {
    LiftingReport {
        left,
        right,
        ratio: left / right,
    }
}

/// `||f||_{F^{s,w}_{p,q}}` against `||w(D) f||_{F^s_{p,q}}` with the
/// regularized weight `w(D)`.
pub fn lifting_check(
    f: &GridFunction,
    spec: &SpaceSpec,
    resolution: &ResolutionOfUnity,
    cubes: Option<&DyadicCubeSet>,
) -> Result<LiftingReport> {
    let blocks = Blocks::new(f, resolution)?;
    let left = f_norm_report(&blocks, spec, cubes)?.norm;
    let reg = RegularizedWeight::new(&spec.weight, resolution);
    let lifted = blocks.spectrum().multiply_radial(|r| reg.eval(r), 1.0)?;
    let plain = SpaceSpec::classical(spec.s, spec.p, spec.q)?;
    let right = f_norm_report(&Blocks::from_spectrum(lifted, resolution)?, &plain, cubes)?.norm;
    Ok(ratio(left, right))
}

/// `||w^lambda(D) f||_{F^s_{p,q}}` (power of the regularization) against
/// `||u(D) f||_{F^s_{p,q}}` with `u` the regularization of `w^lambda`.
pub fn lifting_power_check(
    f: &GridFunction,
    spec: &SpaceSpec,
    lambda: f64,
    resolution: &ResolutionOfUnity,
    cubes: Option<&DyadicCubeSet>,
) -> Result<LiftingReport> {
    let spectrum = forward_transform(f);
    check_band(&spectrum, resolution)?;
    let reg = RegularizedWeight::new(&spec.weight, resolution);
    let u = RegularizedWeight::new(&spec.weight.power(lambda)?, resolution);
    let plain = SpaceSpec::classical(spec.s, spec.p, spec.q)?;
    let a = spectrum.multiply_radial(|r| reg.eval(r).powf(lambda), 1.0)?;
    let b = spectrum.multiply_radial(|r| u.eval(r), 1.0)?;
    let left = f_norm_report(&Blocks::from_spectrum(a, resolution)?, &plain, cubes)?.norm;
    let right = f_norm_report(&Blocks::from_spectrum(b, resolution)?, &plain, cubes)?.norm;
    Ok(ratio(left, right))
}
