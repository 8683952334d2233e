//! Dyadic resolutions of unity and auxiliary frequency cutoffs.
//!
//! `phi_0` is radial, equal to 1 on `|xi| <= 1` and supported in
//! `|xi| <= 3/2`; `phi_j(xi) = phi_0(2^{-j} xi) - phi_0(2^{-j+1} xi)` for
//! `j >= 1`, so that `sum_{j <= J} phi_j = phi_0(2^{-J} .)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::spectral::{self, magnitude, Grid, GridFunction, Spectrum};

/// Smooth monotone transition `eta`: 1 for `t <= 0`, 0 for `t >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BumpProfile {
    /// `g(1-t) / (g(t) + g(1-t))` with `g(t) = exp(-1/t)` for `t > 0`.
    Mollifier,
    /// `1 - S_7(2t - 1/2)` with the order-7 smoothstep `S_7`, a sharper
    /// transition concentrated on `[1/4, 3/4]`.
    Smoothstep7,
}

fn exp_inv(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

impl BumpProfile {
    pub fn transition(self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        match self {
            BumpProfile::Mollifier => {
                let a = exp_inv(1.0 - t);
                a / (exp_inv(t) + a)
            }
            BumpProfile::Smoothstep7 => {
                let s = (2.0 * t - 0.5).clamp(0.0, 1.0);
                let s4 = s * s * s * s;
                1.0 - s4 * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionOfUnity {
    profile: BumpProfile,
    j_max: u32,
}

impl ResolutionOfUnity {
    pub fn new(profile: BumpProfile, j_max: u32) -> Result<Self> {
        if j_max < 2 {
            return Err(Error::InvalidResolution(format!("J_max = {j_max} must be >= 2")));
        }
        if j_max > 40 {
            return Err(Error::InvalidResolution(format!("J_max = {j_max} is too large")));
        }
        Ok(ResolutionOfUnity { profile, j_max })
    }

    /// Resolution built on [`BumpProfile::Smoothstep7`].
    pub fn alternative(j_max: u32) -> Result<Self> {
        Self::new(BumpProfile::Smoothstep7, j_max)
    }

    /// Build and check that the top annulus fits under the grid's Nyquist bound.
    pub fn for_grid(profile: BumpProfile, j_max: u32, grid: &Grid) -> Result<Self> {
        let r = Self::new(profile, j_max)?;
        r.check_grid(grid)?;
        Ok(r)
    }

    pub fn profile(&self) -> BumpProfile {
        self.profile
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    /// Band limit below which the truncated family sums to one, `2^{J_max}`.
    pub fn band_limit(&self) -> f64 {
        (self.j_max as f64).exp2()
    }

    pub fn phi0(&self, r: f64) -> f64 {
        self.profile.transition(2.0 * (r - 1.0))
    }

    /// `phi(r) = phi_0(r) - phi_0(2r)`.
    pub fn phi(&self, r: f64) -> f64 {
        self.phi0(r) - self.phi0(2.0 * r)
    }

    /// `phi_j` at radius `r`.
    pub fn level(&self, j: u32, r: f64) -> f64 {
        if j == 0 {
            self.phi0(r)
        } else {
            self.phi(r * (-(j as f64)).exp2())
        }
    }

    pub fn eval(&self, j: u32, xi: &[f64]) -> f64 {
        self.level(j, magnitude(xi))
    }

    /// `phi_0(2^{-j} r) = sum_{i <= j} phi_i(r)`.
    pub fn partial_sum(&self, j: i32, r: f64) -> f64 {
        self.phi0(r * (-(j as f64)).exp2())
    }

    /// Telescoping family `psi_0 = phi_0`,
    /// `psi_l(r) = phi_0(2^{-l} r) - phi_0(2^{-l+1} r)`.
    pub fn telescoping(&self, l: u32, r: f64) -> f64 {
        if l == 0 {
            self.phi0(r)
        } else {
            self.partial_sum(l as i32, r) - self.partial_sum(l as i32 - 1, r)
        }
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        let top = ((self.j_max + 1) as f64).exp2();
        let nyquist = grid.nyquist();
        if top > nyquist {
            let needed = top * grid.length() / std::f64::consts::PI;
            let required_points = (needed.ceil() as usize).next_power_of_two().max(8);
            return Err(Error::Nyquist {
                j_max: self.j_max,
                top,
                nyquist,
                required_points,
                max_length: std::f64::consts::PI * grid.points() as f64 / top,
            });
        }
        Ok(())
    }

    fn check_level(&self, j: u32) -> Result<()> {
        if j > self.j_max {
            return Err(Error::LevelOutOfRange {
                level: j,
                j_max: self.j_max,
            });
        }
        Ok(())
    }

    /// Littlewood-Paley block `phi_j(D) f`.
    pub fn band_project(&self, j: u32, f: &GridFunction) -> Result<GridFunction> {
        self.check_level(j)?;
        self.check_grid(f.grid())?;
        spectral::apply_radial(|r| self.level(j, r), 1.0, f)
    }

    /// All blocks `phi_j(D) f`, `0 <= j <= J_max`, from a precomputed spectrum.
    pub fn blocks_of(&self, spectrum: &Spectrum) -> Result<Vec<GridFunction>> {
        self.check_grid(spectrum.grid())?;
        Ok(spectral::radial_family(spectrum, self.j_max as usize + 1, |j, r| {
            self.level(j as u32, r)
        }))
    }

    /// Evaluate the stated invariants on the radial lattice `r = k * step`,
    /// `0 <= r <= radius`.
    pub fn check_invariants(&self, step: f64, radius: f64) -> PartitionReport {
        let count = (radius / step).floor() as usize;
        let radii: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
        let j_max = self.j_max;
        let identity_radius = ((j_max as f64) - 1.0).exp2();

        let mut partition_residual: f64 = 0.0;
        let mut telescoping_residual: f64 = 0.0;
        let mut support_violations = 0usize;
        let mut plateau_violations = 0usize;
        for &r in &radii {
            let mut sum = 0.0;
            let mut tele = self.phi0(r);
            for j in 0..=j_max {
                let v = self.level(j, r);
                sum += v;
                if j >= 1 {
                    tele += self.telescoping(j, r);
                    telescoping_residual = telescoping_residual.max((tele - self.partial_sum(j as i32, r)).abs());
                    let lo = (j as f64 - 1.0).exp2();
                    let hi = (j as f64 + 1.0).exp2();
                    if (r < lo - step || r > hi + step) && v != 0.0 {
                        support_violations += 1;
                    }
                    if !(-1e-15..=1.0 + 1e-15).contains(&v) {
                        support_violations += 1;
                    }
                }
            }
            if r <= identity_radius {
                partition_residual = partition_residual.max((sum - 1.0).abs());
            }
            let p0 = self.phi0(r);
            if r >= 1.5 + step && p0 != 0.0 {
                support_violations += 1;
            }
            if r <= 1.0 - step && p0 != 1.0 {
                plateau_violations += 1;
            }
        }

        let decay = (1..=4usize).map(|order| self.decay_row(order)).collect();
        PartitionReport {
            j_max,
            lattice_step: step,
            lattice_points: radii.len(),
            identity_radius,
            partition_residual,
            telescoping_residual,
            support_violations,
            plateau_violations,
            decay,
        }
    }

    /// `2^{jk} sup |Delta^k phi_j| / h^k` for `1 <= j <= J_max`.
    fn decay_row(&self, order: usize) -> DecayRow {
        const SAMPLES: usize = 512;
        let h = 1.0 / 256.0;
        let constants: Vec<f64> = (1..=self.j_max)
            .map(|j| {
                let scale = (j as f64).exp2();
                let sup = (0..=SAMPLES)
                    .map(|i| {
                        let r = scale * (0.5 + 1.5 * i as f64 / SAMPLES as f64);
                        let d: f64 = fd::derivative(|t| self.level(j, t), r, order, h);
                        d.abs()
                    })
                    .fold(0.0, f64::max);
                sup * scale.powi(order as i32)
            })
            .collect();
        let max = constants.iter().cloned().fold(0.0, f64::max);
        let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
        DecayRow {
            order,
            constants,
            spread: max / min,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub order: usize,
    /// Scaled sup per level `j = 1..=J_max`.
    pub constants: Vec<f64>,
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub j_max: u32,
    pub lattice_step: f64,
    pub lattice_points: usize,
    pub identity_radius: f64,
    pub partition_residual: f64,
    pub telescoping_residual: f64,
    pub support_violations: usize,
    pub plateau_violations: usize,
    pub decay: Vec<DecayRow>,
}

/// Cutoffs used by the symbol decomposition, the lifting arguments and the
/// `X_w` norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusCutoffs {
    profile: BumpProfile,
}

impl Default for AnnulusCutoffs {
    fn default() -> Self {
        AnnulusCutoffs {
            profile: BumpProfile::Mollifier,
        }
    }
}

impl AnnulusCutoffs {
    pub fn new(profile: BumpProfile) -> Self {
        AnnulusCutoffs { profile }
    }

    fn rise(&self, r: f64, start: f64, end: f64) -> f64 {
        1.0 - self.profile.transition((r - start) / (end - start))
    }

    fn fall(&self, r: f64, start: f64, end: f64) -> f64 {
        self.profile.transition((r - start) / (end - start))
    }

    /// `chi_0`: 1 on `|xi| <= 2`, supported in `|xi| <= 3`.
    pub fn chi0(&self, r: f64) -> f64 {
        self.fall(r, 2.0, 3.0)
    }

    /// `chi`: 1 on `1/2 <= |xi| <= 2`, supported in `1/3 <= |xi| <= 3`.
    pub fn chi(&self, r: f64) -> f64 {
        self.rise(r, 1.0 / 3.0, 0.5) * self.fall(r, 2.0, 3.0)
    }

    /// `M`: 1 on `1/2 <= |xi| <= 2`, supported in `1/4 <= |xi| <= 4`.
    pub fn ring(&self, r: f64) -> f64 {
        self.rise(r, 0.25, 0.5) * self.fall(r, 2.0, 4.0)
    }

    /// Ball cutoff of the `X_w` norm: 1 on `|xi| <= 1`, supported in `|xi| <= 2`.
    pub fn ball(&self, r: f64) -> f64 {
        self.fall(r, 1.0, 2.0)
    }

    /// Telescoping family on the ball cutoff: `psi_0 = ball`,
    /// `psi_l(r) = ball(2^{-l} r) - ball(2^{-l+1} r)`.
    pub fn ball_telescoping(&self, l: u32, r: f64) -> f64 {
        if l == 0 {
            self.ball(r)
        } else {
            let s = (-(l as f64)).exp2();
            self.ball(r * s) - self.ball(2.0 * r * s)
        }
    }
}
