//! Admissible weights `w: (0, 1] -> (0, inf)`, their dyadic comparison
//! constants and the regularized multiplier `sum_j w(2^{-j}) phi_j(xi)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::partition::ResolutionOfUnity;
use crate::spectral::bracket;

/// `log_+ x = max(0, ln x)`.
pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Kind {
    Prototype {
        lambda: f64,
        mu: f64,
    },
    /// Values at `t = 2^{-j}`, `j = 0, 1, ...`.
    Table {
        values: Vec<f64>,
    },
    Power {
        base: Box<Kind>,
        exponent: f64,
    },
}

impl Kind {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Kind::Prototype { lambda, mu } => {
                let l = log_plus(1.0 / t);
                let a = (1.0 + l).powf(*lambda);
                if *mu == 0.0 {
                    a
                } else {
                    a * (1.0 + (1.0 + l).ln()).powf(*mu)
                }
            }
            Kind::Table { values } => {
                if t >= 1.0 {
                    return values[0];
                }
                let x = -t.log2();
                let j = x.floor() as usize;
                if j + 1 >= values.len() {
                    return values[values.len() - 1];
                }
                let theta = x - j as f64;
                values[j].powf(1.0 - theta) * values[j + 1].powf(theta)
            }
            Kind::Power { base, exponent } => base.eval(t).powf(*exponent),
        }
    }
}

/// Monotonicity of `t -> w(t)` on the dyadic nodes `t = 2^{-j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Constant,
    NonIncreasing,
    NonDecreasing,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibleWeight {
    #[serde(flatten)]
    kind: Kind,
}

impl AdmissibleWeight {
    /// `w = 1`.
    pub fn constant() -> Self {
        AdmissibleWeight {
            kind: Kind::Prototype { lambda: 0.0, mu: 0.0 },
        }
    }

    /// `(1 + log_+ 1/t)^lambda (1 + log(1 + log_+ 1/t))^mu` with `lambda mu >= 0`.
    pub fn prototype(lambda: f64, mu: f64) -> Result<Self> {
        if !lambda.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidWeight("exponents must be finite".into()));
        }
        if lambda * mu < 0.0 {
            return Err(Error::InvalidWeight(format!(
                "prototype requires lambda * mu >= 0, got lambda = {lambda}, mu = {mu}"
            )));
        }
        Ok(AdmissibleWeight {
            kind: Kind::Prototype { lambda, mu },
        })
    }

    /// Weight given by its values at `t = 2^{-j}`, `j = 0..values.len()`,
    /// interpolated geometrically in between and held constant past the last node.
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeight("empty table".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidWeight(format!(
                "table values must be positive and finite, found {v}"
            )));
        }
        Ok(AdmissibleWeight {
            kind: Kind::Table { values },
        })
    }

    pub fn is_constant_one(&self) -> bool {
        match &self.kind {
            Kind::Prototype { lambda, mu } => *lambda == 0.0 && *mu == 0.0,
            Kind::Table { values } => values.iter().all(|v| *v == 1.0),
            Kind::Power { base, exponent } => {
                *exponent == 0.0 || AdmissibleWeight { kind: (**base).clone() }.is_constant_one()
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weights are defined for t > 0, got {t}"
            )));
        }
        Ok(self.value(t))
    }

    /// Infallible evaluation; `t` must be positive.
    pub(crate) fn value(&self, t: f64) -> f64 {
        self.kind.eval(t.min(1.0))
    }

    /// `w(2^{-j})`.
    pub fn at_level(&self, j: i64) -> f64 {
        if j <= 0 {
            return self.value(1.0);
        }
        self.value((-(j as f64)).exp2())
    }

    /// `w^lambda`, re-checked for admissibility on `J = 32` levels.
    pub fn power(&self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidWeight("power must be finite".into()));
        }
        if lambda == 1.0 {
            return Ok(self.clone());
        }
        let kind = match &self.kind {
            Kind::Power { base, exponent } => Kind::Power {
                base: base.clone(),
                exponent: exponent * lambda,
            },
            other => Kind::Power {
                base: Box::new(other.clone()),
                exponent: lambda,
            },
        };
        let w = AdmissibleWeight { kind };
        let report = w.check_admissible(32);
        if let Some(v) = report.violation {
            return Err(Error::AdmissibilityViolation(v));
        }
        Ok(w)
    }

    pub fn monotonicity(&self, levels: u32) -> Monotonicity {
        let values: Vec<f64> = (0..=levels as i64).map(|j| self.at_level(j)).collect();
        let rises = values.windows(2).any(|w| w[1] > w[0]);
        let falls = values.windows(2).any(|w| w[1] < w[0]);
        // Increasing in j means decreasing in t.
        match (rises, falls) {
            (false, false) => Monotonicity::Constant,
            (true, false) => Monotonicity::NonIncreasing,
            (false, true) => Monotonicity::NonDecreasing,
            (true, true) => Monotonicity::None,
        }
    }

    /// Property III of the `X_w` construction: non-increasing or constant.
    pub fn require_non_increasing(&self, levels: u32) -> Result<()> {
        match self.monotonicity(levels) {
            Monotonicity::Constant | Monotonicity::NonIncreasing => Ok(()),
            m => Err(Error::WeightPropertyIII(format!(
                "weight is {m:?} on 2^-j, j <= {levels}"
            ))),
        }
    }

    /// Extremal ratios `w(2^{-2j}) / w(2^{-j})` for `1 <= j <= levels`.
    pub fn check_admissible(&self, levels: u32) -> AdmissibilityReport {
        let levels = levels.max(4);
        let ratios: Vec<f64> = (1..=levels as i64)
            .map(|j| self.at_level(2 * j) / self.at_level(j))
            .collect();
        let c = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let d = ratios.iter().cloned().fold(0.0, f64::max);
        let half = ratios.len() / 2;
        let tail: Vec<(f64, f64)> = ratios[half..]
            .iter()
            .enumerate()
            .map(|(i, r)| ((half + i + 1) as f64, r.ln()))
            .collect();
        let trend_slope = least_squares_slope(&tail);
        let monotonicity = self.monotonicity(2 * levels);
        let violation = if monotonicity == Monotonicity::None {
            Some("weight is not monotone on the dyadic nodes".to_string())
        } else if !(c > 0.0) || !d.is_finite() {
            Some(format!("degenerate ratio bounds c = {c}, d = {d}"))
        } else if trend_slope.abs() > 0.1 {
            Some(format!(
                "ratio w(2^-2j)/w(2^-j) drifts without bound (log slope {trend_slope:.3} per level)"
            ))
        } else {
            None
        };
        AdmissibilityReport {
            levels,
            c,
            d,
            trend_slope,
            monotonicity,
            violation,
        }
    }

    /// Smallest `b` on a quarter grid in `[0, 4]` with
    /// `C1 (1+j-k)^{-b} <= w(2^{-j}) / w(2^{-k}) <= C2 (1+j-k)^b`,
    /// `0 <= k <= j <= levels`, and constants that no longer move when the
    /// level range doubles (`J/2` to `J`, relative change at most 5%).
    pub fn comp_weights_bound(&self, levels: u32) -> CompWeightsReport {
        let levels = levels.max(4);
        let values: Vec<f64> = (0..=levels as i64).map(|j| self.at_level(j)).collect();
        let constants = |b: f64, top: usize| -> (f64, f64) {
            let mut c1 = f64::INFINITY;
            let mut c2: f64 = 0.0;
            for j in 0..=top {
                for k in 0..=j {
                    let q = values[j] / values[k];
                    let g = ((1 + j - k) as f64).powf(b);
                    c1 = c1.min(q * g);
                    c2 = c2.max(q / g);
                }
            }
            (c1, c2)
        };
        let top = levels as usize;
        for step in 0..=16 {
            let b = step as f64 * 0.25;
            let (c1, c2) = constants(b, top);
            let (h1, h2) = constants(b, top / 2);
            if h1 / c1 <= 1.05 && c2 / h2 <= 1.05 {
                return CompWeightsReport {
                    levels,
                    b: Some(b),
                    c1,
                    c2,
                };
            }
        }
        let (c1, c2) = constants(4.0, top);
        CompWeightsReport {
            levels,
            b: None,
            c1,
            c2,
        }
    }

    /// Two-sided bound `[d1, d2]` of `w(t)/w(s)` over dyadic nodes with
    /// `t/s in [1/4, 4]`.
    pub fn comparable_values(&self, levels: u32) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for j in 0..=levels as i64 {
            for k in (j - 2).max(0)..=(j + 2).min(levels as i64) {
                let q = self.at_level(j) / self.at_level(k);
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        (lo, hi)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub levels: u32,
    pub c: f64,
    pub d: f64,
    pub trend_slope: f64,
    pub monotonicity: Monotonicity,
    pub violation: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompWeightsReport {
    pub levels: u32,
    /// `None` when no exponent up to 4 gives stable constants.
    pub b: Option<f64>,
    pub c1: f64,
    pub c2: f64,
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `sum_{j <= J} w(2^{-j}) phi_j(xi)`.
#[derive(Clone, Debug, Serialize)]
pub struct RegularizedWeight {
    weight: AdmissibleWeight,
    resolution: ResolutionOfUnity,
    values: Vec<f64>,
}

impl RegularizedWeight {
    pub fn new(weight: &AdmissibleWeight, resolution: &ResolutionOfUnity) -> Self {
        let values = (0..=resolution.j_max() as i64).map(|j| weight.at_level(j)).collect();
        RegularizedWeight {
            weight: weight.clone(),
            resolution: *resolution,
            values,
        }
    }

    pub fn weight(&self) -> &AdmissibleWeight {
        &self.weight
    }

    pub fn resolution(&self) -> &ResolutionOfUnity {
        &self.resolution
    }

    /// Evaluate at radius `r = |xi|`. Only the two levels whose annuli
    /// contain `r` contribute.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= 1.0 {
            return self.values[0];
        }
        let top = self.values.len() - 1;
        let j = r.log2().floor() as usize;
        let lo = j.min(top);
        let hi = (j + 1).min(top);
        let mut sum = self.values[lo] * self.resolution.level(lo as u32, r);
        if hi != lo {
            sum += self.values[hi] * self.resolution.level(hi as u32, r);
        }
        sum
    }

    /// Radius up to which the truncated sum is exact, `2^{J-1}`.
    pub fn exact_radius(&self) -> f64 {
        ((self.values.len() - 2) as f64).exp2()
    }

    /// `max(sup ratio, 1 / inf ratio)` of `eval(r) / w(1/<r>)` on the lattice
    /// `r = k * step <= 2^{J-1}`.
    pub fn equivalence_constant(&self, step: f64) -> f64 {
        let (lo, hi) = self.ratio_range(step, |r| self.weight.value(1.0 / bracket(&[r])));
        hi.max(1.0 / lo)
    }

    fn ratio_range<F: Fn(f64) -> f64>(&self, step: f64, reference: F) -> (f64, f64) {
        let count = (self.exact_radius() / step).floor() as usize;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..=count {
            let r = k as f64 * step;
            let q = self.eval(r) / reference(r);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        (lo, hi)
    }

    /// Two-sided comparison of the regularization of `w^lambda` with the
    /// `lambda`-th power of this regularization, returned as `(inf, sup)`.
    pub fn power_comparison(&self, lambda: f64, step: f64) -> Result<(f64, f64)> {
        let u = RegularizedWeight::new(&self.weight.power(lambda)?, &self.resolution);
        Ok(u.ratio_range(step, |r| self.eval(r).powf(lambda)))
    }

    pub fn symbol_decay(&self, reciprocal: bool, max_order: usize) -> SymbolDecayReport {
        let radius = self.exact_radius();
        let norm = |r: f64| self.weight.value(1.0 / bracket(&[r]));
        if reciprocal {
            symbol_decay(
                |xi| Complex64::new(1.0 / self.eval(xi), 0.0),
                |r| 1.0 / norm(r),
                max_order,
                radius,
            )
        } else {
            symbol_decay(|xi| Complex64::new(self.eval(xi), 0.0), norm, max_order, radius)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayOrder {
    pub order: usize,
    /// Normalized sup for each lattice step of the sweep, coarse to fine.
    pub sup_by_step: Vec<f64>,
    /// Sup on the finest lattice over the sup on the next coarser one.
    pub growth: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolDecayReport {
    pub steps: Vec<f64>,
    pub radius: f64,
    pub orders: Vec<DecayOrder>,
    pub passed: bool,
}

const DECAY_STEPS: [f64; 3] = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
const DECAY_GROWTH_BOUND: f64 = 1.25;

/// Sup over `xi` in `[-radius, radius]` of `<xi>^k |Delta^k a(xi)| / norm(xi)`,
/// `k <= max_order`, for a sweep of lattice steps `h`. Differences at `xi` use
/// the step `h <xi>`, so every dyadic shell is resolved alike. Values below
/// the rounding floor of the stencil count as zero. The check passes when no
/// order grows by more than 25% over the last refinement.
pub fn symbol_decay<A, W>(a: A, norm: W, max_order: usize, radius: f64) -> SymbolDecayReport
where
    A: Fn(f64) -> Complex64,
    W: Fn(f64) -> f64,
{
    assert!(max_order <= 4, "symbol checks are implemented up to order 4");
    let mut orders = Vec::with_capacity(max_order + 1);
    let mut passed = true;
    for order in 0..=max_order {
        let stencil_mass: f64 = fd::stencil(order).iter().map(|c| c.abs()).sum();
        let sweep: Vec<(f64, f64)> = DECAY_STEPS
            .iter()
            .map(|&h| {
                let count = (radius / h).floor() as i64;
                (-count..=count)
                    .map(|i| {
                        let xi = i as f64 * h;
                        let step = h * bracket(&[xi]);
                        let d: Complex64 = fd::derivative(&a, xi, order, step);
                        let noise = if order == 0 {
                            0.0
                        } else {
                            64.0 * f64::EPSILON * a(xi).norm() * stencil_mass / h.powi(order as i32)
                        };
                        let n = norm(xi);
                        (d.norm() * bracket(&[xi]).powi(order as i32) / n, noise / n)
                    })
                    .fold((0.0, 0.0), |(v, e), (dv, de)| (f64::max(v, dv), f64::max(e, de)))
            })
            .collect();
        let sup_by_step: Vec<f64> = sweep.iter().map(|s| s.0).collect();
        let (first, _) = sweep[sweep.len() - 2];
        let (last, noise) = sweep[sweep.len() - 1];
        let floor = noise.max(1e-12);
        let growth = if last <= floor {
            1.0
        } else if first > floor {
            last / first
        } else {
            f64::INFINITY
        };
        if !(growth <= DECAY_GROWTH_BOUND) {
            passed = false;
        }
        orders.push(DecayOrder {
            order,
            sup_by_step,
            growth,
        });
    }
    SymbolDecayReport {
        steps: DECAY_STEPS.to_vec(),
        radius,
        orders,
        passed,
    }
}

/// Zero-order symbol seminorms `sup <xi>^k |Delta^k a(xi)|`, `k <= max_order`.
pub fn zero_order_symbol_check<A>(a: A, max_order: usize, radius: f64) -> SymbolDecayReport
where
    A: Fn(f64) -> Complex64,
{
    symbol_decay(a, |_| 1.0, max_order, radius)
}
