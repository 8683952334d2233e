//! Spectral solvers for `i u_t + (-Delta)^{s/2} u = m(D) T_sigma(u, u)` by
//! Picard iteration on the Duhamel formula, and for the stationary equation
//! `v(D) u = T_sigma(f, g)` with `v(xi) = 1 + log(1 + |xi|^2)`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::bilinear::{BilinearOperator, BilinearSymbol};
use crate::error::{Error, Result};
use crate::norms::{f_norm, SpaceSpec};
use crate::par;
use crate::partition::ResolutionOfUnity;
use crate::spectral::{apply_multiplier, apply_radial, bracket, forward_transform, magnitude, GridFunction};
use crate::weights::{log_plus, AdmissibleWeight};

/// Radial damping multiplier `m(|xi|)`.
pub type Damping = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `m(xi) = (1 + log_+ |xi|)^{-1/2}`.
pub fn log_damping() -> Damping {
    Arc::new(|r| (1.0 + log_plus(r)).powf(-0.5))
}

/// `e^{i t |D|^s} f`.
pub fn propagator(s: f64, t: f64, f: &GridFunction) -> Result<GridFunction> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dispersion exponent s = {s} must be positive"
        )));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    apply_multiplier(|xi| Complex64::from_polar(1.0, t * magnitude(xi).powf(s)), 1.0, f)
}

/// `||f||_{L^2_{n/2}} = (L^{-n} sum <xi>^n |f^(xi)|^2)^{1/2}`.
pub fn sobolev_norm(f: &GridFunction) -> f64 {
    let spectrum = forward_transform(f);
    let grid = *f.grid();
    let dim = grid.dim();
    let sum: f64 = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| bracket(&grid.frequency(i)[..dim]).powi(dim as i32) * c.norm_sqr())
        .sum();
    (sum / grid.volume()).sqrt()
}

/// Data of the initial value problem. `symbol = None` is the linear equation.
#[derive(Clone)]
pub struct EvolutionSpec {
    pub s: f64,
    pub damping: Damping,
    pub symbol: Option<BilinearSymbol>,
    pub u0: GridFunction,
    pub horizon: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Midpoint nodes of the time lattice.
    pub nodes: usize,
    /// Halvings of the horizon allowed after a divergence.
    pub max_halvings: u32,
}

impl EvolutionSpec {
    /// 32 nodes, tolerance `1e-10`, 50 iterations, 6 halvings and the
    /// logarithmic damping.
    pub fn new(s: f64, symbol: Option<BilinearSymbol>, u0: GridFunction, horizon: f64) -> Self {
        EvolutionSpec {
            s,
            damping: log_damping(),
            symbol,
            u0,
            horizon,
            tolerance: 1e-10,
            max_iterations: 50,
            nodes: 32,
            max_halvings: 6,
        }
    }

    /// `sup_xi m(xi) (1 + log_+ |xi|)^{1/2}` over the grid frequencies.
    pub fn damping_constant(&self) -> f64 {
        let grid = *self.u0.grid();
        let dim = grid.dim();
        (0..grid.len())
            .map(|i| {
                let r = magnitude(&grid.frequency(i)[..dim]);
                (self.damping)(r).abs() * (1.0 + log_plus(r)).sqrt()
            })
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        if !(self.s > 0.0) {
            return Err(Error::InvalidParameter(format!("s = {} must be positive", self.s)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon T = {} must be positive",
                self.horizon
            )));
        }
        if self.nodes == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter("nodes and iterations must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if !self.damping_constant().is_finite() {
            return Err(Error::NonFiniteMultiplier { frequency: vec![] });
        }
        Ok(())
    }
}

/// Converged Picard iteration with its trajectory `u(t_k)`, `t_k = k T / M`.
#[derive(Clone, Debug, Serialize)]
pub struct PicardState {
    pub iterations: usize,
    /// `sup_k ||u^{(i+1)}(t_k) - u^{(i)}(t_k)||_{L^2_{n/2}}` per iteration.
    pub update_norms: Vec<f64>,
    /// Ratios of consecutive update norms.
    pub contraction_factors: Vec<f64>,
    /// `sup_k ||u(t_k) - T_{u0}(u)(t_k)||_{L^2_{n/2}}`.
    pub residual: f64,
    pub horizon: f64,
    pub halvings: u32,
    pub damping_constant: f64,
    pub times: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Vec<GridFunction>,
}

struct Problem<'a> {
    spec: &'a EvolutionSpec,
    operator: Option<BilinearOperator>,
    horizon: f64,
}

impl Problem<'_> {
    fn step(&self) -> f64 {
        self.horizon / self.spec.nodes as f64
    }

    /// `e^{-i r L} m(D) T_sigma(u, u)` with `u = e^{i r L} v`.
    fn integrand(&self, r: f64, v: &GridFunction) -> Result<GridFunction> {
        let op = self.operator.as_ref().expect("nonlinear problem");
        let u = propagator(self.spec.s, r, v)?;
        let n = op.apply(&u, &u)?;
        let damped = apply_radial(|x| (self.spec.damping)(x), 1.0, &n)?;
        propagator(self.spec.s, -r, &damped)
    }

    /// One application of the interaction-picture Duhamel map
    /// `v(t) = u0 - i int_0^t e^{-irL} N(e^{irL} v(r)) dr`, each interval
    /// by the midpoint rule with `v` at the midpoint taken as the mean of its
    /// endpoint values.
    fn apply(&self, v: &[GridFunction]) -> Result<Vec<GridFunction>> {
        let u0 = &self.spec.u0;
        if self.operator.is_none() {
            return Ok(vec![u0.clone(); v.len()]);
        }
        let h = self.step();
        let terms = par::try_map_range(self.spec.nodes, |m| {
            let mid = v[m].add(&v[m + 1])?.scale(Complex64::new(0.5, 0.0));
            self.integrand((m as f64 + 0.5) * h, &mid)
        })?;
        let mut out = Vec::with_capacity(v.len());
        let mut acc = u0.clone();
        out.push(acc.clone());
        for term in &terms {
            acc = acc.axpy(Complex64::new(0.0, -h), term)?;
            out.push(acc.clone());
        }
        Ok(out)
    }
}

fn sup_difference(a: &[GridFunction], b: &[GridFunction]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        worst = worst.max(sobolev_norm(&x.sub(y)?));
    }
    Ok(worst)
}

fn iterate(problem: &Problem<'_>) -> Result<(Vec<GridFunction>, Vec<f64>)> {
    let spec = problem.spec;
    let mut v = vec![spec.u0.clone(); spec.nodes + 1];
    let mut updates = Vec::new();
    for _ in 0..spec.max_iterations {
        let next = problem.apply(&v)?;
        let update = sup_difference(&next, &v)?;
        updates.push(update);
        v = next;
        if update < spec.tolerance {
            return Ok((v, updates));
        }
        let k = updates.len();
        if !update.is_finite() || (k >= 4 && updates[k - 4..].windows(2).all(|w| w[1] >= w[0])) {
            let growth_factor = if k >= 2 {
                updates[k - 1] / updates[k - 2]
            } else {
                f64::INFINITY
            };
            return Err(Error::Divergence {
                growth_factor,
                iterations: k,
            });
        }
    }
    Ok((v, updates))
}

/// Picard iteration for the Duhamel formulation on `[0, T]`; on divergence
/// the horizon is halved and the iteration restarted.
pub fn picard_solve(spec: &EvolutionSpec) -> Result<PicardState> {
    spec.validate()?;
    let operator = match &spec.symbol {
        Some(sigma) => Some(BilinearOperator::new(sigma, spec.u0.grid())?),
        None => None,
    };
    let mut problem = Problem {
        spec,
        operator,
        horizon: spec.horizon,
    };
    let mut halvings = 0;
    loop {
        match iterate(&problem) {
            Ok((v, update_norms)) => {
                let residual = sup_difference(&problem.apply(&v)?, &v)?;
                let h = problem.step();
                let times: Vec<f64> = (0..=spec.nodes).map(|k| k as f64 * h).collect();
                let trajectory = times
                    .iter()
                    .zip(&v)
                    .map(|(&t, vk)| propagator(spec.s, t, vk))
                    .collect::<Result<Vec<_>>>()?;
                let contraction_factors = update_norms
                    .windows(2)
                    .filter(|w| w[0] > 0.0)
                    .map(|w| w[1] / w[0])
                    .collect();
                return Ok(PicardState {
                    iterations: update_norms.len(),
                    update_norms,
                    contraction_factors,
                    residual,
                    horizon: problem.horizon,
                    halvings,
                    damping_constant: spec.damping_constant(),
                    times,
                    trajectory,
                });
            }
            Err(Error::Divergence { .. }) if halvings < spec.max_halvings => {
                halvings += 1;
                problem.horizon /= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Observed order of the time discretization from three solves with `M`,
/// `2M` and `4M` nodes, compared at the final time.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub nodes: Vec<usize>,
    pub differences: Vec<f64>,
    pub order: f64,
}

pub fn time_order_check(spec: &EvolutionSpec, base_nodes: usize) -> Result<OrderReport> {
    let nodes = vec![base_nodes, 2 * base_nodes, 4 * base_nodes];
    let finals = nodes
        .iter()
        .map(|&m| {
            let run = EvolutionSpec {
                nodes: m,
                max_halvings: 0,
                ..spec.clone()
            };
            let state = picard_solve(&run)?;
            Ok(state.trajectory.last().expect("non-empty trajectory").clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let differences = vec![
        sobolev_norm(&finals[0].sub(&finals[1])?),
        sobolev_norm(&finals[1].sub(&finals[2])?),
    ];
    let order = (differences[0] / differences[1]).log2();
    Ok(OrderReport {
        nodes,
        differences,
        order,
    })
}

/// `v(xi) = 1 + log(1 + |xi|^2)`.
pub fn log_symbol(r: f64) -> f64 {
    1.0 + (r * r).ln_1p()
}

/// Solution of `v(D) u = T_sigma(f, g)` with the norms on both sides of the
/// regularity estimate.
#[derive(Clone, Debug, Serialize)]
pub struct LogSchrodingerReport {
    /// `||v(D) u - T_sigma(f, g)||_inf / ||T_sigma(f, g)||_inf`.
    pub round_trip_error: f64,
    /// `||u||_{F^{n/p, omega}_{p,q}}`, `omega(t) = (1 + log_+ 1/t)^{1/p}`.
    pub solution_norm: f64,
    /// `||f||_{F^{n/p+m}_{p,q}} ||g||_{F^{n/p+m}_{p,q}}`.
    pub data_norms: f64,
    pub ratio: f64,
    #[serde(skip)]
    pub solution: GridFunction,
}

pub fn log_schrodinger_solve(
    operator: &BilinearOperator,
    f: &GridFunction,
    g: &GridFunction,
    p: f64,
    q: f64,
    resolution: &ResolutionOfUnity,
) -> Result<LogSchrodingerReport> {
    let rhs = operator.apply(f, g)?;
    let u = apply_radial(|r| 1.0 / log_symbol(r), 1.0, &rhs)?;
    let back = apply_radial(log_symbol, 1.0, &u)?;
    let scale = rhs.max_abs();
    let round_trip_error = if scale > 0.0 {
        back.sub(&rhs)?.max_abs() / scale
    } else {
        back.max_abs()
    };
    let dim = f.grid().dim() as f64;
    let omega = AdmissibleWeight::prototype(1.0 / p, 0.0)?;
    let target = SpaceSpec::new(dim / p, p, q, omega)?;
    let source = SpaceSpec::classical(dim / p + operator.symbol().order(), p, q)?;
    let solution_norm = f_norm(&u, &target, resolution, None)?;
    let data_norms = f_norm(f, &source, resolution, None)? * f_norm(g, &source, resolution, None)?;
    Ok(LogSchrodingerReport {
        round_trip_error,
        solution_norm,
        data_norms,
        ratio: if data_norms > 0.0 {
            solution_norm / data_norms
        } else {
            0.0
        },
        solution: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::BumpProfile;
    use crate::spectral::{lp_norm, Grid};
    use std::f64::consts::PI;

    fn smooth_datum(grid: Grid, size: f64) -> GridFunction {
        let f = GridFunction::from_fn(grid, |x| {
            Complex64::new(x[0].cos() + 0.5 * (2.0 * x[0]).sin(), 0.3 * (3.0 * x[0]).cos())
        });
        let n = sobolev_norm(&f);
        f.scale(Complex64::new(size / n, 0.0))
    }

    #[test]
    fn propagator_is_unitary_with_group_law() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = smooth_datum(grid, 1.0);
        assert_eq!(propagator(2.0, 0.0, &f).unwrap().samples(), f.samples());
        for t in [0.1, 1.7, -3.0] {
            let g = propagator(1.5, t, &f).unwrap();
            assert!((lp_norm(&g, 2.0) - lp_norm(&f, 2.0)).abs() < 1e-12);
        }
        let a = propagator(2.0, 0.3, &propagator(2.0, 0.4, &f).unwrap()).unwrap();
        let b = propagator(2.0, 0.7, &f).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
        let mode = GridFunction::mode(grid, &[3]);
        let m = propagator(2.0, 0.5, &mode).unwrap();
        for (u, v) in m.samples().iter().zip(mode.samples()) {
            assert!((u - v * Complex64::from_polar(1.0, 4.5)).norm() < 1e-12);
        }
    }

    #[test]
    fn linear_problem_is_free_evolution() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let u0 = smooth_datum(grid, 1.0);
        let state = picard_solve(&EvolutionSpec::new(2.0, None, u0.clone(), 0.5)).unwrap();
        assert_eq!(state.iterations, 1);
        assert!(state.residual <= 1e-12);
        for (t, u) in state.times.iter().zip(&state.trajectory) {
            let exact = propagator(2.0, *t, &u0).unwrap();
            assert!(u.sub(&exact).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn zero_datum_stays_zero() {
        let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
        let spec = EvolutionSpec::new(2.0, Some(BilinearSymbol::one()), GridFunction::zeros(grid), 0.1);
        let state = picard_solve(&spec).unwrap();
        assert!(state.trajectory.iter().all(|u| u.max_abs() == 0.0));
    }

    #[test]
    fn small_data_contracts() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let spec = EvolutionSpec::new(2.0, Some(BilinearSymbol::one()), smooth_datum(grid, 0.01), 0.1);
        let state = picard_solve(&spec).unwrap();
        assert!(state.iterations <= 20);
        assert!(state.residual <= 1e-8);
        assert!(state.contraction_factors.iter().all(|c| *c < 1.0));
        assert!((state.damping_constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_data_triggers_halving() {
        let grid = Grid::new(1, 32, 2.0 * PI).unwrap();
        let mut spec = EvolutionSpec::new(2.0, Some(BilinearSymbol::one()), smooth_datum(grid, 40.0), 1.0);
        spec.max_iterations = 200;
        let state = picard_solve(&spec).unwrap();
        assert!(state.halvings > 0);
        assert!(state.horizon < 1.0);
        spec.max_halvings = 0;
        assert!(matches!(picard_solve(&spec), Err(Error::Divergence { .. })));
    }

    #[test]
    fn second_order_in_time() {
        let grid = Grid::new(1, 64, 2.0 * PI).unwrap();
        let spec = EvolutionSpec::new(2.0, Some(BilinearSymbol::one()), smooth_datum(grid, 1.0), 0.2);
        let report = time_order_check(&spec, 8).unwrap();
        assert!(report.order >= 1.8, "{report:?}");
    }

    #[test]
    fn log_symbol_round_trip() {
        let grid = Grid::new(1, 128, 2.0 * PI).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 4, &grid).unwrap();
        let f = smooth_datum(grid, 1.0);
        let back = apply_radial(
            log_symbol,
            1.0,
            &apply_radial(|r| 1.0 / log_symbol(r), 1.0, &f).unwrap(),
        )
        .unwrap();
        assert!(back.sub(&f).unwrap().max_abs() < 1e-12);

        let one = BilinearOperator::new(&BilinearSymbol::one(), &grid).unwrap();
        let zero = GridFunction::zeros(grid);
        let r = log_schrodinger_solve(&one, &zero, &f, 2.0, 2.0, &res).unwrap();
        assert_eq!(r.solution.max_abs(), 0.0);

        let a = GridFunction::mode(grid, &[2]);
        let b = GridFunction::mode(grid, &[3]);
        let r = log_schrodinger_solve(&one, &a, &b, 2.0, 2.0, &res).unwrap();
        let expected = GridFunction::mode(grid, &[5]).scale(Complex64::new(1.0 / log_symbol(5.0), 0.0));
        assert!(r.solution.sub(&expected).unwrap().max_abs() < 1e-12);
        assert!(r.round_trip_error < 1e-10);
    }
}
