//! One function per subcommand: resolve options, run, fill the report.

use std::f64::consts::{E, PI};
use std::path::Path;

use lpcalc::bilinear::{self, BilinearSymbol};
use lpcalc::experiments::{
    self, EmbeddingCase, Ensemble, EnsembleSpec, Identification, RatioReport, SharpnessProfile, SweepConfig,
    SPREAD_BOUND,
};
use lpcalc::norms::{self, Blocks, DyadicCubeSet, SpaceSpec, LEAKAGE_TOLERANCE};
use lpcalc::pde::{self, EvolutionSpec};
use lpcalc::rational::Exponent;
use lpcalc::spectral::forward_transform;
use lpcalc::weights::{zero_order_symbol_check, RegularizedWeight};
use lpcalc::{AdmissibleWeight, AnnulusCutoffs, BumpProfile, Complex64, Error, Grid, GridFunction, ResolutionOfUnity};

use crate::config::{parse_levels, ConfigFile};
use crate::error::CliError;
use crate::report::{Builder, Check};
use crate::{
    Command, DecomposeArgs, EmbedArgs, EmbedKind, EnsembleArgs, GridArgs, LiftArgs, LogSchrodingerArgs, NormArgs,
    PartitionArgs, PdeArgs, ProductArgs, Profile, ResolutionArgs, SharpnessArgs, Space, WeightArgs,
};

type Outcome = Result<(), CliError>;

pub fn dispatch(command: &Command, config: &ConfigFile, out: &mut Builder) -> Outcome {
    match command {
        Command::Norm(a) => norm(a, config, out),
        Command::PartitionCheck(a) => partition_check(a, config, out),
        Command::WeightCheck(a) => weight_check(a, config, out),
        Command::Decompose(a) => decompose(a, config, out),
        Command::EmbedCheck(a) => embed_check(a, config, out),
        Command::ProductCheck(a) => product_check(a, config, out),
        Command::ResolutionCheck(a) => resolution_check(a, config, out),
        Command::Sharpness(a) => sharpness(a, config, out),
        Command::LiftCheck(a) => lift_check(a, config, out),
        Command::Pde(a) => pde_run(a, config, out),
        Command::Logschrodinger(a) => log_schrodinger(a, config, out),
    }
}

fn profile_name(p: Profile) -> String {
    match p {
        Profile::Mollifier => "mollifier".into(),
        Profile::Smoothstep7 => "smoothstep7".into(),
    }
}

fn bump(flag: Option<Profile>, config: &ConfigFile, out: &mut Builder) -> Result<BumpProfile, CliError> {
    let name = config.get(flag.map(profile_name), "profile", "mollifier".to_string())?;
    out.echo("profile", &name);
    match name.as_str() {
        "mollifier" => Ok(BumpProfile::Mollifier),
        "smoothstep7" => Ok(BumpProfile::Smoothstep7),
        other => Err(CliError::Usage(format!(
            "unknown profile {other:?}; use mollifier or smoothstep7"
        ))),
    }
}

/// Grid from flags, then config, then `defaults = (n, N, L)`.
fn grid(
    args: &GridArgs,
    config: &ConfigFile,
    defaults: (usize, usize, f64),
    out: &mut Builder,
) -> Result<Grid, CliError> {
    let dim = config.get(args.dim, "dim", defaults.0)?;
    let points = config.get(args.points, "points", defaults.1)?;
    let length = config.get(args.length, "length", defaults.2)?;
    out.echo("dim", dim);
    out.echo("points", points);
    out.echo("length", length);
    Ok(Grid::new(dim, points, length)?)
}

/// Largest level with `2^{J+1} <= pi N / L`.
fn finest_level(grid: &Grid) -> u32 {
    (grid.nyquist().log2().floor() as u32).saturating_sub(1)
}

fn resolution(
    args: &GridArgs,
    config: &ConfigFile,
    grid: &Grid,
    out: &mut Builder,
) -> Result<ResolutionOfUnity, CliError> {
    let profile = bump(args.profile, config, out)?;
    let j_max = config.get(args.jmax, "jmax", finest_level(grid))?;
    out.echo("jmax", j_max);
    Ok(ResolutionOfUnity::for_grid(profile, j_max, grid)?)
}

fn sweep_config(
    ensemble: &EnsembleArgs,
    grid_args: &GridArgs,
    config: &ConfigFile,
    default_levels: &str,
    out: &mut Builder,
) -> Result<SweepConfig, CliError> {
    let g = grid(grid_args, config, (1, 4096, 16.0), out)?;
    let res = resolution(grid_args, config, &g, out)?;
    let seed = config.get(ensemble.seed, "seed", 42u64)?;
    let count = config.get(ensemble.count, "count", 50usize)?;
    let levels = parse_levels(&config.get(ensemble.levels.clone(), "levels", default_levels.to_string())?)?;
    out.echo("seed", seed);
    out.echo("count", count);
    out.echo("levels", &levels);
    out.seed = Some(seed);
    Ok(SweepConfig {
        grid: g,
        resolution: res,
        seed,
        count,
        levels,
        spread_bound: SPREAD_BOUND,
    })
}

fn ratio_checks(out: &mut Builder, key: &str, report: &RatioReport) {
    out.check(Check::at_most(
        format!("{key}: max/min ratio"),
        report.spread,
        report.spread_bound,
    ));
    out.check(Check::at_most(
        format!("{key}: bandwidth trend slope"),
        report.trend_slope,
        report.trend_tolerance,
    ));
    out.detail(key, report);
}

fn ratio_series(out: &mut Builder, report: &RatioReport) {
    let rows = report.samples.iter().map(|s| (s.level as f64, s.value)).collect();
    out.series("level", "ratio", rows);
}

fn symbol(name: &str, period: f64) -> Result<BilinearSymbol, CliError> {
    BilinearSymbol::builtin(name, period).map_err(|e| CliError::Usage(e.to_string()))
}

fn read_input(path: &Path) -> Result<GridFunction, CliError> {
    Ok(lpcalc::io::read_lpgf(path)?)
}

fn norm(a: &NormArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let input = config.pick(a.input.clone(), "input")?;
    let f = match &input {
        Some(path) => {
            out.echo("input", path);
            read_input(path)?
        }
        None => {
            let g = grid(&a.grid, config, (1, 1024, 16.0), out)?;
            let seed = config.get(a.seed, "seed", 42u64)?;
            let level = config.get(a.level, "level", 4u32)?;
            out.echo("seed", seed);
            out.echo("level", level);
            out.seed = Some(seed);
            let spec = EnsembleSpec {
                seed,
                count: 1,
                s: 0.0,
                level,
            };
            Ensemble::generate(&g, spec)?.members()[0].clone()
        }
    };
    let g = *f.grid();
    let res = resolution(&a.grid, config, &g, out)?;
    let space = config.get(a.space.map(space_name), "space", "tl".to_string())?;
    let s = config.get(a.s, "s", 0.0)?;
    let p: f64 = config.parsed(a.p.clone(), "p", "2")?;
    let q: f64 = config.parsed(a.q.clone(), "q", "2")?;
    let lambda = config.get(a.lambda, "lambda", 0.0)?;
    let mu = config.get(a.mu, "mu", 0.0)?;
    for (k, v) in [("s", s), ("p", p), ("q", q), ("lambda", lambda), ("mu", mu)] {
        out.echo(k, v);
    }
    out.echo("space", &space);
    let weight = AdmissibleWeight::prototype(lambda, mu)?;
    let cubes = || DyadicCubeSet::new(&g);

    let spectrum = forward_transform(&f);
    let banded = matches!(space.as_str(), "besov" | "tl");
    if banded {
        let leakage = spectrum.mass_above(res.band_limit());
        out.check(Check::at_most(
            "relative amplitude above the band limit",
            leakage,
            LEAKAGE_TOLERANCE,
        ));
        if leakage > LEAKAGE_TOLERANCE {
            return Ok(());
        }
    }
    let spec = SpaceSpec::new(s, p, q, weight.clone())?;
    let value = match space.as_str() {
        "besov" => {
            let r = norms::besov_report(&Blocks::from_spectrum(spectrum, &res)?, &spec)?;
            out.detail("blocks", &r.blocks);
            r.norm
        }
        "tl" => {
            let c = if p.is_infinite() { Some(cubes()?) } else { None };
            let r = norms::f_norm_report(&Blocks::from_spectrum(spectrum, &res)?, &spec, c.as_ref())?;
            out.detail("blocks", &r.blocks);
            out.detail("cube", &r.cube);
            r.norm
        }
        "bmo" => {
            let r = norms::bmo_report(&f, &cubes()?)?;
            out.detail("cube", &r.cube);
            r.norm
        }
        "big-bmo" => {
            let (v, cube) = norms::big_bmo_report(&f, &cubes()?)?;
            out.detail("cube", &cube);
            v
        }
        "xw" => {
            let cutoffs = AnnulusCutoffs::new(res.profile());
            let r = norms::xw_report(&f, &weight, &cutoffs, res.j_max(), &cubes()?)?;
            out.detail("bmo_part", r.bmo_part);
            out.series(
                "j",
                "sup_norm_over_weight",
                r.scales.iter().map(|&(j, v)| (j as f64, v)).collect(),
            );
            out.detail("scales", &r.scales);
            r.norm
        }
        other => return Err(CliError::Usage(format!("unknown space {other:?}"))),
    };
    out.detail("norm", value);
    out.check(Check::holds("norm is finite", value.is_finite()));
    Ok(())
}

fn space_name(s: Space) -> String {
    match s {
        Space::Besov => "besov",
        Space::Tl => "tl",
        Space::Bmo => "bmo",
        Space::BigBmo => "big-bmo",
        Space::Xw => "xw",
    }
    .into()
}

fn partition_check(a: &PartitionArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let profile = bump(a.profile, config, out)?;
    let j_max = config.get(a.jmax, "jmax", 7u32)?;
    let length = config.get(a.length, "length", 64.0)?;
    out.echo("jmax", j_max);
    out.echo("length", length);
    let res = ResolutionOfUnity::new(profile, j_max)?;
    let step = 2.0 * PI / length;
    let report = res.check_invariants(step, (j_max as f64 + 1.0).exp2());
    out.check(Check::at_most("partition residual", report.partition_residual, 1e-12));
    out.check(Check::at_most(
        "telescoping residual",
        report.telescoping_residual,
        1e-12,
    ));
    out.check(Check::at_most(
        "support violations",
        report.support_violations as f64,
        0.0,
    ));
    out.check(Check::at_most(
        "plateau violations",
        report.plateau_violations as f64,
        0.0,
    ));
    for row in &report.decay {
        out.check(Check::at_most(
            format!("order-{} decay constant spread over levels", row.order),
            row.spread,
            1.05,
        ));
    }
    let count = (report.identity_radius / step).floor() as usize;
    let rows = (0..=count)
        .map(|k| {
            let r = k as f64 * step;
            let total: f64 = (0..=j_max).map(|j| res.level(j, r)).sum();
            (r, (total - 1.0).abs())
        })
        .collect();
    out.series("r", "partition_residual", rows);
    out.detail("partition", &report);
    Ok(())
}

fn weight_check(a: &WeightArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let table = config.pick(a.table.clone(), "table")?;
    let lambda = config.get(a.lambda, "lambda", 1.0)?;
    let mu = config.get(a.mu, "mu", 0.0)?;
    let levels = config.get(a.levels, "levels", 32u32)?;
    let j_max = config.get(a.jmax, "jmax", 8u32)?;
    let length = config.get(a.length, "length", 64.0)?;
    let weight = match &table {
        Some(t) => {
            out.echo("table", t);
            let values = t
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("--table: {e}")))?;
            AdmissibleWeight::table(values)?
        }
        None => {
            out.echo("lambda", lambda);
            out.echo("mu", mu);
            AdmissibleWeight::prototype(lambda, mu)?
        }
    };
    out.echo("levels", levels);
    out.echo("jmax", j_max);
    out.echo("length", length);

    let admissible = weight.check_admissible(levels);
    out.check(Check::holds("admissible", admissible.violation.is_none()));
    out.detail("admissibility", &admissible);
    let comp = weight.comp_weights_bound(levels);
    out.check(Check::holds("comparison exponent b found", comp.b.is_some()));
    out.detail("comp_weights", &comp);
    out.detail("comparable_values", weight.comparable_values(levels));

    let res = ResolutionOfUnity::new(BumpProfile::Mollifier, j_max)?;
    let reg = RegularizedWeight::new(&weight, &res);
    let constant = reg.equivalence_constant(2.0 * PI / length);
    if table.is_none() && lambda.abs() <= 1.0 && mu.abs() <= 1.0 {
        out.check(Check::at_most("regularization equivalence constant", constant, 4.0));
    }
    out.detail("equivalence_constant", constant);
    for reciprocal in [false, true] {
        let decay = reg.symbol_decay(reciprocal, 4);
        let name = if reciprocal {
            "1/w(D) symbol decay"
        } else {
            "w(D) symbol decay"
        };
        out.check(Check::holds(name, decay.passed));
        out.detail(if reciprocal { "reciprocal_decay" } else { "decay" }, &decay);
    }
    let zero = zero_order_symbol_check(
        |xi| Complex64::new(reg.eval(xi) / reg.eval(2.0 * xi), 0.0),
        4,
        reg.exact_radius() / 2.0,
    );
    out.detail("quotient_decay", &zero);
    let rows = (0..=levels).map(|j| (j as f64, weight.at_level(j as i64))).collect();
    out.series("j", "w(2^-j)", rows);
    Ok(())
}

fn decompose(a: &DecomposeArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let g = grid(&a.grid, config, (1, 256, 4.0), out)?;
    let mut grid_args_jmax = a.grid.jmax;
    if grid_args_jmax.is_none() && config.pick::<u32>(None, "jmax")?.is_none() {
        grid_args_jmax = Some(finest_level(&g));
    }
    let profile = bump(a.grid.profile, config, out)?;
    let j_max = config.get(grid_args_jmax, "jmax", 6u32)?;
    out.echo("jmax", j_max);
    let res = ResolutionOfUnity::for_grid(profile, j_max, &g)?;
    let name = config.get(a.symbol.clone(), "symbol", "one".to_string())?;
    let k_max = config.get(a.kmax, "kmax", bilinear::DEFAULT_K_MAX)?;
    let tolerance = config.get(a.tail_tolerance, "tail-tolerance", 1e-6)?;
    out.echo("symbol", &name);
    out.echo("kmax", k_max);
    out.echo("tail-tolerance", tolerance);
    let sigma = symbol(&name, g.length())?;
    let report = bilinear::decompose(&sigma, &res, &g, k_max, bilinear::DEFAULT_DECAY_EXPONENTS, tolerance)?;
    out.check(Check::at_most(
        "paraproduct reconstruction residual",
        report.reconstruction_residual,
        1e-10,
    ));
    out.check(Check::at_most("elementary series tail", report.max_tail, tolerance));
    out.check(Check::at_most(
        "normalized coefficient trend slope",
        report.coefficient_slope,
        bilinear::TREND_TOLERANCE,
    ));
    let rows = report
        .levels
        .iter()
        .map(|l| (l.level as f64, l.normalized_max))
        .collect();
    out.series("j", "normalized_max", rows);
    out.detail("decomposition", &report);
    Ok(())
}

fn exponent(
    config: &ConfigFile,
    flag: &Option<String>,
    key: &str,
    default: &str,
    out: &mut Builder,
) -> Result<Exponent, CliError> {
    let e: Exponent = config.parsed(flag.clone(), key, default)?;
    out.echo(key, e.to_string());
    Ok(e)
}

/// Gate rejections are reported as a failed check.
fn gated<T>(out: &mut Builder, result: lpcalc::Result<T>) -> Result<Option<T>, CliError> {
    match result {
        Ok(v) => {
            out.check(Check::holds("parameter gate", true));
            Ok(Some(v))
        }
        Err(e @ (Error::Gate(_) | Error::IndexRelation(_))) => {
            out.check(Check::holds("parameter gate", false));
            out.detail("gate", e.to_string());
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn embed_check(a: &EmbedArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let kind = config.get(a.kind.map(embed_name), "kind", "refined".to_string())?;
    out.echo("kind", &kind);
    let default_levels = if kind == "identification" { "4..7" } else { "4..8" };
    let sweep = sweep_config(&a.ensemble, &a.grid, config, default_levels, out)?;
    match kind.as_str() {
        "refined" => {
            let p = exponent(config, &a.p, "p", "2", out)?;
            let q = exponent(config, &a.q, "q", "2", out)?;
            let Some(()) = gated(out, experiments::embedding_gate(p, q))? else {
                return Ok(());
            };
            let refined = experiments::refined_exponent(p);
            let weight = config.get(a.a, "a", *refined.numer() as f64 / *refined.denom() as f64)?;
            out.echo("a", weight);
            let report = experiments::embedding_ratio(&sweep, p, q, weight)?;
            ratio_checks(out, "embedding", &report);
            ratio_series(out, &report);
            let s = sweep.grid.dim() as f64 / p.to_f64();
            let cmp = experiments::compare_weight_exponents(&sweep, s, weight, 1.0)?;
            out.check(Check::at_most(
                "members with coarse norm above refined norm",
                cmp.violations as f64,
                0.0,
            ));
            out.detail("weight_comparison", &cmp);
        }
        "besov-tl" => {
            let case = EmbeddingCase::BesovIntoTl {
                p: exponent(config, &a.p, "p", "2", out)?,
                s: exponent(config, &a.s, "s", "0", out)?,
                q: exponent(config, &a.q, "q", "2", out)?,
            };
            if let Some(report) = gated(out, experiments::besov_tl_embedding_check(&sweep, case))? {
                ratio_checks(out, "embedding", &report);
                ratio_series(out, &report);
            }
        }
        "tl-besov" => {
            let case = EmbeddingCase::TlIntoBesov {
                p: exponent(config, &a.p, "p", "2", out)?,
                q: exponent(config, &a.q, "q", "2", out)?,
                s: exponent(config, &a.s, "s", "1/2", out)?,
                p1: exponent(config, &a.p1, "p1", "4", out)?,
                q1: exponent(config, &a.q1, "q1", "2", out)?,
                s1: exponent(config, &a.s1, "s1", "1/4", out)?,
            };
            if let Some(report) = gated(out, experiments::besov_tl_embedding_check(&sweep, case))? {
                ratio_checks(out, "embedding", &report);
                ratio_series(out, &report);
            }
        }
        "identification" => {
            for id in Identification::ALL {
                let report = experiments::identification_check(&sweep, id)?;
                ratio_checks(out, id.name(), &report);
            }
        }
        other => return Err(CliError::Usage(format!("unknown kind {other:?}"))),
    }
    Ok(())
}

fn embed_name(k: EmbedKind) -> String {
    match k {
        EmbedKind::Refined => "refined",
        EmbedKind::BesovTl => "besov-tl",
        EmbedKind::TlBesov => "tl-besov",
        EmbedKind::Identification => "identification",
    }
    .into()
}

fn product_check(a: &ProductArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let sweep = sweep_config(&a.ensemble, &a.grid, config, "4..8", out)?;
    let p = exponent(config, &a.p, "p", "2", out)?;
    let q = exponent(config, &a.q, "q", "2", out)?;
    if let Some(report) = gated(out, experiments::product_estimate_ratio(&sweep, p, q))? {
        ratio_checks(out, "product", &report);
        ratio_series(out, &report);
    }
    Ok(())
}

fn resolution_check(a: &ResolutionArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let sweep = sweep_config(&a.ensemble, &a.grid, config, "4..8", out)?;
    let s = config.get(a.s, "s", 0.0)?;
    let q = config.get(a.q, "q", 2.0)?;
    let lambda = config.get(a.lambda, "lambda", 0.0)?;
    out.echo("s", s);
    out.echo("q", q);
    out.echo("lambda", lambda);
    let spec = SpaceSpec::new(s, f64::INFINITY, q, AdmissibleWeight::prototype(lambda, 0.0)?)?;
    let report = experiments::resolution_independence_check(&sweep, &spec)?;
    ratio_checks(out, "resolution", &report);
    ratio_series(out, &report);
    Ok(())
}

fn sharpness(a: &SharpnessArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let delta = config.get(a.delta, "delta", 0.51)?;
    let gamma = config.get(a.gamma, "gamma", 0.4)?;
    let points = config.get(a.points, "points", 1usize << 14)?;
    let rmax = config.get(a.rmax, "rmax", 512.0 * E)?;
    let k_max = ((rmax / E).log2() + 1e-9).floor();
    if k_max.is_nan() || k_max < 3.0 {
        return Err(CliError::Usage(format!("--rmax {rmax} must be at least 8e")));
    }
    for (k, v) in [("delta", delta), ("gamma", gamma), ("rmax", rmax)] {
        out.echo(k, v);
    }
    out.echo("points", points);
    let profile = SharpnessProfile::with_grid(delta, gamma, points, k_max as u32)?;
    let report = experiments::sharpness_scan(&profile)?;
    let alpha = report.predicted_exponent;
    out.check(Check::at_most(
        "quadrature oracle exponent error",
        (report.oracle_fit.alpha - alpha).abs(),
        0.02 * alpha.abs(),
    ));
    if report.divergence_predicted {
        out.check(Check::at_most(
            "growth exponent error",
            (report.growth_fit.alpha - alpha).abs(),
            0.05,
        ));
    } else {
        out.check(Check::holds(
            "partial norm increments decreasing",
            report.growth.decreasing,
        ));
        out.check(Check::at_most(
            "last over first partial norm increment",
            report.growth.last_over_first,
            0.1,
        ));
    }
    out.check(Check::holds(
        "membership norm increments decreasing",
        report.membership.decreasing,
    ));
    let worst = report.convolution.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
    out.check(Check::holds(
        "convolution dominates the lower bound within 5%",
        report.convolution_passed,
    ));
    out.detail("worst_convolution_ratio", worst);
    out.series(
        "R",
        "S(R)",
        report
            .radii
            .iter()
            .copied()
            .zip(report.growth_values.iter().copied())
            .collect(),
    );
    out.detail("sharpness", &report);
    Ok(())
}

fn lift_check(a: &LiftArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let sweep = sweep_config(&a.ensemble, &a.grid, config, "4..8", out)?;
    let single = [
        config.pick(a.p, "p")?,
        config.pick(a.q, "q")?,
        config.pick(a.s, "s")?,
        config.pick(a.lambda, "lambda")?,
    ];
    let cases: Vec<(f64, f64, f64, f64)> = if single.iter().any(Option::is_some) {
        vec![(
            single[0].unwrap_or(2.0),
            single[1].unwrap_or(2.0),
            single[2].unwrap_or(0.0),
            single[3].unwrap_or(1.0),
        )]
    } else {
        let mut all = Vec::new();
        for (p, q) in [(2.0, 2.0), (f64::INFINITY, 2.0)] {
            for s in [0.0, 0.5] {
                for lambda in [1.0, -1.0] {
                    all.push((p, q, s, lambda));
                }
            }
        }
        all
    };
    out.echo(
        "cases",
        cases
            .iter()
            .map(|c| [c.0.to_string(), c.1.to_string(), c.2.to_string(), c.3.to_string()])
            .collect::<Vec<_>>(),
    );
    let report = experiments::lifting_sweep(&sweep, &cases)?;
    ratio_checks(out, "lifting", &report);
    ratio_series(out, &report);
    Ok(())
}

fn pde_run(a: &PdeArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let s = config.get(a.s, "s", 2.0)?;
    let horizon = config.get(a.horizon, "T", 0.1)?;
    let tol = config.get(a.tol, "tol", 1e-10)?;
    let name = config.get(a.symbol.clone(), "symbol", "one".to_string())?;
    let nodes = config.get(a.nodes, "nodes", 32usize)?;
    let max_iterations = config.get(a.max_iterations, "max-iterations", 50usize)?;
    let order = a.order || config.get(None, "order", false)?;
    for (k, v) in [("s", s), ("T", horizon), ("tol", tol)] {
        out.echo(k, v);
    }
    out.echo("symbol", &name);
    out.echo("nodes", nodes);
    out.echo("max-iterations", max_iterations);
    out.echo("order", order);
    let u0 = match config.pick(a.u0.clone(), "u0")? {
        Some(path) => {
            out.echo("u0", &path);
            read_input(&path)?
        }
        None => {
            let g = grid(&a.grid, config, (1, 64, 2.0 * PI), out)?;
            let seed = config.get(a.seed, "seed", 42u64)?;
            let amplitude = config.get(a.amplitude, "amplitude", 0.01)?;
            out.echo("seed", seed);
            out.echo("amplitude", amplitude);
            out.seed = Some(seed);
            let spec = EnsembleSpec {
                seed,
                count: 1,
                s: 1.0,
                level: 3,
            };
            let f = Ensemble::generate(&g, spec)?.members()[0].clone();
            let norm = pde::sobolev_norm(&f);
            f.scale(Complex64::new(amplitude / norm, 0.0))
        }
    };
    let sigma = match name.as_str() {
        "zero" => None,
        other => Some(symbol(other, u0.grid().length())?),
    };
    let mut spec = EvolutionSpec::new(s, sigma, u0, horizon);
    spec.tolerance = tol;
    spec.nodes = nodes;
    spec.max_iterations = max_iterations;
    let state = pde::picard_solve(&spec)?;
    let last = state.update_norms.last().copied().unwrap_or(0.0);
    out.check(Check::at_most("last Picard update", last, tol));
    out.check(Check::at_most("fixed-point residual", state.residual, tol));
    out.check(Check::holds(
        "damping constant is finite",
        state.damping_constant.is_finite(),
    ));
    out.detail("iterations", state.iterations);
    out.detail("contraction_factors", &state.contraction_factors);
    out.detail("residual", state.residual);
    out.detail("picard", &state);
    if order {
        let r = pde::time_order_check(&spec, 8)?;
        out.check(Check::at_least("time discretization order", r.order, 1.8));
        out.detail("order", &r);
    }
    let rows = state
        .update_norms
        .iter()
        .enumerate()
        .map(|(i, u)| ((i + 1) as f64, *u))
        .collect();
    out.series("iteration", "update_norm", rows);
    if let Some(dir) = config.pick(a.snapshots.clone(), "snapshots")? {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        for (k, u) in state.trajectory.iter().enumerate() {
            lpcalc::io::write_lpgf(u, dir.join(format!("u_{k:03}.lpgf")))?;
        }
        out.echo("snapshots", &dir);
    }
    Ok(())
}

fn log_schrodinger(a: &LogSchrodingerArgs, config: &ConfigFile, out: &mut Builder) -> Outcome {
    let name = config.get(a.symbol.clone(), "symbol", "one".to_string())?;
    let p = config.get(a.p, "p", 2.0)?;
    let q = config.get(a.q, "q", 2.0)?;
    out.echo("symbol", &name);
    out.echo("p", p);
    out.echo("q", q);
    match config.pick(a.input.clone(), "input")? {
        Some(paths) => {
            let [fp, gp] = paths.as_slice() else {
                return Err(CliError::Usage("--input takes two files".into()));
            };
            out.echo("input", &paths);
            let f = read_input(fp)?;
            let g = read_input(gp)?;
            let res = resolution(&a.grid, config, f.grid(), out)?;
            let sigma = symbol(&name, f.grid().length())?;
            let operator = bilinear::BilinearOperator::new(&sigma, f.grid())?;
            let r = pde::log_schrodinger_solve(&operator, &f, &g, p, q, &res)?;
            out.check(Check::at_most(
                "v(D) round trip relative error",
                r.round_trip_error,
                1e-10,
            ));
            out.detail("log_schrodinger", &r);
        }
        None => {
            if name != "one" {
                return Err(CliError::Usage("the ensemble sweep uses the symbol one".into()));
            }
            let sweep = sweep_config(&a.ensemble, &a.grid, config, "4..8", out)?;
            let report = experiments::log_schrodinger_ratio(&sweep, p, q)?;
            ratio_checks(out, "log_schrodinger", &report);
            ratio_series(out, &report);
        }
    }
    Ok(())
}
