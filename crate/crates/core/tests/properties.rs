use lpcalc::bilinear::{apply_bilinear, apply_bilinear_direct, split_paraproduct, BilinearSymbol};
use lpcalc::experiments::{Ensemble, EnsembleSpec};
use lpcalc::io::{decode_lpgf, encode_lpgf};
use lpcalc::norms::{bmo_norm, f_norm, xw_norm, DyadicCubeSet, SpaceSpec};
use lpcalc::pde::{log_symbol, propagator};
use lpcalc::rational::Exponent;
use lpcalc::spectral::{apply_multiplier, forward_transform, inverse_transform, lp_norm, magnitude, pointwise_product};
use lpcalc::{AdmissibleWeight, AnnulusCutoffs, BumpProfile, Complex64, Grid, GridFunction, ResolutionOfUnity};
use proptest::prelude::*;

fn samples(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn grid_1d() -> Grid {
    Grid::new(1, 32, 4.0).unwrap()
}

fn grid_2d() -> Grid {
    Grid::new(2, 8, 2.0).unwrap()
}

fn ensemble(grid: &Grid, seed: u64, level: u32, count: usize) -> Vec<GridFunction> {
    let spec = EnsembleSpec {
        seed,
        count,
        s: 0.0,
        level,
    };
    Ensemble::generate(grid, spec).unwrap().members().to_vec()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_and_round_trip(v in samples(32), w in samples(64)) {
        for (grid, data) in [(grid_1d(), v), (grid_2d(), w)] {
            let f = GridFunction::new(grid, data).unwrap();
            let spectrum = forward_transform(&f);
            prop_assert!(rel(spectrum.l2().powi(2), grid.parseval_constant() * f.l2_samples().powi(2)) < 1e-12);
            let back = inverse_transform(&spectrum);
            prop_assert!(back.sub(&f).unwrap().max_abs() <= 1e-12 * f.max_abs().max(1.0));
        }
    }

    #[test]
    fn transform_is_linear(v in samples(32), w in samples(32), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let grid = grid_1d();
        let f = GridFunction::new(grid, v).unwrap();
        let g = GridFunction::new(grid, w).unwrap();
        let (a, b) = (Complex64::new(a, 0.5), Complex64::new(b, -0.25));
        let combined = forward_transform(&f.scale(a).axpy(b, &g).unwrap());
        let (ff, fg) = (forward_transform(&f), forward_transform(&g));
        let err = combined
            .coeffs()
            .iter()
            .zip(ff.coeffs().iter().zip(fg.coeffs()))
            .map(|(c, (x, y))| (c - a * x - b * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(err <= 1e-12 * (a.norm() * ff.l2() + b.norm() * fg.l2()) * 8.0);
    }

    #[test]
    fn multipliers_compose(v in samples(64), t in 0.1..2.0f64) {
        let f = GridFunction::new(grid_2d(), v).unwrap();
        let a = |xi: &[f64]| Complex64::new(1.0 + magnitude(xi), 0.0);
        let b = |xi: &[f64]| Complex64::from_polar(1.0, xi[0]);
        let twice = apply_multiplier(a, t, &apply_multiplier(b, t, &f).unwrap()).unwrap();
        let once = apply_multiplier(|xi: &[f64]| a(xi) * b(xi), t, &f).unwrap();
        prop_assert!(twice.sub(&once).unwrap().max_abs() <= 1e-12 * once.max_abs().max(1.0) * 10.0);
    }

    #[test]
    fn partition_sums_to_one(r in 0.0..64.0f64, j_max in 2u32..8) {
        let res = ResolutionOfUnity::new(BumpProfile::Mollifier, j_max).unwrap();
        prop_assume!(r <= (j_max as f64 - 1.0).exp2());
        let total: f64 = (0..=j_max).map(|j| res.level(j, r)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn prototype_weights_are_admissible(lambda in -1.0..1.0f64, mu in 0.0..1.0f64) {
        let w = AdmissibleWeight::prototype(lambda, mu * lambda.signum()).unwrap();
        let report = w.check_admissible(24);
        prop_assert!(report.violation.is_none(), "{:?}", report);
        prop_assert!(report.c > 0.0 && report.d.is_finite());
    }

    #[test]
    fn norms_are_homogeneous(seed in 0u64..1000, k in -20i32..20, c in 0.01..50.0f64, q in 0.5..4.0f64) {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 4, &grid).unwrap();
        let cubes = DyadicCubeSet::new(&grid).unwrap();
        let f = &ensemble(&grid, seed, 4, 1)[0];
        let w = AdmissibleWeight::prototype(0.5, 0.0).unwrap();
        // Power-of-two scalars leave the rounding noise of empty blocks in place,
        // which matters for q < 1.
        let two = k as f64;
        let g = f.scale(Complex64::new(two.exp2(), 0.0));
        for p in [1.0, 2.0, f64::INFINITY] {
            let spec = SpaceSpec::new(0.5, p, q, w.clone()).unwrap();
            let a = f_norm(f, &spec, &res, Some(&cubes)).unwrap();
            prop_assert!(rel(f_norm(&g, &spec, &res, Some(&cubes)).unwrap(), two.exp2() * a) < 1e-12);
            if q >= 1.0 {
                let h = f.scale(Complex64::new(c, -c));
                let b = f_norm(&h, &spec, &res, Some(&cubes)).unwrap();
                prop_assert!(rel(b, c * 2f64.sqrt() * a) < 1e-10);
            }
        }
        prop_assert!(rel(bmo_norm(&g, &cubes).unwrap(), two.exp2() * bmo_norm(f, &cubes).unwrap()) < 1e-12);
    }

    #[test]
    fn triangle_inequality(seed in 0u64..1000, p in 1.0..4.0f64, q in 1.0..4.0f64) {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 4, &grid).unwrap();
        let members = ensemble(&grid, seed, 4, 2);
        let spec = SpaceSpec::classical(0.25, p, q).unwrap();
        let n = |f: &GridFunction| f_norm(f, &spec, &res, None).unwrap();
        let sum = members[0].add(&members[1]).unwrap();
        prop_assert!(n(&sum) <= n(&members[0]) + n(&members[1]) + 1e-10);
    }

    #[test]
    fn norms_decrease_in_q(seed in 0u64..1000, q1 in 0.5..3.0f64, dq in 0.0..3.0f64) {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, 4, &grid).unwrap();
        let cubes = DyadicCubeSet::new(&grid).unwrap();
        let f = &ensemble(&grid, seed, 4, 1)[0];
        for p in [1.0, 2.0, 3.0] {
            let a = f_norm(f, &SpaceSpec::classical(0.5, p, q1).unwrap(), &res, Some(&cubes)).unwrap();
            let b = f_norm(f, &SpaceSpec::classical(0.5, p, q1 + dq).unwrap(), &res, Some(&cubes)).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bmo_is_dominated_by_xw(seed in 0u64..1000, offset in -1.0..1.0f64) {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let cubes = DyadicCubeSet::new(&grid).unwrap();
        let cutoffs = AnnulusCutoffs::new(BumpProfile::Mollifier);
        let f = ensemble(&grid, seed, 4, 1)[0].map(|z| z + offset);
        let b = bmo_norm(&f, &cubes).unwrap();
        let x = xw_norm(&f, &AdmissibleWeight::constant(), &cutoffs, 5, &cubes).unwrap();
        prop_assert!(b <= x + 1e-8, "bmo {} xw {}", b, x);
        // A decreasing weight costs at most its value at the finest scale.
        let w = AdmissibleWeight::prototype(1.0, 0.0).unwrap();
        let x = xw_norm(&f, &w, &cutoffs, 5, &cubes).unwrap();
        prop_assert!(b <= w.at_level(5) * x + 1e-8, "bmo {} xw {}", b, x);
    }

    #[test]
    fn bilinear_is_bilinear_and_reduces_to_product(seed in 0u64..1000, a in -2.0..2.0f64) {
        let grid = Grid::new(1, 16, 4.0).unwrap();
        let m = ensemble(&grid, seed, 2, 3);
        let sigma = BilinearSymbol::builtin("modulated", grid.length()).unwrap();
        let c = Complex64::new(a, 1.0);
        let left = apply_bilinear(&sigma, &m[0].axpy(c, &m[1]).unwrap(), &m[2]).unwrap();
        let split = apply_bilinear(&sigma, &m[0], &m[2]).unwrap()
            .axpy(c, &apply_bilinear(&sigma, &m[1], &m[2]).unwrap()).unwrap();
        prop_assert!(left.sub(&split).unwrap().max_abs() <= 1e-12 * left.max_abs().max(1.0) * 10.0);
        let one = apply_bilinear_direct(&BilinearSymbol::one(), &m[0], &m[1]).unwrap();
        let fg = pointwise_product(&m[0], &m[1]).unwrap();
        prop_assert!(one.sub(&fg).unwrap().max_abs() <= 1e-10 * fg.max_abs().max(1.0));
    }

    #[test]
    fn paraproduct_pieces_reconstruct(j in 3u32..7, name in prop::sample::select(vec!["one", "bracket", "inverse-bracket"])) {
        let grid = Grid::new(1, 1024, 16.0).unwrap();
        let res = ResolutionOfUnity::for_grid(BumpProfile::Mollifier, j, &grid).unwrap();
        let sigma = BilinearSymbol::builtin(name, grid.length()).unwrap();
        let d = split_paraproduct(&sigma, &res);
        prop_assert!(d.reconstruction_residual(&grid, &[vec![0.0]]) <= 1e-10);
    }

    #[test]
    fn propagator_is_unitary(v in samples(32), s in 0.5..3.0f64, t in -10.0..10.0f64) {
        let f = GridFunction::new(grid_1d(), v).unwrap();
        let g = propagator(s, t, &f).unwrap();
        prop_assert!(rel(lp_norm(&g, 2.0), lp_norm(&f, 2.0)) <= 1e-12);
    }

    #[test]
    fn log_symbol_round_trip(v in samples(64)) {
        let f = GridFunction::new(grid_2d(), v).unwrap();
        let down = apply_multiplier(|xi: &[f64]| Complex64::new(1.0 / log_symbol(magnitude(xi)), 0.0), 1.0, &f).unwrap();
        let up = apply_multiplier(|xi: &[f64]| Complex64::new(log_symbol(magnitude(xi)), 0.0), 1.0, &down).unwrap();
        prop_assert!(up.sub(&f).unwrap().max_abs() <= 1e-12 * f.max_abs().max(1.0) * 10.0);
    }

    #[test]
    fn lpgf_round_trip_is_bitwise(v in samples(64)) {
        let f = GridFunction::new(grid_2d(), v).unwrap();
        let g = decode_lpgf(&encode_lpgf(&f)).unwrap();
        prop_assert_eq!(g.grid(), f.grid());
        for (a, b) in g.samples().iter().zip(f.samples()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn gate_arithmetic_is_exact(a in 1i64..50, b in 1i64..50) {
        let p = Exponent::ratio(a, b);
        prop_assert_eq!(p.p_over_p_plus_one(), Exponent::ratio(a, a + b));
        prop_assert_eq!(p.p_over_p_plus_one().recip() * num_rational::Ratio::from_integer(a), num_rational::Ratio::new(a + b, 1));
    }

    #[test]
    fn ensembles_are_reproducible(seed in any::<u64>()) {
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let a = ensemble(&grid, seed, 3, 2);
        let b = ensemble(&grid, seed, 3, 2);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x.samples() == y.samples());
        }
    }
}
