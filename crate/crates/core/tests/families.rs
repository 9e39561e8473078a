use levy_whf::levy::{stopped_cf, CosechParams, Family, GammaTerm, GhParams, MixedGammaJumps, StableParams};
use levy_whf::linalg::gram_min_eigenvalue;
use levy_whf::pipeline::{factorize, FixedCoefficients, Options, Stage};
use levy_whf::rational::{evaluate, Class, PoleCount};
use levy_whf::ruin::ruin_curve;
use levy_whf::transforms::Grid;
use levy_whf::whf::error_bound_factorization;
use levy_whf::{ExtremaDensity, Extremum, LevyModel, StoppingTime};
use num_complex::Complex64;

const GRAM_POINTS: [f64; 6] = [-2.5, -1.1, -0.3, 0.4, 1.7, 3.2];

fn jumps() -> MixedGammaJumps {
    MixedGammaJumps::new(
        vec![GammaTerm::new(0.6, 1, 2.0).unwrap(), GammaTerm::new(0.4, 2, 3.0).unwrap()],
        vec![GammaTerm::new(1.0, 1, 1.5).unwrap()],
        1.0,
    )
    .unwrap()
}

fn cases() -> Vec<(&'static str, LevyModel, StoppingTime, Options)> {
    let grid = Grid::new(64.0, 1 << 14).unwrap();
    let cm = |n| Options { poles: PoleCount::Smallest(n), class: Class::CompletelyMonotone, grid, ..Options::default() };
    let full = |n| Options { poles: PoleCount::Smallest(n), class: Class::Full, grid, ..Options::default() };
    let exp = |q| StoppingTime::exponential(q).unwrap();
    let geo = |q| StoppingTime::geometric(q).unwrap();
    let cosech = |mu, s, a| LevyModel::new(mu, s, Family::CosechSquared(CosechParams { alpha: a })).unwrap();
    let gh = LevyModel::new(
        2.0,
        0.0,
        Family::GeneralizedHyperbolic(GhParams { lambda: -1.0, alpha: 2.0, beta: 1.0, delta: 3.0 }),
    )
    .unwrap();
    vec![
        ("brownian", LevyModel::brownian(0.3, 1.0).unwrap(), exp(2.0), cm(2)),
        ("brownian geometric", LevyModel::brownian(0.3, 1.0).unwrap(), geo(0.5), full(6)),
        ("compound poisson", LevyModel::new(0.1, 0.5, Family::CompoundPoisson(jumps())).unwrap(), exp(5.0), cm(4)),
        ("compound poisson full", LevyModel::new(0.1, 0.5, Family::CompoundPoisson(jumps())).unwrap(), exp(5.0), full(6)),
        ("pure jump geometric", LevyModel::new(0.1, 0.0, Family::CompoundPoisson(jumps())).unwrap(), geo(0.5), cm(4)),
        ("cosech", cosech(2.0, 2.0, 0.0), exp(5.0), full(6)),
        ("tilted cosech", cosech(0.5, 1.0, 0.3), exp(5.0), cm(4)),
        ("generalized hyperbolic", gh, exp(5.0), cm(3)),
    ]
}

fn support_scan(d: &ExtremaDensity) -> impl Iterator<Item = f64> + '_ {
    let reach = 10.0 / d.min_rate().unwrap_or(1.0);
    let sign = if d.side() == Extremum::Supremum { 1.0 } else { -1.0 };
    (0..1000).map(move |k| sign * reach * k as f64 / 999.0)
}

#[test]
fn pipeline_invariants_hold_for_every_family() {
    for (name, model, stop, opts) in cases() {
        let f = factorize(&model, &stop, &opts).unwrap_or_else(|e| panic!("{name}: {e}"));
        let r = &f.fit.approximant;

        for k in 0..1000 {
            let w = Complex64::new(-30.0 + 0.06 * k as f64, 0.0);
            let want = evaluate(r, w).unwrap();
            let got = f.raw_plus.eval(w) * f.raw_minus.eval(w);
            assert!((got - want).norm() <= 1e-8 * want.norm(), "{name}: product at {w}");
        }
        for d in [&f.supremum, &f.infimum] {
            assert!((d.total_mass() - 1.0).abs() < 1e-8, "{name}: mass {}", d.total_mass());
            assert!(d.terms().iter().all(|t| t.rate.re > 0.0), "{name}: rates");
            for x in support_scan(d) {
                assert!(d.density(x) >= -1e-10, "{name}: density {} at {x}", d.density(x));
            }
        }
        assert_eq!(f.supremum.side(), Extremum::Supremum);
        assert_eq!(f.infimum.side(), Extremum::Infimum);

        let curve = ruin_curve(&f.infimum, &(0..50).map(|k| 0.2 * k as f64).collect::<Vec<_>>()).unwrap();
        assert!(curve.probabilities.windows(2).all(|w| w[1] <= w[0]), "{name}: ruin");
        assert!((curve.probabilities[0] + f.infimum.atom() - 1.0).abs() < 1e-8, "{name}: ruin at 0");

        let h = |x: f64| stopped_cf(&model, &stop, Complex64::new(x, 0.0)).unwrap();
        assert!(gram_min_eigenvalue(&GRAM_POINTS, h).unwrap() > -1e-10, "{name}: h");
        for factor in [&f.factors.plus, &f.factors.minus] {
            let g = gram_min_eigenvalue(&GRAM_POINTS, |x| factor.eval(Complex64::new(x, 0.0))).unwrap();
            assert!(g > -1e-10, "{name}: factor gram {g}");
        }
    }
}

#[test]
fn stable_family_has_no_poles_to_fit() {
    let model = LevyModel::new(0.5, 0.0, Family::SymmetricStable(StableParams { index: 1.5, scale: 1.0 })).unwrap();
    let stop = StoppingTime::exponential(5.0).unwrap();
    let err = factorize(&model, &stop, &Options::default()).unwrap_err();
    assert_eq!(err.stage, Stage::Poles);
}

fn l2_distance(a: &ExtremaDensity, b: &ExtremaDensity) -> f64 {
    let (n, end) = (40_000, 40.0);
    let dx = end / n as f64;
    let sign = if a.side() == Extremum::Supremum { 1.0 } else { -1.0 };
    let sum: f64 = (0..=n)
        .map(|k| {
            let x = sign * k as f64 * dx;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * (a.density(x) - b.density(x)).powi(2)
        })
        .sum();
    (sum * dx).sqrt()
}

#[test]
fn brownian_density_error_is_within_the_factorization_bound() {
    let model = LevyModel::brownian(0.3, 1.0).unwrap();
    let stop = StoppingTime::exponential(2.0).unwrap();
    let opts = Options { poles: PoleCount::Smallest(2), class: Class::CompletelyMonotone, ..Options::default() };
    let exact = factorize(&model, &stop, &opts).unwrap();
    let coefficients = exact.fit.approximant.coefficients();
    for scale in [(1.1, 0.9), (0.8, 1.05), (1.3, 1.3)] {
        let fixed = FixedCoefficients { a0: 0.0, coefficients: vec![coefficients[0] * scale.0, coefficients[1] * scale.1] };
        let approx = factorize(&model, &stop, &Options { fixed: Some(fixed), ..opts.clone() }).unwrap();
        let bound = error_bound_factorization(approx.fit.error, opts.order);
        for (a, b) in [(&approx.supremum, &exact.supremum), (&approx.infimum, &exact.infimum)] {
            let distance = l2_distance(a, b);
            assert!(distance <= bound, "{scale:?}: {distance} > {bound}");
        }
    }
}
