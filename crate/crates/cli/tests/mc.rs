use levy_extrema::mc_oracle::{inverse_cdf_samples, ks_distance, simulate_extrema, Extrema, SimConfig};
use levy_whf::levy::{CosechParams, Family, GammaTerm, MixedGammaJumps};
use levy_whf::pipeline::{factorize, FixedCoefficients, Options};
use levy_whf::rational::{Class, PoleCount};
use levy_whf::transforms::Grid;
use levy_whf::{Factorization, LevyModel, StoppingTime};

/// 99% Kolmogorov critical value for `n` samples.
fn ks_critical(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

fn ks_pair(samples: &[Extrema], f: &Factorization) -> (f64, f64) {
    let sup: Vec<f64> = samples.iter().map(|e| e.sup).collect();
    let inf: Vec<f64> = samples.iter().map(|e| e.inf).collect();
    (ks_distance(&sup, &f.supremum).unwrap(), ks_distance(&inf, &f.infimum).unwrap())
}

#[test]
fn inverse_cdf_draws_match_their_own_law() {
    let model = LevyModel::new(2.0, 2.0, Family::CosechSquared(CosechParams { alpha: 0.0 })).unwrap();
    let k = 1.0 / 4.5;
    let opts = Options {
        poles: PoleCount::PerSide { upper: 2, lower: 1 },
        class: Class::CompletelyMonotone,
        grid: Grid::new(64.0, 1 << 14).unwrap(),
        fixed: Some(FixedCoefficients { a0: 0.0, coefficients: vec![k, k, k] }),
        ..Options::default()
    };
    let f = factorize(&model, &StoppingTime::exponential(5.0).unwrap(), &opts).unwrap();
    assert!(f.supremum.atom() > 0.2);
    for d in [&f.supremum, &f.infimum] {
        let s = inverse_cdf_samples(d, 100_000, 17);
        let ks = ks_distance(&s, d).unwrap();
        assert!(ks < 0.01, "{:?}: {ks}", d.side());
    }
}

#[test]
fn halving_the_step_stays_within_sampling_noise() {
    let model = LevyModel::brownian(0.5, 1.0).unwrap();
    let stop = StoppingTime::exponential(2.0).unwrap();
    let opts = Options { poles: PoleCount::Smallest(2), class: Class::CompletelyMonotone, ..Options::default() };
    let f = factorize(&model, &stop, &opts).unwrap();
    let paths = 20_000;
    let run = |dt| {
        let cfg = SimConfig { paths, dt, seed: 5, bridge: true, ..SimConfig::default() };
        ks_pair(&simulate_extrema(&model, &stop, &cfg).unwrap(), &f)
    };
    let (coarse, fine) = (run(2e-2), run(1e-2));
    let noise = ks_critical(paths);
    assert!((coarse.0 - fine.0).abs() < 2.0 * noise && (coarse.1 - fine.1).abs() < 2.0 * noise, "{coarse:?} {fine:?}");
    assert!(fine.0 < noise && fine.1 < noise, "{fine:?}");
}

#[test]
fn exponential_jumps_agree_with_simulation() {
    // exponential jump sizes make h rational, so four poles are exact
    let jumps = MixedGammaJumps::new(
        vec![GammaTerm::new(0.7, 1, 2.0).unwrap()],
        vec![GammaTerm::new(0.3, 1, 1.5).unwrap()],
        2.0,
    )
    .unwrap();
    let model = LevyModel::new(-0.2, 0.5, Family::CompoundPoisson(jumps)).unwrap();
    let stop = StoppingTime::exponential(1.0).unwrap();
    let opts = Options { poles: PoleCount::Smallest(4), class: Class::CompletelyMonotone, ..Options::default() };
    let f = factorize(&model, &stop, &opts).unwrap();
    assert!(f.fit.error < 1e-6, "fit error {}", f.fit.error);
    let paths = 20_000;
    let cfg = SimConfig { paths, dt: 1e-2, seed: 11, bridge: true, ..SimConfig::default() };
    let (sup, inf) = ks_pair(&simulate_extrema(&model, &stop, &cfg).unwrap(), &f);
    assert!(sup < ks_critical(paths) && inf < ks_critical(paths), "{sup} {inf}");
}
