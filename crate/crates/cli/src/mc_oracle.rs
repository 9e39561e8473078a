//! Monte Carlo extrema of a Lévy path up to an independent stopping time,
//! used as an independent check on the analytic densities.
//!
//! Each path draws from its own ChaCha8 stream selected by the path index,
//! so the samples do not depend on the number of threads.

use levy_whf::levy::{Family, GammaTerm, MixedGammaJumps};
use levy_whf::{ExtremaDensity, Extremum, LevyModel, StoppingKind, StoppingTime};
use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Geometric, Poisson, StandardNormal};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Exponential stopping times are capped at this horizon.
    pub horizon: f64,
    /// Sample the maximum and minimum of the Brownian bridge between grid
    /// points instead of using the grid values only.
    pub bridge: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { paths: 100_000, dt: 1e-3, seed: 20_240_611, horizon: 1e3, bridge: false }
    }
}

impl SimConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.paths == 0 {
            return Err("paths must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(format!("time step {} must be positive", self.dt));
        }
        if !(self.horizon > 0.0) {
            return Err(format!("horizon {} must be positive", self.horizon));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{0} paths cannot be simulated exactly")]
    Unsupported(&'static str),
    #[error("invalid simulation settings: {0}")]
    Config(String),
    #[error("no samples")]
    Empty,
    #[error("sample {0} lies outside the support of the density")]
    SideMismatch(f64),
}

/// Supremum and infimum of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub sup: f64,
    pub inf: f64,
}

struct Jumps {
    rate: f64,
    components: Vec<(f64, f64, Gamma<f64>)>,
    total: f64,
}

impl Jumps {
    fn new(j: &MixedGammaJumps) -> Self {
        let mut components = Vec::new();
        let mut add = |terms: &[GammaTerm], sign: f64| {
            for t in terms {
                components.push((t.weight, sign, Gamma::new(t.shape as f64, 1.0 / t.rate).expect("validated gamma term")));
            }
        };
        add(&j.positive, 1.0);
        add(&j.negative, -1.0);
        let total = j.total_weight();
        Self { rate: j.intensity * total, components, total }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut pick = rng.random::<f64>() * self.total;
        for (w, sign, g) in &self.components {
            if pick < *w {
                return sign * g.sample(rng);
            }
            pick -= w;
        }
        let (_, sign, g) = self.components.last().expect("nonempty mixture");
        sign * g.sample(rng)
    }
}

struct Path<'a> {
    drift: f64,
    vol: f64,
    jumps: Option<&'a Jumps>,
    bridge: bool,
}

impl Path<'_> {
    /// Diffusive move over `h`, updating the running extrema.
    fn diffuse(&self, x: &mut f64, h: f64, e: &mut Extrema, rng: &mut ChaCha8Rng) {
        if h <= 0.0 {
            return;
        }
        let z: f64 = StandardNormal.sample(rng);
        let a = *x;
        let b = a + self.drift * h + self.vol * h.sqrt() * z;
        if self.bridge && self.vol > 0.0 {
            let spread = |u: f64| ((b - a).powi(2) - 2.0 * self.vol * self.vol * h * (1.0 - u).ln()).sqrt();
            let top = 0.5 * (a + b + spread(rng.random()));
            let bottom = 0.5 * (a + b - spread(rng.random()));
            e.sup = e.sup.max(top);
            e.inf = e.inf.min(bottom);
        }
        *x = b;
        e.sup = e.sup.max(b);
        e.inf = e.inf.min(b);
    }

    /// Continuous-time path on `[0, t]`: Brownian steps of at most `dt`,
    /// jumps at exact Poisson epochs.
    fn run(&self, t: f64, dt: f64, rng: &mut ChaCha8Rng) -> Extrema {
        let mut e = Extrema { sup: 0.0, inf: 0.0 };
        let mut x = 0.0;
        let mut now = 0.0;
        let arrivals = self.jumps.filter(|j| j.rate > 0.0).map(|j| Exp::new(j.rate).expect("positive jump rate"));
        let mut next_jump = arrivals.as_ref().map_or(f64::INFINITY, |a| a.sample(rng));
        while now < t {
            let step_end = (now + dt).min(t);
            if next_jump < step_end {
                self.diffuse(&mut x, next_jump - now, &mut e, rng);
                x += self.jumps.expect("jump epochs need jumps").draw(rng);
                e.sup = e.sup.max(x);
                e.inf = e.inf.min(x);
                now = next_jump;
                next_jump += arrivals.as_ref().map_or(f64::INFINITY, |a| a.sample(rng));
            } else {
                self.diffuse(&mut x, step_end - now, &mut e, rng);
                now = step_end;
            }
        }
        e
    }

    /// Exact increment over one unit of time.
    fn unit_increment(&self, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let mut x = self.drift + self.vol * z;
        if let Some(j) = self.jumps.filter(|j| j.rate > 0.0) {
            let count = Poisson::new(j.rate).expect("positive jump rate").sample(rng) as u64;
            for _ in 0..count {
                x += j.draw(rng);
            }
        }
        x
    }

    /// Random walk of unit increments observed at times `0..=n`.
    fn walk(&self, n: u64, rng: &mut ChaCha8Rng) -> Extrema {
        let mut e = Extrema { sup: 0.0, inf: 0.0 };
        let mut x = 0.0;
        for _ in 0..n {
            x += self.unit_increment(rng);
            e.sup = e.sup.max(x);
            e.inf = e.inf.min(x);
        }
        e
    }
}

/// Samples of `(sup, inf)` over `[0, tau]`, one per path.
pub fn simulate_extrema(model: &LevyModel, stop: &StoppingTime, cfg: &SimConfig) -> Result<Vec<Extrema>, SimError> {
    cfg.check().map_err(SimError::Config)?;
    let jumps = match model.family() {
        Family::BrownianDrift => None,
        Family::CompoundPoisson(j) => Some(Jumps::new(j)),
        _ => return Err(SimError::Unsupported(model.family_name())),
    };
    let q = stop.q();
    let mean_time = match stop.kind() {
        StoppingKind::Exponential => 1.0 / q,
        StoppingKind::Geometric => q / (1.0 - q),
    };
    if stop.kind() == StoppingKind::Exponential && cfg.dt > mean_time / 10.0 {
        warn!("time step {} exceeds a tenth of the mean stopping time {mean_time}", cfg.dt);
    }
    let path = Path { drift: model.drift(), vol: model.volatility(), jumps: jumps.as_ref(), bridge: cfg.bridge };
    let capped = std::sync::atomic::AtomicUsize::new(0);
    let samples = (0..cfg.paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            match stop.kind() {
                StoppingKind::Exponential => {
                    let mut t = Exp::new(q).expect("validated rate").sample(&mut rng);
                    if t > cfg.horizon {
                        capped.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        t = cfg.horizon;
                    }
                    path.run(t, cfg.dt, &mut rng)
                }
                StoppingKind::Geometric => {
                    let n = Geometric::new(1.0 - q).expect("validated probability").sample(&mut rng);
                    path.walk(n, &mut rng)
                }
            }
        })
        .collect();
    let capped = capped.into_inner();
    if capped > 0 {
        warn!("{capped} stopping times truncated at the horizon {}", cfg.horizon);
    }
    Ok(samples)
}

/// Kolmogorov–Smirnov distance between one-sided samples and the law of
/// `density`, atom included.
pub fn ks_distance(samples: &[f64], density: &ExtremaDensity) -> Result<f64, SimError> {
    if samples.is_empty() {
        return Err(SimError::Empty);
    }
    let side = density.side();
    if let Some(&bad) = samples.iter().find(|&&x| match side {
        Extremum::Supremum => x < 0.0,
        Extremum::Infimum => x > 0.0,
    }) {
        return Err(SimError::SideMismatch(bad));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let left_limit = |x: f64| {
        if x == 0.0 {
            match side {
                Extremum::Supremum => 0.0,
                Extremum::Infimum => 1.0 - density.atom(),
            }
        } else {
            density.cdf(x)
        }
    };
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let (below, upto) = (i as f64 / n, j as f64 / n);
        worst = worst.max((left_limit(v) - below).abs()).max((density.cdf(v) - upto).abs());
        i = j;
    }
    Ok(worst)
}

/// Exact draws from `density` by inverting its distribution function.
pub fn inverse_cdf_samples(density: &ExtremaDensity, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = 60.0 / density.min_rate().unwrap_or(1.0);
    let sign = match density.side() {
        Extremum::Supremum => 1.0,
        Extremum::Infimum => -1.0,
    };
    // P(|E| <= y) as a function of the distance from 0
    let dist = |y: f64| 1.0 - density.tail(y);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            if u <= density.atom() {
                return 0.0;
            }
            let (mut lo, mut hi) = (0.0, reach);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if dist(mid) < u { lo = mid } else { hi = mid }
            }
            sign * 0.5 * (lo + hi)
        })
        .collect()
}
