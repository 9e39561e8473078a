//! Characteristic exponents of the supported Lévy families and the
//! characteristic function of the process stopped at an independent
//! exponential or geometric time.
//!
//! Convention: `E exp(i w X_1) = exp(psi(w))`.

mod bessel;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub use bessel::{bessel_k, ln_bessel_k};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One gamma component `weight * Gamma(shape, rate)` of a jump law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerm {
    pub weight: f64,
    pub shape: u32,
    pub rate: f64,
}

impl GammaTerm {
    pub fn new(weight: f64, shape: u32, rate: f64) -> Result<Self> {
        let term = Self { weight, shape, rate };
        term.validate()?;
        Ok(term)
    }

    fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma weight {} must be positive", self.weight)));
        }
        if self.shape == 0 {
            return Err(Error::InvalidParameter("gamma shape must be at least 1".into()));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma rate {} must be positive", self.rate)));
        }
        Ok(())
    }

    /// Gamma density on `x >= 0`.
    fn density(&self, x: f64) -> f64 {
        let j = self.shape as i32;
        let mut log = j as f64 * self.rate.ln() - self.rate * x;
        if j > 1 {
            log += (j - 1) as f64 * x.ln() - ln_factorial(self.shape - 1);
        }
        self.weight * log.exp()
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Compound Poisson jumps with a two-sided mixed-gamma law.
///
/// Upward jumps have density `sum c (a^j x^(j-1) / (j-1)!) e^(-a x)` on
/// `x > 0`; downward jumps mirror it on `x < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedGammaJumps {
    pub positive: Vec<GammaTerm>,
    pub negative: Vec<GammaTerm>,
    pub intensity: f64,
}

impl MixedGammaJumps {
    pub fn new(positive: Vec<GammaTerm>, negative: Vec<GammaTerm>, intensity: f64) -> Result<Self> {
        let jumps = Self { positive, negative, intensity };
        jumps.validate()?;
        Ok(jumps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity > 0.0 && self.intensity.is_finite()) {
            return Err(Error::InvalidParameter(format!("jump intensity {} must be positive", self.intensity)));
        }
        if self.positive.is_empty() && self.negative.is_empty() {
            return Err(Error::InvalidParameter("jump law has no components".into()));
        }
        self.positive.iter().chain(&self.negative).try_for_each(GammaTerm::validate)
    }

    /// Total mass of the mixture weights.
    pub fn total_weight(&self) -> f64 {
        self.positive.iter().chain(&self.negative).map(|t| t.weight).sum()
    }

    /// Fourier transform of the (unnormalized) jump law.
    pub fn jump_cf(&self, w: Complex64) -> Complex64 {
        let iw = I * w;
        let up: Complex64 = self
            .positive
            .iter()
            .map(|t| (Complex64::new(t.rate, 0.0) / (t.rate - iw)).powu(t.shape) * t.weight)
            .sum();
        let down: Complex64 = self
            .negative
            .iter()
            .map(|t| (Complex64::new(t.rate, 0.0) / (t.rate + iw)).powu(t.shape) * t.weight)
            .sum();
        up + down
    }
}

/// Density of the mixed-gamma jump law at `x`.
pub fn mixed_gamma_density(params: &MixedGammaJumps, x: f64) -> f64 {
    if x >= 0.0 {
        params.positive.iter().map(|t| t.density(x)).sum()
    } else {
        params.negative.iter().map(|t| t.density(-x)).sum()
    }
}

/// Parameters of the experimental stable-like family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub index: f64,
    pub scale: f64,
}

/// Jump measure `e^(a x) cosech^2(x/2) dx` with tilt `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosechParams {
    pub alpha: f64,
}

impl CosechParams {
    /// `gamma = pi a cot(pi a)`, equal to 1 at `a = 0`.
    pub fn gamma(&self) -> f64 {
        let x = PI * self.alpha;
        if x.abs() < 1e-4 {
            let x2 = x * x;
            1.0 - x2 / 3.0 - x2 * x2 / 45.0
        } else {
            x / x.tan()
        }
    }

    /// `rho = 4 pi^2 a + 4 gamma (gamma - 1) / a - mu`, equal to `-mu` at `a = 0`.
    pub fn rho(&self, drift: f64) -> f64 {
        let a = self.alpha;
        let g = self.gamma();
        let ratio = if (PI * a).abs() < 1e-4 {
            // (gamma - 1) / a
            -PI * PI * a / 3.0 - PI.powi(4) * a.powi(3) / 45.0
        } else {
            (g - 1.0) / a
        };
        4.0 * PI * PI * a + 4.0 * g * ratio - drift
    }
}

/// Generalized hyperbolic parameters; the location is the model drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    BrownianDrift,
    CompoundPoisson(MixedGammaJumps),
    /// Uses `psi(w) = 1 / (i mu w - s^a |w|^a)` with `psi(0) = 0`. Not a
    /// standard stable exponent; kept for experimentation only.
    SymmetricStable(StableParams),
    CosechSquared(CosechParams),
    GeneralizedHyperbolic(GhParams),
}

/// A Lévy process given by drift, Gaussian volatility and a jump family.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    drift: f64,
    volatility: f64,
    family: Family,
}

impl LevyModel {
    pub fn new(drift: f64, volatility: f64, family: Family) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::InvalidParameter("drift must be finite".into()));
        }
        if !(volatility >= 0.0 && volatility.is_finite()) {
            return Err(Error::InvalidParameter(format!("volatility {volatility} must be nonnegative")));
        }
        match &family {
            Family::BrownianDrift => {}
            Family::CompoundPoisson(j) => j.validate()?,
            Family::SymmetricStable(s) => {
                if !(s.index > 0.0 && s.index <= 2.0) {
                    return Err(Error::InvalidParameter(format!("stable index {} outside (0, 2]", s.index)));
                }
                if !(s.scale > 0.0 && s.scale.is_finite()) {
                    return Err(Error::InvalidParameter("stable scale must be positive".into()));
                }
                if volatility != 0.0 {
                    return Err(Error::InvalidParameter("stable family takes no Gaussian part".into()));
                }
            }
            Family::CosechSquared(c) => {
                if !(c.alpha.abs() < 1.0) {
                    return Err(Error::InvalidParameter(format!("cosech tilt {} outside (-1, 1)", c.alpha)));
                }
            }
            Family::GeneralizedHyperbolic(g) => {
                if !g.lambda.is_finite() {
                    return Err(Error::InvalidParameter("GH lambda must be finite".into()));
                }
                if !(g.alpha > 0.0 && g.alpha.is_finite()) {
                    return Err(Error::InvalidParameter("GH alpha must be positive".into()));
                }
                if !(g.beta.abs() < g.alpha) {
                    return Err(Error::InvalidParameter("GH beta must satisfy |beta| < alpha".into()));
                }
                if !(g.delta > 0.0 && g.delta.is_finite()) {
                    return Err(Error::InvalidParameter("GH delta must be positive".into()));
                }
            }
        }
        Ok(Self { drift, volatility, family })
    }

    pub fn brownian(drift: f64, volatility: f64) -> Result<Self> {
        Self::new(drift, volatility, Family::BrownianDrift)
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn volatility(&self) -> f64 {
        self.volatility
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Short family name used in reports.
    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::BrownianDrift => "brownian",
            Family::CompoundPoisson(_) => "compound_poisson",
            Family::SymmetricStable(_) => "symmetric_stable",
            Family::CosechSquared(_) => "cosech_squared",
            Family::GeneralizedHyperbolic(_) => "generalized_hyperbolic",
        }
    }
}

/// Kind of the independent random horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingKind {
    /// Exponential with rate `q`.
    Exponential,
    /// `P(tau = n) = (1 - q) q^n`, `n = 0, 1, ...`
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingTime {
    kind: StoppingKind,
    q: f64,
}

impl StoppingTime {
    pub fn exponential(q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponential rate {q} must be positive")));
        }
        Ok(Self { kind: StoppingKind::Exponential, q })
    }

    pub fn geometric(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("geometric parameter {q} outside (0, 1)")));
        }
        Ok(Self { kind: StoppingKind::Geometric, q })
    }

    pub fn kind(&self) -> StoppingKind {
        self.kind
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Characteristic exponent `psi(w)`.
pub fn psi(model: &LevyModel, w: Complex64) -> Result<Complex64> {
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain { what: "psi", at: w });
    }
    if w == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mu = model.drift;
    let s2 = model.volatility * model.volatility;
    let gaussian = I * mu * w - w * w * (0.5 * s2);
    let value = match &model.family {
        Family::BrownianDrift => gaussian,
        Family::CompoundPoisson(j) => gaussian + (j.jump_cf(w) - j.total_weight()) * j.intensity,
        Family::SymmetricStable(s) => {
            let modulus = (w * w).powf(0.5 * s.index);
            (I * mu * w - modulus * s.scale.powf(s.index)).inv()
        }
        Family::CosechSquared(c) => {
            let g = c.gamma();
            let rho = c.rho(mu);
            let z = (w - I * c.alpha) * PI;
            -w * w * (0.5 * s2) - I * rho * w - z_coth_z(z)? * 4.0 + 4.0 * g
        }
        Family::GeneralizedHyperbolic(g) => gaussian - I * mu * w + gh_log_cf(g, mu, w)?,
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Domain { what: "psi", at: w });
    }
    Ok(value)
}

/// `z coth z`, with the removable singularity at 0 handled by series.
fn z_coth_z(z: Complex64) -> Result<Complex64> {
    if z.norm() < 1e-4 {
        return Ok(1.0 + z * z / 3.0);
    }
    let (zz, sign) = if z.re >= 0.0 { (z, 1.0) } else { (-z, -1.0) };
    let e = (-2.0 * zz).exp();
    let den = 1.0 - e;
    if den.norm() == 0.0 {
        return Err(Error::Domain { what: "coth", at: z });
    }
    Ok(z * sign * (1.0 + e) / den)
}

fn gh_log_cf(g: &GhParams, mu: f64, w: Complex64) -> Result<Complex64> {
    let a2 = g.alpha * g.alpha;
    let b = Complex64::new(g.beta, 0.0) + I * w;
    let s2 = a2 - b * b;
    if s2.im == 0.0 && s2.re <= 0.0 {
        return Err(Error::Domain { what: "generalized hyperbolic exponent", at: w });
    }
    let s0 = (a2 - g.beta * g.beta).sqrt();
    let s = s2.sqrt();
    let ratio = Complex64::new((a2 - g.beta * g.beta).ln(), 0.0) - s2.ln();
    Ok(I * mu * w + ratio * (0.5 * g.lambda) + ln_bessel_k(g.lambda, s * g.delta)?
        - ln_bessel_k(g.lambda, Complex64::new(s0 * g.delta, 0.0))?)
}

/// Denominator of the stopped characteristic function: `q - psi(w)` for
/// exponential stopping, `1 - q exp(psi(w))` for geometric stopping. Its
/// zeros are the poles of `h`.
pub fn denominator(model: &LevyModel, stop: &StoppingTime, w: Complex64) -> Result<Complex64> {
    let p = psi(model, w)?;
    Ok(match stop.kind {
        StoppingKind::Exponential => stop.q - p,
        StoppingKind::Geometric => 1.0 - p.exp() * stop.q,
    })
}

/// Characteristic function of `X` at the stopping time.
pub fn stopped_cf(model: &LevyModel, stop: &StoppingTime, w: Complex64) -> Result<Complex64> {
    if w == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let p = psi(model, w)?;
    let (d, scale) = match stop.kind {
        StoppingKind::Exponential => (stop.q - p, stop.q.max(p.norm())),
        StoppingKind::Geometric => {
            let e = p.exp() * stop.q;
            (1.0 - e, e.norm().max(1.0))
        }
    };
    // cancellation below a few ulps of the operands is a pole
    if d.norm() <= 8.0 * f64::EPSILON * scale {
        return Err(Error::Pole { at: w });
    }
    let numerator = match stop.kind {
        StoppingKind::Exponential => stop.q,
        StoppingKind::Geometric => 1.0 - stop.q,
    };
    Ok(numerator / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cosech_example() -> LevyModel {
        LevyModel::new(2.0, 2.0, Family::CosechSquared(CosechParams { alpha: 0.0 })).unwrap()
    }

    fn gh_example() -> LevyModel {
        let p = GhParams { lambda: -1.0, alpha: 2.0, beta: 1.0, delta: 3.0 };
        LevyModel::new(2.0, 0.0, Family::GeneralizedHyperbolic(p)).unwrap()
    }

    fn jump_example() -> LevyModel {
        let jumps = MixedGammaJumps::new(
            vec![GammaTerm::new(0.3, 1, 2.0).unwrap(), GammaTerm::new(0.2, 2, 3.0).unwrap()],
            vec![GammaTerm::new(0.5, 1, 1.5).unwrap()],
            2.0,
        )
        .unwrap();
        LevyModel::new(0.1, 0.5, Family::CompoundPoisson(jumps)).unwrap()
    }

    fn all_models() -> Vec<LevyModel> {
        vec![
            LevyModel::brownian(0.3, 1.2).unwrap(),
            jump_example(),
            cosech_example(),
            LevyModel::new(-0.5, 1.0, Family::CosechSquared(CosechParams { alpha: 0.3 })).unwrap(),
            gh_example(),
        ]
    }

    #[test]
    fn brownian_exponent() {
        let m = LevyModel::brownian(0.0, 2f64.sqrt()).unwrap();
        let v = psi(&m, c(1.0, 0.0)).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exponent_vanishes_at_origin() {
        for m in all_models() {
            assert_eq!(psi(&m, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        }
        // the formulas themselves, just off the origin
        for m in all_models() {
            assert!(psi(&m, c(1e-9, 0.0)).unwrap().norm() < 1e-7, "{}", m.family_name());
        }
    }

    #[test]
    fn cosech_exponent_formula() {
        let m = cosech_example();
        for w in [0.3, -1.7, 4.0] {
            let got = psi(&m, c(w, 0.0)).unwrap();
            let want = -2.0 * w * w + 4.0 - 4.0 * PI * w / (PI * w).tanh();
            assert!((got.re - want).abs() < 1e-12 && (got.im - 2.0 * w).abs() < 1e-12);
        }
    }

    #[test]
    fn cosech_tilt_constants() {
        let c0 = CosechParams { alpha: 0.0 };
        assert_eq!(c0.gamma(), 1.0);
        assert_eq!(c0.rho(2.0), -2.0);
        // series and closed form agree across the switch
        let a = 1.0001e-4 / PI;
        let b = 0.9999e-4 / PI;
        let (ca, cb) = (CosechParams { alpha: a }, CosechParams { alpha: b });
        assert!((ca.gamma() - cb.gamma()).abs() < 1e-9);
        assert!((ca.rho(0.0) - cb.rho(0.0)).abs() < 1e-6);
    }

    #[test]
    fn hermitian_symmetry() {
        for m in all_models() {
            for w in [0.2, 1.0, 3.5, 12.0] {
                let a = psi(&m, c(w, 0.0)).unwrap();
                let b = psi(&m, c(-w, 0.0)).unwrap();
                assert!((a - b.conj()).norm() < 1e-10 * a.norm().max(1.0), "{}", m.family_name());
            }
        }
    }

    #[test]
    fn stopped_cf_is_bounded_on_the_real_line() {
        let stops = [StoppingTime::exponential(5.0).unwrap(), StoppingTime::geometric(0.7).unwrap()];
        for m in all_models() {
            for stop in &stops {
                for k in 0..10_000 {
                    let w = -100.0 + 200.0 * k as f64 / 9999.0;
                    let h = stopped_cf(&m, stop, c(w, 0.0)).unwrap();
                    assert!(h.norm() <= 1.0 + 1e-12, "{} at {w}: {h}", m.family_name());
                }
            }
        }
    }

    #[test]
    fn brownian_stopped_cf() {
        let m = LevyModel::brownian(0.0, 2f64.sqrt()).unwrap();
        let stop = StoppingTime::exponential(1.0).unwrap();
        for w in [0.0, 0.5, -2.0, 7.0] {
            let h = stopped_cf(&m, &stop, c(w, 0.0)).unwrap();
            assert!((h - c(1.0 / (1.0 + w * w), 0.0)).norm() < 1e-15);
        }
        assert!(matches!(stopped_cf(&m, &stop, c(0.0, 1.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn geometric_stopped_cf() {
        let m = LevyModel::brownian(0.0, 1.0).unwrap();
        let stop = StoppingTime::geometric(0.5).unwrap();
        let h = stopped_cf(&m, &stop, c(1.0, 0.0)).unwrap();
        let e = (-0.5f64).exp();
        assert!((h.re - 0.5 / (1.0 - 0.5 * e)).abs() < 1e-15);
        assert_eq!(stopped_cf(&m, &stop, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn cosech_denominator_vanishes_at_known_poles() {
        let m = cosech_example();
        let stop = StoppingTime::exponential(5.0).unwrap();
        for t in [-0.4781, 0.5658, 1.4921] {
            let d = denominator(&m, &stop, c(0.0, t)).unwrap();
            let scale = denominator(&m, &stop, c(0.0, t + 0.05)).unwrap();
            assert!(d.norm() < 0.02 * scale.norm().max(1.0), "{t}: {d}");
        }
    }

    #[test]
    fn gh_exponent_matches_direct_formula() {
        // exp(psi) against the characteristic function written with K directly
        let m = gh_example();
        for w in [0.4, -1.3, 2.5] {
            let wc = c(w, 0.0);
            let b = c(1.0, 0.0) + I * wc;
            let s = (4.0 - b * b).sqrt();
            let s0 = 3f64.sqrt();
            let cf = (I * 2.0 * wc).exp() * (Complex64::new(3.0, 0.0) / (4.0 - b * b)).powf(-0.5)
                * bessel_k(-1.0, s * 3.0).unwrap()
                / bessel_k(-1.0, c(3.0 * s0, 0.0)).unwrap();
            let got = psi(&m, wc).unwrap().exp();
            assert!((got - cf).norm() < 1e-12, "{w}: {got} vs {cf}");
        }
    }

    #[test]
    fn gh_branch_cut_is_a_domain_error() {
        let m = gh_example();
        assert!(psi(&m, c(0.0, 4.0)).is_err());
        assert!(psi(&m, c(0.0, -2.0)).is_err());
        assert!(psi(&m, c(0.0, 2.0)).is_ok());
    }

    #[test]
    fn exponential_jump_density() {
        let j = MixedGammaJumps::new(vec![GammaTerm::new(1.0, 1, 2.0).unwrap()], vec![], 1.0).unwrap();
        assert_eq!(mixed_gamma_density(&j, 0.0), 2.0);
        assert!((mixed_gamma_density(&j, 1.0) - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(mixed_gamma_density(&j, -1.0), 0.0);
    }

    #[test]
    fn symmetric_jump_density_is_even() {
        let t = GammaTerm::new(0.5, 2, 1.3).unwrap();
        let j = MixedGammaJumps::new(vec![t], vec![t], 1.0).unwrap();
        for x in [0.1, 0.7, 3.0, 10.0] {
            assert_eq!(mixed_gamma_density(&j, x), mixed_gamma_density(&j, -x));
        }
    }

    #[test]
    fn jump_density_integrates_to_one() {
        let Family::CompoundPoisson(j) = jump_example().family().clone() else { unreachable!() };
        let n = 200_000;
        let h = 100.0 / n as f64;
        // midpoint rule, avoiding the jump at 0
        let total: f64 = (0..n).map(|k| mixed_gamma_density(&j, -50.0 + (k as f64 + 0.5) * h) * h).sum();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn invalid_parameters() {
        assert!(LevyModel::brownian(0.0, -1.0).is_err());
        assert!(GammaTerm::new(0.0, 1, 1.0).is_err());
        assert!(GammaTerm::new(1.0, 0, 1.0).is_err());
        assert!(StoppingTime::geometric(1.0).is_err());
        assert!(StoppingTime::exponential(0.0).is_err());
        assert!(LevyModel::new(0.0, 0.0, Family::CosechSquared(CosechParams { alpha: 1.0 })).is_err());
        let bad = GhParams { lambda: 1.0, alpha: 1.0, beta: 1.0, delta: 1.0 };
        assert!(LevyModel::new(0.0, 0.0, Family::GeneralizedHyperbolic(bad)).is_err());
        let stable = StableParams { index: 1.5, scale: 1.0 };
        assert!(LevyModel::new(0.0, 1.0, Family::SymmetricStable(stable)).is_err());
        assert!(LevyModel::new(0.0, 0.0, Family::SymmetricStable(stable)).is_ok());
    }
}
