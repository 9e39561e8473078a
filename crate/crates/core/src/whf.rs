//! Wiener–Hopf factors of a rational approximant and the densities of the
//! supremum and infimum they characterize.
//!
//! A factor is stored as `scale * prod (1 - w/zeta)^m / prod (1 - w/p)^m`
//! with roots in the `w` plane, so `scale` is its value at the origin. The
//! upper factor (supremum, support `[0, inf)`) has all roots in the lower
//! half-plane; the lower factor (infimum) mirrors it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::levy::{StoppingKind, StoppingTime};
use crate::poly;
use crate::rational::{evaluate, Form, RationalApproximant};
use crate::transforms::{NormOrder, Side};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A root in the `w` plane with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub at: Complex64,
    pub multiplicity: u32,
}

impl Root {
    pub fn simple(at: Complex64) -> Self {
        Self { at, multiplicity: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneFactor {
    side: Side,
    zeros: Vec<Root>,
    poles: Vec<Root>,
    scale: f64,
}

impl HalfPlaneFactor {
    /// Checks that every root lies strictly in the half-plane opposite to
    /// `side`, so the factor and its reciprocal are analytic on `side`.
    pub fn new(side: Side, zeros: Vec<Root>, poles: Vec<Root>, scale: f64) -> Result<Self> {
        if !scale.is_finite() {
            return Err(Error::InvalidParameter("factor scale must be finite".into()));
        }
        for r in zeros.iter().chain(&poles) {
            let ok = match side {
                Side::Upper => r.at.im < 0.0,
                Side::Lower => r.at.im > 0.0,
            };
            if !ok || r.multiplicity == 0 {
                return Err(Error::Invariant(format!("root {} not admissible for the {side:?} factor", r.at)));
            }
        }
        Ok(Self { side, zeros, poles, scale })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn zeros(&self) -> &[Root] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Root] {
        &self.poles
    }

    /// Value at the origin.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        let num: Complex64 = self.zeros.iter().map(|r| (1.0 - w / r.at).powu(r.multiplicity)).product();
        let den: Complex64 = self.poles.iter().map(|r| (1.0 - w / r.at).powu(r.multiplicity)).product();
        num / den * self.scale
    }

    fn degree(roots: &[Root]) -> u32 {
        roots.iter().map(|r| r.multiplicity).sum()
    }

    fn rescaled(&self, scale: f64) -> Self {
        Self { scale, ..self.clone() }
    }
}

/// Roots of the base polynomial of a basis term in `z = i w`, together with
/// the sign of its leading coefficient.
fn term_roots(form: Form, rate: f64, oscillation: f64) -> (Vec<Complex64>, f64) {
    let (b, a) = (rate, oscillation);
    match form {
        Form::R1 => (vec![Complex64::new(-b, 0.0)], 1.0),
        Form::R2 => (vec![Complex64::new(b, 0.0)], -1.0),
        Form::R3 => (vec![Complex64::new(-b, 0.0), Complex64::new(-b, a), Complex64::new(-b, -a)], 1.0),
        Form::R4 => (vec![Complex64::new(b, 0.0), Complex64::new(b, a), Complex64::new(b, -a)], -1.0),
    }
}

fn same_root(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1.0)
}

/// Splits `r = f_plus * f_minus` by assigning the zeros and poles of `r` in
/// the lower half-plane to `f_plus` and those in the upper half-plane to
/// `f_minus`. The constant `r(0)` is split as `sqrt|r(0)|` on the upper and
/// `sign(r(0)) sqrt|r(0)|` on the lower factor.
pub fn carlemann_split(r: &RationalApproximant) -> Result<(HalfPlaneFactor, HalfPlaneFactor)> {
    if r.terms().is_empty() {
        return Err(Error::FactorizationImpossible("approximant has no rational terms".into()));
    }
    // common denominator over distinct z-roots with their largest multiplicity
    let mut denominator: Vec<(Complex64, u32)> = Vec::new();
    let mut per_term = Vec::with_capacity(r.terms().len());
    for (term, c) in r.terms() {
        let (roots, lead) = term_roots(term.form(), term.rate(), term.oscillation());
        for &root in &roots {
            match denominator.iter_mut().find(|(d, _)| same_root(*d, root)) {
                Some(entry) => entry.1 = entry.1.max(term.power()),
                None => denominator.push((root, term.power())),
            }
        }
        per_term.push((roots, lead.powi(term.power() as i32), term.power(), *c));
    }
    let expand = |skip: &[Complex64], power: u32| -> Vec<Complex64> {
        let mut roots = Vec::new();
        for &(d, m) in &denominator {
            let removed = if skip.iter().any(|s| same_root(*s, d)) { power } else { 0 };
            roots.extend(core::iter::repeat_n(d, (m - removed) as usize));
        }
        poly::from_roots(&roots)
    };
    let mut numerator = expand(&[], 0).iter().map(|v| v * r.a0()).collect::<Vec<_>>();
    for (roots, sign, power, c) in &per_term {
        let part: Vec<Complex64> = expand(roots, *power).iter().map(|v| v * (sign * c)).collect();
        numerator = poly::add(&numerator, &part);
    }
    poly::trim(&mut numerator, 1e-14);
    let mut zeros = poly::roots(&numerator)?;

    let scale_of = |z: Complex64| z.norm().max(1.0);
    for z in &zeros {
        if z.re.abs() <= 1e-10 * scale_of(*z) {
            return Err(Error::FactorizationImpossible(format!("approximant vanishes on the real line at w = {}", -I * z)));
        }
    }
    let mut poles: Vec<(Complex64, u32)> = denominator.clone();
    // cancel coincident zero/pole pairs
    zeros.retain(|z| {
        if let Some(p) = poles.iter_mut().find(|(p, m)| *m > 0 && (p - z).norm() <= 1e-9 * scale_of(*z)) {
            p.1 -= 1;
            false
        } else {
            true
        }
    });
    poles.retain(|(_, m)| *m > 0);

    let c0 = evaluate(r, Complex64::new(0.0, 0.0))?.re;
    if c0 == 0.0 {
        return Err(Error::ZeroAtOrigin);
    }
    let to_w = |z: Complex64| -I * z;
    let collect = |want_positive: bool, simple: &[Complex64], multi: &[(Complex64, u32)]| -> (Vec<Root>, Vec<Root>) {
        let zs = simple.iter().filter(|z| (z.re > 0.0) == want_positive).map(|&z| Root::simple(to_w(z))).collect();
        let ps = multi
            .iter()
            .filter(|(p, _)| (p.re > 0.0) == want_positive)
            .map(|&(p, m)| Root { at: to_w(p), multiplicity: m })
            .collect();
        (zs, ps)
    };
    let (up_zeros, up_poles) = collect(true, &zeros, &poles);
    let (low_zeros, low_poles) = collect(false, &zeros, &poles);
    let root = c0.abs().sqrt();
    Ok((
        HalfPlaneFactor::new(Side::Upper, up_zeros, up_poles, root)?,
        HalfPlaneFactor::new(Side::Lower, low_zeros, low_poles, c0.signum() * root)?,
    ))
}

/// Factors rescaled to equal 1 at the origin, with the applied constants.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFactors {
    pub plus: HalfPlaneFactor,
    pub minus: HalfPlaneFactor,
    pub rescale_plus: f64,
    pub rescale_minus: f64,
}

pub fn normalize_factors(plus: &HalfPlaneFactor, minus: &HalfPlaneFactor) -> Result<NormalizedFactors> {
    if plus.side != Side::Upper || minus.side != Side::Lower {
        return Err(Error::SideMismatch);
    }
    if plus.scale == 0.0 || minus.scale == 0.0 {
        return Err(Error::ZeroAtOrigin);
    }
    Ok(NormalizedFactors {
        plus: plus.rescaled(1.0),
        minus: minus.rescaled(1.0),
        rescale_plus: 1.0 / plus.scale,
        rescale_minus: 1.0 / minus.scale,
    })
}

/// Truncated product factor of a meromorphic exponent with interlacing
/// roots `b_1 < a_1 < b_2 < a_2 < ...` of `q - psi(-i x)` and poles of
/// `psi(-i x)` on the positive axis (or their mirror images for the lower
/// side). The upper factor is `prod (1 - i w / a_n) / (1 - i w / b_n)`,
/// analytic in the upper half-plane; the lower one conjugates `i`.
pub fn meromorphic_factor(alphas: &[f64], betas: &[f64], n: usize, side: Side) -> Result<HalfPlaneFactor> {
    if n == 0 {
        return Err(Error::InvalidParameter("product needs at least one term".into()));
    }
    if alphas.len() < n || betas.len() < n {
        return Err(Error::InvalidParameter(format!("{n} terms requested from {} / {} roots", alphas.len(), betas.len())));
    }
    let mut last = 0.0;
    for k in 0..n {
        if !(betas[k] > last && alphas[k] > betas[k]) {
            return Err(Error::InvalidParameter("roots do not interlace as b1 < a1 < b2 < ...".into()));
        }
        last = alphas[k];
    }
    let sign = match side {
        Side::Upper => -1.0,
        Side::Lower => 1.0,
    };
    // 1 - i w / a vanishes at w = -i a
    let zeros = alphas[..n].iter().map(|&a| Root::simple(Complex64::new(0.0, sign * a))).collect();
    let poles = betas[..n].iter().map(|&b| Root::simple(Complex64::new(0.0, sign * b))).collect();
    HalfPlaneFactor::new(side, zeros, poles, 1.0)
}

/// Which extremum a density describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    /// Supremum, supported on `[0, inf)`.
    Supremum,
    /// Infimum, supported on `(-inf, 0]`.
    Infimum,
}

impl Extremum {
    pub fn of(side: Side) -> Self {
        match side {
            Side::Upper => Extremum::Supremum,
            Side::Lower => Extremum::Infimum,
        }
    }
}

/// `coefficient * y^degree * exp(-rate * y)` at distance `y = |x|` from the
/// origin. Complex terms occur in conjugate pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTerm {
    pub coefficient: Complex64,
    pub rate: Complex64,
    pub degree: u32,
}

impl DensityTerm {
    fn value(&self, y: f64) -> Complex64 {
        self.coefficient * y.powi(self.degree as i32) * (-self.rate * y).exp()
    }

    /// `int_0^inf` of the term.
    fn mass(&self) -> Complex64 {
        self.coefficient * factorial(self.degree) / self.rate.powu(self.degree + 1)
    }

    /// `int_y^inf` of the term.
    fn tail(&self, y: f64) -> Complex64 {
        let ly = self.rate * y;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..=self.degree {
            if k > 0 {
                term *= ly / k as f64;
            }
            sum += term;
        }
        self.mass() * (-ly).exp() * sum
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Law of a one-sided extremum: an atom at 0 plus a mixture of
/// polynomially weighted exponentials on the support.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaDensity {
    side: Extremum,
    atom: f64,
    terms: Vec<DensityTerm>,
}

impl ExtremaDensity {
    pub fn new(side: Extremum, atom: f64, terms: Vec<DensityTerm>) -> Result<Self> {
        if !(0.0..=1.0).contains(&atom) {
            return Err(Error::InvalidParameter(format!("atom {atom} outside [0, 1]")));
        }
        if let Some(t) = terms.iter().find(|t| !(t.rate.re > 0.0)) {
            return Err(Error::InvalidParameter(format!("rate {} must have positive real part", t.rate)));
        }
        Ok(Self { side, atom, terms })
    }

    pub fn side(&self) -> Extremum {
        self.side
    }

    pub fn atom(&self) -> f64 {
        self.atom
    }

    pub fn terms(&self) -> &[DensityTerm] {
        &self.terms
    }

    fn distance(&self, x: f64) -> Option<f64> {
        match self.side {
            Extremum::Supremum if x >= 0.0 => Some(x),
            Extremum::Infimum if x <= 0.0 => Some(-x),
            _ => None,
        }
    }

    /// Absolutely continuous part of the density at `x`; 0 off the support.
    pub fn density(&self, x: f64) -> f64 {
        match self.distance(x) {
            Some(y) => self.terms.iter().map(|t| t.value(y)).sum::<Complex64>().re,
            None => 0.0,
        }
    }

    /// Total mass of the continuous part.
    pub fn continuous_mass(&self) -> f64 {
        self.terms.iter().map(DensityTerm::mass).sum::<Complex64>().re
    }

    /// `atom + continuous mass`, which equals 1 for a proper law.
    pub fn total_mass(&self) -> f64 {
        self.atom + self.continuous_mass()
    }

    /// `P(|E| > y)` for `y >= 0`, where `E` is the extremum.
    pub fn tail(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 1.0;
        }
        self.terms.iter().map(|t| t.tail(y)).sum::<Complex64>().re
    }

    /// `P(E <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.side {
            Extremum::Supremum => {
                if x < 0.0 { 0.0 } else { 1.0 - self.tail(x) }
            }
            Extremum::Infimum => {
                if x >= 0.0 { 1.0 } else { self.tail(-x) }
            }
        }
    }

    /// Smallest real part among the rates; sets the plotting window.
    pub fn min_rate(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.rate.re).min_by(f64::total_cmp)
    }
}

/// Analytic inverse Fourier transform of a normalized factor.
///
/// In `z = i w` (mirrored to `-z` for the lower factor) the factor is a
/// rational function `F` with poles `p` in `Re z > 0`, and
/// `F(z) = atom + sum_p sum_k a_{p,k} / (p - z)^k`, where each
/// `1/(p - z)^k` is the transform of `y^(k-1) e^(-p y) / (k-1)!`.
pub fn density_from_factor(factor: &HalfPlaneFactor) -> Result<ExtremaDensity> {
    if (factor.scale - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { value: factor.scale });
    }
    let (num_deg, den_deg) = (HalfPlaneFactor::degree(&factor.zeros), HalfPlaneFactor::degree(&factor.poles));
    if num_deg > den_deg {
        return Err(Error::NotPositiveDefinite("factor grows at infinity".into()));
    }
    // roots in the variable z' = +-i w with positive real part
    let orient = match factor.side {
        Side::Upper => I,
        Side::Lower => -I,
    };
    let zeros: Vec<(Complex64, u32)> = factor.zeros.iter().map(|r| (orient * r.at, r.multiplicity)).collect();
    let poles: Vec<(Complex64, u32)> = factor.poles.iter().map(|r| (orient * r.at, r.multiplicity)).collect();

    let mut atom = 0.0;
    if num_deg == den_deg {
        let ratio = poles.iter().map(|&(p, m)| p.powu(m)).product::<Complex64>()
            / zeros.iter().map(|&(z, m)| z.powu(m)).product::<Complex64>();
        atom = ratio.re;
        if !(-1e-10..=1.0 + 1e-10).contains(&atom) {
            return Err(Error::NotPositiveDefinite(format!("atom {atom} outside [0, 1]")));
        }
        if atom < 1e-9 {
            atom = 0.0;
        }
    }

    let mut terms = Vec::new();
    for (idx, &(p, m)) in poles.iter().enumerate() {
        // Taylor coefficients of G(w) = (p - z)^m F(z), z = p - w, up to w^(m-1)
        let order = m as usize;
        let mut series = vec![Complex64::new(0.0, 0.0); order];
        series[0] = p.powu(m);
        for &(zeta, mz) in &zeros {
            // 1 - (p - w)/zeta = (1 - p/zeta) + w/zeta
            for _ in 0..mz {
                series = series_mul_linear(&series, 1.0 - p / zeta, zeta.inv());
            }
        }
        for (jdx, &(q, mq)) in poles.iter().enumerate() {
            if jdx == idx {
                continue;
            }
            for _ in 0..mq {
                series = series_div_linear(&series, 1.0 - p / q, q.inv())?;
            }
        }
        for k in 1..=m {
            // a_{p,k} is the coefficient of w^(m-k)
            let a = series[(m - k) as usize];
            terms.push(DensityTerm { coefficient: a / factorial(k - 1), rate: p, degree: k - 1 });
        }
    }
    let density = ExtremaDensity::new(Extremum::of(factor.side), atom.min(1.0), terms)?;
    let total = density.total_mass();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Invariant(format!("density mass {total} differs from 1")));
    }
    Ok(density)
}

fn series_mul_linear(s: &[Complex64], a: Complex64, b: Complex64) -> Vec<Complex64> {
    (0..s.len()).map(|k| s[k] * a + if k > 0 { s[k - 1] * b } else { Complex64::new(0.0, 0.0) }).collect()
}

fn series_div_linear(s: &[Complex64], a: Complex64, b: Complex64) -> Result<Vec<Complex64>> {
    if a.norm() == 0.0 {
        return Err(Error::Invariant("repeated pole not merged".into()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); s.len()];
    for k in 0..s.len() {
        let prev = if k > 0 { out[k - 1] * b } else { Complex64::new(0.0, 0.0) };
        out[k] = (s[k] - prev) / a;
    }
    Ok(out)
}

/// `(1/2) tan(pi/2p) d^2 + (tan(pi/2p) + 1/2) d`.
pub fn error_bound_factorization(delta: f64, order: NormOrder) -> f64 {
    let t = (PI / (2.0 * order.p())).tan();
    0.5 * t * delta * delta + (t + 0.5) * delta
}

/// `d^2 / (q^2 sqrt(8 pi)) + 3 d / (2 q)` for exponential stopping; the two
/// terms carry extra factors `(1-q)^2` and `(1-q)` for geometric stopping.
pub fn error_bound_compound_poisson(nu_delta: f64, stop: &StoppingTime) -> f64 {
    let q = stop.q();
    let (w2, w1) = match stop.kind() {
        StoppingKind::Exponential => (1.0, 1.0),
        StoppingKind::Geometric => ((1.0 - q) * (1.0 - q), 1.0 - q),
    };
    w2 * nu_delta * nu_delta / (q * q * (8.0 * PI).sqrt()) + w1 * 3.0 * nu_delta / (2.0 * q)
}
