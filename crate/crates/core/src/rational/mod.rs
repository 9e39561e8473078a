//! Positive-definite rational approximants of a stopped characteristic
//! function: basis terms, evaluation, pole discovery and nonnegative fitting.
//!
//! All basis terms are rational in `z = i w`:
//!
//! | form | term                                   | poles in `w`         |
//! |------|----------------------------------------|----------------------|
//! | r1   | `1/(z + b)`                            | `i b`                |
//! | r2   | `1/(b - z)`                            | `-i b`               |
//! | r3   | `1/((z + b)((z + b)^2 + a^2))`         | `i b`, `+-a + i b`   |
//! | r4   | `1/((b - z)((b - z)^2 + a^2))`         | `-i b`, `+-a - i b`  |
//!
//! each optionally raised to a power `j >= 1`.

mod poles;

use alloc::format;
use alloc::vec::Vec;

use log::warn;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::transforms::{lp_norm, GridFunction, NormOrder};

pub use poles::{find_poles, PoleCount, PoleSearch};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    R1,
    R2,
    R3,
    R4,
}

/// Approximant class: `Full` admits every form and power, `CompletelyMonotone`
/// only first-order r1/r2 terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Class {
    #[default]
    Full,
    CompletelyMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisTerm {
    form: Form,
    rate: f64,
    oscillation: f64,
    power: u32,
}

impl BasisTerm {
    pub fn new(form: Form, rate: f64, oscillation: f64, power: u32) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("basis rate {rate} must be positive")));
        }
        if power == 0 {
            return Err(Error::InvalidParameter("basis power must be at least 1".into()));
        }
        let oscillation = match form {
            Form::R1 | Form::R2 => 0.0,
            Form::R3 | Form::R4 => {
                if !(oscillation > 0.0 && oscillation.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "basis oscillation {oscillation} must be positive"
                    )));
                }
                oscillation
            }
        };
        Ok(Self { form, rate, oscillation, power })
    }

    pub fn r1(rate: f64) -> Result<Self> {
        Self::new(Form::R1, rate, 0.0, 1)
    }

    pub fn r2(rate: f64) -> Result<Self> {
        Self::new(Form::R2, rate, 0.0, 1)
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn oscillation(&self) -> f64 {
        self.oscillation
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn admissible_in(&self, class: Class) -> bool {
        match class {
            Class::Full => true,
            Class::CompletelyMonotone => matches!(self.form, Form::R1 | Form::R2) && self.power == 1,
        }
    }

    /// Value at `w`.
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        let z = I * w;
        let (b, a2) = (self.rate, self.oscillation * self.oscillation);
        let base = match self.form {
            Form::R1 => z + b,
            Form::R2 => b - z,
            Form::R3 => {
                let s = z + b;
                s * (s * s + a2)
            }
            Form::R4 => {
                let s = b - z;
                s * (s * s + a2)
            }
        };
        if base.norm() == 0.0 {
            return Err(Error::Pole { at: w });
        }
        Ok(base.powu(self.power).inv())
    }

    /// Poles in `w`, each with the term's power as multiplicity.
    pub fn poles(&self) -> Vec<Complex64> {
        let (b, a) = (self.rate, self.oscillation);
        match self.form {
            Form::R1 => alloc::vec![Complex64::new(0.0, b)],
            Form::R2 => alloc::vec![Complex64::new(0.0, -b)],
            Form::R3 => alloc::vec![Complex64::new(0.0, b), Complex64::new(a, b), Complex64::new(-a, b)],
            Form::R4 => alloc::vec![Complex64::new(0.0, -b), Complex64::new(a, -b), Complex64::new(-a, -b)],
        }
    }
}

/// `A0 + sum C_k term_k(w)` with `A0 >= 0`, `C_k >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalApproximant {
    a0: f64,
    terms: Vec<(BasisTerm, f64)>,
    class: Class,
}

impl RationalApproximant {
    pub fn new(a0: f64, terms: Vec<(BasisTerm, f64)>, class: Class) -> Result<Self> {
        if !(a0 >= 0.0 && a0.is_finite()) {
            return Err(Error::NotPositiveDefinite(format!("constant {a0} is negative")));
        }
        for (term, c) in &terms {
            if !(*c >= 0.0 && c.is_finite()) {
                return Err(Error::NotPositiveDefinite(format!("coefficient {c} is negative")));
            }
            if !term.admissible_in(class) {
                return Err(Error::InvalidParameter(format!("{:?} term not admissible in {class:?}", term.form)));
            }
        }
        Ok(Self { a0, terms, class })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn terms(&self) -> &[(BasisTerm, f64)] {
        &self.terms
    }

    pub fn class(&self) -> Class {
        self.class
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(_, c)| *c).collect()
    }
}

/// Value of the approximant at `w`.
pub fn evaluate(r: &RationalApproximant, w: Complex64) -> Result<Complex64> {
    r.terms
        .iter()
        .try_fold(Complex64::new(r.a0, 0.0), |acc, (term, c)| Ok(acc + term.eval(w)? * *c))
}

/// Samples the approximant on the nodes of `like`.
pub fn sample(r: &RationalApproximant, like: &GridFunction) -> Result<GridFunction> {
    let values = like
        .nodes()
        .iter()
        .map(|&x| evaluate(r, Complex64::new(x, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    like.with_values(values)
}

/// A pole of the stopped characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub at: Complex64,
    pub multiplicity: u32,
}

impl Pole {
    pub fn simple(at: Complex64) -> Self {
        Self { at, multiplicity: 1 }
    }

    fn on_axis(&self) -> bool {
        self.at.re.abs() <= 1e-9 * self.at.norm().max(1.0)
    }
}

/// Poles split by half-plane, each side sorted by modulus. Off-axis poles
/// come in mirrored pairs `+-a + i b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleSet {
    upper: Vec<Pole>,
    lower: Vec<Pole>,
}

impl PoleSet {
    pub fn new(poles: Vec<Pole>) -> Result<Self> {
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for p in &poles {
            if !(p.at.re.is_finite() && p.at.im.is_finite()) {
                return Err(Error::InvalidParameter("non-finite pole".into()));
            }
            if p.multiplicity == 0 {
                return Err(Error::InvalidParameter("pole multiplicity must be at least 1".into()));
            }
            if p.at.im.abs() <= 1e-12 {
                return Err(Error::InvalidParameter(format!("pole {} on the real axis", p.at)));
            }
            if !p.on_axis() {
                let mirror = Complex64::new(-p.at.re, p.at.im);
                let tol = 1e-6 * p.at.norm().max(1.0);
                if !poles.iter().any(|q| (q.at - mirror).norm() <= tol) {
                    return Err(Error::Invariant(format!("pole {} lacks its mirror {mirror}", p.at)));
                }
            }
            if p.at.im > 0.0 {
                upper.push(*p);
            } else {
                lower.push(*p);
            }
        }
        let by_modulus = |a: &Pole, b: &Pole| {
            a.at.norm().partial_cmp(&b.at.norm()).unwrap_or(core::cmp::Ordering::Equal).then(a.at.re.total_cmp(&b.at.re))
        };
        upper.sort_by(by_modulus);
        lower.sort_by(by_modulus);
        Ok(Self { upper, lower })
    }

    pub fn upper(&self) -> &[Pole] {
        &self.upper
    }

    pub fn lower(&self) -> &[Pole] {
        &self.lower
    }

    pub fn all(&self) -> impl Iterator<Item = &Pole> {
        self.lower.iter().chain(&self.upper)
    }

    pub fn len(&self) -> usize {
        self.upper.len() + self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One basis term per pole (per mirrored pair off the axis). Each term's
/// own poles coincide with the poles of `h` it represents: `i b` gives an
/// r1 term, `-i b` an r2 term, `+-a + i b` an r3 and `+-a - i b` an r4
/// term. In the completely monotone class a pair is replaced by the r1/r2
/// term at its imaginary part; duplicate rates are merged.
pub fn basis_from_poles(poles: &PoleSet, class: Class) -> Result<Vec<BasisTerm>> {
    if poles.is_empty() {
        return Err(Error::Empty("pole set"));
    }
    let mut basis: Vec<BasisTerm> = Vec::new();
    for p in poles.all() {
        if p.at.re < 0.0 && !p.on_axis() {
            continue; // represented by its mirror
        }
        let (rate, upper) = (p.at.im.abs(), p.at.im > 0.0);
        let term = match (class, p.on_axis()) {
            (Class::Full, true) => {
                BasisTerm::new(if upper { Form::R1 } else { Form::R2 }, rate, 0.0, p.multiplicity)?
            }
            (Class::Full, false) => {
                BasisTerm::new(if upper { Form::R3 } else { Form::R4 }, rate, p.at.re.abs(), p.multiplicity)?
            }
            (Class::CompletelyMonotone, _) => BasisTerm::new(if upper { Form::R1 } else { Form::R2 }, rate, 0.0, 1)?,
        };
        let duplicate = basis.iter().any(|t| {
            t.form == term.form
                && (t.rate - term.rate).abs() <= 1e-12 * term.rate
                && (t.oscillation - term.oscillation).abs() <= 1e-12 * term.rate
        });
        if !duplicate {
            basis.push(term);
        }
    }
    Ok(basis)
}

/// Fitted approximant with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub approximant: RationalApproximant,
    pub error: f64,
    /// Numerical rank of the design among the active terms.
    pub rank: usize,
    pub iterations: usize,
}

/// Limit of `h` at infinity from the medians of `|h|` over three bands of
/// nodes ending at `R`, `R/2` and `R/4` (each 5% wide, both signs).
///
/// When the medians decrease monotonically the limit is extrapolated with
/// Aitken's delta-squared rule, which is exact for `A + B |w|^-k`; otherwise
/// the outer median is used. Values below `1e-9` or below `1e-3` of the
/// outer median are not distinguishable from a decaying tail and give 0.
pub fn estimate_constant(h: &GridFunction) -> f64 {
    let nodes = h.nodes();
    let reach = nodes[0].abs().min(nodes[nodes.len() - 1].abs());
    let band_median = |outer: f64| -> Option<f64> {
        let mut v: Vec<f64> = nodes
            .iter()
            .zip(h.values())
            .filter(|(x, _)| x.abs() <= outer && x.abs() >= 0.95 * outer)
            .map(|(_, v)| v.norm())
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len();
        Some(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
    };
    let Some(m1) = band_median(reach) else { return 0.0 };
    let limit = match (band_median(0.5 * reach), band_median(0.25 * reach)) {
        (Some(m2), Some(m3)) if m1 < m2 && m2 < m3 => {
            let (d1, d2) = (m2 - m1, m3 - m2);
            if d2 > d1 { m1 - d1 * d1 / (d2 - d1) } else { m1 }
        }
        _ => m1,
    };
    if limit < 1e-9 || limit < 1e-3 * m1 { 0.0 } else { limit }
}

/// Nonnegative coefficients `C` minimizing `|h - A0 - sum C_k term_k|_p`
/// on the grid of `h`, with `A0` from [`estimate_constant`].
pub fn fit_coefficients(h: &GridFunction, basis: &[BasisTerm], class: Class, order: NormOrder) -> Result<Fit> {
    if basis.is_empty() {
        return Err(Error::Empty("basis"));
    }
    if let Some(t) = basis.iter().find(|t| !t.admissible_in(class)) {
        return Err(Error::InvalidParameter(format!("{:?} term not admissible in {class:?}", t.form())));
    }
    let a0 = estimate_constant(h);
    let n = basis.len();
    let m = h.len();
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for term in basis {
        columns.push(h.nodes().iter().map(|&x| term.eval(Complex64::new(x, 0.0))).collect::<Result<Vec<_>>>()?);
    }
    let design = Matrix::from_fn(2 * m, n, |i, j| {
        let v = columns[j][i / 2];
        if i % 2 == 0 { v.re } else { v.im }
    });
    let target: Vec<f64> = h.values().iter().flat_map(|v| [v.re - a0, v.im]).collect();

    let ls = linalg::nnls(&design, &target)?;
    if ls.rank < ls.x.iter().filter(|&&c| c > 0.0).count() {
        warn!("rank-deficient basis; using the minimum-norm solution");
    }
    let full_rank = linalg::lstsq(&design, &target, 1e-13)?.rank;
    if full_rank < n {
        warn!("basis of {n} terms has numerical rank {full_rank}");
    }
    let (coefficients, iterations) = if order.p() == 2.0 {
        (ls.x, 0)
    } else {
        projected_gradient(&design, &target, ls.x, order.p(), h.spacing())
    };
    let approximant = RationalApproximant::new(a0, basis.iter().copied().zip(coefficients).collect(), class)?;
    let error = fit_error(h, &approximant, order)?;
    Ok(Fit { approximant, error, rank: full_rank, iterations })
}

/// Projected gradient descent with backtracking on `sum |r_k|^p`.
fn projected_gradient(a: &Matrix, b: &[f64], start: Vec<f64>, p: f64, spacing: f64) -> (Vec<f64>, usize) {
    let objective = |x: &[f64]| -> (f64, Vec<f64>) {
        let ax = a.mul_vec(x);
        let rows = ax.len() / 2;
        let mut value = 0.0;
        let mut weights = alloc::vec![0.0; ax.len()];
        for k in 0..rows {
            let (re, im) = (ax[2 * k] - b[2 * k], ax[2 * k + 1] - b[2 * k + 1]);
            let modulus = (re * re + im * im).sqrt();
            value += modulus.powf(p) * spacing;
            if modulus > 0.0 {
                let s = p * modulus.powf(p - 2.0) * spacing;
                weights[2 * k] = s * re;
                weights[2 * k + 1] = s * im;
            }
        }
        (value, a.transpose_mul_vec(&weights))
    };
    let mut x = start;
    let (mut fx, mut grad) = objective(&x);
    let mut step = 1.0;
    let max_iter = 10_000;
    for it in 0..max_iter {
        let mut accepted = false;
        while step > 1e-20 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| (xi - step * gi).max(0.0)).collect();
            let (ft, gt) = objective(&trial);
            let moved: f64 = trial.iter().zip(&x).map(|(t, xi)| (t - xi).powi(2)).sum();
            if ft <= fx - 1e-4 / step * moved {
                let done = (fx - ft) <= 1e-10 * fx.max(1e-300);
                x = trial;
                fx = ft;
                grad = gt;
                step *= 2.0;
                accepted = true;
                if done {
                    return (x, it + 1);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return (x, it + 1);
        }
    }
    warn!("projected gradient stopped at the iteration cap");
    (x, max_iter)
}

/// `|h - r|_p` on the grid of `h`.
pub fn fit_error(h: &GridFunction, r: &RationalApproximant, order: NormOrder) -> Result<f64> {
    let rs = sample(r, h)?;
    let diff = h.values().iter().zip(rs.values()).map(|(a, b)| a - b).collect();
    Ok(lp_norm(&h.with_values(diff)?, order))
}
