//! Sampled functions on uniform frequency grids and the transforms acting on
//! them: `L^p` norms, the Hilbert transform, Sokhotskyi–Plemelj boundary
//! values and the closed-form Wiener–Hopf factor of a positive symbol.
//!
//! The Hilbert transform uses the convention
//! `H_s(w) = (1/pi) p.v. int s(x) / (x - w) dx`, under which the Plemelj
//! boundary values are `phi_s^(+/-)(w) = +/- s(w)/2 + H_s(w)/(2i)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A symmetric uniform grid `[-half_width, half_width)` with a power-of-two
/// node count. Zero is always a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    nodes: usize,
}

impl Grid {
    pub fn new(half_width: f64, nodes: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        if nodes < 4 || !nodes.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "node count {nodes} must be a power of two >= 4"
            )));
        }
        Ok(Self { half_width, nodes })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.nodes as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(move |k| self.node(k))
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self { half_width: 64.0, nodes: 1 << 15 }
    }
}

/// Complex samples on uniformly spaced, strictly increasing real nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<Complex64>,
    spacing: f64,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.len() < 4 || !nodes.len().is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "node count {} must be a power of two >= 4",
                nodes.len()
            )));
        }
        let spacing = nodes[1] - nodes[0];
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
        }
        for (k, pair) in nodes.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            let scale = spacing.max(pair[1].abs().max(pair[0].abs()) * f64::EPSILON * 4.0);
            if (step - spacing).abs() > 1e-12 * spacing.max(1.0) + scale * 1e-12 || !(step > 0.0) {
                return Err(Error::InvalidGrid(format!("non-uniform spacing at node {k}")));
            }
        }
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidGrid(format!("non-finite value at node {k}")));
        }
        Ok(Self { nodes, values, spacing })
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        let nodes: Vec<f64> = grid.nodes().collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values)
    }

    pub fn try_from_fn(grid: &Grid, mut f: impl FnMut(f64) -> Result<Complex64>) -> Result<Self> {
        let nodes: Vec<f64> = grid.nodes().collect();
        let values = nodes.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same nodes, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::new(self.nodes.clone(), values)
    }

    pub fn map(&self, mut f: impl FnMut(f64, Complex64) -> Complex64) -> Result<Self> {
        let values = self.nodes.iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect();
        self.with_values(values)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            spacing: self.spacing,
        }
    }

    /// Linear interpolation; clamps to the end values outside the grid.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let pos = (x - self.nodes[0]) / self.spacing;
        let k = (pos.floor() as usize).min(n - 2);
        let t = (x - self.nodes[k]) / self.spacing;
        if t == 0.0 {
            return self.values[k];
        }
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Exponent `p` of an `L^p` norm together with its conjugate `p*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOrder {
    p: f64,
    conjugate: f64,
}

impl NormOrder {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidParameter(format!("norm order {p} outside (1, 2]")));
        }
        Ok(Self { p, conjugate: p / (p - 1.0) })
    }

    pub fn two() -> Self {
        Self { p: 2.0, conjugate: 2.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn conjugate(&self) -> f64 {
        self.conjugate
    }
}

impl Default for NormOrder {
    fn default() -> Self {
        Self::two()
    }
}

/// Riemann-sum `L^p` norm, `(sum |f_k|^p dx)^(1/p)`.
pub fn lp_norm(f: &GridFunction, order: NormOrder) -> f64 {
    let p = order.p();
    let scale = f.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = f.values.iter().map(|v| (v.norm() / scale).powf(p)).sum();
    scale * (sum * f.spacing).powf(1.0 / p)
}

/// Controls for [`hilbert_transform_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HilbertOptions {
    /// Cosine taper over the outer 5% of the grid on each side.
    pub taper: bool,
    /// Add the analytic contribution of `a/x` tails beyond the grid ends.
    pub tail_correction: bool,
    /// Largest allowed end-sample magnitude relative to the peak magnitude.
    pub end_tolerance: f64,
}

impl Default for HilbertOptions {
    fn default() -> Self {
        Self { taper: false, tail_correction: true, end_tolerance: 0.1 }
    }
}

/// Hilbert transform with default options.
pub fn hilbert_transform(f: &GridFunction) -> Result<GridFunction> {
    hilbert_transform_with(f, &HilbertOptions::default())
}

/// Hilbert transform `H_f(w) = (1/pi) p.v. int f(x)/(x - w) dx` on the nodes of `f`.
///
/// The samples are convolved (linearly, through a zero-padded FFT) with the
/// band-limited principal-value kernel `2/(pi m)` for odd offsets `m`, which
/// is exact for sinc-interpolated data. Unlike multiplying the periodic
/// spectrum by `i sgn`, there is no wrap-around between the grid ends.
pub fn hilbert_transform_with(f: &GridFunction, opts: &HilbertOptions) -> Result<GridFunction> {
    let n = f.len();
    let peak = f.max_abs();
    if peak == 0.0 {
        return f.with_values(vec![Complex64::new(0.0, 0.0); n]);
    }
    let end = f.values[0].norm().max(f.values[n - 1].norm());
    let limit = opts.end_tolerance * peak;
    if end > limit {
        return Err(Error::GridTooSmall { end, limit });
    }

    let mut input: Vec<Complex64> = f.values.clone();
    if opts.taper {
        let band = ((n as f64) * 0.05).ceil() as usize;
        for k in 0..band.min(n / 2) {
            let w = 0.5 * (1.0 - (PI * k as f64 / band as f64).cos());
            input[k] *= w;
            input[n - 1 - k] *= w;
        }
    }

    let m = 2 * n;
    let mut kernel = vec![Complex64::new(0.0, 0.0); m];
    for d in (1..n).step_by(2) {
        let v = 2.0 / (PI * d as f64);
        kernel[d] = Complex64::new(v, 0.0);
        kernel[m - d] = Complex64::new(-v, 0.0);
    }
    input.resize(m, Complex64::new(0.0, 0.0));
    fft::forward(&mut input);
    fft::forward(&mut kernel);
    for (a, k) in input.iter_mut().zip(&kernel) {
        *a *= k;
    }
    fft::inverse(&mut input);
    // (f * K)_j = sum_k f_k K(j - k); the kernel is odd, so H_j = -(f * K)_j
    let mut out: Vec<Complex64> = input[..n].iter().map(|v| -v).collect();

    if opts.tail_correction {
        let h = f.spacing;
        let right_edge = f.nodes[n - 1] + 0.5 * h;
        let left_edge = -(f.nodes[0] - 0.5 * h);
        if right_edge > 0.0 && left_edge > 0.0 {
            let a_right = f.values[n - 1] * f.nodes[n - 1];
            let a_left = f.values[0] * f.nodes[0];
            for (o, &w) in out.iter_mut().zip(&f.nodes) {
                let right = ln1p_over(-w / right_edge) / right_edge;
                let left = ln1p_over(w / left_edge) / left_edge;
                *o += (a_right * right + a_left * left) / PI;
            }
        }
    }
    f.with_values(out)
}

// ln(1 + t) / t, continuous at t = 0.
fn ln1p_over(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - 0.5 * t
    } else {
        t.ln_1p() / t
    }
}

/// Which boundary value of the Cauchy integral to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// Plemelj boundary value `+/- f/2 + H_f/(2i)` from above or below the real line.
pub fn plemelj_radial_limits(f: &GridFunction, side: Side) -> Result<GridFunction> {
    let hf = hilbert_transform(f)?;
    let sign = match side {
        Side::Upper => 0.5,
        Side::Lower => -0.5,
    };
    let values = f
        .values
        .iter()
        .zip(&hf.values)
        .map(|(&v, &hv)| v * sign + hv / (2.0 * I))
        .collect();
    f.with_values(values)
}

/// Wiener–Hopf factors of a real positive symbol `g` with `g(0) = 1`:
/// `Phi^(+/-)(w) = sqrt(g(w)) exp(+/- (i/2)(H_ln g(0) - H_ln g(w)))`.
///
/// `ln g` need not decay (for characteristic functions it grows like
/// `-2 ln|w|`), so the difference `H_ln g(w) - H_ln g(0)` is obtained by
/// integrating the Hilbert transform of `(ln g)'` from the origin.
pub fn direct_factor_from_g(g: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    let n = g.len();
    let mut log_g = Vec::with_capacity(n);
    for (k, v) in g.values.iter().enumerate() {
        if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!("g is complex-valued at node {k}")));
        }
        if !(v.re > 0.0) {
            return Err(Error::InvalidParameter(format!("g is not positive at node {k}")));
        }
        if v.re > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter(format!("g exceeds 1 at node {k}")));
        }
        log_g.push(v.re.ln());
    }
    let at_zero = g.interpolate(0.0).re;
    if (at_zero - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("g(0) = {at_zero}, expected 1")));
    }

    let h = g.spacing;
    let derivative: Vec<Complex64> = (0..n)
        .map(|k| {
            let d = if k == 0 {
                (log_g[1] - log_g[0]) / h
            } else if k == n - 1 {
                (log_g[n - 1] - log_g[n - 2]) / h
            } else {
                (log_g[k + 1] - log_g[k - 1]) / (2.0 * h)
            };
            Complex64::new(d, 0.0)
        })
        .collect();
    let h_derivative = hilbert_transform(&g.with_values(derivative)?)?;

    // cumulative trapezoid from the first node, then re-anchored at 0
    let mut cumulative = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n {
        cumulative[k] = cumulative[k - 1]
            + (h_derivative.values[k].re + h_derivative.values[k - 1].re) * 0.5 * h;
    }
    let cumulative = g.with_values(cumulative)?;
    let anchor = cumulative.interpolate(0.0).re;

    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for k in 0..n {
        let shift = cumulative.values[k].re - anchor; // H(w) - H(0)
        let modulus = g.values[k].re.sqrt();
        plus.push(Complex64::from_polar(modulus, -0.5 * shift));
        minus.push(Complex64::from_polar(modulus, 0.5 * shift));
    }
    Ok((g.with_values(plus)?, g.with_values(minus)?))
}

/// Total variation of the unwrapped phase of `f` along the grid. A value
/// above `pi` means the symbol may have non-zero index.
pub fn phase_excursion(f: &GridFunction) -> f64 {
    let mut phase = 0.0;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut prev = f.values[0].arg();
    for v in &f.values[1..] {
        if v.norm() == 0.0 {
            continue;
        }
        let a = v.arg();
        let mut d = a - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        phase += d;
        lo = lo.min(phase);
        hi = hi.max(phase);
        prev = a;
    }
    hi - lo
}

fn cauchy_integral(f: &GridFunction, z: Complex64, weight: impl Fn(f64) -> Complex64) -> Complex64 {
    let sum: Complex64 = f
        .nodes
        .iter()
        .zip(&f.values)
        .map(|(&x, &v)| v * weight(x) / (x - z))
        .sum();
    sum * f.spacing / (2.0 * PI * I)
}

/// Discrepancy `|phi_f(l) - phi_f(m) - (l - m) phi_{f(x)/(x-l)}(m)|` of the
/// resolvent identity, all Cauchy integrals evaluated by the trapezoid rule.
/// Real arguments use the mean of the boundary values at distance
/// `8 * spacing` above and below the line.
pub fn resolvent_selftest(f: &GridFunction, lambda: Complex64, mu: Complex64) -> f64 {
    if lambda == mu {
        return 0.0;
    }
    let eps = 8.0 * f.spacing;
    let offsets: &[f64] = if lambda.im == 0.0 || mu.im == 0.0 { &[eps, -eps] } else { &[0.0] };
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    for &s in offsets {
        let shift = |z: Complex64| if z.im == 0.0 { z + I * s } else { z };
        let (l, m) = (shift(lambda), shift(mu));
        lhs += cauchy_integral(f, l, |_| Complex64::new(1.0, 0.0))
            - cauchy_integral(f, m, |_| Complex64::new(1.0, 0.0));
        rhs += (l - m) * cauchy_integral(f, m, |x| 1.0 / (x - l));
    }
    let count = offsets.len() as f64;
    ((lhs - rhs) / count).norm()
}
