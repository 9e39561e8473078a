//! Ruin probabilities of the surplus `u + X_t` from the infimum law:
//! `R_q(u) = P(I_q < -u)`, and its limit as the stopping rate vanishes.

use alloc::format;
use alloc::vec::Vec;

use log::warn;

use crate::error::{Error, Result};
use crate::levy::{LevyModel, StoppingKind, StoppingTime};
use crate::pipeline::{factorize, Options, StageError};
use crate::whf::{ExtremaDensity, Extremum};

/// `P(I_q < -u)` in closed form.
pub fn finite_time_ruin(density: &ExtremaDensity, u: f64) -> Result<f64> {
    if density.side() != Extremum::Infimum {
        return Err(Error::SideMismatch);
    }
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::InvalidParameter(format!("initial reserve {u} must be finite and nonnegative")));
    }
    Ok(density.tail(u).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuinCurve {
    pub reserves: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Infimum law the curve was computed from.
    pub source: ExtremaDensity,
}

/// Ruin probabilities over `reserves`. Rounding-level increases along a
/// sorted grid are flattened so the curve is non-increasing.
pub fn ruin_curve(density: &ExtremaDensity, reserves: &[f64]) -> Result<RuinCurve> {
    let mut probabilities = reserves.iter().map(|&u| finite_time_ruin(density, u)).collect::<Result<Vec<_>>>()?;
    for k in 1..reserves.len() {
        if reserves[k] >= reserves[k - 1] && probabilities[k] > probabilities[k - 1] {
            let excess = probabilities[k] - probabilities[k - 1];
            if excess > 1e-9 {
                return Err(Error::Invariant(format!("ruin probability increases by {excess:e} at u = {}", reserves[k])));
            }
            probabilities[k] = probabilities[k - 1];
        }
    }
    Ok(RuinCurve { reserves: reserves.to_vec(), probabilities, source: density.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfiniteTimeRuin {
    /// Stopping rates that produced a value, in input order.
    pub rates: Vec<f64>,
    pub values: Vec<f64>,
    /// Quadratic extrapolation to rate 0 through the last three values, or
    /// the last value when fewer are available.
    pub limit: Option<f64>,
    /// Whether the values increase as the rate decreases.
    pub monotone: bool,
    /// Rates at which the pipeline failed.
    pub failures: Vec<(f64, StageError)>,
}

/// `lim_{q -> 0} R_q(u)` estimated from a decreasing sequence of rates.
pub fn infinite_time_ruin(
    model: &LevyModel,
    kind: StoppingKind,
    u: f64,
    rates: &[f64],
    opts: &Options,
) -> Result<InfiniteTimeRuin> {
    if rates.is_empty() {
        return Err(Error::Empty("stopping rates"));
    }
    if rates.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("stopping rates must decrease".into()));
    }
    let mut out = InfiniteTimeRuin { rates: Vec::new(), values: Vec::new(), limit: None, monotone: true, failures: Vec::new() };
    for &q in rates {
        let stop = match kind {
            StoppingKind::Exponential => StoppingTime::exponential(q)?,
            StoppingKind::Geometric => StoppingTime::geometric(q)?,
        };
        match factorize(model, &stop, opts) {
            Ok(f) => {
                out.rates.push(q);
                out.values.push(finite_time_ruin(&f.infimum, u)?);
            }
            Err(e) => {
                warn!("rate {q}: {e}");
                out.failures.push((q, e));
            }
        }
    }
    out.monotone = out.values.windows(2).all(|w| w[1] >= w[0]);
    if !out.monotone {
        warn!("ruin probabilities are not monotone in the stopping rate");
    }
    out.limit = extrapolate_to_zero(&out.rates, &out.values).map(|v| v.clamp(0.0, 1.0));
    Ok(out)
}

/// Neville evaluation at 0 of the polynomial through the last three points.
fn extrapolate_to_zero(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n == 0 {
        return None;
    }
    let start = n.saturating_sub(3);
    let (xs, mut p) = (&x[start..], y[start..].to_vec());
    for level in 1..p.len() {
        for i in (level..p.len()).rev() {
            let (xi, xj) = (xs[i], xs[i - level]);
            p[i] = (xi * p[i - 1] - xj * p[i]) / (xi - xj);
        }
    }
    p.last().copied()
}
