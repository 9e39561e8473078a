//! Complex polynomials with coefficients in ascending order of degree.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

pub fn derivative(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len().max(b.len())];
    for (k, &x) in a.iter().enumerate() {
        out[k] += x;
    }
    for (k, &y) in b.iter().enumerate() {
        out[k] += y;
    }
    out
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    roots.iter().fold(vec![ONE], |p, &r| mul(&p, &[-r, ONE]))
}

/// Drops leading coefficients that are negligible relative to the largest.
pub fn trim(p: &mut Vec<Complex64>, rel: f64) {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while p.len() > 1 && p.last().is_some_and(|c| c.norm() <= rel * scale) {
        p.pop();
    }
}

/// All roots by the Aberth–Ehrlich iteration followed by Newton polishing.
pub fn roots(p: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut p = p.to_vec();
    trim(&mut p, 0.0);
    let degree = p.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = p[degree];
    let monic: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    let dp = derivative(&monic);

    // initial guesses on a circle inside the Cauchy bound, rotated off-axis
    let bound = 1.0 + monic[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let radius = {
        let c0 = monic[0].norm();
        if c0 > 0.0 { c0.powf(1.0 / degree as f64).min(bound) } else { 0.5 * bound }
    };
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| Complex64::from_polar(radius.max(1e-3), 2.0 * PI * k as f64 / degree as f64 + 0.4))
        .collect();

    let max_iter = 500;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut moved = 0.0f64;
        for k in 0..degree {
            let pk = eval(&monic, z[k]);
            if pk == ZERO {
                continue;
            }
            let ratio = pk / eval(&dp, z[k]);
            let repulsion: Complex64 = (0..degree).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if moved < 1e-15 {
            converged = true;
            break;
        }
    }

    for zk in z.iter_mut() {
        for _ in 0..5 {
            let d = eval(&dp, *zk);
            if d == ZERO {
                break;
            }
            let step = eval(&monic, *zk) / d;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *zk -= step;
            if step.norm() <= 1e-16 * zk.norm() {
                break;
            }
        }
    }

    // backward-error check: |p(z)| relative to sum |c_k| |z|^k
    let residual = z
        .iter()
        .map(|&zk| {
            let scale: f64 = monic.iter().rev().fold(0.0, |acc, c| acc * zk.norm() + c.norm());
            eval(&monic, zk).norm() / scale.max(1e-300)
        })
        .fold(0.0, f64::max);
    if !converged && residual > 1e-10 {
        return Err(Error::RootFinding { degree, residual });
    }
    Ok(z)
}
