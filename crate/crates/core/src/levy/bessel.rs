//! Modified Bessel function of the second kind `K_nu(z)` for real order and
//! complex argument.
//!
//! `|z| < 2` uses Temme's series, `|z| >= 2` with `Re z >= 0` uses Steed's
//! continued fraction, both at an order `mu` in `[-1/2, 1/2)`, followed by
//! upward recurrence. The left half-plane outside the disc is reached by
//! analytic continuation through `I_nu`.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 20_000;

const C1: [f64; 7] = [
    -1.142022680371168e0,
    6.5165112670737e-3,
    3.087090173086e-4,
    -3.4706269649e-6,
    6.9437664e-9,
    3.67795e-11,
    -1.356e-13,
];
const C2: [f64; 8] = [
    1.843740587300905e0,
    -7.68528408447867e-2,
    1.2719271366546e-3,
    -4.9717367042e-6,
    -3.31261198e-8,
    2.423096e-10,
    -1.702e-13,
    -1.49e-15,
];

fn chebev(c: &[f64], x: f64) -> f64 {
    let (mut d, mut dd) = (0.0, 0.0);
    let y2 = 2.0 * x;
    for &cj in c[1..].iter().rev() {
        let sv = d;
        d = y2 * d - dd + cj;
        dd = sv;
    }
    x * d - dd + 0.5 * c[0]
}

/// `(1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)`, `(1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2`,
/// `1/Gamma(1+mu)` and `1/Gamma(1-mu)` for `|mu| <= 1/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let xx = 8.0 * mu * mu - 1.0;
    let gam1 = chebev(&C1, xx);
    let gam2 = chebev(&C2, xx);
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

/// Reduced order and number of upward recurrence steps.
fn split_order(nu: f64) -> (f64, usize) {
    let steps = (nu + 0.5).floor();
    (nu - steps, steps as usize)
}

/// `(K_mu(z), K_{mu+1}(z))` by Temme's series; valid for `|z| < 2` on the
/// principal branch.
fn temme(mu: f64, z: Complex64) -> (Complex64, Complex64) {
    let half = z * 0.5;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -half.ln();
    let e = d * mu;
    let fact2 = if e.norm() < 1e-4 { 1.0 + e * e / 6.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = (e.cosh() * gam1 + fact2 * d * gam2) * fact;
    let mut sum = ff;
    let ee = e.exp();
    let mut p = ee * 0.5 / gampl;
    let mut q = ee.inv() * 0.5 / gammi;
    let mut c = Complex64::new(1.0, 0.0);
    let dd = half * half;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (ff * fi + p + q) / (fi * fi - mu * mu);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - ff * fi);
        if del.norm() < sum.norm() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / z)
}

/// Steed's continued fraction for `Re z >= 0`, `|z| >= 2`. Returns
/// `ln K_mu(z)` and the ratio `K_{mu+1}(z) / K_mu(z)`.
fn steed_log(mu: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let mut b = (one + z) * 2.0;
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25 - mu * mu;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut converged = false;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += qnew * c;
        b += 2.0;
        d = (b + d * a).inv();
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < s.norm() * EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "Bessel K continued fraction", iterations: MAX_ITER });
    }
    h *= a1;
    let ln_k = (Complex64::new(PI * 0.5, 0.0) / z).ln() * 0.5 - z - s.ln();
    let ratio = (z + mu + 0.5 - h) / z;
    Ok((ln_k, ratio))
}

/// `I_{nu+1}(w) / I_nu(w)` by the continued fraction
/// `1 / (2(nu+1)/w + 1 / (2(nu+2)/w + ...))`, modified Lentz.
fn i_ratio(nu: f64, w: Complex64) -> Result<Complex64> {
    let tiny = 1e-100; // squared inside Complex::inv, keep it representable
    let inv = w.inv();
    let mut f = Complex64::new(tiny, 0.0);
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..MAX_ITER {
        let bk = inv * (2.0 * (nu + k as f64));
        d = bk + d;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = bk + c.inv();
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < EPS {
            return Ok(f);
        }
    }
    Err(Error::NoConvergence { what: "Bessel I ratio", iterations: MAX_ITER })
}

fn check_domain(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() == 0.0 || (z.im == 0.0 && z.re < 0.0) {
        return Err(Error::Domain { what: "bessel_k", at: z });
    }
    Ok(())
}

/// `(K_nu(z), K_{nu+1}(z))` for `nu >= 0` off the left half-plane exterior.
fn k_pair_right(nu: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let (mu, steps) = split_order(nu);
    let (mut k0, mut k1) = if z.norm() < 2.0 {
        temme(mu, z)
    } else {
        let (ln_k, ratio) = steed_log(mu, z)?;
        let k = ln_k.exp();
        (k, k * ratio)
    };
    let two_over_z = z.inv() * 2.0;
    for i in 1..=steps {
        let next = two_over_z * (mu + i as f64) * k1 + k0;
        k0 = k1;
        k1 = next;
    }
    Ok((k0, k1))
}

/// Modified Bessel function `K_nu(z)` on the principal branch, cut along the
/// non-positive real axis.
pub fn bessel_k(order: f64, z: Complex64) -> Result<Complex64> {
    check_domain(z)?;
    if !order.is_finite() {
        return Err(Error::InvalidParameter("Bessel order must be finite".into()));
    }
    let nu = order.abs();
    if z.norm() < 2.0 || z.re >= 0.0 {
        return Ok(k_pair_right(nu, z)?.0);
    }
    // K_nu(w e^{+-i pi}) = e^{-+i nu pi} K_nu(w) -+ i pi I_nu(w), w = -z
    let w = -z;
    let (k0, k1) = k_pair_right(nu, w)?;
    let f = i_ratio(nu, w)?;
    let i_nu = (w * (k1 + f * k0)).inv();
    let ipi = Complex64::new(0.0, PI);
    let rotation = Complex64::from_polar(1.0, -nu * PI);
    if z.im > 0.0 {
        Ok(rotation * k0 - ipi * i_nu)
    } else {
        Ok(rotation.conj() * k0 + ipi * i_nu)
    }
}

/// `ln K_nu(z)`, continuous across the right half-plane and real for real
/// positive `z`. Avoids the overflow and underflow of `K_nu` at large `|z|`.
pub fn ln_bessel_k(order: f64, z: Complex64) -> Result<Complex64> {
    check_domain(z)?;
    let nu = order.abs();
    if z.norm() < 2.0 || z.re < 0.0 {
        return Ok(bessel_k(nu, z)?.ln());
    }
    let (mu, steps) = split_order(nu);
    let (mut ln_k, mut ratio) = steed_log(mu, z)?;
    let two_over_z = z.inv() * 2.0;
    for i in 1..=steps {
        ln_k += ratio.ln();
        ratio = two_over_z * (mu + i as f64) + ratio.inv();
    }
    Ok(ln_k)
}
