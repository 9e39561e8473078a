//! Zeros of the stopped-CF denominator, i.e. poles of `h`.
//!
//! On the imaginary axis the denominator is real, so sign changes of
//! `D(i t)` are bracketed on a fine scan and bisected; crossings through a
//! pole of `D` are discarded. Off the axis the argument principle counts
//! zeros of `D` in rectangular cells of the right half-plane, cells are
//! subdivided until a Newton iteration started at the centre converges
//! inside, and every root is mirrored to `-conj(z)`.

use alloc::vec::Vec;

use log::{debug, warn};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{Pole, PoleSet};
use crate::error::{Error, Result};

/// How many poles to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleCount {
    /// The `n` poles of smallest modulus over both half-planes.
    Smallest(usize),
    /// The `upper` smallest poles with positive imaginary part and the
    /// `lower` smallest with negative imaginary part.
    PerSide { upper: usize, lower: usize },
}

impl PoleCount {
    fn total(&self) -> usize {
        match *self {
            PoleCount::Smallest(n) => n,
            PoleCount::PerSide { upper, lower } => upper + lower,
        }
    }
}

/// Search region and resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSearch {
    /// Half-width of the square `|Re w|, |Im w| <= radius`.
    pub radius: f64,
    /// Spacing of the imaginary-axis scan.
    pub axis_step: f64,
    /// Search off the imaginary axis as well.
    pub off_axis: bool,
    /// Side of the initial argument-principle cells.
    pub cell: f64,
    /// Maximal number of cell subdivisions.
    pub max_depth: u32,
    /// Off-axis cells start at `Re w = min_real`.
    pub min_real: f64,
}

impl Default for PoleSearch {
    fn default() -> Self {
        Self { radius: 12.0, axis_step: 1e-3, off_axis: true, cell: 1.0, max_depth: 12, min_real: 1e-3 }
    }
}

const RESIDUAL: f64 = 1e-9;

type Denominator<'a> = &'a dyn Fn(Complex64) -> Result<Complex64>;

/// Poles of `h`, found as zeros of its denominator `den`.
pub fn find_poles(den: Denominator<'_>, search: &PoleSearch, count: PoleCount) -> Result<PoleSet> {
    if count.total() == 0 {
        return Err(Error::InvalidParameter("pole count must be at least 1".into()));
    }
    if !(search.radius > 0.0 && search.axis_step > 0.0 && search.cell > 0.0) {
        return Err(Error::InvalidParameter("pole search extents must be positive".into()));
    }
    let mut roots = scan_axis(den, search)?;
    if search.off_axis {
        let mut off = Vec::new();
        let (lo, hi) = (search.min_real, search.radius);
        let ny = (2.0 * search.radius / search.cell).ceil() as usize;
        let nx = ((hi - lo) / search.cell).ceil().max(1.0) as usize;
        for ix in 0..nx {
            for iy in 0..ny {
                let x0 = lo + ix as f64 * search.cell;
                let y0 = -search.radius + iy as f64 * search.cell;
                let cell = Rect { x0, x1: (x0 + search.cell).min(hi), y0, y1: (y0 + search.cell).min(search.radius) };
                search_cell(den, &cell, 0, search.max_depth, &mut off);
            }
        }
        for z in off {
            let mirror = Complex64::new(-z.re, z.im);
            let mirror = newton(den, mirror).unwrap_or(mirror);
            for p in [z, mirror] {
                if !roots.iter().any(|r: &Complex64| (r - p).norm() < 1e-7 * p.norm().max(1.0)) {
                    roots.push(p);
                }
            }
        }
    }
    debug!("pole search found {} roots", roots.len());
    select(roots, count)
}

fn select(roots: Vec<Complex64>, count: PoleCount) -> Result<PoleSet> {
    let mut upper: Vec<Complex64> = roots.iter().copied().filter(|z| z.im > 0.0).collect();
    let mut lower: Vec<Complex64> = roots.iter().copied().filter(|z| z.im < 0.0).collect();
    let key = |a: &Complex64, b: &Complex64| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re));
    upper.sort_by(key);
    lower.sort_by(key);
    let chosen: Vec<Complex64> = match count {
        PoleCount::Smallest(n) => {
            let mut all: Vec<Complex64> = roots;
            all.sort_by(key);
            take_with_pairs(&all, n)
        }
        PoleCount::PerSide { upper: nu, lower: nl } => {
            let mut v = take_with_pairs(&upper, nu);
            v.extend(take_with_pairs(&lower, nl));
            v
        }
    };
    if chosen.len() < count.total() {
        warn!("found {} of {} requested poles in the search region", chosen.len(), count.total());
    }
    PoleSet::new(chosen.into_iter().map(Pole::simple).collect())
}

/// First `n` entries, extended so that mirrored pairs are never split.
fn take_with_pairs(sorted: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for &z in sorted {
        if out.len() >= n {
            break;
        }
        if out.iter().any(|o| (o - z).norm() < 1e-12) {
            continue;
        }
        out.push(z);
        if z.re.abs() > 1e-9 * z.norm().max(1.0) {
            let mirror = sorted
                .iter()
                .copied()
                .filter(|m| (m.re + z.re).abs() < 1e-6 * z.norm().max(1.0) && (m.im - z.im).abs() < 1e-6 * z.norm().max(1.0))
                .min_by(|a, b| (a.re + z.re).abs().total_cmp(&(b.re + z.re).abs()));
            if let Some(m) = mirror {
                out.push(m);
            }
        }
    }
    out
}

fn scan_axis(den: Denominator<'_>, search: &PoleSearch) -> Result<Vec<Complex64>> {
    let steps = (2.0 * search.radius / search.axis_step).round() as i64;
    let eval = |t: f64| -> Option<f64> {
        let v = den(Complex64::new(0.0, t)).ok()?;
        (v.re.is_finite() && v.im.abs() <= 1e-8 * v.re.abs().max(1.0)).then_some(v.re)
    };
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let t = -search.radius + k as f64 * search.axis_step;
        let current = eval(t).map(|v| (t, v));
        if let (Some((ta, va)), Some((tb, vb))) = (prev, current) {
            if va == 0.0 {
                roots.push(Complex64::new(0.0, ta));
            } else if va.signum() != vb.signum() && vb != 0.0 {
                if let Some(t) = bisect(&eval, ta, tb, va) {
                    let z = Complex64::new(0.0, t);
                    match den(z) {
                        Ok(d) if d.norm() < RESIDUAL => roots.push(z),
                        _ => debug!("discarding sign change through a pole near {z}"),
                    }
                }
            }
        }
        prev = current;
    }
    Ok(roots)
}

fn bisect(f: &dyn Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Option<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn contains(&self, z: Complex64, margin: f64) -> bool {
        let (mx, my) = (margin * (self.x1 - self.x0), margin * (self.y1 - self.y0));
        z.re >= self.x0 - mx && z.re <= self.x1 + mx && z.im >= self.y0 - my && z.im <= self.y1 + my
    }

    fn quarters(&self) -> [Rect; 4] {
        let (xm, ym) = (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1));
        [
            Rect { x0: self.x0, x1: xm, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: self.y0, y1: ym },
            Rect { x0: self.x0, x1: xm, y0: ym, y1: self.y1 },
            Rect { x0: xm, x1: self.x1, y0: ym, y1: self.y1 },
        ]
    }
}

fn search_cell(den: Denominator<'_>, cell: &Rect, depth: u32, max_depth: u32, found: &mut Vec<Complex64>) {
    let winding = match winding_number(den, cell) {
        Ok(w) => w,
        Err(_) if depth < max_depth => {
            for q in cell.quarters() {
                search_cell(den, &q, depth + 1, max_depth, found);
            }
            return;
        }
        Err(e) => {
            warn!("argument principle failed near {}: {e}", cell.center());
            return;
        }
    };
    if winding <= 0 {
        return;
    }
    if winding == 1 || depth >= max_depth {
        if let Ok(z) = newton(den, cell.center()) {
            if cell.contains(z, 0.05) {
                if !found.iter().any(|f| (f - z).norm() < 1e-8 * z.norm().max(1.0)) {
                    found.push(z);
                }
                if winding == 1 {
                    return;
                }
            }
        }
        if depth >= max_depth {
            warn!("unresolved zeros of the denominator near {}", cell.center());
            return;
        }
    }
    for q in cell.quarters() {
        search_cell(den, &q, depth + 1, max_depth, found);
    }
}

/// Net number of zeros minus poles of `den` inside the cell.
fn winding_number(den: Denominator<'_>, cell: &Rect) -> Result<i64> {
    let corners = [
        Complex64::new(cell.x0, cell.y0),
        Complex64::new(cell.x1, cell.y0),
        Complex64::new(cell.x1, cell.y1),
        Complex64::new(cell.x0, cell.y1),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let pieces = 8;
        let mut za = a;
        let mut fa = den(za)?;
        for j in 1..=pieces {
            let zb = a + (b - a) * (j as f64 / pieces as f64);
            let fb = den(zb)?;
            total += arg_change(den, za, fa, zb, fb, 0)?;
            za = zb;
            fa = fb;
        }
    }
    let turns = total / (2.0 * core::f64::consts::PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.1 {
        return Err(Error::NoConvergence { what: "winding number", iterations: 0 });
    }
    Ok(rounded as i64)
}

fn arg_change(den: Denominator<'_>, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: u32) -> Result<f64> {
    if fa.norm() == 0.0 || fb.norm() == 0.0 {
        return Err(Error::Domain { what: "argument principle", at: a });
    }
    let d = (fb / fa).arg();
    if d.abs() < 0.5 || depth >= 20 {
        return Ok(d);
    }
    let m = 0.5 * (a + b);
    let fm = den(m)?;
    Ok(arg_change(den, a, fa, m, fm, depth + 1)? + arg_change(den, m, fm, b, fb, depth + 1)?)
}

fn newton(den: Denominator<'_>, start: Complex64) -> Result<Complex64> {
    let mut z = start;
    for _ in 0..100 {
        let f = den(z)?;
        let h = 1e-6 * z.norm().max(1.0);
        let df = (den(z + h)? - den(z - h)?) / (2.0 * h);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        z -= step;
        if step.norm() <= 1e-14 * z.norm().max(1.0) {
            break;
        }
    }
    let residual = den(z)?.norm();
    if residual < RESIDUAL {
        Ok(z)
    } else {
        Err(Error::NoConvergence { what: "Newton polish", iterations: 100 })
    }
}
