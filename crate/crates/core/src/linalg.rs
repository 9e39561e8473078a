//! Small dense linear algebra: Householder QR, one-sided Jacobi SVD,
//! minimum-norm least squares, nonnegative least squares and symmetric
//! eigenvalues. Sizes here are a few dozen columns at most.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * y[i];
            }
        }
        out
    }

    fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]))
    }
}

/// Reduces `min |A x - b|` to an equivalent `n x n` problem
/// `min |R x - c|` via Householder QR. Returns `(R, c, residual^2)` where
/// `residual^2` is the part of `|b|^2` orthogonal to the column space.
pub fn qr_reduce(a: &Matrix, b: &[f64]) -> (Matrix, Vec<f64>, f64) {
    let (m, n) = (a.rows, a.cols);
    // column-major working copy for cache-friendly reflections
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    let mut rhs = b.to_vec();
    let k_max = n.min(m);
    for k in 0..k_max {
        let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let reflect = |col: &mut [f64]| {
            let dot: f64 = col.iter().zip(&v).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        };
        for col in cols.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut rhs[k..]);
    }
    let r = Matrix::from_fn(n, n, |i, j| if i <= j && i < m { cols[j][i] } else { 0.0 });
    let c: Vec<f64> = (0..n).map(|i| if i < m { rhs[i] } else { 0.0 }).collect();
    let residual2 = if m > n { rhs[n..].iter().map(|v| v * v).sum() } else { 0.0 };
    (r, c, residual2)
}

/// Thin SVD `A = U diag(s) V^T` of a square or tall matrix by one-sided Jacobi.
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

pub fn svd(a: &Matrix) -> Result<Svd> {
    let (m, n) = (a.rows, a.cols);
    let mut u: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let max_sweeps = 100;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (u[p][i], u[q][i]);
                    u[p][i] = c * x - s * y;
                    u[q][i] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[p][i], v[q][i]);
                    v[p][i] = c * x - s * y;
                    v[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "Jacobi SVD", iterations: max_sweeps });
    }
    let s: Vec<f64> = u.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    for (col, &sj) in u.iter_mut().zip(&s) {
        if sj > 0.0 {
            col.iter_mut().for_each(|x| *x /= sj);
        }
    }
    Ok(Svd {
        u: Matrix::from_fn(m, n, |i, j| u[j][i]),
        s,
        v: Matrix::from_fn(n, n, |i, j| v[j][i]),
    })
}

/// Solution of a least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    pub rank: usize,
}

/// Minimum-norm least-squares solution; singular values below
/// `rcond * s_max` are treated as zero.
pub fn lstsq(a: &Matrix, b: &[f64], rcond: f64) -> Result<LeastSquares> {
    let n = a.cols;
    if n == 0 {
        return Ok(LeastSquares { x: Vec::new(), rank: 0 });
    }
    let (r, c, _) = qr_reduce(a, b);
    let d = svd(&r)?;
    let s_max = d.s.iter().cloned().fold(0.0, f64::max);
    let mut x = vec![0.0; n];
    let mut rank = 0;
    for (k, &sk) in d.s.iter().enumerate() {
        if sk <= rcond * s_max || sk == 0.0 {
            continue;
        }
        rank += 1;
        let coef: f64 = (0..n).map(|i| d.u.get(i, k) * c[i]).sum::<f64>() / sk;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += coef * d.v.get(j, k);
        }
    }
    Ok(LeastSquares { x, rank })
}

/// Lawson–Hanson active-set solution of `min |A x - b|, x >= 0`.
///
/// The problem is first compressed to `n x n` by QR, so the cost per
/// iteration is independent of the number of rows.
pub fn nnls(a: &Matrix, b: &[f64]) -> Result<LeastSquares> {
    let n = a.cols;
    let (r, c, _) = qr_reduce(a, b);
    let rcond = 1e-13;
    let scale = (0..n).map(|j| r.get(j, j).abs()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-12 * scale * c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);

    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let residual: Vec<f64> = r.mul_vec(&x).iter().zip(&c).map(|(rx, ci)| ci - rx).collect();
        let w = r.transpose_mul_vec(&residual);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap_or(core::cmp::Ordering::Equal));
        let Some(t) = candidate else { break };
        if w[t] <= tol {
            break;
        }
        passive[t] = true;
        loop {
            let set: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = lstsq(&r.select_columns(&set), &c, rcond)?;
            let mut z = vec![0.0; n];
            for (k, &j) in set.iter().enumerate() {
                z[j] = sub.x[k];
            }
            if set.iter().all(|&j| z[j] > 0.0) {
                x = z;
                break;
            }
            // step back toward the feasible region
            let mut alpha = 1.0f64;
            for &j in &set {
                if z[j] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[j]));
                }
            }
            for j in 0..n {
                x[j] += alpha * (z[j] - x[j]);
                if passive[j] && x[j] <= 1e-15 * scale.max(1.0) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let rank = passive.iter().filter(|&&p| p).count();
    Ok(LeastSquares { x, rank })
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let n = a.rows;
    if n != a.cols {
        return Err(Error::InvalidParameter("eigenvalues need a square matrix".into()));
    }
    let mut m = a.clone();
    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| m.get(i, j).powi(2)).sum();
        let diag: f64 = (0..n).map(|i| m.get(i, i).powi(2)).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            let mut ev: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let (mpk, mqk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
            }
        }
    }
    Err(Error::NoConvergence { what: "Jacobi eigenvalues", iterations: max_sweeps })
}

/// Smallest eigenvalue of the Hermitian Gram matrix `f(x_j - x_k)`,
/// computed through its real symmetric embedding `[[A, -B], [B, A]]`.
/// A positive-definite `f` gives a value `>= 0` up to rounding.
pub fn gram_min_eigenvalue(points: &[f64], f: impl Fn(f64) -> Complex64) -> Result<f64> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Empty("gram points"));
    }
    let mut g = Matrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let v = f(points[j] - points[k]);
            g.set(j, k, v.re);
            g.set(j + n, k + n, v.re);
            g.set(j, k + n, -v.im);
            g.set(j + n, k, v.im);
        }
    }
    Ok(symmetric_eigenvalues(&g)?[0])
}
