//! Dense row-major matrices and a symmetric eigensolver: Householder
//! reduction to tridiagonal form, implicit QL for the eigenvalues, and
//! inverse iteration for the few eigenvectors that are wanted.

use crate::error::{Error, Result};
use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    // scaled to avoid overflow on tiny/huge entries
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * a.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>().sqrt()
}

/// Householder reduction Q^T A Q = T of a symmetric matrix.
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    // reflector k acts on entries k+1..n; stored as (v, beta)
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl Tridiagonal {
    pub fn reduce(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Eigen(format!("matrix is {}x{}, not square", n, a.cols())));
        }
        if a.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("matrix has non-finite entries".into()));
        }
        let mut m = a.clone();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![0.0; n];
        for k in 0..n.saturating_sub(2) {
            let len = n - k - 1;
            let mut v: Vec<f64> = (k + 1..n).map(|i| m[(i, k)]).collect();
            let alpha_norm = norm(&v);
            let x0 = v[0];
            diag[k] = m[(k, k)];
            if alpha_norm == 0.0 || (alpha_norm == x0.abs() && v[1..].iter().all(|x| *x == 0.0)) {
                off[k] = x0;
                reflectors.push((vec![0.0; len], 0.0));
                continue;
            }
            let alpha = if x0 >= 0.0 { -alpha_norm } else { alpha_norm };
            v[0] = x0 - alpha;
            let vtv = dot(&v, &v);
            let beta = 2.0 / vtv;
            off[k] = alpha;
            // p = beta * A22 v
            for (ii, i) in (k + 1..n).enumerate() {
                let row = &m.row(i)[k + 1..n];
                p[ii] = beta * dot(row, &v);
            }
            let pv = dot(&p[..len], &v);
            let c = 0.5 * beta * pv;
            for ii in 0..len {
                p[ii] -= c * v[ii];
            }
            // A22 -= v p^T + p v^T
            for (ii, i) in (k + 1..n).enumerate() {
                let vi = v[ii];
                let pi = p[ii];
                let row = &mut m.row_mut(i)[k + 1..n];
                for jj in 0..len {
                    row[jj] -= vi * p[jj] + pi * v[jj];
                }
            }
            reflectors.push((v, beta));
        }
        if n >= 2 {
            diag[n - 2] = m[(n - 2, n - 2)];
            off[n - 2] = m[(n - 1, n - 2)];
        }
        if n >= 1 {
            diag[n - 1] = m[(n - 1, n - 1)];
        }
        Ok(Tridiagonal {
            diag,
            off,
            reflectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Maps a vector from the tridiagonal basis back to the original one.
    pub fn back_transform(&self, x: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let seg = &mut x[k + 1..];
            let s = beta * dot(v, seg);
            for (xi, vi) in seg.iter_mut().zip(v) {
                *xi -= s * vi;
            }
        }
    }

    /// All eigenvalues, ascending, by implicit QL with Wilkinson shifts.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = vec![0.0; n];
        e[..n.saturating_sub(1)].copy_from_slice(&self.off);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::Eigen(format!("QL failed to converge at index {l}")));
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut i = m;
                let mut early = false;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        early = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if early {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(d)
    }

    /// Eigenvector of the tridiagonal matrix for a converged eigenvalue,
    /// by inverse iteration, orthogonalized against `previous`.
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.dim();
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let scale = self
            .diag
            .iter()
            .map(|v| v.abs())
            .chain(self.off.iter().map(|v| 2.0 * v.abs()))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let shift = lambda + 4.0 * f64::EPSILON * scale;
        let lu = TriLu::factor(&self.diag, &self.off, shift, scale);
        // deterministic, generic start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 * 0.618_033_988_749_895).fract() - 0.5))
            .collect();
        for _ in 0..4 {
            lu.solve(&mut x);
            orthogonalize(&mut x, previous);
            let nx = norm(&x);
            if nx == 0.0 || !nx.is_finite() {
                return Err(Error::Eigen("inverse iteration broke down".into()));
            }
            x.iter_mut().for_each(|v| *v /= nx);
        }
        Ok(x)
    }
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= c * bi;
            }
        }
    }
}

/// LU factorization with partial pivoting of T - shift*I.
struct TriLu {
    // row i of U holds u0[i] at column i, u1[i] at i+1, u2[i] at i+2
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    fn factor(d: &[f64], e: &[f64], shift: f64, scale: f64) -> Self {
        let n = d.len();
        let tiny = f64::EPSILON * scale;
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        // current row being eliminated: (a, b, c) at columns i, i+1, i+2
        let mut a = d[0] - shift;
        let mut b = if n > 1 { e[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..n - 1 {
            let below = e[i];
            let below_diag = d[i + 1] - shift;
            let below_next = if i + 1 < n - 1 { e[i + 1] } else { 0.0 };
            if below.abs() > a.abs() {
                // swap rows i and i+1
                swapped[i] = true;
                u0[i] = below;
                u1[i] = below_diag;
                u2[i] = below_next;
                let m = a / below;
                mult[i] = m;
                a = b - m * below_diag;
                b = c - m * below_next;
                c = 0.0;
            } else {
                if a == 0.0 {
                    a = tiny;
                }
                u0[i] = a;
                u1[i] = b;
                u2[i] = c;
                let m = below / a;
                mult[i] = m;
                a = below_diag - m * b;
                b = below_next - m * c;
                c = 0.0;
            }
        }
        if a == 0.0 {
            a = tiny;
        }
        u0[n - 1] = a;
        TriLu {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.mult[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}

/// Lowest `count` eigenpairs of a symmetric matrix: all eigenvalues (ascending)
/// and unit eigenvectors for the first `count`.
pub fn symmetric_eigen_lowest(a: &Matrix, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.rows();
    if count > n {
        return Err(Error::Eigen(format!("{count} eigenpairs requested from a {n}x{n} matrix")));
    }
    let tri = Tridiagonal::reduce(a)?;
    let vals = tri.eigenvalues()?;
    let mut tvecs: Vec<Vec<f64>> = Vec::with_capacity(count);
    for &lam in vals.iter().take(count) {
        let v = tri.eigenvector(lam, &tvecs)?;
        tvecs.push(v);
    }
    let vecs = tvecs
        .into_iter()
        .map(|mut v| {
            tri.back_transform(&mut v);
            v
        })
        .collect();
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &Matrix, lam: f64, v: &[f64]) -> f64 {
        let av = a.mul_vec(v);
        av.iter().zip(v).map(|(x, y)| (x - lam * y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn toeplitz_spectrum() {
        let n = 60;
        let a = Matrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let (vals, vecs) = symmetric_eigen_lowest(&a, 5).unwrap();
        for (k, lam) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((lam - exact).abs() < 1e-13, "{k}: {lam} vs {exact}");
        }
        for (k, v) in vecs.iter().enumerate() {
            assert!(residual(&a, vals[k], v) < 1e-12);
        }
    }

    #[test]
    fn dense_random_like() {
        let n = 40;
        let a = Matrix::from_fn(n, n, |i, j| {
            let (p, q) = (i.min(j) as f64, i.max(j) as f64);
            ((p * 1.3 + q * 0.7).sin() + if i == j { p * 0.5 } else { 0.0 }) / (1.0 + (p - q).abs())
        });
        let (vals, vecs) = symmetric_eigen_lowest(&a, n).unwrap();
        let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
        assert!((vals.iter().sum::<f64>() - trace).abs() < 1e-11);
        for (k, v) in vecs.iter().enumerate() {
            assert!(residual(&a, vals[k], v) < 1e-11, "residual {k}");
            for w in &vecs[..k] {
                assert!(dot(v, w).abs() < 1e-10);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn degenerate_pair() {
        let a = Matrix::from_fn(4, 4, |i, j| if i == j { [1.0, 1.0, 3.0, 5.0][i] } else { 0.0 });
        let (vals, vecs) = symmetric_eigen_lowest(&a, 2).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 3.0, 5.0]);
        assert!(dot(&vecs[0], &vecs[1]).abs() < 1e-12);
        for (k, v) in vecs.iter().enumerate() {
            assert!(residual(&a, vals[k], v) < 1e-12);
        }
    }

    #[test]
    fn rejects_nan() {
        let mut a = Matrix::identity(3);
        a[(1, 1)] = f64::NAN;
        assert!(symmetric_eigen_lowest(&a, 1).is_err());
    }
}
