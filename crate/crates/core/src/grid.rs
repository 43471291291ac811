//! Spectral-element discretization of a one-dimensional domain.
//!
//! Interior elements carry Gauss–Lobatto nodes and share their end nodes
//! with neighbours. An element that touches a zero boundary drops the node
//! on that boundary: its basis functions carry a factor (1±x) so they vanish
//! there, and the remaining nodes are Gauss–Radau (one wall) or Gauss (two
//! walls) points. The mass matrix is the diagonal of nodal weights; the
//! stiffness matrix is integrated exactly.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::Domain;

/// Legendre P_n(x) and P_n'(x).
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint value
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

fn newton(mut x: f64, f: impl Fn(f64) -> (f64, f64)) -> f64 {
    for _ in 0..100 {
        let (v, d) = f(x);
        let dx = v / d;
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-3) {
            break;
        }
    }
    x
}

/// Gauss–Legendre rule with m points on [-1, 1].
pub fn gauss(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m {
        let guess = -(std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let xi = newton(guess, |t| legendre(m, t));
        let (_, dp) = legendre(m, xi);
        x[i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    (x, w)
}

/// Gauss–Lobatto rule with m points (both endpoints included).
pub fn lobatto(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 2);
    let n = m - 1;
    let nf = n as f64;
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    x[0] = -1.0;
    x[n] = 1.0;
    for i in 1..n {
        let guess = -(std::f64::consts::PI * i as f64 / nf).cos();
        // roots of P_n'; (1-x^2) P_n'' = 2x P_n' - n(n+1) P_n
        x[i] = newton(guess, |t| {
            let (p, dp) = legendre(n, t);
            let d2 = (2.0 * t * dp - nf * (nf + 1.0) * p) / (1.0 - t * t);
            (dp, d2)
        });
    }
    for i in 0..m {
        let (p, _) = legendre(n, x[i]);
        w[i] = 2.0 / (nf * (nf + 1.0) * p * p);
    }
    (x, w)
}

/// Gauss–Radau rule with m points including x = -1.
pub fn radau_left(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mf = m as f64;
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    x[0] = -1.0;
    w[0] = 2.0 / (mf * mf);
    for i in 1..m {
        let guess = -(2.0 * std::f64::consts::PI * i as f64 / (2.0 * mf - 1.0)).cos();
        // roots of (P_{m-1} + P_m) / (1 + x)
        let xi = newton(guess, |t| {
            let (a, da) = legendre(m - 1, t);
            let (b, db) = legendre(m, t);
            (a + b, da + db)
        });
        let (p, _) = legendre(m - 1, xi);
        x[i] = xi;
        w[i] = (1.0 - xi) / (mf * mf * p * p);
    }
    (x, w)
}

/// Barycentric weights of a node set.
fn bary_weights(x: &[f64]) -> Vec<f64> {
    let m = x.len();
    (0..m)
        .map(|j| {
            let mut p = 1.0;
            for k in 0..m {
                if k != j {
                    // factor 2 keeps the product near unit magnitude
                    p *= 2.0 * (x[j] - x[k]);
                }
            }
            1.0 / p
        })
        .collect()
}

/// Lagrange differentiation matrix D[i][j] = l_j'(x_i).
fn lagrange_diff(x: &[f64]) -> Matrix {
    let m = x.len();
    let lam = bary_weights(x);
    let mut d = Matrix::zeros(m, m);
    for i in 0..m {
        let mut diag = 0.0;
        for j in 0..m {
            if i != j {
                let v = lam[j] / lam[i] / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Values and derivatives of the Lagrange basis of `x` at a point `y` not in `x`.
fn lagrange_at(x: &[f64], lam: &[f64], y: f64) -> (Vec<f64>, Vec<f64>) {
    let m = x.len();
    let mut l = vec![0.0; m];
    let mut dl = vec![0.0; m];
    let big_l: f64 = x.iter().map(|xk| 2.0 * (y - xk)).product();
    let inv: Vec<f64> = x.iter().map(|xk| 1.0 / (y - xk)).collect();
    let total: f64 = inv.iter().sum();
    for j in 0..m {
        l[j] = big_l * lam[j] * inv[j] * 0.5;
        dl[j] = l[j] * (total - inv[j]);
    }
    (l, dl)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Lobatto,
    WallLo,
    WallHi,
    WallBoth,
}

/// One element: its reference operators scaled to physical size.
#[derive(Debug, Clone)]
pub struct Element {
    pub lo: f64,
    pub hi: f64,
    /// Global index of the first local node.
    pub first: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Derivative of the element basis at the local nodes.
    pub deriv: Matrix,
    /// Plain Lagrange derivative on the local nodes (no wall factor).
    pub lagrange_deriv: Matrix,
    /// Exact local stiffness ∫ φ_i' φ_j'.
    pub stiffness: Matrix,
    pub wall_lo: bool,
    pub wall_hi: bool,
}

impl Element {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when local node `q` sits on the lower end of the element
    /// (shared with the previous one).
    pub fn at_lo(&self, q: usize) -> bool {
        q == 0 && !self.wall_lo
    }

    pub fn at_hi(&self, q: usize) -> bool {
        q + 1 == self.len() && !self.wall_hi
    }

    fn build(lo: f64, hi: f64, degree: usize, kind: Kind, first: usize) -> Element {
        let (xr, wr) = match kind {
            Kind::Lobatto => lobatto(degree + 1),
            Kind::WallLo => {
                let (x, w) = radau_left(degree);
                // mirror: keep +1, drop -1
                let x: Vec<f64> = x.iter().rev().map(|v| -v).collect();
                let w: Vec<f64> = w.into_iter().rev().collect();
                (x, w)
            }
            Kind::WallHi => radau_left(degree),
            Kind::WallBoth => gauss(degree - 1),
        };
        let m = xr.len();
        let bubble = |t: f64| -> (f64, f64) {
            match kind {
                Kind::Lobatto => (1.0, 0.0),
                Kind::WallLo => (1.0 + t, 1.0),
                Kind::WallHi => (1.0 - t, -1.0),
                Kind::WallBoth => (1.0 - t * t, -2.0 * t),
            }
        };
        let dl = lagrange_diff(&xr);
        let mut d = Matrix::zeros(m, m);
        for q in 0..m {
            let (bq, dbq) = bubble(xr[q]);
            for j in 0..m {
                let (bj, _) = bubble(xr[j]);
                let delta = if q == j { 1.0 } else { 0.0 };
                d[(q, j)] = (dbq * delta + bq * dl[(q, j)]) / bj;
            }
        }
        let jac = 0.5 * (hi - lo);
        let mut k = Matrix::zeros(m, m);
        if kind == Kind::WallBoth {
            // the nodal rule is one degree short here; use a richer Gauss rule
            let (y, wy) = gauss(m + 1);
            let lam = bary_weights(&xr);
            let bj: Vec<f64> = xr.iter().map(|&t| bubble(t).0).collect();
            for (yq, wq) in y.iter().zip(&wy) {
                let (l, dlv) = lagrange_at(&xr, &lam, *yq);
                let (b, db) = bubble(*yq);
                let phi: Vec<f64> = (0..m).map(|j| (db * l[j] + b * dlv[j]) / bj[j]).collect();
                for i in 0..m {
                    for j in 0..m {
                        k[(i, j)] += wq * phi[i] * phi[j];
                    }
                }
            }
        } else {
            for q in 0..m {
                for i in 0..m {
                    let di = d[(q, i)] * wr[q];
                    for j in 0..m {
                        k[(i, j)] += di * d[(q, j)];
                    }
                }
            }
        }
        // physical scaling
        let mut deriv = d;
        let mut ldiff = dl;
        for i in 0..m {
            for j in 0..m {
                deriv[(i, j)] /= jac;
                ldiff[(i, j)] /= jac;
                k[(i, j)] /= jac;
            }
        }
        let nodes = xr.iter().map(|t| lo + (t + 1.0) * jac).collect();
        let weights = wr.iter().map(|w| w * jac).collect();
        Element {
            lo,
            hi,
            first,
            nodes,
            weights,
            deriv,
            lagrange_deriv: ldiff,
            stiffness: k,
            wall_lo: matches!(kind, Kind::WallLo | Kind::WallBoth),
            wall_hi: matches!(kind, Kind::WallHi | Kind::WallBoth),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub domain: Domain,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// First derivative (averaged at shared nodes).
    pub d1: Matrix,
    /// Second derivative in the weak sense, -W^-1 K.
    pub d2: Matrix,
    /// Global stiffness K.
    pub stiffness: Matrix,
    pub elements: Vec<Element>,
    pub degree: usize,
}

pub const MIN_DEGREE: usize = 16;

/// Element boundaries for a domain: breakpoints and refinement points are
/// kept exactly, the rest is filled with elements no longer than the target
/// length (geometrically graded from `lo` when requested).
pub fn element_edges(dom: &Domain) -> Vec<f64> {
    let (lo, hi) = (dom.lo, dom.hi);
    let len = hi - lo;
    let mut fixed: Vec<f64> = dom.breakpoints.clone();
    for r in &dom.refinements {
        let mut s = r.width;
        fixed.push(r.at);
        while s < len {
            for p in [r.at - s, r.at + s] {
                if p > lo && p < hi {
                    fixed.push(p);
                }
            }
            s *= 3.0;
        }
    }
    fixed.retain(|p| *p > lo && *p < hi);
    fixed.push(lo);
    fixed.push(hi);
    fixed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fixed.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * len);

    let h = dom.element_length.min(len);
    let mut edges = vec![lo];
    for win in fixed.windows(2) {
        let (a, b) = (win[0], win[1]);
        let span = b - a;
        if dom.graded && a == lo {
            // small elements at the origin, growing by 1.5
            let mut x = a;
            let mut step = (0.25 * h).min(span);
            while b - x > 1.5 * step {
                x += step;
                edges.push(x);
                step = (step * 1.5).min(h);
            }
        } else {
            let count = (span / h).ceil().max(1.0) as usize;
            for i in 1..count {
                edges.push(a + span * i as f64 / count as f64);
            }
        }
        edges.push(b);
    }
    edges
}

/// Builds the discretization with `degree` as the polynomial degree per element.
pub fn build_grid(dom: &Domain, degree: usize) -> Result<RadialGrid> {
    dom.check()?;
    if degree < MIN_DEGREE {
        return Err(Error::Parameter(format!("degree per element must be >= {MIN_DEGREE}, got {degree}")));
    }
    let edges = element_edges(dom);
    let ne = edges.len() - 1;
    let mut elements = Vec::with_capacity(ne);
    let mut first = 0usize;
    for e in 0..ne {
        let wl = e == 0;
        let wh = e == ne - 1;
        let kind = match (wl, wh) {
            (true, true) => Kind::WallBoth,
            (true, false) => Kind::WallLo,
            (false, true) => Kind::WallHi,
            (false, false) => Kind::Lobatto,
        };
        let el = Element::build(edges[e], edges[e + 1], degree, kind, first);
        // next element starts at this one's last node (shared)
        first += el.len() - 1;
        elements.push(el);
    }
    let n = first + 1;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut k = Matrix::zeros(n, n);
    let mut d1 = Matrix::zeros(n, n);
    let mut d1_count = vec![0.0; n];
    for el in &elements {
        for q in 0..el.len() {
            let g = el.first + q;
            nodes[g] = el.nodes[q];
            weights[g] += el.weights[q];
            d1_count[g] += 1.0;
            for j in 0..el.len() {
                k[(g, el.first + j)] += el.stiffness[(q, j)];
                d1[(g, el.first + j)] += el.deriv[(q, j)];
            }
        }
    }
    // shared end nodes get an exact element boundary position
    for el in &elements {
        if !el.wall_lo {
            nodes[el.first] = el.lo;
        }
        if !el.wall_hi {
            nodes[el.first + el.len() - 1] = el.hi;
        }
    }
    for i in 0..n {
        if d1_count[i] > 1.0 {
            for v in d1.row_mut(i) {
                *v /= d1_count[i];
            }
        }
    }
    let mut d2 = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d2[(i, j)] = -k[(i, j)] / weights[i];
        }
    }
    Ok(RadialGrid {
        domain: dom.clone(),
        nodes,
        weights,
        d1,
        d2,
        stiffness: k,
        elements,
        degree,
    })
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature of f(x_i) g(x_i).
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Weak second derivative: -W^-1 K f.
    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        let kf = self.stiffness.mul_vec(f);
        kf.iter().zip(&self.weights).map(|(v, w)| -v / w).collect()
    }
}
