//! Bound eigenpairs from the discretized Hamiltonian, and independent
//! shooting on the closed-form solutions.

use crate::error::{Error, Result};
use crate::grid::{build_grid, RadialGrid};
use crate::linalg::{symmetric_eigen_lowest, Matrix};
use crate::model::{
    analytic_wavefunction, solve_domain, total_potential_sided, Domain, Side, StateSpec, SystemKind,
    SystemSpec,
};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const GRID_ENV: &str = "CONFINIUM_GRID_N";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub initial_rmax: f64,
    pub growth: f64,
    pub energy_tol: f64,
    pub max_rounds: usize,
    /// Polynomial degree per element.
    pub grid_n: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            initial_rmax: 30.0,
            growth: 1.5,
            energy_tol: 1e-9,
            max_rounds: 8,
            grid_n: 32,
        }
    }
}

impl TruncationPolicy {
    /// Defaults, with `grid_n` taken from the environment when set.
    pub fn from_env() -> Result<Self> {
        let mut p = Self::default();
        if let Ok(v) = std::env::var(GRID_ENV) {
            p.grid_n = v
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("{GRID_ENV}='{v}' is not a positive integer")))?;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.growth > 1.0) {
            return Err(Error::Parameter(format!("growth must be > 1, got {}", self.growth)));
        }
        if !(self.energy_tol > 0.0) || !(self.initial_rmax > 0.0) {
            return Err(Error::Parameter("tolerances and initial_rmax must be > 0".into()));
        }
        if self.grid_n < crate::grid::MIN_DEGREE || self.grid_n > 512 {
            return Err(Error::Parameter(format!(
                "grid_n must lie in [{}, 512], got {}",
                crate::grid::MIN_DEGREE,
                self.grid_n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenstate {
    pub energy: f64,
    pub psi: Vec<f64>,
    pub node_count: usize,
    pub norm_residual: f64,
    pub system: SystemSpec,
    pub state: StateSpec,
    #[serde(skip)]
    pub grid: Arc<RadialGrid>,
}

impl Eigenstate {
    pub fn nodes(&self) -> &[f64] {
        &self.grid.nodes
    }
}

/// Potential values per element and local node, taking the one-sided limit
/// at element ends so that jumps at breakpoints are seen from each side.
pub fn element_potentials(sys: &SystemSpec, grid: &RadialGrid) -> Result<Vec<Vec<f64>>> {
    grid.elements
        .iter()
        .map(|el| {
            (0..el.len())
                .map(|q| {
                    let r = if el.at_lo(q) {
                        el.lo
                    } else if el.at_hi(q) {
                        el.hi
                    } else {
                        el.nodes[q]
                    };
                    let side = if el.at_hi(q) { Side::Below } else { Side::Above };
                    let v = total_potential_sided(sys, r, side)?;
                    if !v.is_finite() {
                        return Err(Error::Assembly { r, value: v });
                    }
                    Ok(v)
                })
                .collect()
        })
        .collect()
}

/// Weight-averaged potential at each global node.
pub fn nodal_potential(sys: &SystemSpec, grid: &RadialGrid) -> Result<Vec<f64>> {
    let per = element_potentials(sys, grid)?;
    let mut acc = vec![0.0; grid.len()];
    for (el, vals) in grid.elements.iter().zip(&per) {
        for q in 0..el.len() {
            acc[el.first + q] += el.weights[q] * vals[q];
        }
    }
    Ok(acc.iter().zip(&grid.weights).map(|(a, w)| a / w).collect())
}

/// ℓ(ℓ+1)/(2r²) at the nodes (zero in one dimension or for ℓ = 0).
pub fn centrifugal(sys: &SystemSpec, grid: &RadialGrid) -> Vec<f64> {
    let l = sys.ell as f64;
    if sys.kind == SystemKind::Cho1d || sys.ell == 0 {
        return vec![0.0; grid.len()];
    }
    grid.nodes.iter().map(|r| 0.5 * l * (l + 1.0) / (r * r)).collect()
}

/// Symmetric matrix W^½ H W^-½ of the discretized radial Hamiltonian.
pub fn assemble_hamiltonian(sys: &SystemSpec, grid: &RadialGrid) -> Result<Matrix> {
    let v = nodal_potential(sys, grid)?;
    let cent = centrifugal(sys, grid);
    let n = grid.len();
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        let row = grid.stiffness.row(i);
        for j in 0..n {
            if row[j] != 0.0 {
                h[(i, j)] = 0.5 * row[j] / (sw[i] * sw[j]);
            }
        }
        h[(i, i)] += v[i] + cent[i];
    }
    // the stiffness is symmetric up to roundoff; make it exact
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = m;
            h[(j, i)] = m;
        }
    }
    Ok(h)
}

/// Samples this small relative to the peak are treated as numerical zeros
/// when counting nodes and fixing the sign; decaying tails sit at roundoff
/// level and would otherwise flip sign at random.
const SIGN_FLOOR: f64 = 1e-9;

pub fn count_nodes(psi: &[f64]) -> usize {
    let peak = psi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut last = 0i8;
    let mut count = 0;
    for &v in psi {
        if v.abs() <= SIGN_FLOOR * peak {
            continue;
        }
        let s = if v > 0.0 { 1 } else { -1 };
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn fix_sign(psi: &mut [f64]) {
    let peak = psi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(first) = psi.iter().find(|v| v.abs() > SIGN_FLOOR * peak) {
        if *first < 0.0 {
            psi.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// The lowest `count` states on a fixed grid, without the bound-state filter.
pub fn solve_on_grid(sys: &SystemSpec, grid: Arc<RadialGrid>, count: usize) -> Result<Vec<Eigenstate>> {
    let h = assemble_hamiltonian(sys, &grid)?;
    let count = count.min(grid.len());
    let (vals, vecs) = symmetric_eigen_lowest(&h, count)?;
    let mut out = Vec::with_capacity(count);
    for (k, y) in vecs.into_iter().enumerate() {
        let mut psi: Vec<f64> = y.iter().zip(&grid.weights).map(|(v, w)| v / w.sqrt()).collect();
        let norm = grid.inner(&psi, &psi);
        let s = norm.sqrt();
        psi.iter_mut().for_each(|v| *v /= s);
        fix_sign(&mut psi);
        let norm_residual = (grid.inner(&psi, &psi) - 1.0).abs();
        out.push(Eigenstate {
            energy: vals[k],
            node_count: count_nodes(&psi),
            psi,
            norm_residual,
            system: sys.clone(),
            state: StateSpec::new(k as u32),
            grid: grid.clone(),
        });
    }
    Ok(out)
}

fn bound_only(sys: &SystemSpec, states: Vec<Eigenstate>, count: usize) -> Result<Vec<Eigenstate>> {
    let threshold = sys.continuum_threshold();
    let bound: Vec<Eigenstate> = states.into_iter().filter(|s| s.energy < threshold).collect();
    if bound.len() < count {
        return Err(Error::PartialResult {
            requested: count,
            threshold,
            found: bound.iter().map(|s| s.energy).collect(),
        });
    }
    Ok(bound)
}

/// The `count` lowest bound states at the system's angular momentum.
pub fn solve_bound_states(sys: &SystemSpec, count: usize, policy: &TruncationPolicy) -> Result<Vec<Eigenstate>> {
    if count == 0 {
        return Err(Error::Parameter("count must be >= 1".into()));
    }
    sys.validate()?;
    policy.validate()?;
    let dom = if sys.is_hard() {
        solve_domain(sys, policy)?
    } else {
        adapt_domain(sys, &StateSpec::new(count as u32 - 1), policy)?
    };
    let grid = Arc::new(build_grid(&dom, policy.grid_n)?);
    let states = solve_on_grid(sys, grid, count)?;
    bound_only(sys, states, count)
}

/// A single state.
pub fn solve_state(sys: &SystemSpec, st: &StateSpec, policy: &TruncationPolicy) -> Result<Eigenstate> {
    let mut all = solve_bound_states(sys, st.n_index as usize + 1, policy)?;
    Ok(all.swap_remove(st.n_index as usize))
}

fn grown(dom: &Domain, factor: f64) -> Domain {
    let hi = dom.hi * factor;
    let mut d = dom.with_hi(hi);
    if dom.lo < 0.0 {
        d.lo = -hi;
    }
    d
}

/// Eigenvalues of the dense problem carry an absolute error of order
/// eps·‖H‖, which small elements make large.
fn roundoff_floor(grid: &RadialGrid) -> f64 {
    let hmax = (0..grid.len())
        .map(|i| 0.5 * grid.stiffness[(i, i)] / grid.weights[i])
        .fold(0.0_f64, f64::max);
    64.0 * f64::EPSILON * hmax
}

fn energy_on(sys: &SystemSpec, dom: &Domain, st: &StateSpec, policy: &TruncationPolicy) -> Result<(f64, f64)> {
    let grid = Arc::new(build_grid(dom, policy.grid_n)?);
    let floor = roundoff_floor(&grid);
    let n = st.n_index as usize + 1;
    let states = bound_only(sys, solve_on_grid(sys, grid, n)?, n)?;
    Ok((states[st.n_index as usize].energy, floor))
}

/// Grows the truncation radius until the target level is stable.
pub fn adapt_domain(sys: &SystemSpec, st: &StateSpec, policy: &TruncationPolicy) -> Result<Domain> {
    let mut dom = solve_domain(sys, policy)?;
    if sys.is_hard() {
        return Ok(dom);
    }
    let mut trace = Vec::new();
    let mut prev: Option<f64> = None;
    let mut short: Option<usize> = None;
    for _ in 0..=policy.max_rounds {
        match energy_on(sys, &dom, st, policy) {
            Ok((e, floor)) => {
                trace.push(e);
                if let Some(p) = prev {
                    if (e - p).abs() < (policy.energy_tol * e.abs().max(1.0)).max(floor) {
                        return Ok(dom);
                    }
                }
                prev = Some(e);
            }
            // not yet bound on this box; a second round with no new level
            // means the well holds no more
            Err(Error::PartialResult { requested, threshold, found }) => {
                if short == Some(found.len()) {
                    return Err(Error::PartialResult { requested, threshold, found });
                }
                short = Some(found.len());
                prev = None;
            }
            Err(e) => return Err(e),
        }
        dom = grown(&dom, policy.growth);
    }
    Err(Error::Convergence {
        rounds: policy.max_rounds,
        trace,
    })
}

fn shoot_wall(sys: &SystemSpec) -> Result<f64> {
    let wall = match sys.kind {
        SystemKind::Cho1d => sys.x_c(),
        SystemKind::Cho3d | SystemKind::Cha => sys.r_c(),
        other => return Err(Error::Unsupported(format!("no shooting form for {other}"))),
    };
    if !wall.is_finite() {
        return Err(Error::Parameter("shooting needs a finite wall".into()));
    }
    Ok(wall)
}

/// Root of the closed-form solution at the wall, by Brent's method.
pub fn shoot_energy(sys: &SystemSpec, st: &StateSpec, bracket: (f64, f64), tol: f64) -> Result<f64> {
    sys.validate()?;
    let wall = shoot_wall(sys)?;
    let f = |e: f64| analytic_wavefunction(sys, st, e, wall);
    brent(f, bracket.0, bracket.1, tol)
}

/// Brent's root finder on a sign-changing bracket.
pub fn brent(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::Convergence {
        rounds: 200,
        trace: vec![b],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn box_levels() {
        let s = solve_bound_states(&SystemSpec::cho1d(1.0, 0.1), 2, &policy()).unwrap();
        assert!((s[0].energy - 123.3707084678).abs() < 1e-7 * 123.37);
        assert!((s[1].energy - 493.48163341761).abs() < 1e-7 * 493.48);
        assert_eq!(s[0].node_count, 0);
        assert_eq!(s[1].node_count, 1);
    }

    #[test]
    fn assembly_examples() {
        let s = solve_bound_states(&SystemSpec::cha(1.0, 0), 1, &policy()).unwrap();
        assert!((s[0].energy - 2.373990866100).abs() < 1e-9);
        let s = solve_bound_states(&SystemSpec::cho1d(1.0, f64::INFINITY), 2, &policy()).unwrap();
        assert!((s[0].energy - 0.5).abs() < 1e-10);
        assert!((s[1].energy - 1.5).abs() < 1e-10);
        let s = solve_bound_states(&SystemSpec::cho3d(1.0, 0.5, 1), 1, &policy()).unwrap();
        assert!((s[0].energy - 40.428276496).abs() < 1e-7 * 40.43);
    }

    #[test]
    fn free_hydrogen() {
        let s = solve_bound_states(&SystemSpec::cha(f64::INFINITY, 0), 2, &policy()).unwrap();
        assert!((s[0].energy + 0.5).abs() < 1e-10, "{}", s[0].energy);
        assert!((s[1].energy + 0.125).abs() < 1e-10, "{}", s[1].energy);
        let s = solve_bound_states(&SystemSpec::cha(f64::INFINITY, 1), 1, &policy()).unwrap();
        assert!((s[0].energy + 0.125).abs() < 1e-10);
    }

    #[test]
    fn normalized_orthogonal_signed() {
        let s = solve_bound_states(&SystemSpec::scha(0.5, 2.0, 0), 3, &policy()).unwrap();
        let g = &s[0].grid;
        for (i, a) in s.iter().enumerate() {
            assert!(a.norm_residual < 1e-12);
            assert!(a.psi[0] > 0.0);
            assert_eq!(a.node_count, i);
            for b in &s[..i] {
                assert!(g.inner(&a.psi, &b.psi).abs() < 1e-10);
            }
        }
        assert!(s.windows(2).all(|w| w[0].energy < w[1].energy));
    }

    #[test]
    fn partial_result_for_missing_states() {
        // a shallow step holds only a few s levels
        let sys = SystemSpec::spcha(0.01, 1.0, 0);
        match solve_bound_states(&sys, 6, &policy()) {
            Err(Error::PartialResult { requested, found, .. }) => {
                assert_eq!(requested, 6);
                assert!(found.len() < 6);
            }
            other => panic!("expected partial result, got {other:?}"),
        }
    }

    #[test]
    fn shooting_examples() {
        let e = shoot_energy(&SystemSpec::cho1d(1.0, 0.1), &StateSpec::new(0), (120.0, 126.0), 1e-12).unwrap();
        assert!((e - 123.37070846785).abs() < 1e-9);
        let e = shoot_energy(&SystemSpec::cho3d(1.0, 0.1, 0), &StateSpec::new(1), (1900.0, 2000.0), 1e-12).unwrap();
        // high-precision root of M((3/2 - E)/2, 3/2, 0.01)
        assert!((e - 1973.9224835589535).abs() < 1e-8);
        let e = shoot_energy(&SystemSpec::cha(1.0, 0), &StateSpec::new(0), (2.0, 3.0), 1e-13).unwrap();
        assert!((e - 2.373990866100).abs() < 1e-10);
        // a large wall approaches the free level
        let e = shoot_energy(&SystemSpec::cha(40.0, 0), &StateSpec::new(0), (-0.6, -0.4), 1e-13).unwrap();
        assert!((e + 0.5).abs() < 1e-12);
        let r = shoot_energy(&SystemSpec::cha(1.0, 0), &StateSpec::new(0), (2.5, 3.0), 1e-12);
        assert!(matches!(r, Err(Error::Bracketing { .. })));
        let r = shoot_energy(&SystemSpec::hicha(1.0, 2.0, 0), &StateSpec::new(0), (0.0, 1.0), 1e-12);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn adapt_free_hydrogen() {
        let d = adapt_domain(&SystemSpec::cha(f64::INFINITY, 0), &StateSpec::new(0), &policy()).unwrap();
        assert!(d.hi >= 30.0);
        assert_eq!(d.hi_boundary, crate::model::Boundary::DecayTruncation);
    }

    #[test]
    fn policy_validation() {
        let mut p = policy();
        p.growth = 1.0;
        assert!(p.validate().is_err());
        let mut p = policy();
        p.grid_n = 8;
        assert!(p.validate().is_err());
    }

    #[test]
    fn node_counting_ignores_roundoff_tail() {
        assert_eq!(count_nodes(&[0.0, 0.5, 1.0, 0.3, 1e-18, -1e-19, 2e-20]), 0);
        assert_eq!(count_nodes(&[0.1, 0.5, -1.0, -0.3, 0.2]), 2);
        assert_eq!(count_nodes(&[0.1, 0.0, -0.1]), 1);
    }
}
