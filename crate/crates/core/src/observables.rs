//! Expectation values and the virial-like report.
//!
//! Integrals are nodal quadratures taken element by element, so a potential
//! that jumps at an element boundary is evaluated from each side with that
//! side's share of the node weight. ⟨VT⟩ multiplies V into Tψ. ⟨TV⟩ lets the
//! kinetic operator act on the product Vψ through its weak form, with the
//! boundary flux added back wherever Vψ jumps.
//! Variances and cross terms are formed from centered operators
//! (T - ⟨T⟩, V - ⟨V⟩) to avoid cancellation when ⟨T⟩⟨V⟩ is large.

use crate::eigensolve::{centrifugal, element_potentials, Eigenstate};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::model::{confining_potential_sided, interior_potential_sided, Side, SystemKind, SystemSpec};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationSet {
    pub t: f64,
    pub v: f64,
    pub t2: f64,
    pub v2: f64,
    pub tv: f64,
    pub vt: f64,
    pub v_interior: f64,
    pub v_conf: f64,
    pub cross_vvc: f64,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialReport {
    pub dT2: f64,
    pub dV2: f64,
    pub cross1: f64,
    pub cross2: f64,
    pub spread: f64,
    pub t2_eq6: f64,
    pub t2_gap: f64,
    pub dH2: f64,
    pub energy: f64,
}

impl VirialReport {
    pub const FIELDS: [&'static str; 9] = [
        "dT2", "dV2", "cross1", "cross2", "spread", "t2_eq6", "t2_gap", "dH2", "energy",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.dT2,
            self.dV2,
            self.cross1,
            self.cross2,
            self.spread,
            self.t2_eq6,
            self.t2_gap,
            self.dH2,
            self.energy,
        ]
    }
}

/// Tψ = -½ψ'' + ℓ(ℓ+1)/(2r²) ψ on the grid nodes.
pub fn apply_kinetic(grid: &RadialGrid, psi: &[f64], ell: u32) -> Result<Vec<f64>> {
    if psi.len() != grid.len() {
        return Err(Error::Parameter(format!(
            "{} samples on a grid of {} nodes",
            psi.len(),
            grid.len()
        )));
    }
    let d2 = grid.second_derivative(psi);
    let l = ell as f64;
    Ok(d2
        .iter()
        .zip(psi)
        .zip(&grid.nodes)
        .map(|((d, p), r)| {
            let cent = if ell > 0 { 0.5 * l * (l + 1.0) / (r * r) } else { 0.0 };
            -0.5 * d + cent * p
        })
        .collect())
}

/// t2 = E(E - 2v) + v2.
pub fn t_squared_via_energy(e: f64, v: f64, v2: f64) -> f64 {
    e * (e - 2.0 * v) + v2
}

fn effective_ell(sys: &SystemSpec) -> u32 {
    if sys.kind == SystemKind::Cho1d {
        0
    } else {
        sys.ell
    }
}

/// Quadrature points as (element, local node) pairs with one-sided potentials.
struct Samples {
    node: Vec<usize>,
    w: Vec<f64>,
    v: Vec<f64>,
    v_in: Vec<f64>,
    v_c: Vec<f64>,
}

fn samples(sys: &SystemSpec, grid: &RadialGrid) -> Result<Samples> {
    let vt = element_potentials(sys, grid)?;
    let mut s = Samples {
        node: Vec::new(),
        w: Vec::new(),
        v: Vec::new(),
        v_in: Vec::new(),
        v_c: Vec::new(),
    };
    for (el, vals) in grid.elements.iter().zip(&vt) {
        for q in 0..el.len() {
            let r = if el.at_lo(q) {
                el.lo
            } else if el.at_hi(q) {
                el.hi
            } else {
                el.nodes[q]
            };
            let side = if el.at_hi(q) { Side::Below } else { Side::Above };
            s.node.push(el.first + q);
            s.w.push(el.weights[q]);
            s.v.push(vals[q]);
            s.v_in.push(interior_potential_sided(sys, r, side)?);
            s.v_c.push(confining_potential_sided(sys, r, side)?);
        }
    }
    Ok(s)
}

/// ⟨ψ | T f⟩ for a function given by one-sided samples `f` (same layout as
/// [`Samples`]), with T acting on f through the weak form.
fn kinetic_on_product(grid: &RadialGrid, psi: &[f64], f: &[f64], cent: &[f64], s: &Samples) -> f64 {
    let mut total = 0.0;
    let mut p = 0;
    let mut f_lo = vec![f64::NAN; grid.elements.len()];
    let mut f_hi = vec![f64::NAN; grid.elements.len()];
    for (e, el) in grid.elements.iter().enumerate() {
        let m = el.len();
        let fe = &f[p..p + m];
        let pe = &psi[el.first..el.first + m];
        let kp = el.stiffness.mul_vec(pe);
        total += 0.5 * fe.iter().zip(&kp).map(|(a, b)| a * b).sum::<f64>();
        for q in 0..m {
            total += s.w[p + q] * cent[el.first + q] * fe[q] * pe[q];
        }
        f_lo[e] = fe[0];
        f_hi[e] = fe[m - 1];
        p += m;
    }
    // flux where f jumps between neighbouring elements
    let dpsi = grid.d1.mul_vec(psi);
    for e in 1..grid.elements.len() {
        let jump = f_lo[e] - f_hi[e - 1];
        if jump != 0.0 {
            total += 0.5 * dpsi[grid.elements[e].first] * jump;
        }
    }
    total
}

struct Moments {
    ex: ExpectationSet,
    d_t2: f64,
    d_v2: f64,
    cross1: f64,
    cross2: f64,
}

fn moments(sys: &SystemSpec, es: &Eigenstate) -> Result<Moments> {
    let grid = &es.grid;
    let psi = &es.psi;
    if psi.len() != grid.len() {
        return Err(Error::Parameter("state does not match its grid".into()));
    }
    let norm = grid.inner(psi, psi);
    let resid = (norm - 1.0).abs();
    if !(resid <= 1e-8) {
        return Err(Error::Contract(resid));
    }
    let s = samples(sys, grid)?;
    let tpsi = apply_kinetic(grid, psi, effective_ell(sys))?;
    let cent = centrifugal(sys, grid);

    let n = grid.len();
    let mut vbar = vec![0.0; n];
    for k in 0..s.node.len() {
        vbar[s.node[k]] += s.w[k] * s.v[k];
    }
    for i in 0..n {
        vbar[i] /= grid.weights[i];
    }

    let t = grid.inner(psi, &tpsi);
    // one-sided kinetic samples: Tψ + Vψ is continuous, so each side takes
    // the node average corrected by its own potential
    let tp: Vec<f64> = (0..s.node.len())
        .map(|k| {
            let i = s.node[k];
            tpsi[i] + (vbar[i] - s.v[k]) * psi[i]
        })
        .collect();

    let mut v = 0.0;
    let mut t2 = 0.0;
    let mut v2 = 0.0;
    let mut vt = 0.0;
    let mut v_in = 0.0;
    let mut v_c = 0.0;
    let mut vvc = 0.0;
    for k in 0..s.node.len() {
        let p = psi[s.node[k]];
        let w = s.w[k];
        v += w * s.v[k] * p * p;
        t2 += w * tp[k] * tp[k];
        v2 += w * s.v[k] * s.v[k] * p * p;
        vt += w * s.v[k] * p * tp[k];
        v_in += w * s.v_in[k] * p * p;
        v_c += w * s.v_c[k] * p * p;
        vvc += w * s.v_in[k] * s.v_c[k] * p * p;
    }
    let f: Vec<f64> = (0..s.node.len()).map(|k| s.v[k] * psi[s.node[k]]).collect();
    let tv = kinetic_on_product(grid, psi, &f, &cent, &s);

    let mut d_t2 = 0.0;
    let mut d_v2 = 0.0;
    let mut c2 = 0.0;
    let mut fv_mean = 0.0;
    for k in 0..s.node.len() {
        let p = psi[s.node[k]];
        let w = s.w[k];
        let dt = tp[k] - t * p;
        let dv = (s.v[k] - v) * p;
        d_t2 += w * dt * dt;
        d_v2 += w * dv * dv;
        c2 -= w * dv * dt;
        fv_mean += w * dv * p;
    }
    let fc: Vec<f64> = (0..s.node.len()).map(|k| (s.v[k] - v) * psi[s.node[k]]).collect();
    let c1 = -(kinetic_on_product(grid, psi, &fc, &cent, &s) - t * fv_mean);

    let hard = sys.is_hard();
    let ex = ExpectationSet {
        t,
        v,
        t2,
        v2,
        tv,
        vt,
        v_interior: v_in,
        v_conf: if hard { 0.0 } else { v_c },
        cross_vvc: if hard { 0.0 } else { vvc },
    };
    Ok(Moments {
        ex,
        d_t2,
        d_v2,
        cross1: c1,
        cross2: c2,
    })
}

pub fn expectation_set(sys: &SystemSpec, es: &Eigenstate) -> Result<ExpectationSet> {
    moments(sys, es).map(|m| m.ex)
}

pub fn virial_report(sys: &SystemSpec, es: &Eigenstate) -> Result<VirialReport> {
    let m = moments(sys, es)?;
    let four = [m.d_t2, m.d_v2, m.cross1, m.cross2];
    let mut spread = 0.0_f64;
    for i in 0..4 {
        for j in 0..i {
            spread = spread.max((four[i] - four[j]).abs());
        }
    }
    let t2_eq6 = t_squared_via_energy(es.energy, m.ex.v, m.ex.v2);
    Ok(VirialReport {
        dT2: m.d_t2,
        dV2: m.d_v2,
        cross1: m.cross1,
        cross2: m.cross2,
        spread,
        t2_eq6,
        t2_gap: (m.ex.t2 - t2_eq6).abs(),
        dH2: m.d_t2 + m.d_v2 - m.cross1 - m.cross2,
        energy: es.energy,
    })
}

/// ((ΔT)²(ΔV)², |⟨TV⟩ - ⟨T⟩⟨V⟩|²).
pub fn schwartz_check(sys: &SystemSpec, es: &Eigenstate) -> Result<(f64, f64)> {
    let m = moments(sys, es)?;
    Ok((m.d_t2 * m.d_v2, m.cross1 * m.cross1))
}

/// (a + c b)/√(1 + c²) for two orthonormal states on the same grid. The
/// result carries ⟨H⟩ as its energy and is not an eigenstate.
pub fn superpose(a: &Eigenstate, b: &Eigenstate, c: f64) -> Result<Eigenstate> {
    if !Arc::ptr_eq(&a.grid, &b.grid) || a.system != b.system {
        return Err(Error::Parameter("states must share system and grid".into()));
    }
    let s = (1.0 + c * c).sqrt();
    let mut psi: Vec<f64> = a.psi.iter().zip(&b.psi).map(|(x, y)| (x + c * y) / s).collect();
    let nrm = a.grid.inner(&psi, &psi).sqrt();
    psi.iter_mut().for_each(|v| *v /= nrm);
    let mut out = Eigenstate {
        energy: 0.0,
        node_count: crate::eigensolve::count_nodes(&psi),
        norm_residual: (a.grid.inner(&psi, &psi) - 1.0).abs(),
        psi,
        system: a.system.clone(),
        state: a.state,
        grid: a.grid.clone(),
    };
    let ex = expectation_set(&a.system, &out)?;
    out.energy = ex.t + ex.v;
    Ok(out)
}
