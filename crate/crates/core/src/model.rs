//! The seven systems, their potentials, solve domains and closed-form
//! wavefunctions.
//!
//! Hartree units throughout, Z = 1. The harmonic kinds use v = ½ω²x² (or r²).
//! The power-law cavity uses (r/r_c)^k with general k in every integral;
//! some published formulas for its moments write the exponent as 2 in
//! places where k is meant.

use crate::eigensolve::TruncationPolicy;
use crate::error::{Error, Result};
use crate::specfun::{kummer_m_exp, KummerParams};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemKind {
    #[serde(rename = "CHO1D")]
    Cho1d,
    #[serde(rename = "CHO3D")]
    Cho3d,
    #[serde(rename = "CHA")]
    Cha,
    #[serde(rename = "SCHA")]
    Scha,
    #[serde(rename = "HICHA")]
    Hicha,
    #[serde(rename = "SPCHA")]
    Spcha,
    #[serde(rename = "HPCHA")]
    Hpcha,
}

impl SystemKind {
    pub const ALL: [SystemKind; 7] = [
        SystemKind::Cho1d,
        SystemKind::Cho3d,
        SystemKind::Cha,
        SystemKind::Scha,
        SystemKind::Hicha,
        SystemKind::Spcha,
        SystemKind::Hpcha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Cho1d => "CHO1D",
            SystemKind::Cho3d => "CHO3D",
            SystemKind::Cha => "CHA",
            SystemKind::Scha => "SCHA",
            SystemKind::Hicha => "HICHA",
            SystemKind::Spcha => "SPCHA",
            SystemKind::Hpcha => "HPCHA",
        }
    }

    /// Coulomb attraction -1/r present.
    pub fn is_coulomb(self) -> bool {
        !matches!(self, SystemKind::Cho1d | SystemKind::Cho3d)
    }

    pub fn is_radial(self) -> bool {
        self != SystemKind::Cho1d
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown system kind '{s}'")))
    }
}

/// Parses a real number, accepting `inf` / `infinity` for an absent wall.
pub fn parse_real(s: &str) -> Result<f64> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "∞" => return Ok(f64::INFINITY),
        _ => {}
    }
    t.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| Error::Parameter(format!("not a number: '{s}'")))
}

/// `inf` for infinite values, shortest round-trip form otherwise.
pub fn format_real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

mod opt_real {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() => s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" }),
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_none(),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(x)) => Ok(Some(x)),
            Some(Raw::Text(t)) => parse_real(&t).map(Some).map_err(serde::de::Error::custom),
        }
    }
}

/// One physical system with exactly the parameters its kind uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub x_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub r_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub r_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub r_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub k: Option<f64>,
    #[serde(rename = "V0", default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub v0: Option<f64>,
    #[serde(rename = "U0", default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub u0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_real")]
    pub w: Option<f64>,
    #[serde(default)]
    pub ell: u32,
}

impl SystemSpec {
    fn bare(kind: SystemKind) -> Self {
        SystemSpec {
            kind,
            omega: None,
            x_c: None,
            r_c: None,
            r_a: None,
            r_b: None,
            k: None,
            v0: None,
            u0: None,
            w: None,
            ell: 0,
        }
    }

    /// Defaults for a kind: unit frequency, k = 2, U0 = 10, w = 1000, no wall.
    pub fn default_for(kind: SystemKind) -> Self {
        let mut s = Self::bare(kind);
        match kind {
            SystemKind::Cho1d => {
                s.omega = Some(1.0);
                s.x_c = Some(f64::INFINITY);
            }
            SystemKind::Cho3d => {
                s.omega = Some(1.0);
                s.r_c = Some(f64::INFINITY);
            }
            SystemKind::Cha => s.r_c = Some(f64::INFINITY),
            SystemKind::Scha => {
                s.r_a = Some(1.0);
                s.r_b = Some(5.0);
            }
            SystemKind::Hicha => {
                s.r_c = Some(f64::INFINITY);
                s.k = Some(2.0);
            }
            SystemKind::Spcha => {
                s.r_c = Some(f64::INFINITY);
                s.v0 = Some(0.0);
            }
            SystemKind::Hpcha => {
                s.r_c = Some(f64::INFINITY);
                s.u0 = Some(10.0);
                s.w = Some(1000.0);
            }
        }
        s
    }

    pub fn cho1d(omega: f64, x_c: f64) -> Self {
        let mut s = Self::bare(SystemKind::Cho1d);
        s.omega = Some(omega);
        s.x_c = Some(x_c);
        s
    }

    pub fn cho3d(omega: f64, r_c: f64, ell: u32) -> Self {
        let mut s = Self::bare(SystemKind::Cho3d);
        s.omega = Some(omega);
        s.r_c = Some(r_c);
        s.ell = ell;
        s
    }

    pub fn cha(r_c: f64, ell: u32) -> Self {
        let mut s = Self::bare(SystemKind::Cha);
        s.r_c = Some(r_c);
        s.ell = ell;
        s
    }

    pub fn scha(r_a: f64, r_b: f64, ell: u32) -> Self {
        let mut s = Self::bare(SystemKind::Scha);
        s.r_a = Some(r_a);
        s.r_b = Some(r_b);
        s.ell = ell;
        s
    }

    pub fn hicha(r_c: f64, k: f64, ell: u32) -> Self {
        let mut s = Self::bare(SystemKind::Hicha);
        s.r_c = Some(r_c);
        s.k = Some(k);
        s.ell = ell;
        s
    }

    pub fn spcha(v0: f64, r_c: f64, ell: u32) -> Self {
        let mut s = Self::bare(SystemKind::Spcha);
        s.v0 = Some(v0);
        s.r_c = Some(r_c);
        s.ell = ell;
        s
    }

    pub fn hpcha(u0: f64, w: f64, r_c: f64, ell: u32) -> Self {
        let mut s = Self::bare(SystemKind::Hpcha);
        s.u0 = Some(u0);
        s.w = Some(w);
        s.r_c = Some(r_c);
        s.ell = ell;
        s
    }

    pub fn with_ell(mut self, ell: u32) -> Self {
        self.ell = ell;
        self
    }

    fn need(&self, name: &str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| Error::Parameter(format!("{} requires {name}", self.kind)))
    }

    pub fn omega(&self) -> f64 {
        self.omega.unwrap_or(1.0)
    }
    pub fn r_c(&self) -> f64 {
        self.r_c.unwrap_or(f64::INFINITY)
    }
    pub fn x_c(&self) -> f64 {
        self.x_c.unwrap_or(f64::INFINITY)
    }
    pub fn k(&self) -> f64 {
        self.k.unwrap_or(2.0)
    }
    pub fn v0(&self) -> f64 {
        self.v0.unwrap_or(0.0)
    }
    pub fn u0(&self) -> f64 {
        self.u0.unwrap_or(0.0)
    }
    pub fn w(&self) -> f64 {
        self.w.unwrap_or(1000.0)
    }

    /// Names of the parameters this kind uses.
    pub fn parameter_names(kind: SystemKind) -> &'static [&'static str] {
        match kind {
            SystemKind::Cho1d => &["omega", "x_c"],
            SystemKind::Cho3d => &["omega", "r_c", "ell"],
            SystemKind::Cha => &["r_c", "ell"],
            SystemKind::Scha => &["r_a", "r_b", "ell"],
            SystemKind::Hicha => &["r_c", "k", "ell"],
            SystemKind::Spcha => &["V0", "r_c", "ell"],
            SystemKind::Hpcha => &["U0", "w", "r_c", "ell"],
        }
    }

    /// Checks the per-kind invariants.
    pub fn validate(&self) -> Result<()> {
        let names = Self::parameter_names(self.kind);
        let set: [(&str, Option<f64>); 9] = [
            ("omega", self.omega),
            ("x_c", self.x_c),
            ("r_c", self.r_c),
            ("r_a", self.r_a),
            ("r_b", self.r_b),
            ("k", self.k),
            ("V0", self.v0),
            ("U0", self.u0),
            ("w", self.w),
        ];
        for (name, v) in set {
            let used = names.contains(&name);
            match (used, v) {
                (true, None) => return Err(Error::Parameter(format!("{} requires {name}", self.kind))),
                (false, Some(_)) => {
                    return Err(Error::Parameter(format!("{} does not take {name}", self.kind)))
                }
                (true, Some(x)) if x.is_nan() => {
                    return Err(Error::Parameter(format!("{name} is NaN")))
                }
                _ => {}
            }
        }
        let pos = |name: &str, x: f64| {
            if x > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be > 0, got {x}")))
            }
        };
        let finite_pos = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} must be finite and > 0, got {x}")))
            }
        };
        match self.kind {
            SystemKind::Cho1d => {
                finite_pos("omega", self.need("omega", self.omega)?)?;
                pos("x_c", self.need("x_c", self.x_c)?)?;
            }
            SystemKind::Cho3d => {
                finite_pos("omega", self.need("omega", self.omega)?)?;
                pos("r_c", self.need("r_c", self.r_c)?)?;
            }
            SystemKind::Cha => pos("r_c", self.need("r_c", self.r_c)?)?,
            SystemKind::Scha => {
                let a = self.need("r_a", self.r_a)?;
                let b = self.need("r_b", self.r_b)?;
                finite_pos("r_a", a)?;
                finite_pos("r_b", b)?;
                if a >= b {
                    return Err(Error::Parameter(format!("need r_a < r_b, got {a} >= {b}")));
                }
            }
            SystemKind::Hicha => {
                pos("r_c", self.need("r_c", self.r_c)?)?;
                let k = self.need("k", self.k)?;
                if !(k > 1.0 && k.is_finite()) {
                    return Err(Error::Parameter(format!("k must be finite and > 1, got {k}")));
                }
            }
            SystemKind::Spcha => {
                pos("r_c", self.need("r_c", self.r_c)?)?;
                let v0 = self.need("V0", self.v0)?;
                if !(v0 >= 0.0) {
                    return Err(Error::Parameter(format!("V0 must be >= 0, got {v0}")));
                }
            }
            SystemKind::Hpcha => {
                pos("r_c", self.need("r_c", self.r_c)?)?;
                let u0 = self.need("U0", self.u0)?;
                if !(u0 >= 0.0 && u0.is_finite()) {
                    return Err(Error::Parameter(format!("U0 must be finite and >= 0, got {u0}")));
                }
                finite_pos("w", self.need("w", self.w)?)?;
            }
        }
        Ok(())
    }

    /// Sets a named parameter. Accepts the field names plus the short
    /// forms used by flags (`xc`, `rc`, `ra`, `rb`, `v0`, `u0`).
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let canon = canonical_param(name)
            .ok_or_else(|| Error::Parameter(format!("unknown parameter '{name}'")))?;
        if !Self::parameter_names(self.kind).contains(&canon) {
            return Err(Error::Parameter(format!("{} does not take {canon}", self.kind)));
        }
        match canon {
            "omega" => self.omega = Some(value),
            "x_c" => self.x_c = Some(value),
            "r_c" => self.r_c = Some(value),
            "r_a" => self.r_a = Some(value),
            "r_b" => self.r_b = Some(value),
            "k" => self.k = Some(value),
            "V0" => self.v0 = Some(value),
            "U0" => self.u0 = Some(value),
            "w" => self.w = Some(value),
            "ell" => {
                if !(value >= 0.0 && value.fract() == 0.0 && value < 1e6) {
                    return Err(Error::Parameter(format!("ell must be a non-negative integer, got {value}")));
                }
                self.ell = value as u32
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    /// Hard confinement: every boundary is an infinite wall (no decaying tail).
    pub fn is_hard(&self) -> bool {
        match self.kind {
            SystemKind::Cho1d => self.x_c().is_finite(),
            SystemKind::Cho3d | SystemKind::Cha => self.r_c().is_finite(),
            SystemKind::Scha => true,
            SystemKind::Spcha => self.v0().is_infinite(),
            SystemKind::Hicha | SystemKind::Hpcha => false,
        }
    }

    /// Position of the outer wall for hard kinds.
    pub fn wall(&self) -> Option<f64> {
        if !self.is_hard() {
            return None;
        }
        Some(match self.kind {
            SystemKind::Cho1d => self.x_c(),
            SystemKind::Scha => self.r_b.unwrap_or(f64::NAN),
            _ => self.r_c(),
        })
    }

    /// Energy above which states are not bound (continuum threshold).
    pub fn continuum_threshold(&self) -> f64 {
        if self.is_hard() {
            return f64::INFINITY;
        }
        match self.kind {
            SystemKind::Cho1d | SystemKind::Cho3d => f64::INFINITY,
            SystemKind::Hicha => {
                if self.r_c().is_finite() {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            SystemKind::Spcha => {
                if self.r_c().is_finite() {
                    self.v0()
                } else {
                    0.0
                }
            }
            SystemKind::Hpcha => {
                if self.r_c().is_finite() {
                    self.u0()
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }
}

/// Maps flag/data-file spellings onto field names.
pub fn canonical_param(name: &str) -> Option<&'static str> {
    Some(match name.trim() {
        "omega" | "w0" => "omega",
        "x_c" | "xc" => "x_c",
        "r_c" | "rc" => "r_c",
        "r_a" | "ra" => "r_a",
        "r_b" | "rb" => "r_b",
        "k" => "k",
        "V0" | "v0" => "V0",
        "U0" | "u0" => "U0",
        "w" => "w",
        "ell" | "l" => "ell",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// A state at fixed angular momentum, indexed by its node count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateSpec {
    pub n_index: u32,
}

impl StateSpec {
    pub fn new(n_index: u32) -> Self {
        StateSpec { n_index }
    }

    pub fn parity(&self) -> Parity {
        if self.n_index % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Display label: `n=3` in one dimension, `2s`-style otherwise.
    pub fn label(&self, sys: &SystemSpec) -> String {
        let l = sys.ell;
        match sys.kind {
            SystemKind::Cho1d => format!("n={}", self.n_index),
            SystemKind::Cho3d => format!("{}{}", self.n_index + 1, ell_letter(l)),
            _ => format!("{}{}", self.n_index + l + 1, ell_letter(l)),
        }
    }

    /// Parses `n=2`, a bare integer, or a spectroscopic label such as `2p`.
    /// Returns the state and, for labels, the angular momentum they imply.
    pub fn parse(kind: SystemKind, text: &str) -> Result<(StateSpec, Option<u32>)> {
        let t = text.trim();
        let bad = || Error::Parameter(format!("cannot parse state '{text}'"));
        if let Some(rest) = t.strip_prefix("n=").or_else(|| t.strip_prefix("n_r=")) {
            let n = rest.trim().parse::<u32>().map_err(|_| bad())?;
            return Ok((StateSpec::new(n), None));
        }
        if let Ok(n) = t.parse::<u32>() {
            return Ok((StateSpec::new(n), None));
        }
        let split = t.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let (num, letter) = t.split_at(split);
        let n: u32 = num.parse().map_err(|_| bad())?;
        let l = letter_ell(letter).ok_or_else(bad)?;
        if kind == SystemKind::Cho1d {
            return Err(Error::Parameter(format!(
                "CHO1D states are given as n=<index>, not '{text}'"
            )));
        }
        let n_index = if kind == SystemKind::Cho3d {
            n.checked_sub(1).ok_or_else(bad)?
        } else {
            if n < l + 1 {
                return Err(Error::Parameter(format!("no {text} state: need n > l")));
            }
            n - l - 1
        };
        Ok((StateSpec::new(n_index), Some(l)))
    }
}

const LETTERS: &[u8] = b"spdfghiklmnoqrtuv";

fn ell_letter(l: u32) -> String {
    LETTERS
        .get(l as usize)
        .map(|c| (*c as char).to_string())
        .unwrap_or_else(|| format!("[l={l}]"))
}

fn letter_ell(s: &str) -> Option<u32> {
    if s.len() != 1 {
        return None;
    }
    let c = s.as_bytes()[0].to_ascii_lowercase();
    LETTERS.iter().position(|&x| x == c).map(|p| p as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    DirichletWall,
    DecayTruncation,
}

/// A narrow feature of the potential that needs small elements around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub at: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub lo_boundary: Boundary,
    pub hi_boundary: Boundary,
    /// Interior points where the potential jumps.
    pub breakpoints: Vec<f64>,
    /// Target element length away from refinements.
    pub element_length: f64,
    /// Grade element sizes geometrically away from `lo`.
    pub graded: bool,
    pub refinements: Vec<Refinement>,
}

impl Domain {
    pub fn new(lo: f64, hi: f64, lo_boundary: Boundary, hi_boundary: Boundary) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Parameter(format!("degenerate domain [{lo}, {hi}]")));
        }
        Ok(Domain {
            lo,
            hi,
            lo_boundary,
            hi_boundary,
            breakpoints: Vec::new(),
            element_length: hi - lo,
            graded: false,
            refinements: Vec::new(),
        })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn check(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Parameter(format!("degenerate domain [{}, {}]", self.lo, self.hi)));
        }
        let mut prev = self.lo;
        for &b in &self.breakpoints {
            if !(b > prev && b < self.hi) {
                return Err(Error::Parameter(format!(
                    "breakpoint {b} not strictly inside ({}, {}) in increasing order",
                    self.lo, self.hi
                )));
            }
            prev = b;
        }
        if !(self.element_length > 0.0) {
            return Err(Error::Parameter("element length must be > 0".into()));
        }
        Ok(())
    }

    /// Same layout with a different outer truncation radius.
    pub fn with_hi(&self, hi: f64) -> Domain {
        let mut d = self.clone();
        d.hi = hi;
        d.breakpoints.retain(|&b| b < hi);
        d.refinements.retain(|r| r.at < hi);
        d
    }
}

/// Which one-sided limit to take at a point where the potential jumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

fn coulomb(r: f64) -> Result<f64> {
    if r > 0.0 {
        Ok(-1.0 / r)
    } else {
        Err(Error::Parameter(format!("Coulomb potential evaluated at r = {r}")))
    }
}

/// v(r): the unconfined part of the potential.
pub fn interior_potential(sys: &SystemSpec, r: f64) -> Result<f64> {
    interior_potential_sided(sys, r, Side::Above)
}

pub fn interior_potential_sided(sys: &SystemSpec, r: f64, side: Side) -> Result<f64> {
    match sys.kind {
        SystemKind::Cho1d | SystemKind::Cho3d => {
            let w = sys.omega();
            Ok(0.5 * w * w * r * r)
        }
        SystemKind::Spcha => {
            let rc = sys.r_c();
            if r > rc || (r == rc && side == Side::Above) {
                Ok(0.0)
            } else {
                coulomb(r)
            }
        }
        _ => coulomb(r),
    }
}

/// v_c(r): the confining part. Infinite outside hard walls.
pub fn confining_potential(sys: &SystemSpec, r: f64) -> Result<f64> {
    confining_potential_sided(sys, r, Side::Above)
}

pub fn confining_potential_sided(sys: &SystemSpec, r: f64, side: Side) -> Result<f64> {
    if r.is_nan() {
        return Err(Error::Parameter("r is NaN".into()));
    }
    Ok(match sys.kind {
        SystemKind::Cho1d => {
            if r.abs() > sys.x_c() {
                f64::INFINITY
            } else {
                0.0
            }
        }
        SystemKind::Cho3d | SystemKind::Cha => {
            if r > sys.r_c() {
                f64::INFINITY
            } else {
                0.0
            }
        }
        SystemKind::Scha => {
            let (a, b) = (sys.r_a.unwrap_or(0.0), sys.r_b.unwrap_or(f64::INFINITY));
            if r < a || r > b {
                f64::INFINITY
            } else {
                0.0
            }
        }
        SystemKind::Hicha => {
            let rc = sys.r_c();
            if rc.is_infinite() {
                0.0
            } else {
                (r / rc).powf(sys.k())
            }
        }
        SystemKind::Spcha => {
            let rc = sys.r_c();
            if r > rc || (r == rc && side == Side::Above) {
                sys.v0()
            } else {
                0.0
            }
        }
        SystemKind::Hpcha => {
            let rc = sys.r_c();
            let u0 = sys.u0();
            if rc.is_infinite() || u0 == 0.0 {
                0.0
            } else {
                let x = sys.w() * (1.0 - r / rc);
                if x > 700.0 {
                    0.0
                } else {
                    u0 / (x.exp() + 1.0)
                }
            }
        }
    })
}

/// v(r) + v_c(r).
pub fn total_potential(sys: &SystemSpec, r: f64) -> Result<f64> {
    total_potential_sided(sys, r, Side::Above)
}

pub fn total_potential_sided(sys: &SystemSpec, r: f64, side: Side) -> Result<f64> {
    let vc = confining_potential_sided(sys, r, side)?;
    if vc.is_infinite() {
        return Ok(vc);
    }
    Ok(interior_potential_sided(sys, r, side)? + vc)
}

/// Unnormalized closed-form solution regular at the origin, for energy `e`,
/// evaluated at `r` (at `x` for the 1D oscillator).
///
/// The Coulomb form is scaled so that it behaves as r^(l+1) near the origin
/// for every energy; above E = 0 it is summed as a real power series.
pub fn analytic_wavefunction(sys: &SystemSpec, st: &StateSpec, e: f64, r: f64) -> Result<f64> {
    if !e.is_finite() || !r.is_finite() {
        return Err(Error::Parameter(format!("non-finite E={e} or r={r}")));
    }
    match sys.kind {
        SystemKind::Cho1d => {
            let w = sys.omega();
            let z = w * r * r;
            match st.parity() {
                Parity::Even => kummer_m_exp(KummerParams::new(0.25 - e / (2.0 * w), 0.5, z), -0.5 * z),
                Parity::Odd => {
                    Ok(r * kummer_m_exp(KummerParams::new(0.75 - e / (2.0 * w), 1.5, z), -0.5 * z)?)
                }
            }
        }
        SystemKind::Cho3d => {
            let w = sys.omega();
            let l = sys.ell as f64;
            let z = w * r * r;
            let m = kummer_m_exp(
                KummerParams::new(0.5 * (l + 1.5 - e / w), l + 1.5, z),
                -0.5 * z,
            )?;
            Ok(r.powi(sys.ell as i32 + 1) * m)
        }
        SystemKind::Cha => {
            let l = sys.ell as f64;
            if e < 0.0 {
                let kappa = (-2.0 * e).sqrt();
                let m = kummer_m_exp(
                    KummerParams::new(l + 1.0 - 1.0 / kappa, 2.0 * l + 2.0, 2.0 * kappa * r),
                    -kappa * r,
                )?;
                Ok(r.powi(sys.ell as i32 + 1) * m)
            } else {
                Ok(r.powi(sys.ell as i32 + 1) * coulomb_series(l, e, r)?)
            }
        }
        other => Err(Error::Unsupported(format!("{other} has no closed-form wavefunction"))),
    }
}

/// Σ c_j r^j with c_0 = 1 and j(j+2l+1) c_j = -2 c_{j-1} - 2E c_{j-2}:
/// the regular Coulomb solution divided by r^(l+1).
fn coulomb_series(l: f64, e: f64, r: f64) -> Result<f64> {
    let (mut c2, mut c1) = (0.0_f64, 1.0_f64);
    let mut sum = 1.0_f64;
    let mut rp = 1.0_f64;
    let mut quiet = 0;
    for j in 1..crate::specfun::TERM_CAP {
        let jf = j as f64;
        let c = (-2.0 * c1 - 2.0 * e * c2) / (jf * (jf + 2.0 * l + 1.0));
        rp *= r;
        let t = c * rp;
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() && (c1 * rp / r).abs() <= 1e-17 * sum.abs() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
        c2 = c1;
        c1 = c;
    }
    Err(Error::NonConvergence {
        a: l,
        b: e,
        z: r,
        terms: crate::specfun::TERM_CAP,
        partial: sum,
    })
}

/// Solve domain with exact walls for hard kinds and an initial truncation
/// radius otherwise. The truncation radius is refined by
/// [`adapt_domain`](crate::eigensolve::adapt_domain).
pub fn solve_domain(sys: &SystemSpec, policy: &TruncationPolicy) -> Result<Domain> {
    use Boundary::*;
    sys.validate()?;
    let hard = sys.is_hard();
    let mut dom = match sys.kind {
        SystemKind::Cho1d => {
            let x_c = sys.x_c();
            let half = if x_c.is_finite() { x_c } else { free_oscillator_extent(sys.omega(), policy) };
            let edge = if x_c.is_finite() { DirichletWall } else { DecayTruncation };
            Domain::new(-half, half, edge, edge)?
        }
        SystemKind::Scha => Domain::new(sys.r_a.unwrap(), sys.r_b.unwrap(), DirichletWall, DirichletWall)?,
        _ => {
            let hi = if hard {
                sys.r_c()
            } else {
                initial_radius(sys, policy)
            };
            Domain::new(0.0, hi, DirichletWall, if hard { DirichletWall } else { DecayTruncation })?
        }
    };

    // element sizing
    let len = dom.length();
    dom.element_length = match sys.kind {
        SystemKind::Cho1d | SystemKind::Cho3d => (3.0 / sys.omega().sqrt()).min(len),
        _ => 3.0_f64.min(len),
    };
    dom.graded = sys.kind.is_coulomb() && !hard;

    match sys.kind {
        SystemKind::Spcha if !hard => {
            let rc = sys.r_c();
            if rc.is_finite() && rc < dom.hi {
                dom.breakpoints.push(rc);
                // element boundaries close on both sides keep the one-sided
                // quadrature of the jump accurate
                dom.refinements.push(Refinement { at: rc, width: 0.25 });
            }
        }
        SystemKind::Hpcha => {
            let rc = sys.r_c();
            if rc.is_finite() && sys.u0() > 0.0 && rc < dom.hi {
                // the step rises over ~rc/w; elements much narrower than a
                // few dozen of those only inflate ‖H‖ and its roundoff
                dom.refinements.push(Refinement {
                    at: rc,
                    width: 30.0 * rc / sys.w(),
                });
            }
        }
        SystemKind::Hicha => {
            let rc = sys.r_c();
            if rc.is_finite() {
                // the power wall sets the length scale
                dom.element_length = dom.element_length.min(hicha_length(sys).max(0.05));
            }
        }
        _ => {}
    }
    dom.check()?;
    Ok(dom)
}

fn free_oscillator_extent(omega: f64, policy: &TruncationPolicy) -> f64 {
    (10.0 / omega.sqrt()).min(policy.initial_rmax)
}

/// Where the wall (r/r_c)^k balances the kinetic scale 1/r².
fn hicha_length(sys: &SystemSpec) -> f64 {
    let k = sys.k();
    sys.r_c().powf(k / (k + 2.0))
}

fn initial_radius(sys: &SystemSpec, policy: &TruncationPolicy) -> f64 {
    match sys.kind {
        SystemKind::Cho3d => free_oscillator_extent(sys.omega(), policy),
        SystemKind::Hicha if sys.r_c().is_finite() => policy.initial_rmax.min(10.0 * hicha_length(sys)),
        _ => {
            let mut r = policy.initial_rmax;
            let rc = sys.r_c();
            if rc.is_finite() && rc * 1.5 > r {
                r = rc * 1.5;
            }
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_examples() {
        assert_eq!(interior_potential(&SystemSpec::cha(1.0, 0), 2.0).unwrap(), -0.5);
        assert_eq!(interior_potential(&SystemSpec::cho1d(1.0, 5.0), 3.0).unwrap(), 4.5);
        assert_eq!(interior_potential(&SystemSpec::cho3d(1.0, 5.0, 0), 1.0).unwrap(), 0.5);
        assert!(interior_potential(&SystemSpec::cha(1.0, 0), 0.0).is_err());
    }

    #[test]
    fn confining_examples() {
        assert_eq!(confining_potential(&SystemSpec::hicha(1.0, 2.0, 0), 0.5).unwrap(), 0.25);
        assert_eq!(
            confining_potential(&SystemSpec::hpcha(10.0, 1000.0, 5.0, 0), 5.0).unwrap(),
            5.0
        );
        let sp = SystemSpec::spcha(4.0, 5.75669, 0);
        assert_eq!(total_potential(&sp, 6.0).unwrap(), 4.0);
        assert_eq!(total_potential(&sp, 2.0).unwrap(), -0.5);
        assert_eq!(total_potential_sided(&sp, 5.75669, Side::Below).unwrap(), -1.0 / 5.75669);
        assert_eq!(total_potential_sided(&sp, 5.75669, Side::Above).unwrap(), 4.0);
    }

    #[test]
    fn hard_walls_are_infinite_outside_and_zero_inside() {
        let cha = SystemSpec::cha(1.0, 0);
        assert_eq!(confining_potential(&cha, 0.5).unwrap(), 0.0);
        assert_eq!(confining_potential(&cha, 1.5).unwrap(), f64::INFINITY);
        let sc = SystemSpec::scha(1.0, 5.0, 0);
        assert_eq!(confining_potential(&sc, 0.5).unwrap(), f64::INFINITY);
        assert_eq!(confining_potential(&sc, 3.0).unwrap(), 0.0);
        let ho = SystemSpec::cho1d(1.0, 0.5);
        assert_eq!(confining_potential(&ho, -0.6).unwrap(), f64::INFINITY);
    }

    #[test]
    fn hpcha_without_barrier_is_free_hydrogen() {
        let free = SystemSpec::cha(f64::INFINITY, 0);
        let hp = SystemSpec::hpcha(0.0, 1000.0, f64::INFINITY, 0);
        for r in [0.01, 0.5, 1.0, 3.7, 20.0] {
            assert_eq!(total_potential(&free, r).unwrap(), total_potential(&hp, r).unwrap());
        }
    }

    #[test]
    fn hicha_at_wall() {
        for k in [1.5, 2.0, 3.0, 7.0] {
            let s = SystemSpec::hicha(2.5, k, 0);
            let v = total_potential(&s, 2.5).unwrap();
            assert!((v - (1.0 - 1.0 / 2.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_examples() {
        let ho = SystemSpec::cho1d(1.0, 1.0);
        let v = analytic_wavefunction(&ho, &StateSpec::new(0), 0.5, 0.0).unwrap();
        assert_eq!(v, 1.0);

        let h = SystemSpec::cha(5.0, 0);
        let a = analytic_wavefunction(&h, &StateSpec::new(0), -0.5, 1.0).unwrap();
        let b = analytic_wavefunction(&h, &StateSpec::new(0), -0.5, 2.0).unwrap();
        // reduced radial: u = r e^{-r}
        assert!(((b / 2.0) / a - (-1.0f64).exp()).abs() < 1e-14);

        let o3 = SystemSpec::cho3d(1.0, 5.0, 0);
        let a = analytic_wavefunction(&o3, &StateSpec::new(0), 1.5, 0.5).unwrap() / 0.5;
        let b = analytic_wavefunction(&o3, &StateSpec::new(0), 1.5, 1.0).unwrap();
        assert!((b / a - (-(1.0 - 0.25) / 2.0f64).exp()).abs() < 1e-14);

        let sc = SystemSpec::scha(1.0, 2.0, 0);
        assert!(matches!(
            analytic_wavefunction(&sc, &StateSpec::new(0), 1.0, 1.5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn coulomb_series_continuous_across_zero_energy() {
        let h = SystemSpec::cha(2.0, 1);
        let st = StateSpec::new(0);
        let below = analytic_wavefunction(&h, &st, -1e-9, 1.7).unwrap();
        let above = analytic_wavefunction(&h, &st, 1e-9, 1.7).unwrap();
        assert!((below - above).abs() < 1e-7 * above.abs());
        let below = analytic_wavefunction(&h, &st, -0.3, 1.7).unwrap();
        let h0 = SystemSpec::cha(2.0, 1);
        // the Kummer branch and the series agree where both are valid
        let series = 1.7f64.powi(2) * coulomb_series(1.0, -0.3, 1.7).unwrap();
        assert!((below - series).abs() < 1e-12 * series.abs(), "{below} {series} {h0:?}");
    }

    #[test]
    fn labels_round_trip() {
        let cases = [
            (SystemKind::Cha, "1s", 0, 0),
            (SystemKind::Cha, "2s", 1, 0),
            (SystemKind::Cha, "2p", 0, 1),
            (SystemKind::Cho3d, "1p", 0, 1),
            (SystemKind::Cho3d, "2s", 1, 0),
        ];
        for (kind, label, n, l) in cases {
            let (st, ell) = StateSpec::parse(kind, label).unwrap();
            assert_eq!((st.n_index, ell), (n, Some(l)));
            let mut sys = SystemSpec::default_for(kind);
            sys.ell = l;
            assert_eq!(st.label(&sys), label);
        }
        let (st, ell) = StateSpec::parse(SystemKind::Cho1d, "n=1").unwrap();
        assert_eq!((st.n_index, ell), (1, None));
        assert_eq!(st.parity(), Parity::Odd);
        assert!(StateSpec::parse(SystemKind::Cha, "1p").is_err());
    }

    #[test]
    fn validate_rejects_bad_specs() {
        assert!(SystemSpec::scha(5.0, 1.0, 0).validate().is_err());
        assert!(SystemSpec::hicha(1.0, 1.0, 0).validate().is_err());
        assert!(SystemSpec::cha(-1.0, 0).validate().is_err());
        let mut s = SystemSpec::cha(1.0, 0);
        s.omega = Some(1.0);
        assert!(s.validate().is_err());
        assert!(SystemSpec::cha(f64::INFINITY, 0).validate().is_ok());
        for kind in SystemKind::ALL {
            SystemSpec::default_for(kind).validate().unwrap();
        }
    }

    #[test]
    fn json_field_names_and_inf() {
        let s = SystemSpec::spcha(f64::INFINITY, 5.80119, 1);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"SPCHA","r_c":5.80119,"V0":"inf","ell":1}"#);
        let back: SystemSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn domains() {
        let p = TruncationPolicy::default();
        let d = solve_domain(&SystemSpec::cha(1.0, 0), &p).unwrap();
        assert_eq!((d.lo, d.hi), (0.0, 1.0));
        assert_eq!(d.lo_boundary, Boundary::DirichletWall);
        assert_eq!(d.hi_boundary, Boundary::DirichletWall);
        let d = solve_domain(&SystemSpec::scha(1.0, 5.0, 0), &p).unwrap();
        assert_eq!((d.lo, d.hi), (1.0, 5.0));
        let d = solve_domain(&SystemSpec::cha(f64::INFINITY, 0), &p).unwrap();
        assert_eq!(d.hi_boundary, Boundary::DecayTruncation);
        let d = solve_domain(&SystemSpec::spcha(4.0, 5.75669, 0), &p).unwrap();
        assert_eq!(d.breakpoints, vec![5.75669]);
        let d = solve_domain(&SystemSpec::spcha(f64::INFINITY, 5.8, 0), &p).unwrap();
        assert_eq!((d.hi, d.hi_boundary), (5.8, Boundary::DirichletWall));
    }
}
