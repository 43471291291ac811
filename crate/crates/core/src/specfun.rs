//! Confluent hypergeometric function of the first kind, M(a, b, z) = 1F1(a; b; z).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Hard cap on the number of series terms.
pub const TERM_CAP: usize = 100_000;
/// Largest |z| accepted by [`kummer_m`]. Beyond this e^z overflows anyway.
pub const Z_GUARD: f64 = 700.0;

const REL_STOP: f64 = 1e-16;
const QUIET_TERMS: usize = 3;
// rescaling threshold for the exponent-carrying variant
const BIG: f64 = 1e200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KummerParams {
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl KummerParams {
    pub fn new(a: f64, b: f64, z: f64) -> Self {
        Self { a, b, z }
    }

    fn check(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.z.is_finite()) {
            return Err(Error::Parameter(format!(
                "1F1 arguments must be finite, got a={}, b={}, z={}",
                self.a, self.b, self.z
            )));
        }
        if self.b <= 0.0 && self.b == self.b.round() {
            return Err(Error::Parameter(format!(
                "1F1 is undefined for b = {} (zero or a negative integer)",
                self.b
            )));
        }
        Ok(())
    }
}

/// Result of a series evaluation. `terms` counts the terms added, so a
/// polynomial case with a = -n reports n + 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
}

/// Sums the series with term recurrence and compensated addition.
/// Returns `(s, shift, terms)` with M = s * e^shift; large partial sums are
/// rescaled on the fly so a damping exponential can be folded in later.
fn sum_scaled(p: KummerParams) -> Result<(f64, f64, usize)> {
    p.check()?;
    let KummerParams { a, b, z } = p;
    let mut sum = 1.0_f64;
    let mut comp = 0.0_f64;
    let mut term = 1.0_f64;
    let mut log_shift = 0.0_f64;
    let mut quiet = 0;
    let mut terms = 1;
    for k in 0..TERM_CAP {
        let kf = k as f64;
        term *= (a + kf) / ((b + kf) * (kf + 1.0)) * z;
        if term == 0.0 {
            return Ok((sum + comp, log_shift, terms));
        }
        // Kahan step
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        terms += 1;

        if sum.abs() > BIG {
            sum /= BIG;
            comp /= BIG;
            term /= BIG;
            log_shift += BIG.ln();
        }

        if term.abs() <= REL_STOP * sum.abs() {
            quiet += 1;
            if quiet >= QUIET_TERMS {
                return Ok((sum, log_shift, terms));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence {
        a,
        b,
        z,
        terms: TERM_CAP,
        partial: sum * log_shift.exp(),
    })
}

/// Series evaluation with term count.
pub fn kummer_series(p: KummerParams) -> Result<SeriesSum> {
    if p.z.abs() > Z_GUARD {
        return Err(Error::Parameter(format!(
            "|z| = {} exceeds the overflow guard {}",
            p.z.abs(),
            Z_GUARD
        )));
    }
    let (s, shift, terms) = sum_scaled(p)?;
    Ok(SeriesSum {
        value: s * shift.exp(),
        terms,
    })
}

/// M(a, b, z).
pub fn kummer_m(p: KummerParams) -> Result<f64> {
    kummer_series(p).map(|s| s.value)
}

/// dM/dz = (a/b) M(a+1, b+1, z).
pub fn kummer_m_dz(p: KummerParams) -> Result<f64> {
    p.check()?;
    let inner = kummer_m(KummerParams::new(p.a + 1.0, p.b + 1.0, p.z))?;
    Ok(p.a / p.b * inner)
}

/// M(a, b, z) * e^c, combined so that neither factor over- or underflows on
/// its own. Used for closed-form wavefunctions where the series grows like
/// e^z and is damped by a Gaussian or exponential.
pub fn kummer_m_exp(p: KummerParams, c: f64) -> Result<f64> {
    let (s, shift, _) = sum_scaled(p)?;
    Ok(s * (shift + c).exp())
}
