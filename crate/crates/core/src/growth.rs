//! Worst-case volume growth `v_{j+1} = v_j + κ(|U| - v_j)` with
//! `κ = ρ_m / (3·32^{2m})`.
//!
//! Any limit `A < |U|` would have to satisfy `A ≥ A + κ(|U| - A)`, which is
//! impossible; the closed form makes the convergence rate explicit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packing::rho;

pub fn kappa(m: usize) -> f64 {
    rho(m) / (3.0 * 32f64.powi(2 * m as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub m: usize,
    pub u_volume: f64,
    pub v0: f64,
    pub kappa: f64,
}

impl GrowthParams {
    pub fn new(m: usize, u_volume: f64, v0: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("dimension m must be >= 1".into()));
        }
        if !(u_volume > 0.0 && u_volume.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "|U| must be positive, got {u_volume}"
            )));
        }
        if !(0.0..=u_volume).contains(&v0) {
            return Err(Error::InvalidArgument(format!(
                "v0 = {v0} must lie in [0, |U|]"
            )));
        }
        Ok(GrowthParams {
            m,
            u_volume,
            v0,
            kappa: kappa(m),
        })
    }

    fn step(&self, v: f64) -> f64 {
        v + self.kappa * (self.u_volume - v)
    }
}

/// `v_0, …, v_steps` by direct iteration.
pub fn iterate(p: &GrowthParams, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut v = p.v0;
    out.push(v);
    for _ in 0..steps {
        v = p.step(v);
        out.push(v);
    }
    out
}

/// `|U| - (|U| - v_0)(1 - κ)^j`, evaluated without cancellation.
pub fn closed_form(p: &GrowthParams, j: usize) -> f64 {
    // (1-κ)^j - 1 = expm1(j·ln(1-κ))
    let decay_minus_one = (j as f64 * (-p.kappa).ln_1p()).exp_m1();
    p.v0 - (p.u_volume - p.v0) * decay_minus_one
}

/// Remaining gap `|U| - v_j = (|U| - v_0)(1 - κ)^j`.
pub fn gap(p: &GrowthParams, j: usize) -> f64 {
    (p.u_volume - p.v0) * (j as f64 * (-p.kappa).ln_1p()).exp()
}

/// Least `j` with `(|U| - v_j)/|U| ≤ δ`, found by iterating the recurrence.
pub fn steps_to_fraction(p: &GrowthParams, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let mut v = p.v0;
    let mut j = 0usize;
    while (p.u_volume - v) / p.u_volume > delta {
        v = p.step(v);
        j += 1;
        if j > 1usize << 40 {
            return Err(Error::InvalidArgument(
                "recurrence does not reach delta".into(),
            ));
        }
    }
    Ok(j)
}

/// `ceil(ln δ / ln(1-κ))`, the closed-form count for `v_0 = 0`.
pub fn steps_estimate(m: usize, delta: f64) -> f64 {
    (delta.ln() / (-kappa(m)).ln_1p()).ceil()
}
