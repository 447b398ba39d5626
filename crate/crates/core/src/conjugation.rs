//! Exponential conjugation onto the slit annulus.
//!
//! `exp` maps each open half rectangle biholomorphically onto
//! `D = {1 < |w| < e^a} \ [0, ∞)`, and since `F2(z + 2πi) = F1(z)` the map
//! `Φ(e^z) = e^{F(z)}` is well defined on `D`. `Ψ` is `Φ` applied
//! coordinatewise on `D^m`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expanding::{branch_forward, Symbol};
use crate::numerics::{outer_radius, CPoint, CVec, Rect, MID, WIDTH};
use crate::orbit::OrbitRecord;

/// Relative tolerance guarding the slit against rounding.
pub const SLIT_REL_TOL: f64 = 1e-12;

/// The slit annulus `{1 < |w| < e^{2√2π}}` minus the nonnegative real ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitAnnulus {
    pub inner: f64,
    pub outer: f64,
    pub slit_tol: f64,
}

impl Default for SlitAnnulus {
    fn default() -> Self {
        SlitAnnulus {
            inner: 1.0,
            outer: outer_radius(),
            slit_tol: SLIT_REL_TOL,
        }
    }
}

impl SlitAnnulus {
    pub fn contains(&self, w: CPoint) -> bool {
        let r = w.norm();
        if !(r > self.inner && r < self.outer) {
            return false;
        }
        !(w.re >= 0.0 && w.im.abs() <= self.slit_tol * r)
    }
}

/// Pushed orbit in `D^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DOrbit {
    pub points: Vec<CVec>,
    /// `|Ψ(q_n) - q_{n+1}| / max(1, |q_{n+1}|)`, max over coordinates.
    pub conjugacy_defects: Vec<f64>,
}

impl DOrbit {
    pub fn max_defect(&self) -> f64 {
        self.conjugacy_defects.iter().copied().fold(0.0, f64::max)
    }
}

/// Logarithm on the strip `0 < Im z < 2π`.
pub fn log_branch(w: CPoint) -> Result<CPoint> {
    if !SlitAnnulus::default().contains(w) {
        return Err(Error::OutsideDomain { coord: 0 });
    }
    let mut arg = w.im.atan2(w.re);
    if arg <= 0.0 {
        arg += TAU;
    }
    Ok(CPoint::new(w.norm().ln(), arg))
}

/// `Φ(w) = exp(F1(log w))` on the slit annulus.
pub fn phi(w: CPoint) -> Result<CPoint> {
    log_branch(w).map(|z| branch_forward(Symbol::One, z).exp())
}

/// Largest `|F2(z + 2πi) - F1(z)|` over `n` seeded uniform samples of the
/// lower half rectangle.
pub fn well_definedness_check(n: usize, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r1 = Rect::lower();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let z = CPoint::new(
            rng.random_range(r1.x_min..r1.x_max),
            rng.random_range(r1.y_min..r1.y_max),
        );
        worst = worst.max(branch_gap(z));
    }
    Ok(worst)
}

/// `|F2(z + 2πi) - F1(z)|` at a single point.
pub fn branch_gap(z: CPoint) -> f64 {
    let lifted = z + CPoint::new(0.0, MID);
    (branch_forward(Symbol::Two, lifted) - branch_forward(Symbol::One, z)).norm()
}

/// Coordinatewise `Φ`.
pub fn psi(ws: &[CPoint]) -> Result<CVec> {
    ws.iter()
        .enumerate()
        .map(|(coord, &w)| phi(w).map_err(|_| Error::OutsideDomain { coord }))
        .collect()
}

fn exp_checked(p: &[CPoint]) -> Result<CVec> {
    let annulus = SlitAnnulus::default();
    p.iter()
        .enumerate()
        .map(|(coord, z)| {
            let q = z.exp();
            if annulus.contains(q) {
                Ok(q)
            } else {
                Err(Error::OutsideDomain { coord })
            }
        })
        .collect()
}

fn relative_gap(image: &[CPoint], next: &[CPoint]) -> f64 {
    image
        .iter()
        .zip(next)
        .map(|(a, b)| (a - b).norm() / b.norm().max(1.0))
        .fold(0.0, f64::max)
}

/// `q_n = exp(p_n)` coordinatewise, with the relative conjugacy defect of
/// every step.
pub fn push_orbit(orbit: &OrbitRecord) -> Result<DOrbit> {
    if orbit.is_empty() {
        return Ok(DOrbit {
            points: Vec::new(),
            conjugacy_defects: Vec::new(),
        });
    }
    let points = orbit
        .points
        .par_iter()
        .map(|p| exp_checked(p))
        .collect::<Result<Vec<_>>>()?;
    let tail = exp_checked(&orbit.successor)?;
    let conjugacy_defects = (0..points.len())
        .into_par_iter()
        .map(|n| {
            let next = points.get(n + 1).unwrap_or(&tail);
            psi(&points[n]).map(|img| relative_gap(&img, next))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DOrbit {
        points,
        conjugacy_defects,
    })
}

/// Like [`push_orbit`] for a bare point sequence: the last point has no
/// successor, so there is one defect fewer than points.
pub fn push_points(points: &[CVec]) -> Result<DOrbit> {
    let q = points
        .par_iter()
        .map(|p| exp_checked(p))
        .collect::<Result<Vec<_>>>()?;
    let conjugacy_defects = (0..q.len().saturating_sub(1))
        .into_par_iter()
        .map(|n| psi(&q[n]).map(|img| relative_gap(&img, &q[n + 1])))
        .collect::<Result<Vec<_>>>()?;
    Ok(DOrbit {
        points: q,
        conjugacy_defects,
    })
}

/// Applies `F` to a point of the closed rectangle by its half; the
/// splitting line is assigned to the lower branch. Used only as the
/// reference side of the conjugacy check.
fn f_by_half(z: CPoint) -> CPoint {
    let s = if z.im < MID { Symbol::One } else { Symbol::Two };
    branch_forward(s, z)
}

/// Largest relative error `|Ψ(exp p) - exp(F(p))| / |exp(F(p))|` over `n`
/// seeded samples `p` of the product of half rectangles, kept `margin` away
/// from the splitting lines.
pub fn conjugacy_check(m: usize, n: usize, seed: u64, margin: f64) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "need m >= 1 and at least one sample".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let p: CVec = (0..m)
            .map(|_| {
                let y = rng.random_range(margin..MID - margin);
                let y = if rng.random_bool(0.5) { y + MID } else { y };
                CPoint::new(rng.random_range(margin..WIDTH - margin), y)
            })
            .collect();
        let lhs = psi(&exp_checked(&p)?)?;
        for (l, z) in lhs.iter().zip(&p) {
            let rhs = f_by_half(*z).exp();
            worst = worst.max((l - rhs).norm() / rhs.norm());
        }
    }
    Ok(worst)
}
