//! Shared numeric types, the geometric constants of the two-rectangle
//! system and the tolerance policy used across the crate.
//!
//! All constants are derived from [`std::f64::consts::PI`] and
//! [`std::f64::consts::SQRT_2`] so that every module sees bit-identical
//! values; identities such as `F2(z + 2πi) = F1(z)` then hold to rounding.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the complex plane.
pub type CPoint = Complex64;

/// A point of `C^m`, one complex number per coordinate.
pub type CVec = Vec<CPoint>;

/// Width of the rectangle and translation unit, `2√2π`.
pub const WIDTH: f64 = 2.0 * SQRT_2 * PI;
/// Height of the full rectangle, `4π`.
pub const HEIGHT: f64 = 4.0 * PI;
/// Height of the splitting line between the two halves, `2π`.
pub const MID: f64 = 2.0 * PI;

/// Fixed constants of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConstants {
    pub a: f64,
    pub b: f64,
    pub mid: f64,
    pub diam_r: f64,
    pub outer: f64,
}

impl SystemConstants {
    pub fn get() -> Self {
        SystemConstants {
            a: WIDTH,
            b: HEIGHT,
            mid: MID,
            diam_r: diam_r(),
            outer: outer_radius(),
        }
    }
}

/// Diameter of the closed rectangle, `π√24`.
pub fn diam_r() -> f64 {
    PI * 24f64.sqrt()
}

/// Outer radius of the slit annulus, `e^{2√2π}`.
pub fn outer_radius() -> f64 {
    WIDTH.exp()
}

/// Axis-aligned open rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle ({x_min}, {x_max}) x ({y_min}, {y_max})"
            )));
        }
        Ok(Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// The full rectangle `(0, a) x (0, 4π)`.
    pub const fn full() -> Self {
        Rect {
            x_min: 0.0,
            x_max: WIDTH,
            y_min: 0.0,
            y_max: HEIGHT,
        }
    }

    /// Lower half `(0, a) x (0, 2π)`.
    pub const fn lower() -> Self {
        Rect {
            x_min: 0.0,
            x_max: WIDTH,
            y_min: 0.0,
            y_max: MID,
        }
    }

    /// Upper half `(0, a) x (2π, 4π)`.
    pub const fn upper() -> Self {
        Rect {
            x_min: 0.0,
            x_max: WIDTH,
            y_min: MID,
            y_max: HEIGHT,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> CPoint {
        CPoint::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }
}

/// True iff `p` lies in `r` with all four side distances strictly greater
/// than `margin`.
pub fn in_rect(p: CPoint, r: &Rect, margin: f64) -> bool {
    debug_assert!(margin >= 0.0);
    p.re - r.x_min > margin
        && r.x_max - p.re > margin
        && p.im - r.y_min > margin
        && r.y_max - p.im > margin
}

/// Distance on `C^m` used throughout: the maximum over coordinates of the
/// complex modulus of the difference.
pub fn cvec_distance(a: &[CPoint], b: &[CPoint]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Numerical tolerances shared by the orbit, conjugation and density code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Minimum distance of classified iterates to the lines `Im ∈ {0, 2π, 4π}`
    /// and `Re ∈ {0, a}`.
    pub bad_set_margin: f64,
    pub shadowing_tol: f64,
    pub conjugacy_rel_tol: f64,
    /// Number of inverse branches composed per orbit point.
    pub backward_depth: usize,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            bad_set_margin: 1e-6,
            shadowing_tol: 1e-10,
            conjugacy_rel_tol: 1e-9,
            backward_depth: 120,
        }
    }
}

impl TolerancePolicy {
    pub fn new(
        bad_set_margin: f64,
        shadowing_tol: f64,
        conjugacy_rel_tol: f64,
        backward_depth: usize,
    ) -> Result<Self> {
        let p = TolerancePolicy {
            bad_set_margin,
            shadowing_tol,
            conjugacy_rel_tol,
            backward_depth,
        };
        p.validate()?;
        Ok(p)
    }

    /// Smallest backward depth accepted for the given shadowing tolerance:
    /// `2·log2(diam_R / shadowing_tol)`, rounded up.
    pub fn min_depth(shadowing_tol: f64) -> usize {
        (2.0 * (diam_r() / shadowing_tol).log2()).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.bad_set_margin,
            self.shadowing_tol,
            self.conjugacy_rel_tol,
        ];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) || self.backward_depth == 0 {
            return Err(Error::InvalidArgument(
                "tolerances and backward depth must be positive".into(),
            ));
        }
        let min = Self::min_depth(self.shadowing_tol);
        if self.backward_depth < min {
            return Err(Error::InvalidArgument(format!(
                "backward depth {} is below the minimum {min} for shadowing tolerance {:e}",
                self.backward_depth, self.shadowing_tol
            )));
        }
        Ok(())
    }

    pub fn with_depth(mut self, depth: usize) -> Result<Self> {
        self.backward_depth = depth;
        self.validate()?;
        Ok(self)
    }
}
