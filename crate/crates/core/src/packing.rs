//! Disjoint inscribed balls in grid cubes inside a bounded open set.
//!
//! The grid is aligned to the lower corner of the set's bounding box. Each
//! cube found entirely inside the set receives its inscribed ball of
//! radius `h/2`, so every accepted cube contributes exactly `ρ_m·h^{2m}`
//! of ball volume, where `ρ_m = π^m / (4^m m!)` is the ball-to-cube volume
//! ratio in real dimension `2m`.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Halvings tried by [`verify_lemma`] after the initial side.
pub const MAX_HALVINGS: usize = 20;

/// Grids with more cubes than this are refused.
pub const MAX_CUBES: usize = 1 << 30;

/// Sample probes per axis for generic oracles.
pub const PROBES_PER_AXIS: usize = 3;

/// Volume ratio of the inscribed ball to its cube in real dimension `2m`.
pub fn rho(m: usize) -> f64 {
    assert!(m >= 1, "rho needs m >= 1");
    (1..=m).fold(1.0, |acc, k| acc * PI / (4.0 * k as f64))
}

/// Bounded open subset of `R^{dim}`.
pub trait OpenSet: Sync {
    fn dim(&self) -> usize;

    /// Closed axis box containing the set.
    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>);

    fn contains(&self, x: &[f64]) -> bool;

    /// Exact description, when the set is a finite union of open boxes and
    /// balls.
    fn exact(&self) -> Option<&ExactGeometry> {
        None
    }
}

/// Open box or open ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Shape {
    fn dim(&self) -> usize {
        match self {
            Shape::Box { lo, .. } => lo.len(),
            Shape::Ball { center, .. } => center.len(),
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| l < v && v < h),
            Shape::Ball { center, radius } => dist2(x, center) < radius * radius,
        }
    }

    /// Closed cube `[lo, hi]` lies inside this open shape.
    fn contains_cube(&self, clo: &[f64], chi: &[f64]) -> bool {
        match self {
            Shape::Box { lo, hi } => (0..lo.len()).all(|k| lo[k] < clo[k] && chi[k] < hi[k]),
            Shape::Ball { center, radius } => {
                let far: f64 = (0..center.len())
                    .map(|k| {
                        let d = (clo[k] - center[k]).abs().max((chi[k] - center[k]).abs());
                        d * d
                    })
                    .sum();
                far < radius * radius
            }
        }
    }

    /// Closed cube `[lo, hi]` meets this open shape.
    fn meets_cube(&self, clo: &[f64], chi: &[f64]) -> bool {
        match self {
            Shape::Box { lo, hi } => (0..lo.len()).all(|k| clo[k] < hi[k] && chi[k] > lo[k]),
            Shape::Ball { center, radius } => {
                let near: f64 = (0..center.len())
                    .map(|k| {
                        let d = (clo[k] - center[k]).max(center[k] - chi[k]).max(0.0);
                        d * d
                    })
                    .sum();
                near < radius * radius
            }
        }
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Finite union of open boxes and balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactGeometry {
    dim: usize,
    shapes: Vec<Shape>,
}

impl ExactGeometry {
    pub fn new(dim: usize, shapes: Vec<Shape>) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "real dimension must be a positive even number, got {dim}"
            )));
        }
        for s in &shapes {
            let ok = s.dim() == dim
                && match s {
                    Shape::Box { lo, hi } => {
                        hi.len() == dim && lo.iter().zip(hi).all(|(l, h)| l < h)
                    }
                    Shape::Ball { radius, .. } => *radius > 0.0,
                };
            if !ok {
                return Err(Error::InvalidArgument(format!("malformed shape {s:?}")));
            }
        }
        Ok(ExactGeometry { dim, shapes })
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    /// `(0,1)^2`.
    pub fn unit_square() -> Self {
        Self::new(
            2,
            vec![Shape::Box {
                lo: vec![0.0; 2],
                hi: vec![1.0; 2],
            }],
        )
        .unwrap()
    }

    /// Open unit disc centred at the origin.
    pub fn unit_disc() -> Self {
        Self::new(
            2,
            vec![Shape::Ball {
                center: vec![0.0; 2],
                radius: 1.0,
            }],
        )
        .unwrap()
    }

    /// `(0,2)x(0,1) ∪ (0,1)x(0,2)`, area 3.
    pub fn l_shape() -> Self {
        Self::new(
            2,
            vec![
                Shape::Box {
                    lo: vec![0.0, 0.0],
                    hi: vec![2.0, 1.0],
                },
                Shape::Box {
                    lo: vec![0.0, 0.0],
                    hi: vec![1.0, 2.0],
                },
            ],
        )
        .unwrap()
    }

    /// Parses a geometry spec: one of the presets `unit-square`,
    /// `unit-disc`, `l-shape`, or a `;`-separated list of items
    /// `box:c_1,…,c_d,s_1,…,s_d` (centre and side lengths) and
    /// `ball:c_1,…,c_d,r`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "unit-square" => return Ok(Self::unit_square()),
            "unit-disc" => return Ok(Self::unit_disc()),
            "l-shape" => return Ok(Self::l_shape()),
            _ => {}
        }
        let mut shapes = Vec::new();
        for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (kind, nums) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected kind:numbers in {item:?}")))?;
            let v = nums
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("{item:?}: {e}")))?;
            let shape = match kind.trim() {
                "box" if v.len() >= 2 && v.len() % 2 == 0 => {
                    let d = v.len() / 2;
                    let (c, s) = v.split_at(d);
                    Shape::Box {
                        lo: c.iter().zip(s).map(|(c, s)| c - s / 2.0).collect(),
                        hi: c.iter().zip(s).map(|(c, s)| c + s / 2.0).collect(),
                    }
                }
                "ball" if v.len() >= 2 => {
                    let (c, r) = v.split_at(v.len() - 1);
                    Shape::Ball {
                        center: c.to_vec(),
                        radius: r[0],
                    }
                }
                other => {
                    return Err(Error::Parse(format!(
                        "unknown or malformed shape {other:?} with {} numbers",
                        v.len()
                    )))
                }
            };
            shapes.push(shape);
        }
        let dim = shapes
            .first()
            .map(Shape::dim)
            .ok_or_else(|| Error::Parse("empty geometry".into()))?;
        Self::new(dim, shapes)
    }
}

impl OpenSet for ExactGeometry {
    fn dim(&self) -> usize {
        self.dim
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for s in &self.shapes {
            let (l, h) = s.bounds();
            for k in 0..self.dim {
                lo[k] = lo[k].min(l[k]);
                hi[k] = hi[k].max(h[k]);
            }
        }
        if self.shapes.is_empty() {
            lo.fill(0.0);
            hi.fill(0.0);
        }
        (lo, hi)
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.shapes.iter().any(|s| s.contains(x))
    }

    fn exact(&self) -> Option<&ExactGeometry> {
        Some(self)
    }
}

/// Open set known only through a membership predicate.
pub struct OracleSet<F> {
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    member: F,
}

impl<F: Fn(&[f64]) -> bool + Sync> OracleSet<F> {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, member: F) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() % 2 != 0 {
            return Err(Error::InvalidArgument(
                "bounding box must have even positive dimension".into(),
            ));
        }
        Ok(OracleSet {
            dim: lo.len(),
            lo,
            hi,
            member,
        })
    }
}

impl<F: Fn(&[f64]) -> bool + Sync> OpenSet for OracleSet<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo.clone(), self.hi.clone())
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| l <= v && v <= h)
            && (self.member)(x)
    }
}

/// How cube inclusion was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InclusionTest {
    /// Closed cube inside a single box or ball of the union.
    Exact,
    /// Centre plus sphere probes of the circumscribed ball.
    Sampled,
}

impl fmt::Display for InclusionTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InclusionTest::Exact => f.write_str("exact"),
            InclusionTest::Sampled => f.write_str("sampled"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub h: f64,
    pub dim: usize,
    /// Centres of the accepted cubes; each carries a ball of radius `h/2`.
    pub cubes: Vec<Vec<f64>>,
    pub total_ball_volume: f64,
    pub v_volume_lower: f64,
    pub v_volume_upper: f64,
    pub inclusion: InclusionTest,
}

impl PackingResult {
    pub fn ball_radius(&self) -> f64 {
        0.5 * self.h
    }

    pub fn balls(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.cubes
            .iter()
            .map(move |c| (c.as_slice(), self.ball_radius()))
    }

    /// Ball volume beats `ρ_m · v_volume_upper / 2`.
    pub fn bound_ok(&self) -> bool {
        self.total_ball_volume > rho(self.dim / 2) * self.v_volume_upper / 2.0
    }
}

struct CubeGrid {
    lo: Vec<f64>,
    counts: Vec<usize>,
    h: f64,
}

impl CubeGrid {
    fn new(v: &dyn OpenSet, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cube side must be positive, got {h}"
            )));
        }
        let (lo, hi) = v.bounding_box();
        let counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(l, u)| {
                if u > l {
                    ((u - l) / h).ceil() as usize
                } else {
                    0
                }
            })
            .collect();
        let total = counts.iter().try_fold(1usize, |a, &n| a.checked_mul(n));
        if total.is_none_or(|t| t > MAX_CUBES) {
            return Err(Error::InvalidArgument(format!(
                "cube grid at h = {h:e} is too large"
            )));
        }
        Ok(CubeGrid { lo, counts, h })
    }

    fn total(&self) -> usize {
        self.counts.iter().product()
    }

    /// Closed cube bounds of the cube with linear index `i`.
    fn cube(&self, mut i: usize) -> (Vec<f64>, Vec<f64>) {
        let d = self.counts.len();
        let (mut clo, mut chi) = (vec![0.0; d], vec![0.0; d]);
        for k in (0..d).rev() {
            let j = i % self.counts[k];
            i /= self.counts[k];
            clo[k] = self.lo[k] + j as f64 * self.h;
            chi[k] = self.lo[k] + (j + 1) as f64 * self.h;
        }
        (clo, chi)
    }
}

fn center(clo: &[f64], chi: &[f64]) -> Vec<f64> {
    clo.iter().zip(chi).map(|(a, b)| 0.5 * (a + b)).collect()
}

/// Offsets `d ∈ {-1, 0, 1}^dim`, excluding 0, normalised onto the sphere of
/// radius `r`.
fn sphere_probes(dim: usize, r: f64) -> Vec<Vec<f64>> {
    let total = PROBES_PER_AXIS.pow(dim as u32);
    (0..total)
        .filter_map(|mut i| {
            let d: Vec<f64> = (0..dim)
                .map(|_| {
                    let v = (i % PROBES_PER_AXIS) as f64 - 1.0;
                    i /= PROBES_PER_AXIS;
                    v
                })
                .collect();
            let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            (n > 0.0).then(|| d.iter().map(|x| x * r / n).collect())
        })
        .collect()
}

fn sampled_inside(v: &dyn OpenSet, c: &[f64], probes: &[Vec<f64>]) -> bool {
    if !v.contains(c) {
        return false;
    }
    let mut x = vec![0.0; c.len()];
    probes.iter().all(|p| {
        for k in 0..c.len() {
            x[k] = c[k] + p[k];
        }
        v.contains(&x)
    })
}

/// Centres of grid subcells of side `h/4`, relative to the cube's lower corner.
fn refinement_offsets(dim: usize, h: f64) -> Vec<Vec<f64>> {
    let total = 4usize.pow(dim as u32);
    (0..total)
        .map(|mut i| {
            (0..dim)
                .map(|_| {
                    let j = i % 4;
                    i /= 4;
                    (j as f64 + 0.5) * h / 4.0
                })
                .collect()
        })
        .collect()
}

/// Centres of the grid cubes of side `h` found entirely inside `v`, in
/// grid order.
///
/// Exact geometries accept a closed cube iff it lies in one box or ball of
/// the union. Generic oracles accept a cube iff its centre and
/// `3^{dim} - 1` probes on the circumscribed sphere of radius `h·√dim/2`
/// are members.
pub fn interior_cubes(v: &dyn OpenSet, h: f64) -> Result<Vec<Vec<f64>>> {
    Ok(scan(v, h)?.0)
}

fn scan(v: &dyn OpenSet, h: f64) -> Result<(Vec<Vec<f64>>, usize)> {
    let grid = CubeGrid::new(v, h)?;
    let dim = v.dim();
    let probes = sphere_probes(dim, h * (dim as f64).sqrt() / 2.0);
    let refine = refinement_offsets(dim, h);
    let exact = v.exact();

    let rows: Vec<(Option<Vec<f64>>, bool)> = (0..grid.total())
        .into_par_iter()
        .map(|i| {
            let (clo, chi) = grid.cube(i);
            let (inside, meets) = match exact {
                Some(g) => (
                    g.shapes.iter().any(|s| s.contains_cube(&clo, &chi)),
                    g.shapes.iter().any(|s| s.meets_cube(&clo, &chi)),
                ),
                None => {
                    let c = center(&clo, &chi);
                    let inside = sampled_inside(v, &c, &probes);
                    let meets = inside
                        || refine.iter().any(|off| {
                            let x: Vec<f64> = clo.iter().zip(off).map(|(a, o)| a + o).collect();
                            v.contains(&x)
                        });
                    (inside, meets)
                }
            };
            (inside.then(|| center(&clo, &chi)), meets)
        })
        .collect();

    let meets = rows.iter().filter(|r| r.1).count();
    let cubes = rows.into_iter().filter_map(|r| r.0).collect();
    Ok((cubes, meets))
}

/// Packs one inscribed ball per interior cube of side `h`.
///
/// `v_volume_lower` counts interior cubes. `v_volume_upper` counts cubes
/// meeting `v`: exactly for tagged geometries, and for generic oracles by
/// membership of the `4^{dim}` subcell centres at refinement `h/4`.
pub fn pack_balls(v: &dyn OpenSet, h: f64) -> Result<PackingResult> {
    let (cubes, meets) = scan(v, h)?;
    let dim = v.dim();
    let cell = h.powi(dim as i32);
    let count = cubes.len() as f64;
    Ok(PackingResult {
        h,
        dim,
        total_ball_volume: count * rho(dim / 2) * cell,
        v_volume_lower: count * cell,
        v_volume_upper: meets as f64 * cell,
        inclusion: if v.exact().is_some() {
            InclusionTest::Exact
        } else {
            InclusionTest::Sampled
        },
        cubes,
    })
}

/// Halves `h` from `h0` until the packed ball volume exceeds
/// `ρ_m · v_volume_upper / 2`, trying at most [`MAX_HALVINGS`] halvings.
pub fn verify_lemma(v: &dyn OpenSet, h0: f64) -> Result<(f64, PackingResult)> {
    let mut h = h0;
    for _ in 0..=MAX_HALVINGS {
        let r = pack_balls(v, h)?;
        if r.bound_ok() {
            return Ok((h, r));
        }
        h /= 2.0;
    }
    Err(Error::IterationCap {
        halvings: MAX_HALVINGS,
        h: 2.0 * h,
    })
}
