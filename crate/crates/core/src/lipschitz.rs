//! Sampled checks for domains bounded by Lipschitz graphs.
//!
//! Coordinates are `(z, u + iv)` with `z ∈ C^{m-1}`, and the domain is
//! `Ω = {u < r(z, v)}`. A sample point stores the graph variables as a flat
//! real vector `x = (v, Re z_1, Im z_1, …)` of length `2(m-1) + 1`.
//!
//! A graph is `c`-Lipschitz iff, at each of its points, it misses the cone
//! `|u - u0| > c‖(z, v) - (z0, v0)‖`. Downward translations
//! `H_{t,α,β}(z, u + iv) = (z - tα, u - t, v - tβ)` with `‖(α, β)‖ < 1/c`
//! then map `Ω` into itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack for strict inequalities at the graph.
pub const REL_SLACK: f64 = 1e-12;

/// Above this many points the Lipschitz estimate scans sorted neighbours
/// instead of all pairs.
pub const EXACT_SCAN_LIMIT: usize = 2000;

/// Neighbour window of the large-sample scan.
pub const NEIGHBOR_WINDOW: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSample {
    pub m: usize,
    /// Graph variables `(v, Re z_1, Im z_1, …)` per sample.
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub claimed_c: f64,
}

impl GraphSample {
    pub fn new(m: usize, points: Vec<Vec<f64>>, values: Vec<f64>, claimed_c: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("dimension m must be >= 1".into()));
        }
        let d = graph_dim(m);
        if points.len() != values.len() {
            return Err(Error::InvalidArgument(
                "points and values differ in length".into(),
            ));
        }
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidArgument(format!(
                "sample points must have {d} coordinates"
            )));
        }
        if claimed_c.is_nan() || claimed_c < 0.0 {
            return Err(Error::InvalidArgument(
                "claimed constant must be nonnegative".into(),
            ));
        }
        Ok(GraphSample {
            m,
            points,
            values,
            claimed_c,
        })
    }

    /// Samples `r` at `points`.
    pub fn from_fn(
        m: usize,
        points: Vec<Vec<f64>>,
        claimed_c: f64,
        r: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let values = points.iter().map(|p| r(p)).collect();
        Self::new(m, points, values, claimed_c)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Real dimension `2(m-1) + 1` of the graph variables.
pub fn graph_dim(m: usize) -> usize {
    2 * (m - 1) + 1
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn slope(s: &GraphSample, i: usize, j: usize) -> f64 {
    let d = norm_diff(&s.points[i], &s.points[j]);
    if d == 0.0 {
        0.0
    } else {
        (s.values[i] - s.values[j]).abs() / d
    }
}

/// Largest difference quotient `|r_i - r_j| / ‖x_i - x_j‖` over all pairs
/// (up to [`EXACT_SCAN_LIMIT`] points), or over pairs within
/// [`NEIGHBOR_WINDOW`] of each other in the ordering by the first
/// coordinate (above it; then a lower bound).
pub fn lipschitz_estimate(s: &GraphSample) -> Result<f64> {
    let n = s.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if n <= EXACT_SCAN_LIMIT {
        return Ok((0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| slope(s, i, j)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.points[a][0].total_cmp(&s.points[b][0]));
    Ok((0..n)
        .into_par_iter()
        .map(|k| {
            let end = (k + 1 + NEIGHBOR_WINDOW).min(n);
            ((k + 1)..end)
                .map(|l| slope(s, order[k], order[l]))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

/// All pairs `(i, j)`, `i < j`, whose difference quotient exceeds `c` by
/// more than the relative slack, i.e. where one sample lies in the cone of
/// the other.
pub fn cone_check(s: &GraphSample, c: f64) -> Result<Vec<(usize, usize)>> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cone constant must be nonnegative, got {c}"
        )));
    }
    let n = s.len();
    Ok((0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            ((i + 1)..n).filter_map(move |j| {
                let du = (s.values[i] - s.values[j]).abs();
                let dx = norm_diff(&s.points[i], &s.points[j]);
                (du > c * dx * (1.0 + REL_SLACK)).then_some((i, j))
            })
        })
        .collect())
}

/// Point `(z, u + iv)` of `C^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    /// `(Re z_1, Im z_1, …)`, length `2(m-1)`.
    pub z: Vec<f64>,
    pub u: f64,
    pub v: f64,
}

impl SpacePoint {
    /// Graph variables `(v, z)` of this point.
    pub fn graph_coords(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.z.len() + 1);
        x.push(self.v);
        x.extend_from_slice(&self.z);
        x
    }
}

/// `H_{t,α,β}(z, u + iv) = (z - tα, u - t, v - tβ)`, with `α` given as
/// `(Re α_1, Im α_1, …)`.
pub fn h_map(t: f64, alpha: &[f64], beta: f64, p: &SpacePoint) -> SpacePoint {
    debug_assert_eq!(alpha.len(), p.z.len());
    SpacePoint {
        z: p.z.iter().zip(alpha).map(|(z, a)| z - t * a).collect(),
        u: p.u - t,
        v: p.v - t * beta,
    }
}

/// Whether `p` lies in `{u < r(z, v)}`, allowing the relative slack.
pub fn in_graph_domain(r: &dyn Fn(&[f64]) -> f64, p: &SpacePoint) -> bool {
    let rv = r(&p.graph_coords());
    p.u < rv + REL_SLACK * rv.abs().max(p.u.abs()).max(1.0)
}

/// A translation that took a point of the domain outside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub start: SpacePoint,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub t: f64,
    pub image: SpacePoint,
    /// `r` at the image's graph coordinates.
    pub graph_value: f64,
}

/// Applies one translation to a point of the domain; returns the
/// counterexample if the image leaves it.
pub fn probe_translation(
    r: &dyn Fn(&[f64]) -> f64,
    start: &SpacePoint,
    alpha: &[f64],
    beta: f64,
    t: f64,
) -> Option<Counterexample> {
    let image = h_map(t, alpha, beta, start);
    if in_graph_domain(r, &image) {
        return None;
    }
    let graph_value = r(&image.graph_coords());
    Some(Counterexample {
        start: start.clone(),
        alpha: alpha.to_vec(),
        beta,
        t,
        image,
        graph_value,
    })
}

/// Sampling setup for [`star_property_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarCheckConfig {
    pub m: usize,
    /// Base graph coordinates are drawn from `[-half_width, half_width]`.
    pub half_width: f64,
    /// Start points lie below the graph by an amount drawn uniformly from
    /// `[gap, gap + depth_range)`.
    pub gap: f64,
    pub depth_range: f64,
    /// Directions are drawn with `‖(α, β)‖ < direction_scale / c`; values
    /// above 1 probe inadmissible directions.
    pub direction_scale: f64,
}

impl StarCheckConfig {
    pub fn new(m: usize) -> Self {
        StarCheckConfig {
            m,
            half_width: 1.0,
            gap: 1e-9,
            depth_range: 1.0,
            direction_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarVerdict {
    pub passed: bool,
    pub trials: usize,
    pub counterexample: Option<Counterexample>,
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = g
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    // uniform in the open ball: radius · U^{1/dim}, U ∈ [0, 1)
    let s = radius * rng.random::<f64>().powf(1.0 / dim as f64) / n;
    g.into_iter().map(|x| x * s).collect()
}

/// Seeded random test of `H_{t,α,β}(Ω) ⊂ Ω`.
///
/// Each trial draws graph coordinates in the base box, a start point below
/// the graph, a direction `(α, β)` with `‖(α, β)‖ < direction_scale / c`
/// and `t ∈ (0, t_max]` with `t_max = c·half_width`, so that images stay in
/// the box of half-width `2·half_width`. Stops at the first counterexample.
pub fn star_property_check(
    r: &dyn Fn(&[f64]) -> f64,
    c: f64,
    trials: usize,
    seed: u64,
    cfg: &StarCheckConfig,
) -> Result<StarVerdict> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "c must be positive, got {c}"
        )));
    }
    if trials == 0 || cfg.m == 0 {
        return Err(Error::InvalidArgument(
            "need m >= 1 and at least one trial".into(),
        ));
    }
    let dim = graph_dim(cfg.m);
    let t_max = c * cfg.half_width;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let x: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-cfg.half_width..=cfg.half_width))
            .collect();
        let u = r(&x) - cfg.gap - rng.random_range(0.0..cfg.depth_range);
        let start = SpacePoint {
            v: x[0],
            z: x[1..].to_vec(),
            u,
        };
        let dir = random_direction(&mut rng, dim, cfg.direction_scale / c);
        let (beta, alpha) = (dir[0], &dir[1..]);
        // t in (0, t_max]
        let t = t_max * (1.0 - rng.random::<f64>());
        if let Some(ce) = probe_translation(r, &start, alpha, beta, t) {
            return Ok(StarVerdict {
                passed: false,
                trials: trial + 1,
                counterexample: Some(ce),
            });
        }
    }
    Ok(StarVerdict {
        passed: true,
        trials,
        counterexample: None,
    })
}

/// Piecewise-linear interpolant of a one-variable sample (`m = 1`), held
/// constant beyond the end points.
pub fn interpolate_1d(s: &GraphSample) -> Result<impl Fn(&[f64]) -> f64 + Sync> {
    if s.m != 1 {
        return Err(Error::InvalidArgument("interpolation needs m = 1".into()));
    }
    if s.len() < 2 {
        return Err(Error::TooFewPoints(s.len()));
    }
    let mut pts: Vec<(f64, f64)> = s
        .points
        .iter()
        .map(|p| p[0])
        .zip(s.values.iter().copied())
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidArgument(
            "sample points must be distinct".into(),
        ));
    }
    Ok(move |x: &[f64]| {
        let v = x[0];
        let k = pts.partition_point(|p| p.0 <= v);
        if k == 0 {
            return pts[0].1;
        }
        if k == pts.len() {
            return pts[k - 1].1;
        }
        let ((x0, y0), (x1, y1)) = (pts[k - 1], pts[k]);
        y0 + (y1 - y0) * (v - x0) / (x1 - x0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid_1d(n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| vec![lo + (hi - lo) * i as f64 / (n - 1) as f64])
            .collect()
    }

    #[test]
    fn estimate_examples() {
        let s = GraphSample::from_fn(1, grid_1d(11, -1.0, 1.0), 0.0, |_| 5.0).unwrap();
        assert_eq!(lipschitz_estimate(&s).unwrap(), 0.0);
        let s = GraphSample::from_fn(1, grid_1d(11, -1.0, 1.0), 2.0, |x| 2.0 * x[0]).unwrap();
        assert_relative_eq!(lipschitz_estimate(&s).unwrap(), 2.0, max_relative = 1e-12);
        let s = GraphSample::from_fn(1, grid_1d(5, -1.0, 1.0), 1.0, |x| x[0].abs()).unwrap();
        assert_relative_eq!(lipschitz_estimate(&s).unwrap(), 1.0, max_relative = 1e-12);
        let one = GraphSample::new(1, vec![vec![0.0]], vec![1.0], 1.0).unwrap();
        assert_eq!(lipschitz_estimate(&one), Err(Error::TooFewPoints(1)));
    }

    #[test]
    fn large_sample_uses_neighbor_scan() {
        let s =
            GraphSample::from_fn(1, grid_1d(5001, -1.0, 1.0), 3.0, |x| 3.0 * x[0] + 1.0).unwrap();
        assert_relative_eq!(lipschitz_estimate(&s).unwrap(), 3.0, max_relative = 1e-9);
    }

    #[test]
    fn cone_examples() {
        let s = GraphSample::from_fn(1, grid_1d(5, -1.0, 1.0), 1.0, |x| x[0].abs()).unwrap();
        let c = lipschitz_estimate(&s).unwrap();
        assert!(cone_check(&s, c).unwrap().is_empty());
        let bad = cone_check(&s, 0.5).unwrap();
        // samples are v = -1, -0.5, 0, 0.5, 1
        assert!(bad.contains(&(2, 4)));
        let single = GraphSample::new(1, vec![vec![0.0]], vec![1.0], 1.0).unwrap();
        assert!(cone_check(&single, 1.0).unwrap().is_empty());
        assert!(cone_check(&s, -1.0).is_err());
    }

    #[test]
    fn h_map_laws() {
        let p = SpacePoint {
            z: vec![0.3, -0.2],
            u: 1.5,
            v: -0.7,
        };
        let alpha = [0.1, 0.4];
        assert_eq!(h_map(0.0, &alpha, 0.2, &p), p);
        let q = h_map(1.0, &[0.0, 0.0], 0.0, &p);
        assert_eq!(q.z, p.z);
        assert_eq!(q.v, p.v);
        assert_eq!(q.u, p.u - 1.0);
        let (s, t) = (0.25, 0.5);
        let a = h_map(t, &alpha, 0.2, &h_map(s, &alpha, 0.2, &p));
        let b = h_map(s + t, &alpha, 0.2, &p);
        for (x, y) in a.z.iter().zip(&b.z) {
            assert!((x - y).abs() <= 2.0 * f64::EPSILON * x.abs().max(1.0));
        }
        assert!((a.u - b.u).abs() <= 2.0 * f64::EPSILON * a.u.abs().max(1.0));
        assert!((a.v - b.v).abs() <= 2.0 * f64::EPSILON * a.v.abs().max(1.0));
    }

    #[test]
    fn star_property_half_space_and_slope() {
        let cfg = StarCheckConfig::new(1);
        let zero = |_: &[f64]| 0.0;
        assert!(
            star_property_check(&zero, 1.0, 10_000, 1, &cfg)
                .unwrap()
                .passed
        );
        let lin = |x: &[f64]| x[0];
        assert!(
            star_property_check(&lin, 1.0, 10_000, 2, &cfg)
                .unwrap()
                .passed
        );
        let cfg2 = StarCheckConfig::new(3);
        let cone = |x: &[f64]| -x.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(
            star_property_check(&cone, 1.0, 5_000, 3, &cfg2)
                .unwrap()
                .passed
        );
        assert!(star_property_check(&zero, 0.0, 1, 1, &cfg).is_err());
    }

    #[test]
    fn inadmissible_probe_escapes() {
        let r = |x: &[f64]| -x[0].abs();
        let start = SpacePoint {
            z: vec![],
            u: -0.1,
            v: 0.0,
        };
        let ce = probe_translation(&r, &start, &[], -2.0, 0.2).expect("probe must escape");
        assert!((ce.image.u + 0.3).abs() < 1e-15);
        assert!((ce.image.v - 0.4).abs() < 1e-15);
        assert!((ce.graph_value + 0.4).abs() < 1e-15);
        // admissible β = -0.5 keeps it inside
        assert!(probe_translation(&r, &start, &[], -0.5, 0.2).is_none());

        let mut cfg = StarCheckConfig::new(1);
        cfg.direction_scale = 3.0;
        let v = star_property_check(&r, 1.0, 10_000, 5, &cfg).unwrap();
        assert!(!v.passed && v.counterexample.is_some());
    }

    #[test]
    fn interpolation_matches_samples() {
        let s = GraphSample::from_fn(1, grid_1d(9, -2.0, 2.0), 1.0, |x| x[0].abs()).unwrap();
        let f = interpolate_1d(&s).unwrap();
        assert_eq!(f(&[0.25]), 0.25);
        assert_eq!(f(&[-5.0]), 2.0);
        let cfg = StarCheckConfig::new(1);
        assert!(star_property_check(&f, 1.0, 2000, 4, &cfg).unwrap().passed);
    }

    proptest::proptest! {
        #[test]
        fn cone_and_estimate_agree(vals in proptest::collection::vec(-5.0..5.0f64, 3..40), c in 0.0..20.0f64) {
            let pts = grid_1d(vals.len(), -1.0, 1.0);
            let s = GraphSample::new(1, pts, vals, c).unwrap();
            let est = lipschitz_estimate(&s).unwrap();
            let empty = cone_check(&s, c).unwrap().is_empty();
            proptest::prop_assert_eq!(empty, est <= c * (1.0 + REL_SLACK));
        }

        #[test]
        fn estimate_is_scale_covariant(vals in proptest::collection::vec(-5.0..5.0f64, 3..30), lambda in 0.01..100.0f64) {
            let pts = grid_1d(vals.len(), -1.0, 1.0);
            let s = GraphSample::new(1, pts.clone(), vals.clone(), 1.0).unwrap();
            let scaled = GraphSample::new(
                1,
                pts.iter().map(|p| vec![p[0] * lambda]).collect(),
                vals.iter().map(|v| v * lambda).collect(),
                1.0,
            ).unwrap();
            let (a, b) = (lipschitz_estimate(&s).unwrap(), lipschitz_estimate(&scaled).unwrap());
            proptest::prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
