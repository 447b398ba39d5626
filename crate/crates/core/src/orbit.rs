//! Dense-orbit construction by cylinder steering.
//!
//! A refining family of target balls is enumerated coarse to fine; each
//! target contributes the first `k_i` symbols of its forward itinerary,
//! where `k_i` is the first depth whose cylinder bound drops below the
//! target radius. Blocks whose cylinder touches the boundary or the
//! splitting line are followed by a short interior spacer. Orbit points are then evaluated by composing inverse
//! branches backwards from the centre of the rectangle, which keeps the
//! evaluation error uniformly bounded at every index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expanding::{
    address, branch_forward, branch_inverse, cylinder_diameter, depth_for_radius, touches_bad_set,
    ProductSymbol, Symbol, Word,
};
use crate::numerics::{cvec_distance, CPoint, CVec, Rect, TolerancePolicy, HEIGHT, WIDTH};

/// Number of seeded perturbations tried for a centre whose address grazes
/// the bad set.
pub const MAX_PERTURBATIONS: usize = 20;

/// Length of the spacer word.
pub const SPACER_DEPTH: usize = 6;

/// Address of an interior depth-6 cell, at distance at least `π/2` from
/// `∂R` and from the splitting line.
///
/// A target whose cylinder touches those lines has a truncated address that
/// is also the address of a boundary point, and since the boundary plus the
/// splitting line is forward invariant, consecutive such blocks keep the
/// orbit within `2^{-L/2}` of the boundary over runs of `L` symbols. The
/// spacer breaks these runs.
pub fn spacer_word() -> Word {
    let p = CPoint::new(WIDTH * 7.0 / 16.0, HEIGHT * 5.0 / 16.0);
    address(p, SPACER_DEPTH, 1e-3).expect("interior point has an address")
}

/// Ball the orbit is steered into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub center: CVec,
    pub radius: f64,
    /// Index into the resolution schedule.
    pub level: usize,
    /// Symbols spent on this target.
    pub depth: usize,
    /// True if any coordinate of the grid centre had to be moved off the bad set.
    pub perturbed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub target: usize,
    pub time: usize,
    pub depth: usize,
    /// Length of the interior spacer appended after this target's block.
    pub spacer: usize,
}

/// Symbolic certificate: one word per coordinate (all of equal length) and
/// the times at which each target's address starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Itinerary {
    words: Vec<Word>,
    pub checkpoints: Vec<Checkpoint>,
}

impl Itinerary {
    /// Builds an itinerary from per-coordinate words with no checkpoints.
    pub fn from_words(words: Vec<Word>) -> Result<Self> {
        let Some(first) = words.first() else {
            return Err(Error::InvalidArgument(
                "itinerary needs at least one coordinate".into(),
            ));
        };
        if first.is_empty() || words.iter().any(|w| w.len() != first.len()) {
            return Err(Error::InvalidArgument(
                "coordinate words must be nonempty and of equal length".into(),
            ));
        }
        Ok(Itinerary {
            words,
            checkpoints: Vec::new(),
        })
    }

    /// `m` copies of `pattern` repeated up to `len` symbols.
    pub fn periodic(m: usize, pattern: &Word, len: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidArgument("empty pattern".into()));
        }
        let w = Word(pattern.0.iter().copied().cycle().take(len).collect());
        Self::from_words(vec![w; m])
    }

    pub fn m(&self) -> usize {
        self.words.len()
    }

    pub fn len(&self) -> usize {
        self.words[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Symbol at time `n`, wrapping cyclically past the end.
    pub fn symbol_at(&self, n: usize) -> ProductSymbol {
        let len = self.len();
        ProductSymbol(self.words.iter().map(|w| w.0[n % len]).collect())
    }
}

/// Orbit evaluated by backward composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub points: Vec<CVec>,
    /// Point at time `points.len()`, so every row has a defect.
    pub successor: CVec,
    pub eval_error_bound: f64,
    /// `|F(p_n) - p_{n+1}|`, max over coordinates.
    pub shadowing_defects: Vec<f64>,
}

impl OrbitRecord {
    pub fn m(&self) -> usize {
        self.successor.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_defect(&self) -> f64 {
        self.shadowing_defects.iter().copied().fold(0.0, f64::max)
    }
}

/// Corner-aligned grid of side `eps` inside one half rectangle; centres of
/// the cells whose closure lies in the closed half.
fn half_grid(half: &Rect, eps: f64) -> Vec<CPoint> {
    let nx = cells_fitting(half.width(), eps);
    let ny = cells_fitting(half.height(), eps);
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(CPoint::new(
                half.x_min + (i as f64 + 0.5) * eps,
                half.y_min + (j as f64 + 0.5) * eps,
            ));
        }
    }
    out
}

fn cells_fitting(extent: f64, eps: f64) -> usize {
    let mut n = (extent / eps).floor() as usize;
    while n > 0 && n as f64 * eps > extent {
        n -= 1;
    }
    n
}

/// Unperturbed one-coordinate grid centres at resolution `eps`: lower half
/// first, then upper half, rows bottom to top.
pub fn coordinate_grid(eps: f64) -> Vec<CPoint> {
    let mut g = half_grid(&Rect::lower(), eps);
    g.extend(half_grid(&Rect::upper(), eps));
    g
}

/// Enumerates targets for every resolution in `resolutions` (coarse to
/// fine). The product grid at each level is the Cartesian power of the
/// one-coordinate grid; centres whose depth-`k` address touches the bad set
/// are moved by at most `eps/10` using a generator seeded with `seed`.
pub fn build_target_list(
    m: usize,
    resolutions: &[f64],
    policy: &TolerancePolicy,
    seed: u64,
) -> Result<Vec<Target>> {
    build_target_list_filtered(m, resolutions, policy, seed, |_| true)
}

/// Like [`build_target_list`], keeping only the targets whose centre passes
/// `keep`. Lets callers restrict the orbit to a chosen dense open subset.
pub fn build_target_list_filtered<F>(
    m: usize,
    resolutions: &[f64],
    policy: &TolerancePolicy,
    seed: u64,
    keep: F,
) -> Result<Vec<Target>>
where
    F: Fn(&[CPoint]) -> bool,
{
    if m == 0 {
        return Err(Error::InvalidArgument("dimension m must be >= 1".into()));
    }
    if resolutions.is_empty() {
        return Err(Error::InvalidArgument("empty resolution schedule".into()));
    }
    if resolutions.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "resolutions must be strictly decreasing".into(),
        ));
    }
    if let Some(&eps) = resolutions
        .iter()
        .find(|&&e| e.is_nan() || e <= 2.0 * policy.bad_set_margin)
    {
        return Err(Error::InvalidArgument(format!(
            "resolution {eps} must exceed twice the bad-set margin"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = Vec::new();
    for (level, &eps) in resolutions.iter().enumerate() {
        let depth = depth_for_radius(eps)?;
        let mut coords = Vec::new();
        for (cell, c) in coordinate_grid(eps).into_iter().enumerate() {
            coords.push(addressable_center(c, depth, eps, policy, &mut rng).ok_or(
                Error::TargetUnaddressable {
                    level,
                    cell,
                    attempts: MAX_PERTURBATIONS,
                },
            )?);
        }
        for_each_product(&coords, m, |combo| {
            let center: CVec = combo.iter().map(|&(c, _)| c).collect();
            if keep(&center) {
                targets.push(Target {
                    center,
                    radius: eps,
                    level,
                    depth,
                    perturbed: combo.iter().any(|&(_, p)| p),
                });
            }
        });
    }
    Ok(targets)
}

fn addressable_center(
    c: CPoint,
    depth: usize,
    eps: f64,
    policy: &TolerancePolicy,
    rng: &mut ChaCha8Rng,
) -> Option<(CPoint, bool)> {
    if address(c, depth, policy.bad_set_margin).is_ok() {
        return Some((c, false));
    }
    // Offsets drawn from the square of half-side eps/(10√2) stay within eps/10.
    let half = eps / (10.0 * std::f64::consts::SQRT_2);
    (0..MAX_PERTURBATIONS).find_map(|_| {
        let p = c + CPoint::new(rng.random_range(-half..half), rng.random_range(-half..half));
        address(p, depth, policy.bad_set_margin)
            .is_ok()
            .then_some((p, true))
    })
}

/// Visits the `m`-fold Cartesian power of `items` in lexicographic order.
fn for_each_product<T: Copy>(items: &[T], m: usize, mut f: impl FnMut(&[T])) {
    if items.is_empty() {
        return;
    }
    let mut idx = vec![0usize; m];
    let mut buf: Vec<T> = vec![items[0]; m];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        f(&buf);
        let mut pos = m;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < items.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Concatenates the truncated addresses of `targets`, each at depth
/// [`Target::depth`], appending [`spacer_word`] after every block whose
/// cylinder touches the boundary or the splitting line in some coordinate.
pub fn assemble_itinerary(targets: &[Target], policy: &TolerancePolicy) -> Result<Itinerary> {
    assemble_itinerary_with_depths(targets, policy, |t| t.depth)
}

/// Same as [`assemble_itinerary`] with a caller-chosen depth per target.
pub fn assemble_itinerary_with_depths<F>(
    targets: &[Target],
    policy: &TolerancePolicy,
    depth_of: F,
) -> Result<Itinerary>
where
    F: Fn(&Target) -> usize,
{
    let Some(first) = targets.first() else {
        return Err(Error::InvalidArgument("no targets".into()));
    };
    let m = first.center.len();
    let mut words = vec![Vec::new(); m];
    let mut checkpoints = Vec::with_capacity(targets.len());
    let spacer = spacer_word();
    for (i, t) in targets.iter().enumerate() {
        if t.center.len() != m {
            return Err(Error::InvalidArgument(format!(
                "target {i} has the wrong dimension"
            )));
        }
        let depth = depth_of(t).max(1);
        let time = words[0].len();
        let mut touches = false;
        for (coord, &c) in t.center.iter().enumerate() {
            let w = address(c, depth, policy.bad_set_margin).map_err(|_| {
                Error::TargetUnaddressable {
                    level: t.level,
                    cell: i,
                    attempts: 0,
                }
            })?;
            touches |= touches_bad_set(&w);
            words[coord].extend(w.0);
        }
        if touches {
            for w in &mut words {
                w.extend_from_slice(&spacer.0);
            }
        }
        checkpoints.push(Checkpoint {
            target: i,
            time,
            depth,
            spacer: if touches { spacer.len() } else { 0 },
        });
    }
    let mut it = Itinerary::from_words(words.into_iter().map(Word).collect())?;
    it.checkpoints = checkpoints;
    Ok(it)
}

/// Seed of the backward composition: the centre of the rectangle.
pub fn backward_seed() -> CPoint {
    Rect::full().center()
}

fn coordinate_point(word: &[Symbol], n: usize, depth: usize) -> CPoint {
    let len = word.len();
    (n..n + depth)
        .rev()
        .fold(backward_seed(), |z, j| branch_inverse(word[j % len], z))
}

/// `F^{-1}_{s_n} ∘ … ∘ F^{-1}_{s_{n+depth-1}}` applied to the seed, per
/// coordinate; the itinerary wraps cyclically past its end.
pub fn orbit_point(it: &Itinerary, n: usize, depth: usize) -> CVec {
    it.words
        .iter()
        .map(|w| coordinate_point(&w.0, n, depth.max(1)))
        .collect()
}

/// Evaluates the first `n_points` orbit points and their shadowing defects.
pub fn build_orbit(
    it: &Itinerary,
    n_points: usize,
    policy: &TolerancePolicy,
) -> Result<OrbitRecord> {
    policy.validate()?;
    if n_points > it.len() {
        return Err(Error::InvalidArgument(format!(
            "orbit length {n_points} exceeds itinerary length {}",
            it.len()
        )));
    }
    let depth = policy.backward_depth;
    let mut points: Vec<CVec> = (0..=n_points)
        .into_par_iter()
        .map(|n| orbit_point(it, n, depth))
        .collect();
    let successor = points.pop().expect("at least one point");
    let shadowing_defects = (0..n_points)
        .into_par_iter()
        .map(|n| {
            let next = points.get(n + 1).unwrap_or(&successor);
            let image: CVec = points[n]
                .iter()
                .zip(it.symbol_at(n).0)
                .map(|(&z, s)| branch_forward(s, z))
                .collect();
            cvec_distance(&image, next)
        })
        .collect();
    Ok(OrbitRecord {
        points,
        successor,
        eval_error_bound: cylinder_diameter(depth),
        shadowing_defects,
    })
}

/// Checks every checkpoint: the orbit point at the checkpoint time must lie
/// within the target radius of the target centre. Returns the distances.
pub fn verify_targets(
    orbit: &OrbitRecord,
    it: &Itinerary,
    targets: &[Target],
) -> Result<Vec<(usize, f64)>> {
    it.checkpoints
        .iter()
        .map(|cp| {
            let t = targets.get(cp.target).ok_or_else(|| {
                Error::InvalidArgument(format!("checkpoint refers to missing target {}", cp.target))
            })?;
            let p = orbit.points.get(cp.time).ok_or_else(|| {
                Error::InvalidArgument(format!("orbit does not reach time {}", cp.time))
            })?;
            let d = cvec_distance(p, &t.center);
            if d < t.radius {
                Ok((cp.target, d))
            } else {
                Err(Error::TargetMissed {
                    index: cp.target,
                    distance: d,
                    radius: t.radius,
                })
            }
        })
        .collect()
}
