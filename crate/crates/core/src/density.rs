//! Finite-resolution density certificates: ε-grid coverage of a point
//! sequence in a domain of `R^{2m}`.

use rayon::prelude::*;

use crate::conjugation::SlitAnnulus;
use crate::error::{Error, Result};
use crate::numerics::{in_rect, CPoint, CVec, Rect, HEIGHT, WIDTH};

/// Grids with more cells than this are refused.
pub const MAX_CELLS: usize = 1 << 28;

/// Region of `R^{dim}` given by a membership test with a sup-norm margin.
pub trait Domain: Sync {
    fn dim(&self) -> usize;

    /// Closed axis box containing the domain, as `(lo, hi)`.
    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>);

    /// True iff the closed cube of half-side `margin` around `x` lies in the
    /// domain. With `margin = 0` this is plain membership.
    fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool;
}

/// `Ω^m`, the product of the two open half rectangles.
#[derive(Debug, Clone, Copy)]
pub struct OmegaDomain {
    pub m: usize,
}

impl Domain for OmegaDomain {
    fn dim(&self) -> usize {
        2 * self.m
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = vec![0.0; 2 * self.m];
        let hi = (0..self.m).flat_map(|_| [WIDTH, HEIGHT]).collect();
        (lo, hi)
    }

    fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.chunks_exact(2).all(|c| {
            let z = CPoint::new(c[0], c[1]);
            in_rect(z, &Rect::lower(), margin) || in_rect(z, &Rect::upper(), margin)
        })
    }
}

/// `D^m`, the product of slit annuli.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusDomain {
    pub m: usize,
    pub annulus: SlitAnnulus,
}

impl AnnulusDomain {
    pub fn new(m: usize) -> Self {
        AnnulusDomain {
            m,
            annulus: SlitAnnulus::default(),
        }
    }
}

impl Domain for AnnulusDomain {
    fn dim(&self) -> usize {
        2 * self.m
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let r = self.annulus.outer;
        (vec![-r; 2 * self.m], vec![r; 2 * self.m])
    }

    fn contains_with_margin(&self, x: &[f64], h: f64) -> bool {
        x.chunks_exact(2).all(|c| {
            let (re, im) = (c[0], c[1]);
            if h == 0.0 {
                return self.annulus.contains(CPoint::new(re, im));
            }
            // exact nearest and farthest distance from 0 to the square
            let near = (re.abs() - h).max(0.0).hypot((im.abs() - h).max(0.0));
            let far = (re.abs() + h).hypot(im.abs() + h);
            let touches_slit = im.abs() <= h && re + h >= 0.0;
            near > self.annulus.inner && far < self.annulus.outer && !touches_slit
        })
    }
}

/// Result of one coverage scan.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub epsilon: f64,
    pub cells_total: usize,
    pub cells_hit: usize,
    pub coverage_fraction: f64,
    /// Centres of the qualifying cells, in grid order.
    pub cell_centers: Vec<Vec<f64>>,
    /// Least index of a point inside each qualifying cell.
    pub first_hit_time: Vec<Option<usize>>,
    /// Largest first-hit time over the cells that were hit.
    pub max_first_hit: Option<usize>,
}

struct Grid {
    lo: Vec<f64>,
    counts: Vec<usize>,
    eps: f64,
}

impl Grid {
    fn new(domain: &dyn Domain, eps: f64) -> Result<Self> {
        let (lo, hi) = domain.bounding_box();
        let counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (((h - l) / eps).ceil() as usize).max(1))
            .collect();
        counts
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&t| t <= MAX_CELLS)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("coverage grid at epsilon {eps} is too large"))
            })?;
        Ok(Grid { lo, counts, eps })
    }

    fn total(&self) -> usize {
        self.counts.iter().product()
    }

    fn center_of(&self, mut linear: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.counts.len()];
        for k in (0..self.counts.len()).rev() {
            let i = linear % self.counts[k];
            linear /= self.counts[k];
            c[k] = self.lo[k] + (i as f64 + 0.5) * self.eps;
        }
        c
    }

    /// Per axis, the indices of cells whose centre is within `eps/2` of `x`.
    fn candidates(&self, x: &[f64]) -> Vec<Vec<usize>> {
        x.iter()
            .enumerate()
            .map(|(k, &xk)| {
                let j = ((xk - self.lo[k]) / self.eps).floor();
                let mut v = Vec::with_capacity(2);
                for d in [-1.0, 0.0, 1.0] {
                    let i = j + d;
                    if i < 0.0 || i >= self.counts[k] as f64 {
                        continue;
                    }
                    let center = self.lo[k] + (i + 0.5) * self.eps;
                    if (xk - center).abs() <= 0.5 * self.eps {
                        v.push(i as usize);
                    }
                }
                v
            })
            .collect()
    }

    fn linear(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.counts)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }
}

fn flatten(p: &[CPoint]) -> Vec<f64> {
    p.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// ε-grid coverage of `points` (each a point of `C^m`) in `domain`.
///
/// The grid tiles the domain's bounding box from its lower corner. A cell
/// counts iff its centre lies in the domain with margin `ε/2`, and is hit
/// iff some point is within sup-norm distance `ε/2` of the centre.
pub fn coverage(points: &[CVec], domain: &dyn Domain, eps: f64) -> Result<CoverageReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let grid = Grid::new(domain, eps)?;
    let qualifying: Vec<usize> = (0..grid.total())
        .into_par_iter()
        .filter(|&i| domain.contains_with_margin(&grid.center_of(i), 0.5 * eps))
        .collect();
    if qualifying.is_empty() {
        return Err(Error::EmptyDomain { epsilon: eps });
    }
    // linear index -> slot in `qualifying`
    let mut slot = vec![u32::MAX; grid.total()];
    for (s, &i) in qualifying.iter().enumerate() {
        slot[i] = s as u32;
    }

    let mut first_hit: Vec<Option<usize>> = vec![None; qualifying.len()];
    for (n, p) in points.iter().enumerate() {
        let x = flatten(p);
        if x.len() != domain.dim() {
            return Err(Error::InvalidArgument(format!(
                "point {n} has dimension {}, domain has {}",
                x.len(),
                domain.dim()
            )));
        }
        let cands = grid.candidates(&x);
        for_each_index(&cands, |idx| {
            let s = slot[grid.linear(idx)];
            if s != u32::MAX && first_hit[s as usize].is_none() {
                first_hit[s as usize] = Some(n);
            }
        });
    }

    let cells_hit = first_hit.iter().filter(|h| h.is_some()).count();
    Ok(CoverageReport {
        epsilon: eps,
        cells_total: qualifying.len(),
        cells_hit,
        coverage_fraction: cells_hit as f64 / qualifying.len() as f64,
        cell_centers: qualifying.iter().map(|&i| grid.center_of(i)).collect(),
        max_first_hit: first_hit.iter().flatten().copied().max(),
        first_hit_time: first_hit,
    })
}

fn for_each_index(cands: &[Vec<usize>], mut f: impl FnMut(&[usize])) {
    if cands.iter().any(|c| c.is_empty()) {
        return;
    }
    let mut pos = vec![0usize; cands.len()];
    let mut idx: Vec<usize> = cands.iter().map(|c| c[0]).collect();
    loop {
        f(&idx);
        let mut k = cands.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < cands[k].len() {
                idx[k] = cands[k][pos[k]];
                break;
            }
            pos[k] = 0;
            idx[k] = cands[k][0];
        }
    }
}

/// One coverage report per resolution, for a strictly decreasing list.
pub fn density_profile(
    points: &[CVec],
    domain: &dyn Domain,
    eps_list: &[f64],
) -> Result<Vec<CoverageReport>> {
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "resolutions must be strictly decreasing".into(),
        ));
    }
    eps_list
        .iter()
        .map(|&e| coverage(points, domain, e))
        .collect()
}
