//! The two affine expanding branches `F_s(z) = √2·i·z + s·a` (`s ∈ {1, 2}`),
//! their contracting inverses, the piecewise map `F` on the union of the two
//! open half rectangles, forward itineraries and the coordinatewise product
//! system.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{diam_r, in_rect, CPoint, Rect, MID, WIDTH};

/// Forward addresses are only trusted up to this depth in double precision:
/// rounding grows by `√2` per step and must stay below the bad-set margin.
pub const MAX_ADDRESS_DEPTH: usize = 60;

/// Branch index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
#[repr(u8)]
pub enum Symbol {
    One = 1,
    Two = 2,
}

impl Symbol {
    pub fn value(self) -> u8 {
        self as u8
    }

    /// Translation term `s·a` of the branch.
    fn translation(self) -> f64 {
        f64::from(self.value()) * WIDTH
    }

    /// Half rectangle on which this branch is used.
    pub fn domain(self) -> Rect {
        match self {
            Symbol::One => Rect::lower(),
            Symbol::Two => Rect::upper(),
        }
    }
}

impl From<Symbol> for u8 {
    fn from(s: Symbol) -> u8 {
        s.value()
    }
}

impl TryFrom<u8> for Symbol {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Symbol::One),
            2 => Ok(Symbol::Two),
            other => Err(Error::InvalidArgument(format!(
                "symbol {other} not in {{1, 2}}"
            ))),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Finite symbol sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    /// Parses a word written as a string of the digits `1` and `2`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '1' => Ok(Symbol::One),
                '2' => Ok(Symbol::Two),
                other => Err(Error::Parse(format!("invalid symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// One symbol per coordinate of the product system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductSymbol(pub Vec<Symbol>);

/// Dimension and rectangles of the (product) system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub m: usize,
    pub r: Rect,
    pub r1: Rect,
    pub r2: Rect,
}

impl SystemSpec {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("dimension m must be >= 1".into()));
        }
        Ok(SystemSpec {
            m,
            r: Rect::full(),
            r1: Rect::lower(),
            r2: Rect::upper(),
        })
    }
}

/// `F_s(z) = √2·i·z + s·a`, defined on the whole plane.
#[inline]
pub fn branch_forward(s: Symbol, z: CPoint) -> CPoint {
    // √2·i·(x + iy) = -√2·y + i·√2·x
    CPoint::new(-SQRT_2 * z.im + s.translation(), SQRT_2 * z.re)
}

/// Inverse branch `(w - s·a) / (√2·i)`; contracts distances by exactly `1/√2`.
#[inline]
pub fn branch_inverse(s: Symbol, w: CPoint) -> CPoint {
    // (x + iy)/(√2 i) = (y - i x)/√2
    let x = w.re - s.translation();
    CPoint::new(w.im / SQRT_2, -x / SQRT_2)
}

/// Applies `F`: branch 1 on the lower half, branch 2 on the upper half.
/// Points within `margin` of a splitting or boundary line are refused.
pub fn apply_map(z: CPoint, margin: f64) -> Result<(Symbol, CPoint)> {
    classify(z, margin)
        .map(|s| (s, branch_forward(s, z)))
        .ok_or(Error::BadSetProximity {
            step: 0,
            coord: 0,
            point: z,
        })
}

fn classify(z: CPoint, margin: f64) -> Option<Symbol> {
    if in_rect(z, &Rect::lower(), margin) {
        Some(Symbol::One)
    } else if in_rect(z, &Rect::upper(), margin) {
        Some(Symbol::Two)
    } else {
        None
    }
}

/// Forward itinerary `(s_0, …, s_{k-1})` of `c`. Fails at the first iterate
/// that grazes the bad set, reporting its index in `step`.
pub fn address(c: CPoint, k: usize, margin: f64) -> Result<Word> {
    if k > MAX_ADDRESS_DEPTH {
        return Err(Error::AddressTooDeep {
            requested: k,
            max: MAX_ADDRESS_DEPTH,
        });
    }
    let mut z = c;
    let mut word = Vec::with_capacity(k);
    for step in 0..k {
        let (s, next) = apply_map(z, margin).map_err(|_| Error::BadSetProximity {
            step,
            coord: 0,
            point: z,
        })?;
        word.push(s);
        z = next;
    }
    Ok(Word(word))
}

/// Upper bound `diam_R · 2^{-k/2}` on the diameter of any depth-`k` cylinder.
pub fn cylinder_diameter(k: usize) -> f64 {
    diam_r() * 2f64.powf(-(k as f64) / 2.0)
}

/// Closure of the cylinder of `w`: the image of `R̄` under the inverse
/// branches of `w`, an axis-parallel rectangle.
pub fn cylinder_rect(w: &Word) -> Rect {
    let full = Rect::full();
    let pull = |z: CPoint| w.0.iter().rev().fold(z, |z, &s| branch_inverse(s, z));
    let p = pull(CPoint::new(full.x_min, full.y_min));
    let q = pull(CPoint::new(full.x_max, full.y_max));
    Rect {
        x_min: p.re.min(q.re),
        x_max: p.re.max(q.re),
        y_min: p.im.min(q.im),
        y_max: p.im.max(q.im),
    }
}

/// Whether the closed cylinder of `w` meets `∂R` or the splitting line.
pub fn touches_bad_set(w: &Word) -> bool {
    let r = cylinder_rect(w);
    let full = Rect::full();
    let tol = 1e-9 * diam_r();
    r.x_min <= full.x_min + tol
        || r.x_max >= full.x_max - tol
        || r.y_min <= full.y_min + tol
        || r.y_max >= full.y_max - tol
        || (r.y_min <= MID + tol && r.y_max >= MID - tol)
}

/// Smallest depth `k ≥ 1` whose cylinder bound is strictly below `radius`.
pub fn depth_for_radius(radius: f64) -> Result<usize> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target radius must be positive, got {radius}"
        )));
    }
    let mut k = 1;
    while cylinder_diameter(k) >= radius {
        k += 1;
        if k > MAX_ADDRESS_DEPTH {
            return Err(Error::AddressTooDeep {
                requested: k,
                max: MAX_ADDRESS_DEPTH,
            });
        }
    }
    Ok(k)
}

/// Coordinatewise `F` on the product of half rectangles.
pub fn product_apply(zs: &[CPoint], margin: f64) -> Result<(ProductSymbol, Vec<CPoint>)> {
    let mut symbols = Vec::with_capacity(zs.len());
    let mut images = Vec::with_capacity(zs.len());
    for (coord, &z) in zs.iter().enumerate() {
        let (s, w) = apply_map(z, margin).map_err(|_| Error::BadSetProximity {
            step: 0,
            coord,
            point: z,
        })?;
        symbols.push(s);
        images.push(w);
    }
    Ok((ProductSymbol(symbols), images))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{HEIGHT, MID};

    #[test]
    fn cylinder_rects() {
        assert_eq!(cylinder_rect(&Word::parse("1").unwrap()), Rect::lower());
        let up = cylinder_rect(&Word::parse("2").unwrap());
        assert!((up.y_min - MID).abs() < 1e-12 && (up.y_max - HEIGHT).abs() < 1e-12);
        // depth 2 splits each half vertically
        let r = cylinder_rect(&Word::parse("11").unwrap());
        assert!((r.width() - WIDTH / 2.0).abs() < 1e-12 && (r.height() - MID).abs() < 1e-12);
        assert!(touches_bad_set(&Word::parse("1").unwrap()));
        let inner = address(
            CPoint::new(WIDTH * 7.0 / 16.0, HEIGHT * 5.0 / 16.0),
            6,
            1e-6,
        )
        .unwrap();
        assert!(!touches_bad_set(&inner));
    }
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    // Independent oracle: z = a / (1 - √2 i), computed with complex division.
    fn fixed_point(s: Symbol) -> CPoint {
        c(f64::from(s.value()) * WIDTH, 0.0) / c(1.0, -SQRT_2)
    }

    #[test]
    fn branch_forward_examples() {
        assert_abs_diff_eq!(
            branch_forward(Symbol::One, c(0.0, 0.0)).re,
            8.885_765_876_316_732,
            epsilon = 1e-12
        );
        let w = branch_forward(Symbol::One, c(WIDTH, MID));
        assert!((w - c(0.0, HEIGHT)).norm() < 1e-12);
        let w = branch_forward(Symbol::Two, c(0.0, MID));
        assert!((w - c(WIDTH, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn branch_inverse_examples() {
        assert!(branch_inverse(Symbol::One, c(WIDTH, 0.0)).norm() < 1e-12);
        let z = branch_inverse(Symbol::One, c(0.0, HEIGHT));
        assert!((z - c(WIDTH, MID)).norm() < 1e-12);
        let z = c(3.0, 7.0);
        assert!((branch_inverse(Symbol::Two, branch_forward(Symbol::Two, z)) - z).norm() < 1e-13);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn apply_map_examples() {
        let (s, w) = apply_map(c(1.0, 1.0), 1e-6).unwrap();
        assert_eq!(s, Symbol::One);
        assert!((w - c(7.471_552_313_943_637, 1.414_213_562_373_095_1)).norm() < 1e-12);

        let p = fixed_point(Symbol::One);
        assert!((p - c(2.961_921_958_772_243, 4.188_790_204_786_390_5)).norm() < 1e-12);
        let (s, w) = apply_map(p, 1e-6).unwrap();
        assert_eq!(s, Symbol::One);
        assert!((w - p).norm() < 1e-12);

        assert!(matches!(
            apply_map(c(1.0, 2.0 * PI), 1e-6),
            Err(Error::BadSetProximity { .. })
        ));
    }

    #[test]
    fn address_examples() {
        let w = address(c(1.0, 1.0), 3, 1e-6).unwrap();
        assert_eq!(w, Word::parse("112").unwrap());
        let w = address(fixed_point(Symbol::One), 5, 1e-6).unwrap();
        assert_eq!(w.to_string(), "11111");
        match address(c(1.0, 2.0 * PI - 1e-9), 1, 1e-6) {
            Err(Error::BadSetProximity { step, .. }) => assert_eq!(step, 0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            address(c(1.0, 1.0), 61, 1e-6),
            Err(Error::AddressTooDeep { .. })
        ));
    }

    #[test]
    fn address_of_empty_depth_is_empty() {
        assert!(address(c(-5.0, 0.0), 0, 1e-6).unwrap().is_empty());
    }

    #[test]
    fn cylinder_diameter_examples() {
        assert_abs_diff_eq!(
            cylinder_diameter(0),
            15.390_597_961_942_367,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(cylinder_diameter(2), 7.695_298_980_971_184, epsilon = 1e-12);
        assert_abs_diff_eq!(
            cylinder_diameter(15),
            0.085_021_845_198_478_95,
            epsilon = 1e-12
        );
        assert!(cylinder_diameter(14) >= 0.1);
        assert_eq!(depth_for_radius(0.1).unwrap(), 15);
        assert_eq!(depth_for_radius(20.0).unwrap(), 1);
        assert_eq!(depth_for_radius(11.0).unwrap(), 1);
    }

    #[test]
    fn product_apply_examples() {
        let (s, w) = product_apply(&[c(1.0, 1.0)], 1e-6).unwrap();
        let (s1, w1) = apply_map(c(1.0, 1.0), 1e-6).unwrap();
        assert_eq!(s.0, vec![s1]);
        assert_eq!(w, vec![w1]);

        let (s, w) = product_apply(&[c(1.0, 1.0), c(1.0, 1.0)], 1e-6).unwrap();
        assert_eq!(s.0, vec![Symbol::One, Symbol::One]);
        assert_eq!(w, vec![w1, w1]);

        match product_apply(&[c(1.0, 1.0), c(1.0, 2.0 * PI)], 1e-6) {
            Err(Error::BadSetProximity { coord, .. }) => assert_eq!(coord, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corners_map_onto_corners() {
        let r = Rect::full();
        let full: Vec<CPoint> = vec![
            c(r.x_min, r.y_min),
            c(r.x_max, r.y_min),
            c(r.x_min, r.y_max),
            c(r.x_max, r.y_max),
        ];
        for s in [Symbol::One, Symbol::Two] {
            let d = s.domain();
            let corners = [
                c(d.x_min, d.y_min),
                c(d.x_max, d.y_min),
                c(d.x_min, d.y_max),
                c(d.x_max, d.y_max),
            ];
            let mut hit = [false; 4];
            for z in corners {
                let w = branch_forward(s, z);
                let j = full
                    .iter()
                    .position(|q| (q - w).norm() < 1e-12)
                    .unwrap_or_else(|| panic!("corner {z} -> {w} not a corner of R"));
                hit[j] = true;
            }
            assert!(hit.iter().all(|&h| h), "branch {s} is not onto the corners");
        }
    }

    #[test]
    fn word_serde_uses_digits() {
        let w = Word::parse("1221").unwrap();
        assert_eq!(serde_json::to_string(&w).unwrap(), "[1,2,2,1]");
        assert!(Word::parse("13").is_err());
    }

    fn symbol() -> impl Strategy<Value = Symbol> {
        prop_oneof![Just(Symbol::One), Just(Symbol::Two)]
    }

    proptest! {
        #[test]
        fn round_trip(x in 0.0..WIDTH, y in 0.0..HEIGHT, s in symbol()) {
            let z = c(x, y);
            prop_assert!((branch_inverse(s, branch_forward(s, z)) - z).norm() < 1e-12);
        }

        #[test]
        fn expansion_is_exactly_sqrt2(x1 in 0.0..WIDTH, y1 in 0.0..HEIGHT, x2 in 0.0..WIDTH, y2 in 0.0..HEIGHT, s in symbol()) {
            let (z1, z2) = (c(x1, y1), c(x2, y2));
            let d = (z1 - z2).norm();
            prop_assume!(d > 1e-6);
            let fwd = (branch_forward(s, z1) - branch_forward(s, z2)).norm();
            let inv = (branch_inverse(s, z1) - branch_inverse(s, z2)).norm();
            prop_assert!((fwd / d - SQRT_2).abs() < 1e-12 * SQRT_2 + 1e-13 / d);
            prop_assert!((inv / d - 1.0 / SQRT_2).abs() < 1e-12 + 1e-13 / d);
        }

        #[test]
        fn address_prefix_property(x in 0.01..WIDTH - 0.01, y in 0.01..HEIGHT - 0.01, k in 0usize..40) {
            if let (Ok(short), Ok(long)) = (address(c(x, y), k, 1e-6), address(c(x, y), k + 1, 1e-6)) {
                prop_assert_eq!(&long.0[..k], &short.0[..]);
            }
        }

        #[test]
        fn cylinder_bounds_nest(k in 0usize..80) {
            prop_assert!(cylinder_diameter(k + 1) <= cylinder_diameter(k));
        }
    }
}
