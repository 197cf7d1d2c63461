//! Box counts of lake boundaries measured on the raster.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::Raster;
use crate::error::{Result, WadaError};

/// Which side of the lake boundary is rasterised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryRule {
    /// Lake pixels 4-adjacent to a pixel outside the lake.
    LakeSide,
    /// Island pixels 4-adjacent to the lake.
    IslandSide,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxCountSample {
    #[serde(serialize_with = "crate::counting::ser_rational")]
    pub box_side: BigRational,
    /// Boxes meeting the lake-side boundary.
    pub count: u64,
    /// The same count for the island-side boundary.
    pub island_side_count: u64,
    /// Day whose canal boundary was covered.
    pub target: usize,
}

impl BoxCountSample {
    pub fn consistent(&self) -> bool {
        self.count == self.island_side_count
    }
}

fn is_boundary(r: &Raster, x: usize, y: usize, day: u8, rule: BoundaryRule) -> bool {
    let side = r.side as usize;
    let px = &r.pixels;
    let here = px[y * side + x];
    let in_lake = here == day;
    let hit = |p: u8| match rule {
        BoundaryRule::LakeSide => p != day,
        BoundaryRule::IslandSide => p == day,
    };
    let wanted = match rule {
        BoundaryRule::LakeSide => in_lake,
        BoundaryRule::IslandSide => here == 0,
    };
    wanted
        && ((x > 0 && hit(px[y * side + x - 1]))
            || (x + 1 < side && hit(px[y * side + x + 1]))
            || (y > 0 && hit(px[(y - 1) * side + x]))
            || (y + 1 < side && hit(px[(y + 1) * side + x])))
}

fn box_pixels(r: &Raster, box_side: &BigRational) -> Result<u32> {
    let px = box_side * BigRational::from_integer(r.side.into());
    if !px.is_integer() || !px.is_positive() || px > BigRational::from_integer(r.side.into()) {
        return Err(WadaError::Precondition(format!(
            "box side {box_side} is not a positive multiple of the pixel size 1/{} within the square",
            r.side
        )));
    }
    let b = px.to_integer().to_u32().expect("bounded by side");
    if !r.side.is_multiple_of(b) {
        return Err(WadaError::Precondition(format!(
            "box side {b} pixels does not tile a side of {} pixels",
            r.side
        )));
    }
    Ok(b)
}

/// Grid boxes of side `box_px` pixels meeting the boundary of the canal of
/// `day`, as `(x, y)` sorted by `(y, x)`.
pub fn box_set(r: &Raster, day: usize, box_px: u32, rule: BoundaryRule) -> Vec<(u32, u32)> {
    let b = box_px as usize;
    let boxes = r.side as usize / b;
    let d = day as u8;
    (0..boxes)
        .into_par_iter()
        .flat_map_iter(|by| {
            let mut hit = vec![false; boxes];
            for y in by * b..(by + 1) * b {
                for (bx, h) in hit.iter_mut().enumerate() {
                    if !*h {
                        *h = (bx * b..(bx + 1) * b).any(|x| is_boundary(r, x, y, d, rule));
                    }
                }
            }
            hit.into_iter()
                .enumerate()
                .filter(|(_, h)| *h)
                .map(move |(bx, _)| (bx as u32, by as u32))
        })
        .collect()
}

/// Boxes of side `box_side` covering the boundary of the canal dug on `day`,
/// counted with both boundary rules.
pub fn empirical_box_count(r: &Raster, day: usize, box_side: &BigRational) -> Result<BoxCountSample> {
    if day == 0 || day > r.day {
        return Err(WadaError::Precondition(format!(
            "day {day} was not dug on a raster through day {}",
            r.day
        )));
    }
    if r.level < day + 1 {
        return Err(WadaError::Precondition(format!(
            "raster level {} must be at least {} to resolve the boundary of day {day}",
            r.level,
            day + 1
        )));
    }
    let b = box_pixels(r, box_side)?;
    Ok(BoxCountSample {
        box_side: box_side.clone(),
        count: box_set(r, day, b, BoundaryRule::LakeSide).len() as u64,
        island_side_count: box_set(r, day, b, BoundaryRule::IslandSide).len() as u64,
        target: day,
    })
}

/// Origin-anchored boxes of side `eps` (any positive rational) whose interior
/// meets an island pixel.
pub fn anchored_box_count(r: &Raster, eps: &BigRational) -> Result<u64> {
    if !eps.is_positive() {
        return Err(WadaError::InvalidArgument(format!("box side {eps} must be positive")));
    }
    let side = r.side as usize;
    // Box k spans pixel coordinates [k*e, (k+1)*e) with e = eps*side = num/den.
    let e = eps * BigRational::from_integer(BigInt::from(r.side));
    let (num, den) = (
        e.numer().to_u128().ok_or_else(|| WadaError::InvalidArgument("box side too fine".into()))?,
        e.denom().to_u128().ok_or_else(|| WadaError::InvalidArgument("box side too fine".into()))?,
    );
    let boxes = (side as u128 * den).div_ceil(num) as usize;
    let lo = |k: usize| ((k as u128 * num) / den) as usize;
    let hi = |k: usize| ((((k + 1) as u128 * num).div_ceil(den)) as usize).min(side);
    let first_box = |x: usize| ((x as u128 * den) / num) as usize;
    let last_box = |x: usize| (((x + 1) as u128 * den).div_ceil(num) - 1) as usize;
    let total = (0..boxes)
        .into_par_iter()
        .map(|ky| {
            let mut hit = vec![false; boxes];
            for y in lo(ky)..hi(ky) {
                let row = &r.pixels[y * side..(y + 1) * side];
                for (x, _) in row.iter().enumerate().filter(|(_, p)| **p == 0) {
                    for h in &mut hit[first_box(x)..=last_box(x).min(boxes - 1)] {
                        *h = true;
                    }
                }
            }
            hit.iter().filter(|h| **h).count() as u64
        })
        .sum();
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::counting::box_count_general;
    use crate::raster::{rasterize_at_level, RasterConfig};
    use crate::sequence::ParamSequence;
    use crate::tiling::{run, TilingConfig};

    fn seq(s: &str) -> ParamSequence {
        ParamSequence::parse(s).unwrap()
    }

    fn unit_over(n: u64) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(n))
    }

    #[test]
    fn examples() {
        let s = seq("const:3");
        let r3 = rasterize_at_level(&s, 2, 3, &RasterConfig::default()).unwrap();
        let sample = empirical_box_count(&r3, 2, &unit_over(3)).unwrap();
        assert_eq!((sample.count, sample.island_side_count), (7, 7));
        let r4 = rasterize_at_level(&s, 3, 4, &RasterConfig::default()).unwrap();
        assert_eq!(empirical_box_count(&r4, 3, &unit_over(9)).unwrap().count, 43);
        let r2 = rasterize_at_level(&s, 1, 2, &RasterConfig::default()).unwrap();
        assert_eq!(empirical_box_count(&r2, 1, &unit_over(1)).unwrap().count, 1);
    }

    #[test]
    fn preconditions() {
        let s = seq("const:3");
        let r = rasterize_at_level(&s, 2, 2, &RasterConfig::default()).unwrap();
        assert!(empirical_box_count(&r, 2, &unit_over(3)).is_err(), "level must exceed the day");
        let r = rasterize_at_level(&s, 2, 3, &RasterConfig::default()).unwrap();
        assert!(empirical_box_count(&r, 2, &unit_over(2)).is_err(), "not a pixel multiple");
        assert!(empirical_box_count(&r, 3, &unit_over(3)).is_err(), "not dug yet");
    }

    #[test]
    fn boxes_are_the_tiling_squares() {
        for (spec, days) in [("const:3", 5), ("const:4", 4), ("list:3,4,5;cycle", 4)] {
            let s = seq(spec);
            let r = rasterize_at_level(&s, days, days + 1, &RasterConfig::default()).unwrap();
            for day in 1..=days {
                let tiling = run(&s, day, &TilingConfig::default()).unwrap();
                let expected: Vec<(u32, u32)> = tiling.cells().iter().map(|c| c.pos()).collect();
                let b = r.pixels_per_scale(day - 1);
                for rule in [BoundaryRule::LakeSide, BoundaryRule::IslandSide] {
                    assert_eq!(box_set(&r, day, b, rule), expected, "{spec} day {day} {rule:?}");
                }
                assert_eq!(
                    num_bigint::BigUint::from(expected.len()),
                    box_count_general(&s, day - 1).unwrap()
                );
            }
        }
    }

    #[test]
    fn anchored_boxes_on_the_grid_match_plain_counts() {
        let s = seq("const:3");
        let r = rasterize_at_level(&s, 2, 2, &RasterConfig::default()).unwrap();
        assert_eq!(anchored_box_count(&r, &unit_over(9)).unwrap(), 43);
        assert_eq!(anchored_box_count(&r, &unit_over(3)).unwrap(), 7);
        assert_eq!(anchored_box_count(&r, &unit_over(1)).unwrap(), 1);
        // Boxes of side 2/9 starting at the origin: a 5 x 5 grid, the last one clipped.
        let eps = BigRational::new(2.into(), 9.into());
        let n = anchored_box_count(&r, &eps).unwrap();
        assert!((20..=25).contains(&n), "{n}");
    }
}
