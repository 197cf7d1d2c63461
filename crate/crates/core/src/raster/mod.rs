//! Pixel ground truth: the unit square at resolution `t_level`, each pixel
//! labelled with the day its lake was dug (0 for island).
//!
//! Rows are stored bottom-up (`y` grows northward), row-major.

pub mod boxcount;
pub mod distance;
pub mod ppm;
pub mod topology;

use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WadaError};
use crate::sequence::ParamSequence;
use crate::tiling::{templates, SquareType, Tiling, TilingConfig, TilingDays};

pub use boxcount::{anchored_box_count, box_set, empirical_box_count, BoundaryRule, BoxCountSample};
pub use distance::{all_lakes_check, squared_edt, wada_distance_check, LakeBand, WadaDistanceReport};
pub use ppm::{ppm_bytes, write_ppm};
pub use topology::{connectivity_check, LakeTopology, TopologyReport};

/// Default limit on the raster side in pixels.
pub const DEFAULT_RASTER_SIDE_CAP: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Island,
    Blue,
    Red,
    Green,
}

impl Label {
    pub const LAKES: [Label; 3] = [Label::Blue, Label::Red, Label::Green];

    /// Colour of the lake dug on `day`: blue, red, green in turn.
    pub fn of_day(day: usize) -> Label {
        match day {
            0 => Label::Island,
            d => match d % 3 {
                1 => Label::Blue,
                2 => Label::Red,
                _ => Label::Green,
            },
        }
    }

    /// Latest day `<= day` on which this colour was dug.
    pub fn last_day(self, day: usize) -> Option<usize> {
        (1..=day).rev().find(|d| Label::of_day(*d) == self)
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Island => "island",
            Label::Blue => "blue",
            Label::Red => "red",
            Label::Green => "green",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    level: usize,
    day: usize,
    side: u32,
    /// `a_1 .. a_level`.
    factors: Vec<u32>,
    pixels: Vec<u8>,
}

impl Raster {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Last day dug.
    pub fn day(&self) -> usize {
        self.day
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    /// Pixels per side of a square of side `t_n`.
    pub fn pixels_per_scale(&self, n: usize) -> u32 {
        self.factors[n.min(self.level)..].iter().product()
    }

    /// Dig day of every pixel, bottom row first.
    pub fn dig_days(&self) -> &[u8] {
        &self.pixels
    }

    pub fn dig_day(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.side as usize + x as usize]
    }

    pub fn label(&self, x: u32, y: u32) -> Label {
        Label::of_day(self.dig_day(x, y) as usize)
    }

    /// Pixel counts in the order island, blue, red, green.
    pub fn label_counts(&self) -> [u64; 4] {
        let mut by_day = [0u64; 256];
        for chunk in self.pixels.chunks(1 << 16) {
            for &p in chunk {
                by_day[p as usize] += 1;
            }
        }
        let mut out = [0u64; 4];
        for (d, n) in by_day.iter().enumerate() {
            out[Label::of_day(d) as usize] += n;
        }
        out
    }

    pub fn island_pixels(&self) -> u64 {
        self.pixels.par_iter().filter(|p| **p == 0).count() as u64
    }

    /// Island area as an exact fraction of the unit square.
    pub fn island_fraction(&self) -> BigRational {
        self.island_fraction_after(self.day)
    }

    /// Island area left after `day`, counting later canals as island.
    pub fn island_fraction_after(&self, day: usize) -> BigRational {
        let island = self
            .pixels
            .par_iter()
            .filter(|p| **p == 0 || **p as usize > day)
            .count();
        let side = BigUint::from(self.side);
        BigRational::new(BigUint::from(island).into(), (&side * &side).into())
    }

    /// The same square as it stood after `day`.
    pub fn as_of(&self, day: usize) -> Raster {
        let mut out = self.clone();
        if day < self.day {
            out.day = day;
            out.pixels.par_iter_mut().filter(|p| **p as usize > day).for_each(|p| *p = 0);
        }
        out
    }
}

/// Canal masks of every `(type, orientation)`, indexed `[kind][orient]`, row-major `a x a`.
fn oriented_masks(a: u32) -> Vec<Vec<Vec<bool>>> {
    let t = templates();
    SquareType::ALL
        .iter()
        .map(|&kind| {
            let canonical = t.canal_mask(kind, a);
            crate::tiling::Orient::all()
                .map(|g| {
                    let mut mask = vec![false; (a * a) as usize];
                    for v in 0..a {
                        for u in 0..a {
                            if canonical[(v * a + u) as usize] {
                                let (x, y) = g.apply_cell((u, v), a);
                                mask[(y * a + x) as usize] = true;
                            }
                        }
                    }
                    mask
                })
                .collect()
        })
        .collect()
}

/// Refines by `a`, painting the canal of `tiling` (whose cells are exactly
/// the island pixels) with label `day`; `None` only upsamples.
fn refine(prev: &Raster, a: u32, dig: Option<(&Tiling, u8)>) -> Result<Raster> {
    let side = prev.side as usize;
    let new_side = side * a as usize;
    let a_us = a as usize;
    let masks = dig.map(|_| oriented_masks(a));
    if let Some((tiling, _)) = dig {
        let island = prev.island_pixels();
        if island != tiling.len() as u64 {
            return Err(WadaError::Precondition(format!(
                "day {} tiling has {} squares but the island has {island} pixels",
                tiling.day(),
                tiling.len()
            )));
        }
    }
    let mut pixels = vec![0u8; new_side * new_side];
    pixels
        .par_chunks_mut(new_side * a_us)
        .enumerate()
        .try_for_each(|(y, block)| -> Result<()> {
            let row = &prev.pixels[y * side..(y + 1) * side];
            let mut cells = dig.map(|(t, _)| t.row(y as u32).iter().peekable());
            for (x, &p) in row.iter().enumerate() {
                let mask = match (&mut cells, &masks, p) {
                    (Some(cells), Some(masks), 0) => {
                        let cell = cells
                            .next_if(|c| c.x as usize == x)
                            .ok_or_else(|| WadaError::Precondition(format!("island pixel ({x}, {y}) has no square")))?;
                        Some(&masks[cell.kind as usize][cell.orient.index()])
                    }
                    _ => None,
                };
                let paint = dig.map_or(0, |(_, d)| d);
                for v in 0..a_us {
                    let out = &mut block[v * new_side + x * a_us..v * new_side + (x + 1) * a_us];
                    match mask {
                        Some(m) => {
                            for (u, o) in out.iter_mut().enumerate() {
                                *o = if m[v * a_us + u] { paint } else { 0 };
                            }
                        }
                        None => out.fill(p),
                    }
                }
            }
            Ok(())
        })?;
    let mut factors = prev.factors.clone();
    factors.push(a);
    Ok(Raster {
        level: prev.level + 1,
        day: prev.day + usize::from(dig.is_some()),
        side: new_side as u32,
        factors,
        pixels,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RasterConfig {
    /// Largest allowed side in pixels.
    pub side_cap: u64,
    pub tiling: TilingConfig,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig {
            side_cap: DEFAULT_RASTER_SIDE_CAP,
            tiling: TilingConfig::default(),
        }
    }
}

/// Side in pixels of a level-`level` raster, refusing anything above `cap`.
pub fn raster_side(seq: &ParamSequence, level: usize, cap: u64) -> Result<u32> {
    let mut side: u64 = 1;
    for a in seq.int_terms(level)? {
        side = side.saturating_mul(a as u64);
        if side > cap {
            return Err(WadaError::ResourceCap {
                what: "raster side",
                needed: seq.int_terms(level)?.iter().map(|a| *a as u128).product::<u128>().to_string(),
                cap: cap.to_string(),
            });
        }
    }
    Ok(side as u32)
}

/// The square after the digging of `day`, at resolution `t_day`.
pub fn rasterize(seq: &ParamSequence, day: usize) -> Result<Raster> {
    rasterize_at_level(seq, day, day, &RasterConfig::default())
}

/// The square after the digging of `day`, at resolution `t_level` (`level >= day`).
pub fn rasterize_at_level(seq: &ParamSequence, day: usize, level: usize, config: &RasterConfig) -> Result<Raster> {
    if level < day {
        return Err(WadaError::Precondition(format!(
            "raster level {level} cannot resolve the canal of day {day}"
        )));
    }
    if day > u8::MAX as usize {
        return Err(WadaError::InvalidArgument(format!("day {day} exceeds the label range")));
    }
    raster_side(seq, level, config.side_cap)?;
    let mut raster = Raster {
        level: 0,
        day: 0,
        side: 1,
        factors: Vec::new(),
        pixels: vec![0],
    };
    let mut days = TilingDays::new(seq, config.tiling);
    for d in 1..=level {
        let a = seq.int_term(d)?;
        raster = if d <= day {
            let tiling = days.next().expect("unbounded")?;
            refine(&raster, a, Some((&tiling, d as u8)))?
        } else {
            refine(&raster, a, None)?
        };
    }
    Ok(raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::island_area;

    fn seq(s: &str) -> ParamSequence {
        ParamSequence::parse(s).unwrap()
    }

    #[test]
    fn day_one_strip() {
        let r = rasterize(&seq("const:3"), 1).unwrap();
        assert_eq!(r.side(), 3);
        assert_eq!(r.label_counts(), [7, 2, 0, 0]);
        // The strip [0, 2/3] x [1/3, 2/3].
        assert_eq!(r.label(0, 1), Label::Blue);
        assert_eq!(r.label(1, 1), Label::Blue);
        assert_eq!(r.label(2, 1), Label::Island);
    }

    #[test]
    fn examples() {
        let r = rasterize(&seq("const:3"), 2).unwrap();
        assert_eq!(r.side(), 9);
        assert_eq!(r.island_pixels(), 43);
        let r0 = rasterize(&seq("const:3"), 0).unwrap();
        assert_eq!((r0.side(), r0.label_counts()), (1, [1, 0, 0, 0]));
        assert!(rasterize(&seq("const:5/2"), 1).is_err());
    }

    #[test]
    fn areas_are_exact() {
        for spec in ["const:3", "const:4", "list:3,4,5;cycle", "affine:3,1"] {
            let s = seq(spec);
            for day in 0..=4 {
                let r = rasterize(&s, day).unwrap();
                assert_eq!(r.island_fraction(), island_area(&s, day), "{spec} day {day}");
                let counts = r.label_counts();
                assert_eq!(counts.iter().sum::<u64>(), (r.side() as u64).pow(2));
            }
        }
    }

    #[test]
    fn higher_levels_upsample() {
        let s = seq("const:3");
        let coarse = rasterize(&s, 2).unwrap();
        let fine = rasterize_at_level(&s, 2, 4, &RasterConfig::default()).unwrap();
        assert_eq!((fine.side(), fine.day(), fine.level()), (81, 2, 4));
        for y in 0..81 {
            for x in 0..81 {
                assert_eq!(fine.dig_day(x, y), coarse.dig_day(x / 9, y / 9));
            }
        }
        assert_eq!(fine.pixels_per_scale(2), 9);
        assert_eq!(fine.as_of(1), rasterize_at_level(&s, 1, 4, &RasterConfig::default()).unwrap());
        assert_eq!(fine.island_fraction_after(1), island_area(&s, 1));
    }

    #[test]
    fn caps_and_preconditions() {
        let s = seq("const:3");
        let tight = RasterConfig {
            side_cap: 100,
            ..RasterConfig::default()
        };
        assert!(rasterize_at_level(&s, 4, 4, &tight).is_ok());
        assert!(matches!(
            rasterize_at_level(&s, 5, 5, &tight),
            Err(WadaError::ResourceCap { .. })
        ));
        assert!(rasterize_at_level(&s, 3, 2, &RasterConfig::default()).is_err());
    }

    #[test]
    fn thread_count_does_not_change_pixels() {
        let s = seq("list:3,4,5;cycle");
        let build = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| rasterize(&s, 4).unwrap())
        };
        assert_eq!(build(1), build(3));
    }
}
