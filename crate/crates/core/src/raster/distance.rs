//! Exact squared Euclidean distance transform and the Wada distance checks.

use rayon::prelude::*;
use serde::Serialize;

use super::{Label, Raster};

/// Squared distance reported for pixels when the target set is empty.
pub const NO_TARGET: u64 = u64::MAX;

/// Squared Euclidean distance from each pixel centre of a `side x side`
/// grid to the nearest pixel centre with `target[i]` set (Meijster et al.).
pub fn squared_edt(side: usize, target: &[bool]) -> Vec<u64> {
    assert_eq!(target.len(), side * side);
    // Sentinel larger than any in-grid distance; its square stays well inside i64.
    let far = 2 * side as i64 + 1;
    // Vertical pass: distance to the nearest target in the same column.
    let mut g = vec![far; side * side];
    for y in 0..side {
        let (done, rest) = g.split_at_mut(y * side);
        let row = &mut rest[..side];
        let prev = y.checked_sub(1).map(|p| &done[p * side..(p + 1) * side]);
        for x in 0..side {
            row[x] = if target[y * side + x] {
                0
            } else {
                prev.map_or(far, |p| (p[x] + 1).min(far))
            };
        }
    }
    for y in (0..side.saturating_sub(1)).rev() {
        let (head, tail) = g.split_at_mut((y + 1) * side);
        let row = &mut head[y * side..];
        let below = &tail[..side];
        for x in 0..side {
            row[x] = row[x].min(below[x] + 1);
        }
    }
    // Horizontal pass: lower envelope of parabolas per row.
    let mut out = vec![0u64; side * side];
    out.par_chunks_mut(side).enumerate().for_each(|(y, out_row)| {
        let gy = &g[y * side..(y + 1) * side];
        let f = |x: i64, i: usize| (x - i as i64).pow(2) + gy[i].pow(2);
        let sep = |i: usize, u: usize| {
            let (i64i, i64u) = (i as i64, u as i64);
            (i64u * i64u - i64i * i64i + gy[u].pow(2) - gy[i].pow(2)).div_euclid(2 * (i64u - i64i))
        };
        let mut s = vec![0usize; side];
        let mut t = vec![0i64; side];
        let mut q: usize = 0;
        for u in 1..side {
            loop {
                if f(t[q], s[q]) <= f(t[q], u) {
                    break;
                }
                if q == 0 {
                    s[0] = u;
                    t[0] = 0;
                    break;
                }
                q -= 1;
            }
            if s[q] == u {
                continue;
            }
            let w = 1 + sep(s[q], u);
            if w < side as i64 {
                q += 1;
                s[q] = u;
                t[q] = w;
            }
        }
        for u in (0..side).rev() {
            let d = f(u as i64, s[q]);
            out_row[u] = if gy[s[q]] >= far { NO_TARGET } else { d as u64 };
            if q > 0 && u as i64 == t[q] {
                q -= 1;
            }
        }
    });
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WadaDistanceReport {
    pub day: usize,
    pub island_pixels: u64,
    /// Largest squared distance, in pixels, from an island pixel to the lake.
    pub max_squared_px: u64,
    /// `2 (k + 1)^2` for `k` pixels per `t_day`: `(sqrt 2 t_day + one pixel diagonal)^2`.
    pub bound_squared_px: u64,
    pub max_distance: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `island_day`: pixels dug after it count as island.
fn band_report(r: &Raster, day: usize, island_day: usize, target: impl Fn(u8) -> bool + Sync) -> WadaDistanceReport {
    let side = r.side as usize;
    let is_island = |p: u8| p == 0 || p as usize > island_day;
    let mask: Vec<bool> = r.pixels.par_iter().map(|p| target(*p)).collect();
    let k = r.pixels_per_scale(day) as u64;
    let bound_squared_px = 2 * (k + 1) * (k + 1);
    let (island_pixels, max_squared_px) = if mask.iter().any(|m| *m) {
        let d2 = squared_edt(side, &mask);
        r.pixels
            .par_iter()
            .zip(d2.par_iter())
            .filter(|(p, _)| is_island(**p))
            .map(|(_, d)| (1u64, *d))
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1.max(b.1)))
    } else {
        let island = r.pixels.par_iter().filter(|p| is_island(**p)).count() as u64;
        (island, if island > 0 { NO_TARGET } else { 0 })
    };
    let px = 1.0 / side as f64;
    WadaDistanceReport {
        day,
        island_pixels,
        max_squared_px,
        bound_squared_px,
        max_distance: if max_squared_px == NO_TARGET { f64::INFINITY } else { (max_squared_px as f64).sqrt() * px },
        bound: (bound_squared_px as f64).sqrt() * px,
        pass: max_squared_px <= bound_squared_px,
    }
}

/// Every pixel of the island left after `day` must lie within `sqrt 2 t_day`
/// plus one pixel diagonal of the canal dug on `day`. Day 0 passes vacuously.
pub fn wada_distance_check(r: &Raster, day: usize) -> crate::error::Result<WadaDistanceReport> {
    if day > r.day {
        return Err(crate::error::WadaError::Precondition(format!(
            "day {day} was not dug on a raster through day {}",
            r.day
        )));
    }
    if day == 0 {
        return Ok(WadaDistanceReport {
            day,
            island_pixels: (r.side as u64).pow(2),
            max_squared_px: 0,
            bound_squared_px: 0,
            max_distance: 0.0,
            bound: 0.0,
            pass: true,
        });
    }
    let d = day as u8;
    Ok(band_report(r, day, day, move |p| p == d))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LakeBand {
    pub colour: Label,
    /// Latest day this colour was dug; its scale sets the band.
    pub day: usize,
    pub report: WadaDistanceReport,
}

/// Distance from the island to each whole lake, against the band of the
/// latest day that lake grew. Colours not yet dug are omitted.
pub fn all_lakes_check(r: &Raster) -> Vec<LakeBand> {
    Label::LAKES
        .into_iter()
        .filter_map(|colour| {
            let day = colour.last_day(r.day)?;
            let report = band_report(r, day, r.day, move |p| p != 0 && Label::of_day(p as usize) == colour);
            Some(LakeBand { colour, day, report })
        })
        .collect()
}
