//! Cross-checks of recurrence, tiling and raster, collected per day.

use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::counting::{area_bounds_check, box_counts, island_areas, turning_count, turning_count_closed};
use crate::error::{Result, WadaError};
use crate::raster::{
    all_lakes_check, box_set, connectivity_check, raster_side, rasterize_at_level, BoundaryRule, LakeBand, Raster,
    RasterConfig,
};
use crate::rational::format_rational;
use crate::sequence::{scale_values, ParamSequence};
use crate::tiling::{run_census, TilingDays};

/// Version tag of every JSON document.
pub const SCHEMA: &str = "wada-dim/1";

fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn ser_opt_rational<S: Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

fn ser_opt_big<S: Serializer>(n: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match n {
        Some(n) => s.serialize_str(&n.to_string()),
        None => s.serialize_none(),
    }
}

fn ser_big<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

/// Checks for one day `n`: the canal of day `n` is covered by boxes of side
/// `t_{n-1}`, and `A(n)` is the island left after it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub n: usize,
    #[serde(serialize_with = "ser_rational")]
    pub box_side: BigRational,
    #[serde(rename = "N_recurrence", serialize_with = "ser_opt_big")]
    pub n_recurrence: Option<BigUint>,
    #[serde(rename = "N_tiling", serialize_with = "ser_opt_big")]
    pub n_tiling: Option<BigUint>,
    #[serde(rename = "N_raster")]
    pub n_raster: Option<u64>,
    /// Raster boxes coincide with the positional tiling squares.
    pub boxes_match_tiling: Option<bool>,
    #[serde(rename = "T_closed", serialize_with = "ser_big")]
    pub t_closed: BigUint,
    #[serde(rename = "T_census", serialize_with = "ser_opt_big")]
    pub t_census: Option<BigUint>,
    #[serde(rename = "A_exact", serialize_with = "ser_rational")]
    pub a_exact: BigRational,
    #[serde(rename = "A_raster", serialize_with = "ser_opt_rational")]
    pub a_raster: Option<BigRational>,
    pub bounds_ok: bool,
    pub wada_ok: Option<bool>,
    pub topology_ok: Option<bool>,
}

impl VerifyRow {
    pub fn ok(&self) -> bool {
        let agree = |x: &Option<BigUint>| x.as_ref().is_none_or(|x| Some(x) == self.n_recurrence.as_ref());
        agree(&self.n_tiling)
            && agree(&self.n_raster.map(BigUint::from))
            && self.t_census.as_ref().is_none_or(|t| t == &self.t_closed)
            && self.a_raster.as_ref().is_none_or(|a| a == &self.a_exact)
            && self.bounds_ok
            && self.boxes_match_tiling != Some(false)
            && self.wada_ok != Some(false)
            && self.topology_ok != Some(false)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyConfig {
    pub raster: RasterConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub sequence: String,
    pub days: usize,
    /// Why tiling and raster columns are empty, when they are.
    pub skipped: Option<String>,
    pub raster_level: Option<usize>,
    pub raster_side: Option<u32>,
    /// Largest day whose tiling was built square by square.
    pub positional_days: usize,
    pub rows: Vec<VerifyRow>,
    /// Distance from the final island to each whole lake.
    pub lake_bands: Vec<LakeBand>,
    pub pass: bool,
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

struct Stopwatch(Vec<(String, f64)>, Instant);

impl Stopwatch {
    fn lap(&mut self, what: &str) {
        let now = Instant::now();
        self.0.push((what.to_string(), (now - self.1).as_secs_f64()));
        self.1 = now;
    }
}

/// Runs every comparison available for `days` days. Tiling and raster parts
/// shrink to what the caps allow; non-integer sequences get exact columns only.
pub fn verify(seq: &ParamSequence, days: usize, config: &VerifyConfig) -> Result<VerificationReport> {
    if days == 0 {
        return Err(WadaError::InvalidArgument("verify needs at least one day".into()));
    }
    let mut clock = Stopwatch(Vec::new(), Instant::now());
    let t = scale_values(seq, days);
    let areas = island_areas(seq, days);
    let bounds = area_bounds_check(seq, days)?;
    let integer = seq.int_terms(days + 1).is_ok();
    let counts = if integer { Some(box_counts(seq, days)?) } else { None };
    let mut rows: Vec<VerifyRow> = (1..=days)
        .map(|n| VerifyRow {
            n,
            box_side: t[n - 1].clone(),
            n_recurrence: counts.as_ref().map(|c| c[n - 1].clone()),
            n_tiling: None,
            n_raster: None,
            boxes_match_tiling: None,
            t_closed: turning_count_closed(n).unwrap_or_else(|| turning_count(n)),
            t_census: None,
            a_exact: areas[n].clone(),
            a_raster: None,
            bounds_ok: bounds.rows[n - 1].ok(),
            wada_ok: None,
            topology_ok: None,
        })
        .collect();
    clock.lap("exact");

    let mut report = VerificationReport {
        schema: SCHEMA,
        sequence: seq.spec(),
        days,
        skipped: None,
        raster_level: None,
        raster_side: None,
        positional_days: 0,
        rows: Vec::new(),
        lake_bands: Vec::new(),
        pass: false,
        timings: Vec::new(),
    };
    if !integer {
        report.skipped = Some("non-integer sequence: no tiling or raster".into());
    } else {
        for (row, census) in rows.iter_mut().zip(run_census(seq, days)?) {
            row.n_tiling = Some(census.total());
            row.t_census = Some(census.count(crate::tiling::SquareType::Turning));
        }
        clock.lap("census");
        let level = (1..=days + 1)
            .rev()
            .find(|l| raster_side(seq, *l, config.raster.side_cap).is_ok());
        if let Some(level) = level {
            let dug = days.min(level);
            let raster = rasterize_at_level(seq, dug, level, &config.raster)?;
            clock.lap("rasterize");
            report.raster_level = Some(level);
            report.raster_side = Some(raster.side());
            check_raster(&raster, seq, &mut rows, &mut report, config)?;
            clock.lap("raster checks");
        } else {
            report.skipped = Some(format!("raster side cap {} too small for level 1", config.raster.side_cap));
        }
    }
    report.pass = rows.iter().all(VerifyRow::ok) && report.lake_bands.iter().all(|b| b.report.pass);
    report.rows = rows;
    report.timings = clock.0;
    Ok(report)
}

fn check_raster(
    raster: &Raster,
    seq: &ParamSequence,
    rows: &mut [VerifyRow],
    report: &mut VerificationReport,
    config: &VerifyConfig,
) -> Result<()> {
    let mut tilings = TilingDays::new(seq, config.raster.tiling);
    for row in rows.iter_mut().filter(|r| r.n <= raster.day()) {
        let day = row.n;
        let positions = match tilings.next() {
            Some(Ok(t)) => {
                report.positional_days = day;
                Some(t.cells().iter().map(|c| c.pos()).collect::<Vec<_>>())
            }
            _ => None,
        };
        if raster.level() > day {
            let boxes = box_set(raster, day, raster.pixels_per_scale(day - 1), BoundaryRule::LakeSide);
            let island_side = box_set(raster, day, raster.pixels_per_scale(day - 1), BoundaryRule::IslandSide);
            row.n_raster = Some(boxes.len() as u64);
            row.boxes_match_tiling = Some(positions.as_ref().is_none_or(|p| p == &boxes) && boxes == island_side);
        }
        row.a_raster = Some(raster.island_fraction_after(day));
        row.wada_ok = Some(crate::raster::wada_distance_check(raster, day)?.pass);
        row.topology_ok = Some(connectivity_check(&raster.as_of(day)).pass);
    }
    report.lake_bands = all_lakes_check(raster);
    Ok(())
}
