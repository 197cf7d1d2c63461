//! Exit criteria. Prints one PASS/FAIL line per criterion and exits non-zero
//! when any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use wada_core::counting::{
    area_bounds_check, box_count_intermediate, box_count_standard, box_counts,
    dimension_from_counts, island_area, squeeze_index, turning_count_closed,
};
use wada_core::raster::{
    all_lakes_check, anchored_box_count, box_set, connectivity_check, empirical_box_count, wada_distance_check,
    BoundaryRule, Raster,
};
use wada_core::sequence::{analytic_dimension, design_sequence, scale_values};
use wada_core::tiling::{run_census, SquareType, StartRule, TilingConfig, TilingDays};
use wada_core::{rasterize_at_level, ParamSequence, RasterConfig};

type Outcome = Result<String, String>;

fn seq(spec: &str) -> ParamSequence {
    ParamSequence::parse(spec).expect("valid spec")
}

fn unit_over(n: u64) -> BigRational {
    BigRational::new(1.into(), n.into())
}

fn raster(spec: &str, day: usize, level: usize) -> Raster {
    rasterize_at_level(&seq(spec), day, level, &RasterConfig::default()).expect("raster within caps")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn seed_counts() -> Outcome {
    let start = Instant::now();
    let exact: Vec<BigUint> = (0..3).map(box_count_standard).collect();
    ensure(exact == [1u32, 7, 43].map(BigUint::from), || format!("recurrence gave {exact:?}"))?;
    let r3 = raster("const:3", 2, 3);
    let at_third = empirical_box_count(&r3, 2, &unit_over(3)).map_err(|e| e.to_string())?;
    let r4 = raster("const:3", 3, 4);
    let at_ninth = empirical_box_count(&r4, 3, &unit_over(9)).map_err(|e| e.to_string())?;
    ensure(at_third.count == 7 && at_third.consistent(), || format!("{at_third:?}"))?;
    ensure(at_ninth.count == 43 && at_ninth.consistent(), || format!("{at_ninth:?}"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("N = 1, 7, 43; raster 7 at 1/3, 43 at 1/9 in {:.2?}", start.elapsed()))
}

fn three_way_equivalence() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    for (spec, days) in [("const:3", 6), ("const:4", 4), ("list:3,4,5;cycle", 5)] {
        let s = seq(spec);
        let r = raster(spec, days, days + 1);
        let recurrence = box_counts(&s, days).map_err(|e| e.to_string())?;
        let tilings = TilingDays::new(&s, TilingConfig::default()).take(days);
        for (day, tiling) in (1..=days).zip(tilings) {
            let tiling = tiling.map_err(|e| e.to_string())?;
            let box_px = r.pixels_per_scale(day - 1);
            let lake_side = box_set(&r, day, box_px, BoundaryRule::LakeSide);
            let island_side = box_set(&r, day, box_px, BoundaryRule::IslandSide);
            let cells: Vec<(u32, u32)> = tiling.cells().iter().map(|c| c.pos()).collect();
            let expected = &recurrence[day - 1];
            ensure(
                BigUint::from(tiling.census().total()) == *expected
                    && BigUint::from(lake_side.len()) == *expected
                    && lake_side == island_side
                    && lake_side == cells,
                || {
                    format!(
                        "{spec} day {day}: recurrence {expected}, tiling {}, raster {} / {}",
                        tiling.census().total(),
                        lake_side.len(),
                        island_side.len()
                    )
                },
            )?;
            compared += 1;
        }
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("{compared} (sequence, day) triples agree, box sets equal tiling squares, {:.2?}", start.elapsed()))
}

fn turning_counts() -> Outcome {
    let s = seq("const:3");
    let census = run_census(&s, 12).map_err(|e| e.to_string())?;
    for c in &census {
        let expected = match c.day {
            1..=4 => BigUint::from([0u32, 2, 6, 14][c.day - 1]),
            n => turning_count_closed(n).expect("n >= 5"),
        };
        let got = c.count(SquareType::Turning);
        ensure(got == expected, || format!("day {}: census {got}, expected {expected}", c.day))?;
    }
    // The positional tilings agree with the census for either choice of start Terminal.
    for rule in [StartRule::SmallestPos, StartRule::LargestPos] {
        let config = TilingConfig {
            start_rule: rule,
            ..TilingConfig::default()
        };
        for (tiling, c) in TilingDays::new(&s, config).take(7).zip(&census) {
            let tiling = tiling.map_err(|e| e.to_string())?;
            ensure(Some(tiling.census()) == c.to_census(), || {
                format!("positional day {} ({rule:?}) differs from census", tiling.day())
            })?;
        }
    }
    Ok(format!(
        "T = 0, 2, 6, 14 then 9/8 2^n - 4 through n = 12 (T(12) = {})",
        census[11].count(SquareType::Turning)
    ))
}

fn area_identities() -> Outcome {
    let mut pairs = 0;
    for (spec, days) in [("const:3", 6), ("const:4", 4), ("list:3,4,5;cycle", 5)] {
        let s = seq(spec);
        let r = raster(spec, days, days);
        for day in 0..=days {
            let raster_area = r.island_fraction_after(day);
            ensure(raster_area == island_area(&s, day), || {
                format!("{spec} day {day}: raster {raster_area}, exact {}", island_area(&s, day))
            })?;
            pairs += 1;
        }
    }
    for spec in ["const:3", "const:4", "const:5/2", "affine:2,1"] {
        let s = seq(spec);
        let report = area_bounds_check(&s, 20).map_err(|e| e.to_string())?;
        report.ensure().map_err(|e| format!("{spec}: {e}"))?;
        let sandwiches = report.rows.iter().filter(|r| r.sandwich.is_some()).count();
        let expect_sandwich = if s.is_integer_only() { 20 } else { 0 };
        ensure(sandwiches == expect_sandwich, || format!("{spec}: {sandwiches} sandwich rows"))?;
    }
    Ok(format!(
        "{pairs} raster areas exact; area bounds, overlap sandwich and tight cover hold to n = 20"
    ))
}

fn analytic_dimensions() -> Outcome {
    let ln6_ln3 = 6f64.ln() / 3f64.ln();
    let standard = analytic_dimension(&seq("const:3"), 20).map_err(|e| e.to_string())?;
    let value = standard.value.unwrap_or(f64::NAN);
    ensure((value - ln6_ln3).abs() < 1e-12, || format!("const:3 gave {value}"))?;
    for c in [3u32, 4, 10, 100] {
        let d = analytic_dimension(&seq(&format!("const:{c}")), 20)
            .map_err(|e| e.to_string())?
            .value
            .unwrap_or(f64::NAN);
        let expected = 1.0 + 2f64.ln() / (c as f64).ln();
        ensure((d - expected).abs() < 1e-12, || format!("const:{c} gave {d}, expected {expected}"))?;
    }
    let mut worst: f64 = 0.0;
    for target in [1.2, 1.5, 1.8, ln6_ln3] {
        let design = design_sequence(target).map_err(|e| e.to_string())?;
        let back = design.sequence.limit_dimension();
        worst = worst.max((back - target).abs());
        ensure((back - target).abs() < 1e-9, || {
            format!("design {target} -> {} -> {back}", design.sequence)
        })?;
    }
    Ok(format!("const:3 = {value:.15}; design round trip error {worst:.1e}"))
}

fn empirical_dimensions() -> Outcome {
    let start = Instant::now();
    let target = 1.6309;
    let s = seq("const:3");
    // Boxes of side t_n cover the canal of day n + 1.
    let r = raster("const:3", 7, 8);
    let t = scale_values(&s, 20);
    let mut measured = Vec::new();
    for (n, tn) in t.iter().enumerate().take(7).skip(2) {
        let sample = empirical_box_count(&r, n + 1, tn).map_err(|e| e.to_string())?;
        ensure(sample.consistent(), || format!("boundary rules disagree at t_{n}: {sample:?}"))?;
        measured.push((tn.clone(), BigUint::from(sample.count)));
    }
    let raster_fit = dimension_from_counts(&measured).map_err(|e| e.to_string())?.value.unwrap_or(f64::NAN);
    let counts = box_counts(&s, 20).map_err(|e| e.to_string())?;
    let exact: Vec<_> = (1..=20).map(|n| (t[n].clone(), counts[n].clone())).collect();
    let exact_fit = dimension_from_counts(&exact).map_err(|e| e.to_string())?.value.unwrap_or(f64::NAN);
    ensure((raster_fit - target).abs() <= 0.05, || format!("raster regression {raster_fit}"))?;
    ensure((exact_fit - target).abs() <= 0.005, || format!("recurrence regression {exact_fit}"))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "raster t_2..t_6 slope {raster_fit:.5}, recurrence t_1..t_20 slope {exact_fit:.5}, {:.2?}",
        start.elapsed()
    ))
}

fn wada_distances() -> Outcome {
    let r = raster("const:3", 6, 7);
    let mut worst = 0.0f64;
    for day in 1..=6 {
        let report = wada_distance_check(&r, day).map_err(|e| e.to_string())?;
        ensure(report.pass, || format!("day {day}: {report:?}"))?;
        worst = worst.max(report.max_distance / report.bound);
    }
    let bands = all_lakes_check(&r);
    ensure(bands.len() == 3 && bands.iter().all(|b| b.report.pass), || format!("{bands:?}"))?;
    Ok(format!(
        "days 1-6 within sqrt2 t_n + diagonal (worst ratio {worst:.3}); day-6 island near all three lakes"
    ))
}

fn topology() -> Outcome {
    let mut checked = 0;
    for (spec, days) in [("const:3", 6), ("const:4", 4), ("list:3,4,5;cycle", 5)] {
        let r = raster(spec, days, days);
        for day in 1..=days {
            let report = connectivity_check(&r.as_of(day));
            ensure(report.pass, || format!("{spec} day {day}: {report:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (sequence, day) rasters: lakes simply connected and disjoint, island connected"))
}

fn squeeze_brackets() -> Outcome {
    let s = seq("const:3");
    // The deepest feasible island stands in for the common boundary.
    let r = raster("const:3", 8, 8);
    let t = scale_values(&s, 6);
    let (lo, hi) = (wada_core::rational::to_f64(&t[6]), wada_core::rational::to_f64(&t[2]));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut inside = 0;
    let mut below = Vec::new();
    let mut above = Vec::new();
    for _ in 0..10 {
        let eps_f = rng.random_range(lo..hi);
        let eps = BigRational::new(((eps_f * 1e9).round() as i64).into(), 1_000_000_000i64.into());
        let (n, p) = squeeze_index(&s, &eps).map_err(|e| e.to_string())?;
        let lower = box_count_intermediate(&s, n, p).map_err(|e| e.to_string())?;
        let upper = box_count_intermediate(&s, n, p + 1).map_err(|e| e.to_string())?;
        let count = BigUint::from(anchored_box_count(&r, &eps).map_err(|e| e.to_string())?);
        if count < lower {
            below.push(format!("eps={eps_f:.5}: {count} < {lower}"));
        } else if count > upper {
            above.push(format!("eps={eps_f:.5} (n={n}, p={p}): {count} > {upper}"));
        } else {
            inside += 1;
        }
    }
    ensure(below.is_empty() && above.is_empty(), || {
        format!(
            "{inside}/10 inside; {} below the lower bracket, {} above the upper: {}",
            below.len(),
            above.len(),
            below.iter().chain(&above).cloned().collect::<Vec<_>>().join("; ")
        )
    })?;
    Ok(format!("{inside}/10 anchored counts inside [N(t_n/p), N(t_n/(p+1))]"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("seed counts", seed_counts),
        ("three-way N equivalence", three_way_equivalence),
        ("turning counts", turning_counts),
        ("area identities", area_identities),
        ("analytic dimension", analytic_dimensions),
        ("empirical dimension", empirical_dimensions),
        ("Wada distances", wada_distances),
        ("topology", topology),
        ("squeeze brackets", squeeze_brackets),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

