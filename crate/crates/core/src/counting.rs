//! Exact recurrences for the box counts `N(t_n)`, the turning counts `T(n)`
//! and the island areas `A(n)`, the area sandwich, and log-log regression.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Result, WadaError};
use crate::rational::{format_rational, from_biguint, from_u64, ln_biguint, ln_rational, pow2};
use crate::sequence::{
    scale_values, DimensionMethod, DimensionReport, ParamSequence, RegressionDiagnostics,
};

/// `N(3^{-n})` for the standard construction: `N(1) = 1`, `N(3^{-n}) = 6 N(3^{1-n}) + 1`.
pub fn box_count_standard(n: usize) -> BigUint {
    (0..n).fold(BigUint::one(), |acc, _| acc * 6u32 + 1u32)
}

/// `N(t_0), ..., N(t_{n_max})` for an integer sequence via
/// `N(t_{n+1}) = 2 a_{n+1} N(t_n) + a_{n+1} - 2`.
pub fn box_counts(seq: &ParamSequence, n_max: usize) -> Result<Vec<BigUint>> {
    let terms = seq.int_terms(n_max)?;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut n_t = BigUint::one();
    out.push(n_t.clone());
    for a in terms {
        n_t = n_t * (2 * a as u64) + (a - 2);
        out.push(n_t.clone());
    }
    Ok(out)
}

pub fn box_count_general(seq: &ParamSequence, n: usize) -> Result<BigUint> {
    Ok(box_counts(seq, n)?.pop().expect("non-empty"))
}

/// Count at the intermediate scale `t_n / q`: `2 q N(t_n) + q - 2`, `1 <= q <= a_{n+1}`.
pub fn box_count_intermediate(seq: &ParamSequence, n: usize, q: u64) -> Result<BigUint> {
    let a_next = seq.int_term(n + 1)? as u64;
    if q == 0 || q > a_next {
        return Err(WadaError::QOutOfRange { q, max: a_next });
    }
    let n_t = box_count_general(seq, n)?;
    Ok(n_t * (2 * q) + q - 2u32)
}

/// The unique `p` in `1..a_{n+1}` with `t_n / (p+1) <= eps < t_n / p`, where `n`
/// is the unique day with `t_{n+1} <= eps < t_n`. Returns `(n, p)`.
pub fn squeeze_index(seq: &ParamSequence, eps: &BigRational) -> Result<(usize, u64)> {
    if eps <= &BigRational::zero() || eps >= &BigRational::one() {
        return Err(WadaError::InvalidArgument(format!(
            "scale {} is outside (0, 1)",
            format_rational(eps)
        )));
    }
    seq.int_term(1)?;
    let mut n = 0;
    let mut t = BigRational::one();
    loop {
        let a = seq.int_term(n + 1)? as u64;
        let t_next = &t / from_u64(a);
        if eps >= &t_next {
            // 1/eps in (prod_{i<=n} a_i, a_{n+1} prod_{i<=n} a_i]
            let ratio = &t / eps;
            let mut p = ratio.ceil().to_integer() - BigInt::one();
            if p < BigInt::one() {
                p = BigInt::one();
            }
            let p: u64 = p.try_into().expect("p below a_{n+1}");
            return Ok((n, p.min(a - 1)));
        }
        t = t_next;
        n += 1;
    }
}

/// Turning counts: seeds `T(1..=4) = 0, 2, 6, 14`, then `T(n+1) = 2 T(n) + 4`.
pub fn turning_count(n: usize) -> BigUint {
    assert!(n >= 1, "turning counts start at day 1");
    const SEEDS: [u32; 4] = [0, 2, 6, 14];
    if n <= 4 {
        return BigUint::from(SEEDS[n - 1]);
    }
    (5..=n).fold(BigUint::from(14u32), |t, _| t * 2u32 + 4u32)
}

/// Closed form `9/8 * 2^n - 4 = 9 * 2^{n-3} - 4`, valid for `n >= 5`.
pub fn turning_count_closed(n: usize) -> Option<BigUint> {
    (n >= 5).then(|| (BigUint::from(9u32) << (n - 3)) - 4u32)
}

/// `A(n) = (2/a_n) A(n-1) + t_n^2 (a_n - 2)`, `A(0) = 1`, for `0..=n_max`.
pub fn island_areas(seq: &ParamSequence, n_max: usize) -> Vec<BigRational> {
    let t = scale_values(seq, n_max);
    let two = from_u64(2);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut area = BigRational::one();
    out.push(area.clone());
    for (n, tn) in t.iter().enumerate().skip(1) {
        let a = seq.term(n);
        area = &two / &a * &area + tn * tn * (&a - &two);
        out.push(area.clone());
    }
    out
}

pub fn island_area(seq: &ParamSequence, n: usize) -> BigRational {
    island_areas(seq, n).pop().expect("non-empty")
}

/// Exact comparison of `N(t_n) t_n^2` against `A(n)` for integer sequences.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichCheck {
    /// `N(t_n) t_n^2 == A(n)`: integer grids leave no overlap.
    pub tight: bool,
    pub lower: bool,
    /// `N(t_n) t_n^2 <= A(n) + 2 (T(n) + 3) t_n^2`.
    pub upper: bool,
    #[serde(serialize_with = "ser_rational")]
    pub overlap_bound: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AreaBoundsRow {
    pub n: usize,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `A(n) - 2^n t_n`.
    #[serde(serialize_with = "ser_rational")]
    pub lower_margin: BigRational,
    /// `2^{n+1} t_n - A(n)`.
    #[serde(serialize_with = "ser_rational")]
    pub upper_margin: BigRational,
    /// `A(n) / (2^n t_n)`, which lies strictly in `(1, 2)`.
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<SandwichCheck>,
}

impl AreaBoundsRow {
    pub fn ok(&self) -> bool {
        self.lower_ok
            && self.upper_ok
            && self.sandwich.as_ref().is_none_or(|s| s.tight && s.lower && s.upper)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AreaBoundsReport {
    pub rows: Vec<AreaBoundsRow>,
    pub all_ok: bool,
}

impl AreaBoundsReport {
    /// Converts the first violated inequality into an error.
    pub fn ensure(&self) -> Result<()> {
        match self.rows.iter().find(|r| !r.ok()) {
            None => Ok(()),
            Some(row) => Err(WadaError::Precondition(format!(
                "area inequality violated at n = {}: {row:?}",
                row.n
            ))),
        }
    }
}

/// Checks `2^n t_n < A(n) < 2^{n+1} t_n` for `1 <= n <= n_max` and, on integer
/// sequences, the covering sandwich with both the tight and the overlap-bound form.
pub fn area_bounds_check(seq: &ParamSequence, n_max: usize) -> Result<AreaBoundsReport> {
    if n_max < 1 {
        return Err(WadaError::InvalidArgument("n_max must be at least 1".into()));
    }
    let t = scale_values(seq, n_max);
    let areas = island_areas(seq, n_max);
    let counts = if seq.is_integer_only() {
        Some(box_counts(seq, n_max)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let low = pow2(n) * &t[n];
        let high = pow2(n + 1) * &t[n];
        let area = &areas[n];
        let sandwich = counts.as_ref().map(|counts| {
            let cover = from_biguint(&counts[n]) * &t[n] * &t[n];
            let overlap = from_u64(2) * (from_biguint(&turning_count(n)) + from_u64(3)) * &t[n] * &t[n];
            SandwichCheck {
                tight: &cover == area,
                lower: area <= &cover,
                upper: cover <= area + &overlap,
                overlap_bound: overlap,
            }
        });
        rows.push(AreaBoundsRow {
            n,
            lower_ok: &low < area,
            upper_ok: area < &high,
            lower_margin: area - &low,
            upper_margin: &high - area,
            ratio: crate::rational::to_f64(&(area / &low)),
            sandwich,
        });
    }
    let all_ok = rows.iter().all(AreaBoundsRow::ok);
    Ok(AreaBoundsReport { rows, all_ok })
}

/// Least-squares slope of `ln N` against `ln(1/eps)` as the value; the extreme
/// pairwise secant slopes stand in for the upper and lower dimensions.
pub fn dimension_from_counts(pairs: &[(BigRational, BigUint)]) -> Result<DimensionReport> {
    if pairs.len() < 2 {
        return Err(WadaError::InvalidArgument(format!(
            "need at least 2 (scale, count) pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(WadaError::InvalidArgument("scales must be strictly decreasing".into()));
    }
    if pairs.iter().any(|(s, c)| s <= &BigRational::zero() || c.is_zero()) {
        return Err(WadaError::InvalidArgument("scales and counts must be positive".into()));
    }
    let xs: Vec<f64> = pairs.iter().map(|(s, _)| -ln_rational(s)).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, c)| ln_biguint(c)).collect();
    let fit = least_squares(&xs, &ys);

    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let secant = (ys[j] - ys[i]) / (xs[j] - xs[i]);
            upper = upper.max(secant);
            lower = lower.min(secant);
        }
    }
    Ok(DimensionReport {
        value: Some(fit.slope),
        upper,
        lower,
        window: (0, pairs.len() - 1),
        method: DimensionMethod::Regression,
        diagnostics: Some(RegressionDiagnostics {
            points: pairs.len(),
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            rms_residual: fit.rms_residual,
            max_abs_residual: fit.max_abs_residual,
        }),
    })
}

struct LineFit {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    rms_residual: f64,
    max_abs_residual: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    LineFit {
        slope,
        intercept,
        r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 },
        rms_residual: (ss_res / n).sqrt(),
        max_abs_residual: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
    }
}

/// One row of the exact count table.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRow {
    pub n: usize,
    pub t: BigRational,
    /// `N(t_n)`; absent for non-integer sequences.
    pub boxes: Option<BigUint>,
    /// `T(n)`; absent for `n = 0`.
    pub turnings: Option<BigUint>,
    pub area: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountTable {
    pub rows: Vec<CountRow>,
}

pub fn count_table(seq: &ParamSequence, n_max: usize) -> CountTable {
    let t = scale_values(seq, n_max);
    let areas = island_areas(seq, n_max);
    let counts = box_counts(seq, n_max).ok();
    let rows = (0..=n_max)
        .map(|n| CountRow {
            n,
            t: t[n].clone(),
            boxes: counts.as_ref().map(|c| c[n].clone()),
            turnings: (n >= 1).then(|| turning_count(n)),
            area: areas[n].clone(),
        })
        .collect();
    CountTable { rows }
}

impl Serialize for CountRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            n: usize,
            t_n: String,
            #[serde(rename = "N")]
            boxes: Option<String>,
            #[serde(rename = "T")]
            turnings: Option<String>,
            #[serde(rename = "A")]
            area: String,
        }
        Wire {
            n: self.n,
            t_n: format_rational(&self.t),
            boxes: self.boxes.as_ref().map(ToString::to_string),
            turnings: self.turnings.as_ref().map(ToString::to_string),
            area: format_rational(&self.area),
        }
        .serialize(s)
    }
}

impl Serialize for CountTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows.serialize(s)
    }
}

pub(crate) fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> ParamSequence {
        ParamSequence::parse(s).unwrap()
    }

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn standard_counts() {
        assert_eq!(box_count_standard(0), big(1));
        assert_eq!(box_count_standard(1), big(7));
        assert_eq!(box_count_standard(2), big(43));
        assert_eq!(box_count_standard(3), big(259));
    }

    #[test]
    fn general_counts() {
        assert_eq!(box_count_general(&seq("const:4"), 1).unwrap(), big(10));
        assert_eq!(box_count_general(&seq("const:3"), 2).unwrap(), big(43));
        assert_eq!(box_count_general(&seq("const:3"), 0).unwrap(), big(1));
        assert!(matches!(
            box_count_general(&seq("const:5/2"), 1),
            Err(WadaError::NonInteger { .. })
        ));
        // a_1 integer, a_2 not: the first failing index is reported.
        match box_count_general(&seq("list:3,7/2"), 3) {
            Err(WadaError::NonInteger { index, .. }) => assert_eq!(index, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn general_matches_standard() {
        let c3 = seq("const:3");
        let general = box_counts(&c3, 20).unwrap();
        for (n, g) in general.iter().enumerate() {
            assert_eq!(g, &box_count_standard(n));
        }
    }

    #[test]
    fn intermediate_counts() {
        let c3 = seq("const:3");
        assert_eq!(box_count_intermediate(&c3, 1, 3).unwrap(), big(43));
        assert_eq!(box_count_intermediate(&seq("const:4"), 1, 2).unwrap(), big(40));
        for n in 0..6 {
            let n_t = box_count_general(&c3, n).unwrap();
            assert_eq!(box_count_intermediate(&c3, n, 2).unwrap(), n_t * 4u32);
            assert_eq!(
                box_count_intermediate(&c3, n, 3).unwrap(),
                box_count_general(&c3, n + 1).unwrap()
            );
        }
        assert!(matches!(box_count_intermediate(&c3, 1, 4), Err(WadaError::QOutOfRange { .. })));
        assert!(matches!(box_count_intermediate(&c3, 1, 0), Err(WadaError::QOutOfRange { .. })));
    }

    #[test]
    fn squeeze_index_brackets() {
        let c3 = seq("const:3");
        // t_2 <= 1/5 < t_1, and 5 lies in (3p, 3(p+1)] for p = 1
        assert_eq!(squeeze_index(&c3, &r(1, 5)).unwrap(), (1, 1));
        // 7 lies in (6, 9]
        assert_eq!(squeeze_index(&c3, &r(1, 7)).unwrap(), (1, 2));
        // eps exactly t_{n+1} uses the top bracket
        assert_eq!(squeeze_index(&c3, &r(1, 9)).unwrap(), (1, 2));
        assert_eq!(squeeze_index(&c3, &r(1, 6)).unwrap(), (1, 1));
        assert!(squeeze_index(&c3, &r(1, 1)).is_err());
    }

    #[test]
    fn turning_examples() {
        assert_eq!(turning_count(1), big(0));
        assert_eq!(turning_count(4), big(14));
        assert_eq!(turning_count(5), big(32));
        assert_eq!(turning_count_closed(5), Some(big(32)));
        assert_eq!(turning_count_closed(4), None);
        for n in 5..=30 {
            assert_eq!(Some(turning_count(n)), turning_count_closed(n), "n = {n}");
        }
    }

    #[test]
    fn area_examples() {
        assert_eq!(island_area(&seq("const:3"), 0), r(1, 1));
        assert_eq!(island_area(&seq("const:3"), 1), r(7, 9));
        assert_eq!(island_area(&seq("const:3"), 2), r(43, 81));
        assert_eq!(island_area(&seq("const:4"), 1), r(5, 8));
    }

    #[test]
    fn area_equals_cover_on_integer_grids() {
        for spec in ["const:3", "const:4", "list:3,4,5;cycle"] {
            let s = seq(spec);
            let t = scale_values(&s, 12);
            let counts = box_counts(&s, 12).unwrap();
            let areas = island_areas(&s, 12);
            for n in 0..=12 {
                assert_eq!(from_biguint(&counts[n]) * &t[n] * &t[n], areas[n], "{spec} n={n}");
            }
        }
    }

    #[test]
    fn bounds_examples() {
        let rep = area_bounds_check(&seq("const:3"), 5).unwrap();
        assert!(rep.all_ok);
        rep.ensure().unwrap();
        let row2 = &rep.rows[1];
        assert_eq!(row2.n, 2);
        assert_eq!(row2.lower_margin, r(43, 81) - r(4, 9));
        assert_eq!(row2.upper_margin, r(8, 9) - r(43, 81));
        assert!(area_bounds_check(&seq("list:3,4,5"), 3).unwrap().all_ok);
        let non_int = area_bounds_check(&seq("const:5/2"), 20).unwrap();
        assert!(non_int.all_ok);
        assert!(non_int.rows.iter().all(|r| r.sandwich.is_none()));
        assert!(area_bounds_check(&seq("const:3"), 0).is_err());
    }

    #[test]
    fn area_ratio_increases_below_two() {
        for spec in ["const:3", "const:5/2", "affine:2,1", "list:16/7,7/3,12/5"] {
            let s = seq(spec);
            let t = scale_values(&s, 25);
            let areas = island_areas(&s, 25);
            let ratios: Vec<BigRational> = (0..=25).map(|n| &areas[n] / (pow2(n) * &t[n])).collect();
            assert!(ratios.windows(2).all(|w| w[0] < w[1]), "{spec}");
            assert!(ratios.iter().all(|q| q < &from_u64(2)), "{spec}");
        }
    }

    #[test]
    fn regression_examples() {
        let pairs = vec![(r(1, 1), big(1)), (r(1, 3), big(7)), (r(1, 9), big(43)), (r(1, 27), big(259))];
        let rep = dimension_from_counts(&pairs).unwrap();
        // Independent OLS (numpy.polyfit) over the same four points.
        assert!((rep.value.unwrap() - 1.682_647_676_747_534).abs() < 1e-12);
        assert!(rep.lower <= rep.value.unwrap() && rep.value.unwrap() <= rep.upper);

        let two = dimension_from_counts(&[(r(1, 1), big(1)), (r(1, 2), big(2))]).unwrap();
        assert_eq!(two.value, Some(1.0));
        assert_eq!(two.upper, 1.0);
        assert_eq!(two.lower, 1.0);

        let c4 = seq("const:4");
        let t = scale_values(&c4, 8);
        let counts = box_counts(&c4, 8).unwrap();
        let pairs: Vec<_> = t.into_iter().zip(counts).collect();
        let rep = dimension_from_counts(&pairs).unwrap();
        assert!((rep.value.unwrap() - 1.513_190_466_343_706_6).abs() < 1e-12);
        assert!((rep.value.unwrap() - 1.5).abs() < 0.05);
    }

    #[test]
    fn regression_errors() {
        assert!(dimension_from_counts(&[(r(1, 2), big(3))]).is_err());
        assert!(dimension_from_counts(&[(r(1, 2), big(3)), (r(1, 2), big(5))]).is_err());
        assert!(dimension_from_counts(&[(r(1, 3), big(3)), (r(1, 2), big(5))]).is_err());
    }

    #[test]
    fn count_table_json() {
        let table = count_table(&seq("const:3"), 2);
        let json = serde_json::to_value(&table).unwrap();
        assert_eq!(
            json,
            serde_json::json!([
                {"n": 0, "t_n": "1/1", "N": "1", "T": null, "A": "1/1"},
                {"n": 1, "t_n": "1/3", "N": "7", "T": "0", "A": "7/9"},
                {"n": 2, "t_n": "1/9", "N": "43", "T": "2", "A": "43/81"},
            ])
        );
        let non_int = serde_json::to_value(count_table(&seq("const:5/2"), 1)).unwrap();
        assert_eq!(non_int[1]["N"], serde_json::Value::Null);
    }
}
