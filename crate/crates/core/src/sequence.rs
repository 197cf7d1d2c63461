//! Parameter sequences `a_1, a_2, ...` that drive the construction, their
//! exact scales and canal widths, and the closed-form box dimension.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Result, WadaError};
use crate::rational::{display_rational, ln_rational, parse_rational, to_f64};

/// Tolerance below which the window extremes are considered to agree.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

/// Offset above 2 used when the target dimension 2 is requested.
pub const DIMENSION_TWO_DELTA: (i64, i64) = (1, 1_000_000);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    Constant(BigRational),
    /// Explicit terms. Without `cycle` the last term repeats forever.
    List { values: Vec<BigRational>, cycle: bool },
    /// `a_n = base + step * n`.
    Affine { base: BigRational, step: BigRational },
}

/// A validated sequence with every term strictly above 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSequence {
    kind: SequenceKind,
    integer_only: bool,
}

fn two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

impl ParamSequence {
    /// Parses and validates a sequence spec string:
    /// `const:<r>`, `list:<r1>,<r2>,...[;cycle]` or `affine:<b>,<k>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let err = |reason: &str| WadaError::Spec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (head, body) = spec.trim().split_once(':').ok_or_else(|| err("missing `kind:` prefix"))?;
        let number = |s: &str| parse_rational(s).ok_or_else(|| err(&format!("`{s}` is not a rational")));
        match head.trim() {
            "const" => Self::constant(number(body)?),
            "list" => {
                let (terms, cycle) = match body.split_once(';') {
                    Some((terms, "cycle")) => (terms, true),
                    Some((_, other)) => return Err(err(&format!("unknown list modifier `{other}`"))),
                    None => (body, false),
                };
                if terms.trim().is_empty() {
                    return Err(err("empty list"));
                }
                let values = terms.split(',').map(number).collect::<Result<Vec<_>>>()?;
                Self::list(values, cycle)
            }
            "affine" => {
                let parts: Vec<&str> = body.split(',').collect();
                if parts.len() != 2 {
                    return Err(err("affine needs exactly `<b>,<k>`"));
                }
                Self::affine(number(parts[0])?, number(parts[1])?)
            }
            other => Err(err(&format!("unknown kind `{other}`"))),
        }
    }

    pub fn constant(c: BigRational) -> Result<Self> {
        check_term(1, &c)?;
        Ok(Self {
            integer_only: c.is_integer(),
            kind: SequenceKind::Constant(c),
        })
    }

    pub fn list(values: Vec<BigRational>, cycle: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(WadaError::Spec {
                spec: "list:".into(),
                reason: "empty list".into(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            check_term(i + 1, v)?;
        }
        Ok(Self {
            integer_only: values.iter().all(BigRational::is_integer),
            kind: SequenceKind::List { values, cycle },
        })
    }

    pub fn affine(base: BigRational, step: BigRational) -> Result<Self> {
        if step.is_negative() {
            return Err(WadaError::InvalidArgument(format!(
                "affine step {} is negative, so terms eventually drop to 2 or below",
                display_rational(&step)
            )));
        }
        check_term(1, &(&base + &step))?;
        Ok(Self {
            integer_only: base.is_integer() && step.is_integer(),
            kind: SequenceKind::Affine { base, step },
        })
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    /// True iff every generated term is an integer.
    pub fn is_integer_only(&self) -> bool {
        self.integer_only
    }

    /// The term `a_n`, `n >= 1`.
    pub fn term(&self, n: usize) -> BigRational {
        assert!(n >= 1, "terms are indexed from 1");
        match &self.kind {
            SequenceKind::Constant(c) => c.clone(),
            SequenceKind::List { values, cycle } => {
                if *cycle {
                    values[(n - 1) % values.len()].clone()
                } else {
                    values[(n - 1).min(values.len() - 1)].clone()
                }
            }
            SequenceKind::Affine { base, step } => base + step * BigRational::from_integer(BigInt::from(n)),
        }
    }

    /// `a_n` as an integer subdivision factor.
    pub fn int_term(&self, n: usize) -> Result<u32> {
        let a = self.term(n);
        if !a.is_integer() {
            return Err(WadaError::NonInteger {
                index: n,
                value: display_rational(&a),
            });
        }
        a.to_integer().to_u32().ok_or_else(|| WadaError::ResourceCap {
            what: "subdivision factor",
            needed: a.to_integer().to_string(),
            cap: u32::MAX.to_string(),
        })
    }

    /// Integer terms `a_1..=a_n`, or an error naming the first non-integer term.
    pub fn int_terms(&self, n: usize) -> Result<Vec<u32>> {
        (1..=n).map(|i| self.int_term(i)).collect()
    }

    pub fn ln_term(&self, n: usize) -> f64 {
        ln_rational(&self.term(n))
    }

    /// Canonical spec string; parsing it yields an equal sequence.
    pub fn spec(&self) -> String {
        match &self.kind {
            SequenceKind::Constant(c) => format!("const:{}", display_rational(c)),
            SequenceKind::List { values, cycle } => {
                let terms: Vec<String> = values.iter().map(display_rational).collect();
                format!("list:{}{}", terms.join(","), if *cycle { ";cycle" } else { "" })
            }
            SequenceKind::Affine { base, step } => {
                format!("affine:{},{}", display_rational(base), display_rational(step))
            }
        }
    }

    /// The exact limit of `1 + n ln 2 / sum ln a_i`, available for every kind we parse.
    pub fn limit_dimension(&self) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        match &self.kind {
            SequenceKind::Constant(c) => 1.0 + ln2 / ln_rational(c),
            SequenceKind::List { values, cycle: true } => {
                let total: f64 = values.iter().map(ln_rational).sum();
                1.0 + values.len() as f64 * ln2 / total
            }
            SequenceKind::List { values, cycle: false } => 1.0 + ln2 / ln_rational(values.last().unwrap()),
            SequenceKind::Affine { base, step } => {
                if step.is_zero() {
                    1.0 + ln2 / ln_rational(base)
                } else {
                    1.0
                }
            }
        }
    }
}

impl fmt::Display for ParamSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

impl std::str::FromStr for ParamSequence {
    type Err = WadaError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn check_term(index: usize, value: &BigRational) -> Result<()> {
    if value <= &two() {
        return Err(WadaError::TermTooSmall {
            index,
            value: display_rational(value),
        });
    }
    Ok(())
}

/// One row of the scale table: `t_n = prod a_i^{-1}` and the canal width
/// `w_n = t_{n-1} (1 - 2/a_n)` (absent for `n = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleRow {
    pub n: usize,
    pub t: BigRational,
    pub w: Option<BigRational>,
}

pub fn scales(seq: &ParamSequence, n_max: usize) -> Vec<ScaleRow> {
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut t = BigRational::one();
    rows.push(ScaleRow {
        n: 0,
        t: t.clone(),
        w: None,
    });
    for n in 1..=n_max {
        let a = seq.term(n);
        let w = &t * (BigRational::one() - two() / &a);
        t = &t / &a;
        rows.push(ScaleRow {
            n,
            t: t.clone(),
            w: Some(w),
        });
    }
    rows
}

/// Just the scales `t_0..=t_{n_max}`.
pub fn scale_values(seq: &ParamSequence, n_max: usize) -> Vec<BigRational> {
    scales(seq, n_max).into_iter().map(|r| r.t).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DimensionMethod {
    Analytic,
    Regression,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionDiagnostics {
    pub points: usize,
    pub intercept: f64,
    pub r_squared: f64,
    pub rms_residual: f64,
    pub max_abs_residual: f64,
}

/// A dimension estimate with its finite-depth upper and lower envelopes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionReport {
    pub value: Option<f64>,
    pub upper: f64,
    pub lower: f64,
    /// Inclusive range of `n` (analytic) or point indices (regression) used.
    pub window: (usize, usize),
    pub method: DimensionMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<RegressionDiagnostics>,
}

/// Evaluates `s_n = 1 + n ln 2 / sum_{i<=n} ln a_i` over the tail window
/// (the last `max(10, n_max/2)` terms) and reports its extremes, together
/// with the exact limit.
pub fn analytic_dimension(seq: &ParamSequence, n_max: usize) -> Result<DimensionReport> {
    if n_max < 2 {
        return Err(WadaError::InvalidArgument(format!("n_max = {n_max}, need at least 2")));
    }
    let width = (n_max / 2).max(10).min(n_max);
    let start = n_max - width + 1;
    let ln2 = std::f64::consts::LN_2;
    let mut log_sum = 0.0;
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    for n in 1..=n_max {
        log_sum += seq.ln_term(n);
        if n >= start {
            let s = 1.0 + n as f64 * ln2 / log_sum;
            upper = upper.max(s);
            lower = lower.min(s);
        }
    }
    Ok(DimensionReport {
        value: Some(seq.limit_dimension()),
        upper,
        lower,
        window: (start, n_max),
        method: DimensionMethod::Analytic,
        diagnostics: None,
    })
}

/// Outcome of the inverse design problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub sequence: ParamSequence,
    /// False when the target is only approached, never attained.
    pub exact: bool,
    pub note: Option<String>,
}

/// Finds a sequence whose boundary has box dimension `d`, `1 <= d <= 2`.
///
/// Interior targets get the constant `c = 2^{1/(d-1)}`, snapped to the
/// nearest integer when within `1e-9`. `d = 1` gets `a_n = n + 2`. `d = 2`
/// would need `c = 2`, which the construction forbids, so it returns
/// `c = 2 + 1e-6` flagged as an approximation.
pub fn design_sequence(d: f64) -> Result<Design> {
    if !d.is_finite() || !(1.0..=2.0).contains(&d) {
        return Err(WadaError::InvalidArgument(format!("target dimension {d} is outside [1, 2]")));
    }
    if d == 1.0 {
        let seq = ParamSequence::affine(BigRational::from_integer(2.into()), BigRational::one())?;
        return Ok(Design {
            sequence: seq,
            exact: true,
            note: None,
        });
    }
    if d == 2.0 {
        let (p, q) = DIMENSION_TWO_DELTA;
        let c = two() + BigRational::new(p.into(), q.into());
        return Ok(Design {
            sequence: ParamSequence::constant(c)?,
            exact: false,
            note: Some(
                "dimension 2 is a supremum reached only as c -> 2+; returning c = 2 + 1e-6, \
                 which is within 1e-6 of the target"
                    .into(),
            ),
        });
    }
    let c = 2f64.powf(1.0 / (d - 1.0));
    let rounded = c.round();
    let c_exact = if (c - rounded).abs() < 1e-9 * c {
        BigRational::from_integer(BigInt::from(rounded as u64))
    } else {
        BigRational::from_float(c).expect("finite")
    };
    Ok(Design {
        sequence: ParamSequence::constant(c_exact)?,
        exact: true,
        note: None,
    })
}

/// Box dimension of the common boundary after taking the product with `R^{n-2}`.
pub fn product_dimension(d: f64, n: usize) -> Result<f64> {
    if !(1.0..=2.0).contains(&d) {
        return Err(WadaError::InvalidArgument(format!("planar dimension {d} is outside [1, 2]")));
    }
    if n < 2 {
        return Err(WadaError::InvalidArgument(format!("ambient dimension {n} is below 2")));
    }
    Ok(d + (n - 2) as f64)
}

/// Floating approximation of `t_n`, handy for plotting and logs.
pub fn scale_f64(seq: &ParamSequence, n: usize) -> f64 {
    to_f64(&scale_values(seq, n)[n])
}
