//! Loader for `data/templates.txt`, the placement of island sub-squares inside
//! each parent type.

use once_cell::sync::Lazy;

use super::dihedral::Orient;
use super::SquareType;
use crate::error::{Result, WadaError};

pub const TEMPLATE_SOURCE: &str = include_str!("../../data/templates.txt");

/// SHA-256 of [`TEMPLATE_SOURCE`]. Bump together with the file.
pub const TEMPLATE_SHA256: &str = "e6481775f7dafb674355a469335e18167700fa2a1c679674661b16c0f15517db";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Expr {
    Const(u32),
    /// `a - k`
    MinusA(u32),
}

impl Expr {
    fn parse(s: &str) -> Option<Expr> {
        if s == "a" {
            return Some(Expr::MinusA(0));
        }
        if let Some(k) = s.strip_prefix("a-") {
            return k.parse().ok().map(Expr::MinusA);
        }
        s.parse().ok().map(Expr::Const)
    }

    fn eval(self, a: u32) -> i64 {
        match self {
            Expr::Const(k) => k as i64,
            Expr::MinusA(k) => a as i64 - k as i64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Span {
    lo: Expr,
    hi: Expr,
}

impl Span {
    fn parse(s: &str) -> Option<Span> {
        match s.split_once("..") {
            Some((lo, hi)) => Some(Span {
                lo: Expr::parse(lo)?,
                hi: Expr::parse(hi)?,
            }),
            None => {
                let e = Expr::parse(s)?;
                Some(Span { lo: e, hi: e })
            }
        }
    }

    fn values(self, a: u32) -> impl Iterator<Item = u32> {
        let (lo, hi) = (self.lo.eval(a).max(0), self.hi.eval(a));
        (lo..=hi).map(|v| v as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Rule {
    parent: SquareType,
    child: SquareType,
    orient: Orient,
    xs: Span,
    ys: Span,
}

/// One island sub-square in canonical parent coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Child {
    pub u: u32,
    pub v: u32,
    pub kind: SquareType,
    pub orient: Orient,
}

#[derive(Clone, Debug)]
pub struct TemplateSet {
    rules: Vec<Rule>,
}

impl TemplateSet {
    pub fn parse(source: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (i, raw) in source.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| WadaError::Template { line: i + 1, reason };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [parent, child, orient, xs, ys] = fields[..] else {
                return Err(bad(format!("expected 5 fields, found {}", fields.len())));
            };
            rules.push(Rule {
                parent: SquareType::parse(parent).ok_or_else(|| bad(format!("unknown type `{parent}`")))?,
                child: SquareType::parse(child).ok_or_else(|| bad(format!("unknown type `{child}`")))?,
                orient: Orient::parse_token(orient).ok_or_else(|| bad(format!("bad orientation `{orient}`")))?,
                xs: Span::parse(xs).ok_or_else(|| bad(format!("bad range `{xs}`")))?,
                ys: Span::parse(ys).ok_or_else(|| bad(format!("bad range `{ys}`")))?,
            });
        }
        for kind in SquareType::ALL {
            if !rules.iter().any(|r| r.parent == kind) {
                return Err(WadaError::Template {
                    line: 0,
                    reason: format!("no rows for parent `{}`", kind.name()),
                });
            }
        }
        Ok(TemplateSet { rules })
    }

    /// Island children of a canonical `parent` for subdivision factor `a`.
    pub fn children(&self, parent: SquareType, a: u32) -> Vec<Child> {
        let mut out = Vec::new();
        for rule in self.rules.iter().filter(|r| r.parent == parent) {
            for v in rule.ys.values(a) {
                for u in rule.xs.values(a) {
                    out.push(Child {
                        u,
                        v,
                        kind: rule.child,
                        orient: rule.orient,
                    });
                }
            }
        }
        out
    }

    /// Row-major `a x a` mask of the canal sub-squares of a canonical parent.
    pub fn canal_mask(&self, parent: SquareType, a: u32) -> Vec<bool> {
        let mut mask = vec![true; (a * a) as usize];
        for c in self.children(parent, a) {
            mask[(c.v * a + c.u) as usize] = false;
        }
        mask
    }
}

pub fn templates() -> &'static TemplateSet {
    static SET: Lazy<TemplateSet> =
        Lazy::new(|| TemplateSet::parse(TEMPLATE_SOURCE).expect("bundled templates parse"));
    &SET
}
