//! Verdicts, individual bound checks and series tables shared by the
//! verification routines.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for equality claims and strict-inequality margins.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Equal to the reference within tolerance.
    Equality,
    /// Above a lower bound by more than the tolerance.
    LowerSlack,
    /// Below an upper bound by more than the tolerance.
    UpperSlack,
    /// The claimed relation fails by more than the tolerance.
    Violation,
    /// A strict inequality whose margin is within the tolerance.
    Inconclusive,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Equality | Verdict::LowerSlack | Verdict::UpperSlack)
    }

    /// Combine the verdicts of several checks: any violation wins, then any
    /// inconclusive check, otherwise the first verdict.
    pub fn combine<I: IntoIterator<Item = Verdict>>(iter: I) -> Verdict {
        let mut first = None;
        let mut inconclusive = false;
        for v in iter {
            match v {
                Verdict::Violation => return Verdict::Violation,
                Verdict::Inconclusive => inconclusive = true,
                _ => {}
            }
            first.get_or_insert(v);
        }
        if inconclusive {
            Verdict::Inconclusive
        } else {
            first.unwrap_or(Verdict::Inconclusive)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equal => "=",
            Relation::Less => "<",
            Relation::LessEq => "<=",
            Relation::Greater => ">",
            Relation::GreaterEq => ">=",
        }
    }
}

/// One claimed relation `value ⋈ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub label: String,
    #[serde(deserialize_with = "nan_if_null")]
    pub value: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub bound: f64,
    pub relation: Relation,
    /// Margin by which the relation holds (`value − bound` for equality).
    #[serde(deserialize_with = "nan_if_null")]
    pub slack: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// JSON has no NaN; serde writes it as `null`.
fn nan_if_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl BoundCheck {
    pub fn new(label: impl Into<String>, value: f64, relation: Relation, bound: f64, tolerance: f64) -> Self {
        let slack = match relation {
            Relation::Equal | Relation::Greater | Relation::GreaterEq => value - bound,
            Relation::Less | Relation::LessEq => bound - value,
        };
        let verdict = classify(relation, slack, tolerance);
        Self {
            label: label.into(),
            value,
            bound,
            relation,
            slack,
            tolerance,
            verdict,
        }
    }

    fn with_tolerance(&self, tolerance: f64) -> Self {
        Self::new(self.label.clone(), self.value, self.relation, self.bound, tolerance)
    }
}

fn classify(relation: Relation, slack: f64, tol: f64) -> Verdict {
    if !slack.is_finite() {
        return Verdict::Violation;
    }
    let above = match relation {
        Relation::Equal => {
            return if slack.abs() <= tol {
                Verdict::Equality
            } else {
                Verdict::Violation
            }
        }
        Relation::Greater | Relation::GreaterEq => Verdict::LowerSlack,
        Relation::Less | Relation::LessEq => Verdict::UpperSlack,
    };
    let strict = matches!(relation, Relation::Greater | Relation::Less);
    if slack > tol {
        above
    } else if slack >= -tol {
        if strict {
            Verdict::Inconclusive
        } else {
            Verdict::Equality
        }
    } else {
        Verdict::Violation
    }
}

/// Reject tolerance overrides that would loosen a check.
pub fn check_tightening(requested: f64, default: f64) -> Result<()> {
    if !(requested > 0.0) || !requested.is_finite() {
        return Err(Error::Input(format!("tolerance {requested} must be positive")));
    }
    if requested > default {
        return Err(Error::Input(format!(
            "tolerance {requested} is looser than the default {default}; only tightening is allowed"
        )));
    }
    Ok(())
}

/// Re-evaluate a list of checks at a tighter tolerance. Exact checks, with
/// tolerance zero, are left as they are.
pub fn retighten(checks: &[BoundCheck], tolerance: f64) -> Result<Vec<BoundCheck>> {
    for c in checks.iter().filter(|c| c.tolerance > 0.0) {
        check_tightening(tolerance, c.tolerance)?;
    }
    Ok(checks
        .iter()
        .map(|c| if c.tolerance > 0.0 { c.with_tolerance(tolerance) } else { c.clone() })
        .collect())
}

/// A named table of numeric columns, one row per step of a sweep, together
/// with any checks made on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub checks: Vec<BoundCheck>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl SeriesReport {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
            verdict: Verdict::Inconclusive,
            notes: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_check(&mut self, check: BoundCheck) {
        self.checks.push(check);
        self.verdict = Verdict::combine(self.checks.iter().map(|c| c.verdict));
    }

    /// Re-evaluate the checks at a tighter tolerance.
    pub fn tightened(mut self, tolerance: f64) -> Result<Self> {
        self.checks = retighten(&self.checks, tolerance)?;
        self.verdict = Verdict::combine(self.checks.iter().map(|c| c.verdict));
        Ok(self)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Comma-separated table with a header line; floats use the shortest
    /// round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}
