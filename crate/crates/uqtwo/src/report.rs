//! Check records shared by the verification suites and the CLI reports.

use serde::Serialize;

/// Comparison direction of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    /// value < bound
    Below,
    /// value <= bound
    AtOrBelow,
    /// value >= bound
    AtOrAbove,
    /// value == bound exactly
    Equal,
}

/// One verified quantity: a measured value against its pinned bound.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: String,
    pub value: f64,
    pub bound: f64,
    pub cmp: Cmp,
    pub pass: bool,
}

impl Check {
    pub fn below(id: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { id: id.into(), value, bound, cmp: Cmp::Below, pass: value < bound }
    }

    pub fn at_or_below(id: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { id: id.into(), value, bound, cmp: Cmp::AtOrBelow, pass: value <= bound }
    }

    pub fn at_least(id: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { id: id.into(), value, bound, cmp: Cmp::AtOrAbove, pass: value >= bound }
    }

    pub fn exactly(id: impl Into<String>, value: f64, bound: f64) -> Check {
        Check { id: id.into(), value, bound, cmp: Cmp::Equal, pass: value == bound }
    }

    pub fn int_equal(id: impl Into<String>, value: i64, bound: i64) -> Check {
        Check {
            id: id.into(),
            value: value as f64,
            bound: bound as f64,
            cmp: Cmp::Equal,
            pass: value == bound,
        }
    }

    pub fn is_true(id: impl Into<String>, ok: bool) -> Check {
        Check {
            id: id.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            cmp: Cmp::Equal,
            pass: ok,
        }
    }
}

/// A named set of checks; passes iff every check passes.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, checks: Vec<Check>) -> SuiteReport {
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.into(), checks, pass }
    }

    pub fn worst_failing(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}
