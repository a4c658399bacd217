//! Named pass/fail checks collected into one report.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    /// Distance to the bound, positive when passing.
    pub margin: f64,
}

impl Check {
    /// Passes when `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let margin = bound - value;
        Self { name: name.into(), value, bound, pass: margin >= 0.0, margin }
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        let margin = value - bound;
        Self { name: name.into(), value, bound, pass: margin >= 0.0, margin }
    }

    /// A boolean outcome carried as 1/0 against a bound of 1.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        let value = if ok { 1.0 } else { 0.0 };
        Self { name: name.into(), value, bound: 1.0, pass: ok, margin: value - 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunMeta {
    pub alpha: f64,
    pub n: usize,
    pub tol: f64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub meta: RunMeta,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(meta: RunMeta) -> Self {
        Self { meta, checks: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        debug_assert!(
            self.checks.iter().all(|c| c.name != check.name),
            "duplicate check {}",
            check.name
        );
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
