//! Bookkeeping for the acceptance run. Each criterion collects named
//! sub-checks with free-form notes and renders as one verdict line followed
//! by indented detail.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

/// One pass/fail sub-check of a criterion.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A numbered acceptance criterion.
#[derive(Debug)]
pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub error: Option<String>,
    pub elapsed: Duration,
    started: Instant,
}

impl Criterion {
    pub fn new(id: &'static str, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            checks: Vec::new(),
            notes: Vec::new(),
            error: None,
            elapsed: Duration::ZERO,
            started: Instant::now(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Stop the clock and, if given, compare against a wall-clock budget.
    pub fn finish(&mut self, budget: Option<Duration>) {
        self.elapsed = self.started.elapsed();
        if let Some(b) = budget {
            let ok = self.elapsed <= b;
            let detail = format!("{:.1} s (budget {:.0} s)", self.elapsed.as_secs_f64(), b.as_secs_f64());
            self.check("runtime", ok, detail);
        }
    }

    /// Record an error that prevented the criterion from being evaluated.
    pub fn fail_with(&mut self, err: impl std::fmt::Display) {
        self.error = Some(err.to_string());
    }

    /// Passed when no error interrupted the evaluation and every recorded
    /// sub-check passed. A criterion with no sub-checks does not pass.
    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{:<4} {verdict}  {} [{:.1} s]",
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        )
        .unwrap();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(out, "       {mark} {}: {}", c.name, c.detail).unwrap();
        }
        if let Some(e) = &self.error {
            writeln!(out, "       error: {e}").unwrap();
        }
        for n in &self.notes {
            for (i, line) in n.lines().enumerate() {
                let lead = if i == 0 { "note:" } else { "     " };
                writeln!(out, "       {lead} {line}").unwrap();
            }
        }
        out
    }
}

/// Final tally line.
pub fn summary(all: &[Criterion]) -> String {
    let passed: Vec<&str> = all.iter().filter(|c| c.passed()).map(|c| c.id).collect();
    let failed: Vec<&str> = all.iter().filter(|c| !c.passed()).map(|c| c.id).collect();
    format!(
        "acceptance: {} of {} criteria pass; passed [{}]; failed [{}]",
        passed.len(),
        all.len(),
        passed.join(" "),
        failed.join(" ")
    )
}
