//! Verdict records emitted by every verification entry point.

use std::fmt;

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One verified identity, with the verdict it produced and the verdict the
/// theory expects. Negative controls are first-class: they expect `Fail`.
#[derive(Debug, Clone)]
pub struct CheckRecord {
    /// Stable machine name, e.g. `dual-moser/involution/F0-F1`.
    pub name: String,
    /// Identity slug the check certifies, e.g. `pairwise-poisson-bracket`.
    pub anchor: String,
    pub verdict: Verdict,
    pub expected: Verdict,
    /// Small witness: residual size, term count, sampled value.
    pub witness: String,
}

impl CheckRecord {
    pub fn ok(&self) -> bool {
        self.verdict == self.expected
    }
}

/// Ordered collection of check records for one verification run.
#[derive(Debug, Clone, Default)]
pub struct VerificationReport {
    pub title: String,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            records: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        anchor: impl Into<String>,
        passed: bool,
        expected_pass: bool,
        witness: impl Into<String>,
    ) {
        self.records.push(CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            verdict: Verdict::from_bool(passed),
            expected: if expected_pass {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            witness: witness.into(),
        });
    }

    /// True when every record matches its expectation.
    pub fn ok(&self) -> bool {
        self.records.iter().all(CheckRecord::ok)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }

    /// Records whose verdicts deviate from expectation.
    pub fn deviations(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.ok())
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for r in &self.records {
            let marker = if r.ok() { "ok " } else { "DEV" };
            writeln!(
                f,
                "  [{marker}] {:<52} {} (expected {}) {}",
                r.name, r.verdict, r.expected, r.witness
            )?;
        }
        Ok(())
    }
}
