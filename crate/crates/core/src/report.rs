//! Verification reports: every check runs to completion and lists all
//! violations instead of stopping at the first one.

use std::fmt;

use serde::Serialize;

use crate::graded::{Bidegree, IndexTuple};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Short tag such as "face-coherence" or "involution-reversal".
    pub relation: String,
    pub level: Option<i64>,
    pub tuple: Option<Vec<usize>>,
    pub bidegree: Option<Bidegree>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub subject: String,
    /// Number of individual identities evaluated.
    pub checks: usize,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(subject: impl Into<String>) -> Self {
        Report { subject: subject.into(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation(
        &mut self,
        relation: &str,
        level: Option<i64>,
        tuple: Option<&IndexTuple>,
        bidegree: Option<Bidegree>,
        detail: impl Into<String>,
    ) {
        self.violations.push(Violation {
            relation: relation.to_string(),
            level,
            tuple: tuple.map(|t| t.as_slice().to_vec()),
            bidegree,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Appends another report's checks, violations and notes.
    pub fn absorb(&mut self, other: Report) {
        self.checks += other.checks;
        self.violations.extend(other.violations);
        self.notes.extend(other.notes);
    }

    /// Violations carrying the given relation tag.
    pub fn with_relation<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.relation == relation)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(f, "{}: {} ({} checks, {} violations)", self.subject, status, self.checks, self.violations.len())?;
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        for v in &self.violations {
            write!(f, "  [{}]", v.relation)?;
            if let Some(l) = v.level {
                write!(f, " n={l}")?;
            }
            if let Some(t) = &v.tuple {
                let s: Vec<String> = t.iter().map(|i| i.to_string()).collect();
                write!(f, " ({})", s.join(","))?;
            }
            if let Some((n, m)) = v.bidegree {
                write!(f, " at ({n},{m})")?;
            }
            writeln!(f, ": {}", v.detail)?;
        }
        Ok(())
    }
}
