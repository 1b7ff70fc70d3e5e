//! Row-by-row comparison of two correction tables.

use serde::Serialize;

use crate::bell::BellState;
use crate::error::{Error, Result};
use crate::teleport::table::{outcome_code, CorrectionTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    /// Same operator up to a global sign.
    PhaseOnlyMismatch,
    OperatorMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowVerdict {
    pub code: String,
    pub outcomes: Vec<BellState>,
    pub derived: String,
    pub reference: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificationReport {
    pub width: usize,
    pub matches: usize,
    pub phase_only_mismatches: usize,
    pub operator_mismatches: usize,
    pub rows: Vec<RowVerdict>,
}

impl CertificationReport {
    pub fn row(&self, outcomes: &[BellState]) -> Option<&RowVerdict> {
        self.rows.iter().find(|r| r.outcomes == outcomes)
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &RowVerdict> {
        self.rows.iter().filter(|r| r.verdict != Verdict::Match)
    }

    pub fn all_match(&self) -> bool {
        self.matches == self.rows.len()
    }
}

pub fn certify_table(
    derived: &CorrectionTable,
    reference: &CorrectionTable,
) -> Result<CertificationReport> {
    if derived.width() != reference.width() {
        return Err(Error::WidthMismatch {
            expected: derived.width(),
            got: reference.width(),
        });
    }
    let mut rows = Vec::with_capacity(derived.len());
    for (key, d) in derived.iter() {
        let r = reference
            .get(key)
            .ok_or_else(|| Error::Config(format!("reference missing row {}", outcome_code(key))))?;
        let verdict = if d == r {
            Verdict::Match
        } else if d.same_up_to_phase(r) {
            Verdict::PhaseOnlyMismatch
        } else {
            Verdict::OperatorMismatch
        };
        rows.push(RowVerdict {
            code: outcome_code(key),
            outcomes: key.clone(),
            derived: d.to_string(),
            reference: r.to_string(),
            verdict,
        });
    }
    let count = |v| rows.iter().filter(|r| r.verdict == v).count();
    Ok(CertificationReport {
        width: derived.width(),
        matches: count(Verdict::Match),
        phase_only_mismatches: count(Verdict::PhaseOnlyMismatch),
        operator_mismatches: count(Verdict::OperatorMismatch),
        rows,
    })
}
