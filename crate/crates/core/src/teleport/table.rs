//! Correction tables keyed by Bell outcome sequences.
//!
//! Keys list outcomes in measurement order: the `(x_N, a_N)` pair first,
//! down to `(x_1, a_1)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bell::BellState;
use crate::error::{Error, Result};
use crate::teleport::pauli::PauliString;
use crate::teleport::{measurement_order, MAX_TABLE_WIDTH};

/// Outcome sequence in measurement order.
pub type OutcomeKey = Vec<BellState>;

/// Concatenated 2-bit codes, first measurement first.
pub fn outcome_code(outcomes: &[BellState]) -> String {
    outcomes
        .iter()
        .flat_map(|o| o.bits())
        .map(|b| if b { '1' } else { '0' })
        .collect()
}

pub fn parse_outcome_code(code: &str) -> Option<OutcomeKey> {
    if !code.len().is_multiple_of(2) || !code.chars().all(|c| c == '0' || c == '1') {
        return None;
    }
    let bits: Vec<bool> = code.chars().map(|c| c == '1').collect();
    Some(
        bits.chunks(2)
            .map(|p| BellState::from_bits([p[0], p[1]]))
            .collect(),
    )
}

/// Every outcome sequence of length `n`, in code order.
pub fn all_outcome_keys(n: usize) -> Vec<OutcomeKey> {
    (0..1usize << (2 * n))
        .map(|code| {
            (0..n)
                .map(|k| {
                    let shift = 2 * (n - 1 - k);
                    BellState::from_code(((code >> shift) & 0b11) as u8).expect("two bits")
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrectionTable {
    n: usize,
    resource: BellState,
    /// Pair indices in measurement order, e.g. `[2, 1]`.
    order: Vec<usize>,
    #[serde(serialize_with = "serialize_entries")]
    entries: BTreeMap<OutcomeKey, PauliString>,
}

fn serialize_entries<S: serde::Serializer>(
    entries: &BTreeMap<OutcomeKey, PauliString>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_map(
        entries
            .iter()
            .map(|(k, v)| (outcome_code(k), v.to_string())),
    )
}

impl CorrectionTable {
    /// Checks totality (`4^n` entries) and the `2n` operation bound.
    pub fn new(
        n: usize,
        resource: BellState,
        entries: BTreeMap<OutcomeKey, PauliString>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_TABLE_WIDTH {
            return Err(Error::WidthOutOfRange {
                n,
                min: 1,
                max: MAX_TABLE_WIDTH,
            });
        }
        for key in all_outcome_keys(n) {
            let entry = entries.get(&key).ok_or_else(|| {
                Error::Config(format!("table missing row {}", outcome_code(&key)))
            })?;
            if entry.single_qubit_op_count() > 2 * n {
                return Err(Error::Config(format!(
                    "row {} uses {} single-qubit operations, bound is {}",
                    outcome_code(&key),
                    entry.single_qubit_op_count(),
                    2 * n
                )));
            }
        }
        if entries.len() != 1 << (2 * n) {
            return Err(Error::Config(format!(
                "table has {} rows, expected {}",
                entries.len(),
                1 << (2 * n)
            )));
        }
        Ok(Self {
            n,
            resource,
            order: measurement_order(n),
            entries,
        })
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn resource(&self) -> BellState {
        self.resource
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn get(&self, outcomes: &[BellState]) -> Option<&PauliString> {
        self.entries.get(outcomes)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OutcomeKey, &PauliString)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Text form: header lines, then one `code pauli-tokens` row per outcome.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "width {}", self.n).unwrap();
        writeln!(out, "resource {}", self.resource).unwrap();
        let order: Vec<String> = self.order.iter().map(|i| format!("x{i}a{i}")).collect();
        writeln!(out, "order {}", order.join(" ")).unwrap();
        for (key, pauli) in &self.entries {
            writeln!(out, "{} {}", outcome_code(key), pauli).unwrap();
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut resource = BellState::PsiMinus;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match head {
                "width" => {
                    n = Some(
                        rest.parse::<usize>()
                            .map_err(|_| err(format!("bad width {rest:?}")))?,
                    )
                }
                "resource" => resource = rest.parse().map_err(|e: Error| err(e.to_string()))?,
                "order" => {
                    let want = n.ok_or_else(|| err("order before width".into()))?;
                    let expected: Vec<String> = measurement_order(want)
                        .iter()
                        .map(|i| format!("x{i}a{i}"))
                        .collect();
                    let got: Vec<&str> = rest.split_whitespace().collect();
                    if got != expected {
                        return Err(err(format!("unsupported measurement order {rest:?}")));
                    }
                }
                code => {
                    let width = n.ok_or_else(|| err("row before width header".into()))?;
                    let key = parse_outcome_code(code)
                        .filter(|k| k.len() == width)
                        .ok_or_else(|| err(format!("bad outcome code {code:?}")))?;
                    let pauli: PauliString = rest.parse().map_err(|e: Error| err(e.to_string()))?;
                    if entries.insert(key, pauli).is_some() {
                        return Err(err(format!("duplicate row {code}")));
                    }
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: text.lines().count(),
            msg: "missing width header".into(),
        })?;
        Self::new(n, resource, entries)
    }
}
