//! Dense complex state vectors over labeled qubits.
//!
//! Basis indices treat the first registered qubit as the most significant
//! bit, so `amps[0b01]` of a register `[q1, q2]` is the amplitude of
//! `|0⟩_q1 |1⟩_q2`. Every operation returns a fresh value; states are never
//! mutated through the public API.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 16;

/// Tolerance for normalization, unitarity and other algebraic identities.
pub const TOLERANCE: f64 = 1e-12;

/// Projections with less probability than this are reported as impossible.
pub const IMPOSSIBLE_BRANCH: f64 = 1e-14;

/// Which party-side family a qubit belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Input qubits holding the state to send.
    X,
    /// Sender halves of the shared Bell pairs.
    A,
    /// Receiver halves of the shared Bell pairs.
    B,
    /// Generic qubits with no protocol role.
    Q,
}

impl Role {
    fn letter(self) -> char {
        match self {
            Role::X => 'x',
            Role::A => 'a',
            Role::B => 'b',
            Role::Q => 'q',
        }
    }
}

/// Label of one qubit, written as a role letter followed by an index (`x1`, `b3`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QubitId {
    pub role: Role,
    pub index: u16,
}

impl QubitId {
    pub const fn new(role: Role, index: u16) -> Self {
        Self { role, index }
    }

    pub const fn x(index: u16) -> Self {
        Self::new(Role::X, index)
    }

    pub const fn a(index: u16) -> Self {
        Self::new(Role::A, index)
    }

    pub const fn b(index: u16) -> Self {
        Self::new(Role::B, index)
    }

    pub const fn q(index: u16) -> Self {
        Self::new(Role::Q, index)
    }

    /// `q1..=qn`, the default labels for unlabeled registers.
    pub fn generic(n: usize) -> Vec<Self> {
        (1..=n as u16).map(Self::q).collect()
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.role.letter(), self.index)
    }
}

impl FromStr for QubitId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let role = match chars.next() {
            Some('x') => Role::X,
            Some('a') => Role::A,
            Some('b') => Role::B,
            Some('q') => Role::Q,
            _ => return Err(Error::BadLabel(s.to_string())),
        };
        let index = chars
            .as_str()
            .parse::<u16>()
            .map_err(|_| Error::BadLabel(s.to_string()))?;
        Ok(Self { role, index })
    }
}

impl TryFrom<String> for QubitId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<QubitId> for String {
    fn from(q: QubitId) -> Self {
        q.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateName {
    I,
    X,
    Z,
    ZX,
    Custom,
}

/// A 2×2 unitary acting on one qubit.
///
/// `Z` follows the sign convention `Z|0⟩ = −|0⟩`, `Z|1⟩ = |1⟩`, and `ZX` is the
/// product `Z·X` (X applied first).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitGate {
    name: GateName,
    matrix: [[Complex64; 2]; 2],
}

impl SingleQubitGate {
    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);
    const MINUS_ONE: Complex64 = Complex64::new(-1.0, 0.0);

    pub const fn identity() -> Self {
        Self {
            name: GateName::I,
            matrix: [[Self::ONE, Self::ZERO], [Self::ZERO, Self::ONE]],
        }
    }

    pub const fn x() -> Self {
        Self {
            name: GateName::X,
            matrix: [[Self::ZERO, Self::ONE], [Self::ONE, Self::ZERO]],
        }
    }

    pub const fn z() -> Self {
        Self {
            name: GateName::Z,
            matrix: [[Self::MINUS_ONE, Self::ZERO], [Self::ZERO, Self::ONE]],
        }
    }

    pub const fn zx() -> Self {
        Self {
            name: GateName::ZX,
            matrix: [[Self::ZERO, Self::MINUS_ONE], [Self::ONE, Self::ZERO]],
        }
    }

    /// Wraps an arbitrary matrix after checking `G†G = I`.
    pub fn custom(matrix: [[Complex64; 2]; 2]) -> Result<Self> {
        let mut dev = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let acc: Complex64 = matrix.iter().map(|row| row[i].conj() * row[j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((acc - want).norm());
            }
        }
        if !dev.is_finite() || dev > TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            name: GateName::Custom,
            matrix,
        })
    }

    pub fn name(&self) -> GateName {
        self.name
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.matrix
    }
}

/// Result of projecting part of a register onto a fixed state.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub probability: f64,
    /// Normalized post-measurement state on the untouched qubits; `None` marks
    /// an impossible branch (probability below [`IMPOSSIBLE_BRANCH`]).
    pub remainder: Option<StateVector>,
}

impl Projection {
    pub fn is_possible(&self) -> bool {
        self.remainder.is_some()
    }
}

/// Normalized pure state over an ordered list of labeled qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: Vec<QubitId>,
    amps: Vec<Amplitude>,
}

fn check_register(qubits: &[QubitId]) -> Result<()> {
    if qubits.len() > MAX_QUBITS {
        return Err(Error::TooManyQubits(qubits.len()));
    }
    let mut seen = HashSet::with_capacity(qubits.len());
    for q in qubits {
        if !seen.insert(*q) {
            return Err(Error::DuplicateQubit(*q));
        }
    }
    Ok(())
}

fn same_set(left: &[QubitId], right: &[QubitId]) -> bool {
    left.len() == right.len() && {
        let l: HashSet<_> = left.iter().collect();
        right.iter().all(|q| l.contains(q))
    }
}

impl StateVector {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(qubits: Vec<QubitId>, amps: Vec<Amplitude>) -> Result<Self> {
        check_register(&qubits)?;
        let expected = 1usize << qubits.len();
        if amps.len() != expected {
            return Err(Error::LengthMismatch {
                qubits: qubits.len(),
                expected,
                got: amps.len(),
            });
        }
        if let Some(index) = amps
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(qubits: Vec<QubitId>, index: usize) -> Result<Self> {
        check_register(&qubits)?;
        let len = 1usize << qubits.len();
        if index >= len {
            return Err(Error::LengthMismatch {
                qubits: qubits.len(),
                expected: len,
                got: index + 1,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amps })
    }

    /// Random state with i.i.d. complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(qubits: Vec<QubitId>, rng: &mut R) -> Result<Self> {
        check_register(&qubits)?;
        let amps = (0..1usize << qubits.len())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::new(qubits, amps)
    }

    pub fn qubits(&self) -> &[QubitId] {
        &self.qubits
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn position(&self, q: QubitId) -> Result<usize> {
        self.qubits
            .iter()
            .position(|&p| p == q)
            .ok_or(Error::UnknownQubit(q))
    }

    pub fn contains(&self, q: QubitId) -> bool {
        self.qubits.contains(&q)
    }

    fn mask(&self, pos: usize) -> usize {
        1 << (self.qubits.len() - 1 - pos)
    }

    /// `self ⊗ other`, with `other`'s qubits appended after `self`'s.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        if let Some(q) = other.qubits.iter().find(|q| self.qubits.contains(q)) {
            return Err(Error::DuplicateQubit(*q));
        }
        let mut qubits = self.qubits.clone();
        qubits.extend_from_slice(&other.qubits);
        check_register(&qubits)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(StateVector { qubits, amps })
    }

    pub fn apply_gate(&self, gate: &SingleQubitGate, target: QubitId) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate, target)?;
        Ok(out)
    }

    pub(crate) fn apply_gate_in_place(
        &mut self,
        gate: &SingleQubitGate,
        target: QubitId,
    ) -> Result<()> {
        let stride = self.mask(self.position(target)?);
        let [[m00, m01], [m10, m11]] = gate.matrix;
        for block in (0..self.amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let lo = self.amps[i];
                let hi = self.amps[i + stride];
                self.amps[i] = m00 * lo + m01 * hi;
                self.amps[i + stride] = m10 * lo + m11 * hi;
            }
        }
        Ok(())
    }

    /// Multiplies every amplitude by a unit-modulus scalar.
    pub(crate) fn scale_in_place(&mut self, phase: Complex64) {
        for a in &mut self.amps {
            *a *= phase;
        }
    }

    /// Same physical state with qubits listed in `new_order`.
    pub fn reorder(&self, new_order: &[QubitId]) -> Result<StateVector> {
        if !same_set(&self.qubits, new_order) {
            return Err(Error::NotAPermutation);
        }
        check_register(new_order)?;
        let n = self.qubits.len();
        // source bit mask for each destination position
        let src_masks: Vec<usize> = new_order
            .iter()
            .map(|q| self.mask(self.position(*q).expect("checked above")))
            .collect();
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (dst, slot) in amps.iter_mut().enumerate() {
            let mut src = 0;
            for (pos, m) in src_masks.iter().enumerate() {
                if dst & (1 << (n - 1 - pos)) != 0 {
                    src |= m;
                }
            }
            *slot = self.amps[src];
        }
        Ok(StateVector {
            qubits: new_order.to_vec(),
            amps,
        })
    }

    /// Renames qubits position by position; amplitudes are untouched.
    pub fn relabel(&self, labels: &[QubitId]) -> Result<StateVector> {
        if labels.len() != self.qubits.len() {
            return Err(Error::QubitSetMismatch {
                left: self.qubits.clone(),
                right: labels.to_vec(),
            });
        }
        check_register(labels)?;
        Ok(StateVector {
            qubits: labels.to_vec(),
            amps: self.amps.clone(),
        })
    }

    /// `⟨self|other⟩`, aligning `other` to this register's order first.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if !same_set(&self.qubits, &other.qubits) {
            return Err(Error::QubitSetMismatch {
                left: self.qubits.clone(),
                right: other.qubits.clone(),
            });
        }
        let aligned;
        let other = if self.qubits == other.qubits {
            other
        } else {
            aligned = other.reorder(&self.qubits)?;
            &aligned
        };
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Projects `targets` onto `onto` (a state over exactly those qubits),
    /// returning the branch probability and the normalized remainder over the
    /// other qubits in their original order.
    pub fn project_qubits(&self, targets: &[QubitId], onto: &StateVector) -> Result<Projection> {
        check_register(targets)?;
        if !same_set(targets, &onto.qubits) {
            return Err(Error::QubitSetMismatch {
                left: targets.to_vec(),
                right: onto.qubits.clone(),
            });
        }
        let onto = onto.reorder(targets)?;
        let target_masks = targets
            .iter()
            .map(|q| self.position(*q).map(|p| self.mask(p)))
            .collect::<Result<Vec<_>>>()?;
        let rest: Vec<QubitId> = self
            .qubits
            .iter()
            .copied()
            .filter(|q| !targets.contains(q))
            .collect();
        let rest_masks: Vec<usize> = rest
            .iter()
            .map(|q| self.mask(self.position(*q).expect("subset of register")))
            .collect();

        let spread = |index: usize, masks: &[usize]| -> usize {
            let k = masks.len();
            masks
                .iter()
                .enumerate()
                .filter(|(j, _)| index & (1 << (k - 1 - j)) != 0)
                .fold(0, |acc, (_, m)| acc | m)
        };
        let target_offsets: Vec<usize> = (0..onto.amps.len())
            .map(|j| spread(j, &target_masks))
            .collect();

        let mut amps = Vec::with_capacity(1 << rest.len());
        for r in 0..1usize << rest.len() {
            let base = spread(r, &rest_masks);
            let amp: Complex64 = onto
                .amps
                .iter()
                .zip(&target_offsets)
                .map(|(w, off)| w.conj() * self.amps[base | off])
                .sum();
            amps.push(amp);
        }
        let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let remainder = if probability < IMPOSSIBLE_BRANCH {
            None
        } else {
            let norm = probability.sqrt();
            Some(StateVector {
                qubits: rest,
                amps: amps.into_iter().map(|a| a / norm).collect(),
            })
        };
        Ok(Projection {
            probability,
            remainder,
        })
    }

    /// Text record: a `qubits:` header line, then one `re,im` pair per line.
    pub fn to_literal(&self) -> String {
        let labels: Vec<String> = self.qubits.iter().map(|q| q.to_string()).collect();
        let mut out = format!("qubits: {}\n", labels.join(" "));
        for a in &self.amps {
            out.push_str(&format!("{},{}\n", a.re, a.im));
        }
        out
    }

    /// Parses the format written by [`StateVector::to_literal`]. Blank lines
    /// and `#` comments are skipped. Without a header the register is
    /// labeled `q1..qn` and the amplitude count must be a power of two.
    pub fn parse_literal(text: &str) -> Result<StateVector> {
        let mut qubits: Option<Vec<QubitId>> = None;
        let mut amps = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            last_line = line_no;
            if let Some(labels) = line.strip_prefix("qubits:") {
                if qubits.is_some() || !amps.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "qubits header must come first and only once".into(),
                    });
                }
                let parsed = labels
                    .split_whitespace()
                    .map(|l| l.parse::<QubitId>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                check_register(&parsed).map_err(|e| Error::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?;
                qubits = Some(parsed);
                continue;
            }
            let (re, im) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected `re,im`, found {line:?}"),
            })?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid number {:?}", s.trim()),
                })
            };
            let amp = Complex64::new(parse(re)?, parse(im)?);
            if let Some(q) = &qubits {
                if amps.len() == 1 << q.len() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!(
                            "unexpected amplitude index {} for {} qubits",
                            amps.len(),
                            q.len()
                        ),
                    });
                }
            }
            amps.push(amp);
        }
        let qubits = match qubits {
            Some(q) => {
                if amps.len() < 1 << q.len() {
                    return Err(Error::Parse {
                        line: last_line + 1,
                        msg: format!("missing amplitude index {}", amps.len()),
                    });
                }
                q
            }
            None => {
                if !amps.len().is_power_of_two() {
                    return Err(Error::Parse {
                        line: last_line + 1,
                        msg: format!("missing amplitude index {}", amps.len()),
                    });
                }
                QubitId::generic(amps.len().trailing_zeros() as usize)
            }
        };
        StateVector::new(qubits, amps).map_err(|e| Error::Parse {
            line: last_line,
            msg: e.to_string(),
        })
    }
}

pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    a.fidelity(b)
}
