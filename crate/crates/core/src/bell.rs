//! Bell basis, Bell-pair resources and Bell-basis measurement.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{QubitId, StateVector};

/// Deterministic generator threaded through every sampling call.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// One of the four maximally entangled two-qubit states.
///
/// `Φ± = (|00⟩ ± |11⟩)/√2`, `Ψ± = (|01⟩ ± |10⟩)/√2`. The discriminant is the
/// two-bit classical code sent for the outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellState {
    PsiMinus = 0b00,
    PsiPlus = 0b01,
    PhiMinus = 0b10,
    PhiPlus = 0b11,
}

impl BellState {
    /// All four states in code order.
    pub const ALL: [BellState; 4] = [
        BellState::PsiMinus,
        BellState::PsiPlus,
        BellState::PhiMinus,
        BellState::PhiPlus,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<BellState> {
        Self::ALL.get(code as usize).copied()
    }

    /// High bit first.
    pub fn bits(self) -> [bool; 2] {
        let c = self.code();
        [c & 0b10 != 0, c & 0b01 != 0]
    }

    pub fn from_bits(bits: [bool; 2]) -> BellState {
        Self::ALL[(bits[0] as usize) << 1 | bits[1] as usize]
    }

    pub fn amplitudes(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        match self {
            BellState::PhiPlus => [h, z, z, h],
            BellState::PhiMinus => [h, z, z, -h],
            BellState::PsiPlus => [z, h, h, z],
            BellState::PsiMinus => [z, h, -h, z],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BellState::PsiMinus => "Ψ-",
            BellState::PsiPlus => "Ψ+",
            BellState::PhiMinus => "Φ-",
            BellState::PhiPlus => "Φ+",
        }
    }

    fn ascii(self) -> &'static str {
        match self {
            BellState::PsiMinus => "psi-",
            BellState::PsiPlus => "psi+",
            BellState::PhiMinus => "phi-",
            BellState::PhiPlus => "phi+",
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ascii())
    }
}

impl FromStr for BellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.ascii().eq_ignore_ascii_case(s) || b.symbol() == s)
            .ok_or_else(|| Error::Config(format!("unknown Bell state {s:?}")))
    }
}

/// Result of one Bell measurement on a labeled pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellOutcome {
    pub state: BellState,
    pub pair: (QubitId, QubitId),
}

impl BellOutcome {
    pub fn bits(&self) -> [bool; 2] {
        self.state.bits()
    }
}

/// One of the four branches of a Bell measurement, with its exact Born
/// probability. `remainder` is `None` on impossible branches.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeBranch {
    pub outcome: BellOutcome,
    pub probability: f64,
    pub remainder: Option<StateVector>,
}

impl OutcomeBranch {
    pub fn is_possible(&self) -> bool {
        self.remainder.is_some()
    }
}

pub fn bell_pair(kind: BellState, a: QubitId, b: QubitId) -> Result<StateVector> {
    if a == b {
        return Err(Error::DuplicateQubit(a));
    }
    StateVector::new(vec![a, b], kind.amplitudes().to_vec())
}

/// Exhaustive Bell-basis decomposition of `s` on `pair`: all four branches,
/// in code order, with the pair removed from each remainder.
pub fn measure_bell_branches(
    s: &StateVector,
    pair: (QubitId, QubitId),
) -> Result<Vec<OutcomeBranch>> {
    s.position(pair.0)?;
    s.position(pair.1)?;
    BellState::ALL
        .into_iter()
        .map(|kind| {
            let onto = bell_pair(kind, pair.0, pair.1)?;
            let proj = s.project_qubits(&[pair.0, pair.1], &onto)?;
            Ok(OutcomeBranch {
                outcome: BellOutcome { state: kind, pair },
                probability: proj.probability,
                remainder: proj.remainder,
            })
        })
        .collect()
}

/// Samples a Bell measurement outcome with its Born probability and returns
/// the collapsed remainder.
pub fn measure_bell_sample<R: Rng + ?Sized>(
    s: &StateVector,
    pair: (QubitId, QubitId),
    rng: &mut R,
) -> Result<(BellOutcome, StateVector)> {
    let (branch, _) = sample_branch(measure_bell_branches(s, pair)?, rng);
    let remainder = branch.remainder.ok_or(Error::ImpossibleBranch)?;
    Ok((branch.outcome, remainder))
}

/// Picks one possible branch by inverse-CDF sampling. Returns the branch and
/// its probability renormalized over the possible branches.
pub(crate) fn sample_branch<R: Rng + ?Sized>(
    branches: Vec<OutcomeBranch>,
    rng: &mut R,
) -> (OutcomeBranch, f64) {
    let possible: Vec<OutcomeBranch> = branches.into_iter().filter(|b| b.is_possible()).collect();
    let total: f64 = possible.iter().map(|b| b.probability).sum();
    let draw = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let last = possible.len() - 1;
    for (i, branch) in possible.into_iter().enumerate() {
        acc += branch.probability;
        if draw < acc || i == last {
            let p = branch.probability / total;
            return (branch, p);
        }
    }
    unreachable!("a normalized state has at least one possible branch")
}
