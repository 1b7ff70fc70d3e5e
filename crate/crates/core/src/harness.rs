//! Two-party protocol sessions with transcript and resource accounting.
//!
//! Alice and Bob act on one shared in-process [`StateVector`] through an
//! ownership-checked facade. The only thing that crosses from Alice to Bob is
//! a [`ClassicalMessage`]; Bob's correction is a pure function of its bits.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{measure_bell_branches, sample_branch, seeded_rng, BellOutcome, BellState};
use crate::error::{Error, Result};
use crate::qstate::{QubitId, Role, StateVector};
use crate::teleport::{
    alice_pairs, all_outcome_keys, base_corrections, bob_register, check_width, prepare_joint,
    recursive_correction, PauliString, MAX_TABLE_WIDTH, MAX_WIDTH,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartyRole {
    Alice,
    Bob,
}

impl PartyRole {
    fn name(self) -> &'static str {
        match self {
            PartyRole::Alice => "Alice",
            PartyRole::Bob => "Bob",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Party {
    pub role: PartyRole,
    pub owned_qubits: BTreeSet<QubitId>,
}

impl Party {
    /// Alice holds `x_i` and `a_i`, Bob holds `b_i`.
    pub fn for_protocol(role: PartyRole, n: usize) -> Self {
        let roles: &[Role] = match role {
            PartyRole::Alice => &[Role::X, Role::A],
            PartyRole::Bob => &[Role::B],
        };
        let owned_qubits = roles
            .iter()
            .flat_map(|&r| (1..=n as u16).map(move |i| QubitId::new(r, i)))
            .collect();
        Self { role, owned_qubits }
    }

    pub fn owns(&self, q: QubitId) -> bool {
        self.owned_qubits.contains(&q)
    }

    fn require(&self, q: QubitId) -> Result<()> {
        if self.owns(q) {
            Ok(())
        } else {
            Err(Error::LocalityViolation {
                role: self.role.name(),
                qubit: q,
            })
        }
    }
}

/// Bits Alice publishes: one 2-bit code per measurement, in measurement order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ClassicalMessage {
    pub bits: Vec<bool>,
}

impl ClassicalMessage {
    pub fn encode(outcomes: &[BellState]) -> Self {
        Self {
            bits: outcomes.iter().flat_map(|o| o.bits()).collect(),
        }
    }

    pub fn decode(&self) -> Result<Vec<BellState>> {
        if !self.bits.len().is_multiple_of(2) {
            return Err(Error::Config(format!(
                "message of {} bits is not whole outcomes",
                self.bits.len()
            )));
        }
        Ok(self
            .bits
            .chunks(2)
            .map(|p| BellState::from_bits([p[0], p[1]]))
            .collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for ClassicalMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for ClassicalMessage {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassicalMessage {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(serde::de::Error::custom(format!("bad bit {c:?}"))),
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { bits })
    }
}

/// Record of one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub n: usize,
    pub resource: BellState,
    pub outcomes: Vec<BellOutcome>,
    pub message: ClassicalMessage,
    pub corrections: PauliString,
    pub bell_pairs_consumed: usize,
    pub single_qubit_ops: usize,
    /// Probability of this outcome sequence.
    pub branch_probability: f64,
    pub final_fidelity: f64,
    /// `⟨ξ|Bob's final state⟩`, normalized to unit modulus.
    pub residual_phase: Complex64,
}

impl ProtocolTranscript {
    /// Human-readable list of broken resource bounds; empty when the run is
    /// within budget.
    pub fn resource_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.bell_pairs_consumed != self.n {
            out.push(format!(
                "consumed {} Bell pairs for width {}",
                self.bell_pairs_consumed, self.n
            ));
        }
        if self.message.len() != 2 * self.n {
            out.push(format!(
                "sent {} classical bits for width {}",
                self.message.len(),
                self.n
            ));
        }
        if self.single_qubit_ops > 2 * self.n {
            out.push(format!(
                "applied {} single-qubit operations for width {}",
                self.single_qubit_ops, self.n
            ));
        }
        out
    }

    pub fn outcome_states(&self) -> Vec<BellState> {
        self.outcomes.iter().map(|o| o.state).collect()
    }
}

/// One run of the protocol, from shared state preparation to Bob's fix-up.
#[derive(Debug)]
pub struct Session {
    n: usize,
    resource: BellState,
    input: StateVector,
    system: StateVector,
    alice: Party,
    bob: Party,
    alice_log: Option<Vec<BellOutcome>>,
    message: Option<ClassicalMessage>,
    branch_probability: f64,
    pairs_measured: usize,
}

impl Session {
    /// Prepares `ξ` on Alice's `x` qubits and distributes `n` pairs of kind
    /// `resource`, `a_i` to Alice and `b_i` to Bob.
    pub fn prepare(xi: &StateVector, resource: BellState) -> Result<Self> {
        let n = xi.num_qubits();
        check_width(n, MAX_WIDTH)?;
        let system = prepare_joint(xi, resource)?;
        Ok(Self {
            n,
            resource,
            input: xi.clone(),
            system,
            alice: Party::for_protocol(PartyRole::Alice, n),
            bob: Party::for_protocol(PartyRole::Bob, n),
            alice_log: Some(Vec::new()),
            message: None,
            branch_probability: 1.0,
            pairs_measured: 0,
        })
    }

    /// Runs all steps with sampled measurements.
    pub fn run<R: Rng + ?Sized>(
        xi: &StateVector,
        resource: BellState,
        rng: &mut R,
    ) -> Result<ProtocolTranscript> {
        let mut session = Self::prepare(xi, resource)?;
        let message = session.alice_measure(rng)?;
        session.bob_correct(&message)
    }

    pub fn alice(&self) -> &Party {
        &self.alice
    }

    pub fn bob(&self) -> &Party {
        &self.bob
    }

    /// Alice measures every `(x_i, a_i)` pair in the Bell basis, sampling each
    /// outcome, and publishes the message.
    pub fn alice_measure<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<ClassicalMessage> {
        self.alice_measure_with(|branches| Ok(sample_branch(branches, rng).0))
    }

    /// Alice's measurements with outcomes fixed in advance (branch
    /// enumeration). Fails on a zero-probability outcome.
    pub fn alice_measure_forced(&mut self, outcomes: &[BellState]) -> Result<ClassicalMessage> {
        if outcomes.len() != self.n {
            return Err(Error::WidthMismatch {
                expected: self.n,
                got: outcomes.len(),
            });
        }
        let mut forced = outcomes.iter();
        self.alice_measure_with(|branches| {
            let want = *forced.next().expect("length checked");
            branches
                .into_iter()
                .find(|b| b.outcome.state == want)
                .filter(|b| b.is_possible())
                .ok_or(Error::ImpossibleBranch)
        })
    }

    fn alice_measure_with<F>(&mut self, mut choose: F) -> Result<ClassicalMessage>
    where
        F: FnMut(Vec<crate::bell::OutcomeBranch>) -> Result<crate::bell::OutcomeBranch>,
    {
        if self.message.is_some() {
            return Err(Error::Config("Alice has already measured".into()));
        }
        let mut log = Vec::with_capacity(self.n);
        for pair in alice_pairs(self.n) {
            self.alice.require(pair.0)?;
            self.alice.require(pair.1)?;
            let branch = choose(measure_bell_branches(&self.system, pair)?)?;
            self.branch_probability *= branch.probability;
            self.system = branch.remainder.ok_or(Error::ImpossibleBranch)?;
            self.pairs_measured += 1;
            log.push(branch.outcome);
        }
        let message = ClassicalMessage::encode(&log.iter().map(|o| o.state).collect::<Vec<_>>());
        self.alice_log = Some(log);
        self.message = Some(message.clone());
        Ok(message)
    }

    /// Drops everything Alice holds after her message is out: her outcome
    /// record and any qubit she still owns.
    pub fn erase_alice(&mut self) -> Result<()> {
        if let Some(q) = self.system.qubits().iter().find(|q| self.alice.owns(**q)) {
            return Err(Error::Config(format!(
                "Alice still holds {q} in the shared system"
            )));
        }
        self.alice_log = None;
        self.alice.owned_qubits.clear();
        Ok(())
    }

    /// Bob decodes `message`, applies the correction to his qubits and the
    /// session closes with a transcript.
    pub fn bob_correct(mut self, message: &ClassicalMessage) -> Result<ProtocolTranscript> {
        let outcomes = message.decode()?;
        if outcomes.len() != self.n {
            return Err(Error::WidthMismatch {
                expected: self.n,
                got: outcomes.len(),
            });
        }
        let correction = bob_correction(message, self.resource)?;
        for (q, _) in correction.factors() {
            self.bob.require(*q)?;
        }
        let mut state = self.system.reorder(&bob_register(self.n))?;
        let ops = correction.apply_counting(&mut state)?;

        let received = state.relabel(self.input.qubits())?;
        let overlap = self.input.inner(&received)?;
        let final_fidelity = overlap.norm_sqr().min(1.0);
        let residual_phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let recorded = match self.alice_log.take() {
            Some(log) => log,
            None => alice_pairs(self.n)
                .into_iter()
                .zip(outcomes)
                .map(|(pair, state)| BellOutcome { state, pair })
                .collect(),
        };
        Ok(ProtocolTranscript {
            n: self.n,
            resource: self.resource,
            outcomes: recorded,
            message: message.clone(),
            corrections: correction,
            bell_pairs_consumed: self.pairs_measured,
            single_qubit_ops: ops,
            branch_probability: self.branch_probability,
            final_fidelity,
            residual_phase,
        })
    }
}

/// Bob's correction as a function of the published bits alone.
pub fn bob_correction(message: &ClassicalMessage, resource: BellState) -> Result<PauliString> {
    let outcomes = message.decode()?;
    Ok(recursive_correction(
        &outcomes,
        &base_corrections(resource)?,
    ))
}

/// One seeded run with `Ψ−` resources.
pub fn run_session(xi: &StateVector, n: usize, seed: u64) -> Result<ProtocolTranscript> {
    if xi.num_qubits() != n {
        return Err(Error::WidthMismatch {
            expected: n,
            got: xi.num_qubits(),
        });
    }
    Session::run(xi, BellState::PsiMinus, &mut seeded_rng(seed))
}

/// Every outcome sequence of a width-`n` run, one transcript each, in code
/// order.
pub fn run_all_branches(xi: &StateVector, n: usize) -> Result<Vec<ProtocolTranscript>> {
    run_all_branches_with(xi, n, BellState::PsiMinus)
}

pub fn run_all_branches_with(
    xi: &StateVector,
    n: usize,
    resource: BellState,
) -> Result<Vec<ProtocolTranscript>> {
    check_width(n, MAX_TABLE_WIDTH)?;
    if xi.num_qubits() != n {
        return Err(Error::WidthMismatch {
            expected: n,
            got: xi.num_qubits(),
        });
    }
    all_outcome_keys(n)
        .into_iter()
        .map(|key| {
            let mut session = Session::prepare(xi, resource)?;
            let message = session.alice_measure_forced(&key)?;
            session.bob_correct(&message)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::TOLERANCE;

    #[test]
    fn parties_partition_the_register() {
        let alice = Party::for_protocol(PartyRole::Alice, 3);
        let bob = Party::for_protocol(PartyRole::Bob, 3);
        assert_eq!(alice.owned_qubits.len(), 6);
        assert_eq!(bob.owned_qubits.len(), 3);
        assert!(alice.owned_qubits.is_disjoint(&bob.owned_qubits));
        assert!(bob.owns(QubitId::b(3)));
        assert_eq!(
            bob.require(QubitId::a(1)),
            Err(Error::LocalityViolation {
                role: "Bob",
                qubit: QubitId::a(1)
            })
        );
    }

    #[test]
    fn message_round_trip() {
        let outcomes = vec![BellState::PhiPlus, BellState::PsiMinus, BellState::PsiPlus];
        let m = ClassicalMessage::encode(&outcomes);
        assert_eq!(m.to_string(), "110001");
        assert_eq!(m.decode().unwrap(), outcomes);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<ClassicalMessage>(&json).unwrap(), m);
    }

    #[test]
    fn two_qubit_session_sends_four_bits() {
        let xi = StateVector::random(QubitId::generic(2), &mut seeded_rng(8)).unwrap();
        for seed in 0..10 {
            let t = run_session(&xi, 2, seed).unwrap();
            assert_eq!(t.message.len(), 4);
            assert!(t.resource_violations().is_empty());
        }
    }

    #[test]
    fn zero_state_single_qubit() {
        let xi = StateVector::basis(QubitId::generic(1), 0).unwrap();
        let t = run_session(&xi, 1, 99).unwrap();
        assert!((t.final_fidelity - 1.0).abs() <= TOLERANCE);
        assert!(matches!(
            run_session(&xi, 2, 0),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn three_qubit_sessions_vary() {
        let xi = StateVector::random(QubitId::generic(3), &mut seeded_rng(4)).unwrap();
        let runs: Vec<_> = (0..10).map(|s| run_session(&xi, 3, s).unwrap()).collect();
        for t in &runs {
            assert!((t.final_fidelity - 1.0).abs() <= TOLERANCE);
            assert_eq!(t.bell_pairs_consumed, 3);
            assert_eq!(t.message.len(), 6);
            assert!(t.single_qubit_ops <= 6);
        }
        let distinct: BTreeSet<String> = runs.iter().map(|t| t.message.to_string()).collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn equal_seeds_give_identical_transcripts() {
        let xi = StateVector::random(QubitId::generic(3), &mut seeded_rng(6)).unwrap();
        assert_eq!(
            run_session(&xi, 3, 17).unwrap(),
            run_session(&xi, 3, 17).unwrap()
        );
    }

    #[test]
    fn all_branches_single_qubit() {
        let xi = StateVector::random(QubitId::generic(1), &mut seeded_rng(1)).unwrap();
        let ts = run_all_branches(&xi, 1).unwrap();
        assert_eq!(ts.len(), 4);
        let total: f64 = ts.iter().map(|t| t.branch_probability).sum();
        assert!((total - 1.0).abs() <= TOLERANCE);
        for (t, kind) in ts.iter().zip(BellState::ALL) {
            assert_eq!(t.outcomes[0].state, kind);
            assert!((t.branch_probability - 0.25).abs() <= TOLERANCE);
            assert!((t.final_fidelity - 1.0).abs() <= TOLERANCE);
        }
        assert!(matches!(
            run_all_branches(&StateVector::basis(QubitId::generic(5), 0).unwrap(), 5),
            Err(Error::WidthOutOfRange { .. })
        ));
    }

    #[test]
    fn erasing_alice_keeps_bobs_result() {
        let xi = StateVector::random(QubitId::generic(2), &mut seeded_rng(12)).unwrap();
        let mut kept = Session::prepare(&xi, BellState::PsiMinus).unwrap();
        let mut erased = Session::prepare(&xi, BellState::PsiMinus).unwrap();
        let m1 = kept.alice_measure(&mut seeded_rng(5)).unwrap();
        let m2 = erased.alice_measure(&mut seeded_rng(5)).unwrap();
        erased.erase_alice().unwrap();
        assert!(erased.alice().owned_qubits.is_empty());
        assert_eq!(
            kept.bob_correct(&m1).unwrap(),
            erased.bob_correct(&m2).unwrap()
        );
    }

    #[test]
    fn measuring_twice_is_rejected() {
        let xi = StateVector::basis(QubitId::generic(1), 0).unwrap();
        let mut s = Session::prepare(&xi, BellState::PsiMinus).unwrap();
        s.alice_measure(&mut seeded_rng(0)).unwrap();
        assert!(s.alice_measure(&mut seeded_rng(0)).is_err());
    }

    #[test]
    fn transcript_serializes_with_stable_keys() {
        let xi = StateVector::basis(QubitId::generic(1), 1).unwrap();
        let t = run_session(&xi, 1, 3).unwrap();
        let v: serde_json::Value = serde_json::to_value(&t).unwrap();
        for key in [
            "n",
            "resource",
            "outcomes",
            "message",
            "corrections",
            "bell_pairs_consumed",
            "single_qubit_ops",
            "branch_probability",
            "final_fidelity",
            "residual_phase",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: ProtocolTranscript = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }
}
