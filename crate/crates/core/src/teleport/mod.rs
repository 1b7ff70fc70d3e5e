//! Teleportation of arbitrary `N`-qubit states through `N` shared Bell pairs.
//!
//! The joint register is laid out as `x1..xN, aN, bN, .., a1, b1`: the input
//! followed by the Bell pairs, highest index first. Alice measures the pairs
//! `(x_i, a_i)` in descending `i` and Bob fixes `b_i` with a Pauli factor that
//! depends only on the outcome of pair `i`.

pub mod certify;
pub mod derive;
pub mod pauli;
pub mod table;

use std::sync::OnceLock;

use rand::Rng;

use crate::bell::{bell_pair, measure_bell_branches, BellState};
use crate::error::{Error, Result};
use crate::harness::{ProtocolTranscript, Session};
use crate::qstate::{QubitId, StateVector};

pub use certify::{certify_table, CertificationReport, RowVerdict, Verdict};
pub use derive::{
    derive_corrections, derive_corrections_for, fiducial_inputs, validate_table, TableValidation,
};
pub use pauli::{PauliFactor, PauliString, Sign};
pub use table::{all_outcome_keys, outcome_code, CorrectionTable, OutcomeKey};

/// Largest protocol width a sampled run accepts (`3N ≤ 15` qubits).
pub const MAX_WIDTH: usize = 5;

/// Largest width for exhaustive enumeration and table derivation.
pub const MAX_TABLE_WIDTH: usize = 4;

/// Single-qubit corrections for a `Ψ−` resource, indexed by outcome code
/// (`Ψ−, Ψ+, Φ−, Φ+`).
pub const SINGLET_CORRECTIONS: [PauliFactor; 4] = [
    PauliFactor::I,
    PauliFactor::Z,
    PauliFactor::X,
    PauliFactor::ZX,
];

pub(crate) fn check_width(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::WidthOutOfRange { n, min: 1, max });
    }
    Ok(())
}

/// Pair indices in the order Alice measures them: `[n, n-1, .., 1]`.
pub fn measurement_order(n: usize) -> Vec<usize> {
    (1..=n).rev().collect()
}

pub fn input_register(n: usize) -> Vec<QubitId> {
    (1..=n as u16).map(QubitId::x).collect()
}

pub fn bob_register(n: usize) -> Vec<QubitId> {
    (1..=n as u16).map(QubitId::b).collect()
}

/// Alice's `(x_i, a_i)` pairs in measurement order.
pub fn alice_pairs(n: usize) -> Vec<(QubitId, QubitId)> {
    measurement_order(n)
        .into_iter()
        .map(|i| (QubitId::x(i as u16), QubitId::a(i as u16)))
        .collect()
}

/// `ξ ⊗ R_{aN bN} ⊗ .. ⊗ R_{a1 b1}` with `ξ` relabeled onto `x1..xN`.
pub fn prepare_joint(xi: &StateVector, resource: BellState) -> Result<StateVector> {
    let n = xi.num_qubits();
    let mut joint = xi.relabel(&input_register(n))?;
    for i in measurement_order(n) {
        let pair = bell_pair(resource, QubitId::a(i as u16), QubitId::b(i as u16))?;
        joint = joint.tensor(&pair)?;
    }
    Ok(joint)
}

/// One leaf of the full Bell-measurement tree.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub outcomes: OutcomeKey,
    pub probability: f64,
    /// Bob's register in `b1..bN` order; `None` on impossible branches.
    pub remainder: Option<StateVector>,
}

/// Expands a prepared joint state over every outcome sequence of Alice's
/// measurements, with exact branch probabilities.
pub fn enumerate_branches(joint: &StateVector, n: usize) -> Result<Vec<Leaf>> {
    let pairs = alice_pairs(n);
    let mut frontier = vec![Leaf {
        outcomes: Vec::new(),
        probability: 1.0,
        remainder: Some(joint.clone()),
    }];
    for &pair in &pairs {
        let mut next = Vec::with_capacity(frontier.len() * 4);
        for leaf in frontier {
            match &leaf.remainder {
                Some(state) => {
                    for branch in measure_bell_branches(state, pair)? {
                        let mut outcomes = leaf.outcomes.clone();
                        outcomes.push(branch.outcome.state);
                        next.push(Leaf {
                            outcomes,
                            probability: leaf.probability * branch.probability,
                            remainder: branch.remainder,
                        });
                    }
                }
                None => {
                    for kind in BellState::ALL {
                        let mut outcomes = leaf.outcomes.clone();
                        outcomes.push(kind);
                        next.push(Leaf {
                            outcomes,
                            probability: 0.0,
                            remainder: None,
                        });
                    }
                }
            }
        }
        frontier = next;
    }
    let bob = bob_register(n);
    for leaf in &mut frontier {
        if let Some(r) = leaf.remainder.take() {
            leaf.remainder = Some(r.reorder(&bob)?);
        }
    }
    Ok(frontier)
}

/// Per-outcome single-qubit corrections for a resource kind. `Ψ−` uses the
/// fixed table; other kinds are derived once and cached.
pub fn base_corrections(resource: BellState) -> Result<[PauliFactor; 4]> {
    if resource == BellState::PsiMinus {
        return Ok(SINGLET_CORRECTIONS);
    }
    static CACHE: [OnceLock<[PauliFactor; 4]>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let slot = &CACHE[resource.code() as usize];
    if let Some(c) = slot.get() {
        return Ok(*c);
    }
    let table = derive_corrections_for(1, resource)?;
    let b1 = QubitId::b(1);
    let mut out = [PauliFactor::I; 4];
    for kind in BellState::ALL {
        out[kind.code() as usize] = table.get(&[kind]).expect("total table").factor(b1);
    }
    Ok(*slot.get_or_init(|| out))
}

/// Bob's correction for an outcome sequence, built by peeling the
/// highest-index pair: `U_N = V(o_N)@b_N ⊗ U_{N-1}`.
pub fn recursive_correction(outcomes: &[BellState], base: &[PauliFactor; 4]) -> PauliString {
    match outcomes.split_first() {
        None => PauliString::identity(),
        Some((first, rest)) => {
            let inner = recursive_correction(rest, base);
            let top = QubitId::b(outcomes.len() as u16);
            inner.then(&PauliString::single(top, base[first.code() as usize]))
        }
    }
}

/// The correction table the engine uses, built from [`recursive_correction`].
pub fn engine_table(n: usize, resource: BellState) -> Result<CorrectionTable> {
    check_width(n, MAX_TABLE_WIDTH)?;
    let base = base_corrections(resource)?;
    let entries = all_outcome_keys(n)
        .into_iter()
        .map(|k| {
            let p = recursive_correction(&k, &base);
            (k, p)
        })
        .collect();
    CorrectionTable::new(n, resource, entries)
}

/// Teleports a one-qubit state through a single shared pair of kind `resource`.
pub fn teleport_one<R: Rng + ?Sized>(
    u: &StateVector,
    resource: BellState,
    rng: &mut R,
) -> Result<ProtocolTranscript> {
    if u.num_qubits() != 1 {
        return Err(Error::WidthMismatch {
            expected: 1,
            got: u.num_qubits(),
        });
    }
    Session::run(u, resource, rng)
}

/// Teleports a two-qubit state through two `Ψ−` pairs.
pub fn teleport_two<R: Rng + ?Sized>(phi: &StateVector, rng: &mut R) -> Result<ProtocolTranscript> {
    if phi.num_qubits() != 2 {
        return Err(Error::WidthMismatch {
            expected: 2,
            got: phi.num_qubits(),
        });
    }
    Session::run(phi, BellState::PsiMinus, rng)
}

/// Teleports an `N`-qubit state (`1 ≤ N ≤ 5`) through `N` `Ψ−` pairs.
pub fn teleport_n<R: Rng + ?Sized>(xi: &StateVector, rng: &mut R) -> Result<ProtocolTranscript> {
    teleport_n_with(xi, BellState::PsiMinus, rng)
}

pub fn teleport_n_with<R: Rng + ?Sized>(
    xi: &StateVector,
    resource: BellState,
    rng: &mut R,
) -> Result<ProtocolTranscript> {
    check_width(xi.num_qubits(), MAX_WIDTH)?;
    Session::run(xi, resource, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::seeded_rng;
    use crate::qstate::TOLERANCE;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn layout() {
        assert_eq!(measurement_order(3), vec![3, 2, 1]);
        let joint = prepare_joint(
            &StateVector::basis(QubitId::generic(2), 0).unwrap(),
            BellState::PsiMinus,
        )
        .unwrap();
        let labels: Vec<String> = joint.qubits().iter().map(|q| q.to_string()).collect();
        assert_eq!(labels, ["x1", "x2", "a2", "b2", "a1", "b1"]);
    }

    #[test]
    fn recursive_rule_small_cases() {
        let base = SINGLET_CORRECTIONS;
        assert!(recursive_correction(&[BellState::PsiMinus; 4], &base).is_identity());
        let p = recursive_correction(&[BellState::PsiPlus, BellState::PhiMinus], &base);
        assert_eq!(p.to_string(), "X@b1 Z@b2");
        let p = recursive_correction(&[BellState::PhiPlus], &base);
        assert_eq!(p.to_string(), "Z@b1 X@b1");
    }

    #[test]
    fn single_qubit_branches_match_hand_expansion() {
        // |u⟩_x ⊗ Ψ−_ab projected on (x,a): Ψ− → −(α,β), Ψ+ → (−α,β),
        // Φ− → (β,α), Φ+ → (−β,α); each with probability 1/4
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let u = StateVector::new(vec![QubitId::x(1)], vec![alpha, beta]).unwrap();
        let joint = prepare_joint(&u, BellState::PsiMinus).unwrap();
        let leaves = enumerate_branches(&joint, 1).unwrap();
        let want = [
            [-alpha, -beta],
            [-alpha, beta],
            [beta, alpha],
            [-beta, alpha],
        ];
        for (leaf, w) in leaves.iter().zip(want) {
            assert!((leaf.probability - 0.25).abs() <= TOLERANCE);
            let r = leaf.remainder.as_ref().unwrap();
            assert!(
                (r.amps()[0] - w[0]).norm() <= TOLERANCE,
                "{:?}",
                leaf.outcomes
            );
            assert!(
                (r.amps()[1] - w[1]).norm() <= TOLERANCE,
                "{:?}",
                leaf.outcomes
            );
        }
    }

    #[test]
    fn teleport_one_final_states() {
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let u = StateVector::new(vec![QubitId::q(1)], vec![alpha, beta]).unwrap();
        let mut rng = seeded_rng(11);
        let mut seen = [false; 4];
        for _ in 0..64 {
            let t = teleport_one(&u, BellState::PsiMinus, &mut rng).unwrap();
            let o = t.outcomes[0].state;
            seen[o.code() as usize] = true;
            assert!((t.final_fidelity - 1.0).abs() <= TOLERANCE);
            assert_eq!(
                t.corrections.factor(QubitId::b(1)),
                SINGLET_CORRECTIONS[o.code() as usize]
            );
            // Ψ− and Φ+ leave −|u⟩, the other two |u⟩
            let want = match o {
                BellState::PsiMinus | BellState::PhiPlus => -1.0,
                _ => 1.0,
            };
            assert!((t.residual_phase - c(want, 0.0)).norm() <= 1e-9, "{o}");
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn teleport_rejects_bad_widths() {
        let mut rng = seeded_rng(0);
        let two = StateVector::basis(QubitId::generic(2), 0).unwrap();
        assert!(matches!(
            teleport_one(&two, BellState::PsiMinus, &mut rng),
            Err(Error::WidthMismatch { .. })
        ));
        let one = StateVector::basis(QubitId::generic(1), 0).unwrap();
        assert!(matches!(
            teleport_two(&one, &mut rng),
            Err(Error::WidthMismatch { .. })
        ));
        let six = StateVector::basis(QubitId::generic(6), 0).unwrap();
        assert!(matches!(
            teleport_n(&six, &mut rng),
            Err(Error::WidthOutOfRange { .. })
        ));
    }

    #[test]
    fn other_resource_kinds_still_teleport() {
        let mut rng = seeded_rng(21);
        for kind in BellState::ALL {
            for n in 1..=3 {
                let xi = StateVector::random(QubitId::generic(n), &mut rng).unwrap();
                for _ in 0..8 {
                    let t = teleport_n_with(&xi, kind, &mut rng).unwrap();
                    assert!((t.final_fidelity - 1.0).abs() <= TOLERANCE, "{kind} n={n}");
                }
            }
        }
    }
}
