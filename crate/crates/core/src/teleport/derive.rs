//! Correction tables recovered by brute force.
//!
//! For every outcome sequence the Bob-side remainder is computed for a set of
//! fiducial inputs, and all `4^n` unsigned Pauli strings are tried against
//! it. Exactly one must restore every fiducial input; anything else is an
//! error. Nothing here consults the per-pair correction rule the engine uses.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bell::{seeded_rng, BellState};
use crate::error::{Error, Result};
use crate::qstate::{QubitId, StateVector, TOLERANCE};
use crate::teleport::table::{all_outcome_keys, outcome_code, CorrectionTable, OutcomeKey};
use crate::teleport::{
    bob_register, check_width, enumerate_branches, input_register, prepare_joint, PauliString,
    MAX_TABLE_WIDTH,
};

/// Random states every derived table is checked against.
pub const VALIDATION_STATES: usize = 100;
const VALIDATION_SEED: u64 = 0x5eed_7e1e;

/// The `2^n` computational basis states plus `|+⟩^⊗n` and `|+i⟩^⊗n`.
pub fn fiducial_inputs(n: usize) -> Result<Vec<StateVector>> {
    let qubits = input_register(n);
    let mut out = (0..1usize << n)
        .map(|i| StateVector::basis(qubits.clone(), i))
        .collect::<Result<Vec<_>>>()?;
    for phase in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
        let one = [Complex64::new(FRAC_1_SQRT_2, 0.0), phase * FRAC_1_SQRT_2];
        let amps = (0..1usize << n)
            .map(|i| (0..n).map(|k| one[(i >> k) & 1]).product())
            .collect();
        out.push(StateVector::new(qubits.clone(), amps)?);
    }
    Ok(out)
}

pub fn derive_corrections(n: usize) -> Result<CorrectionTable> {
    derive_corrections_for(n, BellState::PsiMinus)
}

pub fn derive_corrections_for(n: usize, resource: BellState) -> Result<CorrectionTable> {
    check_width(n, MAX_TABLE_WIDTH)?;
    let bob = bob_register(n);
    let fiducials = fiducial_inputs(n)?;

    // per fiducial: outcome → Bob's remainder
    let remainders = fiducials
        .par_iter()
        .map(|f| {
            let leaves = enumerate_branches(&prepare_joint(f, resource)?, n)?;
            Ok(leaves
                .into_iter()
                .map(|l| (l.outcomes, l.remainder))
                .collect::<BTreeMap<_, _>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let targets = fiducials
        .iter()
        .map(|f| f.relabel(&bob))
        .collect::<Result<Vec<_>>>()?;
    let candidates = PauliString::enumerate(&bob);

    let entries = all_outcome_keys(n)
        .into_par_iter()
        .map(|key| {
            let cases: Vec<(&StateVector, &StateVector)> = remainders
                .iter()
                .zip(&targets)
                .filter_map(|(m, t)| m[&key].as_ref().map(|r| (r, t)))
                .collect();
            let passing = candidates
                .iter()
                .filter(|c| restores_all(c, &cases))
                .collect::<Vec<_>>();
            match passing.as_slice() {
                [one] => Ok((key, (*one).clone())),
                [] => Err(Error::NoCorrection(outcome_code(&key))),
                many => Err(Error::AmbiguousCorrection {
                    branch: outcome_code(&key),
                    count: many.len(),
                }),
            }
        })
        .collect::<Result<BTreeMap<OutcomeKey, PauliString>>>()?;
    let table = CorrectionTable::new(n, resource, entries)?;

    let mut rng = seeded_rng(VALIDATION_SEED);
    let states = (0..VALIDATION_STATES)
        .map(|_| StateVector::random(input_register(n), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let check = validate_table(&table, &states)?;
    if let Some(code) = check.failures.first() {
        return Err(Error::NoCorrection(code.clone()));
    }
    Ok(table)
}

fn restores_all(candidate: &PauliString, cases: &[(&StateVector, &StateVector)]) -> bool {
    !cases.is_empty()
        && cases.iter().all(|(rem, target)| {
            candidate
                .apply(rem)
                .and_then(|s| s.fidelity(target))
                .is_ok_and(|f| f >= 1.0 - TOLERANCE)
        })
}

/// Outcome of replaying a table over every branch of a set of inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct TableValidation {
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    pub min_probability: f64,
    pub max_probability: f64,
    /// Outcome codes whose correction failed to restore some input.
    pub failures: Vec<String>,
}

/// Applies each table entry to its branch remainder for every input in
/// `states` and records the worst fidelity and the probability spread.
pub fn validate_table(table: &CorrectionTable, states: &[StateVector]) -> Result<TableValidation> {
    let n = table.width();
    let bob: Vec<QubitId> = bob_register(n);
    let per_state = states
        .par_iter()
        .map(|xi| {
            let target = xi.relabel(&bob)?;
            let leaves = enumerate_branches(&prepare_joint(xi, table.resource())?, n)?;
            let mut min_f = f64::INFINITY;
            let mut sum_f = 0.0;
            let mut count = 0usize;
            let mut min_p = f64::INFINITY;
            let mut max_p = 0.0f64;
            let mut failures = Vec::new();
            for leaf in leaves {
                min_p = min_p.min(leaf.probability);
                max_p = max_p.max(leaf.probability);
                let Some(rem) = leaf.remainder else { continue };
                let fix = table
                    .get(&leaf.outcomes)
                    .ok_or_else(|| Error::NoCorrection(outcome_code(&leaf.outcomes)))?;
                let f = fix.apply(&rem)?.fidelity(&target)?;
                min_f = min_f.min(f);
                sum_f += f;
                count += 1;
                if f < 1.0 - TOLERANCE {
                    failures.push(outcome_code(&leaf.outcomes));
                }
            }
            Ok((min_f, sum_f, count, min_p, max_p, failures))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = TableValidation {
        min_fidelity: f64::INFINITY,
        mean_fidelity: 0.0,
        min_probability: f64::INFINITY,
        max_probability: 0.0,
        failures: Vec::new(),
    };
    let mut total = 0usize;
    for (f, sum, count, lo, hi, fails) in per_state {
        out.min_fidelity = out.min_fidelity.min(f);
        out.mean_fidelity += sum;
        total += count;
        out.min_probability = out.min_probability.min(lo);
        out.max_probability = out.max_probability.max(hi);
        out.failures.extend(fails);
    }
    if total > 0 {
        out.mean_fidelity /= total as f64;
    }
    out.failures.sort();
    out.failures.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::teleport::PauliFactor;

    #[test]
    fn fiducial_set_size() {
        let f = fiducial_inputs(3).unwrap();
        assert_eq!(f.len(), 10);
        for s in &f {
            assert!((s.norm_sqr() - 1.0).abs() <= TOLERANCE);
        }
    }

    #[test]
    fn single_qubit_table() {
        let t = derive_corrections(1).unwrap();
        let b1 = QubitId::b(1);
        let got: Vec<PauliFactor> = BellState::ALL
            .iter()
            .map(|k| t.get(&[*k]).unwrap().factor(b1))
            .collect();
        assert_eq!(
            got,
            [
                PauliFactor::I,
                PauliFactor::Z,
                PauliFactor::X,
                PauliFactor::ZX
            ]
        );
    }

    #[test]
    fn width_bounds() {
        assert!(matches!(
            derive_corrections(0),
            Err(Error::WidthOutOfRange { .. })
        ));
        assert!(matches!(
            derive_corrections(5),
            Err(Error::WidthOutOfRange { .. })
        ));
    }

    #[test]
    fn validation_catches_a_wrong_table() {
        let good = derive_corrections(1).unwrap();
        let mut entries: BTreeMap<_, _> =
            good.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        entries.insert(vec![BellState::PhiMinus], PauliString::identity());
        let bad = CorrectionTable::new(1, BellState::PsiMinus, entries).unwrap();
        let mut rng = seeded_rng(2);
        let states: Vec<_> = (0..5)
            .map(|_| StateVector::random(input_register(1), &mut rng).unwrap())
            .collect();
        let v = validate_table(&bad, &states).unwrap();
        assert_eq!(v.failures, vec!["10".to_string()]);
        assert!(validate_table(&good, &states).unwrap().failures.is_empty());
    }
}
