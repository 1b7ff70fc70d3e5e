//! Products of single-qubit X/Z factors on labeled qubits.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{QubitId, SingleQubitGate, StateVector};

/// `Z^z X^x` on one qubit; `ZX` means X applied first, then Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliFactor {
    I,
    X,
    Z,
    ZX,
}

impl PauliFactor {
    pub const ALL: [PauliFactor; 4] = [
        PauliFactor::I,
        PauliFactor::X,
        PauliFactor::Z,
        PauliFactor::ZX,
    ];

    pub fn gate(self) -> SingleQubitGate {
        match self {
            PauliFactor::I => SingleQubitGate::identity(),
            PauliFactor::X => SingleQubitGate::x(),
            PauliFactor::Z => SingleQubitGate::z(),
            PauliFactor::ZX => SingleQubitGate::zx(),
        }
    }

    /// Number of elementary X/Z operations; `ZX` counts as two.
    pub fn op_count(self) -> usize {
        match self {
            PauliFactor::I => 0,
            PauliFactor::X | PauliFactor::Z => 1,
            PauliFactor::ZX => 2,
        }
    }

    /// Gates in application order.
    fn elementary(self) -> &'static [PauliFactor] {
        match self {
            PauliFactor::I => &[],
            PauliFactor::X => &[PauliFactor::X],
            PauliFactor::Z => &[PauliFactor::Z],
            PauliFactor::ZX => &[PauliFactor::X, PauliFactor::Z],
        }
    }

    fn zx_bits(self) -> (bool, bool) {
        match self {
            PauliFactor::I => (false, false),
            PauliFactor::X => (false, true),
            PauliFactor::Z => (true, false),
            PauliFactor::ZX => (true, true),
        }
    }

    fn from_zx_bits(z: bool, x: bool) -> Self {
        match (z, x) {
            (false, false) => PauliFactor::I,
            (false, true) => PauliFactor::X,
            (true, false) => PauliFactor::Z,
            (true, true) => PauliFactor::ZX,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `±` a tensor product of [`PauliFactor`]s, at most one per qubit.
///
/// Factors are kept sorted by qubit with identities dropped, so two strings
/// compare equal iff they are the same signed operator.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PauliString {
    factors: Vec<(QubitId, PauliFactor)>,
    sign: Sign,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(qubit: QubitId, factor: PauliFactor) -> Self {
        let mut s = Self::identity();
        s.put(qubit, factor);
        s
    }

    pub fn from_factors<I>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (QubitId, PauliFactor)>,
    {
        let mut s = Self::identity();
        let mut seen = Vec::new();
        for (q, f) in factors {
            if seen.contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
            seen.push(q);
            s.put(q, f);
        }
        Ok(s)
    }

    fn put(&mut self, qubit: QubitId, factor: PauliFactor) {
        match self.factors.binary_search_by_key(&qubit, |(q, _)| *q) {
            Ok(i) if factor == PauliFactor::I => {
                self.factors.remove(i);
            }
            Ok(i) => self.factors[i].1 = factor,
            Err(_) if factor == PauliFactor::I => {}
            Err(i) => self.factors.insert(i, (qubit, factor)),
        }
    }

    pub fn factors(&self) -> &[(QubitId, PauliFactor)] {
        &self.factors
    }

    pub fn factor(&self, qubit: QubitId) -> PauliFactor {
        self.factors
            .iter()
            .find(|(q, _)| *q == qubit)
            .map_or(PauliFactor::I, |(_, f)| *f)
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn negated(&self) -> Self {
        Self {
            factors: self.factors.clone(),
            sign: self.sign.flip(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn single_qubit_op_count(&self) -> usize {
        self.factors.iter().map(|(_, f)| f.op_count()).sum()
    }

    /// The operator `next · self`: `self` acts first.
    pub fn then(&self, next: &PauliString) -> PauliString {
        let mut out = self.clone();
        if next.sign == Sign::Minus {
            out.sign = out.sign.flip();
        }
        for &(q, later) in &next.factors {
            let (z1, x1) = out.factor(q).zx_bits();
            let (z2, x2) = later.zx_bits();
            // Z^z2 X^x2 Z^z1 X^x1 = (−1)^(x2·z1) Z^(z1⊕z2) X^(x1⊕x2)
            if x2 && z1 {
                out.sign = out.sign.flip();
            }
            out.put(q, PauliFactor::from_zx_bits(z1 ^ z2, x1 ^ x2));
        }
        out
    }

    /// True when both strings act identically up to a global phase.
    pub fn same_up_to_phase(&self, other: &PauliString) -> bool {
        self.factors == other.factors
    }

    /// Applies every factor, including the sign.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let mut out = state.clone();
        self.apply_counting(&mut out)?;
        Ok(out)
    }

    /// Applies the string gate by gate and returns how many elementary
    /// operations were performed.
    pub(crate) fn apply_counting(&self, state: &mut StateVector) -> Result<usize> {
        let mut ops = 0;
        for &(q, f) in &self.factors {
            for g in f.elementary() {
                state.apply_gate_in_place(&g.gate(), q)?;
                ops += 1;
            }
        }
        if self.sign == Sign::Minus {
            state.scale_in_place(Complex64::new(-1.0, 0.0));
        }
        Ok(ops)
    }

    /// All `4^k` unsigned strings over `qubits`.
    pub fn enumerate(qubits: &[QubitId]) -> Vec<PauliString> {
        let mut out = vec![PauliString::identity()];
        for &q in qubits {
            out = out
                .into_iter()
                .flat_map(|s| {
                    PauliFactor::ALL.into_iter().map(move |f| {
                        let mut t = s.clone();
                        t.put(q, f);
                        t
                    })
                })
                .collect();
        }
        out
    }
}

/// Tokens like `- Z@b1 X@b1 X@b2`, applied right to left.
impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut tokens = Vec::new();
        if self.sign == Sign::Minus {
            tokens.push("-".to_string());
        }
        for &(q, factor) in &self.factors {
            for g in factor.elementary().iter().rev() {
                let letter = if *g == PauliFactor::X { "X" } else { "Z" };
                tokens.push(format!("{letter}@{q}"));
            }
        }
        if self.factors.is_empty() {
            tokens.push("I".to_string());
        }
        f.write_str(&tokens.join(" "))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |t: &str| Error::Config(format!("bad Pauli token {t:?}"));
        let mut acc = PauliString::identity();
        for token in s.split_whitespace().rev() {
            match token {
                "-" => acc.sign = acc.sign.flip(),
                "+" | "I" => {}
                _ => {
                    let (letter, qubit) = token.split_once('@').ok_or_else(|| bad(token))?;
                    let factor = match letter {
                        "I" => PauliFactor::I,
                        "X" => PauliFactor::X,
                        "Z" => PauliFactor::Z,
                        _ => return Err(bad(token)),
                    };
                    let q: QubitId = qubit.parse()?;
                    acc = acc.then(&PauliString::single(q, factor));
                }
            }
        }
        Ok(acc)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::seeded_rng;
    use crate::qstate::TOLERANCE;
    use proptest::prelude::*;

    fn b(i: u16) -> QubitId {
        QubitId::b(i)
    }

    #[test]
    fn display_and_parse() {
        let s =
            PauliString::from_factors([(b(2), PauliFactor::X), (b(1), PauliFactor::ZX)]).unwrap();
        assert_eq!(s.to_string(), "Z@b1 X@b1 X@b2");
        assert_eq!(s.to_string().parse::<PauliString>().unwrap(), s);
        assert_eq!(PauliString::identity().to_string(), "I");
        assert_eq!("I".parse::<PauliString>().unwrap(), PauliString::identity());
        assert_eq!(s.single_qubit_op_count(), 3);
    }

    #[test]
    fn xz_is_minus_zx() {
        let xz: PauliString = "X@b1 Z@b1".parse().unwrap();
        let zx = PauliString::single(b(1), PauliFactor::ZX);
        assert_eq!(xz, zx.negated());
        assert!(xz.same_up_to_phase(&zx));
        assert_eq!(xz.to_string(), "- Z@b1 X@b1");
        assert_eq!(xz.to_string().parse::<PauliString>().unwrap(), xz);
    }

    #[test]
    fn squares_cancel() {
        for f in PauliFactor::ALL {
            let p = PauliString::single(b(1), f);
            let sq = p.then(&p);
            assert!(sq.is_identity());
            // (ZX)² = ZXZX = −1
            let want = if f == PauliFactor::ZX {
                Sign::Minus
            } else {
                Sign::Plus
            };
            assert_eq!(sq.sign(), want);
        }
    }

    #[test]
    fn duplicate_factor_rejected() {
        assert_eq!(
            PauliString::from_factors([(b(1), PauliFactor::X), (b(1), PauliFactor::Z)]),
            Err(Error::DuplicateQubit(b(1)))
        );
        assert!("Y@b1".parse::<PauliString>().is_err());
        assert!("X".parse::<PauliString>().is_err());
    }

    #[test]
    fn enumerate_counts() {
        let all = PauliString::enumerate(&[b(1), b(2)]);
        assert_eq!(all.len(), 16);
        let mut dedup = all.clone();
        dedup.sort_by_key(|s| s.to_string());
        dedup.dedup();
        assert_eq!(dedup.len(), 16);
    }

    fn arb_string() -> impl Strategy<Value = PauliString> {
        (prop::collection::vec(0usize..4, 2), any::<bool>()).prop_map(|(fs, neg)| {
            let s = PauliString::from_factors(
                fs.into_iter()
                    .enumerate()
                    .map(|(i, f)| (b(i as u16 + 1), PauliFactor::ALL[f])),
            )
            .unwrap();
            if neg {
                s.negated()
            } else {
                s
            }
        })
    }

    proptest! {
        // the symbolic product agrees with applying the two strings in turn
        #[test]
        fn then_matches_sequential_application(p in arb_string(), q in arb_string(), seed in any::<u64>()) {
            let mut rng = seeded_rng(seed);
            let s = StateVector::random(vec![b(1), b(2)], &mut rng).unwrap();
            let seq = q.apply(&p.apply(&s).unwrap()).unwrap();
            let prod = p.then(&q).apply(&s).unwrap();
            for (x, y) in seq.amps().iter().zip(prod.amps()) {
                prop_assert!((x - y).norm() <= TOLERANCE);
            }
        }

        #[test]
        fn text_round_trip(p in arb_string()) {
            prop_assert_eq!(p.to_string().parse::<PauliString>().unwrap(), p);
        }
    }
}
