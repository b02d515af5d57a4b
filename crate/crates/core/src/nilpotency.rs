//! Nilpotency degree `C(n,d,K)`: one more than the length of the longest
//! nonzero word.

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, SCHEMA_VERSION};
use crate::functionals::{pi_parity_evidence, pi_parity_square_evidence, FunctionalKind, NonzeroEvidence};
use crate::lincomb::LinComb;
use crate::oracle::{decide, Oracle};
use crate::relations::SystemDescriptor;
use crate::scalar::Characteristic;
use crate::word::{Multidegree, Word};

/// Non-increasing multidegrees of total `len` with at most `d` parts, each
/// between 1 and `max_part`.
pub fn sorted_classes(len: usize, d: usize, max_part: u32) -> Vec<Multidegree> {
    fn rec(rest: u32, parts: usize, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Multidegree>) {
        if rest == 0 {
            out.push(Multidegree::new(cur.clone()));
            return;
        }
        if parts == 0 {
            return;
        }
        for part in (1..=cap.min(rest)).rev() {
            cur.push(part);
            rec(rest - part, parts - 1, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len as u32, d, max_part, &mut Vec::new(), &mut out);
    out
}

/// What was established about one class of a given length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ClassOutcome {
    /// Every canonical word is zero; other words rewrite onto these.
    Zero { canonical_words: usize, certificates: Vec<Certificate> },
    /// A canonical word outside the identity span.
    Nonzero { word: Word, evidence: NonzeroEvidence },
    /// Component above the column budget.
    Undecided { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub length: usize,
    pub mdeg: Multidegree,
    #[serde(flatten)]
    pub outcome: ClassOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NildegValue {
    Exact { value: usize },
    /// `lower ≤ C ≤ upper`.
    Interval { lower: usize, upper: usize },
}

impl NildegValue {
    pub fn exact(self) -> Option<usize> {
        match self {
            NildegValue::Exact { value } => Some(value),
            NildegValue::Interval { .. } => None,
        }
    }
}

/// A nonzero word together with why it is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerWitness {
    pub word: Word,
    pub evidence: NonzeroEvidence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NilpotencyReport {
    pub schema_version: u32,
    pub d: usize,
    #[serde(rename = "char")]
    pub chr: Characteristic,
    pub n: u8,
    pub value: NildegValue,
    /// Longest nonzero word found, of length `lower − 1`.
    pub witness: Option<LowerWitness>,
    /// Classes examined after the initial witness, by increasing length.
    pub classes: Vec<ClassRecord>,
}

impl NilpotencyReport {
    /// Re-checks the witness and every certificate; an exact value also
    /// needs the witness length and a fully zero final length.
    pub fn verify(&self, budget: u64) -> Result<(), String> {
        if let Some(w) = &self.witness {
            let target = LinComb::word(w.word.clone(), self.chr);
            w.evidence.verify(&target, budget).map_err(|e| format!("witness {}: {e}", w.word))?;
        }
        for rec in &self.classes {
            match &rec.outcome {
                ClassOutcome::Zero { certificates, .. } => {
                    for c in certificates {
                        if !c.is_zero() || c.system.mdeg != rec.mdeg {
                            return Err(format!("class {}: unexpected certificate", rec.mdeg));
                        }
                        c.verify(budget).map_err(|e| format!("class {}: {e}", rec.mdeg))?;
                    }
                }
                ClassOutcome::Nonzero { word, evidence } => {
                    let target = LinComb::word(word.clone(), self.chr);
                    evidence.verify(&target, budget).map_err(|e| format!("class {}: {e}", rec.mdeg))?;
                }
                ClassOutcome::Undecided { .. } => {}
            }
        }
        if let NildegValue::Exact { value } = self.value {
            let witness_len = self.witness.as_ref().map_or(0, |w| w.word.len());
            if witness_len + 1 != value {
                return Err(format!("witness has length {witness_len}, value is {value}"));
            }
            let max_part = max_part(self.n);
            let expected = sorted_classes(value, self.d, max_part);
            for m in &expected {
                let ok = self.classes.iter().any(|r| {
                    r.length == value && r.mdeg == *m && matches!(r.outcome, ClassOutcome::Zero { .. })
                });
                if !ok {
                    return Err(format!("class {m} at length {value} is not certified zero"));
                }
            }
        }
        Ok(())
    }
}

/// Highest degree of a letter in a nonzero word: 1 for `x² = 0`, 3 for
/// `x³ = 0` (a letter of degree 4 or more rewrites to zero).
fn max_part(n: u8) -> u32 {
    let n = n as u32;
    n * (n - 1) / 2
}

fn word(letters: &[u8]) -> Word {
    Word::from_letters(letters)
}

/// Candidate long nonzero words, longest first.
fn lower_candidates(d: usize, chr: Characteristic, n: u8) -> Vec<Word> {
    let mut out = Vec::new();
    if n == 2 {
        for k in (1..=d as u8).rev() {
            out.push(word(&(0..k).collect::<Vec<_>>()));
        }
        return out;
    }
    out.push(word(&[0, 0]));
    if d >= 2 {
        out.push(word(&[0, 0, 1, 1, 0]));
    }
    if d >= 3 {
        let mut a = vec![0, 0];
        a.extend(1..d as u8);
        a.push(0);
        out.push(word(&a));
        let mut b = vec![0, 0, 1, 1];
        b.extend(2..d as u8);
        out.push(word(&b));
    }
    if chr.value() == 3 && d >= 2 {
        let k = d / 2;
        let mut w = crate::functionals::w_product(k);
        if d % 2 == 1 {
            w.push(2 * k as u8);
            w.push(2 * k as u8);
        }
        out.push(w);
    }
    out.sort_by_key(|w| std::cmp::Reverse(w.len()));
    out
}

/// Tries to prove `w ≠ 0` without exceeding the budget.
fn certify_nonzero(oracle: &mut Oracle, w: &Word, chr: Characteristic, n: u8) -> Option<NonzeroEvidence> {
    let target = LinComb::word(w.clone(), chr);
    let d = w.alphabet_size();
    let mdeg = w.mdeg(d);
    if n == 3 {
        let counts = mdeg.counts();
        if chr.value() == 3 && d >= 4 && counts.iter().take(2 * (d / 2)).all(|&c| c == 3) {
            let k = d / 2;
            let built = if d % 2 == 1 { pi_parity_square_evidence(k) } else { pi_parity_evidence(k) };
            if let Ok((t, ev)) = built {
                if t == target && ev.verify(&target, oracle.budget).is_ok() {
                    return Some(ev);
                }
            }
        }
        for kind in FunctionalKind::ALL {
            if kind.check_applicable(&mdeg, chr).is_err() {
                continue;
            }
            let value = kind.pair(&target);
            if value.is_zero() {
                continue;
            }
            let ev = NonzeroEvidence::Functional { functional: kind, mdeg: mdeg.clone(), value };
            if ev.verify(&target, oracle.budget).is_ok() {
                return Some(ev);
            }
        }
    }
    let dec = oracle.zero_test(&target, d, n).ok()?;
    if dec.is_zero() {
        return None;
    }
    Some(NonzeroEvidence::Solved { certificate: dec.certificate })
}

/// Examines one class: nonzero if the component has positive dimension,
/// otherwise zero certificates for every canonical word.
pub fn examine_class(oracle: &mut Oracle, mdeg: &Multidegree, chr: Characteristic, n: u8) -> ClassOutcome {
    examine_component(oracle, &SystemDescriptor::new(mdeg.clone(), chr, n, false))
}

/// Same as [`examine_class`] for any system, e.g. one with cyclic rows.
pub fn examine_component(oracle: &mut Oracle, desc: &SystemDescriptor) -> ClassOutcome {
    let chr = desc.chr;
    let solved = match oracle.solve(desc) {
        Ok(s) => s,
        Err(e) => return ClassOutcome::Undecided { reason: e.to_string() },
    };
    if let Some((free, _)) = solved.kernel.first() {
        let w = solved.comp.canonical[*free].clone();
        let certificate = decide(&solved, &LinComb::word(w.clone(), chr));
        debug_assert!(!certificate.is_zero());
        return ClassOutcome::Nonzero { word: w, evidence: NonzeroEvidence::Solved { certificate } };
    }
    let mut certificates = Vec::with_capacity(solved.comp.canonical.len());
    for w in &solved.comp.canonical {
        let c = decide(&solved, &LinComb::word(w.clone(), chr));
        if let Err(e) = c.verify(oracle.budget) {
            return ClassOutcome::Undecided { reason: format!("certificate for {w} failed: {e}") };
        }
        certificates.push(c);
    }
    ClassOutcome::Zero { canonical_words: solved.comp.canonical.len(), certificates }
}

/// Computes `C(n,d,K)` for `K` of characteristic `chr`, degrading to an
/// interval when components exceed the oracle's budget.
pub fn nilpotency_degree(oracle: &mut Oracle, d: usize, chr: Characteristic, n: u8) -> NilpotencyReport {
    assert!(d >= 1, "need at least one letter");
    let max_part = max_part(n);
    let ceiling = max_part as usize * d + 1;

    let mut witness = None;
    for w in lower_candidates(d, chr, n) {
        if let Some(evidence) = certify_nonzero(oracle, &w, chr, n) {
            witness = Some(LowerWitness { word: w, evidence });
            break;
        }
    }
    let mut lower = witness.as_ref().map_or(1, |w| w.word.len() + 1);
    let mut upper = None;
    let mut classes = Vec::new();
    let mut len = lower;
    while len < ceiling && upper.is_none() {
        let mut all_zero = true;
        let mut found: Option<LowerWitness> = None;
        for m in sorted_classes(len, d, max_part) {
            let outcome = examine_class(oracle, &m, chr, n);
            match &outcome {
                ClassOutcome::Zero { .. } => {}
                ClassOutcome::Nonzero { word, evidence } => {
                    all_zero = false;
                    if found.is_none() {
                        found = Some(LowerWitness { word: word.clone(), evidence: evidence.clone() });
                    }
                }
                ClassOutcome::Undecided { .. } => all_zero = false,
            }
            let nonzero = matches!(outcome, ClassOutcome::Nonzero { .. });
            classes.push(ClassRecord { length: len, mdeg: m, outcome });
            if nonzero {
                break;
            }
        }
        if let Some(f) = found {
            lower = len + 1;
            witness = Some(f);
        } else if all_zero {
            upper = Some(len);
        }
        len += 1;
    }
    let upper = upper.unwrap_or(ceiling);
    let value = if lower == upper {
        NildegValue::Exact { value: lower }
    } else {
        NildegValue::Interval { lower, upper }
    };
    NilpotencyReport { schema_version: SCHEMA_VERSION, d, chr, n, value, witness, classes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::DEFAULT_COLUMN_BUDGET;

    #[test]
    fn classes_are_partitions() {
        let c: Vec<String> = sorted_classes(6, 3, 3).iter().map(|m| m.to_string()).collect();
        assert_eq!(c, ["(3,3)", "(3,2,1)", "(2,2,2)"]);
        assert!(sorted_classes(13, 4, 3).is_empty());
        assert_eq!(sorted_classes(2, 2, 1).len(), 1);
    }

    #[test]
    fn one_letter() {
        let mut o = Oracle::default();
        for p in [0, 2, 3, 5] {
            let r = nilpotency_degree(&mut o, 1, Characteristic::of(p), 3);
            assert_eq!(r.value, NildegValue::Exact { value: 3 });
            r.verify(DEFAULT_COLUMN_BUDGET).unwrap();
        }
    }

    #[test]
    fn squares_zero() {
        let mut o = Oracle::default();
        for d in 1..=3 {
            let r = nilpotency_degree(&mut o, d, Characteristic::ZERO, 2);
            assert_eq!(r.value, NildegValue::Exact { value: d.min(2) + 1 }, "d = {d}");
            r.verify(DEFAULT_COLUMN_BUDGET).unwrap();
        }
    }

    #[test]
    fn two_letters() {
        let mut o = Oracle::default();
        for (p, c) in [(0, 6), (2, 6), (3, 7), (5, 6)] {
            let r = nilpotency_degree(&mut o, 2, Characteristic::of(p), 3);
            assert_eq!(r.value, NildegValue::Exact { value: c }, "p = {p}");
            r.verify(DEFAULT_COLUMN_BUDGET).unwrap();
        }
    }

    #[test]
    fn tiny_budget_gives_interval() {
        let mut o = Oracle::new(10);
        let r = nilpotency_degree(&mut o, 2, Characteristic::of(5), 3);
        match r.value {
            NildegValue::Interval { lower, upper } => assert!(lower <= 6 && upper >= 6),
            v => panic!("expected interval, got {v:?}"),
        }
        r.verify(10).unwrap();
    }
}
