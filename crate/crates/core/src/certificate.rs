//! Zero certificates, nonzero witnesses, and their solver-independent check.
//!
//! A zero certificate lists identity rows with coefficients whose weighted
//! sum is exactly the target. A nonzero witness is a functional on words
//! that vanishes on every row of the system and not on the target. The
//! verifier rebuilds rows from their provenance (or regenerates the whole
//! system for witnesses) and never looks at solver state.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lincomb::{LinComb, TermJson};
use crate::relations::{for_each_instance, IdentityInstance, SystemDescriptor};
use crate::scalar::{Characteristic, Scalar};
use crate::word::{enumerate_words, Word, WordIndexer};

/// Version tag written into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// `target = Σ coefficient · row`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ZeroCertificate {
    pub rows: Vec<(IdentityInstance, Scalar)>,
}

/// A solution of the system with nonzero value on the target. Words not
/// listed have value 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonzeroWitness {
    pub functional: BTreeMap<Word, Scalar>,
    pub value: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    Zero(ZeroCertificate),
    Nonzero(NonzeroWitness),
}

/// A self-contained, replayable decision about one target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub system: SystemDescriptor,
    pub target: LinComb,
    pub evidence: Evidence,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("target is not in component {0}")]
    TargetOutsideComponent(String),
    #[error("characteristic of the target ({0}) differs from the system ({1})")]
    CharacteristicMismatch(Characteristic, Characteristic),
    #[error("row {0} is not a row of the system: {1}")]
    BadRow(String, String),
    #[error("row {0} is listed twice")]
    DuplicateRow(String),
    #[error("row {0} has zero coefficient or expands to zero")]
    ZeroRow(String),
    #[error("row combination differs from the target")]
    CombinationMismatch,
    #[error("functional lists word {0} outside the component")]
    WordOutsideComponent(String),
    #[error("functional lists word {0}, which occurs in no row and not in the target")]
    UnusedWord(String),
    #[error("functional lists a zero value")]
    ZeroValue,
    #[error("functional does not vanish on row {0}")]
    RowNotAnnihilated(String),
    #[error("functional pairs to {found} with the target, certificate claims {claimed}")]
    ValueMismatch { found: String, claimed: String },
    #[error("claimed value is zero")]
    ZeroClaim,
    #[error("component has {0} words, above the budget {1}")]
    Budget(u128, u64),
}

impl Certificate {
    pub fn is_zero(&self) -> bool {
        matches!(self.evidence, Evidence::Zero(_))
    }

    /// Replays the certificate against a freshly generated system.
    pub fn verify(&self, budget: u64) -> Result<(), VerifyError> {
        let desc = &self.system;
        let chr = desc.chr;
        if self.target.characteristic() != chr {
            return Err(VerifyError::CharacteristicMismatch(self.target.characteristic(), chr));
        }
        let d = desc.mdeg.d();
        if self.target.alphabet_size() > d {
            return Err(VerifyError::TargetOutsideComponent(desc.to_string()));
        }
        for w in self.target.words() {
            if w.mdeg(d) != desc.mdeg {
                return Err(VerifyError::TargetOutsideComponent(desc.to_string()));
            }
        }
        match &self.evidence {
            Evidence::Zero(z) => verify_zero(desc, &self.target, z),
            Evidence::Nonzero(nz) => verify_nonzero(desc, &self.target, nz, budget),
        }
    }
}

fn verify_zero(desc: &SystemDescriptor, target: &LinComb, z: &ZeroCertificate) -> Result<(), VerifyError> {
    let chr = desc.chr;
    let mut seen: BTreeSet<&IdentityInstance> = BTreeSet::new();
    let mut sum = LinComb::zero(chr);
    for (inst, c) in &z.rows {
        if c.characteristic() != chr {
            return Err(VerifyError::CharacteristicMismatch(c.characteristic(), chr));
        }
        inst.validate(desc).map_err(|e| VerifyError::BadRow(inst.to_string(), e.to_string()))?;
        if !seen.insert(inst) {
            return Err(VerifyError::DuplicateRow(inst.to_string()));
        }
        let row = inst.expand(desc.n, chr).map_err(|e| VerifyError::BadRow(inst.to_string(), e.to_string()))?;
        if c.is_zero() || row.is_zero() {
            return Err(VerifyError::ZeroRow(inst.to_string()));
        }
        sum.add_scaled(&row, c);
    }
    if sum != *target {
        return Err(VerifyError::CombinationMismatch);
    }
    Ok(())
}

fn verify_nonzero(
    desc: &SystemDescriptor,
    target: &LinComb,
    nz: &NonzeroWitness,
    budget: u64,
) -> Result<(), VerifyError> {
    let chr = desc.chr;
    if nz.value.characteristic() != chr {
        return Err(VerifyError::CharacteristicMismatch(nz.value.characteristic(), chr));
    }
    if nz.value.is_zero() {
        return Err(VerifyError::ZeroClaim);
    }
    let d = desc.mdeg.d();
    let indexer = WordIndexer::new(&desc.mdeg)
        .ok_or_else(|| VerifyError::Budget(u128::MAX, budget))?;
    if indexer.len() as u64 > budget {
        return Err(VerifyError::Budget(indexer.len() as u128, budget));
    }
    let mut values: Vec<Option<Scalar>> = vec![None; indexer.len()];
    for (w, v) in &nz.functional {
        if v.characteristic() != chr {
            return Err(VerifyError::CharacteristicMismatch(v.characteristic(), chr));
        }
        if v.is_zero() {
            return Err(VerifyError::ZeroValue);
        }
        if w.alphabet_size() > d || w.mdeg(d) != desc.mdeg {
            return Err(VerifyError::WordOutsideComponent(w.to_string()));
        }
        values[indexer.rank(w.letters()).expect("word of the component")] = Some(v.clone());
    }
    let mut used = vec![false; indexer.len()];
    let pairing = |e: &LinComb, values: &[Option<Scalar>]| {
        let mut s = chr.zero();
        for (w, c) in e.iter() {
            if let Some(v) = &values[indexer.rank(w.letters()).expect("word of the component")] {
                s = &s + &(c * v);
            }
        }
        s
    };
    let value = pairing(target, &values);
    if value != nz.value {
        return Err(VerifyError::ValueMismatch { found: value.to_text(), claimed: nz.value.to_text() });
    }
    for w in target.words() {
        used[indexer.rank(w.letters()).unwrap()] = true;
    }
    let words = enumerate_words(&desc.mdeg, budget).map_err(|e| VerifyError::Budget(e.count, budget))?;
    let mut failure: Option<String> = None;
    for_each_instance(desc, &words, |view| {
        if failure.is_some() {
            return;
        }
        let mut acc: Vec<(usize, i64)> = Vec::with_capacity(6);
        view.for_each_term(desc.n, |w, c| {
            let r = indexer.rank(w.letters()).expect("instance term inside the component");
            match acc.iter_mut().find(|e| e.0 == r) {
                Some(e) => e.1 += c,
                None => acc.push((r, c)),
            }
        });
        let mut s = chr.zero();
        for &(r, c) in &acc {
            let c = chr.from_i64(c);
            if c.is_zero() {
                continue;
            }
            used[r] = true;
            if let Some(v) = &values[r] {
                s = &s + &(&c * v);
            }
        }
        if !s.is_zero() {
            failure = Some(view.to_instance().to_string());
        }
    });
    if let Some(f) = failure {
        return Err(VerifyError::RowNotAnnihilated(f));
    }
    for (w, _) in &nz.functional {
        if !used[indexer.rank(w.letters()).unwrap()] {
            return Err(VerifyError::UnusedWord(w.to_string()));
        }
    }
    Ok(())
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Certificate::from_json_value(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RowJson {
    provenance: IdentityInstance,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct ValueJson {
    word: Word,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    schema_version: u32,
    system: SystemDescriptor,
    target: Vec<TermJson>,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rows: Option<Vec<RowJson>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    functional: Option<Vec<ValueJson>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CertificateFormatError {
    #[error("malformed certificate JSON: {0}")]
    Json(String),
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("bad scalar or word: {0}")]
    Value(String),
    #[error("unknown certificate kind {0:?}")]
    Kind(String),
}

impl Certificate {
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut j = CertificateJson {
            schema_version: SCHEMA_VERSION,
            system: self.system.clone(),
            target: self.target.to_json(),
            kind: String::new(),
            rows: None,
            functional: None,
            value: None,
        };
        match &self.evidence {
            Evidence::Zero(z) => {
                j.kind = "zero".into();
                j.rows = Some(
                    z.rows.iter().map(|(i, c)| RowJson { provenance: i.clone(), coeff: c.to_text() }).collect(),
                );
            }
            Evidence::Nonzero(nz) => {
                j.kind = "nonzero".into();
                j.functional = Some(
                    nz.functional.iter().map(|(w, v)| ValueJson { word: w.clone(), value: v.to_text() }).collect(),
                );
                j.value = Some(nz.value.to_text());
            }
        }
        serde_json::to_value(j).expect("certificate serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("certificate serializes")
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Certificate, CertificateFormatError> {
        let j: CertificateJson = serde_json::from_value(v).map_err(|e| CertificateFormatError::Json(e.to_string()))?;
        if j.schema_version != SCHEMA_VERSION {
            return Err(CertificateFormatError::Schema(j.schema_version));
        }
        let chr = j.system.chr;
        let target = LinComb::from_json(&j.target, chr).map_err(CertificateFormatError::Value)?;
        let scalar = |s: &str| chr.parse_scalar(s).map_err(|e| CertificateFormatError::Value(e.to_string()));
        let evidence = match j.kind.as_str() {
            "zero" => {
                let rows = j.rows.ok_or_else(|| CertificateFormatError::Json("missing rows".into()))?;
                let mut out = Vec::with_capacity(rows.len());
                for r in rows {
                    out.push((r.provenance, scalar(&r.coeff)?));
                }
                Evidence::Zero(ZeroCertificate { rows: out })
            }
            "nonzero" => {
                let f = j.functional.ok_or_else(|| CertificateFormatError::Json("missing functional".into()))?;
                let mut functional = BTreeMap::new();
                for e in f {
                    if functional.insert(e.word.clone(), scalar(&e.value)?).is_some() {
                        return Err(CertificateFormatError::Value(format!("word {} listed twice", e.word)));
                    }
                }
                let value = scalar(j.value.as_deref().ok_or_else(|| CertificateFormatError::Json("missing value".into()))?)?;
                Evidence::Nonzero(NonzeroWitness { functional, value })
            }
            other => return Err(CertificateFormatError::Kind(other.into())),
        };
        Ok(Certificate { system: j.system, target, evidence })
    }

    pub fn from_json_str(s: &str) -> Result<Certificate, CertificateFormatError> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| CertificateFormatError::Json(e.to_string()))?;
        Certificate::from_json_value(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{Multidegree, DEFAULT_COLUMN_BUDGET};

    fn desc(m: &str, p: u64) -> SystemDescriptor {
        SystemDescriptor::nil3(Multidegree::parse(m).unwrap(), Characteristic::of(p))
    }

    #[test]
    fn cube_row_certifies_the_cube() {
        let chr = Characteristic::ZERO;
        let c = Certificate {
            system: desc("3", 0),
            target: LinComb::parse("x1^3", chr).unwrap(),
            evidence: Evidence::Zero(ZeroCertificate { rows: vec![(IdentityInstance::t1("", "x1", ""), chr.one())] }),
        };
        c.verify(DEFAULT_COLUMN_BUDGET).unwrap();
        let back = Certificate::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(back, c);
        let mut bad = c.clone();
        bad.evidence = Evidence::Zero(ZeroCertificate { rows: vec![(IdentityInstance::t1("", "x1", ""), chr.from_i64(2))] });
        assert!(bad.verify(DEFAULT_COLUMN_BUDGET).is_err());
    }

    #[test]
    fn empty_certificate_for_zero_target() {
        let c = Certificate {
            system: desc("2,1", 5),
            target: LinComb::zero(Characteristic::of(5)),
            evidence: Evidence::Zero(ZeroCertificate::default()),
        };
        c.verify(DEFAULT_COLUMN_BUDGET).unwrap();
    }

    #[test]
    fn statement_vector_is_a_witness() {
        for p in [0, 2, 3, 5] {
            let chr = Characteristic::of(p);
            let mut functional = BTreeMap::new();
            for (w, v) in [
                ("x1^2 x2^2 x1", 1),
                ("x1 x2^2 x1^2", -1),
                ("x1^2 x2 x1 x2", -1),
                ("x2 x1 x2 x1^2", 1),
                ("x1 x2 x1^2 x2", 1),
                ("x2 x1^2 x2 x1", -1),
            ] {
                functional.insert(Word::parse(w).unwrap(), chr.from_i64(v));
            }
            let c = Certificate {
                system: desc("3,2", p),
                target: LinComb::parse("x1^2 x2^2 x1", chr).unwrap(),
                evidence: Evidence::Nonzero(NonzeroWitness { functional: functional.clone(), value: chr.one() }),
            };
            c.verify(DEFAULT_COLUMN_BUDGET).unwrap();
            let mut bad = functional.clone();
            bad.insert(Word::parse("x1^2 x2 x1 x2").unwrap(), chr.from_i64(7));
            if !chr.from_i64(7).eq(&chr.from_i64(-1)) {
                let c2 = Certificate { evidence: Evidence::Nonzero(NonzeroWitness { functional: bad, value: chr.one() }), ..c.clone() };
                assert!(c2.verify(DEFAULT_COLUMN_BUDGET).is_err());
            }
        }
    }
}
