//! Identity instances `g1·T_k(f…)·g2` and the homogeneous systems they span.
//!
//! For the cube identity the multilinear forms are
//! `T1(a) = a³`, `T2(a,b) = a²b + aba + ba²` and `T3(a,b,c)` = sum of the six
//! orderings of `abc`. For squares (`n = 2`) they are `T1(a) = a²` and
//! `T2(a,b) = ab + ba`. Cyclic rows `u − rot(u)` are added in trace mode.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::lincomb::LinComb;
use crate::scalar::{Characteristic, Scalar};
use crate::word::{cmp_slices, enumerate_words, BudgetExceeded, Multidegree, Word, WordIndexer};

/// Which quotient a system describes: characteristic, nil exponent,
/// component and whether cyclic rows are present.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemDescriptor {
    #[serde(rename = "char")]
    pub chr: Characteristic,
    pub n: u8,
    pub mdeg: Multidegree,
    pub cyclic: bool,
}

impl SystemDescriptor {
    pub fn new(mdeg: Multidegree, chr: Characteristic, n: u8, cyclic: bool) -> SystemDescriptor {
        assert!(n == 2 || n == 3, "only x^2 = 0 and x^3 = 0 systems are supported");
        SystemDescriptor { chr, n, mdeg, cyclic }
    }

    pub fn nil3(mdeg: Multidegree, chr: Characteristic) -> SystemDescriptor {
        SystemDescriptor::new(mdeg, chr, 3, false)
    }
}

impl fmt::Display for SystemDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}[n={}, p={}{}]", self.mdeg, self.n, self.chr, if self.cyclic { ", cyclic" } else { "" })
    }
}

/// The kind of a nil identity instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NilKind {
    T1,
    T2,
    T3,
}

impl NilKind {
    pub fn arity(self) -> usize {
        match self {
            NilKind::T1 => 1,
            NilKind::T2 => 2,
            NilKind::T3 => 3,
        }
    }

    fn name(self) -> &'static str {
        match self {
            NilKind::T1 => "T1",
            NilKind::T2 => "T2",
            NilKind::T3 => "T3",
        }
    }
}

/// One row generator: a bordered identity or a cyclic pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityInstance {
    Nil { kind: NilKind, left: Word, args: Vec<Word>, right: Word },
    Cyclic { word: Word, offset: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("argument {0} of {1} is empty")]
    EmptyArgument(usize, String),
    #[error("{0} expects {1} arguments, got {2}")]
    Arity(String, usize, usize),
    #[error("instance {0} has multidegree {1}, expected {2}")]
    WrongMultidegree(String, Multidegree, Multidegree),
    #[error("instance {0} is not available in {1}")]
    NotInSystem(String, String),
    #[error("unknown instance kind {0:?}")]
    UnknownKind(String),
    #[error("bad word in instance: {0}")]
    BadWord(String),
}

impl IdentityInstance {
    pub fn nil(kind: NilKind, left: Word, args: Vec<Word>, right: Word) -> IdentityInstance {
        IdentityInstance::Nil { kind, left, args, right }
    }

    pub fn t1(left: &str, a: &str, right: &str) -> IdentityInstance {
        Self::nil(NilKind::T1, w(left), vec![w(a)], w(right))
    }

    pub fn t2(left: &str, a: &str, b: &str, right: &str) -> IdentityInstance {
        Self::nil(NilKind::T2, w(left), vec![w(a), w(b)], w(right))
    }

    pub fn t3(left: &str, a: &str, b: &str, c: &str, right: &str) -> IdentityInstance {
        Self::nil(NilKind::T3, w(left), vec![w(a), w(b), w(c)], w(right))
    }

    /// Letter counts of any word in the expansion.
    pub fn mdeg(&self, d: usize, n: u8) -> Multidegree {
        match self {
            IdentityInstance::Cyclic { word, .. } => word.mdeg(d),
            IdentityInstance::Nil { kind, left, args, right } => {
                let mut m = left.mdeg(d).add(&right.mdeg(d));
                let reps: &[usize] = match (n, kind) {
                    (3, NilKind::T1) => &[3],
                    (3, NilKind::T2) => &[2, 1],
                    (2, NilKind::T1) => &[2],
                    _ => &[1, 1, 1],
                };
                for (a, &r) in args.iter().zip(reps) {
                    for _ in 0..r {
                        m = m.add(&a.mdeg(d));
                    }
                }
                m
            }
        }
    }

    /// Literal expansion over the integers, equal words merged.
    pub fn expand_integer(&self, n: u8) -> Result<Vec<(Word, i64)>, InstanceError> {
        let mut out: Vec<(Word, i64)> = Vec::with_capacity(6);
        match self {
            IdentityInstance::Cyclic { word, offset } => {
                push_merge(&mut out, word.clone(), 1);
                push_merge(&mut out, word.rotate(*offset), -1);
            }
            IdentityInstance::Nil { kind, left, args, right } => {
                if args.len() != kind.arity() {
                    return Err(InstanceError::Arity(kind.name().into(), kind.arity(), args.len()));
                }
                if let Some(i) = args.iter().position(|a| a.is_empty()) {
                    return Err(InstanceError::EmptyArgument(i + 1, self.to_string()));
                }
                let a: SmallVec<[&[u8]; 3]> = args.iter().map(|x| x.letters()).collect();
                expand_into(*kind, n, left.letters(), &a, right.letters(), |w, c| {
                    push_merge(&mut out, w, c)
                });
            }
        }
        out.retain(|(_, c)| *c != 0);
        Ok(out)
    }

    /// Expansion with coefficients in the field of characteristic `chr`.
    pub fn expand(&self, n: u8, chr: Characteristic) -> Result<LinComb, InstanceError> {
        let terms = self.expand_integer(n)?;
        Ok(LinComb::from_terms(chr, terms.into_iter().map(|(w, c)| (w, chr.from_i64(c)))))
    }

    /// Checks that this instance is a row generator of the described system.
    pub fn validate(&self, desc: &SystemDescriptor) -> Result<(), InstanceError> {
        let d = desc.mdeg.d();
        match self {
            IdentityInstance::Cyclic { word, offset } => {
                if !desc.cyclic {
                    return Err(InstanceError::NotInSystem(self.to_string(), desc.to_string()));
                }
                if *offset == 0 || *offset >= word.len().max(1) {
                    return Err(InstanceError::NotInSystem(self.to_string(), desc.to_string()));
                }
            }
            IdentityInstance::Nil { kind, args, .. } => {
                if args.len() != kind.arity() {
                    return Err(InstanceError::Arity(kind.name().into(), kind.arity(), args.len()));
                }
                if let Some(i) = args.iter().position(|a| a.is_empty()) {
                    return Err(InstanceError::EmptyArgument(i + 1, self.to_string()));
                }
                if desc.n == 2 && *kind == NilKind::T3 {
                    return Err(InstanceError::NotInSystem(self.to_string(), desc.to_string()));
                }
            }
        }
        let m = self.mdeg(d, desc.n);
        if m != desc.mdeg {
            return Err(InstanceError::WrongMultidegree(self.to_string(), m, desc.mdeg.clone()));
        }
        Ok(())
    }

    /// Applies a letter substitution `x_i -> images[i]` to every word of
    /// the instance; the result is again an instance (images must be non-empty).
    pub fn substitute(&self, images: &[Word]) -> IdentityInstance {
        match self {
            IdentityInstance::Cyclic { word, offset } => {
                let prefix = Word::from_letters(&word.letters()[..*offset]);
                IdentityInstance::Cyclic { word: word.substitute(images), offset: prefix.substitute(images).len() }
            }
            IdentityInstance::Nil { kind, left, args, right } => IdentityInstance::Nil {
                kind: *kind,
                left: left.substitute(images),
                args: args.iter().map(|a| a.substitute(images)).collect(),
                right: right.substitute(images),
            },
        }
    }
}

fn w(s: &str) -> Word {
    Word::parse(s).expect("word literal")
}

fn push_merge(out: &mut Vec<(Word, i64)>, w: Word, c: i64) {
    if let Some(e) = out.iter_mut().find(|(u, _)| *u == w) {
        e.1 += c;
    } else {
        out.push((w, c));
    }
}

/// Calls `emit(word, coeff)` for each term of `g1·T(args)·g2` (terms may repeat).
pub(crate) fn expand_into(
    kind: NilKind,
    n: u8,
    left: &[u8],
    a: &[&[u8]],
    right: &[u8],
    mut emit: impl FnMut(Word, i64),
) {
    let mut term = |parts: &[&[u8]]| {
        let mut word = Word::from_letters(left);
        for p in parts {
            word.extend_from(p);
        }
        word.extend_from(right);
        emit(word, 1);
    };
    match (n, kind) {
        (3, NilKind::T1) => term(&[a[0], a[0], a[0]]),
        (3, NilKind::T2) => {
            term(&[a[0], a[0], a[1]]);
            term(&[a[0], a[1], a[0]]);
            term(&[a[1], a[0], a[0]]);
        }
        (3, NilKind::T3) => {
            let (x, y, z) = (a[0], a[1], a[2]);
            for p in [[x, y, z], [x, z, y], [y, x, z], [y, z, x], [z, x, y], [z, y, x]] {
                term(&p);
            }
        }
        (2, NilKind::T1) => term(&[a[0], a[0]]),
        (2, NilKind::T2) => {
            term(&[a[0], a[1]]);
            term(&[a[1], a[0]]);
        }
        _ => panic!("unsupported identity {kind:?} for n = {n}"),
    }
}

impl fmt::Display for IdentityInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityInstance::Cyclic { word, offset } => write!(f, "CYCLIC({word}; {offset})"),
            IdentityInstance::Nil { kind, left, args, right } => {
                write!(f, "[{left}]·{}(", kind.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")·[{right}]")
            }
        }
    }
}

/// JSON shape of a provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct InstanceJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    left: Option<Word>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    args: Option<Vec<Word>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    right: Option<Word>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    word: Option<Word>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    offset: Option<usize>,
}

impl Serialize for IdentityInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let j = match self {
            IdentityInstance::Cyclic { word, offset } => InstanceJson {
                kind: "CYCLIC".into(),
                left: None,
                args: None,
                right: None,
                word: Some(word.clone()),
                offset: Some(*offset),
            },
            IdentityInstance::Nil { kind, left, args, right } => InstanceJson {
                kind: kind.name().into(),
                left: Some(left.clone()),
                args: Some(args.clone()),
                right: Some(right.clone()),
                word: None,
                offset: None,
            },
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IdentityInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = InstanceJson::deserialize(d)?;
        let kind = match j.kind.as_str() {
            "T1" => NilKind::T1,
            "T2" => NilKind::T2,
            "T3" => NilKind::T3,
            "CYCLIC" => {
                return Ok(IdentityInstance::Cyclic {
                    word: j.word.ok_or_else(|| D::Error::missing_field("word"))?,
                    offset: j.offset.ok_or_else(|| D::Error::missing_field("offset"))?,
                })
            }
            other => return Err(D::Error::custom(format!("unknown instance kind {other:?}"))),
        };
        Ok(IdentityInstance::Nil {
            kind,
            left: j.left.unwrap_or_default(),
            args: j.args.ok_or_else(|| D::Error::missing_field("args"))?,
            right: j.right.unwrap_or_default(),
        })
    }
}

/// A borrowed instance produced by the streaming generator.
#[derive(Clone, Copy, Debug)]
pub struct InstanceView<'a> {
    pub kind: NilKind,
    pub left: &'a [u8],
    pub args: [&'a [u8]; 3],
    pub right: &'a [u8],
    /// `Some(offset)` for a cyclic row of `left` (the whole word).
    pub cyclic: Option<usize>,
}

impl InstanceView<'_> {
    pub fn to_instance(&self) -> IdentityInstance {
        if let Some(offset) = self.cyclic {
            return IdentityInstance::Cyclic { word: Word::from_letters(self.left), offset };
        }
        IdentityInstance::Nil {
            kind: self.kind,
            left: Word::from_letters(self.left),
            args: self.args[..self.kind.arity()].iter().map(|a| Word::from_letters(a)).collect(),
            right: Word::from_letters(self.right),
        }
    }

    /// Integer terms of the expansion (terms may repeat).
    pub fn for_each_term(&self, n: u8, mut emit: impl FnMut(Word, i64)) {
        if let Some(offset) = self.cyclic {
            let w = Word::from_letters(self.left);
            let r = w.rotate(offset);
            emit(w, 1);
            emit(r, -1);
            return;
        }
        expand_into(self.kind, n, self.left, &self.args[..self.kind.arity()], self.right, emit);
    }
}

/// Visits every row generator of the system, in a deterministic order:
/// by word (in the word order), then by cut positions. Each instance is
/// visited once, from the word equal to its leading term. T3 arguments
/// are visited in non-decreasing order only (the expansion is symmetric).
pub fn for_each_instance(
    desc: &SystemDescriptor,
    words: &[Word],
    mut visit: impl FnMut(InstanceView<'_>),
) {
    for word in words {
        instances_of_word(desc, word.letters(), &mut visit);
    }
}

/// Row generators whose leading term is `w`.
pub fn instances_of_word(desc: &SystemDescriptor, w: &[u8], visit: &mut impl FnMut(InstanceView<'_>)) {
    let len = w.len();
    let empty: &[u8] = &[];
    if desc.n == 3 {
        for a in 0..len {
            for b in a + 1..=len {
                for c in b + 1..=len {
                    for e in c + 1..=len {
                        let (f1, f2, f3) = (&w[a..b], &w[b..c], &w[c..e]);
                        let (left, right) = (&w[..a], &w[e..]);
                        if cmp_slices(f1, f2).is_le() && cmp_slices(f2, f3).is_le() {
                            visit(InstanceView { kind: NilKind::T3, left, args: [f1, f2, f3], right, cyclic: None });
                        }
                        if f1 == f2 {
                            visit(InstanceView { kind: NilKind::T2, left, args: [f1, f3, empty], right, cyclic: None });
                            if f2 == f3 {
                                visit(InstanceView { kind: NilKind::T1, left, args: [f1, empty, empty], right, cyclic: None });
                            }
                        }
                    }
                }
            }
        }
    } else {
        for a in 0..len {
            for b in a + 1..=len {
                for c in b + 1..=len {
                    let (f1, f2) = (&w[a..b], &w[b..c]);
                    let (left, right) = (&w[..a], &w[c..]);
                    if cmp_slices(f1, f2).is_le() {
                        visit(InstanceView { kind: NilKind::T2, left, args: [f1, f2, empty], right, cyclic: None });
                    }
                    if f1 == f2 {
                        visit(InstanceView { kind: NilKind::T1, left, args: [f1, empty, empty], right, cyclic: None });
                    }
                }
            }
        }
    }
    if desc.cyclic && len >= 2 {
        if w.iter().any(|&l| l != w[0]) {
            visit(InstanceView { kind: NilKind::T1, left: w, args: [empty, empty, empty], right: empty, cyclic: Some(1) });
        }
    }
}

/// A stored row: its provenance and sparse entries over the system's columns.
#[derive(Clone, Debug)]
pub struct SystemRow {
    pub instance: IdentityInstance,
    pub entries: Vec<(u32, Scalar)>,
}

/// The materialized system `S_Λ`: columns are all words of `Λ`.
#[derive(Clone, Debug)]
pub struct RelationSystem {
    pub desc: SystemDescriptor,
    pub columns: Vec<Word>,
    pub rows: Vec<SystemRow>,
}

impl RelationSystem {
    pub fn column_of(&self, w: &Word) -> Option<usize> {
        WordIndexer::new(&self.desc.mdeg)?.rank(w.letters())
    }

    /// Dense-free sparse vector of a combination over this system's columns.
    pub fn vector_of(&self, e: &LinComb) -> Option<Vec<(u32, Scalar)>> {
        let idx = WordIndexer::new(&self.desc.mdeg)?;
        let mut v: Vec<(u32, Scalar)> = Vec::with_capacity(e.len());
        for (w, c) in e.iter() {
            v.push((idx.rank(w.letters())? as u32, c.clone()));
        }
        v.sort_by_key(|x| x.0);
        Some(v)
    }
}

/// Builds `S_Λ` with duplicate and zero rows removed.
pub fn build_system(desc: &SystemDescriptor, budget: u64) -> Result<RelationSystem, BudgetExceeded> {
    let columns = enumerate_words(&desc.mdeg, budget)?;
    let indexer = WordIndexer::new(&desc.mdeg).expect("within budget");
    let chr = desc.chr;
    let mut seen: HashMap<Vec<(u32, BigInt)>, ()> = HashMap::new();
    let mut rows = Vec::new();
    for_each_instance(desc, &columns, |view| {
        let mut acc: Vec<(u32, i64)> = Vec::with_capacity(6);
        view.for_each_term(desc.n, |w, c| {
            let col = indexer.rank(w.letters()).expect("instance term inside the component") as u32;
            match acc.iter_mut().find(|e| e.0 == col) {
                Some(e) => e.1 += c,
                None => acc.push((col, c)),
            }
        });
        acc.sort_by_key(|e| e.0);
        let entries: Vec<(u32, Scalar)> = acc
            .into_iter()
            .map(|(col, c)| (col, chr.from_i64(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if entries.is_empty() {
            return;
        }
        let key = normalized_key(&entries);
        if seen.insert(key, ()).is_none() {
            rows.push(SystemRow { instance: view.to_instance(), entries });
        }
    });
    Ok(RelationSystem { desc: desc.clone(), columns, rows })
}

/// Scales a row so its first coefficient is 1 (prime fields) or so its
/// integer content is 1 with a positive leading entry (characteristic 0).
fn normalized_key(entries: &[(u32, Scalar)]) -> Vec<(u32, BigInt)> {
    match &entries[0].1 {
        Scalar::Residue { .. } => {
            let inv = entries[0].1.inv();
            entries.iter().map(|(c, v)| (*c, BigInt::from((v * &inv).residue()))).collect()
        }
        Scalar::Rational(_) => {
            let ints: Vec<BigInt> = entries.iter().map(|(_, v)| v.rational().numer().clone()).collect();
            let mut g = BigInt::zero();
            for i in &ints {
                g = g.gcd(i);
            }
            if ints[0].is_negative() {
                g = -g;
            }
            entries.iter().zip(ints).map(|((c, _), v)| (*c, v / &g)).collect()
        }
    }
}
