//! Explicit solution functionals and the chains that push nonzero-ness
//! from a heavy component down to one where a functional is known.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::Certificate;
use crate::lincomb::LinComb;
use crate::relations::{for_each_instance, IdentityInstance, SystemDescriptor};
use crate::rewrite::{pi_operator, substitute_unit, RewriteError};
use crate::scalar::{Characteristic, Scalar};
use crate::word::{enumerate_words, Multidegree, Word};

/// Named functionals on words of a fixed multidegree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalKind {
    /// Six words of multidegree (3,2) with values ±1:
    /// `x1²x2²x1, x2x1x2x1², x1x2x1²x2 ↦ 1` and
    /// `x1x2²x1², x1²x2x1x2, x2x1²x2x1 ↦ −1`.
    SixWord,
    /// Number of (overlapping) factors `x1x1`, on multidegree `(3,1,…,1)`
    /// in characteristic 2.
    SquareCount,
    /// 1 on even permutations of `x1…xt`, 0 on odd ones (characteristic 3).
    ParityEven,
    /// 1 on odd permutations, 0 on even ones (characteristic 3).
    ParityOdd,
}

impl FunctionalKind {
    pub const ALL: [FunctionalKind; 4] =
        [FunctionalKind::SixWord, FunctionalKind::SquareCount, FunctionalKind::ParityEven, FunctionalKind::ParityOdd];

    pub fn name(self) -> &'static str {
        match self {
            FunctionalKind::SixWord => "six-word",
            FunctionalKind::SquareCount => "square-count",
            FunctionalKind::ParityEven => "parity-even",
            FunctionalKind::ParityOdd => "parity-odd",
        }
    }

    pub fn from_name(s: &str) -> Option<FunctionalKind> {
        FunctionalKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Checks that the functional is defined for this component.
    pub fn check_applicable(self, mdeg: &Multidegree, chr: Characteristic) -> Result<(), FunctionalError> {
        let c = mdeg.counts();
        let ok = match self {
            FunctionalKind::SixWord => c == [3, 2],
            FunctionalKind::SquareCount => {
                chr.value() == 2 && c.len() >= 2 && c[0] == 3 && c[1..].iter().all(|&x| x == 1)
            }
            FunctionalKind::ParityEven | FunctionalKind::ParityOdd => {
                chr.value() == 3 && !c.is_empty() && c.iter().all(|&x| x == 1)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(FunctionalError::NotApplicable { kind: self, mdeg: mdeg.clone(), chr })
        }
    }

    /// Value on a word of the component (as an integer before reduction).
    pub fn value_int(self, w: &[u8]) -> i64 {
        match self {
            FunctionalKind::SixWord => {
                const TABLE: [(&[u8], i64); 6] = [
                    (&[0, 0, 1, 1, 0], 1),
                    (&[0, 1, 1, 0, 0], -1),
                    (&[0, 0, 1, 0, 1], -1),
                    (&[1, 0, 1, 0, 0], 1),
                    (&[0, 1, 0, 0, 1], 1),
                    (&[1, 0, 0, 1, 0], -1),
                ];
                TABLE.iter().find(|(u, _)| *u == w).map_or(0, |(_, v)| *v)
            }
            FunctionalKind::SquareCount => w.windows(2).filter(|p| p[0] == 0 && p[1] == 0).count() as i64,
            FunctionalKind::ParityEven | FunctionalKind::ParityOdd => {
                let even = permutation_is_even(w);
                i64::from(even == (self == FunctionalKind::ParityEven))
            }
        }
    }

    pub fn value(self, w: &[u8], chr: Characteristic) -> Scalar {
        chr.from_i64(self.value_int(w))
    }

    /// Pairing with a combination.
    pub fn pair(self, e: &LinComb) -> Scalar {
        let chr = e.characteristic();
        e.iter().fold(chr.zero(), |s, (w, c)| &s + &(c * &self.value(w.letters(), chr)))
    }
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn permutation_is_even(w: &[u8]) -> bool {
    let mut inv = 0usize;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 0
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FunctionalError {
    #[error("functional {kind} is not defined on {mdeg} in characteristic {chr}")]
    NotApplicable { kind: FunctionalKind, mdeg: Multidegree, chr: Characteristic },
    #[error("component has {0} words, above the budget {1}")]
    Budget(u128, u64),
}

/// Outcome of streaming every row of a system through a functional.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalCheck {
    pub functional: FunctionalKind,
    pub system: SystemDescriptor,
    pub rows_checked: u64,
    pub annihilates: bool,
    /// First row with nonzero value, if any.
    pub violation: Option<IdentityInstance>,
}

/// Evaluates the functional on every row of `S_Λ`, one row at a time.
pub fn verify_functional(
    kind: FunctionalKind,
    mdeg: &Multidegree,
    chr: Characteristic,
    budget: u64,
) -> Result<FunctionalCheck, FunctionalError> {
    kind.check_applicable(mdeg, chr)?;
    let desc = SystemDescriptor::nil3(mdeg.clone(), chr);
    let words = enumerate_words(mdeg, budget).map_err(|e| FunctionalError::Budget(e.count, budget))?;
    let mut rows_checked = 0u64;
    let mut violation = None;
    for_each_instance(&desc, &words, |view| {
        if violation.is_some() {
            return;
        }
        rows_checked += 1;
        let mut s = 0i64;
        view.for_each_term(3, |w, c| s += c * kind.value_int(w.letters()));
        if !chr.from_i64(s).is_zero() {
            violation = Some(view.to_instance());
        }
    });
    Ok(FunctionalCheck { functional: kind, system: desc, rows_checked, annihilates: violation.is_none(), violation })
}

/// Why a combination is nonzero in `N_{3,d}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "kebab-case")]
pub enum NonzeroEvidence {
    /// A witness from solving the component.
    Solved { certificate: Certificate },
    /// A named functional that solves the system and is nonzero on the target.
    Functional { functional: FunctionalKind, mdeg: Multidegree, value: Scalar },
    /// `Π` applied letter by letter (characteristic 3): if the target were
    /// zero, so would be `image`.
    PiChain { letters: Vec<u8>, image: LinComb, inner: Box<NonzeroEvidence> },
    /// Setting a letter of degree 1 or 2 to 1 maps zero to zero, so a
    /// nonzero image proves the target nonzero.
    UnitSubstitution { letter: u8, image: LinComb, inner: Box<NonzeroEvidence> },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvidenceError {
    #[error("witness certificate is about a different target")]
    TargetMismatch,
    #[error("witness certificate claims zero")]
    ClaimsZero,
    #[error("certificate check failed: {0}")]
    Certificate(String),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error("functional {0} does not solve the system (row {1})")]
    NotASolution(FunctionalKind, String),
    #[error("functional value on the target is {found}, evidence claims {claimed}")]
    Value { found: String, claimed: String },
    #[error("recomputed image differs from the recorded one")]
    ImageMismatch,
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

impl NonzeroEvidence {
    /// Replays the chain for `target`.
    pub fn verify(&self, target: &LinComb, budget: u64) -> Result<(), EvidenceError> {
        match self {
            NonzeroEvidence::Solved { certificate } => {
                if certificate.target != *target {
                    return Err(EvidenceError::TargetMismatch);
                }
                if certificate.is_zero() {
                    return Err(EvidenceError::ClaimsZero);
                }
                certificate.verify(budget).map_err(|e| EvidenceError::Certificate(e.to_string()))
            }
            NonzeroEvidence::Functional { functional, mdeg, value } => {
                let chr = target.characteristic();
                let m = target.mdeg(mdeg.d()).map_err(RewriteError::from)?;
                if target.is_zero() || m != *mdeg {
                    return Err(EvidenceError::TargetMismatch);
                }
                let check = verify_functional(*functional, mdeg, chr, budget)?;
                if !check.annihilates {
                    let row = check.violation.map(|v| v.to_string()).unwrap_or_default();
                    return Err(EvidenceError::NotASolution(*functional, row));
                }
                let found = functional.pair(target);
                if found != *value || found.is_zero() {
                    return Err(EvidenceError::Value { found: found.to_text(), claimed: value.to_text() });
                }
                Ok(())
            }
            NonzeroEvidence::PiChain { letters, image, inner } => {
                let mut e = target.clone();
                for &x in letters {
                    e = pi_operator(&e, x)?;
                }
                if e != *image {
                    return Err(EvidenceError::ImageMismatch);
                }
                inner.verify(image, budget)
            }
            NonzeroEvidence::UnitSubstitution { letter, image, inner } => {
                let e = substitute_unit(target, *letter)?;
                if e != *image {
                    return Err(EvidenceError::ImageMismatch);
                }
                inner.verify(image, budget)
            }
        }
    }

    /// Short description of the route, outermost step first.
    pub fn describe(&self) -> String {
        match self {
            NonzeroEvidence::Solved { .. } => "solved component".into(),
            NonzeroEvidence::Functional { functional, mdeg, .. } => format!("functional {functional} on {mdeg}"),
            NonzeroEvidence::PiChain { letters, inner, .. } => {
                let ls: Vec<String> = letters.iter().map(|l| format!("x{}", l + 1)).collect();
                format!("Pi over {} then {}", ls.join(","), inner.describe())
            }
            NonzeroEvidence::UnitSubstitution { letter, inner, .. } => {
                format!("x{} = 1 then {}", letter + 1, inner.describe())
            }
        }
    }
}

/// `W_ij = x_i² x_j² x_i x_j` (0-based letters).
pub fn w_block(i: u8, j: u8) -> Word {
    Word::from_letters(&[i, i, j, j, i, j])
}

/// `w_2k = W_12 W_34 ⋯ W_{2k−1,2k}`.
pub fn w_product(k: usize) -> Word {
    let mut w = Word::empty();
    for t in 0..k as u8 {
        w.extend_from(w_block(2 * t, 2 * t + 1).letters());
    }
    w
}

/// Evidence that `w_2k ≠ 0` in characteristic 3 (`k ≥ 1`) without solving
/// the component: apply `Π_2k, …, Π_1` and evaluate the parity functional
/// on the multilinear result `(x1x2 − x2x1)⋯(x_{2k−1}x_2k − x_2k x_{2k−1})`.
pub fn pi_parity_evidence(k: usize) -> Result<(LinComb, NonzeroEvidence), RewriteError> {
    let chr = Characteristic::of(3);
    let target = LinComb::word(w_product(k), chr);
    let letters: Vec<u8> = (0..2 * k as u8).rev().collect();
    let mut e = target.clone();
    for &x in &letters {
        e = pi_operator(&e, x)?;
    }
    let value = FunctionalKind::ParityEven.pair(&e);
    let inner = NonzeroEvidence::Functional {
        functional: FunctionalKind::ParityEven,
        mdeg: Multidegree::new(vec![1; 2 * k]),
        value,
    };
    Ok((target, NonzeroEvidence::PiChain { letters, image: e, inner: Box::new(inner) }))
}

/// Evidence that `w_2k x²_{2k+1} ≠ 0` in characteristic 3 via `x_{2k+1} = 1`.
pub fn pi_parity_square_evidence(k: usize) -> Result<(LinComb, NonzeroEvidence), RewriteError> {
    let chr = Characteristic::of(3);
    let x = 2 * k as u8;
    let mut w = w_product(k);
    w.push(x);
    w.push(x);
    let target = LinComb::word(w, chr);
    let (image, inner) = pi_parity_evidence(k)?;
    debug_assert_eq!(substitute_unit(&target, x)?, image);
    Ok((target, NonzeroEvidence::UnitSubstitution { letter: x, image, inner: Box::new(inner) }))
}
