//! Reduction of words to canonical words modulo the nil identities.
//!
//! For the cube identity a word is rewritten by looking at the first letter
//! `x` (in index order) for which it is not canonical and at the leftmost
//! pair of `x`-blocks `P x^a g x^b …` (g non-empty and `x`-free):
//!
//! | blocks      | rewrite                                   | identity used            |
//! |-------------|-------------------------------------------|--------------------------|
//! | `x^3`       | drop                                      | `T1(x)`                  |
//! | (1,1)       | `PxgxS = −Px²gS − Pgx²S`                  | `T2(x,g)`                |
//! | (1,2)       | `Pxgx²S = −Px²gxS`                        | `T2(x,xg)`, `T1(x)`      |
//! | (2,2)       | `Px²gx²S = 0`                             | `x·T2(x,g)·x`, `T1(x)`   |
//! | (2,1,…)     | `Px²gxhxS = −PxgxhX²S`                    | `T2(x,xgxh)`, `T1(x)`    |
//!
//! Every step strictly decreases the sum over letters of `3·blocks + φ`,
//! where `φ` is 2 for a leading (1,2) pair, 1 for a leading (2,1) pair
//! followed by more blocks and 0 otherwise. Rewriting one letter never
//! reorders the blocks of another letter; it can only merge them, which
//! lowers that letter's term too.
//!
//! For squares (`n = 2`) canonical words have strictly increasing letters;
//! adjacent inversions are swapped with `T2(b,a) = ab + ba` and squares
//! dropped with `T1`.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use smallvec::SmallVec;
use thiserror::Error;

use crate::lincomb::{LinComb, LinCombError};
use crate::relations::{IdentityInstance, NilKind};
use crate::scalar::{Characteristic, Scalar};
use crate::word::{is_canonical_in, letter_blocks, Multidegree, Word};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error(transparent)]
    Combination(#[from] LinCombError),
    #[error("letter x{letter} has degree {degree}, expected {expected}")]
    WrongDegree { letter: usize, degree: usize, expected: &'static str },
    #[error("the operator is only defined in characteristic 3, got {0}")]
    WrongCharacteristic(Characteristic),
    #[error("substitution needs another letter besides x{0}")]
    NoOtherLetter(usize),
}

/// Canonical with respect to the normal forms of the given nil exponent.
pub fn is_canonical_for(w: &[u8], n: u8) -> bool {
    if n == 2 {
        return w.windows(2).all(|p| p[0] < p[1]);
    }
    let mut seen = [false; 256];
    for &l in w {
        if !seen[l as usize] {
            seen[l as usize] = true;
            if !is_canonical_in(w, l) {
                return false;
            }
        }
    }
    true
}

/// Termination measure of the rewriting (strictly decreases per step).
pub fn measure(w: &[u8], n: u8) -> u32 {
    if n == 2 {
        let mut inv = 0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if w[i] >= w[j] {
                    inv += 1;
                }
            }
        }
        return inv;
    }
    let mut seen = [false; 256];
    let mut total = 0;
    for &l in w {
        if seen[l as usize] {
            continue;
        }
        seen[l as usize] = true;
        let b = letter_blocks(w, l);
        let phi = match b.as_slice() {
            [(_, 1), (_, 2), ..] => 2,
            [(_, 2), (_, 1), _, ..] => 1,
            _ => 0,
        };
        total += 3 * b.len() as u32 + phi;
    }
    total
}

/// One rewriting step: `w = Σ rows + Σ words`.
#[derive(Clone, Debug, Default)]
pub struct Step {
    pub rows: SmallVec<[(IdentityInstance, i64); 3]>,
    pub words: SmallVec<[(Word, i64); 2]>,
}

fn cat(parts: &[&[u8]]) -> Word {
    Word::concat(parts)
}

fn inst(kind: NilKind, left: &[u8], args: &[&[u8]], right: &[u8]) -> IdentityInstance {
    IdentityInstance::nil(kind, Word::from_letters(left), args.iter().map(|a| Word::from_letters(a)).collect(), Word::from_letters(right))
}

/// Applies the rewriting rule to `w`; `None` if `w` is already canonical.
/// Row provenance is only built when `track` is set.
pub fn step(w: &[u8], n: u8, track: bool) -> Option<Step> {
    let mut s = Step::default();
    if n == 2 {
        if let Some(i) = (0..w.len().saturating_sub(1)).find(|&i| w[i] == w[i + 1]) {
            if track {
                s.rows.push((inst(NilKind::T1, &w[..i], &[&w[i..i + 1]], &w[i + 2..]), 1));
            }
            return Some(s);
        }
        let i = (0..w.len().saturating_sub(1)).find(|&i| w[i] > w[i + 1])?;
        let (p, a, b, rest) = (&w[..i], &w[i..i + 1], &w[i + 1..i + 2], &w[i + 2..]);
        if track {
            s.rows.push((inst(NilKind::T2, p, &[b, a], rest), 1));
        }
        s.words.push((cat(&[p, b, a, rest]), -1));
        return Some(s);
    }

    if let Some(i) = (0..w.len().saturating_sub(2)).find(|&i| w[i] == w[i + 1] && w[i] == w[i + 2]) {
        if track {
            s.rows.push((inst(NilKind::T1, &w[..i], &[&w[i..i + 1]], &w[i + 3..]), 1));
        }
        return Some(s);
    }
    let mut letters: SmallVec<[u8; 16]> = w.iter().copied().collect();
    letters.sort_unstable();
    letters.dedup();
    let x = letters.into_iter().find(|&l| !is_canonical_in(w, l))?;
    let xs: &[u8] = &[x];
    let blocks = letter_blocks(w, x);
    let (a1, l1) = blocks[0];
    let (a2, l2) = blocks[1];
    let p = &w[..a1];
    let g = &w[a1 + l1..a2];
    match (l1, l2) {
        (1, 1) => {
            let rest = &w[a2 + 1..];
            if track {
                s.rows.push((inst(NilKind::T2, p, &[xs, g], rest), 1));
            }
            s.words.push((cat(&[p, xs, xs, g, rest]), -1));
            s.words.push((cat(&[p, g, xs, xs, rest]), -1));
        }
        (1, 2) => {
            let rest = &w[a2 + 2..];
            if track {
                let xg = cat(&[xs, g]);
                let grest = cat(&[g, rest]);
                s.rows.push((inst(NilKind::T2, p, &[xs, xg.letters()], rest), 1));
                s.rows.push((inst(NilKind::T1, p, &[xs], grest.letters()), -1));
            }
            s.words.push((cat(&[p, xs, xs, g, xs, rest]), -1));
        }
        (2, 2) => {
            if track {
                let px = cat(&[p, xs]);
                let xrest = cat(&[xs, &w[a2 + 2..]]);
                let gxrest = cat(&[g, xs, &w[a2 + 2..]]);
                let pxg = cat(&[p, xs, g]);
                s.rows.push((inst(NilKind::T2, px.letters(), &[xs, g], xrest.letters()), 1));
                s.rows.push((inst(NilKind::T1, p, &[xs], gxrest.letters()), -1));
                s.rows.push((inst(NilKind::T1, pxg.letters(), &[xs], &w[a2 + 2..]), -1));
            }
        }
        (2, 1) => {
            let (a3, _) = blocks[2];
            let h = &w[a2 + 1..a3];
            let rest = &w[a3 + 1..];
            if track {
                let xgxh = cat(&[xs, g, xs, h]);
                let gxhrest = cat(&[g, xs, h, rest]);
                s.rows.push((inst(NilKind::T2, p, &[xs, xgxh.letters()], rest), 1));
                s.rows.push((inst(NilKind::T1, p, &[xs], gxhrest.letters()), -1));
            }
            s.words.push((cat(&[p, xs, g, xs, h, xs, xs, rest]), -1));
        }
        _ => unreachable!("blocks of length >= 3 are removed first"),
    }
    Some(s)
}

type Image = Rc<[(Word, i64)]>;

/// Memoized canonical forms over the integers. The rules have integer
/// coefficients, so the same table serves every characteristic.
#[derive(Debug)]
pub struct Canonicalizer {
    n: u8,
    memo: HashMap<Word, Image>,
}

impl Canonicalizer {
    pub fn new(n: u8) -> Canonicalizer {
        Canonicalizer { n, memo: HashMap::new() }
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    /// Canonical form of a single word as integer terms sorted by word.
    pub fn word(&mut self, w: &Word) -> Image {
        if let Some(v) = self.memo.get(w) {
            return v.clone();
        }
        let img: Image = match step(w.letters(), self.n, false) {
            None => Rc::from(vec![(w.clone(), 1i64)]),
            Some(s) => {
                let m0 = measure(w.letters(), self.n);
                let mut acc: BTreeMap<Word, i64> = BTreeMap::new();
                for (v, c) in &s.words {
                    debug_assert!(measure(v.letters(), self.n) < m0, "rewriting measure must drop");
                    let _ = m0;
                    for (u, e) in self.word(v).iter() {
                        let t = acc.entry(u.clone()).or_insert(0);
                        *t = t.checked_add(c.checked_mul(*e).expect("coefficient overflow")).expect("coefficient overflow");
                    }
                }
                acc.retain(|_, c| *c != 0);
                Rc::from(acc.into_iter().collect::<Vec<_>>())
            }
        };
        self.memo.insert(w.clone(), img.clone());
        img
    }

    /// Canonical form of a combination in its own characteristic.
    pub fn comb(&mut self, e: &LinComb) -> LinComb {
        let chr = e.characteristic();
        let mut out = LinComb::zero(chr);
        for (w, c) in e.iter() {
            for (u, k) in self.word(w).iter() {
                out.add_term(u.clone(), c * &chr.from_i64(*k));
            }
        }
        out
    }
}

/// Rewrites a homogeneous combination into canonical words.
pub fn canonicalize(e: &LinComb, n: u8) -> Result<LinComb, RewriteError> {
    e.mdeg(0)?;
    Ok(Canonicalizer::new(n).comb(e))
}

/// Canonicalization that also records the identity rows it used:
/// `e = Σ coefficient · row + remainder`, remainder canonical.
pub fn canonicalize_tracked(e: &LinComb, n: u8) -> (Vec<(IdentityInstance, Scalar)>, LinComb) {
    let chr = e.characteristic();
    let mut queue: BTreeMap<(u32, Word), Scalar> = BTreeMap::new();
    for (w, c) in e.iter() {
        queue.insert((measure(w.letters(), n), w.clone()), c.clone());
    }
    let mut rows: BTreeMap<IdentityInstance, Scalar> = BTreeMap::new();
    let mut rem = LinComb::zero(chr);
    while let Some(((m, w), c)) = queue.pop_last() {
        if c.is_zero() {
            continue;
        }
        match step(w.letters(), n, true) {
            None => rem.add_term(w, c),
            Some(s) => {
                for (inst, k) in s.rows {
                    let add = &c * &chr.from_i64(k);
                    let slot = rows.entry(inst).or_insert_with(|| chr.zero());
                    *slot = &*slot + &add;
                }
                for (v, k) in s.words {
                    let mv = measure(v.letters(), n);
                    assert!(mv < m, "rewriting measure must drop");
                    let add = &c * &chr.from_i64(k);
                    let slot = queue.entry((mv, v)).or_insert_with(|| chr.zero());
                    *slot = &*slot + &add;
                }
            }
        }
    }
    let rows = rows.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    (rows, rem)
}

/// `Π_x(v₁x²uxv₂) = v₁uxv₂ − v₁xuv₂` on components of degree 3 in `x`,
/// characteristic 3 only.
pub fn pi_operator(e: &LinComb, x: u8) -> Result<LinComb, RewriteError> {
    let chr = e.characteristic();
    if chr.value() != 3 {
        return Err(RewriteError::WrongCharacteristic(chr));
    }
    e.mdeg(0)?;
    if let Some(w) = e.words().next() {
        let deg = w.degree_in(x);
        if deg != 3 {
            return Err(RewriteError::WrongDegree { letter: x as usize + 1, degree: deg, expected: "3" });
        }
    }
    let canon = canonicalize(e, 3)?;
    let mut out = LinComb::zero(chr);
    for (w, c) in canon.iter() {
        let l = w.letters();
        let b = letter_blocks(l, x);
        let [(s1, 2), (s2, 1)] = b.as_slice() else {
            unreachable!("canonical words of x-degree 3 have the shape v1 x^2 u x v2")
        };
        let (v1, u, v2) = (&l[..*s1], &l[s1 + 2..*s2], &l[s2 + 1..]);
        let xs: &[u8] = &[x];
        out.add_term(cat(&[v1, u, xs, v2]), c.clone());
        out.add_term(cat(&[v1, xs, u, v2]), -c);
    }
    Ok(out)
}

/// Deletes every occurrence of `x` (substitution `x = 1`). The degree of
/// `x` must be 1 or 2 and some other letter must remain.
pub fn substitute_unit(e: &LinComb, x: u8) -> Result<LinComb, RewriteError> {
    let m: Multidegree = e.mdeg(x as usize + 1)?;
    let deg = m.counts()[x as usize] as usize;
    if deg != 1 && deg != 2 {
        return Err(RewriteError::WrongDegree { letter: x as usize + 1, degree: deg, expected: "1 or 2" });
    }
    if m.total() == deg {
        return Err(RewriteError::NoOtherLetter(x as usize + 1));
    }
    Ok(e.map_words(|w| w.delete_letter(x)))
}
