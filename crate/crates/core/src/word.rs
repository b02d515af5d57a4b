//! Words over a finite alphabet, multidegrees, enumeration and cycles.
//!
//! Letters are stored 0-based (`x1` is letter 0). Words compare
//! length-first and then lexicographically, which fixes the column order of
//! every linear system built on top of them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use thiserror::Error;

/// Default limit on the number of words a single component may have.
pub const DEFAULT_COLUMN_BUDGET: u64 = 2_000_000;

/// A letter `x_i`, stored 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u8);

impl Letter {
    /// Builds the letter `x_index` from its 1-based index.
    pub fn from_index(index: usize) -> Letter {
        assert!((1..=256).contains(&index), "letter index out of range: {index}");
        Letter((index - 1) as u8)
    }

    /// 1-based index, as printed.
    pub fn index(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.index())
    }
}

/// A parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at position {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: usize, msg: impl Into<String>) -> ParseError {
        ParseError { pos, msg: msg.into() }
    }
}

/// A finite sequence of letters. The empty word is allowed where callers
/// need it (borders of identity instances, for example).
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(SmallVec<[u8; 16]>);

impl Word {
    pub fn empty() -> Word {
        Word(SmallVec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Word {
        Word(SmallVec::from_slice(letters))
    }

    /// Builds a word from 1-based letter indices.
    pub fn from_indices(indices: &[usize]) -> Word {
        Word(indices.iter().map(|&i| Letter::from_index(i).0).collect())
    }

    /// Parses the text grammar `x1^2 x2 x1`; `1` or blank text is the empty word.
    pub fn parse(text: &str) -> Result<Word, ParseError> {
        let mut p = WordScanner::new(text, 0);
        let w = p.word()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(ParseError::new(p.pos, "unexpected character in word"));
        }
        Ok(w)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: u8) {
        self.0.push(letter);
    }

    pub fn extend_from(&mut self, letters: &[u8]) {
        self.0.extend_from_slice(letters);
    }

    pub fn concat(parts: &[&[u8]]) -> Word {
        let mut w = Word::empty();
        for p in parts {
            w.0.extend_from_slice(p);
        }
        w
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::concat(&[&self.0, &other.0])
    }

    /// Largest letter index + 1, i.e. the smallest alphabet containing the word.
    pub fn alphabet_size(&self) -> usize {
        self.0.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }

    /// Letter counts over an alphabet of `d` letters.
    pub fn mdeg(&self, d: usize) -> Multidegree {
        let mut counts = vec![0u32; d.max(self.alphabet_size())];
        for &l in self.0.iter() {
            counts[l as usize] += 1;
        }
        Multidegree(counts)
    }

    pub fn degree_in(&self, letter: u8) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    pub fn contains_letter(&self, letter: u8) -> bool {
        self.0.contains(&letter)
    }

    /// Rotation moving the first `k` letters to the end.
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        Word::concat(&[&self.0[k..], &self.0[..k]])
    }

    /// The least rotation under the word order (which, for equal lengths,
    /// is plain lexicographic order).
    pub fn cyclic_representative(&self) -> Word {
        assert!(!self.is_empty(), "cyclic representative of the empty word");
        let k = least_rotation(&self.0);
        self.rotate(k)
    }

    /// True if the word is not a proper power of a shorter word.
    pub fn is_primitive(&self) -> bool {
        let n = self.0.len();
        if n == 0 {
            return false;
        }
        (1..n).filter(|p| n % p == 0).all(|p| (p..n).any(|i| self.0[i] != self.0[i - p]))
    }

    /// Deletes every occurrence of `letter`.
    pub fn delete_letter(&self, letter: u8) -> Word {
        Word(self.0.iter().copied().filter(|&l| l != letter).collect())
    }

    /// Exchanges two letters throughout.
    pub fn swap_letters(&self, a: u8, b: u8) -> Word {
        Word(
            self.0
                .iter()
                .map(|&l| if l == a { b } else if l == b { a } else { l })
                .collect(),
        )
    }

    /// Applies a letter renaming `l -> map[l]`.
    pub fn rename(&self, map: &[u8]) -> Word {
        Word(self.0.iter().map(|&l| map[l as usize]).collect())
    }

    /// Replaces each letter by a word.
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut w = Word::empty();
        for &l in self.0.iter() {
            w.extend_from(images[l as usize].letters());
        }
        w
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compares two equal-purpose letter slices in the word order.
pub fn cmp_slices(a: &[u8], b: &[u8]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl fmt::Display for Word {
    /// Prints runs with exponents, e.g. `x1^2 x2 x1`; the empty word prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut i = 0;
        let mut first = true;
        while i < self.0.len() {
            let l = self.0[i];
            let mut j = i;
            while j < self.0.len() && self.0[j] == l {
                j += 1;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if j - i == 1 {
                write!(f, "x{}", l as usize + 1)?;
            } else {
                write!(f, "x{}^{}", l as usize + 1, j - i)?;
            }
            i = j;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for Word {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Word, ParseError> {
        Word::parse(s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Word, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Cursor over word-grammar text, shared with the expression parser.
pub(crate) struct WordScanner<'a> {
    pub src: &'a [u8],
    pub pos: usize,
    base: usize,
}

impl<'a> WordScanner<'a> {
    pub fn new(text: &'a str, base: usize) -> Self {
        WordScanner { src: text.as_bytes(), pos: 0, base }
    }

    fn err(&self, pos: usize, msg: &str) -> ParseError {
        ParseError::new(self.base + pos, msg)
    }

    pub fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    pub fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    pub fn number(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(start, "expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<u64>()
            .map_err(|_| self.err(start, "number too large"))
    }

    /// Optional `^e` suffix.
    pub fn exponent(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            self.number()
        } else {
            Ok(1)
        }
    }

    /// One `x<i>[^e]` token, returning (letter, exponent).
    pub fn letter_token(&mut self) -> Result<(u8, u64), ParseError> {
        let start = self.pos;
        if self.peek() != Some(b'x') {
            return Err(self.err(start, "expected a letter x<i>"));
        }
        self.pos += 1;
        let i = self.number()?;
        if i == 0 || i > 256 {
            return Err(self.err(start, "letter index must be in 1..=256"));
        }
        let e = self.exponent()?;
        Ok(((i - 1) as u8, e))
    }

    /// A possibly empty sequence of letter tokens; a lone `1` is the empty word.
    pub fn word(&mut self) -> Result<Word, ParseError> {
        let mut w = Word::empty();
        self.skip_ws();
        if self.peek() == Some(b'1') {
            let save = self.pos;
            self.pos += 1;
            let next = self.peek();
            if next.map_or(true, |c| !c.is_ascii_digit()) {
                return Ok(w);
            }
            self.pos = save;
        }
        loop {
            self.skip_ws();
            if self.peek() != Some(b'x') {
                break;
            }
            let start = self.pos;
            let (l, e) = self.letter_token()?;
            if e > 64 {
                return Err(self.err(start, "exponent too large"));
            }
            for _ in 0..e {
                w.push(l);
            }
        }
        Ok(w)
    }
}

/// Index of the least rotation; words here are short, so the quadratic
/// scan is fine.
fn least_rotation(s: &[u8]) -> usize {
    let n = s.len();
    let mut best = 0;
    for k in 1..n {
        for i in 0..n {
            let a = s[(k + i) % n];
            let b = s[(best + i) % n];
            if a != b {
                if a < b {
                    best = k;
                }
                break;
            }
        }
    }
    best
}

/// Letter-count vector `(λ_1, …, λ_d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Multidegree(pub Vec<u32>);

impl Multidegree {
    pub fn new(counts: Vec<u32>) -> Multidegree {
        Multidegree(counts)
    }

    /// Parses `3,3,1`.
    pub fn parse(text: &str) -> Result<Multidegree, ParseError> {
        let mut counts = Vec::new();
        let mut offset = 0;
        for part in text.split(',') {
            let t = part.trim();
            let v = t
                .parse::<u32>()
                .map_err(|_| ParseError::new(offset, format!("bad multidegree entry {t:?}")))?;
            counts.push(v);
            offset += part.len() + 1;
        }
        Ok(Multidegree(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn is_multilinear(&self) -> bool {
        self.0.iter().all(|&c| c <= 1)
    }

    /// Entries in non-increasing order (the letter-permutation class).
    pub fn sorted_desc(&self) -> Multidegree {
        let mut c = self.0.clone();
        c.sort_unstable_by(|a, b| b.cmp(a));
        Multidegree(c)
    }

    /// Drops trailing zero entries.
    pub fn trimmed(&self) -> Multidegree {
        let mut c = self.0.clone();
        while c.last() == Some(&0) {
            c.pop();
        }
        Multidegree(c)
    }

    pub fn add(&self, other: &Multidegree) -> Multidegree {
        let n = self.d().max(other.d());
        let get = |m: &Multidegree, i: usize| m.0.get(i).copied().unwrap_or(0);
        Multidegree((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    /// Multinomial coefficient `|Λ|! / Π λ_i!`, or `None` on overflow.
    pub fn word_count(&self) -> Option<u64> {
        let mut total: u128 = 1;
        let mut n: u128 = 0;
        for &c in &self.0 {
            for k in 1..=c as u128 {
                n += 1;
                total = total.checked_mul(n)? / k;
                if total > u64::MAX as u128 {
                    return None;
                }
            }
        }
        Some(total as u64)
    }
}

impl fmt::Display for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Signals a component larger than the configured column budget.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("component {mdeg} has {count} words, above the column budget {budget}")]
pub struct BudgetExceeded {
    pub mdeg: Multidegree,
    pub count: u128,
    pub budget: u64,
}

/// All words of multidegree `Λ` in the word order.
pub fn enumerate_words(mdeg: &Multidegree, budget: u64) -> Result<Vec<Word>, BudgetExceeded> {
    let count = mdeg.word_count();
    match count {
        Some(c) if c <= budget => {}
        _ => {
            return Err(BudgetExceeded {
                mdeg: mdeg.clone(),
                count: count.map(|c| c as u128).unwrap_or(u128::MAX),
                budget,
            })
        }
    }
    let mut current: Vec<u8> = Vec::with_capacity(mdeg.total());
    for (i, &c) in mdeg.0.iter().enumerate() {
        current.extend(std::iter::repeat(i as u8).take(c as usize));
    }
    let mut out = Vec::with_capacity(count.unwrap() as usize);
    loop {
        out.push(Word::from_letters(&current));
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Position of a word inside `enumerate_words(Λ)` without materializing the list.
#[derive(Clone, Debug)]
pub struct WordIndexer {
    mdeg: Multidegree,
    size: u64,
}

impl WordIndexer {
    pub fn new(mdeg: &Multidegree) -> Option<WordIndexer> {
        let size = mdeg.word_count()?;
        Some(WordIndexer { mdeg: mdeg.clone(), size })
    }

    pub fn len(&self) -> usize {
        self.size as usize
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Rank of `w`, or `None` if `w` has a different multidegree.
    pub fn rank(&self, w: &[u8]) -> Option<usize> {
        let d = self.mdeg.d();
        if w.len() != self.mdeg.total() {
            return None;
        }
        let mut cnt: SmallVec<[u64; 16]> = self.mdeg.0.iter().map(|&c| c as u64).collect();
        let mut remaining = w.len() as u64;
        let mut total = self.size;
        let mut rank = 0u64;
        for &l in w {
            let l = l as usize;
            if l >= d || cnt[l] == 0 {
                return None;
            }
            for c in 0..l {
                if cnt[c] > 0 {
                    rank += total * cnt[c] / remaining;
                }
            }
            total = total * cnt[l] / remaining;
            cnt[l] -= 1;
            remaining -= 1;
        }
        Some(rank as usize)
    }
}

/// Lyndon words of length exactly `k` over `d` letters, in lexicographic
/// order. These are the least rotations of the primitive cycles.
pub fn primitive_cycles(d: usize, k: usize) -> Vec<Word> {
    assert!(d >= 1 && k >= 1);
    let mut out = Vec::new();
    // Fredricksen–Kessler–Maiorana generation of Lyndon words up to length k.
    let mut w: Vec<usize> = vec![0];
    loop {
        if w.len() == k {
            out.push(Word::from_letters(&w.iter().map(|&l| l as u8).collect::<Vec<_>>()));
        }
        let m = w.len();
        while w.len() < k {
            let l = w[w.len() - m];
            w.push(l);
        }
        while let Some(&last) = w.last() {
            if last == d - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

/// `(1/k) Σ_{e|k} μ(e) d^{k/e}`.
pub fn primitive_cycle_count(d: u64, k: u64) -> u64 {
    let mut total: i128 = 0;
    for e in 1..=k {
        if k % e == 0 {
            total += mobius(e) as i128 * (d as i128).pow((k / e) as u32);
        }
    }
    (total / k as i128) as u64
}

fn mobius(mut n: u64) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Whether `w` matches one of the forms `w1`, `w1 x w2`, `w1 x^2 w2`,
/// `w1 x^2 u x w2` (u non-empty, x-free) with respect to `letter`.
pub fn is_canonical_in(w: &[u8], letter: u8) -> bool {
    let blocks = letter_blocks(w, letter);
    match blocks.as_slice() {
        [] => true,
        [(_, len)] => *len <= 2,
        [(_, 2), (_, 1)] => true,
        _ => false,
    }
}

/// Canonical with respect to every letter.
pub fn is_canonical(w: &Word) -> bool {
    let mut seen = [false; 256];
    for &l in w.letters() {
        if !seen[l as usize] {
            seen[l as usize] = true;
            if !is_canonical_in(w.letters(), l) {
                return false;
            }
        }
    }
    true
}

/// Maximal runs of `letter` as (start, length).
pub fn letter_blocks(w: &[u8], letter: u8) -> SmallVec<[(usize, usize); 4]> {
    let mut out = SmallVec::new();
    let mut i = 0;
    while i < w.len() {
        if w[i] == letter {
            let s = i;
            while i < w.len() && w[i] == letter {
                i += 1;
            }
            out.push((s, i - s));
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn parse_and_print_round_trip() {
        let x = w("x1^2 x2^2 x1 x2");
        assert_eq!(x.letters(), &[0, 0, 1, 1, 0, 1]);
        assert_eq!(x.to_string(), "x1^2 x2^2 x1 x2");
        assert_eq!(w("1"), Word::empty());
        assert_eq!(w("  "), Word::empty());
        assert_eq!(w("x10 x1"), Word::from_indices(&[10, 1]));
        let e = Word::parse("x1 y2").unwrap_err();
        assert_eq!(e.pos, 3);
        assert!(Word::parse("x0").is_err());
    }

    #[test]
    fn multidegree_of_words() {
        assert_eq!(w("x1 x2 x1").mdeg(2).counts(), &[2, 1]);
        assert_eq!(Word::empty().mdeg(3).counts(), &[0, 0, 0]);
        assert_eq!(w("x1^2 x2^2 x1 x2").mdeg(2).counts(), &[3, 3]);
    }

    #[test]
    fn enumeration_counts_and_order() {
        let words = enumerate_words(&Multidegree::new(vec![1, 1]), 100).unwrap();
        assert_eq!(words, vec![w("x1 x2"), w("x2 x1")]);
        assert_eq!(enumerate_words(&Multidegree::new(vec![3, 2]), 100).unwrap().len(), 10);
        assert_eq!(
            enumerate_words(&Multidegree::new(vec![3, 3, 3]), 10_000).unwrap().len(),
            1680
        );
        let err = enumerate_words(&Multidegree::new(vec![3, 3, 3]), 1000).unwrap_err();
        assert_eq!(err.count, 1680);
    }

    #[test]
    fn enumeration_matches_multinomial_exhaustively() {
        fn rec(prefix: &mut Vec<u32>, d: usize, left: u32, out: &mut Vec<Multidegree>) {
            if prefix.len() == d {
                out.push(Multidegree::new(prefix.clone()));
                return;
            }
            for c in 0..=left {
                prefix.push(c);
                rec(prefix, d, left - c, out);
                prefix.pop();
            }
        }
        let mut all = Vec::new();
        for d in 1..=4 {
            rec(&mut Vec::new(), d, 9, &mut all);
        }
        for m in all {
            let words = enumerate_words(&m, u64::MAX).unwrap();
            // independent count: n! / prod(c!)
            let fact = |n: u64| (1..=n).product::<u64>().max(1);
            let expected = fact(m.total() as u64)
                / m.counts().iter().map(|&c| fact(c as u64)).product::<u64>();
            assert_eq!(words.len() as u64, expected, "{m}");
            assert!(words.windows(2).all(|p| p[0] < p[1]));
            let idx = WordIndexer::new(&m).unwrap();
            for (i, x) in words.iter().enumerate().step_by(7) {
                assert_eq!(idx.rank(x.letters()), Some(i));
            }
        }
    }

    #[test]
    fn canonical_forms() {
        assert!(is_canonical(&w("x1^2 x2 x1")));
        assert!(!is_canonical(&w("x1 x2 x1")));
        assert!(!is_canonical(&w("x1^3")));
        assert!(is_canonical(&w("x2 x1^2 x3 x2^2")) == false);
        assert!(is_canonical(&w("x1^2 x2^2 x1")));
        assert!(!is_canonical(&w("x1 x2 x1^2")));
    }

    #[test]
    fn cyclic_representatives() {
        assert_eq!(w("x2 x1").cyclic_representative(), w("x1 x2"));
        assert_eq!(w("x1 x2 x1").cyclic_representative(), w("x1 x1 x2"));
        assert_eq!(w("x1 x1").cyclic_representative(), w("x1 x1"));
    }

    fn brute_primitive(d: usize, k: usize) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        let total = d.pow(k as u32);
        for mut n in 0..total {
            let mut letters = vec![0u8; k];
            for slot in letters.iter_mut() {
                *slot = (n % d) as u8;
                n /= d;
            }
            let word = Word::from_letters(&letters);
            if word.is_primitive() {
                out.insert((0..k).map(|r| word.rotate(r)).min().unwrap());
            }
        }
        out
    }

    #[test]
    fn primitive_cycles_match_brute_force() {
        for d in 1..=3 {
            for k in 1..=8 {
                let got: BTreeSet<Word> = primitive_cycles(d, k).into_iter().collect();
                assert_eq!(got, brute_primitive(d, k), "d={d} k={k}");
                assert_eq!(got.len() as u64, primitive_cycle_count(d as u64, k as u64));
            }
        }
        assert_eq!(primitive_cycles(2, 2), vec![w("x1 x2")]);
        assert_eq!(primitive_cycles(2, 3), vec![w("x1^2 x2"), w("x1 x2^2")]);
        assert_eq!(primitive_cycles(2, 1), vec![w("x1"), w("x2")]);
    }

    proptest::proptest! {
        #[test]
        fn cyclic_representative_is_rotation_invariant(
            letters in proptest::collection::vec(0u8..3, 1..12),
            r in 0usize..12,
        ) {
            let x = Word::from_letters(&letters);
            let rep = x.cyclic_representative();
            proptest::prop_assert_eq!(rep.cyclic_representative(), rep.clone());
            proptest::prop_assert_eq!(x.rotate(r).cyclic_representative(), rep.clone());
            let brute = (0..x.len()).map(|k| x.rotate(k)).min().unwrap();
            proptest::prop_assert_eq!(rep, brute);
        }
    }
}
