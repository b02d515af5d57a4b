//! Finite linear combinations of words and the expression parser.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Characteristic, Scalar};
use crate::word::{Multidegree, ParseError, Word, WordScanner};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LinCombError {
    #[error("combination is not homogeneous: {0} and {1} differ")]
    Inhomogeneous(Multidegree, Multidegree),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// `Σ α_i u_i` over a field of fixed characteristic. Zero coefficients are
/// never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct LinComb {
    chr: Characteristic,
    terms: BTreeMap<Word, Scalar>,
}

impl LinComb {
    pub fn zero(chr: Characteristic) -> LinComb {
        LinComb { chr, terms: BTreeMap::new() }
    }

    pub fn word(w: Word, chr: Characteristic) -> LinComb {
        let mut e = LinComb::zero(chr);
        e.add_term(w, chr.one());
        e
    }

    pub fn from_terms(chr: Characteristic, terms: impl IntoIterator<Item = (Word, Scalar)>) -> LinComb {
        let mut e = LinComb::zero(chr);
        for (w, c) in terms {
            e.add_term(w, c);
        }
        e
    }

    /// Integer-coefficient shorthand, reduced into the field.
    pub fn from_int_terms(chr: Characteristic, terms: &[(i64, &str)]) -> LinComb {
        LinComb::from_terms(
            chr,
            terms.iter().map(|(c, w)| (Word::parse(w).expect("word literal"), chr.from_i64(*c))),
        )
    }

    /// Parses sums of products such as `2 x1^2 x3 - (x1 x2 - x2 x1) x3`.
    pub fn parse(text: &str, chr: Characteristic) -> Result<LinComb, LinCombError> {
        let mut p = ExprParser { s: WordScanner::new(text, 0), chr };
        let e = p.expr()?;
        p.s.skip_ws();
        if p.s.pos < p.s.src.len() {
            return Err(ParseError::new(p.s.pos, "unexpected character").into());
        }
        e.mdeg(0)?;
        Ok(e)
    }

    pub fn characteristic(&self) -> Characteristic {
        self.chr
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(|| self.chr.zero())
    }

    pub fn add_term(&mut self, w: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &LinComb, c: &Scalar) {
        for (w, v) in other.iter() {
            self.add_term(w.clone(), v * c);
        }
    }

    pub fn scaled(&self, c: &Scalar) -> LinComb {
        let mut e = LinComb::zero(self.chr);
        e.add_scaled(self, c);
        e
    }

    pub fn plus(&self, other: &LinComb) -> LinComb {
        let mut e = self.clone();
        e.add_scaled(other, &self.chr.one());
        e
    }

    pub fn minus(&self, other: &LinComb) -> LinComb {
        let mut e = self.clone();
        e.add_scaled(other, &self.chr.from_i64(-1));
        e
    }

    /// Noncommutative product (concatenation of words).
    pub fn times(&self, other: &LinComb) -> LinComb {
        let mut e = LinComb::zero(self.chr);
        for (a, x) in self.iter() {
            for (b, y) in other.iter() {
                e.add_term(a.mul(b), x * y);
            }
        }
        e
    }

    pub fn left_mul(&self, w: &Word) -> LinComb {
        LinComb::from_terms(self.chr, self.iter().map(|(u, c)| (w.mul(u), c.clone())))
    }

    pub fn right_mul(&self, w: &Word) -> LinComb {
        LinComb::from_terms(self.chr, self.iter().map(|(u, c)| (u.mul(w), c.clone())))
    }

    /// Applies a word-to-word map termwise.
    pub fn map_words(&self, f: impl Fn(&Word) -> Word) -> LinComb {
        LinComb::from_terms(self.chr, self.iter().map(|(u, c)| (f(u), c.clone())))
    }

    /// Reinterprets integer-valued coefficients in another characteristic.
    pub fn reduce_to(&self, chr: Characteristic) -> LinComb {
        LinComb::from_terms(
            chr,
            self.iter().map(|(u, c)| {
                let q = c.to_rational_lift();
                (u.clone(), chr.from_rational(&q).expect("coefficient not invertible"))
            }),
        )
    }

    /// Smallest alphabet size covering all words.
    pub fn alphabet_size(&self) -> usize {
        self.words().map(|w| w.alphabet_size()).max().unwrap_or(0)
    }

    /// Common multidegree over at least `d` letters; the zero combination
    /// reports the empty multidegree.
    pub fn mdeg(&self, d: usize) -> Result<Multidegree, LinCombError> {
        let d = d.max(self.alphabet_size());
        let mut it = self.words();
        let first = match it.next() {
            Some(w) => w.mdeg(d),
            None => return Ok(Multidegree::new(vec![0; d])),
        };
        for w in it {
            let m = w.mdeg(d);
            if m != first {
                return Err(LinCombError::Inhomogeneous(first, m));
            }
        }
        Ok(first)
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.iter()
            .map(|(w, c)| TermJson { coeff: c.to_text(), word: w.to_string() })
            .collect()
    }

    pub fn from_json(terms: &[TermJson], chr: Characteristic) -> Result<LinComb, String> {
        let mut e = LinComb::zero(chr);
        for t in terms {
            let w = Word::parse(&t.word).map_err(|e| e.to_string())?;
            let c = chr.parse_scalar(&t.coeff).map_err(|e| e.to_string())?;
            e.add_term(w, c);
        }
        Ok(e)
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let lift = c.to_rational_lift();
            let negative = self.chr.is_zero() && c.is_negative_lift();
            let mag = if negative { (-lift).to_string() } else { c.to_text() };
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            if mag != "1" {
                write!(f, "{mag} ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// Standalone JSON form: `{"char": p, "terms": [{"coeff", "word"}, …]}`.
#[derive(Serialize, Deserialize)]
struct LinCombJson {
    #[serde(rename = "char")]
    chr: Characteristic,
    terms: Vec<TermJson>,
}

impl Serialize for LinComb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LinCombJson { chr: self.chr, terms: self.to_json() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinComb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = LinCombJson::deserialize(d)?;
        LinComb::from_json(&j.terms, j.chr).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinComb[p={}]({self})", self.chr)
    }
}

/// One `{"coeff", "word"}` entry of the JSON form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub word: String,
}

struct ExprParser<'a> {
    s: WordScanner<'a>,
    chr: Characteristic,
}

impl ExprParser<'_> {
    fn expr(&mut self) -> Result<LinComb, ParseError> {
        let mut acc = LinComb::zero(self.chr);
        let mut sign = 1i64;
        self.s.skip_ws();
        match self.s.peek() {
            Some(b'-') => {
                sign = -1;
                self.s.pos += 1;
            }
            Some(b'+') => self.s.pos += 1,
            _ => {}
        }
        loop {
            let t = self.term()?;
            acc.add_scaled(&t, &self.chr.from_i64(sign));
            self.s.skip_ws();
            match self.s.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                _ => return Ok(acc),
            }
            self.s.pos += 1;
        }
    }

    fn term(&mut self) -> Result<LinComb, ParseError> {
        let mut acc = LinComb::word(Word::empty(), self.chr);
        let mut any = false;
        loop {
            self.s.skip_ws();
            match self.s.peek() {
                Some(b'*') if any => {
                    self.s.pos += 1;
                    continue;
                }
                Some(c) if c == b'x' || c == b'(' || c.is_ascii_digit() => {
                    let f = self.factor()?;
                    acc = acc.times(&f);
                    any = true;
                }
                _ => break,
            }
        }
        if !any {
            return Err(ParseError::new(self.s.pos, "expected a term"));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LinComb, ParseError> {
        let start = self.s.pos;
        match self.s.peek() {
            Some(b'x') => {
                let (l, e) = self.s.letter_token()?;
                if e > 64 {
                    return Err(ParseError::new(start, "exponent too large"));
                }
                let w = Word::from_letters(&vec![l; e as usize]);
                Ok(LinComb::word(w, self.chr))
            }
            Some(b'(') => {
                self.s.pos += 1;
                let inner = self.expr()?;
                self.s.skip_ws();
                if self.s.peek() != Some(b')') {
                    return Err(ParseError::new(self.s.pos, "expected ')'"));
                }
                self.s.pos += 1;
                let e = self.s.exponent()?;
                if e > 64 {
                    return Err(ParseError::new(start, "exponent too large"));
                }
                let mut acc = LinComb::word(Word::empty(), self.chr);
                for _ in 0..e {
                    acc = acc.times(&inner);
                }
                Ok(acc)
            }
            _ => {
                let num = self.s.number()?;
                let mut den = 1u64;
                self.s.skip_ws();
                if self.s.peek() == Some(b'/') {
                    self.s.pos += 1;
                    self.s.skip_ws();
                    den = self.s.number()?;
                    if den == 0 {
                        return Err(ParseError::new(start, "zero denominator"));
                    }
                }
                let q = BigRational::new(BigInt::from(num), BigInt::from(den));
                let c = self
                    .chr
                    .from_rational(&q)
                    .map_err(|_| ParseError::new(start, "denominator not invertible in this characteristic"))?;
                Ok(LinComb::from_terms(self.chr, [(Word::empty(), c)]))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Characteristic {
        Characteristic::ZERO
    }

    #[test]
    fn parse_sums_and_products() {
        let e = LinComb::parse("(x1 x2 - x2 x1)(x3 x4 - x4 x3)", q()).unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e.coeff(&Word::parse("x2 x1 x4 x3").unwrap()), q().from_i64(1));
        assert_eq!(e.coeff(&Word::parse("x1 x2 x4 x3").unwrap()), q().from_i64(-1));
        let f = LinComb::parse("-2 x1^2 x2 x3 x1 + 1/2 * x2 x1^3 x3", q()).unwrap();
        assert_eq!(f.coeff(&Word::parse("x2 x1^3 x3").unwrap()).to_text(), "1/2");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = LinComb::parse("x1 x2 + ", q()).unwrap_err();
        assert!(matches!(e, LinCombError::Parse(ParseError { pos: 8, .. })), "{e:?}");
        let e = LinComb::parse("x1 + x2", q()).unwrap_err();
        assert!(matches!(e, LinCombError::Inhomogeneous(..)));
        let e = LinComb::parse("x1 ? x2", q()).unwrap_err();
        assert!(matches!(e, LinCombError::Parse(ParseError { pos: 3, .. })));
    }

    #[test]
    fn cancellation_drops_terms() {
        let e = LinComb::parse("x1 x2 - x1 x2", q()).unwrap();
        assert!(e.is_zero());
        let f3 = Characteristic::of(3);
        let e = LinComb::parse("3 x1", f3).unwrap();
        assert!(e.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let e = LinComb::parse("x1^2 x2 - 3/4 x2 x1^2", q()).unwrap();
        let j = e.to_json();
        assert_eq!(LinComb::from_json(&j, q()).unwrap(), e);
    }
}
